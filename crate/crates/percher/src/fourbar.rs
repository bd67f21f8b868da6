//! Closed-form position analysis of a planar four-bar.
//!
//! Ground pivots A and D, crank AB, coupler BC, rocker CD. `theta3` is the
//! direction of B->C and `theta4` the direction of C->D, so the rocker seen
//! from its ground pivot points along `theta4 + pi`.

use crate::{angle_of, unit, Vec2};
use thiserror::Error;

const COS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourBar {
    pub a: Vec2,
    pub d: Vec2,
    pub ab: f64,
    pub bc: f64,
    pub cd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Open,
    Crossed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourBarSolution {
    pub branch: Branch,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
    pub b: Vec2,
    pub c: Vec2,
}

impl FourBarSolution {
    /// Rocker direction D->C.
    pub fn rocker_angle(&self) -> f64 {
        crate::wrap_pi(self.theta4 + std::f64::consts::PI)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solutions {
    pub open: FourBarSolution,
    pub crossed: FourBarSolution,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FourBarError {
    #[error("four-bar not assemblable: triangle B-C-D with BD = {bd:.6}, BC = {bc:.6}, CD = {cd:.6}")]
    Unassemblable { bd: f64, bc: f64, cd: f64 },
    #[error("invalid four-bar: {0}")]
    Invalid(&'static str),
}

fn clamped_acos(x: f64) -> Option<f64> {
    if x.abs() <= 1.0 {
        Some(x.acos())
    } else if x.abs() <= 1.0 + COS_TOL {
        Some(x.signum().acos())
    } else {
        None
    }
}

impl FourBar {
    pub fn ground_angle(&self) -> f64 {
        angle_of(self.d - self.a)
    }

    pub fn ground_length(&self) -> f64 {
        (self.d - self.a).norm()
    }

    /// Both assembly branches at absolute crank angle `theta2`.
    pub fn solve(&self, theta2: f64) -> Result<Solutions, FourBarError> {
        if !(self.ab > 0.0 && self.bc > 0.0 && self.cd > 0.0) {
            return Err(FourBarError::Invalid("link lengths must be positive"));
        }
        if self.ground_length() == 0.0 {
            return Err(FourBarError::Invalid("coincident ground pivots"));
        }
        let theta1 = self.ground_angle();
        let b = self.a + self.ab * unit(theta2);
        let bd_vec = self.d - b;
        let bd = bd_vec.norm();
        let err = FourBarError::Unassemblable { bd, bc: self.bc, cd: self.cd };
        if bd == 0.0 {
            return Err(err);
        }
        // B->D points along theta1 - beta.
        let beta = theta1 - angle_of(bd_vec);
        let phi = clamped_acos((self.bc * self.bc + bd * bd - self.cd * self.cd) / (2.0 * self.bc * bd))
            .ok_or(err.clone())?;
        let delta = clamped_acos((self.cd * self.cd + bd * bd - self.bc * self.bc) / (2.0 * self.cd * bd))
            .ok_or(err)?;

        let make = |branch: Branch, t3: f64, t4: f64| FourBarSolution {
            branch,
            theta2,
            theta3: t3,
            theta4: t4,
            b,
            c: b + self.bc * unit(t3),
        };
        Ok(Solutions {
            open: make(Branch::Open, theta1 - beta + phi, theta1 - beta - delta),
            crossed: make(Branch::Crossed, theta1 - beta - phi, theta1 - beta + delta),
        })
    }

    /// |B + BC u(theta3) - (D - CD u(theta4))|: distance between C reached
    /// along the coupler and along the rocker.
    pub fn closure_residual(&self, s: &FourBarSolution) -> f64 {
        let via_coupler = s.b + self.bc * unit(s.theta3);
        let via_rocker = self.d - self.cd * unit(s.theta4);
        let crank = (s.b - self.a).norm() - self.ab;
        (via_coupler - via_rocker).norm().max(crank.abs())
    }

    /// Grashof condition s + l <= p + q.
    pub fn is_grashof(&self) -> bool {
        let mut v = [self.ab, self.bc, self.cd, self.ground_length()];
        v.sort_by(|a, b| a.total_cmp(b));
        v[0] + v[3] <= v[1] + v[2]
    }
}
