//! Squeezing force and maximum tilt angle on a round perch.

use crate::design::ClawDesign;
use crate::pose::{solve_perched_pose, PoseError, Side};
use crate::statics::{solve_pose, StaticsError};
use crate::G;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Contributing {
    /// Every toe joint T1..T4 pushing inward.
    Auto,
    /// Joints T1..Tn, each counted only while pushing inward.
    Fixed(usize),
}

impl Contributing {
    /// Joint counts used against the split perch: 2, 3, 4 for 30, 40, 50 mm.
    pub fn split_perch(perch_diameter: f64) -> Self {
        if perch_diameter < 35.0 {
            Contributing::Fixed(2)
        } else if perch_diameter < 45.0 {
            Contributing::Fixed(3)
        } else {
            Contributing::Fixed(4)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerchScenario {
    pub perch_radius: f64,
    pub payload_mass_g: f64,
    pub mu_s: f64,
    pub lever_arm: f64,
    pub contributing: Contributing,
}

impl PerchScenario {
    pub fn new(perch_diameter: f64, payload_mass_g: f64) -> Self {
        PerchScenario {
            perch_radius: perch_diameter / 2.0,
            payload_mass_g,
            mu_s: 0.5,
            lever_arm: 200.0,
            contributing: Contributing::Auto,
        }
    }

    /// Weight in N.
    pub fn weight(&self) -> f64 {
        self.payload_mass_g * 1e-3 * G
    }

    pub fn check(&self) -> Result<(), GraspError> {
        let bad = |m: &str| Err(GraspError::Scenario(m.to_string()));
        if !(self.perch_radius > 0.0) {
            return bad("perch radius must be > 0");
        }
        if !(self.payload_mass_g >= 0.0) {
            return bad("payload mass must be >= 0");
        }
        if !(self.mu_s > 0.0 && self.mu_s < 2.0) {
            return bad("mu_s must lie in (0, 2)");
        }
        if !(self.lever_arm >= 0.0) {
            return bad("lever arm must be >= 0");
        }
        if let Contributing::Fixed(n) = self.contributing {
            if !(1..=4).contains(&n) {
                return bad("contributing joints must be 1..=4");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraspError {
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Pose(#[from] PoseError),
    #[error(transparent)]
    Statics(#[from] StaticsError),
    #[error("tilt balance did not converge: no sign change of Mw - Mf up to {last_theta_deg:.2} deg (Mw {m_w:.4} N mm, Mf {m_f:.4} N mm)")]
    NoBracket { last_theta_deg: f64, m_w: f64, m_f: f64 },
    #[error("tilt bisection exceeded {iterations} iterations, bracket [{lo_deg:.4}, {hi_deg:.4}] deg")]
    NotConverged { iterations: usize, lo_deg: f64, hi_deg: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Squeeze {
    pub force: f64,
    /// Toe joints counted (1-based pad index).
    pub joints: Vec<usize>,
    /// Horizontal pad reaction at T1..T4, N.
    pub fx: [f64; 4],
}

impl Squeeze {
    pub fn normalized(&self, weight: f64) -> f64 {
        if weight > 0.0 {
            self.force / weight
        } else {
            0.0
        }
    }
}

pub fn squeeze_force(design: &ClawDesign, sc: &PerchScenario) -> Result<Squeeze, GraspError> {
    sc.check()?;
    let pose = solve_perched_pose(design, sc.perch_radius, Side::Right)?;
    let sol = solve_pose(&pose, design, sc.weight(), 0.0)?;
    let reac = sol.toe_reactions();
    let fx: [f64; 4] = std::array::from_fn(|i| reac[i + 1].x);
    let n = match sc.contributing {
        Contributing::Auto => 4,
        Contributing::Fixed(n) => n,
    };
    let mut force = 0.0;
    let mut joints = Vec::new();
    for (i, &f) in fx.iter().enumerate().take(n) {
        if f <= 0.0 && (sc.weight() > 0.0) {
            force += f.abs();
            joints.push(i + 1);
        }
    }
    Ok(Squeeze { force, joints, fx })
}

/// Friction-carrying radial load of both digits at tilt `theta`.
pub fn radial_load(design: &ClawDesign, sc: &PerchScenario, theta: f64) -> Result<f64, GraspError> {
    let mut total = 0.0;
    for side in [Side::Left, Side::Right] {
        let pose = solve_perched_pose(design, sc.perch_radius, side)?;
        let sol = solve_pose(&pose, design, sc.weight(), theta)?;
        total += sol.toe_radial().iter().filter(|&&f| f >= 0.0).sum::<f64>();
    }
    Ok(total)
}

/// (M_w, M_f) in N mm at tilt `theta`.
pub fn moments(design: &ClawDesign, sc: &PerchScenario, theta: f64) -> Result<(f64, f64), GraspError> {
    let m_w = (sc.perch_radius + sc.lever_arm) * sc.weight() * theta.sin();
    let m_f = sc.perch_radius * sc.mu_s * radial_load(design, sc, theta)?;
    Ok((m_w, m_f))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltResult {
    pub theta_max: f64,
    pub m_w: f64,
    pub m_f: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final bracket of the sign change, rad.
    pub bracket: (f64, f64),
}

pub const TILT_TOL: f64 = 0.01 * std::f64::consts::PI / 180.0;
pub const TILT_MAX_ITER: usize = 100;
const TILT_SCAN_STEP: f64 = 0.5 * std::f64::consts::PI / 180.0;
const TILT_SCAN_LIMIT: f64 = 89.5 * std::f64::consts::PI / 180.0;

/// Smallest tilt where the weight moment overtakes friction.
pub fn max_tilt(design: &ClawDesign, sc: &PerchScenario) -> Result<TiltResult, GraspError> {
    sc.check()?;
    if sc.payload_mass_g == 0.0 {
        return Ok(TiltResult {
            theta_max: 0.0,
            m_w: 0.0,
            m_f: 0.0,
            iterations: 0,
            converged: true,
            bracket: (0.0, 0.0),
        });
    }
    let g = |th: f64| moments(design, sc, th).map(|(w, f)| (w - f, w, f));

    let (mut lo, mut hi) = (0.0, f64::NAN);
    if g(0.0)?.0 >= 0.0 {
        // Nothing holds it even upright.
        return Ok(TiltResult { theta_max: 0.0, m_w: 0.0, m_f: 0.0, iterations: 0, converged: true, bracket: (0.0, 0.0) });
    }
    let mut th = 0.0;
    let mut last = (0.0, 0.0);
    while th < TILT_SCAN_LIMIT {
        th = (th + TILT_SCAN_STEP).min(TILT_SCAN_LIMIT);
        let (v, w, f) = g(th)?;
        last = (w, f);
        if v >= 0.0 {
            hi = th;
            break;
        }
        lo = th;
    }
    if hi.is_nan() {
        return Err(GraspError::NoBracket { last_theta_deg: th.to_degrees(), m_w: last.0, m_f: last.1 });
    }
    let mut it = 0;
    while hi - lo > TILT_TOL {
        if it >= TILT_MAX_ITER {
            return Err(GraspError::NotConverged { iterations: it, lo_deg: lo.to_degrees(), hi_deg: hi.to_degrees() });
        }
        let mid = 0.5 * (lo + hi);
        if g(mid)?.0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        it += 1;
    }
    let theta = 0.5 * (lo + hi);
    let (_, m_w, m_f) = g(theta)?;
    Ok(TiltResult { theta_max: theta, m_w, m_f, iterations: it, converged: true, bracket: (lo, hi) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub theta: f64,
    pub m_w: f64,
    /// None where the pose or statics could not be solved.
    pub m_f: Option<f64>,
}

pub fn tilt_moment_curve(design: &ClawDesign, sc: &PerchScenario, thetas: &[f64]) -> Vec<CurvePoint> {
    thetas
        .iter()
        .map(|&th| {
            let m_w = (sc.perch_radius + sc.lever_arm) * sc.weight() * th.sin();
            let m_f = moments(design, sc, th).ok().map(|m| m.1);
            CurvePoint { theta: th, m_w, m_f }
        })
        .collect()
}
