//! Joint positions of one digit wrapped on a circular perch.
//!
//! Frame: origin at the perch centre, y up. For the right digit x points
//! toward the digit; the left digit is the mirror image. Toe joints sit on
//! the circle of radius R + sole thickness.

use crate::design::ClawDesign;
use crate::fourbar::FourBar;
use crate::{angle_of, unit, wrap_pi, Vec2};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Right => 1.0,
            Side::Left => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerchedPose {
    pub perch_radius: f64,
    pub contact_radius: f64,
    pub toe: [Vec2; 5],
    pub outer: [Vec2; 4],
    pub hob: [Vec2; 4],
    /// Base rib angle from vertical, positive toward the digit.
    pub epsilon: f64,
    pub side: Side,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PoseError {
    #[error("invalid perch radius {0} mm")]
    InvalidRadius(f64),
    #[error("digit cannot wrap a {radius:.2} mm perch: {stage} does not assemble")]
    WrapInfeasible { radius: f64, stage: &'static str },
    #[error("perch radius {radius:.2} mm out of range: {stage} cannot close")]
    OutOfRange { radius: f64, stage: &'static str },
}

impl PerchedPose {
    /// Same pose expressed in the right-digit frame.
    pub fn local(&self) -> PerchedPose {
        match self.side {
            Side::Right => *self,
            Side::Left => self.mirrored(),
        }
    }

    pub fn mirrored(&self) -> PerchedPose {
        let m = |p: Vec2| Vec2::new(-p.x, p.y);
        PerchedPose {
            toe: self.toe.map(m),
            outer: self.outer.map(m),
            hob: self.hob.map(m),
            side: match self.side {
                Side::Left => Side::Right,
                Side::Right => Side::Left,
            },
            ..*self
        }
    }

    /// (name, position) for every joint, in the stored frame.
    pub fn joints(&self) -> Vec<(String, Vec2)> {
        let mut v = Vec::with_capacity(13);
        for (i, p) in self.toe.iter().enumerate() {
            v.push((format!("T{i}"), *p));
        }
        for (i, p) in self.outer.iter().enumerate() {
            v.push((format!("L{i}"), *p));
        }
        for (i, p) in self.hob.iter().enumerate() {
            v.push((format!("H{i}"), *p));
        }
        v
    }

    /// Every (name, solved length, design length) pair.
    pub fn link_lengths(&self, d: &ClawDesign) -> Vec<(&'static str, f64, f64)> {
        let t = &self.toe;
        let l = &self.outer;
        let h = &self.hob;
        let dist = |a: Vec2, b: Vec2| (a - b).norm();
        vec![
            ("r1", dist(t[0], l[0]), d.r[0]),
            ("r2", dist(t[1], l[1]), d.r[1]),
            ("r3", dist(t[2], l[2]), d.r[2]),
            ("r4", dist(t[3], l[3]), d.r[3]),
            ("l1", dist(l[0], l[1]), d.l[0]),
            ("l2", dist(l[1], l[2]), d.l[1]),
            ("l3", dist(l[2], l[3]), d.l[2]),
            ("l4", dist(l[3], t[4]), d.l[3]),
            ("h1", dist(h[0], h[1]), d.h1),
            ("h2", dist(h[1], h[2]), d.h2),
            ("h3", dist(h[2], h[3]), d.h3),
        ]
    }
}

/// Intersections of circle (p, rp) with circle (q, rq).
pub(crate) fn circle_intersections(p: Vec2, rp: f64, q: Vec2, rq: f64) -> Option<[Vec2; 2]> {
    let dv = q - p;
    let d = dv.norm();
    if d == 0.0 {
        return None;
    }
    let ex = dv / d;
    let x = (rp * rp - rq * rq + d * d) / (2.0 * d);
    let y2 = rp * rp - x * x;
    if y2 < -1e-12 * rp * rp {
        return None;
    }
    let y = y2.max(0.0).sqrt();
    let ey = Vec2::new(-ex.y, ex.x);
    Some([p + x * ex + y * ey, p + x * ex - y * ey])
}

/// Pick whichever candidate keeps the next outer link most nearly parallel.
fn straightest(cands: [Vec2; 2], next: Vec2, next_dir: f64) -> Vec2 {
    let bend = |c: Vec2| wrap_pi(angle_of(next - c) - next_dir).abs();
    if bend(cands[0]) <= bend(cands[1]) {
        cands[0]
    } else {
        cands[1]
    }
}

pub fn solve_perched_pose(d: &ClawDesign, radius: f64, side: Side) -> Result<PerchedPose, PoseError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(PoseError::InvalidRadius(radius));
    }
    let wrap = |stage| PoseError::WrapInfeasible { radius, stage };
    if d.total_pad_length() / radius >= std::f64::consts::TAU {
        return Err(wrap("toe pad (wraps past a full turn)"));
    }
    let rc = radius + d.sole_thickness;
    let mut toe = [Vec2::zeros(); 5];
    let mut arc = 0.0;
    for i in 0..5 {
        if i > 0 {
            arc += d.t[i - 1];
        }
        toe[i] = rc * unit(FRAC_PI_2 - arc / radius);
    }

    let [a, b] = circle_intersections(toe[3], d.r[3], toe[4], d.l[3]).ok_or(wrap("tip triangle T3-L3-T4"))?;
    let l3 = if a.norm() >= b.norm() { a } else { b };

    let mut outer = [Vec2::zeros(); 4];
    outer[3] = l3;
    let stages = ["four-bar T0-L0-L1-T1", "four-bar T1-L1-L2-T2", "four-bar T2-L2-L3-T3"];
    for k in (0..3).rev() {
        // Crank: rib k+1 about T_{k+1}; rocker: rib k about T_k.
        let fb = FourBar { a: toe[k + 1], d: toe[k], ab: d.r[k + 1], bc: d.l[k], cd: d.r[k] };
        let crank = angle_of(outer[k + 1] - toe[k + 1]);
        let sol = fb.solve(crank).map_err(|_| wrap(stages[k]))?;
        let next = outer[k + 1];
        let after = if k + 2 < 4 { outer[k + 2] } else { toe[4] };
        outer[k] = straightest([sol.open.c, sol.crossed.c], next, angle_of(after - next));
    }

    let range = |stage| PoseError::OutOfRange { radius, stage };
    let l0 = outer[0];
    let s2 = d.h3 * d.h3 - l0.x * l0.x;
    if s2 < 0.0 {
        return Err(range("h3 (H2 off the symmetry axis)"));
    }
    let h3p = l0;
    let h2p = Vec2::new(0.0, l0.y + s2.sqrt());
    let h1p = h2p + d.h2 * unit(angle_of(h3p - h2p) - d.gamma);
    let dx = -d.gear_radius - h1p.x;
    let s0 = d.h1 * d.h1 - dx * dx;
    if s0 < 0.0 {
        return Err(range("h1 (gear joint unreachable)"));
    }
    let h0p = Vec2::new(-d.gear_radius, h1p.y + s0.sqrt());

    let rib = l0 - toe[0];
    let pose = PerchedPose {
        perch_radius: radius,
        contact_radius: rc,
        toe,
        outer,
        hob: [h0p, h1p, h2p, h3p],
        epsilon: rib.x.atan2(rib.y),
        side: Side::Right,
    };
    Ok(match side {
        Side::Right => pose,
        Side::Left => pose.mirrored(),
    })
}

/// Angles entering the Hoberman force relation, all in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HobermanAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub phi: f64,
    pub l_bc: f64,
    pub l_cd: f64,
}

/// Hoberman angles from the chain A = H0, B = H1, C = H2, D = H3, with E
/// the base rib pivot.
pub fn hoberman_angles(a: Vec2, b: Vec2, c: Vec2, dp: Vec2, e: Vec2) -> HobermanAngles {
    let rib = dp - e;
    let epsilon = rib.x.atan2(rib.y);
    let th_cd = angle_of(dp - c);
    let th_cb = angle_of(b - c);
    HobermanAngles {
        alpha: angle_of(a - b) - FRAC_PI_2,
        beta: th_cb,
        gamma: (th_cd - th_cb).rem_euclid(std::f64::consts::TAU),
        delta: std::f64::consts::PI - th_cd,
        epsilon,
        phi: FRAC_PI_2 - epsilon,
        l_bc: (b - c).norm(),
        l_cd: (dp - c).norm(),
    }
}

pub fn extract_angles(pose: &PerchedPose) -> HobermanAngles {
    let p = pose.local();
    hoberman_angles(p.hob[0], p.hob[1], p.hob[2], p.hob[3], p.toe[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_intersection_symmetric() {
        let [a, b] = circle_intersections(Vec2::zeros(), 5.0, Vec2::new(8.0, 0.0), 5.0).unwrap();
        assert!((a - Vec2::new(4.0, 3.0)).norm() < 1e-12);
        assert!((b - Vec2::new(4.0, -3.0)).norm() < 1e-12);
    }

    #[test]
    fn disjoint_circles() {
        assert!(circle_intersections(Vec2::zeros(), 1.0, Vec2::new(5.0, 0.0), 1.0).is_none());
    }
}
