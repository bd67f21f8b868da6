//! Biped walking gait: half-ellipse foot paths, two-link leg IK, support
//! polygons and pitch margins. Lengths in cm.

use crate::Vec2;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegGeometry {
    pub upper_limb: f64,
    pub lower_limb: f64,
    pub hip_separation: f64,
    pub foot_contact_length: f64,
}

impl Default for LegGeometry {
    fn default() -> Self {
        LegGeometry { upper_limb: 7.0, lower_limb: 10.0, hip_separation: 10.5, foot_contact_length: 9.5 }
    }
}

impl LegGeometry {
    pub fn reach(&self) -> f64 {
        self.upper_limb + self.lower_limb
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaitError {
    #[error("foot point unreachable: distance {distance:.4} cm outside [{min:.4}, {max:.4}] (deficit {deficit:.4} cm)")]
    Unreachable { distance: f64, min: f64, max: f64, deficit: f64 },
    #[error("invalid gait parameter: {0}")]
    Invalid(&'static str),
    #[error("centre of gravity outside the support polygon")]
    Unstable,
}

const REACH_TOL: f64 = 1e-12;

/// Hip angle (from the downward vertical, positive forward) and knee angle
/// (interior angle between the limbs, 180 deg = straight), both in rad.
/// The knee points backward.
pub fn leg_ik(g: &LegGeometry, foot: Vec2) -> Result<(f64, f64), GaitError> {
    let (u, l) = (g.upper_limb, g.lower_limb);
    let d = foot.norm();
    let (min, max) = ((u - l).abs(), u + l);
    if d > max * (1.0 + REACH_TOL) || d <= min || d == 0.0 {
        let deficit = if d > max { d - max } else { min - d };
        return Err(GaitError::Unreachable { distance: d, min, max, deficit });
    }
    let clamp = |c: f64| c.clamp(-1.0, 1.0);
    let knee = clamp((u * u + l * l - d * d) / (2.0 * u * l)).acos();
    let offset = clamp((u * u + d * d - l * l) / (2.0 * u * d)).acos();
    let toward_foot = foot.x.atan2(-foot.y);
    Ok((toward_foot - offset, knee))
}

/// Forward kinematics matching [`leg_ik`]; returns the foot point.
pub fn leg_fk(g: &LegGeometry, hip: f64, knee: f64) -> Vec2 {
    let k = g.upper_limb * Vec2::new(hip.sin(), -hip.cos());
    // Shank turns forward of the thigh by (pi - knee).
    let shank = hip + (PI - knee);
    k + g.lower_limb * Vec2::new(shank.sin(), -shank.cos())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitParams {
    pub stride: f64,
    pub frequency: f64,
    pub samples_per_cycle: usize,
    /// Hip height above the ground line during stance.
    pub hip_height: f64,
    pub swing_height: f64,
}

impl Default for GaitParams {
    fn default() -> Self {
        GaitParams { stride: 8.0, frequency: 1.1, samples_per_cycle: 100, hip_height: 15.0, swing_height: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitSample {
    pub t: f64,
    pub hip_l: f64,
    pub knee_l: f64,
    pub hip_r: f64,
    pub knee_r: f64,
    pub foot_l: Vec2,
    pub foot_r: Vec2,
    pub stance_l: bool,
    pub stance_r: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaitPlan {
    pub params: GaitParams,
    pub phase_offset: f64,
    pub samples: Vec<GaitSample>,
}

impl GaitPlan {
    pub fn period(&self) -> f64 {
        1.0 / self.params.frequency
    }

    pub fn sample_dt(&self) -> f64 {
        self.period() / self.params.samples_per_cycle as f64
    }

    /// Stance time of one leg per cycle, s.
    pub fn stance_duration(&self) -> f64 {
        self.samples.iter().filter(|s| s.stance_l).count() as f64 * self.sample_dt()
    }

    pub fn stance_fraction(&self) -> f64 {
        self.samples.iter().filter(|s| s.stance_l).count() as f64 / self.samples.len() as f64
    }

    /// Open-loop distance covered in `seconds`.
    pub fn predicted_travel(&self, seconds: f64) -> f64 {
        self.params.stride * self.params.frequency * seconds
    }
}

/// Foot point relative to the hip at cycle phase `s` in [0, 1). The first
/// half is stance (flat, rearward), the second the swing arc.
pub fn foot_point(p: &GaitParams, s: f64) -> (Vec2, bool) {
    let half = p.stride / 2.0;
    if s < 0.5 {
        (Vec2::new(half - p.stride * (s / 0.5), -p.hip_height), true)
    } else {
        let a = PI * (s - 0.5) / 0.5;
        let lift = if p.stride > 0.0 { p.swing_height * a.sin() } else { 0.0 };
        (Vec2::new(-half * a.cos(), -p.hip_height + lift), false)
    }
}

pub fn generate_gait(g: &LegGeometry, p: &GaitParams) -> Result<GaitPlan, GaitError> {
    if !(p.frequency > 0.0) {
        return Err(GaitError::Invalid("frequency must be > 0"));
    }
    if p.samples_per_cycle < 2 || p.samples_per_cycle % 2 != 0 {
        return Err(GaitError::Invalid("samples per cycle must be even and >= 2"));
    }
    if !(p.stride >= 0.0 && p.hip_height > 0.0 && p.swing_height >= 0.0) {
        return Err(GaitError::Invalid("stride, hip height and swing height must be non-negative"));
    }
    let n = p.samples_per_cycle;
    let mut one = Vec::with_capacity(n);
    for k in 0..n {
        let (f, stance) = foot_point(p, k as f64 / n as f64);
        let (hip, knee) = leg_ik(g, f)?;
        one.push((f, stance, hip, knee));
    }
    let dt = 1.0 / (p.frequency * n as f64);
    let samples = (0..n)
        .map(|k| {
            let (fl, sl, hl, kl) = one[k];
            let (fr, sr, hr, kr) = one[(k + n / 2) % n];
            GaitSample {
                t: k as f64 * dt,
                hip_l: hl,
                knee_l: kl,
                hip_r: hr,
                knee_r: kr,
                foot_l: fl,
                foot_r: fr,
                stance_l: sl,
                stance_r: sr,
            }
        })
        .collect();
    Ok(GaitPlan { params: *p, phase_offset: 0.5, samples })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportPolygon {
    /// Counter-clockwise hull; x forward, y lateral.
    pub vertices: Vec<Vec2>,
    pub area: f64,
}

/// Andrew's monotone chain.
pub fn convex_hull(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Vec2, a: Vec2, b: Vec2| crate::cross(a - o, b - o);
    let mut lower: Vec<Vec2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Vec2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub fn shoelace(v: &[Vec2]) -> f64 {
    if v.len() < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..v.len() {
        s += crate::cross(v[i], v[(i + 1) % v.len()]);
    }
    0.5 * s.abs()
}

/// Hull of both foot contact segments, each shifted forward by its offset.
pub fn support_polygon(g: &LegGeometry, left_offset: f64, right_offset: f64) -> SupportPolygon {
    let h = g.foot_contact_length / 2.0;
    let y = g.hip_separation / 2.0;
    let pts = [
        Vec2::new(left_offset - h, y),
        Vec2::new(left_offset + h, y),
        Vec2::new(right_offset - h, -y),
        Vec2::new(right_offset + h, -y),
    ];
    let vertices = convex_hull(&pts);
    let area = shoelace(&vertices);
    SupportPolygon { vertices, area }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchMargin {
    pub fore: f64,
    pub aft: f64,
}

impl PitchMargin {
    /// Whether a pitch angle (positive nose-down, fore) is inside.
    pub fn contains(&self, pitch: f64) -> bool {
        pitch <= self.fore && -pitch <= self.aft
    }
}

fn inside(poly: &[Vec2], p: Vec2) -> bool {
    if poly.len() < 3 {
        return false;
    }
    (0..poly.len()).all(|i| crate::cross(poly[(i + 1) % poly.len()] - poly[i], p - poly[i]) >= -1e-12)
}

/// Pitch the platform can take before the gravity line leaves the polygon.
pub fn stability_margin(poly: &SupportPolygon, cog_height: f64, cog: Vec2) -> Result<PitchMargin, GaitError> {
    if !inside(&poly.vertices, cog) {
        return Err(GaitError::Unstable);
    }
    if !(cog_height > 0.0) {
        return Err(GaitError::Invalid("cog height must be > 0"));
    }
    // Intersections of the longitudinal line through the cog with the edges.
    let v = &poly.vertices;
    let (mut fore, mut aft) = (0.0f64, 0.0f64);
    for i in 0..v.len() {
        let (a, b) = (v[i], v[(i + 1) % v.len()]);
        if (a.y - cog.y) * (b.y - cog.y) > 0.0 || a.y == b.y {
            continue;
        }
        let x = a.x + (cog.y - a.y) / (b.y - a.y) * (b.x - a.x);
        fore = fore.max(x - cog.x);
        aft = aft.max(cog.x - x);
    }
    Ok(PitchMargin { fore: (fore / cog_height).atan(), aft: (aft / cog_height).atan() })
}

/// COG height giving a symmetric margin `margin` over a half-length `half`.
pub fn cog_height_for_margin(half: f64, margin: f64) -> f64 {
    half / margin.tan()
}
