//! Output force of the Hoberman leg linkage and its sweep over (gamma, eps).

use crate::design::ClawDesign;
use crate::pose::{hoberman_angles, HobermanAngles};
use crate::{angle_of, unit, Vec2};
use thiserror::Error;

pub const SINGULAR_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HobermanError {
    #[error("singular posture: sin(phi) = {sin_phi:.3e}, sin(delta) = {sin_delta:.3e}")]
    Singular { sin_phi: f64, sin_delta: f64 },
}

/// Horizontal force the Hoberman linkage applies at the base rib, for a
/// total payload weight `payload_mg` (N) shared by two legs.
pub fn hoberman_force(a: &HobermanAngles, payload_mg: f64) -> Result<f64, HobermanError> {
    let (sp, sd) = (a.phi.sin(), a.delta.sin());
    let err = HobermanError::Singular { sin_phi: sp, sin_delta: sd };
    if sp.abs() < SINGULAR_TOL || sd.abs() < SINGULAR_TOL {
        return Err(err);
    }
    let ratio = a.l_bc / a.l_cd;
    let inner = ratio * (a.beta.cos() / sd + a.alpha.tan() * a.beta.sin() / sd) + a.delta.cos() / sd;
    let f = (a.epsilon.sin() + a.epsilon.cos() * inner) / sp * payload_mg / 2.0;
    if f.is_finite() {
        Ok(f)
    } else {
        Err(err)
    }
}

/// The leg linkage on its own, driven by the base rib angle. The rib pivot
/// E is at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HobermanChain {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub r1: f64,
    pub gamma: f64,
    pub gear_radius: f64,
}

/// Joint positions A (gear joint), B, C (axis slider), D (rib tip), E.
pub type ChainPoints = [Vec2; 5];

impl HobermanChain {
    pub fn from_design(d: &ClawDesign) -> Self {
        HobermanChain {
            h1: d.h1,
            h2: d.h2,
            h3: d.h3,
            r1: d.r[0],
            gamma: d.gamma,
            gear_radius: d.gear_radius,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn points(&self, epsilon: f64) -> Option<ChainPoints> {
        let e = Vec2::zeros();
        let d = e + self.r1 * Vec2::new(epsilon.sin(), epsilon.cos());
        let s2 = self.h3 * self.h3 - d.x * d.x;
        if s2 < 0.0 {
            return None;
        }
        let c = Vec2::new(0.0, d.y + s2.sqrt());
        let b = c + self.h2 * unit(angle_of(d - c) - self.gamma);
        let dx = -self.gear_radius - b.x;
        let s0 = self.h1 * self.h1 - dx * dx;
        if s0 < 0.0 {
            return None;
        }
        let a = Vec2::new(-self.gear_radius, b.y + s0.sqrt());
        Some([a, b, c, d, e])
    }

    pub fn angles(&self, epsilon: f64) -> Option<HobermanAngles> {
        self.points(epsilon).map(|[a, b, c, d, e]| hoberman_angles(a, b, c, d, e))
    }

    /// Height of the gear joint, the input the payload acts on.
    pub fn input_height(&self, epsilon: f64) -> Option<f64> {
        self.points(epsilon).map(|p| p[0].y)
    }

    pub fn force(&self, epsilon: f64, payload_mg: f64) -> Option<f64> {
        let a = self.angles(epsilon)?;
        hoberman_force(&a, payload_mg).ok()
    }

    /// Local extrema of the input height between `lo` and `hi` (toggle
    /// postures, where the output force changes sign), refined by bisection
    /// on the slope.
    pub fn toggles(&self, lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let h = 1e-6;
        let slope = |e: f64| -> Option<f64> {
            Some((self.input_height(e + h)? - self.input_height(e - h)?) / (2.0 * h))
        };
        let n = ((hi - lo) / step).round() as usize;
        let mut out = Vec::new();
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=n {
            let e = lo + i as f64 * step;
            let s = slope(e);
            if let (Some((pe, ps)), Some(s)) = (prev, s) {
                if ps == 0.0 {
                    out.push(pe);
                } else if ps * s < 0.0 {
                    let (mut a, mut b, mut sa) = (pe, e, ps);
                    for _ in 0..60 {
                        let m = 0.5 * (a + b);
                        match slope(m) {
                            Some(sm) if sm * sa > 0.0 => {
                                a = m;
                                sa = sm;
                            }
                            Some(_) => b = m,
                            None => break,
                        }
                    }
                    out.push(0.5 * (a + b));
                }
            }
            prev = s.map(|s| (e, s));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub gamma: f64,
    pub epsilon: f64,
    pub f_hob: Option<f64>,
}

impl SweepRow {
    pub fn evaluable(&self) -> bool {
        self.f_hob.is_some()
    }
}

/// Per-gamma summary of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaLimits {
    pub gamma: f64,
    /// Extent of evaluable epsilon on the grid.
    pub eps_min: Option<f64>,
    pub eps_max: Option<f64>,
    /// Toggle postures bounding the curling interval; the lower one is the
    /// switch between perching and hyperextended modes.
    pub mode_low: Option<f64>,
    pub mode_high: Option<f64>,
    pub peak_force: Option<f64>,
    pub peak_epsilon: Option<f64>,
}

impl GammaLimits {
    /// Whether the curling interval contains `eps`.
    pub fn reaches(&self, eps: f64) -> bool {
        let lo = self.mode_low.or(self.eps_min);
        let hi = self.mode_high.or(self.eps_max);
        matches!((lo, hi), (Some(lo), Some(hi)) if lo <= eps && eps <= hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub limits: Vec<GammaLimits>,
}

impl SweepTable {
    pub fn limits_for(&self, gamma: f64) -> Option<&GammaLimits> {
        self.limits.iter().find(|l| (l.gamma - gamma).abs() < 1e-9)
    }

    /// Gamma whose peak force over its curling interval is largest.
    pub fn argmax_peak(&self) -> Option<f64> {
        self.limits
            .iter()
            .filter_map(|l| l.peak_force.map(|f| (l.gamma, f)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(g, _)| g)
    }
}

/// Curling interval is the toggle-bounded stretch of epsilon containing
/// this reference posture.
pub const CURL_REFERENCE: f64 = 45.0 * std::f64::consts::PI / 180.0;

pub fn sweep_mechanical_advantage(
    design: &ClawDesign,
    gammas: &[f64],
    eps_range: (f64, f64),
    eps_step: f64,
    payload_mg: f64,
) -> SweepTable {
    let base = HobermanChain::from_design(design);
    let n = ((eps_range.1 - eps_range.0) / eps_step).round().max(0.0) as usize;
    let mut rows = Vec::new();
    let mut limits = Vec::new();
    for &g in gammas {
        let chain = base.with_gamma(g);
        let cells: Vec<SweepRow> = (0..=n)
            .map(|i| {
                let e = eps_range.0 + i as f64 * eps_step;
                SweepRow { gamma: g, epsilon: e, f_hob: chain.force(e, payload_mg) }
            })
            .collect();

        let toggles = chain.toggles(eps_range.0, eps_range.1, eps_step);
        let mode_low = toggles.iter().copied().filter(|&t| t < CURL_REFERENCE).fold(None, |m: Option<f64>, t| {
            Some(m.map_or(t, |m| m.max(t)))
        });
        let mode_high = toggles.iter().copied().filter(|&t| t > CURL_REFERENCE).fold(None, |m: Option<f64>, t| {
            Some(m.map_or(t, |m| m.min(t)))
        });
        let ev: Vec<&SweepRow> = cells.iter().filter(|r| r.evaluable()).collect();
        let mut lim = GammaLimits {
            gamma: g,
            eps_min: ev.first().map(|r| r.epsilon),
            eps_max: ev.last().map(|r| r.epsilon),
            mode_low,
            mode_high,
            peak_force: None,
            peak_epsilon: None,
        };
        for r in &ev {
            if !lim.reaches(r.epsilon) {
                continue;
            }
            let f = r.f_hob.unwrap().abs();
            if lim.peak_force.map_or(true, |p| f > p) {
                lim.peak_force = Some(f);
                lim.peak_epsilon = Some(r.epsilon);
            }
        }
        limits.push(lim);
        rows.extend(cells);
    }
    SweepTable { rows, limits }
}
