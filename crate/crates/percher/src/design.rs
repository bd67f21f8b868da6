//! Claw link dimensions and the sizing procedure that produces them.

use crate::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Link lengths (mm) and fixed angles (rad) of one claw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClawDesign {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub gamma: f64,
    /// Toe-pad segments t1..t4.
    pub t: [f64; 4],
    /// Ribs r1..r4.
    pub r: [f64; 4],
    /// Outer-links l1..l4.
    pub l: [f64; 4],
    pub gear_radius: f64,
    pub sole_thickness: f64,
    /// Cumulative hub angles from vertical.
    pub hub_angles: [f64; 4],
}

impl ClawDesign {
    /// The fabricated 30 mm claw.
    pub fn table_s1() -> Self {
        ClawDesign {
            h1: 35.00,
            h2: 35.00,
            h3: 28.22,
            gamma: 150f64.to_radians(),
            t: [15.71, 13.09, 10.47, 11.88],
            r: [25.19, 19.93, 16.34, 12.31],
            l: [22.91, 17.45, 14.21, 9.89],
            gear_radius: 4.0,
            sole_thickness: 4.0,
            hub_angles: [60f64, 115.0, 165.0, 225.0].map(f64::to_radians),
        }
    }

    pub fn total_pad_length(&self) -> f64 {
        self.t.iter().sum()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let lengths = [
            ("h1", self.h1),
            ("h2", self.h2),
            ("h3", self.h3),
            ("t1", self.t[0]),
            ("t2", self.t[1]),
            ("t3", self.t[2]),
            ("t4", self.t[3]),
            ("r1", self.r[0]),
            ("r2", self.r[1]),
            ("r3", self.r[2]),
            ("r4", self.r[3]),
            ("l1", self.l[0]),
            ("l2", self.l[1]),
            ("l3", self.l[2]),
            ("l4", self.l[3]),
            ("gear_radius", self.gear_radius),
            ("sole_thickness", self.sole_thickness),
        ];
        for (name, x) in lengths {
            if !(x > 0.0 && x.is_finite()) {
                v.push(Violation::new("positive lengths", format!("{name} = {x}")));
            }
        }
        if !(self.h3 > self.r[0]) {
            v.push(Violation::new(
                "h3 > r1",
                format!("h3 = {} , r1 = {}", self.h3, self.r[0]),
            ));
        }
        let g = self.gamma.to_degrees();
        if !(90.0..=180.0).contains(&g) {
            v.push(Violation::new("gamma range", format!("gamma = {g} deg")));
        }
        let h = self.hub_angles;
        if !h.windows(2).all(|w| w[1] > w[0]) || h[3] > 270f64.to_radians() + 1e-12 {
            v.push(Violation::new(
                "hub angles",
                format!(
                    "{:?} deg must increase and end at or below 270",
                    h.map(f64::to_degrees)
                ),
            ));
        }
        ValidationReport { violations: v }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub rule: &'static str,
    pub detail: String,
}

impl Violation {
    fn new(rule: &'static str, detail: String) -> Self {
        Violation { rule, detail }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

/// Inputs to [`size_claw`]. Angles in radians, lengths in mm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizingSpec {
    pub min_perch_diameter: f64,
    pub overlap_angle: f64,
    pub hub_increments: [f64; 4],
    pub hub_clearance_base: f64,
    pub hub_clearance_tip: f64,
    /// Arc radius of each toe-pad segment as a multiple of the minimum perch
    /// radius. 1.0 everywhere is the plain arc length on the perch surface.
    pub segment_radius_factors: [f64; 4],
    /// Height of each outer joint L0..L3 above the hub circle.
    pub outer_heights: [f64; 4],
    /// Angular offset of L_k from hub T_{k+1}, positive toward the tip.
    pub outer_leads: [f64; 4],
    pub rib_margin: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub gamma: f64,
    pub gear_radius: f64,
}

impl Default for SizingSpec {
    fn default() -> Self {
        // Segment radii and outer joint placement are calibrated so that
        // the fabricated pad and Fin Ray lengths come out of the procedure.
        let inc = [60f64, 55.0, 50.0, 60.0].map(f64::to_radians);
        let r_min = 15.0;
        let pad = ClawDesign::table_s1().t;
        let mut k = [0.0; 4];
        for i in 0..4 {
            k[i] = pad[i] / (r_min * inc[i]);
        }
        SizingSpec {
            min_perch_diameter: 30.0,
            overlap_angle: 90f64.to_radians(),
            hub_increments: inc,
            hub_clearance_base: 4.0,
            hub_clearance_tip: 2.0,
            segment_radius_factors: k,
            outer_heights: [
                9.751263080148629,
                7.668293872961964,
                8.338692909012668,
                6.816846685597568,
            ],
            outer_leads: [
                -0.42193865793596785,
                -1.7646488781675345,
                -4.081197392789278,
                -18.6185603338423,
            ]
            .map(f64::to_radians),
            rib_margin: 1.0,
            h1: 35.0,
            h2: 35.0,
            h3: 28.22,
            gamma: 150f64.to_radians(),
            gear_radius: 4.0,
        }
    }
}

impl SizingSpec {
    /// Toe-pad lengths if every segment were the plain arc on the perch.
    pub fn formula_pad_lengths(&self) -> [f64; 4] {
        let r = self.min_perch_diameter / 2.0;
        self.hub_increments.map(|a| r * a)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SizingError {
    #[error("invalid sizing spec: {0}")]
    InvalidSpec(String),
    #[error("hub increments sum to {sum_deg:.3} deg, expected 180 + overlap/2 = {expected_deg:.3} deg")]
    IncrementSum { sum_deg: f64, expected_deg: f64 },
    #[error("rib r{rib} clears the sole by {height:.3} mm, needs {required:.3} mm")]
    RibClearance { rib: usize, height: f64, required: f64 },
    #[error("h3 > r1 violated: h3 = {h3:.3}, r1 = {r1:.3}")]
    HobermanTooShort { h3: f64, r1: f64 },
    #[error("sized design invalid: {0}")]
    Invalid(String),
}

/// Sized design plus the joint layout it was derived from.
pub fn size_claw(spec: &SizingSpec) -> Result<ClawDesign, SizingError> {
    if !(spec.min_perch_diameter > 0.0) {
        return Err(SizingError::InvalidSpec("min_perch_diameter must be > 0".into()));
    }
    if !(spec.overlap_angle >= 0.0) {
        return Err(SizingError::InvalidSpec("overlap_angle must be >= 0".into()));
    }
    if spec.hub_increments.iter().any(|&a| !(a > 0.0)) {
        return Err(SizingError::InvalidSpec("hub increments must be positive".into()));
    }
    if spec.segment_radius_factors.iter().any(|&k| !(k > 0.0)) {
        return Err(SizingError::InvalidSpec("segment radius factors must be positive".into()));
    }
    let sum: f64 = spec.hub_increments.iter().sum();
    let expected = PI + spec.overlap_angle / 2.0;
    if (sum - expected).abs() > 1e-9 {
        return Err(SizingError::IncrementSum {
            sum_deg: sum.to_degrees(),
            expected_deg: expected.to_degrees(),
        });
    }

    let rp = spec.min_perch_diameter / 2.0;
    let mut t = [0.0; 4];
    for i in 0..4 {
        t[i] = spec.segment_radius_factors[i] * rp * spec.hub_increments[i];
    }

    let hub_r = rp + spec.hub_clearance_base;
    let mut hub_ang = [0.0; 5];
    for i in 0..4 {
        hub_ang[i + 1] = hub_ang[i] + t[i] / rp;
    }
    let polar = |ang: f64, rad: f64| Vec2::new(rad * ang.sin(), rad * ang.cos());
    let hubs = hub_ang.map(|a| polar(a, hub_r));

    let mut outer = [Vec2::zeros(); 4];
    for k in 0..4 {
        let frac = k as f64 / 3.0;
        let clearance =
            spec.hub_clearance_base + frac * (spec.hub_clearance_tip - spec.hub_clearance_base);
        let required = clearance + spec.rib_margin;
        if spec.outer_heights[k] < required {
            return Err(SizingError::RibClearance {
                rib: k + 1,
                height: spec.outer_heights[k],
                required,
            });
        }
        outer[k] = polar(hub_ang[k + 1] + spec.outer_leads[k], hub_r + spec.outer_heights[k]);
    }

    let mut r = [0.0; 4];
    let mut l = [0.0; 4];
    for k in 0..4 {
        r[k] = (outer[k] - hubs[k]).norm();
        let next = if k < 3 { outer[k + 1] } else { hubs[4] };
        l[k] = (next - outer[k]).norm();
    }
    if !(spec.h3 > r[0]) {
        return Err(SizingError::HobermanTooShort { h3: spec.h3, r1: r[0] });
    }

    let mut hub_angles = [0.0; 4];
    let mut acc = 0.0;
    for i in 0..4 {
        acc += spec.hub_increments[i];
        hub_angles[i] = acc;
    }

    let d = ClawDesign {
        h1: spec.h1,
        h2: spec.h2,
        h3: spec.h3,
        gamma: spec.gamma,
        t,
        r,
        l,
        gear_radius: spec.gear_radius,
        sole_thickness: spec.hub_clearance_base,
        hub_angles,
    };
    let report = d.validate();
    if let Some(v) = report.violations.first() {
        return Err(SizingError::Invalid(format!("{}: {}", v.rule, v.detail)));
    }
    Ok(d)
}

/// One row of the Table S1 comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub name: &'static str,
    pub unit: &'static str,
    pub table: f64,
    pub sized: f64,
    /// Value from the plain arc-length rule, where one exists.
    pub formula: Option<f64>,
    pub abs_diff: f64,
    pub flagged: bool,
    pub note: String,
}

pub const TABLE_TOL_MM: f64 = 0.01;

/// Compare a sized design against the fabricated table.
pub fn table_diff(spec: &SizingSpec, sized: &ClawDesign) -> Vec<TableRow> {
    let tab = ClawDesign::table_s1();
    let formula = spec.formula_pad_lengths();
    let mut rows = Vec::new();
    let mut push = |name: &'static str, unit: &'static str, table: f64, got: f64, f: Option<f64>| {
        let abs_diff = (got - table).abs();
        let mut notes = Vec::new();
        let mut flagged = false;
        if abs_diff > TABLE_TOL_MM {
            flagged = true;
            notes.push(format!("sized value off by {abs_diff:.4}"));
        }
        if let Some(fv) = f {
            if (fv - table).abs() > TABLE_TOL_MM {
                flagged = true;
                notes.push(format!("arc-length rule gives {fv:.2}"));
            }
        }
        rows.push(TableRow {
            name,
            unit,
            table,
            sized: got,
            formula: f,
            abs_diff,
            flagged,
            note: notes.join("; "),
        });
    };
    push("h1", "mm", tab.h1, sized.h1, None);
    push("h2", "mm", tab.h2, sized.h2, None);
    push("h3", "mm", tab.h3, sized.h3, None);
    push("gamma", "deg", tab.gamma.to_degrees(), sized.gamma.to_degrees(), None);
    let names_l = ["l1", "l2", "l3", "l4"];
    let names_r = ["r1", "r2", "r3", "r4"];
    let names_t = ["t1", "t2", "t3", "t4"];
    for i in 0..4 {
        push(names_l[i], "mm", tab.l[i], sized.l[i], None);
    }
    for i in 0..4 {
        push(names_r[i], "mm", tab.r[i], sized.r[i], None);
    }
    for i in 0..4 {
        push(names_t[i], "mm", tab.t[i], sized.t[i], Some(formula[i]));
    }
    rows
}

/// On-disk design document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignFile {
    pub schema: String,
    pub h1_mm: f64,
    pub h2_mm: f64,
    pub h3_mm: f64,
    pub gamma_deg: f64,
    pub t_mm: [f64; 4],
    pub r_mm: [f64; 4],
    pub l_mm: [f64; 4],
    pub gear_radius_mm: f64,
    pub sole_thickness_mm: f64,
    pub hub_angles_deg: [f64; 4],
}

pub const DESIGN_SCHEMA: &str = "percher_design_v1";

impl From<&ClawDesign> for DesignFile {
    fn from(d: &ClawDesign) -> Self {
        DesignFile {
            schema: DESIGN_SCHEMA.to_string(),
            h1_mm: d.h1,
            h2_mm: d.h2,
            h3_mm: d.h3,
            gamma_deg: d.gamma.to_degrees(),
            t_mm: d.t,
            r_mm: d.r,
            l_mm: d.l,
            gear_radius_mm: d.gear_radius,
            sole_thickness_mm: d.sole_thickness,
            hub_angles_deg: d.hub_angles.map(f64::to_degrees),
        }
    }
}

impl TryFrom<DesignFile> for ClawDesign {
    type Error = String;

    fn try_from(f: DesignFile) -> Result<Self, String> {
        if f.schema != DESIGN_SCHEMA {
            return Err(format!("schema must be \"{DESIGN_SCHEMA}\", got \"{}\"", f.schema));
        }
        let d = ClawDesign {
            h1: f.h1_mm,
            h2: f.h2_mm,
            h3: f.h3_mm,
            gamma: f.gamma_deg.to_radians(),
            t: f.t_mm,
            r: f.r_mm,
            l: f.l_mm,
            gear_radius: f.gear_radius_mm,
            sole_thickness: f.sole_thickness_mm,
            hub_angles: f.hub_angles_deg.map(f64::to_radians),
        };
        let rep = d.validate();
        if rep.is_ok() {
            Ok(d)
        } else {
            let msgs: Vec<String> = rep
                .violations
                .iter()
                .map(|v| format!("{}: {}", v.rule, v.detail))
                .collect();
            Err(msgs.join("; "))
        }
    }
}
