//! Scenario files and the analyses they drive.

use crate::design::{size_claw, table_diff, ClawDesign, DesignFile, SizingSpec, TableRow};
use crate::gait::{generate_gait, stability_margin, support_polygon, GaitParams, LegGeometry};
use crate::grasp::{max_tilt, squeeze_force, tilt_moment_curve, Contributing, PerchScenario};
use crate::hoberman::sweep_mechanical_advantage;
use crate::output::{self, num, write_atomic};
use crate::pose::{solve_perched_pose, Side};
use crate::statics::{assemble_equilibrium, solve_forces};
use crate::{Vec2, G};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const SCENARIO_SCHEMA: &str = "percher_scenario_v1";
pub const OUTPUT_DIR_ENV: &str = "PERCHER_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    pub design: DesignSource,
    pub analyses: Vec<Analysis>,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub seed: u64,
}

fn default_output_dir() -> String {
    "percher_out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignSource {
    TableS1,
    Inline(DesignFile),
    Sizing(SizingFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SizingFile {
    pub min_perch_diameter_mm: f64,
    pub overlap_deg: f64,
    pub hub_increments_deg: [f64; 4],
    pub hub_clearance_base_mm: f64,
    pub hub_clearance_tip_mm: f64,
    pub segment_radius_factors: [f64; 4],
    pub outer_heights_mm: [f64; 4],
    pub outer_leads_deg: [f64; 4],
    pub rib_margin_mm: f64,
    pub h1_mm: f64,
    pub h2_mm: f64,
    pub h3_mm: f64,
    pub gamma_deg: f64,
    pub gear_radius_mm: f64,
}

impl Default for SizingFile {
    fn default() -> Self {
        SizingFile::from(&SizingSpec::default())
    }
}

impl From<&SizingSpec> for SizingFile {
    fn from(s: &SizingSpec) -> Self {
        SizingFile {
            min_perch_diameter_mm: s.min_perch_diameter,
            overlap_deg: s.overlap_angle.to_degrees(),
            hub_increments_deg: s.hub_increments.map(f64::to_degrees),
            hub_clearance_base_mm: s.hub_clearance_base,
            hub_clearance_tip_mm: s.hub_clearance_tip,
            segment_radius_factors: s.segment_radius_factors,
            outer_heights_mm: s.outer_heights,
            outer_leads_deg: s.outer_leads.map(f64::to_degrees),
            rib_margin_mm: s.rib_margin,
            h1_mm: s.h1,
            h2_mm: s.h2,
            h3_mm: s.h3,
            gamma_deg: s.gamma.to_degrees(),
            gear_radius_mm: s.gear_radius,
        }
    }
}

impl From<&SizingFile> for SizingSpec {
    fn from(f: &SizingFile) -> Self {
        SizingSpec {
            min_perch_diameter: f.min_perch_diameter_mm,
            overlap_angle: f.overlap_deg.to_radians(),
            hub_increments: f.hub_increments_deg.map(f64::to_radians),
            hub_clearance_base: f.hub_clearance_base_mm,
            hub_clearance_tip: f.hub_clearance_tip_mm,
            segment_radius_factors: f.segment_radius_factors,
            outer_heights: f.outer_heights_mm,
            outer_leads: f.outer_leads_deg.map(f64::to_radians),
            rib_margin: f.rib_margin_mm,
            h1: f.h1_mm,
            h2: f.h2_mm,
            h3: f.h3_mm,
            gamma: f.gamma_deg.to_radians(),
            gear_radius: f.gear_radius_mm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Analysis {
    Sweep {
        gamma_min_deg: f64,
        gamma_max_deg: f64,
        gamma_step_deg: f64,
        #[serde(default = "default_eps_min")]
        epsilon_min_deg: f64,
        #[serde(default = "default_eps_max")]
        epsilon_max_deg: f64,
        #[serde(default = "default_eps_step")]
        epsilon_step_deg: f64,
        #[serde(default = "default_payload")]
        payload_g: f64,
    },
    Squeeze {
        perch_diameters_mm: Vec<f64>,
        payloads_g: Vec<f64>,
        #[serde(default)]
        contributing_joints: Option<usize>,
    },
    Tilt {
        perch_diameter_mm: f64,
        payload_g: f64,
        #[serde(default = "default_mu")]
        mu_s: f64,
        #[serde(default = "default_lever")]
        lever_arm_mm: f64,
    },
    TiltCurve {
        perch_diameter_mm: f64,
        payload_g: f64,
        #[serde(default = "default_mu")]
        mu_s: f64,
        #[serde(default = "default_lever")]
        lever_arm_mm: f64,
        theta_deg: Vec<f64>,
    },
    Pose {
        perch_diameter_mm: f64,
        #[serde(default)]
        side: SideName,
        #[serde(default)]
        payload_g: f64,
    },
    Gait {
        #[serde(default = "default_stride")]
        stride_cm: f64,
        #[serde(default = "default_freq")]
        frequency_hz: f64,
        #[serde(default = "default_samples")]
        samples_per_cycle: usize,
        #[serde(default = "default_hip_height")]
        hip_height_cm: f64,
        #[serde(default = "default_swing")]
        swing_height_cm: f64,
        #[serde(default = "default_duration")]
        duration_s: f64,
    },
    Polygon {
        #[serde(default)]
        left_offset_cm: f64,
        #[serde(default)]
        right_offset_cm: f64,
        #[serde(default = "default_foot")]
        foot_length_cm: f64,
        #[serde(default = "default_hip_sep")]
        hip_separation_cm: f64,
        cog_height_cm: f64,
        #[serde(default)]
        cog_x_cm: f64,
        #[serde(default)]
        cog_y_cm: f64,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideName {
    Left,
    #[default]
    Right,
}

fn default_eps_min() -> f64 {
    -180.0
}
fn default_eps_max() -> f64 {
    180.0
}
fn default_eps_step() -> f64 {
    0.5
}
fn default_payload() -> f64 {
    200.0
}
fn default_mu() -> f64 {
    0.5
}
fn default_lever() -> f64 {
    200.0
}
fn default_stride() -> f64 {
    8.0
}
fn default_freq() -> f64 {
    1.1
}
fn default_samples() -> usize {
    100
}
fn default_hip_height() -> f64 {
    15.0
}
fn default_swing() -> f64 {
    2.0
}
fn default_duration() -> f64 {
    10.0
}
fn default_foot() -> f64 {
    9.5
}
fn default_hip_sep() -> f64 {
    10.5
}

impl Analysis {
    pub fn kind(&self) -> &'static str {
        match self {
            Analysis::Sweep { .. } => "sweep",
            Analysis::Squeeze { .. } => "squeeze",
            Analysis::Tilt { .. } => "tilt",
            Analysis::TiltCurve { .. } => "tilt_curve",
            Analysis::Pose { .. } => "pose",
            Analysis::Gait { .. } => "gait",
            Analysis::Polygon { .. } => "polygon",
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("input error: {0}")]
    Input(String),
    #[error("model error in {module}: {message}")]
    Model { module: &'static str, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Input(_) => 2,
            RunError::Model { .. } => 3,
            RunError::Io(_) => 2,
        }
    }
}

fn model<E: std::fmt::Display>(module: &'static str) -> impl Fn(E) -> RunError {
    move |e| RunError::Model { module, message: e.to_string() }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, RunError> {
    let sc: Scenario = serde_json::from_str(text)
        .map_err(|e| RunError::Input(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    if sc.schema != SCENARIO_SCHEMA {
        return Err(RunError::Input(format!("field `schema`: expected \"{SCENARIO_SCHEMA}\", got \"{}\"", sc.schema)));
    }
    if sc.analyses.is_empty() {
        return Err(RunError::Input("field `analyses`: at least one analysis is required".into()));
    }
    Ok(sc)
}

pub fn resolve_design(src: &DesignSource) -> Result<ClawDesign, RunError> {
    match src {
        DesignSource::TableS1 => Ok(ClawDesign::table_s1()),
        DesignSource::Inline(f) => {
            ClawDesign::try_from(f.clone()).map_err(|e| RunError::Input(format!("field `design.inline`: {e}")))
        }
        DesignSource::Sizing(f) => size_claw(&SizingSpec::from(f)).map_err(model("claw_design")),
    }
}

/// SHA-256 of the canonical design document.
pub fn design_hash(d: &ClawDesign) -> String {
    let doc = serde_json::to_vec(&DesignFile::from(d)).expect("serializable");
    let h = Sha256::digest(&doc);
    h.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

/// Output directory: the environment override wins over the scenario.
pub fn output_dir_for(sc: &Scenario, base: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => {
            let p = PathBuf::from(&sc.output_dir);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        }
    }
}

pub fn run_scenario_file(path: &Path) -> Result<RunOutput, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Input(format!("{}: {e}", path.display())))?;
    let sc = parse_scenario(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let dir = output_dir_for(&sc, base);
    run_scenario(&sc, &dir)
}

pub fn run_scenario(sc: &Scenario, dir: &Path) -> Result<RunOutput, RunError> {
    let design = resolve_design(&sc.design)?;
    let mut files = Vec::new();
    let mut results = Vec::new();
    for (i, a) in sc.analyses.iter().enumerate() {
        let stem = format!("{:02}_{}", i, a.kind());
        let (produced, scalars) = run_analysis(&design, a, dir, &stem)?;
        let names: Vec<Value> = produced
            .iter()
            .map(|p| Value::String(p.file_name().unwrap().to_string_lossy().into_owned()))
            .collect();
        let mut entry = Map::new();
        entry.insert("analysis".into(), Value::String(a.kind().into()));
        entry.insert("files".into(), Value::Array(names));
        entry.insert("results".into(), scalars);
        results.push(Value::Object(entry));
        files.extend(produced);
    }
    let summary = json!({
        "tool": "percher",
        "version": env!("CARGO_PKG_VERSION"),
        "design_hash": design_hash(&design),
        "seed": sc.seed,
        "analyses": results,
    });
    let sp = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary).expect("serializable");
    text.push('\n');
    write_atomic(&sp, text.as_bytes())?;
    files.push(sp);
    Ok(RunOutput { dir: dir.to_path_buf(), files, summary })
}

fn finite(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn check_positive(name: &str, v: f64) -> Result<(), RunError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(RunError::Input(format!("field `{name}`: must be > 0, got {v}")))
    }
}

fn run_analysis(design: &ClawDesign, a: &Analysis, dir: &Path, stem: &str) -> Result<(Vec<PathBuf>, Value), RunError> {
    let write = |suffix: &str, bytes: &[u8]| -> Result<PathBuf, RunError> {
        let p = dir.join(format!("{stem}{suffix}"));
        write_atomic(&p, bytes)?;
        Ok(p)
    };
    match a {
        Analysis::Sweep {
            gamma_min_deg,
            gamma_max_deg,
            gamma_step_deg,
            epsilon_min_deg,
            epsilon_max_deg,
            epsilon_step_deg,
            payload_g,
        } => {
            check_positive("gamma_step_deg", *gamma_step_deg)?;
            check_positive("epsilon_step_deg", *epsilon_step_deg)?;
            if gamma_max_deg < gamma_min_deg || epsilon_max_deg < epsilon_min_deg {
                return Err(RunError::Input("sweep: max must not be below min".into()));
            }
            let n = ((gamma_max_deg - gamma_min_deg) / gamma_step_deg + 1e-9).floor() as usize;
            let gammas: Vec<f64> = (0..=n).map(|k| (gamma_min_deg + k as f64 * gamma_step_deg).to_radians()).collect();
            let t = sweep_mechanical_advantage(
                design,
                &gammas,
                (epsilon_min_deg.to_radians(), epsilon_max_deg.to_radians()),
                epsilon_step_deg.to_radians(),
                payload_g * 1e-3 * G,
            );
            let f1 = write(".csv", &output::sweep_csv(&t))?;
            let f2 = write("_limits.csv", &output::sweep_limits_csv(&t))?;
            let best = t.argmax_peak().map(f64::to_degrees);
            Ok((vec![f1, f2], json!({ "peak_gamma_deg": best.map(finite) })))
        }
        Analysis::Squeeze { perch_diameters_mm, payloads_g, contributing_joints } => {
            let mut rows = Vec::new();
            let mut out = Vec::new();
            for &dm in perch_diameters_mm {
                for &m in payloads_g {
                    let mut sc = PerchScenario::new(dm, m);
                    if let Some(n) = contributing_joints {
                        sc.contributing = Contributing::Fixed(*n);
                    }
                    let s = squeeze_force(design, &sc).map_err(model("grasp_analysis"))?;
                    let joints: Vec<String> = s.joints.iter().map(|j| format!("T{j}")).collect();
                    rows.push(vec![
                        num(dm),
                        num(m),
                        num(s.force),
                        num(s.normalized(sc.weight())),
                        joints.join(" "),
                    ]);
                    out.push(json!({ "perch_diameter_mm": dm, "payload_g": m, "f_sq_N": finite(s.force) }));
                }
            }
            let f = write(
                ".csv",
                &output::csv_bytes(&["perch_diameter_mm", "payload_g", "f_sq_N", "f_sq_per_weight_1", "joints"], &rows),
            )?;
            Ok((vec![f], Value::Array(out)))
        }
        Analysis::Tilt { perch_diameter_mm, payload_g, mu_s, lever_arm_mm } => {
            let sc = PerchScenario {
                mu_s: *mu_s,
                lever_arm: *lever_arm_mm,
                ..PerchScenario::new(*perch_diameter_mm, *payload_g)
            };
            sc.check().map_err(|e| RunError::Input(e.to_string()))?;
            let r = max_tilt(design, &sc).map_err(model("grasp_analysis"))?;
            let rows = vec![vec![
                num(r.theta_max.to_degrees()),
                num(r.m_w),
                num(r.m_f),
                r.iterations.to_string(),
                r.converged.to_string(),
            ]];
            let f = write(
                ".csv",
                &output::csv_bytes(&["theta_max_deg", "Mw_Nmm", "Mf_Nmm", "iterations_count", "converged"], &rows),
            )?;
            Ok((
                vec![f],
                json!({ "theta_max_deg": finite(r.theta_max.to_degrees()), "moment_Nmm": finite(r.m_w) }),
            ))
        }
        Analysis::TiltCurve { perch_diameter_mm, payload_g, mu_s, lever_arm_mm, theta_deg } => {
            let sc = PerchScenario {
                mu_s: *mu_s,
                lever_arm: *lever_arm_mm,
                ..PerchScenario::new(*perch_diameter_mm, *payload_g)
            };
            sc.check().map_err(|e| RunError::Input(e.to_string()))?;
            let th: Vec<f64> = theta_deg.iter().map(|t| t.to_radians()).collect();
            let c = tilt_moment_curve(design, &sc, &th);
            let f = write(".csv", &output::tilt_curve_csv(&c))?;
            let unsolved = c.iter().filter(|p| p.m_f.is_none()).count();
            Ok((vec![f], json!({ "points": c.len(), "unsolved_points": unsolved })))
        }
        Analysis::Pose { perch_diameter_mm, side, payload_g } => {
            let side = match side {
                SideName::Left => Side::Left,
                SideName::Right => Side::Right,
            };
            let pose = solve_perched_pose(design, perch_diameter_mm / 2.0, side).map_err(model("perch_kinematics"))?;
            let sys = assemble_equilibrium(&pose, design, payload_g * 1e-3 * G, 0.0);
            let sol = solve_forces(&sys).map_err(model("statics_solver"))?;
            let f1 = write("_joints.csv", &output::pose_csv(&pose))?;
            let f2 = write("_forces.csv", &output::forces_csv(&sol))?;
            let f3 = write("_system.mtx", output::matrix_market(&sys).as_bytes())?;
            Ok((
                vec![f1, f2, f3],
                json!({
                    "epsilon_deg": finite(pose.epsilon.to_degrees()),
                    "residual_N": finite(sol.residual_norm),
                    "rank": sol.rank,
                    "two_force_pass": sol.all_two_force_pass(1e-6),
                }),
            ))
        }
        Analysis::Gait { stride_cm, frequency_hz, samples_per_cycle, hip_height_cm, swing_height_cm, duration_s } => {
            let p = GaitParams {
                stride: *stride_cm,
                frequency: *frequency_hz,
                samples_per_cycle: *samples_per_cycle,
                hip_height: *hip_height_cm,
                swing_height: *swing_height_cm,
            };
            let g = generate_gait(&LegGeometry::default(), &p).map_err(model("gait_planner"))?;
            let f = write(".csv", &output::gait_csv(&g))?;
            Ok((
                vec![f],
                json!({
                    "stance_ms": finite(g.stance_duration() * 1e3),
                    "travel_m": finite(g.predicted_travel(*duration_s) / 100.0),
                }),
            ))
        }
        Analysis::Polygon {
            left_offset_cm,
            right_offset_cm,
            foot_length_cm,
            hip_separation_cm,
            cog_height_cm,
            cog_x_cm,
            cog_y_cm,
        } => {
            let geom = LegGeometry {
                hip_separation: *hip_separation_cm,
                foot_contact_length: *foot_length_cm,
                ..LegGeometry::default()
            };
            let poly = support_polygon(&geom, *left_offset_cm, *right_offset_cm);
            let m = stability_margin(&poly, *cog_height_cm, Vec2::new(*cog_x_cm, *cog_y_cm))
                .map_err(model("gait_planner"))?;
            let f = write(".csv", &output::polygon_csv(&poly))?;
            Ok((
                vec![f],
                json!({
                    "area_cm2": finite(poly.area),
                    "margin_fore_deg": finite(m.fore.to_degrees()),
                    "margin_aft_deg": finite(m.aft.to_degrees()),
                }),
            ))
        }
    }
}

/// Sized default design and its comparison with the fabricated table.
pub fn regenerate_tables(spec: &SizingSpec, dir: &Path) -> Result<(ClawDesign, Vec<TableRow>, Vec<PathBuf>), RunError> {
    let d = size_claw(spec).map_err(model("claw_design"))?;
    let rows = table_diff(spec, &d);
    let mut text = serde_json::to_string_pretty(&DesignFile::from(&d)).expect("serializable");
    text.push('\n');
    let p1 = dir.join("design_sized.json");
    write_atomic(&p1, text.as_bytes())?;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.name.to_string(),
                r.unit.to_string(),
                num(r.table),
                num(r.sized),
                r.formula.map(num).unwrap_or_default(),
                num(r.abs_diff),
                r.flagged.to_string(),
                r.note.clone(),
            ]
        })
        .collect();
    let p2 = dir.join("table_s1_diff.csv");
    write_atomic(
        &p2,
        &output::csv_bytes(
            &["entry", "unit", "table_value", "sized_value", "arc_rule_value", "abs_diff_value", "flagged", "note"],
            &csv_rows,
        ),
    )?;
    Ok((d, rows, vec![p1, p2]))
}
