//! CSV and text emitters. Every numeric column carries a unit suffix.

use crate::gait::{GaitPlan, SupportPolygon};
use crate::grasp::CurvePoint;
use crate::hoberman::SweepTable;
use crate::pose::PerchedPose;
use crate::statics::{EquilibriumSystem, ForceSolution};
use std::fmt::Write as _;
use std::io;
use std::path::Path;

/// Write via a temporary sibling file and rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

/// Build a CSV document: header row plus records, LF line endings.
pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn pose_csv(p: &PerchedPose) -> Vec<u8> {
    let rows: Vec<Vec<String>> = p.joints().into_iter().map(|(n, v)| vec![n, num(v.x), num(v.y)]).collect();
    csv_bytes(&["joint", "x_mm", "y_mm"], &rows)
}

pub fn forces_csv(sol: &ForceSolution) -> Vec<u8> {
    let rows: Vec<Vec<String>> = sol
        .columns
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let f = sol.to_global(sol.force(i));
            vec![c.joint.clone(), c.link.to_string(), num(f.x), num(f.y)]
        })
        .collect();
    csv_bytes(&["joint", "link", "Fx_N", "Fy_N"], &rows)
}

/// Matrix Market coordinate dump of A with b appended as column 41.
pub fn matrix_market(sys: &EquilibriumSystem) -> String {
    let mut entries = Vec::new();
    for i in 0..sys.a.nrows() {
        for j in 0..sys.a.ncols() {
            let v = sys.a[(i, j)];
            if v != 0.0 {
                entries.push((i + 1, j + 1, v));
            }
        }
        if sys.b[i] != 0.0 {
            entries.push((i + 1, sys.a.ncols() + 1, sys.b[i]));
        }
    }
    let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
    s.push_str("% equilibrium system [A | b]; rows:\n");
    for (i, l) in sys.row_labels.iter().enumerate() {
        let _ = writeln!(s, "%   {} {}", i + 1, l);
    }
    let _ = writeln!(s, "{} {} {}", sys.a.nrows(), sys.a.ncols() + 1, entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(s, "{i} {j} {v}");
    }
    s
}

pub fn sweep_csv(t: &SweepTable) -> Vec<u8> {
    let rows: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|r| {
            vec![
                num(r.gamma.to_degrees()),
                num(r.epsilon.to_degrees()),
                opt(r.f_hob),
                r.evaluable().to_string(),
            ]
        })
        .collect();
    csv_bytes(&["gamma_deg", "epsilon_deg", "f_hob_N", "evaluable"], &rows)
}

pub fn sweep_limits_csv(t: &SweepTable) -> Vec<u8> {
    let d = |x: Option<f64>| opt(x.map(f64::to_degrees));
    let rows: Vec<Vec<String>> = t
        .limits
        .iter()
        .map(|l| {
            vec![
                num(l.gamma.to_degrees()),
                d(l.eps_min),
                d(l.eps_max),
                d(l.mode_low),
                d(l.mode_high),
                opt(l.peak_force),
                d(l.peak_epsilon),
            ]
        })
        .collect();
    csv_bytes(
        &[
            "gamma_deg",
            "eps_min_deg",
            "eps_max_deg",
            "mode_low_deg",
            "mode_high_deg",
            "peak_f_hob_N",
            "peak_epsilon_deg",
        ],
        &rows,
    )
}

pub fn tilt_curve_csv(c: &[CurvePoint]) -> Vec<u8> {
    let rows: Vec<Vec<String>> =
        c.iter().map(|p| vec![num(p.theta.to_degrees()), num(p.m_w), opt(p.m_f)]).collect();
    csv_bytes(&["theta_deg", "Mw_Nmm", "Mf_Nmm"], &rows)
}

pub fn gait_csv(g: &GaitPlan) -> Vec<u8> {
    let rows: Vec<Vec<String>> = g
        .samples
        .iter()
        .map(|s| {
            vec![
                num(s.t),
                num(s.hip_l.to_degrees()),
                num(s.knee_l.to_degrees()),
                num(s.hip_r.to_degrees()),
                num(s.knee_r.to_degrees()),
                num(s.foot_l.x),
                num(s.foot_l.y),
                num(s.foot_r.x),
                num(s.foot_r.y),
            ]
        })
        .collect();
    csv_bytes(
        &[
            "t_s",
            "hip_L_deg",
            "knee_L_deg",
            "hip_R_deg",
            "knee_R_deg",
            "footL_x_cm",
            "footL_y_cm",
            "footR_x_cm",
            "footR_y_cm",
        ],
        &rows,
    )
}

pub fn polygon_csv(p: &SupportPolygon) -> Vec<u8> {
    let rows: Vec<Vec<String>> =
        p.vertices.iter().map(|v| vec![num(v.x), num(v.y)]).collect();
    csv_bytes(&["x_cm", "y_cm"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_lf() {
        let b = csv_bytes(&["a_mm"], &[vec!["1".into()]]);
        assert_eq!(b, b"a_mm\n1\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
