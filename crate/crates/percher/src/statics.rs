//! Static equilibrium of one perched digit and its half of the leg.
//!
//! Unknowns are joint forces acting on the link named in the column; the
//! toe pad is treated as ground, so `T_i` columns are the reactions the pad
//! exerts on the claw. All forces are expressed in the right-digit frame.
//!
//! Columns: H0 (body on h1), H1 (h2h3 on h1), H2 (mirror half on h2h3),
//! three pin forces for each of L0..L3, then T0..T4.

use crate::design::ClawDesign;
use crate::pose::{PerchedPose, Side};
use crate::{cross, Vec2};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub const N_UNKNOWNS: usize = 40;
pub const N_EQUATIONS: usize = 41;

const COL_H0: usize = 0;
const COL_H1: usize = 2;
const COL_H2: usize = 4;

fn col_l(k: usize, j: usize) -> usize {
    6 + 6 * k + 2 * j
}

fn col_t(i: usize) -> usize {
    30 + 2 * i
}

/// Links meeting at L0..L3, in column order.
const PIN_LINKS: [[&str; 3]; 4] = [
    ["h2h3", "r1", "l1"],
    ["r2", "l1", "l2"],
    ["r3", "l2", "l3"],
    ["r4", "l3", "l4"],
];

const TOE_LINKS: [&str; 5] = ["r1", "r2", "r3", "r4", "l4"];

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub joint: String,
    pub link: &'static str,
}

#[derive(Debug, Clone)]
pub struct EquilibriumSystem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// One entry per force pair (x at 2k, y at 2k+1).
    pub columns: Vec<Column>,
    pub row_labels: Vec<String>,
    /// Load carried by this digit, N, in the local frame.
    pub load: Vec2,
    pub side: Side,
    pub points: Points,
}

/// Joint positions used by the assembly, local frame.
#[derive(Debug, Clone, Copy)]
pub struct Points {
    pub toe: [Vec2; 5],
    pub outer: [Vec2; 4],
    pub hob: [Vec2; 4],
}

pub fn columns() -> Vec<Column> {
    let mut v = vec![
        Column { joint: "H0".into(), link: "h1" },
        Column { joint: "H1".into(), link: "h1" },
        Column { joint: "H2".into(), link: "h2h3" },
    ];
    for (k, links) in PIN_LINKS.iter().enumerate() {
        for l in links {
            v.push(Column { joint: format!("L{k}"), link: l });
        }
    }
    for (i, l) in TOE_LINKS.iter().enumerate() {
        v.push(Column { joint: format!("T{i}"), link: l });
    }
    v
}

/// Per-digit load for a total weight `payload_mg` (N) with the claw tilted
/// by `tilt` (rad) about the perch axis.
pub fn digit_load(payload_mg: f64, tilt: f64, side: Side) -> Vec2 {
    let w = payload_mg / 2.0;
    Vec2::new(side.sign() * w * tilt.sin(), -w * tilt.cos())
}

struct Builder {
    a: DMatrix<f64>,
    b: DVector<f64>,
    labels: Vec<String>,
    row: usize,
}

impl Builder {
    fn add(&mut self, label: String, terms: &[(usize, f64)], rhs: f64) {
        for &(c, v) in terms {
            self.a[(self.row, c)] += v;
        }
        self.b[self.row] = rhs;
        self.labels.push(label);
        self.row += 1;
    }

    /// Force and moment balance of a rigid link. `ends` are (point, column,
    /// sign); moments about `pivot`.
    fn link(&mut self, name: &str, ends: &[(Vec2, usize, f64)], pivot: Vec2, ext: Option<(Vec2, Vec2)>) {
        let (ep, ef) = ext.unwrap_or((pivot, Vec2::zeros()));
        let fx: Vec<_> = ends.iter().map(|&(_, c, s)| (c, s)).collect();
        let fy: Vec<_> = ends.iter().map(|&(_, c, s)| (c + 1, s)).collect();
        self.add(format!("{name} Fx"), &fx, -ef.x);
        self.add(format!("{name} Fy"), &fy, -ef.y);
        let mut m = Vec::new();
        for &(p, c, s) in ends {
            let r = p - pivot;
            m.push((c, -s * r.y));
            m.push((c + 1, s * r.x));
        }
        self.add(format!("{name} Mz"), &m, -cross(ep - pivot, ef));
    }
}

pub fn assemble_equilibrium(pose: &PerchedPose, _design: &ClawDesign, payload_mg: f64, tilt: f64) -> EquilibriumSystem {
    let p = pose.local();
    let (t, l, h) = (p.toe, p.outer, p.hob);
    let load = digit_load(payload_mg, tilt, pose.side);
    let mut bld = Builder {
        a: DMatrix::zeros(N_EQUATIONS, N_UNKNOWNS),
        b: DVector::zeros(N_EQUATIONS),
        labels: Vec::with_capacity(N_EQUATIONS),
        row: 0,
    };

    bld.link("h1", &[(h[0], COL_H0, 1.0), (h[1], COL_H1, 1.0)], h[0], Some((h[0], load)));
    bld.link(
        "h2h3",
        &[(h[1], COL_H1, -1.0), (h[2], COL_H2, 1.0), (h[3], col_l(0, 0), 1.0)],
        h[2],
        None,
    );
    let ribs = [
        (t[0], col_t(0), l[0], col_l(0, 1)),
        (t[1], col_t(1), l[1], col_l(1, 0)),
        (t[2], col_t(2), l[2], col_l(2, 0)),
        (t[3], col_t(3), l[3], col_l(3, 0)),
    ];
    for (i, &(tp, ct, lp, cl)) in ribs.iter().enumerate() {
        bld.link(&format!("r{}", i + 1), &[(tp, ct, 1.0), (lp, cl, 1.0)], tp, None);
    }
    let outs = [
        (l[0], col_l(0, 2), l[1], col_l(1, 1)),
        (l[1], col_l(1, 2), l[2], col_l(2, 1)),
        (l[2], col_l(2, 2), l[3], col_l(3, 1)),
        (l[3], col_l(3, 2), t[4], col_t(4)),
    ];
    for (i, &(p1, c1, p2, c2)) in outs.iter().enumerate() {
        bld.link(&format!("l{}", i + 1), &[(p1, c1, 1.0), (p2, c2, 1.0)], p1, None);
    }
    // Pins: the three link forces at each outer joint cancel.
    for k in 0..4 {
        let fx: Vec<_> = (0..3).map(|j| (col_l(k, j), 1.0)).collect();
        let fy: Vec<_> = (0..3).map(|j| (col_l(k, j) + 1, 1.0)).collect();
        bld.add(format!("L{k} pin Fx"), &fx, 0.0);
        bld.add(format!("L{k} pin Fy"), &fy, 0.0);
    }
    // Gear and mirrored scissor joints carry no vertical load by symmetry.
    bld.add("H0 support Fy".into(), &[(COL_H0 + 1, 1.0)], 0.0);
    bld.add("H2 support Fy".into(), &[(COL_H2 + 1, 1.0)], 0.0);
    // Whole claw, vertical: pad reactions plus supports carry the load.
    let mut g: Vec<_> = (0..5).map(|i| (col_t(i) + 1, 1.0)).collect();
    g.push((COL_H0 + 1, 1.0));
    g.push((COL_H2 + 1, 1.0));
    bld.add("global Fy".into(), &g, -load.y);
    debug_assert_eq!(bld.row, N_EQUATIONS);

    EquilibriumSystem {
        a: bld.a,
        b: bld.b,
        columns: columns(),
        row_labels: bld.labels,
        load,
        side: pose.side,
        points: Points { toe: t, outer: l, hob: h },
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StaticsError {
    #[error("degenerate pose: equilibrium matrix rank {rank} < {N_UNKNOWNS}")]
    Degenerate { rank: usize },
    #[error("least-squares solve failed: {0}")]
    Solve(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoForceCheck {
    pub link: &'static str,
    /// Tension positive, N.
    pub axial: f64,
    /// |F1 + F2| / max(|F1|, |F2|).
    pub imbalance: f64,
    /// Component of F1 normal to the link over |F1|.
    pub off_axis: f64,
}

impl TwoForceCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.imbalance <= tol && self.off_axis <= tol
    }
}

#[derive(Debug, Clone)]
pub struct ForceSolution {
    pub x: DVector<f64>,
    pub columns: Vec<Column>,
    pub residual_norm: f64,
    pub rhs_norm: f64,
    pub rank: usize,
    pub load: Vec2,
    pub side: Side,
    pub two_force: Vec<TwoForceCheck>,
    pub points: Points,
}

impl ForceSolution {
    /// Force on `column`'s link at its joint, local frame.
    pub fn force(&self, column: usize) -> Vec2 {
        Vec2::new(self.x[2 * column], self.x[2 * column + 1])
    }

    pub fn force_at(&self, joint: &str, link: &str) -> Option<Vec2> {
        self.columns
            .iter()
            .position(|c| c.joint == joint && c.link == link)
            .map(|i| self.force(i))
    }

    /// Reactions of the pad on the claw at T0..T4, local frame.
    pub fn toe_reactions(&self) -> [Vec2; 5] {
        std::array::from_fn(|i| self.force(col_t(i) / 2))
    }

    /// Outward radial component of each toe reaction.
    pub fn toe_radial(&self) -> [f64; 5] {
        let r = self.toe_reactions();
        std::array::from_fn(|i| r[i].dot(&self.points.toe[i].normalize()))
    }

    /// Convert a local-frame vector to the global frame.
    pub fn to_global(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.side.sign() * v.x, v.y)
    }

    pub fn residual_ok(&self) -> bool {
        self.residual_norm < 1e-8 * self.rhs_norm.max(1.0)
    }

    pub fn all_two_force_pass(&self, tol: f64) -> bool {
        self.two_force.iter().all(|c| c.passes(tol))
    }
}

pub const RANK_TOL: f64 = 1e-10;

pub fn solve_forces(sys: &EquilibriumSystem) -> Result<ForceSolution, StaticsError> {
    // Row equilibration: moment rows are in N mm, force rows in N.
    let mut a = sys.a.clone();
    let mut b = sys.b.clone();
    for i in 0..a.nrows() {
        let s = a.row(i).amax();
        if s > 0.0 {
            a.row_mut(i).scale_mut(1.0 / s);
            b[i] /= s;
        }
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > RANK_TOL * smax).count();
    if rank < N_UNKNOWNS {
        return Err(StaticsError::Degenerate { rank });
    }
    let x = svd.solve(&b, RANK_TOL * smax).map_err(|e| StaticsError::Solve(e.to_string()))?;
    let residual_norm = (&sys.a * &x - &sys.b).norm();
    let mut sol = ForceSolution {
        x,
        columns: sys.columns.clone(),
        residual_norm,
        rhs_norm: sys.b.norm(),
        rank,
        load: sys.load,
        side: sys.side,
        two_force: Vec::new(),
        points: sys.points,
    };
    sol.two_force = two_force_checks(&sol);
    Ok(sol)
}

/// (link, end 1, column at end 1, end 2, column at end 2) for every link
/// loaded at exactly two joints.
pub fn two_force_links(p: &Points) -> Vec<(&'static str, Vec2, usize, Vec2, usize)> {
    let (t, l, h) = (p.toe, p.outer, p.hob);
    vec![
        ("h1", h[0], COL_H0, h[1], COL_H1),
        ("r1", t[0], col_t(0), l[0], col_l(0, 1)),
        ("r2", t[1], col_t(1), l[1], col_l(1, 0)),
        ("r3", t[2], col_t(2), l[2], col_l(2, 0)),
        ("r4", t[3], col_t(3), l[3], col_l(3, 0)),
        ("l1", l[0], col_l(0, 2), l[1], col_l(1, 1)),
        ("l2", l[1], col_l(1, 2), l[2], col_l(2, 1)),
        ("l3", l[2], col_l(2, 2), l[3], col_l(3, 1)),
        ("l4", l[3], col_l(3, 2), t[4], col_t(4)),
    ]
}

fn two_force_checks(sol: &ForceSolution) -> Vec<TwoForceCheck> {
    two_force_links(&sol.points)
        .into_iter()
        .map(|(name, p1, c1, p2, c2)| {
            let mut f1 = sol.force(c1 / 2);
            if name == "h1" {
                f1 += sol.load;
            }
            let f2 = sol.force(c2 / 2);
            let e = (p2 - p1).normalize();
            let scale = f1.norm().max(f2.norm());
            let rel = |v: f64| if scale > 0.0 { v / scale } else { 0.0 };
            TwoForceCheck {
                link: name,
                axial: f2.dot(&e),
                imbalance: rel((f1 + f2).norm()),
                off_axis: rel(cross(e, f1).abs()),
            }
        })
        .collect()
}

/// Assemble and solve in one step.
pub fn solve_pose(pose: &PerchedPose, design: &ClawDesign, payload_mg: f64, tilt: f64) -> Result<ForceSolution, StaticsError> {
    solve_forces(&assemble_equilibrium(pose, design, payload_mg, tilt))
}
