//! Acceptance report: one PASS/FAIL line per check, grouped AC1..AC8.
//! Always exits 0; failures are reported, not hidden.

use percher::design::{size_claw, table_diff, SizingSpec};
use percher::fourbar::FourBar;
use percher::gait::{generate_gait, stability_margin, support_polygon, GaitParams, LegGeometry};
use percher::grasp::{max_tilt, moments, squeeze_force, PerchScenario, TILT_TOL};
use percher::hoberman::{sweep_mechanical_advantage, HobermanChain};
use percher::pose::{solve_perched_pose, Side};
use percher::scenario::{parse_scenario, run_scenario};
use percher::statics::solve_pose;
use percher::{design::ClawDesign, wrap_pi, Vec2, G};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};
use std::time::Instant;

struct Report {
    pass: usize,
    fail: usize,
}

impl Report {
    fn check(&mut self, ac: &str, name: &str, ok: bool, detail: String) {
        if ok {
            self.pass += 1;
        } else {
            self.fail += 1;
        }
        println!("{ac} {:<4} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn deg(x: f64) -> f64 {
    x.to_radians()
}

fn ac1(r: &mut Report) {
    let t0 = Instant::now();
    let spec = SizingSpec::default();
    let d = size_claw(&spec).expect("default spec sizes");
    let rows = table_diff(&spec, &d);
    let mm: Vec<_> = rows.iter().filter(|x| x.unit == "mm").collect();
    let worst = mm.iter().map(|x| x.abs_diff).fold(0.0, f64::max);
    let el = t0.elapsed().as_secs_f64();
    r.check("AC1", "15 entries within 0.01 mm", mm.len() == 15 && worst <= 0.01, format!("{} entries, max diff {worst:.2e} mm", mm.len()));
    let flagged: Vec<String> = rows
        .iter()
        .filter(|x| x.flagged)
        .map(|x| format!("{} ({})", x.name, x.note))
        .collect();
    r.check("AC1", "discrepancies reported", !flagged.is_empty(), flagged.join("; "));
    r.check("AC1", "runtime < 1 s", el < 1.0, format!("{el:.3} s"));
}

fn random_linkage(rng: &mut ChaCha8Rng) -> (FourBar, f64) {
    loop {
        let a = Vec2::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
        let th1: f64 = rng.gen_range(-PI..PI);
        let d = a + rng.gen_range(5.0..100.0) * Vec2::new(th1.cos(), th1.sin());
        let fb = FourBar { a, d, ab: rng.gen_range(2.0..100.0), bc: rng.gen_range(2.0..100.0), cd: rng.gen_range(2.0..100.0) };
        let t2 = rng.gen_range(-PI..PI);
        if fb.solve(t2).is_ok() {
            return (fb, t2);
        }
    }
}

fn bisect_rockers(fb: &FourBar, t2: f64) -> Vec<f64> {
    let b = fb.a + fb.ab * Vec2::new(t2.cos(), t2.sin());
    let f = |psi: f64| (fb.d + fb.cd * Vec2::new(psi.cos(), psi.sin()) - b).norm_squared() - fb.bc * fb.bc;
    let n = 3600;
    let mut out = Vec::new();
    for k in 0..n {
        let (mut lo, mut hi) = (-PI + TAU * k as f64 / n as f64, -PI + TAU * (k + 1) as f64 / n as f64);
        let mut flo = f(lo);
        if flo * f(hi) > 0.0 {
            continue;
        }
        for _ in 0..200 {
            if hi - lo < 1e-15 {
                break;
            }
            let m = 0.5 * (lo + hi);
            let fm = f(m);
            if fm * flo > 0.0 {
                lo = m;
                flo = fm;
            } else {
                hi = m;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out
}

fn ac2(r: &mut Report) {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (fb, t2) = random_linkage(&mut rng);
        let s = fb.solve(t2).unwrap();
        worst = worst.max(fb.closure_residual(&s.open)).max(fb.closure_residual(&s.crossed));
    }
    r.check("AC2", "1000 linkages close < 1e-9 mm", worst < 1e-9, format!("max residual {worst:.2e}"));
    let mut n = 0;
    let mut err = 0.0f64;
    while n < 50 {
        let (fb, t2) = random_linkage(&mut rng);
        let s = fb.solve(t2).unwrap();
        if wrap_pi(s.open.theta4 - s.crossed.theta4).abs() < 1e-3 {
            continue;
        }
        let roots = bisect_rockers(&fb, t2);
        for sol in [s.open, s.crossed] {
            let e = roots.iter().map(|x| wrap_pi(x - sol.rocker_angle()).abs()).fold(f64::INFINITY, f64::min);
            err = err.max(e);
        }
        n += 1;
    }
    r.check("AC2", "50 bisection cross-checks < 1e-7 rad", err < 1e-7, format!("max diff {err:.2e} rad"));
    let el = t0.elapsed().as_secs_f64();
    r.check("AC2", "runtime < 5 s", el < 5.0, format!("{el:.3} s"));
}

fn ac3(r: &mut Report) {
    let d = ClawDesign::table_s1();
    let base = HobermanChain::from_design(&d);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut n, mut worst) = (0, 0.0f64);
    while n < 100 {
        let c = base.with_gamma(deg(rng.gen_range(90.0..180.0)));
        let e = deg(rng.gen_range(-60.0..120.0));
        let h = 1e-6;
        let (Some(f), Some(p), Some(m)) = (c.force(e, 1.0), c.points(e + h), c.points(e - h)) else { continue };
        let o = -0.5 * (p[0].y - m[0].y) / (p[3].x - m[3].x);
        if e.cos().abs() < 0.05 || o.abs() < 1e-3 {
            continue;
        }
        worst = worst.max(((f - o) / o).abs());
        n += 1;
    }
    r.check("AC3", "100 states vs virtual work < 1e-4", worst < 1e-4, format!("max rel err {worst:.2e}"));

    let gammas: Vec<f64> = (0..10).map(|k| deg(90.0 + 10.0 * k as f64)).collect();
    let t = sweep_mechanical_advantage(&d, &gammas, (-PI, PI), deg(0.5), 0.4 * G);
    let peak = t.argmax_peak().map(f64::to_degrees);
    r.check(
        "AC3",
        "peak-force gamma = 150 deg",
        peak.map_or(false, |g| (g - 150.0).abs() < 1e-6),
        format!("argmax at {:?} deg", peak.map(|g| g.round())),
    );
    let sing = t.limits_for(deg(150.0)).and_then(|l| l.mode_low).map(f64::to_degrees);
    r.check(
        "AC3",
        "mode singularity at -5 +/- 0.5 deg",
        sing.map_or(false, |s| (s + 5.0).abs() <= 0.5),
        format!("toggle at {:?} deg for gamma 150", sing.map(|s| (s * 100.0).round() / 100.0)),
    );
    let reach = |g: f64| t.limits_for(deg(g)).map_or(false, |l| l.reaches(deg(-30.0)));
    r.check(
        "AC3",
        "gamma 180 misses -30, gamma 110 reaches it",
        !reach(180.0) && reach(110.0),
        format!("180 reaches: {}, 110 reaches: {}", reach(180.0), reach(110.0)),
    );
}

fn ac4(r: &mut Report) {
    let d = ClawDesign::table_s1();
    let (mut zero, mut dbl, mut tf, mut res) = (true, 0.0f64, true, 0.0f64);
    for dm in [30.0, 40.0, 50.0] {
        let p = solve_perched_pose(&d, dm / 2.0, Side::Right).unwrap();
        zero &= solve_pose(&p, &d, 0.0, 0.0).unwrap().x.iter().all(|v| *v == 0.0);
        let a = solve_pose(&p, &d, 0.2 * G, 0.0).unwrap();
        let b = solve_pose(&p, &d, 0.4 * G, 0.0).unwrap();
        for (x, y) in a.x.iter().zip(b.x.iter()) {
            if *y != 0.0 {
                dbl = dbl.max(((y - 2.0 * x) / y).abs());
            }
        }
        tf &= a.all_two_force_pass(1e-6) && b.all_two_force_pass(1e-6);
        res = res.max(a.residual_norm / a.rhs_norm.max(1.0)).max(b.residual_norm / b.rhs_norm.max(1.0));
    }
    r.check("AC4", "zero payload gives exactly zero", zero, "30/40/50 mm".into());
    r.check("AC4", "doubling payload doubles forces to 1e-10", dbl < 1e-10, format!("max rel dev {dbl:.2e}"));
    r.check("AC4", "two-force links colinear within 1e-6", tf, "9 links x 6 solves".into());
    r.check("AC4", "scaled residual < 1e-8", res < 1e-8, format!("max {res:.2e}"));
}

fn ac5(r: &mut Report) {
    let d = ClawDesign::table_s1();
    let sq = |dm: f64, m: f64| {
        let sc = PerchScenario::new(dm, m);
        squeeze_force(&d, &sc).unwrap().normalized(sc.weight())
    };
    let (a, b, c) = (sq(30.0, 100.0), sq(40.0, 100.0), sq(50.0, 100.0));
    r.check("AC5", "F_sq/mg at 50 mm in [0.9, 1.3]", (0.9..=1.3).contains(&c), format!("{c:.4}"));
    r.check("AC5", "monotone in perch diameter", a < b && b < c, format!("{a:.4} < {b:.4} < {c:.4}"));
    r.check("AC5", "diminishing increment", c - b < b - a, format!("50-40 = {:.4}, 40-30 = {:.4}", c - b, b - a));
    let mut lin = 0.0f64;
    for dm in [30.0, 40.0, 50.0] {
        let f1 = squeeze_force(&d, &PerchScenario::new(dm, 100.0)).unwrap().force;
        for k in [2.0, 3.0, 4.0] {
            let fk = squeeze_force(&d, &PerchScenario::new(dm, 100.0 * k)).unwrap().force;
            lin = lin.max((fk - k * f1).abs() / fk.max(1e-300));
        }
    }
    r.check("AC5", "linear in payload", lin < 1e-9, format!("max rel dev {lin:.2e}"));
}

fn ac6(r: &mut Report) {
    let d = ClawDesign::table_s1();
    let tilt = |dm: f64, m: f64| max_tilt(&d, &PerchScenario::new(dm, m)).unwrap();
    let mut inv = 0.0f64;
    let mut by_mass = true;
    let mut at400 = Vec::new();
    for dm in [30.0, 40.0, 50.0] {
        let a = tilt(dm, 100.0);
        let b = tilt(dm, 400.0);
        inv = inv.max((a.theta_max - b.theta_max).abs().to_degrees());
        by_mass &= b.m_w > a.m_w;
        at400.push(b.m_w);
    }
    r.check("AC6", "theta_max invariant in payload within 0.05 deg", inv < 0.05, format!("max spread {inv:.4} deg"));
    r.check("AC6", "balanced moment increases with payload", by_mass, "100 g vs 400 g".into());
    r.check(
        "AC6",
        "balanced moment increases with perch diameter",
        at400[0] < at400[1] && at400[1] < at400[2],
        format!("{:.2} / {:.2} / {:.2} N mm at 30/40/50 mm, 400 g", at400[0], at400[1], at400[2]),
    );
    let sc = PerchScenario::new(40.0, 400.0);
    let root = max_tilt(&d, &sc).unwrap().theta_max;
    let step = deg(0.01);
    let mut th = 0.0;
    while {
        let (w, f) = moments(&d, &sc, th).unwrap();
        w < f && th < deg(30.0)
    } {
        th += step;
    }
    let e = (root - th).abs().to_degrees();
    r.check(
        "AC6",
        "bisection vs 0.01 deg scan within 0.05 deg",
        e < 0.05,
        format!("{:.4} vs {:.4} deg (tol {:.2} deg)", root.to_degrees(), th.to_degrees(), TILT_TOL.to_degrees()),
    );
}

fn ac7(r: &mut Report) {
    let g = LegGeometry::default();
    let plan = generate_gait(&g, &GaitParams::default()).unwrap();
    let m = plan.predicted_travel(10.0) / 100.0;
    r.check("AC7", "10 s travel 0.88 m within 5% of 0.87", (m - 0.88).abs() < 1e-9 && (m - 0.87).abs() / 0.87 < 0.05, format!("{m:.4} m"));
    let st = plan.stance_duration();
    r.check(
        "AC7",
        "stance 450 ms +/- one sample",
        (st - 0.450).abs() <= plan.sample_dt(),
        format!("{:.1} ms, sample {:.2} ms", st * 1e3, plan.sample_dt() * 1e3),
    );
    let poly = support_polygon(&g, 0.0, 0.0);
    r.check("AC7", "neutral support area 99.75 cm^2", (poly.area - 99.75).abs() < 1e-12, format!("{} cm^2", poly.area));
    let h = 4.75 / deg(20.1).tan();
    let mg = stability_margin(&poly, h, Vec2::zeros()).unwrap();
    let (fo, af) = (mg.fore.to_degrees(), mg.aft.to_degrees());
    r.check(
        "AC7",
        "margin +/-20.1 within 0.5 deg",
        (fo - 20.1).abs() <= 0.5 && (af - 20.1).abs() <= 0.5,
        format!("fore {fo:.3}, aft {af:.3} deg at derived COG height {h:.3} cm"),
    );
    let trace: Vec<f64> = (0..=170).map(|k| -12.0 + 0.1 * k as f64).collect();
    r.check("AC7", "pitch trace [-12, 5] inside margin", trace.iter().all(|p| mg.contains(deg(*p))), "171 samples".into());
}

const SCENARIO: &str = r#"{
  "schema": "percher_scenario_v1",
  "design": "table_s1",
  "seed": 1,
  "analyses": [
    {"kind": "sweep", "gamma_min_deg": 90, "gamma_max_deg": 180, "gamma_step_deg": 10},
    {"kind": "squeeze", "perch_diameters_mm": [30, 40, 50], "payloads_g": [100, 200, 300, 400]},
    {"kind": "tilt", "perch_diameter_mm": 40, "payload_g": 400},
    {"kind": "pose", "perch_diameter_mm": 50, "payload_g": 200},
    {"kind": "gait"},
    {"kind": "polygon", "cog_height_cm": 12.99}
  ]
}"#;

fn ac8(r: &mut Report, start: Instant) {
    let sc = parse_scenario(SCENARIO).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let oa = run_scenario(&sc, &a).unwrap();
    let ob = run_scenario(&sc, &b).unwrap();
    let same = oa.files.len() == ob.files.len()
        && oa.files.iter().zip(&ob.files).all(|(x, y)| std::fs::read(x).unwrap() == std::fs::read(y).unwrap());
    r.check("AC8", "repeated runs byte-identical", same, format!("{} files", oa.files.len()));
    let el = start.elapsed().as_secs_f64();
    r.check("AC8", "acceptance run < 60 s", el < 60.0, format!("{el:.2} s"));
}

fn main() {
    let start = Instant::now();
    let mut r = Report { pass: 0, fail: 0 };
    ac1(&mut r);
    ac2(&mut r);
    ac3(&mut r);
    ac4(&mut r);
    ac5(&mut r);
    ac6(&mut r);
    ac7(&mut r);
    ac8(&mut r, start);
    println!("acceptance: {} passed, {} failed", r.pass, r.fail);
}
