use percher::design::ClawDesign;
use percher::hoberman::{hoberman_force, sweep_mechanical_advantage, HobermanChain, HobermanError};
use percher::pose::{extract_angles, solve_perched_pose, Side};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn chain() -> HobermanChain {
    HobermanChain::from_design(&ClawDesign::table_s1())
}

/// Virtual work: the horizontal force at the rib tip D balancing the payload
/// on the gear joint A is -(mg/2) dy_A / dx_D.
fn virtual_work_force(c: &HobermanChain, eps: f64, mg: f64) -> Option<f64> {
    let h = 1e-6;
    let p = c.points(eps + h)?;
    let m = c.points(eps - h)?;
    Some(-(mg / 2.0) * (p[0].y - m[0].y) / (p[3].x - m[3].x))
}

#[test]
fn zero_payload_gives_zero() {
    let a = chain().angles(0.4).unwrap();
    assert_eq!(hoberman_force(&a, 0.0).unwrap(), 0.0);
}

#[test]
fn example_state_matches_virtual_work() {
    let c = chain();
    let mg = 0.2 * percher::G;
    let eps = (-50f64).to_radians();
    let f = c.force(eps, mg).unwrap();
    let o = virtual_work_force(&c, eps, mg).unwrap();
    assert!(((f.abs() - o.abs()) / o.abs()).abs() < 1e-4, "{f} vs {o}");
    assert!(f.signum() == o.signum());
}

#[test]
fn hundred_states_match_virtual_work() {
    let base = chain();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mg = 1.0;
    let mut n = 0;
    while n < 100 {
        let g = rng.gen_range(90.0f64..180.0).to_radians();
        let e = rng.gen_range(-60.0f64..120.0).to_radians();
        let c = base.with_gamma(g);
        let (Some(f), Some(o)) = (c.force(e, mg), virtual_work_force(&c, e, mg)) else { continue };
        // Away from the sin(phi) pole and the toggle zero.
        if e.cos().abs() < 0.05 || o.abs() < 1e-3 {
            continue;
        }
        assert!(((f - o) / o).abs() < 1e-4, "gamma {g} eps {e}: {f} vs {o}");
        n += 1;
    }
}

#[test]
fn perched_pose_angles_feed_the_force() {
    let d = ClawDesign::table_s1();
    let p = solve_perched_pose(&d, 20.0, Side::Right).unwrap();
    let a = extract_angles(&p);
    let from_pose = hoberman_force(&a, 1.0).unwrap();
    let from_chain = chain().force(p.epsilon, 1.0).unwrap();
    assert!((from_pose - from_chain).abs() < 1e-9 * from_chain.abs());
}

#[test]
fn singular_phi_reports() {
    let mut a = chain().angles(0.2).unwrap();
    a.phi = 1e-12;
    assert!(matches!(hoberman_force(&a, 1.0), Err(HobermanError::Singular { .. })));
}

#[test]
fn force_changes_sign_across_mode_boundary() {
    let c = chain();
    let t = c.toggles((-60f64).to_radians(), 0.0, 0.5f64.to_radians());
    assert_eq!(t.len(), 1);
    let b = t[0];
    let lo = c.force(b - 0.02, 1.0).unwrap();
    let hi = c.force(b + 0.02, 1.0).unwrap();
    assert!(lo * hi < 0.0);
    assert!(c.force(b, 1.0).unwrap().abs() < 1e-6);
}

#[test]
fn sweep_marks_rather_than_drops() {
    let d = ClawDesign::table_s1();
    let gammas = [150f64.to_radians()];
    let t = sweep_mechanical_advantage(&d, &gammas, ((-90f64).to_radians(), 90f64.to_radians()), 0.5f64.to_radians(), 1.0);
    assert_eq!(t.rows.len(), 361);
    // eps = 90 deg sits on the sin(phi) pole.
    let last = t.rows.last().unwrap();
    assert!(!last.evaluable());
}

#[test]
fn sweep_reach_of_extreme_gammas() {
    let d = ClawDesign::table_s1();
    let gammas: Vec<f64> = [110.0f64, 180.0].iter().map(|g| g.to_radians()).collect();
    let pi = std::f64::consts::PI;
    let t = sweep_mechanical_advantage(&d, &gammas, (-pi, pi), 0.5f64.to_radians(), 1.0);
    let minus30 = (-30f64).to_radians();
    assert!(t.limits_for(gammas[0]).unwrap().reaches(minus30));
    assert!(!t.limits_for(gammas[1]).unwrap().reaches(minus30));
}

#[test]
fn sweep_is_order_independent() {
    let d = ClawDesign::table_s1();
    let g: Vec<f64> = [120.0f64, 150.0, 170.0].iter().map(|g| g.to_radians()).collect();
    let rev: Vec<f64> = g.iter().rev().copied().collect();
    let r = (-1.0, 1.0);
    let a = sweep_mechanical_advantage(&d, &g, r, 0.01, 1.0);
    let b = sweep_mechanical_advantage(&d, &rev, r, 0.01, 1.0);
    for l in &a.limits {
        assert_eq!(Some(l), b.limits_for(l.gamma));
    }
}

proptest! {
    #[test]
    fn homogeneous_in_payload(e in -1.0f64..1.4, k in 0.0f64..10.0) {
        let c = chain();
        if let Some(a) = c.angles(e) {
            if let (Ok(f1), Ok(fk)) = (hoberman_force(&a, 1.0), hoberman_force(&a, k)) {
                prop_assert!((fk - k * f1).abs() <= 1e-12 * fk.abs().max(1.0));
            }
        }
    }
}
