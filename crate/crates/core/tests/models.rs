use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fdelab_core::analysis::{equilibrium_residual, rigidity_check_r27};
use fdelab_core::fde::{
    eval_rhs, CoeffFunction, DistributedTerm, Equation, NonlinearityKind, PointwiseH, ScalarMap,
    Trajectory,
};
use fdelab_core::models::{
    make_delay_eq, make_logistic, make_power_monostable, make_wavefront, raw_logistic,
    running_max_table,
};

/// Piecewise-linear-ish random trajectory in `[0, kappa]` on `[-30, 5]`.
fn random_traj(rng: &mut ChaCha8Rng, kappa: f64) -> Trajectory {
    let grid: Vec<f64> = (0..=350).map(|k| -30.0 + 0.1 * k as f64).collect();
    let u: Vec<f64> = grid.iter().map(|_| rng.random::<f64>() * kappa).collect();
    let du: Vec<f64> = grid.iter().map(|_| rng.random::<f64>() - 0.5).collect();
    Trajectory::from_samples(grid, u, du).unwrap()
}

fn logistic(kappa: f64) -> Equation {
    make_logistic(
        CoeffFunction::constant(1.0),
        DistributedTerm::point_mass(1.0, 1.0).unwrap(),
        kappa,
        1.0,
        0.0,
        0.3,
        100.0,
    )
    .unwrap()
}

#[test]
fn power_monostable_values() {
    let g = make_power_monostable(1.0, 1.0).unwrap();
    assert_eq!(g.eval(0.0), 0.0);
    assert_eq!(g.eval(1.0), 1.0);
    assert_eq!(g.eval(0.5), 0.75);
    let g = make_power_monostable(0.5, 2.0).unwrap();
    assert_eq!(g.eval(2.0), 2.0);
    assert!(make_power_monostable(0.0, 1.0).is_err());
    assert!(make_power_monostable(1.0, -1.0).is_err());
}

#[test]
fn monostability_certificate() {
    for &(p, kappa) in &[(1.0, 1.0), (0.5, 1.0), (2.0, 3.0), (0.25, 0.5)] {
        let g = make_power_monostable(p, kappa).unwrap();
        for k in 1..10_000 {
            let s = kappa * k as f64 / 10_000.0;
            assert!(g.eval(s) > s, "G(s) <= s at s = {s} for p = {p}");
        }
        assert_eq!(g.eval(0.0), 0.0);
        assert_eq!(g.eval(kappa), kappa);
    }
}

#[test]
fn delay_reduction_matches_textbook_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..100 {
        let p = [0.5, 1.0, 2.0][trial % 3];
        let tau = 0.1 + rng.random::<f64>();
        let g = make_power_monostable(p, 1.0).unwrap();
        let eq = make_delay_eq(g.clone(), CoeffFunction::constant(tau), 0.0, 0.3, 1.0).unwrap();
        let tr = random_traj(&mut rng, 1.0);
        for _ in 0..20 {
            let t = -25.0 + 25.0 * rng.random::<f64>();
            let want = -tr.eval(t) + g.eval(tr.eval(t - tau));
            let got = eval_rhs(&eq, &tr, t, false).unwrap();
            assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
    }
}

#[test]
fn unit_speed_wavefront_matches_delay_equation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let r = 0.1 + rng.random::<f64>();
        let g = make_power_monostable(1.0, 1.0).unwrap();
        let a = make_delay_eq(g.clone(), CoeffFunction::constant(r), 0.0, 0.3, 1.0).unwrap();
        let b = make_wavefront(g, 1.0, r, 0.0, 0.3, 1.0).unwrap();
        let tr = random_traj(&mut rng, 1.0);
        for _ in 0..20 {
            let t = -25.0 + 25.0 * rng.random::<f64>();
            let x = eval_rhs(&a, &tr, t, false).unwrap();
            let y = eval_rhs(&b, &tr, t, false).unwrap();
            assert!((x - y).abs() <= 1e-12);
        }
    }
}

#[test]
fn wavefront_speed_scales_rhs() {
    let g = make_power_monostable(1.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let tr = random_traj(&mut rng, 1.0);
    // keep the deviation fixed: speed * r is the same for both
    let a = make_wavefront(g.clone(), 1.0, 0.5, 0.0, 0.3, 1.0).unwrap();
    let b = make_wavefront(g, 2.0, 0.25, 0.0, 0.3, 1.0).unwrap();
    for k in 0..50 {
        let t = -20.0 + 0.4 * k as f64;
        let x = eval_rhs(&a, &tr, t, false).unwrap();
        let y = eval_rhs(&b, &tr, t, false).unwrap();
        assert!((x - 2.0 * y).abs() <= 1e-12);
    }
    let k = Trajectory::constant(1.0, -5.0, 0.0).unwrap();
    assert_eq!(eval_rhs(&a, &k, -1.0, false).unwrap(), 0.0);
}

#[test]
fn q0_oracle() {
    let g = make_power_monostable(1.0, 1.0).unwrap();
    let q0 = running_max_table(&g, 1.0).unwrap();
    // brute-force max on a finer grid
    let brute = |x: f64| {
        (0..=100_000)
            .map(|k| g.eval(x * k as f64 / 100_000.0))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    for &x in &[0.1, 0.25, 0.5, 0.9, 1.0, 2.0, 7.5] {
        assert!((q0.eval(x) - brute(x)).abs() < 1e-6, "x = {x}");
    }
    assert!((q0.eval(0.5) - 0.75).abs() < 1e-15);
}

#[test]
fn equilibria_have_zero_residual() {
    let ts: Vec<f64> = (0..200).map(|k| -50.0 + 0.5 * k as f64).collect();
    for &p in &[0.5, 1.0, 2.0] {
        for &kappa in &[0.5, 1.0, 3.0] {
            let g = make_power_monostable(p, kappa).unwrap();
            let eq = make_delay_eq(g, CoeffFunction::constant(0.25), 0.0, 0.1, kappa).unwrap();
            assert!(equilibrium_residual(&eq, 0.0, &ts).unwrap() <= 1e-12);
            assert!(equilibrium_residual(&eq, kappa, &ts).unwrap() <= 1e-12);
        }
        let eq = logistic(1.0);
        assert!(equilibrium_residual(&eq, 0.0, &ts).unwrap() <= 1e-12);
        assert!(equilibrium_residual(&eq, 1.0, &ts).unwrap() <= 1e-12);
    }
    let g = make_power_monostable(1.0, 1.0).unwrap();
    let eq = make_delay_eq(g, CoeffFunction::constant(0.25), 0.0, 0.1, 1.0).unwrap();
    assert!((equilibrium_residual(&eq, 0.5, &[-1.0]).unwrap() - 0.25).abs() < 1e-15);
}

#[test]
fn logistic_scaffold_is_inert_on_the_left() {
    let eq = logistic(1.0);
    let raw = raw_logistic(&eq);
    let NonlinearityKind::Logistic(term) = &raw.f.kind else { panic!() };
    assert!(term.ceiling.is_none());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let tr = random_traj(&mut rng, 1.0);
        for k in 0..40 {
            let t = -25.0 + 0.6 * k as f64;
            let a = eval_rhs(&eq, &tr, t, false).unwrap();
            let b = eval_rhs(&raw, &tr, t, false).unwrap();
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn rigidity_examples() {
    let g = make_power_monostable(1.0, 1.0).unwrap();
    let eq = make_delay_eq(g, CoeffFunction::constant(0.25), 0.0, 1.0, 1.0).unwrap();
    let k = Trajectory::constant(1.0, -20.0, 0.0).unwrap();
    let r = rigidity_check_r27(&eq, &k, 0.0, 10.0).unwrap();
    assert!(r.triggered && r.consistent());

    let bumped = ScalarMap::Custom(std::sync::Arc::new(|s: f64| {
        let base = if s <= 0.0 { 0.0 } else if s < 1.0 { s * (1.0 - s) + s } else { 1.0 };
        base + if (s - 1.0).abs() < 1e-12 { 0.1 } else { 0.0 }
    }));
    let eq = make_delay_eq(bumped, CoeffFunction::constant(0.25), 0.0, 1.0, 1.0).unwrap();
    let r = rigidity_check_r27(&eq, &k, 0.0, 10.0).unwrap();
    assert!(r.triggered && !r.consistent());
    let h = r.conditions.iter().find(|c| c.id == "h-zero-at-kappa").unwrap();
    assert!(!h.consistent && (h.worst - 0.1).abs() < 1e-12);

    let half = Trajectory::constant(0.5, -20.0, 0.0).unwrap();
    assert!(!rigidity_check_r27(&eq, &half, 0.0, 10.0).unwrap().triggered);
}

proptest! {
    #[test]
    fn delay_majorant_bounds_h_after_anchor(
        t in 0.001f64..50.0,
        x in -3.0f64..3.0,
        y in -3.0f64..3.0,
        p in 0.25f64..3.0,
    ) {
        let g = make_power_monostable(p, 1.0).unwrap();
        let eq = make_delay_eq(g, CoeffFunction::constant(0.25), 0.0, 0.3, 1.0).unwrap();
        let NonlinearityKind::Pointwise { h, .. } = &eq.f.kind else { panic!() };
        let q = eq.f.majorant.as_ref().unwrap();
        let lhs = h.eval(t, x, y) * x.signum();
        prop_assert!(lhs <= q.eval(t, x.abs() + y.abs()) + 1e-12);
        let is_delay = matches!(h, PointwiseH::DelayReaction { .. });
        prop_assert!(is_delay);
    }

    #[test]
    fn delay_rhs_nonneg_f_on_band(u in 0.0f64..=1.0, t in -50.0f64..0.0, p in 0.25f64..3.0) {
        let g = make_power_monostable(p, 1.0).unwrap();
        let eq = make_delay_eq(g, CoeffFunction::constant(0.25), 0.0, 0.3, 1.0).unwrap();
        let tr = Trajectory::constant(u, -60.0, 0.0).unwrap();
        prop_assert!(eq.f_value(&tr, t, false).unwrap() >= 0.0);
    }
}
