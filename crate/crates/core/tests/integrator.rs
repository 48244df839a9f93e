use fdelab_core::fde::{CoeffFunction, DelayTerm, Equation, Nonlinearity, Trajectory};
use fdelab_core::models::{make_delay_eq, make_power_monostable};
use fdelab_core::solver::{integrate_forward, History};

fn decay() -> Equation {
    Equation::new(
        vec![],
        vec![DelayTerm::new(CoeffFunction::constant(1.0), CoeffFunction::identity())],
        Nonlinearity::zero(),
        1.0,
        0.0,
        0.0,
    )
    .unwrap()
}

fn decay_error(h: f64) -> f64 {
    let tr = integrate_forward(&decay(), &History::Constant(1.0), (0.0, 1.0), h, false).unwrap();
    (tr.last_value() - (-1.0f64).exp()).abs()
}

#[test]
fn decay_matches_exponential_at_one() {
    assert!(decay_error(1e-3) < 1e-10);
}

#[test]
fn halving_step_gives_fourth_order() {
    let errs: Vec<f64> = [1e-2, 5e-3, 2.5e-3].iter().map(|&h| decay_error(h)).collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((10.0..=24.0).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn dense_output_between_knots() {
    let h = 1e-2;
    let tr = integrate_forward(&decay(), &History::Constant(1.0), (0.0, 1.0), h, false).unwrap();
    // Hermite interpolation error for e^{-t} is at most h^4/384 · max|u''''|.
    let bound = h.powi(4) / 384.0;
    for k in 0..100 {
        let t = (k as f64 + 0.5) * h;
        assert!((tr.eval(t) - (-t).exp()).abs() < 10.0 * bound);
    }
    for (t, u) in tr.knots().iter().zip(tr.values()) {
        assert_eq!(tr.eval(*t), *u);
    }
}

#[test]
fn balanced_delay_keeps_constant() {
    let eq = Equation::new(
        vec![DelayTerm::new(CoeffFunction::constant(1.0), CoeffFunction::shift(1.0))],
        vec![DelayTerm::new(CoeffFunction::constant(1.0), CoeffFunction::identity())],
        Nonlinearity::zero(),
        1.0,
        0.0,
        0.0,
    )
    .unwrap();
    let tr = integrate_forward(&eq, &History::Constant(0.7), (0.0, 5.0), 1e-2, false).unwrap();
    assert!(tr.values().iter().all(|&u| (u - 0.7).abs() < 1e-12));
}

#[test]
fn first_delay_interval_is_linear_ode() {
    // u' = -u + G(0.2) on [0, 1] since u(t - 1) reads the history 0.2.
    let g = make_power_monostable(1.0, 1.0).unwrap();
    let eq = make_delay_eq(g, CoeffFunction::constant(1.0), 0.0, 0.2, 1.0).unwrap();
    let tr = integrate_forward(&eq, &History::Constant(0.2), (0.0, 1.0), 1e-3, false).unwrap();
    let exact = 0.36 - 0.16 * (-1.0f64).exp();
    assert!((exact - 0.301139289412569228).abs() < 1e-15);
    assert!((tr.last_value() - exact).abs() < 1e-9);
}

#[test]
fn history_trajectory_is_read_through_extension() {
    let hist = Trajectory::constant(0.4, -2.0, 0.0).unwrap();
    let g = make_power_monostable(1.0, 1.0).unwrap();
    let eq = make_delay_eq(g, CoeffFunction::constant(0.5), 5.0, 0.4, 1.0).unwrap();
    let tr = integrate_forward(&eq, &History::Trajectory(hist), (0.0, 0.5), 1e-3, false).unwrap();
    assert_eq!(tr.start(), -2.0);
    // u' = -u + G(0.4) = -u + 0.64 from u(0) = 0.4
    let exact = 0.64 - 0.24 * (-0.5f64).exp();
    assert!((tr.last_value() - exact).abs() < 1e-10, "{} vs {exact}", tr.last_value());
}

