use fdelab_core::analysis::{estimate_left_limit, verify_band, LimitStatus};
use fdelab_core::fde::{CoeffFunction, Equation};
use fdelab_core::models::{make_delay_eq, make_power_monostable};
use fdelab_core::solver::{
    consistency, extend_forward, integrate_forward, limit_scheme, reintegrate, shoot_terminal,
    History, SolveConfig, SolveError,
};

fn delay(c: f64) -> Equation {
    let g = make_power_monostable(1.0, 1.0).unwrap();
    make_delay_eq(g, CoeffFunction::constant(0.25), 0.0, c, 1.0).unwrap()
}

fn terminal(eq: &Equation, a: f64, v: f64, h: f64) -> f64 {
    integrate_forward(eq, &History::Constant(v), (a, 0.0), h, true)
        .unwrap()
        .last_value()
}

#[test]
fn bracket_straddles_anchor() {
    let eq = delay(0.3);
    let cfg = SolveConfig::default();
    let shot = shoot_terminal(&eq, -20.0, 0.0, 0.3, &cfg).unwrap();
    let v = shot.trace.v;
    assert!(v > 0.0 && v < 0.3);
    assert!(shot.trace.residual <= cfg.shoot_tol);
    let below = terminal(&eq, -20.0, (v - 0.01).max(0.0), cfg.step);
    let above = terminal(&eq, -20.0, v + 0.01, cfg.step);
    assert!(below < 0.3 && above > 0.3);
}

#[test]
fn zero_anchor_is_zero_solution() {
    let eq = delay(0.0);
    let shot = shoot_terminal(&eq, -10.0, 0.0, 0.0, &SolveConfig::default()).unwrap();
    assert_eq!(shot.trace.v, 0.0);
    assert!(shot.trajectory.values().iter().all(|&u| u == 0.0));
}

#[test]
fn recorded_start_reproduces_anchor() {
    let eq = delay(0.3);
    let cfg = SolveConfig::default();
    let shot = shoot_terminal(&eq, -20.0, 0.0, 0.3, &cfg).unwrap();
    let again = reintegrate(&eq, &shot.trace, 0.0, cfg.step, true).unwrap();
    assert!((again.last_value() - 0.3).abs() <= cfg.shoot_tol);
    assert_eq!(again, shot.trajectory);
}

#[test]
fn delay_front_converges_and_stays_in_band() {
    let c = 0.5 * (-0.25f64).exp();
    let eq = delay(c);
    let cfg = SolveConfig::default();
    let r = limit_scheme(&eq, &cfg).unwrap();
    assert!(r.converged);
    assert!(*r.cauchy_trace.last().unwrap() <= cfg.cauchy_tol);
    let left = r.trajectory.restrict(-10.0, 0.0).unwrap();
    let band = verify_band(&left, 0.0, 1.0, 0.0);
    assert!(band.pass && band.min > 0.0);
    let cons = consistency(&eq, &r, &cfg).unwrap();
    assert!(cons.reintegration_residual <= 1e-10);
    assert!(cons.unclamped_sup_diff < 1e-9);
    let ext = extend_forward(&r, &eq, 20.0, cfg.step).unwrap();
    assert_eq!(ext.end(), 20.0);
    assert!(ext.values().iter().all(|&u| u > 0.0));
    let whole = r.trajectory.restrict(r.trajectory.start(), 0.0).unwrap();
    let lim = estimate_left_limit(&whole, 0.2);
    assert!(lim.value.abs() < 1e-3);
    assert_eq!(lim.status, LimitStatus::Converged, "{lim:?} from {}", r.trajectory.start());
}

#[test]
fn exhausted_truncations_keep_last_result() {
    let c = 0.5 * (-0.25f64).exp();
    let cfg = SolveConfig {
        cauchy_tol: 1e-14,
        a_count: 4,
        ..SolveConfig::default()
    };
    match limit_scheme(&delay(c), &cfg) {
        Err(SolveError::NotConverged { result }) => {
            assert_eq!(result.cauchy_trace.len(), 3);
            assert_eq!(result.n_used, 4);
        }
        Ok(r) => assert!(r.converged),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn unbounded_reaction_blows_up_forward() {
    let g = fdelab_core::fde::ScalarMap::Linear { slope: 2.0 };
    let eq = make_delay_eq(g, CoeffFunction::constant(0.25), 0.0, 0.3, 1.0).unwrap();
    let cfg = SolveConfig {
        step: 1e-2,
        a_count: 2,
        cauchy_tol: f64::INFINITY,
        ..SolveConfig::default()
    };
    let r = limit_scheme(&eq, &cfg).unwrap();
    match extend_forward(&r, &eq, 2000.0, 1e-2) {
        Err(SolveError::BlowUp { t, partial }) => {
            assert!(t > 0.0 && t < 2000.0);
            assert!(partial.end() < t && partial.last_value() > 1e100);
        }
        other => panic!("expected blow-up, got {:?}", other.map(|t| t.end())),
    }
}
