use burgers_drift::burgers::{random_control, solve_burgers};
use burgers_drift::control_opt::*;
use burgers_drift::spectral::{rho_eval, SineBasis};
use burgers_drift::{Control, Error, SpaceGrid, TimeGrid};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn space(n: usize) -> SpaceGrid {
    SpaceGrid::new(n).unwrap()
}

fn grid(n: usize, horizon: f64) -> TimeGrid {
    TimeGrid::new(n, horizon).unwrap()
}

#[test]
fn zero_state_has_zero_gradient() {
    let s = space(31);
    let g = adjoint_gradient(1.0, &Control::zero(grid(20, 0.1)), &vec![0.0; 31], s).unwrap();
    assert_eq!(g.cost, 0.0);
    assert!(g.sample_gradient.iter().all(|&v| v == 0.0));
}

#[test]
fn cost_matches_forward_solver() {
    let s = space(63);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u = random_control(grid(40, 0.1), 2.0, &mut rng);
    let y0 = s.sample(|x| 0.3 * (PI * x).sin());
    let g = adjoint_gradient(1.0, &u, &y0, s).unwrap();
    let run = solve_burgers(1.0, &u, &y0, s).unwrap();
    let direct = 0.5 * run.final_state().iter().map(|v| v * v).sum::<f64>() * s.h();
    assert!((g.cost - direct).abs() < 1e-12 * direct, "{} {direct}", g.cost);
}

#[test]
fn gradient_matches_finite_differences() {
    let s = space(63);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let u = random_control(grid(64, 0.05), 3.0, &mut rng);
    let y0 = s.sample(|x| 0.5 * rho_eval(x, 0).unwrap() * 20.0 + 0.2 * (PI * x).sin());
    let check = gradient_fd_check(1.0, &u, &y0, s, 10, 1e-5, 7).unwrap();
    assert!(check.max_relative_error < 1e-4, "{check:?}");
}

#[test]
fn gradient_matches_finite_differences_with_substeps() {
    // large data force several substeps per output interval
    let s = space(63);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = random_control(grid(16, 0.2), 20.0, &mut rng);
    let y0 = s.sample(|x| 4.0 * (PI * x).sin());
    assert!(substeps_for_control(&u, &y0, &s) > 1);
    let check = gradient_fd_check(0.2, &u, &y0, s, 5, 1e-5, 8).unwrap();
    assert!(check.max_relative_error < 1e-4, "{check:?}");
}

#[test]
fn gradient_matches_linear_closed_form() {
    let s = space(63);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u = random_control(grid(50, 0.1), 1e-7, &mut rng);
    let y0 = s.sample(|x| 1e-7 * (PI * x).sin() + 1e-7 * (3.0 * PI * x).sin());
    let adj = adjoint_gradient(1.0, &u, &y0, s).unwrap();
    let lin = linear_gradient(1.0, &u, &y0, s).unwrap();
    let scale = lin.sample_gradient.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let err = adj.sample_gradient.iter().zip(&lin.sample_gradient).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err < 1e-6 * scale, "{err} {scale}");
}

#[test]
fn bad_inputs_rejected() {
    let s = space(31);
    assert!(matches!(adjoint_gradient(1.0, &Control::zero(grid(4, 1.0)), &[0.0; 3], s), Err(Error::DimensionMismatch { .. })));
    assert!(adjoint_gradient(-1.0, &Control::zero(grid(4, 1.0)), &[0.0; 31], s).is_err());
    assert!(attempt_null_control(1e-3, 1e-2, 0.0, 5, 0, OptSettings::default()).is_err());
}

#[test]
fn zero_delta_stays_at_rest() {
    let run = attempt_null_control(0.0, 1e-2, 1.0, 50, 3, OptSettings::default()).unwrap();
    assert_eq!(run.costs, vec![0.0]);
    assert!(run.control.samples().iter().all(|&v| v == 0.0));
    assert_eq!(run.status, OptStatus::Stationary);
}

#[test]
fn obstruction_survives_optimization() {
    let (delta, horizon) = (1e-3, 1e-2);
    let runs = null_control_suite(delta, horizon, 1.0, 60, 0..3, OptSettings::default()).unwrap();
    for run in &runs {
        assert!(run.cost_non_increasing());
        assert!(run.control.l2_norm() <= 1.0 + 1e-12);
        assert!(run.final_projection() > 0.0, "{run:?}");
        assert!(run.final_norm >= 0.5 * delta * run.rho_norm, "{} {}", run.final_norm, run.rho_norm);
        assert!(run.costs.len() > 1);
    }
    let csv = runs[0].trace_csv();
    assert!(csv.starts_with("iteration,cost,projection\n"));
    assert_eq!(csv.lines().count(), runs[0].costs.len() + 1);
}

#[test]
fn optimizer_is_deterministic() {
    let a = attempt_null_control(1e-3, 1e-2, 1.0, 5, 11, OptSettings::default()).unwrap();
    let b = attempt_null_control(1e-3, 1e-2, 1.0, 5, 11, OptSettings::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn mode_control_reaches_targets() {
    let s = space(63);
    // a mid-run state of the first-order equation
    let pre = Control::from_fn(grid(50, 0.3), |t| 1.0 + t);
    let coeffs = burgers_drift::spectral::solve_heat_spectral(1.0, burgers_drift::spectral::HeatSource::Scalar(&pre), &vec![0.0; 63], pre.grid(), &SineBasis::new(s)).unwrap();
    let start = SineBasis::new(s).synthesize_coeffs(coeffs.last().unwrap()).unwrap();
    let out = even_mode_control(1.0, 0.5, &[(1, 0.0), (3, 0.0)], 200, &start, s).unwrap();
    assert!(out.max_error < 1e-8, "{out:?}");
    assert!(out.condition >= 1.0);
}

#[test]
fn mode_control_edge_cases() {
    let s = space(31);
    let zero = vec![0.0; 31];
    let out = even_mode_control(1.0, 0.5, &[(1, 0.0), (5, 0.0)], 100, &zero, s).unwrap();
    assert!(out.control.samples().iter().all(|&v| v == 0.0));
    assert!(even_mode_control(1.0, 0.5, &[(2, 0.1)], 100, &zero, s).is_err());
    assert!(even_mode_control(1.0, 0.5, &[(0, 0.1)], 100, &zero, s).is_err());
    // nearly identical rows for far-apart fast modes make the Gramian singular
    let many: Vec<(usize, f64)> = (0..12).map(|k| (2 * k + 1, 0.01)).collect();
    assert!(matches!(even_mode_control(1.0, 0.5, &many, 20, &zero, s), Err(Error::IllConditioned { .. })));
}

#[test]
fn even_index_modes_untouched() {
    let s = space(63);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = random_control(grid(80, 1.0), 1.0, &mut rng);
    let a = burgers_drift::burgers::solve_first_order_a(0.05, &u, s).unwrap();
    let basis = SineBasis::new(s);
    for row in a.rows() {
        let c = basis.analyze(row, 63).unwrap().coeffs;
        let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(c.iter().skip(1).step_by(2).all(|v| v.abs() <= 1e-10 * scale.max(1e-300)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn gradient_check_random(seed in 0u64..1000, amp in 0.1f64..5.0) {
        let s = space(31);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_control(grid(24, 0.05), amp, &mut rng);
        let y0 = s.sample(|x| amp * 0.1 * (2.0 * PI * x).sin());
        let check = gradient_fd_check(1.0, &u, &y0, s, 3, 1e-5, seed).unwrap();
        prop_assert!(check.max_relative_error < 1e-4);
    }
}
