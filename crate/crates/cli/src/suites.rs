//! Desk-scale verification suites. Each produces metrics only; pass flags
//! come from [`CHECKS`] so thresholds can be overridden from a config file.

use std::f64::consts::PI;

use burgers_drift::burgers::{
    drift_experiment, random_control, scale_to_unit, solve_first_order_a, solve_second_order_b, unscale_problem,
    AmplitudePolicy, Resolution,
};
use burgers_drift::coercivity::{coercivity_constant, k0_identity_check, plus_kernel_psd_check};
use burgers_drift::control_opt::{gradient_fd_check, null_control_suite, OptSettings};
use burgers_drift::findim::{conservation_check_example1, drift_check_examples23, lie_bracket_q11_check, ChainExample, Polynomial};
use burgers_drift::kernel::{assemble_k0, erf_identity, erf_identity_integrand, generator_a, Generator, KernelQuadrature};
use burgers_drift::special::{adaptive_simpson, gauss_legendre};
use burgers_drift::spectral::{heat_propagate, rho_coefficient, rho_eval, SineBasis};
use burgers_drift::{GramOperator, KernelEvaluator, KernelMatrix, SpaceGrid, SpectralState, TimeGrid};
use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::error::Result;
use crate::report::{Bound, Check, Report};

pub struct CheckSpec {
    pub metric: &'static str,
    pub tag: &'static str,
    pub bound: Bound,
    pub threshold: f64,
}

const fn spec(metric: &'static str, tag: &'static str, bound: Bound, threshold: f64) -> CheckSpec {
    CheckSpec { metric, tag, bound, threshold }
}

pub const CHECKS: &[CheckSpec] = &[
    spec("sine_round_trip_error", "sine-transform-round-trip", Bound::Below, 1e-12),
    spec("rho_coefficient_error", "rho-sine-coefficients", Bound::Below, 1e-14),
    spec("heat_decay_error", "heat-semigroup-decay", Bound::Below, 1e-14),
    spec("erf_identity_error", "erf-product-identity", Bound::Below, 1e-8),
    spec("generator_gap", "generator-decomposition", Bound::Below, 1e-6),
    spec("k0_asymmetry", "k0-matrix-symmetric", Bound::Below, 1e-14),
    spec("matrix_asymmetry", "kernel-matrix-symmetric", Bound::Below, 1e-12),
    spec("k0_coercivity", "k0-coercivity", Bound::AtLeast, 0.74),
    spec("plus_kernel_min_eigenvalue", "plus-kernel-psd", Bound::AtLeast, -1e-10),
    spec("ibp_gap", "k0-integration-by-parts", Bound::Below, 1e-3),
    spec("min_coercivity_constant", "kernel-coercivity-positive", Bound::Above, 0.0),
    spec("drift_min_projection", "small-control-drift-positive", Bound::Above, 0.0),
    spec("drift_failed_solves", "drift-solves-complete", Bound::Below, 0.5),
    spec("scaling_round_trip_error", "viscosity-scaling-round-trip", Bound::Below, 1e-12),
    spec("b_parity_defect", "second-order-state-odd", Bound::Below, 1e-10),
    spec("conservation_drift", "finite-dim-conservation", Bound::Below, 1e-8),
    spec("second_derivative_drift_rel_error", "finite-dim-second-derivative-drift", Bound::Below, 1e-6),
    spec("first_derivative_drift_rel_error", "finite-dim-first-derivative-drift", Bound::Below, 1e-6),
    spec("bracket_pairing", "bracket-pairing-vanishes", Bound::Below, 1e-12),
    spec("gradient_rel_error", "adjoint-gradient", Bound::Below, 1e-4),
    spec("final_projection", "obstruction-projection-positive", Bound::Above, 0.0),
    spec("final_norm_ratio", "obstruction-norm-floor", Bound::AtLeast, 0.5),
];

/// Adds a check for every metric of the report that [`CHECKS`] covers.
pub fn apply_checks(report: &mut Report, cfg: &Config) {
    for spec in CHECKS {
        if let Some(&value) = report.metrics.get(spec.metric) {
            let threshold = cfg.threshold(spec.metric).unwrap_or(spec.threshold);
            report.checks.push(Check {
                tag: spec.tag.to_string(),
                metric: spec.metric.to_string(),
                bound: spec.bound,
                threshold,
                pass: spec.bound.holds(value, threshold),
            });
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Spectral,
    Kernel,
    Coercivity,
    Burgers,
    Findim,
    Opt,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] = [Suite::Spectral, Suite::Kernel, Suite::Coercivity, Suite::Burgers, Suite::Findim, Suite::Opt];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Spectral => "spectral",
            Suite::Kernel => "kernel",
            Suite::Coercivity => "coercivity",
            Suite::Burgers => "burgers",
            Suite::Findim => "findim",
            Suite::Opt => "opt",
            Suite::All => "all",
        }
    }
}

/// Metrics of one suite (all six for [`Suite::All`]), without checks.
pub fn run_suite(suite: Suite) -> Result<Report> {
    let mut report = Report::new(format!("verify.{}", suite.name()));
    match suite {
        Suite::Spectral => spectral(&mut report)?,
        Suite::Kernel => kernel(&mut report)?,
        Suite::Coercivity => coercivity(&mut report)?,
        Suite::Burgers => burgers(&mut report)?,
        Suite::Findim => findim(&mut report, None)?,
        Suite::Opt => opt(&mut report)?,
        Suite::All => {
            for s in Suite::EACH {
                report.absorb(run_suite(s)?);
            }
        }
    }
    Ok(report)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn spectral(report: &mut Report) -> Result<()> {
    let grid = SpaceGrid::new(255)?;
    let basis = SineBasis::new(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let coeffs: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let samples = basis.synthesize_coeffs(&coeffs)?;
    let back = basis.analyze(&samples, 64)?;
    report.metric("sine_round_trip_error", max_abs_diff(&back.coeffs, &coeffs));

    let (z, w) = gauss_legendre::<f64>(40);
    let mut worst = 0.0f64;
    for n in 1..=8 {
        let quad: f64 = z
            .iter()
            .zip(&w)
            .map(|(&t, &wt)| {
                let x = 0.5 * (t + 1.0);
                0.5 * wt * rho_eval(x, 0).unwrap_or(f64::NAN) * 2f64.sqrt() * (n as f64 * PI * x).sin()
            })
            .sum();
        worst = worst.max((quad - rho_coefficient::<f64>(n)).abs());
    }
    report.metric("rho_coefficient_error", worst);

    let (nu, t) = (0.3, 0.2);
    let decayed = heat_propagate(&SpectralState::new(vec![1.0; 6]), nu, t)?;
    let exact: Vec<f64> = (1..=6).map(|n| (-nu * (n as f64 * PI).powi(2) * t).exp()).collect();
    report.metric("heat_decay_error", max_abs_diff(&decayed.coeffs, &exact));
    Ok(())
}

pub fn asymmetry(k: &KernelMatrix) -> f64 {
    let m = k.size();
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in 0..i {
            worst = worst.max((k.get(i, j) - k.get(j, i)).abs());
        }
    }
    worst
}

fn kernel(report: &mut Report) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let a = rng.gen_range(0.1..10.0f64);
        let b = rng.gen_range(0.1..10.0f64);
        let num = adaptive_simpson(&|x| erf_identity_integrand(a, b, x), 0.0, 9.0 / a.min(b), 1e-13);
        worst = worst.max((num - erf_identity(a, b)?).abs());
    }
    report.metric("erf_identity_error", worst);

    let eval = KernelEvaluator::new(0.1, KernelQuadrature::default())?;
    let mut gap = 0.0f64;
    for _ in 0..10 {
        let (s1, s2): (f64, f64) = (rng.gen(), rng.gen());
        let t = s1.max(s2) + (1.0 - s1.max(s2)) * rng.gen::<f64>().max(1e-3);
        let mut pieces = 0.0;
        for g in Generator::PIECES {
            pieces += generator_a(&eval, t, s1, s2, g)?.value;
        }
        let total = generator_a(&eval, t, s1, s2, Generator::Total)?.value;
        gap = gap.max((pieces - total).abs() / total.abs().max(1.0));
    }
    report.metric("generator_gap", gap);
    report.metric("k0_asymmetry", asymmetry(&assemble_k0(64)?));
    Ok(())
}

fn coercivity(report: &mut Report) -> Result<()> {
    let m = 64;
    report.metric("k0_coercivity", coercivity_constant(&assemble_k0(m)?, &GramOperator::new(m)?)?);
    report.metric("plus_kernel_min_eigenvalue", plus_kernel_psd_check(128)?);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = TimeGrid::new(1024, 1.0)?;
    let mut gap = 0.0f64;
    for _ in 0..3 {
        gap = gap.max(k0_identity_check(&random_control(grid, 1.0, &mut rng), 256)?.gap);
    }
    report.metric("ibp_gap", gap);
    Ok(())
}

fn burgers(report: &mut Report) -> Result<()> {
    let eps = 1e-2;
    let res = Resolution { n_x: 127, n_t: 200 };
    let drift = drift_experiment(eps, 8, 4, AmplitudePolicy::Uniform { lo: 0.1, hi: 1.0 }, res)?;
    let min = drift.records.iter().filter_map(|r| r.projection).fold(f64::INFINITY, f64::min);
    report.metric("drift_min_projection", min);
    report.metric("drift_failed_solves", drift.failures() as f64);
    if let Some(k2) = drift.k2 {
        report.metric("drift_min_ratio", k2);
    }

    let (space, time) = res.grids(1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = random_control(TimeGrid::new(50, 0.05)?, 1.0, &mut rng);
    let y0 = space.sample(|x| (PI * x).sin());
    let (u_back, y_back) = unscale_problem(&scale_to_unit(&u, &y0)?)?;
    let err = max_abs_diff(u_back.samples(), u.samples()).max(max_abs_diff(&y_back, &y0));
    report.metric("scaling_round_trip_error", err);

    let u = random_control(time, 1.0, &mut rng);
    let b = solve_second_order_b(0.05, &solve_first_order_a(0.05, &u, space)?)?;
    report.metric("b_parity_defect", b.parity_defect(-1.0) / b.max_abs().max(f64::MIN_POSITIVE));
    Ok(())
}

/// Finite-dimensional examples; `which` selects one, `None` runs all.
pub fn findim(report: &mut Report, which: Option<FindimExample>) -> Result<()> {
    let all = which.is_none();
    let pick = |e| all || which == Some(e);
    if pick(FindimExample::Conservation) {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let c: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u = move |t: f64| c.iter().enumerate().map(|(k, c)| c * ((k as f64 + 1.0) * PI * t).cos()).sum();
        report.metric("conservation_drift", conservation_check_example1(u, 1.0, &[0.0; 3], 0.0)?);
    }
    let theta = Polynomial::bump(1.0, 3, 3);
    for (ex, chain, name) in [
        (FindimExample::SecondDerivative, ChainExample::SecondDerivativeDrift, "second_derivative"),
        (FindimExample::FirstDerivative, ChainExample::FirstDerivativeDrift, "first_derivative"),
    ] {
        if pick(ex) {
            let d = drift_check_examples23(chain, &theta, 1.0)?;
            report.metric(&format!("{name}_drift_increment"), d.increment);
            report.metric(&format!("{name}_weak_norm"), d.weak_norm);
            report.metric(&format!("{name}_drift_rel_error"), d.relative_error());
        }
    }
    if pick(FindimExample::Bracket) {
        let p1 = |x: f64| x * (1.0 - x);
        let d1 = |x: f64| 1.0 - 2.0 * x;
        let p2 = |x: f64| (PI * x).sin();
        let d2 = |x: f64| PI * (PI * x).cos();
        let pairs = lie_bracket_q11_check::<f64>(&[(&p1, &d1), (&p2, &d2)]);
        report.metric("bracket_pairing", pairs.iter().map(|p| p.value.abs()).fold(0.0, f64::max));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FindimExample {
    #[value(name = "1")]
    Conservation,
    #[value(name = "2")]
    SecondDerivative,
    #[value(name = "3")]
    FirstDerivative,
    #[value(name = "q11")]
    Bracket,
}

fn opt(report: &mut Report) -> Result<()> {
    let space = SpaceGrid::new(63)?;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let u = random_control(TimeGrid::new(64, 0.05)?, 3.0, &mut rng);
    let y0 = space.sample(|x| 0.3 * (PI * x).sin() + 0.1 * (2.0 * PI * x).sin());
    report.metric("gradient_rel_error", gradient_fd_check(1.0, &u, &y0, space, 10, 1e-5, 14)?.max_relative_error);

    let delta = 1e-3;
    let runs = null_control_suite(delta, 1e-2, 1.0, 40, 0..2, OptSettings::default())?;
    report.metric("final_projection", runs.iter().map(|r| r.final_projection()).fold(f64::INFINITY, f64::min));
    report.metric("final_norm_ratio", runs.iter().map(|r| r.final_norm / (delta * r.rho_norm)).fold(f64::INFINITY, f64::min));
    Ok(())
}
