use burgers_drift::kernel::*;
use burgers_drift::special::{adaptive_simpson, gauss_legendre};
use burgers_drift::spectral::rho_eval;
use burgers_drift::{Control, Error, KernelEvaluator, KernelMatrix, TimeGrid};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, SQRT_2};

fn quad() -> KernelQuadrature {
    KernelQuadrature::default()
}

#[test]
fn k0_examples() {
    assert!((k0_value(0.0f64, 0.0) - 2.0 * SQRT_2).abs() < 1e-15);
    assert_eq!(k0_value(1.0f64, 1.0), 0.0);
    assert_eq!(k0_value(0.0f64, 1.0), 0.0);
    let k = assemble_k0_at(vec![0.0f64, 1.0]).unwrap();
    assert!((k.get(0, 0) - 2.0 * SQRT_2).abs() < 1e-15);
    assert_eq!([k.get(0, 1), k.get(1, 0), k.get(1, 1)], [0.0; 3]);
}

#[test]
fn k0_diagonal_and_reversal() {
    let k = assemble_k0::<f64>(16).unwrap();
    for (i, &s) in k.nodes().iter().enumerate() {
        assert!((k.get(i, i) - (2.0 - 2.0 * s).powf(1.5)).abs() < 1e-14);
    }
    let m = k.size();
    for i in 0..m {
        for j in 0..m {
            let (x, y) = (k.nodes()[m - 1 - i], k.nodes()[m - 1 - j]);
            let n = (x + y).powf(1.5) - (x - y).abs().powf(1.5);
            assert!((k.get(i, j) - n).abs() < 1e-13);
        }
    }
}

#[test]
fn k0_unit_form_matches_quadrature() {
    let v: f64 = k0_unit_form();
    assert!((v - 0.8358524).abs() < 1e-7);
    let inner = |x: f64| adaptive_simpson(&|y: f64| k0_value(x, y), 0.0, x, 1e-12) * 2.0;
    let direct = adaptive_simpson(&inner, 0.0, 1.0, 1e-11);
    assert!((direct - v).abs() < 1e-8, "{direct} {v}");
}

#[test]
fn assembly_rejects_too_few_nodes_and_low_resolution() {
    assert!(assemble_k0::<f64>(1).is_err());
    assert!(assemble_k_eps(0.01f64, 1, quad()).is_err());
    let coarse = KernelQuadrature { space_order: 2, ..quad() };
    assert!(matches!(assemble_k_eps(0.01f64, 4, coarse), Err(Error::InvalidParameter { .. })));
    assert!(KernelEvaluator::new(0.01, KernelQuadrature { phi_modes: 4, ..quad() }).is_err());
    assert!(KernelEvaluator::new(-1.0, quad()).is_err());
}

#[test]
fn quadrature_description_round_trips() {
    let q = quad().refined();
    assert_eq!(KernelQuadrature::parse(&q.to_string()).unwrap(), q);
    assert!(KernelQuadrature::parse("t2x2/x10/p0.05/m200").is_err());
    assert!(KernelQuadrature::parse("garbage").is_err());
}

#[test]
fn exact_kernel_vanishes_at_final_time_and_is_symmetric() {
    let eval = KernelEvaluator::new(0.01, quad()).unwrap();
    assert_eq!(eval.value(1.0, 1.0), 0.0);
    assert_eq!(eval.value(0.3, 1.0), 0.0);
    let k = assemble_k_eps_at(0.01, vec![0.1, 0.4, 0.8, 1.0], quad()).unwrap();
    assert_eq!(k.get(3, 3), 0.0);
    assert_eq!(k.values().asymmetry(), 0.0);
    assert!(k.values().all_finite());
}

// Reference values from an independent implementation of the same integral
// (separate erf, dense matrix cosine sums).
#[test]
fn pointwise_ratio_to_leading_term() {
    let c = 1.0 / (45.0 * PI.sqrt());
    let mut last = 0.0;
    for (eps, want) in [(1e-2, 0.7517525010406), (1e-3, 0.9674640347198), (1e-4, 0.9964752063189)] {
        let eval = KernelEvaluator::new(eps, quad()).unwrap();
        let ratio = eval.value(0.2, 0.5) / (c * eps.sqrt() * k0_value(0.2, 0.5));
        assert!((ratio - want).abs() < 1e-9, "eps {eps}: {ratio}");
        assert!(ratio > last);
        last = ratio;
    }
}

#[test]
fn quadrature_refinement_changes_little() {
    let eval = KernelEvaluator::new(0.01, quad()).unwrap();
    let fine = KernelEvaluator::new(0.01, quad().refined()).unwrap();
    for &(a, b) in &[(0.01, 0.01), (0.2, 0.21), (0.5, 0.9), (0.97, 0.99)] {
        let (v, w) = (eval.value(a, b), fine.value(a, b));
        assert!((v - w).abs() <= 1e-9 * w.abs().max(1e-6), "({a},{b}): {v} {w}");
    }
}

#[test]
fn fast_integrand_matches_generator_total() {
    let eval = KernelEvaluator::new(0.01, quad()).unwrap();
    for &(t, s1, s2) in &[(0.9, 0.2, 0.5), (0.55, 0.5, 0.1), (0.3, 0.0, 0.29), (1.0, 0.0, 0.0)] {
        let fast = eval.integrand(t, s1, s2);
        let total = generator_a(&eval, t, s1, s2, Generator::Total).unwrap().value;
        assert!((fast - total).abs() < 1e-8 * fast.abs().max(1e-6), "{fast} {total}");
    }
}

#[test]
fn generators_vanish_on_the_diagonal() {
    let eval = KernelEvaluator::new(0.01, quad()).unwrap();
    for which in Generator::PIECES.into_iter().chain([Generator::Total]) {
        for s in [0.0, 0.4, 0.9] {
            assert_eq!(generator_a(&eval, s, s, s, which).unwrap().value, 0.0);
        }
    }
}

#[test]
fn generators_reject_early_times() {
    let eval = KernelEvaluator::new(0.01, quad()).unwrap();
    assert!(generator_a(&eval, 0.4, 0.5, 0.1, Generator::LayerProduct).is_err());
    assert!(generator_a(&eval, 0.5, 0.5, 0.1, Generator::Total).is_err());
    assert_eq!(Generator::from_index(3), Some(Generator::ViscousCorrection));
    assert_eq!(Generator::Total.index(), None);
    assert_eq!(Generator::CorrectorProduct.index(), Some(6));
}

fn generator_sum_gap(eval: &KernelEvaluator, t: f64, s1: f64, s2: f64) -> (f64, f64) {
    let pieces: f64 = Generator::PIECES.iter().map(|&g| generator_a(eval, t, s1, s2, g).unwrap().value).sum();
    let total = generator_a(eval, t, s1, s2, Generator::Total).unwrap().value;
    ((pieces - total).abs(), total)
}

#[test]
fn generator_pieces_sum_to_total() {
    let eval = KernelEvaluator::new(0.01, quad()).unwrap();
    let (gap, total) = generator_sum_gap(&eval, 0.9, 0.2, 0.5);
    assert!(gap <= 1e-8 * total.abs().max(1.0), "{gap} vs {total}");
    for eps in [0.1, 0.01] {
        let eval = KernelEvaluator::new(eps, quad()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let (s1, s2): (f64, f64) = (rng.gen(), rng.gen());
            let t = s1.max(s2) + (1.0 - s1.max(s2)) * rng.gen::<f64>().max(1e-3);
            let (gap, total) = generator_sum_gap(&eval, t, s1, s2);
            worst = worst.max(gap / total.abs().max(1.0));
        }
        assert!(worst <= 1e-6, "eps {eps}: {worst}");
    }
}

#[test]
fn layer_product_matches_small_viscosity_limit() {
    let eps = 1e-3;
    let eval = KernelEvaluator::new(eps, quad()).unwrap();
    for &(t, s1, s2) in &[(0.9, 0.2, 0.5), (0.6, 0.0, 0.59)] {
        let a1 = generator_a(&eval, t, s1, s2, Generator::LayerProduct).unwrap().value;
        let limit = layer_product_limit(eps, t - s1, t - s2).unwrap();
        assert!(((a1 - limit) / limit).abs() < 1e-10, "{a1} {limit}");
    }
    assert!((rho_eval(0.0f64, 1).unwrap() + 1.0 / 30.0).abs() < 1e-16);
}

#[test]
fn erf_identity_examples() {
    assert!((erf_identity(1.0f64, 1.0).unwrap() - 0.7978846).abs() < 1e-7);
    assert!((erf_identity(1.0f64, 2.0).unwrap() - 0.6307831).abs() < 1e-7);
    assert!(erf_identity(0.0f64, 1.0).is_err());
    assert!(erf_identity(1.0f64, -2.0).is_err());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let a = rng.gen_range(0.1..10.0f64);
        let b = rng.gen_range(0.1..10.0f64);
        // The integrand is below 1e-30 beyond 9 / min(a, b).
        let top = 9.0 / a.min(b);
        let num = adaptive_simpson(&|x| erf_identity_integrand(a, b, x), 0.0, top, 1e-13);
        assert!((num - erf_identity(a, b).unwrap()).abs() < 1e-8, "{a} {b}");
    }
}

#[test]
fn residual_is_symmetric_difference() {
    let k = assemble_k_eps(0.05f64, 6, quad()).unwrap();
    let r = residual_from(&k).unwrap();
    let k0 = assemble_k0::<f64>(6).unwrap();
    let c = 0.05f64.sqrt() / (45.0 * PI.sqrt());
    assert_eq!(r.values().asymmetry(), 0.0);
    for i in 0..6 {
        for j in 0..6 {
            assert!((r.get(i, j) - (k.get(i, j) - c * k0.get(i, j))).abs() < 1e-18);
        }
    }
    assert!(residual_from(&k0).is_err());
    assert_eq!(residual_matrix(0.05f64, 6, quad()).unwrap(), r);
}

#[test]
fn csv_round_trip() {
    let k = assemble_k_eps(0.01f64, 5, quad()).unwrap();
    let text = k.to_csv();
    assert!(text.starts_with("M=5,eps=0.01,quad="));
    assert_eq!(KernelMatrix::from_csv(&text).unwrap(), k);
    let k0 = assemble_k0::<f64>(4).unwrap();
    assert_eq!(KernelMatrix::from_csv(&k0.to_csv()).unwrap(), k0);
    assert!(KernelMatrix::from_csv("M=2,eps=asymptotic,quad=x\n0,1\n1,2\n").is_err());
    assert!(KernelMatrix::from_csv("M=2,eps=asymptotic,quad=x\n0,1\n1,2\n3,1\n").is_err());
    assert!(KernelMatrix::from_csv("M=2,color=red\n").is_err());
}

#[test]
fn wsio_examples() {
    let riesz = |x: f64, y: f64| (x - y).abs().powf(-0.5);
    let est = estimate_wsio_kappa(riesz, (0.0, 1.0), DEFAULT_DELTA, 4000, 5).unwrap();
    assert!((est.size - 1.0).abs() < 1e-12);
    assert!(est.kappa() <= 2.0 && est.kappa() >= 1.0, "{est:?}");
    assert!(est.admissible > 1000);
    let zero = estimate_wsio_kappa(|_: f64, _: f64| 0.0, (0.0, 1.0), 0.75, 500, 1).unwrap();
    assert_eq!(zero.kappa(), 0.0);
    assert!(estimate_wsio_kappa(riesz, (0.0, 1.0), 0.5, 10, 1).is_err());
    assert!(estimate_wsio_kappa(riesz, (0.0, 1.0), 1.2, 10, 1).is_err());
}

#[test]
fn wsio_never_evaluates_inadmissible_points() {
    let l = |x: f64, y: f64| {
        assert!((0.2..=0.6).contains(&x) && (0.2..=0.6).contains(&y) && x != y);
        (x - y).abs().powf(-0.5)
    };
    let est = estimate_wsio_kappa(l, (0.2, 0.6), 0.75, 2000, 9).unwrap();
    assert!(est.admissible < 2000);
}

#[test]
fn residual_mixed_derivative_scales_like_eps_three_halves() {
    let mut normalized = Vec::new();
    for eps in [1e-1f64, 1e-2] {
        let eval = KernelEvaluator::new(eps, quad()).unwrap();
        let c = eps.sqrt() / (45.0 * PI.sqrt());
        let r = |x: f64, y: f64| eval.value(x, y) - c * k0_value(x, y);
        let d12 = |x: f64, y: f64| mixed_derivative(&r, x, y);
        let est = estimate_wsio_kappa(d12, (0.02, 0.98), DEFAULT_DELTA, 60, 2).unwrap();
        normalized.push(est.kappa() / eps.powf(1.5));
    }
    let ratio = normalized[0] / normalized[1];
    assert!(ratio > 0.1 && ratio < 10.0, "{normalized:?}");
}

#[test]
fn ibp_polynomial_kernel() {
    let grid = TimeGrid::new(32, 1.0).unwrap();
    let one = Control::from_fn(grid, |_| 1.0);
    let l = |x: f64, y: f64| (1.0 - x) * (1.0 - y);
    // Oracle: int_0^1 (1-y) int_0^y (1-x) dx dy = int_0^1 (1-y)(y - y^2/2) dy = 1/8.
    let check = ibp_transform_check(l, &one).unwrap();
    assert!((check.direct - 0.125).abs() < 1e-13, "{check:?}");
    assert!((check.transformed - 0.125).abs() < 1e-8, "{check:?}");
    let zero = ibp_transform_check(l, &Control::zero(grid)).unwrap();
    assert_eq!((zero.direct, zero.transformed), (0.0, 0.0));
}

#[test]
fn ibp_oscillating_control() {
    let grid = TimeGrid::new(64, 1.0).unwrap();
    let u = Control::from_fn(grid, |t| (3.0 * t).cos() - 2.0 * t);
    let l = |x: f64, y: f64| (1.0 - y) * (1.0 + x * x) * (x + 2.0 * y).exp();
    let check = ibp_transform_check(l, &u).unwrap();
    assert!(check.gap() < 1e-7 * check.direct.abs().max(1.0), "{check:?}");
    assert!(check.boundary_term.abs() > 1e-3);
}

#[test]
fn ibp_boundary_term_vanishes_for_generated_kernel() {
    // L(s1, s2) = int_{max}^1 (t - s1)(t - s2) dt, a generator vanishing on the diagonal.
    let prim = |t: f64, a: f64, b: f64| t * t * t / 3.0 - (a + b) * t * t / 2.0 + a * b * t;
    let l = |x: f64, y: f64| {
        let s = x.max(y);
        prim(1.0, x, y) - prim(s, x, y)
    };
    let grid = TimeGrid::new(32, 1.0).unwrap();
    let u = Control::from_fn(grid, |t| 1.0 + (5.0 * t).sin());
    let check = ibp_transform_check(l, &u).unwrap();
    assert!(check.boundary_term.abs() < 1e-10, "{check:?}");
    assert!(check.gap() < 1e-8 * check.direct.abs().max(1e-3), "{check:?}");
}

#[test]
fn ibp_rejects_nonzero_final_trace() {
    let grid = TimeGrid::new(8, 1.0).unwrap();
    let one = Control::from_fn(grid, |_| 1.0);
    let err = ibp_transform_check(|x: f64, y: f64| x + y, &one).unwrap_err();
    assert!(matches!(err, Error::BoundaryCondition { .. }));
    let short = Control::from_fn(TimeGrid::new(8, 0.5).unwrap(), |_| 1.0);
    assert!(ibp_transform_check(|x: f64, y: f64| 1.0 - y + 0.0 * x, &short).is_err());
}

fn smooth_kernel(x: f64, y: f64) -> f64 {
    (1.0 + x * y) * (x - y).abs().powf(-0.5)
}

#[test]
fn extension_examples() {
    let ext = extend_kernel(smooth_kernel, 0.5);
    assert_eq!(ext.eval(-0.3, 0.2), smooth_kernel(0.0, 0.5));
    assert_eq!(ext.eval(0.3, 0.2), smooth_kernel(0.3, 0.2));
    assert!((ext.eval(-0.5, 1.5) - smooth_kernel(0.0, 1.0) * 2f64.powf(-0.5)).abs() < 1e-15);
    assert!((ext.eval(3.0, 1.0) - smooth_kernel(1.0, 0.0) * 2f64.powf(-0.5)).abs() < 1e-15);
    assert_eq!(ext.eval(1.4, 0.7), smooth_kernel(1.0, 0.3));
    assert_eq!(ext.eval(0.7, -0.2), smooth_kernel(0.9, 0.0));
    assert_eq!(ext.eval(0.3, 1.2), smooth_kernel(0.1, 1.0));
    assert_eq!(ext.inner(0.1, 0.2), smooth_kernel(0.1, 0.2));
}

#[test]
fn extension_is_continuous_across_seams() {
    let ext = extend_kernel(smooth_kernel, 0.5);
    let tiny = 1e-14;
    for k in 1..20 {
        let y = 0.05 * k as f64;
        assert!((ext.eval(-tiny, y) - ext.eval(tiny, y)).abs() < 1e-12, "x = 0 seam at {y}");
        assert!((ext.eval(1.0 - tiny, y) - ext.eval(1.0 + tiny, y)).abs() < 1e-10, "x = 1 seam at {y}");
        assert!((ext.eval(y, -tiny) - ext.eval(y, tiny)).abs() < 1e-12);
        assert!((ext.eval(y, 1.0 - tiny) - ext.eval(y, 1.0 + tiny)).abs() < 1e-10);
        // Strip edge |x - y| = 1.
        let x = -y;
        assert!((ext.eval(x, x + 1.0 - tiny) - ext.eval(x, x + 1.0 + tiny)).abs() < 1e-10);
    }
}

#[test]
fn extension_keeps_wsio_constant_comparable() {
    let base = estimate_wsio_kappa(smooth_kernel, (0.0, 1.0), 0.75, 3000, 4).unwrap().kappa();
    let ext = extend_kernel(smooth_kernel, 0.5);
    let wide = estimate_wsio_kappa(|x, y| ext.eval(x, y), (-2.0, 3.0), 0.75, 3000, 4).unwrap().kappa();
    assert!(wide <= 10.0 * base, "{wide} vs {base}");
}

#[test]
fn k0_form_against_midpoint_assembly() {
    let k = assemble_k0::<f64>(256).unwrap();
    let h = 1.0 / 256.0;
    let form: f64 = k.values().as_slice().iter().sum::<f64>() * h * h;
    assert!((form - 0.8358524).abs() < 0.005 * 0.8358524);
    let _ = gauss_legendre::<f64>(4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wsio_estimate_monotone_in_samples(seed in 0u64..1000, n in 10usize..200, extra in 1usize..200) {
        let l = |x: f64, y: f64| (x * 3.0).sin() * (x - y).abs().powf(-0.5);
        let a = estimate_wsio_kappa(l, (0.0, 1.0), 0.75, n, seed).unwrap();
        let b = estimate_wsio_kappa(l, (0.0, 1.0), 0.75, n + extra, seed).unwrap();
        prop_assert!(b.kappa() >= a.kappa());
        prop_assert!(b.admissible >= a.admissible);
        let again = estimate_wsio_kappa(l, (0.0, 1.0), 0.75, n, seed).unwrap();
        prop_assert_eq!(a, again);
    }

    #[test]
    fn k0_matrices_symmetric_and_finite(m in 2usize..40) {
        let k = assemble_k0::<f64>(m).unwrap();
        prop_assert_eq!(k.values().asymmetry(), 0.0);
        prop_assert!(k.values().all_finite());
    }

    #[test]
    fn erf_identity_symmetric_and_homogeneous(a in 0.1f64..10.0, b in 0.1f64..10.0, c in 0.1f64..10.0) {
        let v = erf_identity(a, b).unwrap();
        prop_assert!((v - erf_identity(b, a).unwrap()).abs() <= 1e-15 * v);
        prop_assert!((erf_identity(c * a, c * b).unwrap() * c - v).abs() <= 1e-13 * v);
    }

    #[test]
    fn extension_agrees_inside_square(x in 0.0f64..1.0, y in 0.0f64..1.0) {
        prop_assume!(x != y);
        let ext = extend_kernel(smooth_kernel, 0.5);
        prop_assert_eq!(ext.eval(x, y), smooth_kernel(x, y));
    }

    #[test]
    fn extension_constant_along_diagonals_in_strip(x in -3.0f64..0.0, d in 0.01f64..0.99) {
        let ext = extend_kernel(smooth_kernel, 0.5);
        let (a, b) = (ext.eval(x, x + d), smooth_kernel(0.0, d));
        prop_assert!((a - b).abs() <= 1e-12 * b);
        let (a, b) = (ext.eval(x + d, x), smooth_kernel(d, 0.0));
        prop_assert!((a - b).abs() <= 1e-12 * b);
    }
}
