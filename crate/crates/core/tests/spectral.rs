use burgers_drift::special::{erf, gauss_legendre};
use burgers_drift::spectral::*;
use burgers_drift::{Control, Field, SpaceGrid, SpectralState, TimeGrid};
use proptest::prelude::*;
use std::f64::consts::{PI, SQRT_2};

fn e_n(n: usize) -> impl Fn(f64) -> f64 {
    move |x| SQRT_2 * (n as f64 * PI * x).sin()
}

#[test]
fn rho_examples() {
    assert!((rho_eval(0.0f64, 1).unwrap() + 1.0 / 30.0).abs() < 1e-16);
    assert!(rho_eval(0.5f64, 0).unwrap().abs() < 1e-16);
    assert!(rho_eval(1.0f64, 2).unwrap().abs() < 1e-16);
}

#[test]
fn rho_coefficients_match_quadrature() {
    let (z, w) = gauss_legendre::<f64>(40);
    let integrate = |f: &dyn Fn(f64) -> f64| -> f64 { z.iter().zip(&w).map(|(&t, &wt)| 0.5 * wt * f(0.5 * (t + 1.0))).sum() };
    for n in 1..=8 {
        let rho = integrate(&|x| rho_eval(x, 0).unwrap() * e_n(n)(x));
        let rxx = integrate(&|x| rho_eval(x, 2).unwrap() * e_n(n)(x));
        let one = integrate(&|x| e_n(n)(x));
        assert!((rho - rho_coefficient::<f64>(n)).abs() < 1e-15, "rho {n}");
        assert!((rxx - rho_xx_coefficient::<f64>(n)).abs() < 1e-14, "rho_xx {n}");
        assert!((one - one_coefficient::<f64>(n)).abs() < 1e-14, "one {n}");
    }
    // The second-derivative source only excites even modes.
    assert_eq!(rho_xx_coefficient::<f64>(1), 0.0);
    assert!((rho_xx_coefficient::<f64>(2) - 3.0 * SQRT_2 / PI.powi(3)).abs() < 1e-15);
    assert!((rho_xx_coefficient::<f64>(2) - 0.1368317).abs() < 1e-7);
}

#[test]
fn sine_round_trip_examples() {
    let grid = SpaceGrid::new(511).unwrap();
    let basis = SineBasis::new(grid);
    let s = basis.analyze(&grid.sample(e_n(3)), 511).unwrap();
    assert!((s.coeffs[2] - 1.0).abs() < 1e-12);
    assert!(s.coeffs.iter().enumerate().all(|(k, c)| k == 2 || c.abs() < 1e-12));
    assert!(basis.analyze(&vec![0.0; 511], 511).unwrap().coeffs.iter().all(|&c| c == 0.0));
    assert!(basis.analyze(&vec![0.0; 510], 511).is_err());
}

#[test]
fn heat_propagation_examples() {
    let s = SpectralState::mode(8, 1);
    let p = heat_propagate(&s, 1.0, 1.0).unwrap();
    assert!((p.coeffs[0] - (-PI * PI).exp()).abs() < 1e-18);
    assert_eq!(heat_propagate(&s, 1.0, 0.0).unwrap().coeffs, s.coeffs);
    assert!(heat_propagate(&s, 1.0, -0.1).is_err());
}

#[test]
fn heat_solver_examples() {
    let space = SpaceGrid::new(63).unwrap();
    let time = TimeGrid::new(64, 0.5).unwrap();
    let zero = solve_heat_dirichlet(1.0, HeatSource::None, &vec![0.0; 63], time, space).unwrap();
    assert_eq!(zero.max_abs(), 0.0);

    let z0 = space.sample(e_n(1));
    let z = solve_heat_dirichlet(1.0, HeatSource::None, &z0, time, space).unwrap();
    for (k, t) in time.nodes().into_iter().enumerate() {
        for (i, x) in space.nodes().into_iter().enumerate() {
            assert!((z.at(k)[i] - (-PI * PI * t).exp() * e_n(1)(x)).abs() < 1e-10);
        }
    }

    let long = TimeGrid::new(200, 10.0).unwrap();
    let u = Control::from_fn(long, |_| 1.0);
    let z = solve_heat_dirichlet(1.0, HeatSource::Scalar(&u), &vec![0.0; 63], long, space).unwrap();
    // Truncation of the 1/n^3 tail at 63 modes limits pointwise accuracy.
    for (i, x) in space.nodes().into_iter().enumerate() {
        assert!((z.last()[i] - x * (1.0 - x) / 2.0).abs() < 1e-5);
    }
    let space = SpaceGrid::new(511).unwrap();
    let z = solve_heat_dirichlet(1.0, HeatSource::Scalar(&u), &vec![0.0; 511], long, space).unwrap();
    for (i, x) in space.nodes().into_iter().enumerate() {
        assert!((z.last()[i] - x * (1.0 - x) / 2.0).abs() < 1e-6);
    }
}

#[test]
fn heat_solver_with_field_source() {
    // z = c(t) e_1 with c' = -nu pi^2 c + cos(3t), c(0) = 0.
    let nu = 0.5;
    let space = SpaceGrid::new(31).unwrap();
    let time = TimeGrid::new(400, 0.3).unwrap();
    let rows = time.nodes().into_iter().map(|t| space.sample(|x| (3.0 * t).cos() * e_n(1)(x))).collect();
    let f = Field::new(rows, time, space).unwrap();
    let z = solve_heat_dirichlet(nu, HeatSource::Field(&f), &vec![0.0; 31], time, space).unwrap();
    let l = nu * PI * PI;
    for (k, t) in time.nodes().into_iter().enumerate() {
        let c = (l * (3.0 * t).cos() + 3.0 * (3.0 * t).sin() - l * (-l * t).exp()) / (l * l + 9.0);
        for (i, x) in space.nodes().into_iter().enumerate() {
            assert!((z.at(k)[i] - c * e_n(1)(x)).abs() < 1e-6);
        }
    }
}

#[test]
fn elementary_g_examples() {
    for &(eps, t) in &[(0.01f64, 0.5), (0.1, 0.01), (1.0, 1.0)] {
        assert!(elementary_g(eps, t, 0.0, 512).unwrap().abs() < 1e-14);
    }
    assert!((elementary_g(1e-3f64, 1e-4, 0.5, 512).unwrap() - 1.0).abs() < 1e-14);
    let g1 = g_sine_series(0.01f64, 0.5, 0.25, 512);
    let g2 = g_image_series(0.01f64, 0.5, 0.25);
    assert!((g1 - g2).abs() < 1e-10);
    assert!(elementary_g(0.01f64, 0.0, 0.3, 512).is_err());
}

#[test]
fn erf_layer_examples() {
    assert_eq!(erf_layer(0.01f64, 0.3, 0.0), 0.0);
    let x = (4.0f64 * 0.01 * 0.3).sqrt();
    assert!((erf_layer(0.01f64, 0.3, x) - 0.8427008).abs() < 1e-7);
    assert!((erf_layer(0.01f64, 0.3, 50.0) - 1.0).abs() < 1e-16);
}

#[test]
fn corrector_examples() {
    assert!(corrector_h(0.01f64, 0.5, 1e-12, 512).unwrap().abs() < 1e-10);
    assert!(corrector_h(0.001f64, 0.5, 0.25, 512).unwrap().abs() < 1e-12);
    assert!(corrector_h(0.01f64, 0.5, 0.6, 512).is_err());
    let want = -(1.0 / (0.01 * PI).sqrt()) * (-100.0f64 / 16.0).exp();
    assert!((sigma(0.01f64) - want).abs() < 1e-16);
}

#[test]
fn corrector_decays_exponentially_in_inverse_viscosity() {
    // |H| ~ exp(-gamma/eps) with gamma close to 1/16 at x = 1/2.
    let h = |eps: f64| corrector_h(eps, 1.0, 0.5, 512).unwrap().abs();
    let (h1, h2) = (h(0.02), h(0.01));
    let gamma = (h1 / h2).ln() / (1.0 / 0.01 - 1.0 / 0.02);
    assert!(gamma > 0.04 && gamma < 0.07, "gamma = {gamma}");
}

#[test]
fn phi_examples() {
    let space = SpaceGrid::new(511).unwrap();
    let time = TimeGrid::new(16, 1.0).unwrap();
    for eps in [1e-1, 1e-2, 1e-3] {
        let f = solve_phi(eps, time, space).unwrap();
        for (i, x) in space.nodes().into_iter().enumerate() {
            assert!((f.phi.at(0)[i] - rho_eval(x, 0).unwrap()).abs() < 1e-12);
            assert!(f.small_phi.at(0)[i].abs() < 1e-15);
        }
        assert!(f.phi_x.max_abs() <= 0.5);
        assert!(f.phi_x.all_finite() && f.small_phi.all_finite());
    }
    assert!(solve_phi(0.0, time, space).is_err());
}

#[test]
fn small_phi_solves_the_forced_heat_equation() {
    // phi_t - eps phi_xx = rho_xx with phi(0) = 0.
    let eps = 0.05;
    let space = SpaceGrid::new(255).unwrap();
    let time = TimeGrid::new(64, 1.0).unwrap();
    let f = solve_phi(eps, time, space).unwrap();
    let rows: Vec<Vec<f64>> = time.nodes().iter().map(|_| space.sample(|x| rho_eval(x, 2).unwrap())).collect();
    let src = Field::new(rows, time, space).unwrap();
    let z = solve_heat_dirichlet(eps, HeatSource::Field(&src), &vec![0.0; 255], time, space).unwrap();
    assert!(z.sub(&f.small_phi).unwrap().max_abs() < 1e-6);
}

#[test]
fn phi_tx_is_order_eps() {
    let mut fitted = vec![];
    for eps in [1e-1, 1e-2, 1e-3] {
        let p = PhiSeries::new(eps, 512).unwrap();
        let mut m: f64 = 0.0;
        for k in 0..=20 {
            for j in 0..=40 {
                m = m.max(p.dtx(k as f64 / 20.0, j as f64 / 40.0).abs());
            }
        }
        fitted.push(m / eps);
    }
    let (lo, hi) = fitted.iter().fold((f64::MAX, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
    assert!(hi / lo < 2.0, "{fitted:?}");
}

#[test]
fn riesz_examples() {
    assert_eq!(riesz_form(&[0.0f64; 5]), 0.0);
    assert!((riesz_form(&[1.0f64; 1]) - 8.0 / 3.0).abs() < 1e-15);
    assert!((riesz_form(&[1.0f64; 64]) - 8.0 / 3.0).abs() < 1e-12);
    let h: Vec<f64> = (0..20).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
    let h2: Vec<f64> = h.iter().map(|v| 2.0 * v).collect();
    assert!((riesz_form(&h2) - 4.0 * riesz_form(&h)).abs() < 1e-12);
}

#[test]
fn weak_norm_examples() {
    let time = TimeGrid::new(512, 1.0).unwrap();
    assert_eq!(weak_norm_sq(&Control::zero(time)), 0.0);
    let one = weak_norm_sq(&Control::from_fn(time, |_| 1.0));
    assert!((one - 16.0 / 21.0).abs() < 1e-4, "{one}");
    let a = weak_norm_sq(&Control::from_fn(time, |t| (1.0 - t) * (1.0 - t)));
    let b = weak_norm_sq(&Control::from_fn(time, |t| t * t));
    assert!((a - b).abs() > 1e-3);
}

#[test]
fn weak_norm_converges_for_linear_primitive() {
    let v = |n: usize| weak_norm_sq(&Control::from_fn(TimeGrid::new(n, 1.0).unwrap(), |_| 1.0));
    let (e1, e2) = ((v(64) - 16.0 / 21.0).abs(), (v(128) - 16.0 / 21.0).abs());
    assert!(e2 < e1 / 3.0, "{e1} {e2}");
}

#[test]
fn control_primitive_and_interpolant() {
    let time = TimeGrid::new(10, 2.0).unwrap();
    let u = Control::from_fn(time, |t| 3.0 * t + 1.0);
    assert_eq!(u.primitive()[0], 0.0);
    for (k, t) in time.nodes().into_iter().enumerate() {
        assert!((u.primitive()[k] - (1.5 * t * t + t)).abs() < 1e-13);
    }
    assert!((u.primitive_at(0.33) - (1.5 * 0.33 * 0.33 + 0.33)).abs() < 1e-13);
    let avg = u.cell_averages(4);
    assert!((avg[0] - (3.0 * 0.25 + 1.0)).abs() < 1e-13);
    let uavg = u.primitive_cell_averages(2);
    // average of 1.5 t^2 + t over (0,1)
    assert!((uavg[0] - 1.0).abs() < 1e-13);
    let redif: Vec<f64> = u.primitive().windows(2).map(|p| (p[1] - p[0]) / time.dt()).collect();
    for (k, r) in redif.iter().enumerate() {
        assert!((r - 0.5 * (u.samples()[k] + u.samples()[k + 1])).abs() < 1e-12);
    }
    assert!((erf(1.0f64) - 0.8427007929497149).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn round_trip_band_limited(coeffs in prop::collection::vec(-1.0f64..1.0, 1..48)) {
        let grid = SpaceGrid::new(47).unwrap();
        let basis = SineBasis::new(grid);
        let mut c = coeffs.clone();
        c.resize(47, 0.0);
        let samples = basis.synthesize_coeffs(&c).unwrap();
        let back = basis.analyze(&samples, 47).unwrap();
        let scale = c.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
        for (a, b) in back.coeffs.iter().zip(&c) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn semigroup(coeffs in prop::collection::vec(-1.0f64..1.0, 16), t1 in 0.0f64..0.05, t2 in 0.0f64..0.05, nu in 0.01f64..1.0) {
        let s = SpectralState::new(coeffs);
        let a = heat_propagate(&heat_propagate(&s, nu, t1).unwrap(), nu, t2).unwrap();
        let b = heat_propagate(&s, nu, t1 + t2).unwrap();
        for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
            prop_assert!((x - y).abs() <= 1e-13 * y.abs() + 1e-200);
        }
    }

    #[test]
    fn g_bounds_symmetry_and_agreement(eps in 1e-3f64..0.1, t in 0.01f64..1.0, x in 0.0f64..1.0) {
        let g = elementary_g(eps, t, x, 512).unwrap();
        prop_assert!((-1e-14..=1.0 + 1e-14).contains(&g));
        let gm = elementary_g(eps, t, 1.0 - x, 512).unwrap();
        prop_assert!((g - gm).abs() < 1e-12);
        let (s, i) = (g_sine_series(eps, t, x, 4096), g_image_series(eps, t, x));
        prop_assert!((s - i).abs() < 1e-9, "{s} {i}");
    }

    #[test]
    fn zero_source_heat_respects_maximum_principle(coeffs in prop::collection::vec(-1.0f64..1.0, 8), nu in 0.01f64..1.0) {
        let space = SpaceGrid::new(31).unwrap();
        let time = TimeGrid::new(20, 0.2).unwrap();
        let basis = SineBasis::new(space);
        let mut c = coeffs.clone();
        c.resize(31, 0.0);
        let z0 = basis.synthesize_coeffs(&c).unwrap();
        let sup0 = z0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let z = solve_heat_dirichlet(nu, HeatSource::None, &z0, time, space).unwrap();
        prop_assert!(z.max_abs() <= sup0 + 1e-10);
    }

    #[test]
    fn riesz_form_is_nonnegative(h in prop::collection::vec(-1.0f64..1.0, 1..40)) {
        prop_assert!(riesz_form(&h) >= -1e-12);
    }
}
