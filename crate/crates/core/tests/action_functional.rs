mod common;

use common::*;
use pointwave::groundstate::default_grid;
use pointwave::special::{chi_alpha_coefficient, e_alpha, green_l2_norm_sq};
use pointwave::*;
use proptest::prelude::*;
use rand::Rng;
use std::sync::Arc;

fn chi(params: &InteractionParams, grid: &Arc<RadialGrid>) -> DecomposedField {
    let wa = params.omega_alpha();
    DecomposedField::pure_singular(grid.clone(), real(chi_alpha_coefficient(params)), wa).unwrap()
}

fn cases() -> Vec<InteractionParams> {
    vec![
        unit(Dim::Three, 1.5),
        InteractionParams::new(Dim::Three, -0.3, 1.8).unwrap(),
        unit(Dim::Two, 3.0),
        InteractionParams::new(Dim::Two, -0.2, 2.0).unwrap(),
    ]
}

#[test]
fn chi_alpha_eigenpair() {
    for params in cases() {
        let ea = e_alpha(&params);
        let err = |n| {
            let g = pointwave::groundstate::default_grid_with(&params, 0.5 * params.omega_alpha(), n).unwrap();
            let d = Discretization::new(params, g.clone()).unwrap();
            let u = chi(&params, &g);
            assert!((u.mass() - 1.0).abs() <= 1e-6);
            (d.quadratic_form(&u).unwrap() - ea).abs()
        };
        let (e1, e2) = (err(4096), err(8192));
        assert!(e1 <= 2e-3 * ea.abs(), "{e1}");
        assert!(e1 / e2 >= 3.5, "{e1} {e2}");
    }
}

#[test]
fn chi_alpha_is_linear_stationary() {
    for params in cases() {
        let g = default_grid(&params, 0.0).unwrap();
        let d = Discretization::new(params, g.clone()).unwrap();
        let u = chi(&params, &g);
        let r = d.euler_lagrange_residual_with(&u, params.omega_alpha(), false).unwrap();
        assert!(r <= 1e-3, "{r}");
        let rand = random_field(&mut rng(3), &g, 2.0);
        assert!(d.euler_lagrange_residual(&rand, 0.3).unwrap() > 0.0);
    }
}

#[test]
fn smooth_field_without_singular_part() {
    // Q(f) = ‖∇f‖² when c = 0; f = e^{-r²} in 3D gives 4π ∫ 4r⁴ e^{-2r²} dr = 3π^{3/2}/(2√2)
    let params = unit(Dim::Three, 1.5);
    let g = small_grid(Dim::Three, 4096);
    let d = Discretization::new(params, g.clone()).unwrap();
    let f = DecomposedField::from_regular_fn(g, 1.0, |r| real((-r * r).exp())).unwrap();
    let exact = 3.0 * std::f64::consts::PI.powf(1.5) / (2.0 * 2f64.sqrt());
    let q = d.quadratic_form(&f).unwrap();
    assert!((q - exact).abs() <= 1e-5 * exact, "{q} {exact}");
}

#[test]
fn zero_field() {
    let params = unit(Dim::Two, 2.0);
    let g = small_grid(Dim::Two, 256);
    let d = Discretization::new(params, g.clone()).unwrap();
    let z = DecomposedField::zeros(g, 1.0).unwrap();
    let e = d.action(&z, 0.4).unwrap();
    assert_eq!((e.action, e.q_value, e.mass, e.lp1_term), (0.0, 0.0, 0.0, 0.0));
    let cg = d.action_gradient(&z, 0.4).unwrap();
    assert!(cg.regular.iter().all(|v| *v == real(0.0)) && cg.singular == real(0.0));
}

#[test]
fn action_along_chi_alpha() {
    // S_0(tχ) = −t²/2 + t^{p+1}‖χ‖_{p+1}^{p+1}/(p+1)
    let params = unit(Dim::Three, 1.5);
    let g = default_grid(&params, 0.5).unwrap();
    let d = Discretization::new(params, g.clone()).unwrap();
    let u = chi(&params, &g);
    let lp1 = u.lq_norm(2.5).powf(2.5);
    for t in [0.01, 0.05, 0.2] {
        let e = d.action(&u.scale(real(t)), 0.0).unwrap();
        let expect = -t * t / 2.0 + t.powf(2.5) * lp1 / 2.5;
        assert!((e.action - expect).abs() <= 2e-3 * t * t, "{t}: {} {expect}", e.action);
        assert!(e.action < 0.0);
        assert_eq!(e.action, 0.5 * e.q_value + e.lp1_term / 2.5 + 0.0 * e.mass);
    }
}

#[test]
fn evaluation_pieces_are_consistent() {
    let params = unit(Dim::Two, 3.0);
    let g = small_grid(Dim::Two, 512);
    let d = Discretization::new(params, g.clone()).unwrap();
    let u = random_field(&mut rng(11), &g, 1.7);
    let omega = 0.37;
    let e = d.action(&u, omega).unwrap();
    assert_eq!(e.action, 0.5 * e.q_value + e.lp1_term / 4.0 + omega / 2.0 * e.mass);
    assert_eq!(e.lambda_used, params.canonical_lambda());
    let json = serde_json::to_value(e).unwrap();
    for k in ["q", "action", "mass", "lp1", "lambda"] {
        assert!(json.get(k).is_some(), "{k}");
    }
}

#[test]
fn gauge_invariance() {
    let params = unit(Dim::Three, 1.8);
    let g = small_grid(Dim::Three, 512);
    let d = Discretization::new(params, g.clone()).unwrap();
    let u = random_field(&mut rng(5), &g, 2.0);
    let s = d.action(&u, 0.2).unwrap().action;
    for th in [std::f64::consts::PI / 3.0, 1.0, 2.7] {
        let v = u.scale(C64::from_polar(1.0, th));
        assert!((d.action(&v, 0.2).unwrap().action - s).abs() <= 1e-12 * (1.0 + s.abs()));
    }
}

#[test]
fn polarization() {
    let params = unit(Dim::Two, 2.0);
    let g = small_grid(Dim::Two, 512);
    let d = Discretization::new(params, g.clone()).unwrap();
    let mut r = rng(7);
    let u = random_field(&mut r, &g, 1.0);
    let v = random_field(&mut r, &g, 3.0);
    let q = d.quadratic_form(&u).unwrap();
    let a = d.bilinear_form(&u, &u).unwrap();
    assert!((a.re - q).abs() <= 1e-12 * (1.0 + q.abs()) && a.im.abs() <= 1e-12 * (1.0 + q.abs()));
    let (uv, vu) = (d.bilinear_form(&u, &v).unwrap(), d.bilinear_form(&v, &u).unwrap());
    assert!((uv - vu.conj()).norm() <= 1e-12 * (1.0 + uv.norm()));
    let other = Arc::new(build_grid(Dim::Two, 1e-30, 50.0, 512, 2.0).unwrap());
    let w = DecomposedField::zeros(other, 1.0).unwrap();
    assert!(matches!(d.bilinear_form(&u, &w), Err(Error::GridMismatch(_))));
}

/// Directional derivative of the discrete action against ⟨grad, dir⟩, central differences.
fn fd_check(params: InteractionParams, n: usize, seed: u64) {
    let g = small_grid(params.dim(), n);
    let d = Discretization::new(params, g.clone()).unwrap();
    let mut r = rng(seed);
    let omega = 0.3 * params.omega_alpha();
    let u = random_field(&mut r, &g, 1.3);
    let cg = d.action_gradient(&u, omega).unwrap();
    let w = g.weights();
    for _ in 0..20 {
        let v = random_field(&mut r, &g, 1.3);
        let h = 1e-6;
        let sp = d.action(&u.combine(real(1.0), &v, real(h)).unwrap(), omega).unwrap().action;
        let sm = d.action(&u.combine(real(1.0), &v, real(-h)).unwrap(), omega).unwrap().action;
        let fd = (sp - sm) / (2.0 * h);
        let pair: f64 = cg.regular.iter().zip(v.regular()).zip(w).map(|((a, b), &wi)| wi * (a.conj() * b).re).sum::<f64>()
            + (cg.singular.conj() * v.singular_coeff()).re;
        assert!((fd - pair).abs() <= 1e-6 * (1.0 + pair.abs()), "{fd} {pair}");
    }
}

#[test]
fn gradient_matches_finite_differences() {
    for params in cases() {
        fd_check(params, 256, 21);
        fd_check(params, 1024, 22);
    }
}

#[test]
fn lambda_independence() {
    for params in cases() {
        let g = small_grid(params.dim(), 1024);
        let d = Discretization::new(params, g.clone()).unwrap();
        let ls = params.canonical_lambda();
        let mut r = rng(31);
        for _ in 0..20 {
            let lam = r.gen_range(0.5..5.0);
            let u = random_field(&mut r, &g, lam);
            let q: Vec<f64> = [0.5 * ls, ls, 2.0 * ls].iter().map(|&l| d.quadratic_form(&u.rebase(l).unwrap()).unwrap()).collect();
            for w in q.windows(2) {
                assert!((w[0] - w[1]).abs() <= 1e-8 * (1.0 + w[0].abs()), "{q:?}");
            }
        }
    }
}

#[test]
fn anchor_dependence_is_second_order() {
    // discretizations anchored at different λ agree up to the quadrature error
    for params in cases() {
        let spread = |n| {
            let g = small_grid(params.dim(), n);
            let u = random_field(&mut rng(32), &g, 1.3);
            let ls = params.canonical_lambda();
            let q: Vec<f64> = [0.5 * ls, ls, 2.0 * ls]
                .iter()
                .map(|&l| Discretization::with_lambda(params, g.clone(), l).unwrap().quadratic_form(&u).unwrap())
                .collect();
            ((q[0] - q[2]) / q[1]).abs()
        };
        let (a, b) = (spread(1024), spread(2048));
        assert!(b <= 1e-4 && a / b >= 3.5, "{a} {b}");
    }
}

#[test]
fn spectral_nonnegativity() {
    for params in cases() {
        let g = default_grid(&params, 0.5 * params.omega_alpha()).unwrap();
        let d = Discretization::new(params, g.clone()).unwrap();
        let x = chi(&params, &g);
        let xs = d.to_state(&x).unwrap();
        let m = d.mass_matrix();
        let xx = m.sesquilinear(&xs, &xs).re;
        let mut r = rng(41);
        for _ in 0..50 {
            let v = random_field(&mut r, &g, 2.0);
            let vs = d.to_state(&v).unwrap();
            let k = m.sesquilinear(&xs, &vs) / xx;
            let p: Vec<C64> = vs.iter().zip(&xs).map(|(a, b)| a - k * b).collect();
            assert!(m.sesquilinear(&xs, &p).norm() <= 1e-12 * xx.sqrt() * m.sesquilinear(&p, &p).re.sqrt());
            let q = d.quadratic_state(&p);
            let norm2 = d.mass_state(&p);
            assert!(q >= -1e-6 * norm2, "{q} {norm2}");
        }
    }
}

#[test]
fn rayleigh_bound() {
    for params in cases() {
        let g = default_grid(&params, 0.5 * params.omega_alpha()).unwrap();
        let d = Discretization::new(params, g.clone()).unwrap();
        let ea = e_alpha(&params);
        let mut r = rng(51);
        for _ in 0..30 {
            let u = random_field(&mut r, &g, 1.0);
            let q = d.quadratic_form(&u).unwrap();
            assert!(q >= ea * u.mass() - 1e-6 * u.mass(), "{q} {}", ea * u.mass());
        }
    }
}

#[test]
fn green_norm_matches_singular_mass() {
    let params = unit(Dim::Two, 3.0);
    // shape parameter matched to the kernel
    let g = Arc::new(build_grid_with_shape(Dim::Two, 1e-30, 200.0, 4096, 2.0, 2.5).unwrap());
    let u = DecomposedField::pure_singular(g, real(1.0), 2.5).unwrap();
    let exact = green_l2_norm_sq(&params, 2.5).unwrap();
    assert!((u.mass() - exact).abs() <= 1e-6 * exact);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn homogeneity(seed in any::<u64>(), three in any::<bool>()) {
        let params = if three { unit(Dim::Three, 1.5) } else { unit(Dim::Two, 3.0) };
        let g = small_grid(params.dim(), 256);
        let d = Discretization::new(params, g.clone()).unwrap();
        let u = random_field(&mut rng(seed), &g, 1.0);
        let q = d.quadratic_form(&u).unwrap();
        for k in [real(2.0), C64::new(0.0, 1.0), C64::new(1.0, 1.0)] {
            let qk = d.quadratic_form(&u.scale(k)).unwrap();
            prop_assert!((qk - k.norm_sqr() * q).abs() <= 1e-12 * k.norm_sqr() * (1.0 + q.abs()));
        }
    }

    #[test]
    fn parallelogram(seed in any::<u64>(), three in any::<bool>()) {
        let params = if three { unit(Dim::Three, 1.8) } else { unit(Dim::Two, 2.0) };
        let g = small_grid(params.dim(), 256);
        let d = Discretization::new(params, g.clone()).unwrap();
        let mut r = rng(seed);
        let u = random_field(&mut r, &g, 1.0);
        let v = random_field(&mut r, &g, 2.0);
        let q = |w: &DecomposedField| d.quadratic_form(w).unwrap();
        let lhs = q(&u.combine(real(1.0), &v, real(1.0)).unwrap()) + q(&u.combine(real(1.0), &v, real(-1.0)).unwrap());
        let rhs = 2.0 * q(&u) + 2.0 * q(&v);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (lhs.abs() + rhs.abs()).max(1.0));
    }

    #[test]
    fn sesquilinear_symmetry(seed in any::<u64>()) {
        let params = unit(Dim::Three, 1.5);
        let g = small_grid(Dim::Three, 256);
        let d = Discretization::new(params, g.clone()).unwrap();
        let mut r = rng(seed);
        let u = random_field(&mut r, &g, 1.0);
        let v = random_field(&mut r, &g, 4.0);
        let (a, b) = (d.bilinear_form(&u, &v).unwrap(), d.bilinear_form(&v, &u).unwrap());
        prop_assert!((a - b.conj()).norm() <= 1e-12 * (1.0 + a.norm()));
    }
}
