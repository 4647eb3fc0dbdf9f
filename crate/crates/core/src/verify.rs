//! Self-check suite over the invariants of every module, sized to run in well
//! under a minute.

use crate::evolution::{conserve_report, evolve, step, EvolutionConfig, Evolver, Reference};
use crate::groundstate::{
    cross_validate, decay_analysis, default_grid, default_grid_with, gauge_fix, minimize_action, veron_exact_residual,
    MinimizeOptions, ShootOptions,
};
use crate::io::{field_from_csv, field_to_csv, FieldMeta};
use crate::origin::boundary_value;
use crate::special::{beta, chi_alpha_coefficient, e_alpha, green_inner, green_l2_norm_sq, green_value};
use crate::{build_grid, build_grid_with_shape, DecomposedField, Dim, Discretization, InteractionParams, RadialGrid, Result, C64};
use crate::Error;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub module: &'static str,
    pub name: &'static str,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub bound: String,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn at_most(&mut self, module: &'static str, name: &'static str, value: f64, tol: f64) {
        self.checks.push(Check { module, name, value, bound: format!("<= {tol:e}"), passed: value <= tol });
    }

    fn at_least(&mut self, module: &'static str, name: &'static str, value: f64, tol: f64) {
        self.checks.push(Check { module, name, value, bound: format!(">= {tol:e}"), passed: value >= tol });
    }

    fn within(&mut self, module: &'static str, name: &'static str, value: f64, lo: f64, hi: f64) {
        self.checks.push(Check { module, name, value, bound: format!("in [{lo}, {hi}]"), passed: (lo..=hi).contains(&value) });
    }

    fn holds(&mut self, module: &'static str, name: &'static str, ok: bool) {
        self.checks.push(Check { module, name, value: if ok { 1.0 } else { 0.0 }, bound: "true".into(), passed: ok });
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn random_params(rng: &mut StdRng) -> InteractionParams {
    if rng.gen_bool(0.5) {
        InteractionParams::new(Dim::Three, rng.gen_range(-2.0..-0.01), rng.gen_range(1.01..1.99)).unwrap()
    } else {
        InteractionParams::new(Dim::Two, rng.gen_range(-0.3..0.3), rng.gen_range(1.01..6.0)).unwrap()
    }
}

/// Three complex Gaussians plus a singular part.
pub fn random_field(rng: &mut StdRng, grid: &Arc<RadialGrid>, lambda: f64) -> Result<DecomposedField> {
    let terms: Vec<(C64, f64)> = (0..3)
        .map(|_| (C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), rng.gen_range(0.05..2.0)))
        .collect();
    let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let f = DecomposedField::from_regular_fn(grid.clone(), lambda, |r| terms.iter().map(|(a, b)| a * (-b * r * r).exp()).sum())?;
    f.combine(real(1.0), &DecomposedField::pure_singular(grid.clone(), c, lambda)?, real(1.0))
}

fn sup_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn unit(dim: Dim, p: f64) -> InteractionParams {
    InteractionParams::unit_bound_state(dim, p).unwrap()
}

/// Runs every check. Fails only on internal errors; violated invariants are
/// recorded in the report.
pub fn run_suite(seed: u64) -> Result<VerifyReport> {
    let mut rep = VerifyReport::default();
    let mut rng = StdRng::seed_from_u64(seed);
    special_checks(&mut rep, &mut rng)?;
    grid_checks(&mut rep, &mut rng)?;
    form_checks(&mut rep, &mut rng)?;
    groundstate_checks(&mut rep)?;
    evolution_checks(&mut rep)?;
    io_checks(&mut rep, &mut rng)?;
    Ok(rep)
}

fn special_checks(rep: &mut VerifyReport, rng: &mut StdRng) -> Result<()> {
    const M: &str = "special_functions";
    let (mut resolvent, mut symmetric) = (0.0f64, true);
    for _ in 0..100 {
        let params = random_params(rng);
        let (l, m) = (rng.gen_range(0.1..100.0), rng.gen_range(0.1..100.0));
        let (bl, bm, gi) = (beta(&params, l)?, beta(&params, m)?, green_inner(&params, l, m)?);
        resolvent = resolvent.max(((l - m) * gi + bm - bl).abs() / (1.0 + bl.abs()));
        symmetric &= gi == green_inner(&params, m, l)?;
    }
    rep.at_most(M, "resolvent identity", resolvent, 1e-10);
    rep.holds(M, "green_inner symmetry", symmetric);

    let mut root = 0.0f64;
    for _ in 0..50 {
        let params = random_params(rng);
        root = root.max((params.alpha() + beta(&params, params.omega_alpha())?).abs());
    }
    rep.at_most(M, "defining root", root, 1e-12);

    let mut monotone = true;
    for dim in [Dim::Two, Dim::Three] {
        let params = unit(dim, 1.5);
        let lams: Vec<f64> = (0..60).map(|i| 0.01 * 1.2f64.powi(i)).collect();
        let b = lams.iter().map(|&l| beta(&params, l)).collect::<Result<Vec<_>>>()?;
        monotone &= b.windows(2).all(|w| w[1] > w[0]);
        let rs: Vec<f64> = (0..60).map(|i| 1e-3 * 1.2f64.powi(i)).collect();
        let g = rs.iter().map(|&r| green_value(&params, 1.0, r)).collect::<Result<Vec<_>>>()?;
        monotone &= g.windows(2).all(|w| w[1] < w[0]);
    }
    rep.holds(M, "beta increasing, green decreasing", monotone);

    let mut quad = 0.0f64;
    for (dim, lam) in [(Dim::Two, 2.5f64), (Dim::Three, 1.0)] {
        let params = unit(dim, 1.5);
        // e^{−2√λR} < 1e−10
        let r_max = 12.0 / lam.sqrt();
        let g = build_grid_with_shape(dim, 1e-30, r_max, 4096, 2.0, lam)?;
        let num = g.integrate_fine(|r| green_value(&params, lam, r).unwrap_or(0.0).powi(2));
        let exact = green_l2_norm_sq(&params, lam)?;
        quad = quad.max((num - exact).abs() / exact);
    }
    rep.at_most(M, "green norm quadrature", quad, 1e-6);
    Ok(())
}

fn grid_checks(rep: &mut VerifyReport, rng: &mut StdRng) -> Result<()> {
    const M: &str = "radial_discretization";
    let err = |n| -> Result<f64> {
        let g = build_grid(Dim::Three, 1e-30, 12.0, n, 1.0)?;
        Ok((g.integrate(|r| (-r * r).exp()) - std::f64::consts::PI.powf(1.5)).abs())
    };
    rep.within(M, "quadrature refinement ratio", err(200)? / err(400)?, 3.5, 4.5);

    let mut rebase = 0.0f64;
    for dim in [Dim::Two, Dim::Three] {
        let g = Arc::new(build_grid(dim, 1e-30, 40.0, 512, 2.0)?);
        for _ in 0..10 {
            let lam = rng.gen_range(0.2..20.0);
            let f = random_field(rng, &g, lam)?;
            let h = f.rebase(rng.gen_range(0.2..20.0))?;
            for (x, y) in f.values().iter().zip(h.values()) {
                rebase = rebase.max((x - y).norm() / (1.0 + x.norm()));
            }
            rebase = rebase.max((h.mass() - f.mass()).abs() / f.mass());
            rebase = rebase.max((h.lq_norm(2.5) - f.lq_norm(2.5)).abs() / f.lq_norm(2.5));
        }
    }
    rep.at_most(M, "rebase invariance", rebase, 1e-10);

    let lam: f64 = 2.0;
    let k = lam.sqrt();
    let mass_at = |rr: f64| -> Result<f64> {
        let g = Arc::new(build_grid(Dim::Two, 1e-30, rr / k, (100.0 * rr) as usize, 1.0)?);
        let f = DecomposedField::from_regular_fn(g.clone(), lam, |r| real((-k * r).exp()))?;
        Ok(f.combine(real(1.0), &DecomposedField::pure_singular(g, real(0.3), lam)?, real(1.0))?.mass())
    };
    let (a, b) = (mass_at(30.0)?, mass_at(40.0)?);
    rep.at_most(M, "truncation accounting", (a - b).abs() / b, 1e-8);
    Ok(())
}

fn form_checks(rep: &mut VerifyReport, rng: &mut StdRng) -> Result<()> {
    const M: &str = "action_functional";
    let cases = [unit(Dim::Three, 1.5), unit(Dim::Two, 3.0)];
    let (mut lam_dep, mut homog, mut para, mut sym, mut fd) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut nonneg, mut rayleigh, mut eig, mut chi_mass) = (f64::INFINITY, f64::INFINITY, 0.0f64, 0.0f64);
    for params in cases {
        let small = Arc::new(build_grid(params.dim(), 1e-30, 60.0, 512, 2.0)?);
        let d = Discretization::new(params, small.clone())?;
        let ls = params.canonical_lambda();
        for _ in 0..10 {
            let (lu, lv) = (rng.gen_range(0.5..5.0), rng.gen_range(0.5..5.0));
            let u = random_field(rng, &small, lu)?;
            let v = random_field(rng, &small, lv)?;
            let q = d.quadratic_form(&u)?;
            for l in [0.5 * ls, 2.0 * ls] {
                lam_dep = lam_dep.max((d.quadratic_form(&u.rebase(l)?)? - q).abs() / (1.0 + q.abs()));
            }
            for k in [real(2.0), C64::new(0.0, 1.0), C64::new(1.0, 1.0)] {
                let qk = d.quadratic_form(&u.scale(k))?;
                homog = homog.max((qk - k.norm_sqr() * q).abs() / (k.norm_sqr() * (1.0 + q.abs())));
            }
            let qv = d.quadratic_form(&v)?;
            let lhs = d.quadratic_form(&u.combine(real(1.0), &v, real(1.0))?)? + d.quadratic_form(&u.combine(real(1.0), &v, real(-1.0))?)?;
            let rhs = 2.0 * q + 2.0 * qv;
            para = para.max((lhs - rhs).abs() / (lhs.abs() + rhs.abs()).max(1.0));
            let (a, b) = (d.bilinear_form(&u, &v)?, d.bilinear_form(&v, &u)?);
            sym = sym.max((a - b.conj()).norm() / (1.0 + a.norm()));
        }

        for n in [256, 1024] {
            let g = Arc::new(build_grid(params.dim(), 1e-30, 60.0, n, 2.0)?);
            let d = Discretization::new(params, g.clone())?;
            let omega = 0.3 * params.omega_alpha();
            let u = random_field(rng, &g, 1.3)?;
            let cg = d.action_gradient(&u, omega)?;
            for _ in 0..5 {
                let v = random_field(rng, &g, 1.3)?;
                let h = 1e-6;
                let sp = d.action(&u.combine(real(1.0), &v, real(h))?, omega)?.action;
                let sm = d.action(&u.combine(real(1.0), &v, real(-h))?, omega)?.action;
                let pair: f64 = cg.regular.iter().zip(v.regular()).zip(g.weights()).map(|((a, b), &w)| w * (a.conj() * b).re).sum::<f64>()
                    + (cg.singular.conj() * v.singular_coeff()).re;
                fd = fd.max(((sp - sm) / (2.0 * h) - pair).abs() / (1.0 + pair.abs()));
            }
        }

        let g = default_grid(&params, 0.5 * params.omega_alpha())?;
        let d = Discretization::new(params, g.clone())?;
        let chi = DecomposedField::pure_singular(g.clone(), real(chi_alpha_coefficient(&params)), params.omega_alpha())?;
        let ea = e_alpha(&params);
        eig = eig.max((d.quadratic_form(&chi)? - ea).abs() / ea.abs());
        chi_mass = chi_mass.max((chi.mass() - 1.0).abs());
        let xs = d.to_state(&chi)?;
        let m = d.mass_matrix();
        let xx = m.sesquilinear(&xs, &xs).re;
        for _ in 0..25 {
            let v = random_field(rng, &g, 2.0)?;
            let vs = d.to_state(&v)?;
            rayleigh = rayleigh.min((d.quadratic_state(&vs) - ea * d.mass_state(&vs)) / d.mass_state(&vs));
            let k = m.sesquilinear(&xs, &vs) / xx;
            let w: Vec<C64> = vs.iter().zip(&xs).map(|(a, b)| a - k * b).collect();
            nonneg = nonneg.min(d.quadratic_state(&w) / d.mass_state(&w));
        }
    }
    rep.at_most(M, "lambda independence", lam_dep, 1e-8);
    rep.at_most(M, "homogeneity", homog, 1e-12);
    rep.at_most(M, "parallelogram identity", para, 1e-10);
    rep.at_most(M, "sesquilinear symmetry", sym, 1e-12);
    rep.at_most(M, "gradient vs finite differences", fd, 1e-6);
    rep.at_most(M, "bound state eigenvalue", eig, 2e-3);
    rep.at_most(M, "bound state mass", chi_mass, 1e-6);
    rep.at_least(M, "spectral nonnegativity", nonneg, -1e-6);
    rep.at_least(M, "rayleigh bound", rayleigh, -1e-6);
    Ok(())
}

fn groundstate_checks(rep: &mut VerifyReport) -> Result<()> {
    const M: &str = "groundstate_solver";
    let mopts = MinimizeOptions::default();
    let (mut dist, mut defect, mut resid, mut shape, mut negative, mut gauge) = (0.0f64, 0.0f64, 0.0f64, true, true, true);
    for (dim, p) in [(Dim::Three, 1.5), (Dim::Two, 3.0)] {
        let params = unit(dim, p);
        let omega = 0.5;
        let cv = cross_validate(&params, omega, default_grid(&params, omega)?, &mopts, &ShootOptions::default())?;
        dist = dist.max(cv.distance);
        for res in [&cv.minimize, &cv.shoot] {
            shape &= res.is_positive_decreasing();
            negative &= res.d_omega < 0.0 && res.singular_coeff().norm() > 0.0;
            for lam in [params.canonical_lambda(), 7.0] {
                defect = defect.max(boundary_value(&params, omega, &res.profile.rebase(lam)?).1);
            }
        }
        resid = resid.max(cv.minimize.residual);
        let once = gauge_fix(&cv.minimize.profile.scale(C64::from_polar(1.0, 2.2)));
        let twice = gauge_fix(&once);
        gauge &= once.regular() == twice.regular() && once.singular_coeff() == twice.singular_coeff();
    }
    rep.holds(M, "gauge fixing idempotent", gauge);
    rep.at_most(M, "solver agreement", dist, 1e-3);
    rep.at_most(M, "boundary defect", defect, 1e-6);
    rep.at_most(M, "minimizer residual", resid, 1e-8);
    rep.holds(M, "positive and decreasing", shape);
    rep.holds(M, "negative least action, nonzero charge", negative);

    let params = unit(Dim::Three, 1.5);
    let d = [0.0, 0.5, 0.9]
        .iter()
        .map(|&w| Ok(minimize_action(&params, w, default_grid(&params, w)?, &mopts)?.d_omega))
        .collect::<Result<Vec<f64>>>()?;
    rep.holds(M, "least action negative, nondecreasing in omega", d.iter().all(|&v| v < 0.0) && d.windows(2).all(|w| w[0] <= w[1] + 1e-10));

    let params = unit(Dim::Two, 2.0);
    let d = [1024, 2048, 4096]
        .iter()
        .map(|&n| Ok(minimize_action(&params, 0.5, default_grid_with(&params, 0.5, n)?, &mopts)?.d_omega))
        .collect::<Result<Vec<f64>>>()?;
    rep.at_most(M, "grid refinement consistency", (d[1] - d[2]).abs() / (d[0] - d[1]).abs().max(f64::MIN_POSITIVE), 1.0);

    let rs: Vec<f64> = (0..200).map(|i| 0.01 * 1.05f64.powi(i)).collect();
    let mut veron = 0.0f64;
    for (dim, p) in [(Dim::Two, 2.0), (Dim::Two, 3.0), (Dim::Three, 1.5)] {
        veron = veron.max(veron_exact_residual(dim, p, &rs)?);
    }
    rep.at_most(M, "exact zero-frequency solution residual", veron, 1e-10);

    let (_, decay) = decay_analysis(&unit(Dim::Two, 2.0))?;
    rep.at_most(M, "zero-frequency tail exponent", decay.relative_error, 0.05);
    rep.holds(M, "comparison sandwich", decay.sandwich.upper && decay.sandwich.lower);
    Ok(())
}

fn evolution_checks(rep: &mut VerifyReport) -> Result<()> {
    const M: &str = "evolution";
    let params = unit(Dim::Three, 1.8);
    let g = default_grid(&params, 0.5)?;
    let ev = Evolver::new(&params, g.clone(), &EvolutionConfig { linear_only: true, dt: 0.05, ..Default::default() })?;
    let mut rng = StdRng::seed_from_u64(9);
    let mut x = ev.discretization().to_state(&random_field(&mut rng, &g, 2.0)?)?;
    let m0 = ev.mass(&x);
    let mut unitary = 0.0f64;
    for _ in 0..20 {
        let m = ev.mass(&x);
        x = ev.step_state(&x)?.0;
        unitary = unitary.max((ev.mass(&x) - m).abs() / m0);
    }
    rep.at_most(M, "linear step mass drift", unitary, 1e-12);

    let params = unit(Dim::Two, 3.0);
    let omega = 0.5;
    let phi = minimize_action(&params, omega, default_grid(&params, omega)?, &MinimizeOptions::default())?.profile;
    let smooth = DecomposedField::from_regular_fn(phi.grid().clone(), phi.lambda(), |r| C64::new(0.0, 0.05 * (-(r - 2.0).powi(2)).exp()))?;
    let u0 = phi.combine(real(1.0), &smooth, real(1.0))?;
    let (fw, bw) = (EvolutionConfig { dt: 1e-3, ..Default::default() }, EvolutionConfig { dt: -1e-3, ..Default::default() });
    let mut u = u0.clone();
    for _ in 0..10 {
        u = step(&params, &u, &fw)?;
    }
    for _ in 0..10 {
        u = step(&params, &u, &bw)?;
    }
    rep.at_most(M, "time reversibility", sup_diff(&u.values(), &u0.values()), 1e-9);

    let params = unit(Dim::Three, 1.5);
    let phi = minimize_action(&params, omega, default_grid(&params, omega)?, &MinimizeOptions::default())?.profile;
    let cfg = EvolutionConfig { t_final: 2.0, record_every: 50, ..Default::default() };
    let (_, tr) = evolve(&params, &phi, Some(Reference { phi: &phi, omega }), &cfg)?;
    rep.at_most(M, "constraint persistence", tr.constraint_defect.iter().cloned().fold(0.0, f64::max), 1e-5);
    rep.at_most(M, "orbital distance", tr.orbital_distance.iter().cloned().fold(0.0, f64::max), 1e-6);
    rep.at_most(M, "mass drift", conserve_report(&tr).mass_drift, 1e-8);

    let err = |dt: f64| -> Result<f64> {
        let (u, _) = evolve(&params, &phi, None, &EvolutionConfig { dt, t_final: 2.0, record_every: 1000, ..Default::default() })?;
        Ok(sup_diff(&u.values(), &phi.scale(C64::from_polar(1.0, omega * 2.0)).values()))
    };
    rep.within(M, "global error order", err(0.02)? / err(0.01)?, 3.4, 4.6);
    Ok(())
}

fn io_checks(rep: &mut VerifyReport, rng: &mut StdRng) -> Result<()> {
    const M: &str = "cli";
    let params = unit(Dim::Three, 1.5);
    let g = Arc::new(build_grid(Dim::Three, 1e-30, 60.0, 256, 2.0)?);
    let f = random_field(rng, &g, 1.7)?;
    let meta = FieldMeta::new(&params, &f);
    let text = field_to_csv(&f)?;
    let back: FieldMeta = serde_json::from_str(&serde_json::to_string(&meta).map_err(|e| Error::Parse(e.to_string()))?).map_err(|e| Error::Parse(e.to_string()))?;
    let (_, h) = field_from_csv(&text, &back)?;
    rep.holds(M, "field round trip", h.regular() == f.regular() && h.singular_coeff() == f.singular_coeff() && field_to_csv(&h)? == text);
    Ok(())
}
