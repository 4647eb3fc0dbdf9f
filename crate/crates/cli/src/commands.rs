use crate::config::RunConfig;
use crate::failure::Failure;
use pointwave::evolution::{
    conserve_report, evolve, perturbation_bump, Metric, Orbit, Reference, StabilityRow, StabilityTable,
};
use pointwave::groundstate::{
    cross_validate, decay_analysis, default_grid, gauge_fix, minimize_action, veron_exact_residual, MinimizeOptions,
    ShootOptions, Veron, DEFECT_TOLERANCE, DEFAULT_R_MIN,
};
use pointwave::io::{fmt_f64, save_field, to_json};
use pointwave::origin::boundary_value;
use pointwave::verify::run_suite;
use pointwave::{build_grid_with_shape, Discretization, InteractionParams, RadialGrid, C64};
use rayon::prelude::*;
use serde::Serialize;
use std::path::Path;
use std::sync::Arc;

type Outcome = Result<(), Failure>;

const RESIDUAL_TOLERANCE: f64 = 1e-8;
const MASS_DRIFT_TOLERANCE: f64 = 1e-8;
const ENERGY_DRIFT_TOLERANCE: f64 = 1e-6;

fn write(dir: &Path, name: &str, text: &str) -> Outcome {
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

fn grid_for(cfg: &RunConfig, omega: f64) -> Result<Arc<RadialGrid>, Failure> {
    let params = cfg.params();
    let base = default_grid(&params, omega)?;
    if cfg.grid.is_empty() {
        return Ok(base);
    }
    let g = &cfg.grid;
    let grid = build_grid_with_shape(
        params.dim(),
        DEFAULT_R_MIN,
        g.r_max.unwrap_or(base.r_max()),
        g.n.unwrap_or(base.len()),
        g.grading.unwrap_or(base.spec().grading),
        base.shape_lambda(),
    )
    .map_err(Failure::from_config)?;
    Ok(Arc::new(grid))
}

fn finish(violations: Vec<String>) -> Outcome {
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::invariant(violations))
    }
}

#[derive(Serialize)]
struct Constants {
    dim: u32,
    alpha: f64,
    p: f64,
    e_alpha: f64,
    omega_alpha: f64,
}

fn constants(params: &InteractionParams) -> Constants {
    Constants { dim: params.dim().as_u32(), alpha: params.alpha(), p: params.p(), e_alpha: params.e_alpha(), omega_alpha: params.omega_alpha() }
}

pub fn solve(cfg: &RunConfig) -> Outcome {
    let params = cfg.params();
    let omega = cfg.omega.expect("validated");
    let grid = grid_for(cfg, omega)?;
    let cv = cross_validate(&params, omega, grid.clone(), &MinimizeOptions::default(), &ShootOptions::default())?;
    let report = cv.report();
    save_field(&cfg.out.join("profile.csv"), &params, &cv.minimize.profile)?;
    save_field(&cfg.out.join("shoot_profile.csv"), &params, &cv.shoot.profile)?;

    let mut violations = Vec::new();
    let mut defects = Vec::new();
    for res in [&cv.minimize, &cv.shoot] {
        for lam in [params.canonical_lambda(), 2.0 * params.canonical_lambda()] {
            let d = boundary_value(&params, omega, &res.profile.rebase(lam)?).1;
            defects.push(d);
            if d > DEFECT_TOLERANCE {
                violations.push(format!("boundary defect {d:e} ({:?}, lambda {lam})", res.method));
            }
        }
    }
    let m = &cv.minimize;
    if !(m.d_omega < 0.0) {
        violations.push(format!("least action {} is not negative", m.d_omega));
    }
    if m.singular_coeff().norm() == 0.0 {
        violations.push("singular coefficient vanishes".into());
    }
    if m.residual > RESIDUAL_TOLERANCE {
        violations.push(format!("residual {:e} exceeds {RESIDUAL_TOLERANCE:e}", m.residual));
    }
    if !report.both_positive_decreasing {
        violations.push("profile is not positive and decreasing".into());
    }
    if report.distance > report.tolerance {
        violations.push(format!("solver distance {:e} exceeds {:e}", report.distance, report.tolerance));
    }

    #[derive(Serialize)]
    struct Summary<'a> {
        params: Constants,
        omega: f64,
        grid: pointwave::GridSpec,
        d_omega: f64,
        c: f64,
        sup_phi: f64,
        boundary_defects: &'a [f64],
        minimize: pointwave::groundstate::SolveSummary,
        shoot: pointwave::groundstate::SolveSummary,
        violations: &'a [String],
    }
    let summary = Summary {
        params: constants(&params),
        omega,
        grid: grid.spec(),
        d_omega: m.d_omega,
        c: m.singular_coeff().re,
        sup_phi: m.sup_value(),
        boundary_defects: &defects,
        minimize: m.summary(),
        shoot: cv.shoot.summary(),
        violations: &violations,
    };
    write(&cfg.out, "summary.json", &to_json(&summary)?)?;
    write(&cfg.out, "cross_validation.json", &to_json(&report)?)?;
    println!(
        "omega {omega}: d = {}, c = {}, sup = {}, solver distance {:.3e}",
        fmt_f64(m.d_omega),
        fmt_f64(m.singular_coeff().re),
        fmt_f64(m.sup_value()),
        report.distance
    );
    finish(violations)
}

pub fn sweep(cfg: &RunConfig) -> Outcome {
    let params = cfg.params();
    let rows = cfg
        .omegas
        .par_iter()
        .map(|&w| -> Result<_, Failure> {
            let res = minimize_action(&params, w, grid_for(cfg, w)?, &MinimizeOptions::default())?;
            Ok((w, res.d_omega, res.singular_coeff().re, res.sup_value(), res.residual))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from("omega,d_omega,c,sup_phi,residual\n");
    for (w, d, c, s, r) in &rows {
        csv.push_str(&[*w, *d, *c, *s, *r].map(fmt_f64).join(","));
        csv.push('\n');
    }
    write(&cfg.out, "sweep.csv", &csv)?;

    let mut violations = Vec::new();
    for (w, d, _, _, r) in &rows {
        if !(*d < 0.0) {
            violations.push(format!("d({w}) = {d} is not negative"));
        }
        if *r > RESIDUAL_TOLERANCE {
            violations.push(format!("residual {r:e} at omega {w}"));
        }
    }
    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in sorted.windows(2) {
        if w[0].1 > w[1].1 + 1e-10 {
            violations.push(format!("d decreases between omega {} and {}", w[0].0, w[1].0));
        }
    }
    println!("{} frequencies written to {}", rows.len(), cfg.out.join("sweep.csv").display());
    finish(violations)
}

pub fn decay(cfg: &RunConfig) -> Outcome {
    let params = cfg.params();
    let (profile, report) = decay_analysis(&params)?;
    save_field(&cfg.out.join("decay_profile.csv"), &params, &profile)?;
    let veron = Veron::new(params.dim(), params.p())?;
    let rr = profile.grid().r_max();
    let fit = report.fit;
    let mut csv = String::from("r,phi,fit,algebraic\n");
    for (r, u) in profile.grid().nodes().iter().zip(profile.values()) {
        if *r >= 0.25 * rr && *r <= 0.9 * rr {
            let fitted = (fit.intercept + fit.exponent * r.ln()).exp();
            csv.push_str(&[*r, u.re, fitted, veron.value(*r)].map(fmt_f64).join(","));
            csv.push('\n');
        }
    }
    write(&cfg.out, "tail_fit.csv", &csv)?;
    if let Some(l2) = &report.l2 {
        let mut csv = String::from("radius,mass,increment\n");
        for (i, (r, m)) in l2.radii.iter().zip(&l2.mass).enumerate() {
            let inc = if i == 0 { f64::NAN } else { l2.increments[i - 1] };
            csv.push_str(&format!("{},{},{}\n", fmt_f64(*r), fmt_f64(*m), if i == 0 { String::new() } else { fmt_f64(inc) }));
        }
        write(&cfg.out, "l2_threshold.csv", &csv)?;
    }
    let rs: Vec<f64> = (0..200).map(|i| 0.01 * 1.05f64.powi(i)).collect();
    let residual = veron_exact_residual(params.dim(), params.p(), &rs)?;

    #[derive(Serialize)]
    struct DecayOut<'a> {
        params: Constants,
        report: &'a pointwave::groundstate::DecayReport,
        algebraic_residual: f64,
        l2_verdict: Option<&'static str>,
    }
    let verdict = report.l2.as_ref().map(|l| l.verdict.as_str());
    write(
        &cfg.out,
        "decay.json",
        &to_json(&DecayOut { params: constants(&params), report: &report, algebraic_residual: residual, l2_verdict: verdict })?,
    )?;
    println!(
        "tail exponent {:.6} (predicted {:.6}), sandwich upper {} lower {}{}",
        fit.exponent,
        report.predicted_exponent,
        report.sandwich.upper,
        report.sandwich.lower,
        verdict.map(|v| format!(", L2 verdict: {v}")).unwrap_or_default()
    );
    let mut violations = Vec::new();
    if report.relative_error > 0.05 {
        violations.push(format!("tail exponent {} is {:.1}% off", fit.exponent, 100.0 * report.relative_error));
    }
    if !(report.sandwich.upper && report.sandwich.lower) {
        violations.push("comparison sandwich failed".into());
    }
    if residual > 1e-10 {
        violations.push(format!("algebraic solution residual {residual:e}"));
    }
    finish(violations)
}

pub fn evolve_cmd(cfg: &RunConfig) -> Outcome {
    let params = cfg.params();
    let omega = cfg.omega.expect("validated");
    let metric = cfg.metric.unwrap_or(if omega == 0.0 { Metric::X0 } else { Metric::H1Alpha });
    let ecfg = pointwave::evolution::EvolutionConfig { metric, ..cfg.evolution.clone() };
    let ground = minimize_action(&params, omega, grid_for(cfg, omega)?, &MinimizeOptions::default())?;
    let phi = match ecfg.lambda {
        Some(l) => gauge_fix(&ground.profile.rebase(l)?),
        None => ground.profile.clone(),
    };
    let disc = Discretization::with_lambda(params, phi.grid().clone(), phi.lambda())?;
    let orbit = Orbit::new(&disc, &phi, omega, metric)?;
    let bump = perturbation_bump(&orbit)?;
    let base = disc.to_state(&phi)?;
    let runs = cfg
        .deltas
        .par_iter()
        .map(|&delta| -> Result<_, Failure> {
            let x0: Vec<C64> = base.iter().zip(&bump).map(|(a, b)| a + delta * b).collect();
            let (_, trace) = evolve(&params, &disc.to_field(&x0)?, Some(Reference { phi: &phi, omega }), &ecfg)?;
            Ok(trace)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    for (k, (delta, trace)) in cfg.deltas.iter().zip(&runs).enumerate() {
        write(&cfg.out, &format!("trace_{k}.csv"), &trace.to_csv())?;
        let sup = trace.orbital_distance.iter().cloned().fold(0.0, f64::max);
        let drift = conserve_report(trace);
        rows.push(StabilityRow {
            delta: *delta,
            sup_distance: sup,
            ratio: if *delta > 0.0 { sup / delta } else { 0.0 },
            mass_drift: drift.mass_drift,
            energy_drift: drift.energy_drift,
        });
    }
    let mut order: Vec<&StabilityRow> = rows.iter().collect();
    order.sort_by(|a, b| a.delta.total_cmp(&b.delta));
    let monotone = order.windows(2).all(|w| w[0].sup_distance <= w[1].sup_distance);
    let max_ratio = rows.iter().filter(|r| r.delta > 0.0).map(|r| r.ratio).fold(0.0, f64::max);
    let domain_truncated = omega == 0.0 && params.dim() == pointwave::Dim::Two && params.p() >= 3.0;
    let table = StabilityTable { omega, metric, rows, monotone, max_ratio, domain_truncated };
    write(&cfg.out, "stability.csv", &table.to_csv())?;

    #[derive(Serialize)]
    struct EvolveOut<'a> {
        params: Constants,
        grid: pointwave::GridSpec,
        config: &'a pointwave::evolution::EvolutionConfig,
        table: &'a StabilityTable,
    }
    write(&cfg.out, "evolve.json", &to_json(&EvolveOut { params: constants(&params), grid: phi.grid().spec(), config: &ecfg, table: &table })?)?;

    let mut violations = Vec::new();
    for r in &table.rows {
        println!("delta {}: D = {:.6e}, mass drift {:.3e}, energy drift {:.3e}", r.delta, r.sup_distance, r.mass_drift, r.energy_drift);
        if r.mass_drift > MASS_DRIFT_TOLERANCE || r.energy_drift > ENERGY_DRIFT_TOLERANCE {
            violations.push(format!("drift at delta {}: mass {:e}, energy {:e}", r.delta, r.mass_drift, r.energy_drift));
        }
        if r.delta == 0.0 && r.sup_distance > 1e-6 {
            violations.push(format!("unperturbed run left the orbit: D = {:e}", r.sup_distance));
        }
        if r.delta > 0.0 && r.ratio > 10.0 {
            violations.push(format!("D/delta = {} at delta {}", r.ratio, r.delta));
        }
    }
    if !table.monotone {
        violations.push("D is not monotone in delta".into());
    }
    if table.domain_truncated {
        println!("note: zero-frequency profile is not square integrable; results are for the truncated domain");
    }
    finish(violations)
}

pub fn verify(cfg: &RunConfig) -> Outcome {
    let report = run_suite(cfg.seed)?;
    for c in &report.checks {
        println!("{} {:<22} {:<48} {:>12.4e} {}", if c.passed { "PASS" } else { "FAIL" }, c.module, c.name, c.value, c.bound);
    }
    write(&cfg.out, "verify.json", &to_json(&report)?)?;
    finish(report.failures().map(|c| format!("{}: {}", c.module, c.name)).collect())
}
