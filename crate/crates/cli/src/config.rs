//! Run configuration: a TOML or JSON file merged with command-line flags.

use crate::args::{Cli, Command, ProblemArgs};
use crate::failure::Failure;
use pointwave::evolution::{EvolutionConfig, Metric};
use pointwave::{Dim, InteractionParams};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Solve,
    Sweep,
    Decay,
    Evolve,
    Verify,
}

impl CommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Solve => "solve",
            CommandKind::Sweep => "sweep",
            CommandKind::Decay => "decay",
            CommandKind::Evolve => "evolve",
            CommandKind::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub dim: Option<u32>,
    pub alpha: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: Option<usize>,
    pub r_max: Option<f64>,
    pub grading: Option<f64>,
}

impl GridSection {
    pub fn is_empty(&self) -> bool {
        self.n.is_none() && self.r_max.is_none() && self.grading.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub metric: Option<Metric>,
    pub delta: Option<f64>,
    pub deltas: Option<Vec<f64>>,
    pub sponge: Option<f64>,
    pub lambda: Option<f64>,
    pub record_every: Option<usize>,
    pub solver_tol: Option<f64>,
}

/// On-disk layout. Every field is optional; flags fill or override them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<CommandKind>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub omega: Option<f64>,
    pub omegas: Option<Vec<f64>>,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub evolution: EvolutionSection,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
        let parsed = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).map_err(|e| e.to_string()),
            _ => toml::from_str(&text).map_err(|e| e.to_string()),
        };
        parsed.map_err(|e| Failure::config(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub params: Option<InteractionParams>,
    pub omega: Option<f64>,
    pub omegas: Vec<f64>,
    pub grid: GridSection,
    pub evolution: EvolutionConfig,
    /// Metric picked explicitly rather than by frequency.
    pub metric: Option<Metric>,
    pub deltas: Vec<f64>,
    pub out: PathBuf,
    pub seed: u64,
}

fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

fn params_from(section: &ParamsSection) -> Result<InteractionParams, Failure> {
    let dim = section.dim.ok_or_else(|| Failure::config("missing --dim"))?;
    let dim = Dim::try_from(dim).map_err(Failure::from_config)?;
    let p = section.p.ok_or_else(|| Failure::config("missing --p"))?;
    match section.alpha {
        Some(a) => InteractionParams::new(dim, a, p),
        None => InteractionParams::unit_bound_state(dim, p),
    }
    .map_err(Failure::from_config)
}

fn check_omega(params: &InteractionParams, omega: f64) -> Result<(), Failure> {
    let w = params.omega_alpha();
    if !(omega >= 0.0 && omega < w) {
        return Err(Failure::config(format!("omega = {omega} is out of range: need 0 <= omega < omega_alpha = {w}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, Failure> {
        let (kind, problem) = match &cli.command {
            Command::Solve(a) => (CommandKind::Solve, &a.problem),
            Command::Sweep(a) => (CommandKind::Sweep, &a.problem),
            Command::Decay(a) => (CommandKind::Decay, &a.problem),
            Command::Evolve(a) => (CommandKind::Evolve, &a.problem),
            Command::Verify(a) => (CommandKind::Verify, &a.problem),
        };
        let file = match &problem.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        if let Some(c) = file.command {
            if c != kind {
                return Err(Failure::config(format!("config file is for `{}`, not `{}`", c.as_str(), kind.as_str())));
            }
        }
        let merged = merge(&cli.command, problem, file);
        Self::resolve(kind, merged)
    }

    /// Validates a merged configuration.
    pub fn resolve(command: CommandKind, cfg: FileConfig) -> Result<Self, Failure> {
        let params = match command {
            CommandKind::Verify => None,
            _ => Some(params_from(&cfg.params)?),
        };
        let mut evolution = EvolutionConfig::default();
        let ev = &cfg.evolution;
        if let Some(p) = params {
            evolution.t_final = 30.0 / p.omega_alpha();
        }
        evolution.dt = ev.dt.unwrap_or(evolution.dt);
        evolution.t_final = ev.t_final.unwrap_or(evolution.t_final);
        evolution.delta = ev.delta.unwrap_or(0.0);
        evolution.sponge = ev.sponge.unwrap_or(evolution.sponge);
        evolution.lambda = ev.lambda.or(evolution.lambda);
        evolution.record_every = ev.record_every.unwrap_or(evolution.record_every);
        evolution.solver_tol = ev.solver_tol.unwrap_or(evolution.solver_tol);
        if let Some(m) = ev.metric {
            evolution.metric = m;
        }
        if !(evolution.dt > 0.0) {
            return Err(Failure::config(format!("dt must be positive, got {}", evolution.dt)));
        }
        evolution.validate().map_err(Failure::from_config)?;
        let deltas = ev.deltas.clone().unwrap_or_else(|| vec![evolution.delta]);
        if deltas.is_empty() || deltas.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(Failure::config("deltas must be a nonempty list of nonnegative numbers"));
        }

        let omegas = cfg.omegas.clone().unwrap_or_default();
        match (command, params) {
            (CommandKind::Solve | CommandKind::Evolve, Some(p)) => {
                let w = cfg.omega.ok_or_else(|| Failure::config("missing --omega"))?;
                check_omega(&p, w)?;
            }
            (CommandKind::Sweep, Some(p)) => {
                if omegas.is_empty() {
                    return Err(Failure::config("empty omega range"));
                }
                for &w in &omegas {
                    check_omega(&p, w)?;
                }
            }
            (CommandKind::Decay, _) => {
                if cfg.omega.is_some_and(|w| w != 0.0) {
                    return Err(Failure::config("decay analysis runs at omega = 0"));
                }
                if !cfg.grid.is_empty() {
                    return Err(Failure::config("decay uses its own long-range grid; grid overrides are not accepted"));
                }
            }
            _ => {}
        }
        if let Some(n) = cfg.grid.n {
            if n < 16 {
                return Err(Failure::config(format!("grid needs at least 16 cells, got {n}")));
            }
        }
        let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
        ensure_writable(&out)?;
        Ok(RunConfig {
            command,
            params,
            omega: cfg.omega,
            omegas,
            grid: cfg.grid.clone(),
            metric: ev.metric,
            evolution,
            deltas,
            out,
            seed: cfg.seed.unwrap_or(0),
        })
    }

    /// The configuration as a file that reproduces this run.
    pub fn to_file(&self) -> FileConfig {
        let ev = &self.evolution;
        let evolution = match self.command {
            CommandKind::Evolve => EvolutionSection {
                dt: Some(ev.dt),
                t_final: Some(ev.t_final),
                metric: self.metric,
                delta: Some(ev.delta),
                deltas: Some(self.deltas.clone()),
                sponge: Some(ev.sponge),
                lambda: ev.lambda,
                record_every: Some(ev.record_every),
                solver_tol: Some(ev.solver_tol),
            },
            _ => EvolutionSection::default(),
        };
        FileConfig {
            command: Some(self.command),
            seed: Some(self.seed),
            out: Some(self.out.clone()),
            omega: self.omega,
            omegas: (!self.omegas.is_empty()).then(|| self.omegas.clone()),
            params: match self.params {
                Some(p) => ParamsSection { dim: Some(p.dim().as_u32()), alpha: Some(p.alpha()), p: Some(p.p()) },
                None => ParamsSection::default(),
            },
            grid: self.grid.clone(),
            evolution,
        }
    }

    pub fn params(&self) -> InteractionParams {
        self.params.expect("validated for this command")
    }
}

fn ensure_writable(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::config(format!("cannot create output directory {}: {e}", dir.display())))?;
    let probe = dir.join(".pointwave-write-check");
    std::fs::write(&probe, b"").map_err(|e| Failure::config(format!("output directory {} is not writable: {e}", dir.display())))?;
    let _ = std::fs::remove_file(probe);
    Ok(())
}

fn merge(command: &Command, problem: &ProblemArgs, mut file: FileConfig) -> FileConfig {
    file.seed = pick(problem.seed, file.seed);
    file.out = pick(problem.out.clone(), file.out);
    file.params.dim = pick(problem.dim, file.params.dim);
    file.params.alpha = pick(problem.alpha, file.params.alpha);
    file.params.p = pick(problem.p, file.params.p);
    file.grid.n = pick(problem.n, file.grid.n);
    file.grid.r_max = pick(problem.r_max, file.grid.r_max);
    file.grid.grading = pick(problem.grading, file.grid.grading);
    match command {
        Command::Solve(a) => file.omega = pick(a.omega, file.omega),
        Command::Decay(a) => file.omega = pick(a.omega, file.omega),
        Command::Sweep(a) => {
            if let Some(w) = &a.omegas {
                file.omegas = Some(w.clone());
            }
        }
        Command::Evolve(a) => {
            file.omega = pick(a.omega, file.omega);
            let ev = &mut file.evolution;
            ev.dt = pick(a.dt, ev.dt);
            ev.t_final = pick(a.t_final, ev.t_final);
            ev.metric = pick(a.metric, ev.metric);
            ev.delta = pick(a.delta, ev.delta);
            if let Some(d) = &a.deltas {
                ev.deltas = Some(d.clone());
            }
            ev.sponge = pick(a.sponge, ev.sponge);
            ev.lambda = pick(a.lambda, ev.lambda);
            ev.record_every = pick(a.record_every, ev.record_every);
            ev.solver_tol = pick(a.solver_tol, ev.solver_tol);
        }
        Command::Verify(_) => {}
    }
    file
}
