mod args;
mod commands;
mod config;
mod failure;

use args::Cli;
use clap::Parser;
use config::{CommandKind, RunConfig};
use failure::{Failure, EXIT_CONFIG, EXIT_OK};
use pointwave::io::to_json;

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = RunConfig::from_cli(cli)?;
    std::fs::write(cfg.out.join("run.json"), to_json(&cfg.to_file())?)?;
    match cfg.command {
        CommandKind::Solve => commands::solve(&cfg),
        CommandKind::Sweep => commands::sweep(&cfg),
        CommandKind::Decay => commands::decay(&cfg),
        CommandKind::Evolve => commands::evolve_cmd(&cfg),
        CommandKind::Verify => commands::verify(&cfg),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            std::process::exit(EXIT_OK);
        }
        Err(e) => {
            let f = Failure::config(e.render().to_string().trim_end().to_string());
            eprintln!("{}", f.to_json());
            std::process::exit(EXIT_CONFIG);
        }
    };
    if let Err(f) = run(&cli) {
        eprintln!("{}", f.to_json());
        std::process::exit(f.exit_code());
    }
}
