use clap::{Parser, Subcommand};
use cloakbench::config::{self, Experiment};
use cloakbench::{output, run};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_FIT: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "cloakbench", version, about = "Run near-cloaking experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration without solving anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
        /// Experiment to validate against when the file does not name one.
        #[arg(long, value_enum)]
        experiment: Option<Experiment>,
    },
    #[command(flatten)]
    Run(RunCommand),
}

#[derive(Subcommand)]
enum RunCommand {
    /// Rate of the boundary gap as rho shrinks.
    Convergence(RunArgs),
    /// Conormal norm across regularization exponents.
    DeltaSweep(RunArgs),
    /// Gap to the sound-hard annulus as rho shrinks.
    Theorem61(RunArgs),
    /// Small-inclusion gap ratio as tau shrinks.
    Lemma42(RunArgs),
    /// Physical material coefficients along a radius.
    MaterialMap(RunArgs),
    /// Energy balance in the lossy layer.
    AbsorptionCheck(RunArgs),
    /// Single solve with per-mode diagnostics.
    Solve(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output prefix; files are written as `<prefix>_samples.csv` and so on.
    #[arg(long)]
    out: Option<String>,
    /// Worker threads for sweep points.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
    /// Also write a gnuplot script.
    #[arg(long)]
    emit_plot: bool,
}

impl RunCommand {
    fn split(self) -> (Experiment, RunArgs) {
        match self {
            RunCommand::Convergence(a) => (Experiment::Convergence, a),
            RunCommand::DeltaSweep(a) => (Experiment::DeltaSweep, a),
            RunCommand::Theorem61(a) => (Experiment::Theorem61, a),
            RunCommand::Lemma42(a) => (Experiment::Lemma42, a),
            RunCommand::MaterialMap(a) => (Experiment::MaterialMap, a),
            RunCommand::AbsorptionCheck(a) => (Experiment::AbsorptionCheck, a),
            RunCommand::Solve(a) => (Experiment::Solve, a),
        }
    }
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("config error: {msg}");
    ExitCode::from(EXIT_CONFIG)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Validate { config, experiment } => {
            let plan = config::load(&config).and_then(|c| c.plan(experiment, None, false));
            match plan {
                Ok(p) => {
                    println!("{}: ok ({} points)", p.experiment.name(), p.points.len());
                    ExitCode::SUCCESS
                }
                Err(e) => config_error(e),
            }
        }
        Command::Run(cmd) => {
            let (experiment, args) = cmd.split();
            let plan = match config::load(&args.config)
                .and_then(|c| c.plan(Some(experiment), args.out.as_deref(), args.emit_plot))
            {
                Ok(p) => p,
                Err(e) => return config_error(e),
            };
            let pool = match rayon::ThreadPoolBuilder::new()
                .num_threads(args.jobs.into())
                .build()
            {
                Ok(p) => p,
                Err(e) => return config_error(e),
            };
            let report = match pool.install(|| run::run(&plan)) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(EXIT_NUMERICAL);
                }
            };
            let files = output::files(&report, &plan.prefix, plan.emit_plot);
            if let Err(e) = output::write_all(&files) {
                eprintln!("write failed: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
            for (path, _) in &files {
                println!("wrote {}", path.display());
            }
            println!("{}: {}", experiment.name(), report.summary);
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FIT)
            }
        }
    }
}
