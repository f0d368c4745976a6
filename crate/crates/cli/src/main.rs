//! `reprel` command-line front-end.
//!
//! Exit codes: 0 success, 1 input could not be parsed or validated,
//! 2 unknown subtask, 3 a verification check failed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use reprel::abstraction::relevant_closure;
use reprel::env::{ProblemInstance, TaxiEnv};
use reprel::exec::Execution;
use reprel::experiment::{parse_seeds, run_train, run_verify, ExperimentManifest};
use reprel::planner::{plan, OperatorSet};

#[derive(Parser)]
#[command(name = "reprel", version, about = "Relational planning and RL with derived state abstractions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the abstraction derived for a subtask.
    Abstract {
        dfoci: PathBuf,
        subtask: String,
        /// Stop the closure after this many sweeps.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Print the sub-task plan for an instance's start state.
    Plan {
        operators: PathBuf,
        instance: PathBuf,
        /// Seed for randomized placements.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train the manifest's variants and write learning curves.
    Train(TrainArgs),
    /// Train starting from tables saved by an earlier run.
    Transfer {
        #[command(flatten)]
        args: TrainArgs,
        /// Table directory from an earlier run (overrides the manifest's `load`).
        #[arg(long)]
        load: Option<PathBuf>,
    },
    /// Check soundness, factorization and value equivalence on the manifest's instance.
    Verify {
        manifest: PathBuf,
        /// Value-equivalence tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        depth: Option<usize>,
    },
}

#[derive(Args)]
struct TrainArgs {
    manifest: PathBuf,
    /// Run a single seed.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Seeds as `0,1,2` or `0..5`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    depth: Option<usize>,
    /// Output directory (overrides the manifest's `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run seeds one after another.
    #[arg(long)]
    sequential: bool,
}

enum Failure {
    Input(anyhow::Error),
    UnknownSubtask(anyhow::Error),
    Check,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<reprel::Error>() {
            Some(reprel::Error::UnknownSubtask(_)) => Failure::UnknownSubtask(e),
            _ => Failure::Input(e),
        }
    }
}

fn manifest(path: &Path) -> anyhow::Result<ExperimentManifest> {
    ExperimentManifest::load(path).with_context(|| format!("reading manifest {}", path.display()))
}

fn train_cmd(args: TrainArgs, load: Option<PathBuf>, require_load: bool) -> Result<(), Failure> {
    let mut m = manifest(&args.manifest)?;
    if let Some(s) = args.seed {
        m.train.seeds = vec![s];
    }
    if let Some(s) = &args.seeds {
        m.train.seeds = parse_seeds(s).map_err(anyhow::Error::from)?;
    }
    if args.depth.is_some() {
        m.depth = args.depth;
    }
    if let Some(out) = args.out {
        m.out = out;
    }
    if load.is_some() {
        m.load = load;
    }
    if require_load && m.load.is_none() {
        return Err(Failure::Input(anyhow::anyhow!("transfer needs `--load` or a `load` manifest key")));
    }
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let report = run_train(&m, exec).map_err(anyhow::Error::from)?;
    report
        .outputs
        .commit(&m.out)
        .map_err(anyhow::Error::from)?;
    for (label, outcome) in &report.outcomes {
        let steps: Vec<String> = outcome
            .runs
            .iter()
            .map(|r| r.steps_to_optimal.map_or("none".into(), |s| s.to_string()))
            .collect();
        println!(
            "{label} {} steps_to_optimal={} optimal_mean={:.6}",
            m.task,
            steps.join(","),
            outcome.optimal_mean
        );
    }
    println!("wrote {}", m.out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Abstract { dfoci, subtask, depth } => {
            let decl = reprel::dfoci::load_file(&dfoci).map_err(anyhow::Error::from)?;
            let schema = relevant_closure(&decl, &subtask, depth).map_err(anyhow::Error::from)?;
            print!("{}", schema.to_text());
        }
        Command::Plan { operators, instance, seed } => {
            let ops = OperatorSet::load(&operators).map_err(anyhow::Error::from)?;
            let inst = ProblemInstance::load(&instance).map_err(anyhow::Error::from)?;
            let env = TaxiEnv::new(inst, 0.99).map_err(anyhow::Error::from)?;
            let s = env.reset(seed);
            let p = plan(&env.planning_state(&s), &env.planning_goal(), &ops.operators, &env.objects())
                .map_err(anyhow::Error::from)?;
            print!("{p}");
        }
        Command::Train(args) => train_cmd(args, None, false)?,
        Command::Transfer { args, load } => train_cmd(args, load, true)?,
        Command::Verify { manifest: path, tol, depth } => {
            let mut m = manifest(&path)?;
            if depth.is_some() {
                m.depth = depth;
            }
            let report = run_verify(&m, tol).map_err(anyhow::Error::from)?;
            print!("{}", report.to_text());
            if !report.passed {
                return Err(Failure::Check);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::UnknownSubtask(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Check) => {
            eprintln!("verification failed");
            ExitCode::from(3)
        }
    }
}
