use std::path::PathBuf;
use std::process::ExitCode;

use bench_cli::{
    bench, check_budget, diag, eval, eval_dir, train, CliError, EvalRequest, ExperimentSpec,
    PolicyName, ResultRow,
};
use clap::{Parser, Subcommand, ValueEnum};
use core_bamdp::{exec::init_thread_pool, Exec};

#[derive(Parser)]
#[command(
    name = "bcpace",
    version,
    about = "Train, evaluate and diagnose B-CPACE on benchmark BAMDPs"
)]
struct Cli {
    /// Experiment spec (TOML). `bench` accepts several.
    #[arg(long, global = true)]
    config: Vec<PathBuf>,
    /// Replace the spec's seed list with this single seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the spec.
    #[arg(long, global = true, env = "BCPACE_OUT")]
    out: Option<PathBuf>,
    /// Worker threads for the parallel paths.
    #[arg(long, global = true, env = "BCPACE_THREADS")]
    threads: Option<usize>,
    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Bcpace,
    Qmdp,
    Oracle,
}

impl From<PolicyArg> for PolicyName {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Bcpace => PolicyName::Bcpace,
            PolicyArg::Qmdp => PolicyName::Qmdp,
            PolicyArg::Oracle => PolicyName::Oracle,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train one estimate per seed and write artifacts and training logs.
    Train,
    /// Roll out frozen policies; defaults to B-CPACE plus the spec's baselines.
    Eval {
        #[arg(long, value_enum)]
        policy: Vec<PolicyArg>,
        /// Evaluate this artifact for every seed instead of the stored ones.
        #[arg(long)]
        artifact: Option<PathBuf>,
    },
    /// Train and evaluate every spec, writing one combined table.
    Bench,
    /// Cover estimate, sample-complexity bound and property checks as JSON.
    Diag {
        #[arg(long)]
        artifact: Option<PathBuf>,
    },
}

fn load_specs(cli: &Cli) -> Result<Vec<ExperimentSpec>, CliError> {
    if cli.config.is_empty() {
        return Err(CliError::Config("--config is required".into()));
    }
    cli.config
        .iter()
        .map(|p| Ok(ExperimentSpec::load(p)?.with_overrides(cli.seed, cli.out.clone())))
        .collect()
}

fn single_spec(cli: &Cli) -> Result<ExperimentSpec, CliError> {
    let mut specs = load_specs(cli)?;
    if specs.len() != 1 {
        return Err(CliError::Config(
            "this command takes exactly one --config".into(),
        ));
    }
    Ok(specs.remove(0))
}

fn print_rows(rows: &[ResultRow]) {
    for r in rows {
        println!(
            "{:<16} {:<8} seed {:<4} mean {:>10.4} ± {:<8.4} discounted {:>10.4} ± {:<8.4} samples {}",
            r.environment, r.policy, r.seed, r.mean, r.stderr, r.mean_discounted, r.stderr_discounted, r.samples
        );
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    if let Some(threads) = cli.threads {
        init_thread_pool(threads);
    }
    match &cli.command {
        Command::Train => {
            let spec = single_spec(cli)?;
            let summaries = train(&spec, exec)?;
            for s in &summaries {
                println!(
                    "{} seed {}: {} episodes, {} samples, terminated {} -> {}",
                    s.environment,
                    s.seed,
                    s.episodes,
                    s.samples,
                    s.terminated,
                    s.artifact.display()
                );
            }
            check_budget(&summaries)
        }
        Command::Eval { policy, artifact } => {
            let spec = single_spec(cli)?;
            let policies = if policy.is_empty() {
                std::iter::once(PolicyName::Bcpace)
                    .chain(spec.eval.baselines.iter().copied())
                    .collect()
            } else {
                policy.iter().map(|&p| p.into()).collect()
            };
            let request = EvalRequest {
                policies,
                artifact: artifact.clone(),
                train_seconds: Vec::new(),
            };
            let report = eval(&spec, &request, exec)?;
            report.write(&eval_dir(&spec))?;
            print_rows(&report.rows);
            Ok(())
        }
        Command::Bench => {
            let specs = load_specs(cli)?;
            let report = bench(&specs, exec)?;
            let dir = cli
                .out
                .clone()
                .unwrap_or_else(|| specs[0].output.dir.clone())
                .join("bench");
            report.eval.write(&dir)?;
            print_rows(&report.eval.rows);
            check_budget(&report.train)
        }
        Command::Diag { artifact } => {
            let spec = single_spec(cli)?;
            let reports = diag(&spec, artifact.as_deref(), exec)?;
            println!("{}", serde_json::to_string_pretty(&reports)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
