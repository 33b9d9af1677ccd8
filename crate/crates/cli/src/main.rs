use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use aspiro_cli::{
    cmd_exact, cmd_experiment_ref_iters, cmd_simulate, cmd_trace, cmd_validate, AspirationSource, CliError, EnvSource,
    RunConfig,
};
use aspiro_core::{CriterionWeights, Schedule, StepMode, Variant};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aspiro", version, about = "Aspiration-based planning in acyclic multi-criterion MDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an environment file.
    Validate {
        #[arg(long)]
        env: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run episodes and report the empirical mean Total.
    Simulate(PlanArgs),
    /// Exact expected Total by enumerating the planner's computation tree.
    Exact(PlanArgs),
    /// Write the step trace of episodes as JSON lines.
    Trace(PlanArgs),
    /// Reproduce experiments.
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Subcommand)]
enum Experiment {
    /// Iterations of the reference-policy search until the target is enclosed.
    RefIters {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        depth: u32,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct PlanArgs {
    /// Environment file or generator spec such as `binary-tree:depth=10,d=2,seed=0`.
    #[arg(long)]
    env: EnvSource,
    /// Aspiration file, `point:x1,x2,...`, or `box:lo1,...:hi1,...`.
    #[arg(long)]
    aspiration: AspirationSource,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "shrink")]
    variant: Variant,
    #[arg(long, default_value = "none")]
    schedule: Schedule,
    /// Per-step sampling: `sampled` candidates or the averaged `local` policy.
    #[arg(long, default_value = "sampled", value_parser = parse_mode)]
    mode: StepMode,
    #[arg(long)]
    episodes: Option<usize>,
    /// Candidate criteria as `name=weight,...` (hausdorff, variance, entropy, kl).
    #[arg(long)]
    criteria: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_mode(s: &str) -> Result<StepMode, String> {
    match s {
        "sampled" => Ok(StepMode::Sampled),
        "local" => Ok(StepMode::Local),
        other => Err(format!("unknown mode `{other}`")),
    }
}

impl PlanArgs {
    fn config(&self, default_episodes: usize) -> Result<(RunConfig, bool), CliError> {
        let criteria = match &self.criteria {
            Some(c) => Some(CriterionWeights::parse(c, self.beta).map_err(CliError::Usage)?),
            None => None,
        };
        let cfg = RunConfig {
            env: self.env.clone(),
            aspiration: self.aspiration.clone(),
            seed: self.seed,
            variant: self.variant,
            schedule: self.schedule,
            mode: self.mode,
            criteria,
            episodes: self.episodes.unwrap_or(default_episodes),
            trace_out: self.trace_out.clone(),
            threads: self.threads,
        };
        Ok((cfg, self.json))
    }
}

fn emit<T: serde::Serialize>(json: bool, value: &T, human: impl FnOnce(&T) -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
    } else {
        println!("{}", human(value));
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Validate { env, json } => {
            let report = cmd_validate(&env)?;
            emit(json, &report, |r| r.render());
            Ok(report.valid)
        }
        Command::Simulate(args) => {
            let (cfg, json) = args.config(1000)?;
            let report = cmd_simulate(&cfg)?;
            emit(json, &report, |r| r.render());
            Ok(cfg.episodes == 0 || report.consistent)
        }
        Command::Exact(args) => {
            let (cfg, json) = args.config(0)?;
            let report = cmd_exact(&cfg)?;
            emit(json, &report, |r| r.render());
            Ok(report.inside)
        }
        Command::Trace(args) => {
            let (cfg, _) = args.config(1)?;
            match &cfg.trace_out {
                Some(path) => {
                    let file = std::fs::File::create(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
                    let mut w = std::io::BufWriter::new(file);
                    cmd_trace(&cfg, &mut w)?;
                    w.flush().map_err(|source| CliError::Io { path: path.clone(), source })?;
                }
                None => {
                    let stdout = std::io::stdout();
                    let mut lock = stdout.lock();
                    cmd_trace(&cfg, &mut lock)?;
                }
            }
            Ok(true)
        }
        Command::Experiment(Experiment::RefIters { dims, depth, trials, seed, threads, json }) => {
            let table = cmd_experiment_ref_iters(&dims, depth, trials, seed, threads)?;
            emit(json, &table, |t| t.render());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
