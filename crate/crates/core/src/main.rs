use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use frugal_rl::agents::AgentKind;
use frugal_rl::environments::{ChainParams, EnvName};
use frugal_rl::harness::{self, RunConfig, TraceOptions};
use frugal_rl::oracle::{sweep_intrinsic, ChainInstance, OracleSolver};
use frugal_rl::{Error, Result};

#[derive(Parser)]
#[command(name = "frugal-rl", version, about = "Measurement-cost-aware reinforcement learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one agent per seed and write CSV logs, checkpoints and a summary.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Extra `key=value` overrides applied after the config file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Recompute summary.csv for a run directory.
    Summarize { dir: PathBuf },
    /// Export per-episode measurement traces of a saved greedy policy.
    Traces {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        env: String,
        #[arg(long, default_value_t = 5)]
        episodes: usize,
        #[arg(long, default_value = "traces")]
        out: PathBuf,
        /// Bonus for unmeasured steps used in the logged rewards.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Solve a chain instance exactly; a comma-separated `--c` sweeps the bonus.
    Oracle {
        #[arg(long)]
        env: String,
        #[arg(long, default_value = "dmsoa")]
        agent: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        c: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long = "K", default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        memory_window: usize,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        chain_reward: f64,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Write bucketed mean/std learning curves for a run directory.
    Curves {
        dir: PathBuf,
        #[arg(long, default_value_t = 100)]
        buckets: usize,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { config, out, seeds, overrides } => {
            let mut cfg = RunConfig::from_file(&config)?;
            for o in &overrides {
                let (k, v) = o
                    .split_once('=')
                    .ok_or_else(|| Error::Config { key: o.clone(), message: "expected KEY=VALUE".into() })?;
                cfg.set(k.trim(), v.trim())?;
            }
            if let Some(out) = out {
                cfg.out = out;
            }
            if let Some(seeds) = seeds {
                cfg.seeds = seeds;
            }
            let run = harness::run_experiment(&cfg)?;
            let summary = harness::summarize(&run.dir)?;
            let pooled = summary.last().expect("summary has a pooled row");
            println!(
                "{}: mean costed return {:.3}, mean length {:.1}, ratio {}",
                run.dir.display(),
                pooled.mean_costed_return,
                pooled.mean_length,
                harness::ratio_label(pooled.ratio)
            );
        }
        Command::Summarize { dir } => {
            for r in harness::summarize(&dir)? {
                let scope = r.seed.map_or("pooled".to_string(), |s| format!("seed {s}"));
                println!(
                    "{scope}: return {:.3} ± {:.3}, length {:.1} ± {:.1}, ratio {}",
                    r.mean_costed_return,
                    r.std_costed_return,
                    r.mean_length,
                    r.std_length,
                    harness::ratio_label(r.ratio)
                );
            }
        }
        Command::Traces { checkpoint, env, episodes, out, c, seed } => {
            let opts = TraceOptions { bonus: c, out_dir: out, seed, ..TraceOptions::default() };
            let traces = harness::export_traces(&checkpoint, &env, episodes, &opts)?;
            println!("wrote {} traces to {}", traces.len(), opts.out_dir.display());
        }
        Command::Oracle { env, agent, c, gamma, k, memory_window, chain_reward, horizon } => {
            let EnvName::Chain(n) = env.parse::<EnvName>()? else {
                return Err(Error::UnknownEnv(format!("{env} (the oracle supports chain:N only)")));
            };
            let mut params = ChainParams::new(n);
            params.reward = chain_reward;
            if let Some(h) = horizon {
                params.max_episode_steps = h;
            }
            let solver = match agent.parse::<AgentKind>()? {
                AgentKind::Dmsoa => OracleSolver::Dmsoa { max_repeat: k },
                AgentKind::Osmboa => OracleSolver::Osmboa { memory_window },
            };
            let inst = ChainInstance::new(params, 0.0, gamma);
            let report = sweep_intrinsic(solver, &inst, &c)?;
            println!("instance,c,gamma,K,optimal_return,ratio");
            for row in &report.rows {
                println!("{env},{},{gamma},{k},{},{}", row.bonus, row.optimal_return, row.ratio);
            }
            if report.rows.len() > 1 {
                eprintln!("ratio non-decreasing in c: {}", report.ratio_monotone);
            }
        }
        Command::Curves { dir, buckets } => {
            let rows = harness::emit_curves(&dir, buckets)?;
            println!("wrote {} rows to {}", rows.len(), dir.join("curves.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
