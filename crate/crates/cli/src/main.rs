use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hybrid_mec::harness::csv_io::{load_runs, write_results, write_summary};
use hybrid_mec::harness::{aggregate, run_experiment, sweep, ExperimentConfig, RunResult, SummaryRow, SweepParam};
use hybrid_mec::{Error, Result};

/// Hybrid backscatter/active offloading experiments.
#[derive(Parser, Debug)]
#[command(name = "hmec", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train and evaluate one agent over the configured seeds.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Run only this seed instead of the configured list.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the `agent` key.
        #[arg(long)]
        agent: Option<String>,
        /// Overrides the `output_dir` key.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat training over several values of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// `ambient_mean_density` or `K`.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Use seeds 0..N instead of the configured list.
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild a summary CSV from the per-run files of earlier runs.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        window: usize,
    },
}

fn load_config(path: &Path, agent: Option<&str>, out: Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(name) = agent {
        cfg.set("agent", name)?;
    }
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn finish(cfg: &ExperimentConfig, results: &[RunResult]) -> Result<()> {
    let agg = aggregate(results, cfg.smoothing_window)?;
    cfg.echo(&cfg.output_dir)?;
    write_results(results, &agg, &cfg.output_dir)?;
    print_summary(&agg.summary);
    println!("wrote {} runs to {}", results.len(), cfg.output_dir.display());
    Ok(())
}

fn print_summary(rows: &[SummaryRow]) {
    println!(
        "{:<36} {:>10} {:>9} {:>8} {:>7} {:>7} {:>7}",
        "config", "reward", "std", "outage", "active", "passive", "local"
    );
    for r in rows {
        println!(
            "{:<36} {:>10.4} {:>9.4} {:>8.3} {:>7.3} {:>7.3} {:>7.3}",
            r.config_id, r.mean_reward, r.std_reward, r.outage_rate, r.frac_active, r.frac_passive, r.frac_local
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            config,
            seed,
            agent,
            out,
        } => {
            let mut cfg = load_config(&config, agent.as_deref(), out)?;
            if let Some(s) = seed {
                cfg.seeds = vec![s];
            }
            let results = cfg
                .seeds
                .iter()
                .map(|&s| {
                    eprintln!("{} seed {s}", cfg.agent);
                    run_experiment(&cfg, s)
                })
                .collect::<Result<Vec<_>>>()?;
            finish(&cfg, &results)
        }
        Command::Sweep {
            config,
            param,
            values,
            seeds,
            out,
        } => {
            let mut cfg = load_config(&config, None, out)?;
            if let Some(n) = seeds {
                if n == 0 {
                    return Err(Error::config("seeds", "need at least one seed"));
                }
                cfg.seeds = (0..n).collect();
            }
            let param = SweepParam::from_name(&param)?;
            eprintln!(
                "{}: {} values x {} seeds of {}",
                cfg.agent,
                values.len(),
                cfg.seeds.len(),
                param.name()
            );
            let results = sweep(&cfg, param, &values)?;
            finish(&cfg, &results)
        }
        Command::Report { input, out, window } => {
            let results = load_runs(&input)?;
            let agg = aggregate(&results, window)?;
            write_summary(&agg.summary, &out)?;
            print_summary(&agg.summary);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hmec: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn sweep_values_split_on_commas() {
        let cli = Cli::try_parse_from([
            "hmec", "sweep", "--config", "c.conf", "--param", "K", "--values", "1,2,4",
        ])
        .unwrap();
        match cli.command {
            Command::Sweep { values, .. } => assert_eq!(values, vec![1.0, 2.0, 4.0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn agent_override_is_validated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        std::fs::write(&path, "training_slots = 10\n").unwrap();
        assert!(load_config(&path, Some("hybrid_dqn"), None).is_ok());
        assert!(load_config(&path, Some("oracle"), None).is_err());
    }
}
