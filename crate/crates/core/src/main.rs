use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rcpe::baselines::DescentConfig;
use rcpe::harness::{
    export_descent_csv, export_records_csv, export_sweep_csv, filter_sign_sweep, permutation_sweep,
    run_baseline, run_closed_loop, write_descent, write_records, write_sweep, ExperimentConfig,
    Plant, SweepReport,
};
use rcpe::Error;

#[derive(Parser)]
#[command(
    name = "rcpe",
    version,
    about = "Retrospective-cost parameter estimation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single closed-loop run; writes one CSV row per step.
    Run(Common),
    /// One run per permutation of the parameter indices.
    SweepPerms(Common),
    /// The 48 filter coefficient and sign combinations (three parameters only).
    SweepFilters(Common),
    /// Finite-difference gradient descent on the batch output cost.
    Baseline {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-2)]
        gamma: f64,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        /// Relative finite-difference step.
        #[arg(long, default_value_t = 1e-6)]
        delta: f64,
    },
}

#[derive(Args)]
struct Common {
    /// `low_order` or `burgers`; overrides the config file.
    #[arg(long)]
    plant: Option<Plant>,
    /// TOML file; keys not set there keep the plant defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Reserved; every experiment is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Override a config key, e.g. `--set lambda=0.999 --set permutation=[1,2,3]`.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_override)]
    overrides: Vec<(String, String)>,
}

fn parse_override(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))
}

impl Common {
    fn load(&self) -> rcpe::Result<ExperimentConfig> {
        let mut overrides: Vec<_> = self
            .plant
            .map(|p| ("plant".to_string(), format!("\"{}\"", plant_name(p))))
            .into_iter()
            .collect();
        overrides.extend(self.overrides.iter().cloned());
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_toml_file(path, &overrides)?,
            None => ExperimentConfig::from_toml_str("", &overrides)?,
        };
        if let Some(h) = self.horizon {
            cfg.horizon = h;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn plant_name(p: Plant) -> &'static str {
    match p {
        Plant::LowOrder => "low_order",
        Plant::Burgers => "burgers",
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidPermutation(..) | Error::DimensionMismatch { .. } | Error::Config(_) => 2,
        Error::Io { .. } => 1,
        _ => 3,
    }
}

fn stdout_err(e: csv::Error) -> Error {
    Error::Io {
        path: "<stdout>".into(),
        message: e.to_string(),
    }
}

fn report_sweep(cfg: &ExperimentConfig, report: &SweepReport) -> rcpe::Result<()> {
    for c in &report.cases {
        eprintln!(
            "{:<16} {:<10} final |mu_hat - mu| = {:.3e}",
            c.case_id,
            c.verdict.as_str(),
            c.final_muerr
        );
    }
    match &cfg.out {
        Some(path) => export_sweep_csv(path, report),
        None => write_sweep(std::io::stdout().lock(), report).map_err(stdout_err),
    }
}

fn execute(cli: Cli) -> rcpe::Result<()> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.load()?;
            let outcome = run_closed_loop(&cfg)?;
            let dims = (cfg.rcpe.l_y(), cfg.rcpe.l_mu(), cfg.rcpe.l_theta());
            match &cfg.out {
                Some(path) => export_records_csv(path, &outcome.records, dims)?,
                None => write_records(std::io::stdout().lock(), &outcome.records, dims)
                    .map_err(stdout_err)?,
            }
            match (outcome.diverge_step, &outcome.failure) {
                (Some(k), Some(e)) => eprintln!("halted at step {k}: {e}"),
                (Some(k), None) => eprintln!("halted at step {k}: output error exceeded z_max"),
                _ => eprintln!("final |mu_hat - mu| = {:.6e}", outcome.final_muerr()),
            }
            Ok(())
        }
        Command::SweepPerms(common) => {
            let cfg = common.load()?;
            report_sweep(&cfg, &permutation_sweep(&cfg)?)
        }
        Command::SweepFilters(common) => {
            let cfg = common.load()?;
            report_sweep(&cfg, &filter_sign_sweep(&cfg)?)
        }
        Command::Baseline {
            common,
            gamma,
            iters,
            delta,
        } => {
            let cfg = common.load()?;
            let descent = DescentConfig {
                gamma,
                max_iters: iters,
                delta,
                ..DescentConfig::default()
            };
            let traj = run_baseline(&cfg, &descent)?;
            match &cfg.out {
                Some(path) => export_descent_csv(path, &traj, &cfg.mu_true)?,
                None => write_descent(std::io::stdout().lock(), &traj, &cfg.mu_true)
                    .map_err(stdout_err)?,
            }
            if let Some(e) = traj.aborted {
                return Err(e);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => {
            let _ = std::io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
