use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cloudreg::experiment::{
    cmd_compare, cmd_decompose, cmd_gen_cloud, cmd_plot, cmd_simulate, cmd_stability, ExperimentConfig,
};
use cloudreg::{Error, Result};

#[derive(Parser)]
#[command(name = "cloudreg", version, about = "Cloud-model controller experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML) or the name of a bundled preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, env = "CLOUDREG_SEED")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "CLOUDREG_OUT")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Forward cloud drops and the reverse-cloud mean.
    GenCloud(Common),
    /// One closed-loop run.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write per-step inference rows (cloud controllers).
        #[arg(long)]
        trace: bool,
    },
    /// Certify the relay + local PD decomposition.
    Decompose(Common),
    /// Triangle, normal and LQ controllers with and without friction.
    Compare(Common),
    /// Positive-definiteness and Lyapunov residual report.
    Stability(Common),
    /// SVG line chart of a CSV written by another subcommand.
    Plot {
        /// CSV to draw.
        #[arg(long = "config", alias = "input")]
        csv: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "CLOUDREG_OUT")]
        out: Option<PathBuf>,
    },
}

struct Resolved {
    cfg: ExperimentConfig,
    seed: u64,
    out: PathBuf,
}

fn resolve(c: &Common, needs_config: bool) -> Result<Resolved> {
    let cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None if needs_config => return Err(Error::Config("--config is required".into())),
        None => ExperimentConfig::default(),
    };
    let seed = c.seed.unwrap_or(cfg.seed);
    let out = c.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    Ok(Resolved { cfg, seed, out })
}

fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::GenCloud(c) => {
            let r = resolve(&c, false)?;
            Ok(cmd_gen_cloud(&r.cfg, r.seed, &r.out)?.line())
        }
        Command::Simulate { common, trace } => {
            let r = resolve(&common, true)?;
            let a = cmd_simulate(&r.cfg, r.seed, &r.out, trace)?;
            Ok(format!(
                "settling_time = {:.3} s, steady_state_error = {:.3} %, chatter = {:.4}, wrote {}",
                a.metrics.settling_time,
                a.metrics.steady_state_error_pct,
                a.metrics.chatter_width,
                a.trajectory_csv.display()
            ))
        }
        Command::Decompose(c) => {
            let r = resolve(&c, true)?;
            let s = cmd_decompose(&r.cfg, &r.out)?;
            Ok(format!(
                "max residual {:e} over {} points (certified: {}), product form {:e}",
                s.max_residual, s.points, s.certified, s.max_product_form_residual
            ))
        }
        Command::Compare(c) => {
            let r = resolve(&c, true)?;
            let table = cmd_compare(&r.cfg, r.seed, &r.out)?;
            let failed = table.rows.iter().filter(|row| !row.ok).count();
            Ok(format!("{} runs, {failed} failed, wrote {}", table.rows.len(), r.out.join("compare.csv").display()))
        }
        Command::Stability(c) => {
            let r = resolve(&c, false)?;
            let rep = cmd_stability(&r.out)?;
            Ok(format!("all positive definite: {}", rep.all_positive_definite))
        }
        Command::Plot { csv, out, .. } => {
            let out = out.unwrap_or_else(|| PathBuf::from("out"));
            Ok(format!("wrote {}", cmd_plot(&csv, &out)?.display()))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}: {e}", e.kind());
            ExitCode::FAILURE
        }
    }
}
