use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use retrial::cli::{cmd_asym, cmd_compare, cmd_pmf, cmd_simulate, cmd_validate, VALIDATION_FAILURE};
use retrial::config::{parse_family_spec, parse_mu, ExperimentConfig};
use retrial::{Error, Result};

/// Queue-length tails of the M/G/1 retrial queue with heavy-tailed service.
///
/// Model defaults: family=burr:b=2,v=3,w=1 lambda=0.5 mu=1. A config file
/// holds the same keys as `key=value` text, or is JSON, or is a CSV whose
/// first line is a `# manifest:` line written by this tool. Flags override
/// the file.
#[derive(Parser)]
#[command(name = "retrial", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-term expansion table: j, first_order, second_order, delta.
    Asym(Flags),
    /// Exact pmf, cdf and tail of L_mu, L_infinity or R_mu from the series engine.
    Pmf(Flags),
    /// Discrete-event simulation: state, pmf, half_width of L_mu plus a JSON run manifest.
    Simulate(Flags),
    /// Relative errors of the expansions against the exact tail.
    Compare(Flags),
    /// Run the acceptance suite; exits 4 if any criterion fails.
    Validate,
}

#[derive(Args)]
struct Flags {
    /// key=value, JSON or manifest-bearing CSV file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Service family, e.g. burr:b=2,v=3,w=1, hall_weiss:v=3,w=-1,
    /// student_t:v=4, exponential:nu=1.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Retrial rate, or `inf` for the standard M/G/1 queue.
    #[arg(long)]
    mu: Option<String>,
    /// Series truncation order.
    #[arg(long)]
    order: Option<usize>,
    /// Total simulated time, warm-up included.
    #[arg(long)]
    horizon: Option<f64>,
    /// Warm-up time (default: 10% of the horizon).
    #[arg(long)]
    warmup: Option<f64>,
    #[arg(long)]
    batches: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Largest index in tables; the log-spaced j grid ends here.
    #[arg(long)]
    jmax: Option<usize>,
    /// Explicit j grid, comma separated.
    #[arg(long)]
    j: Option<String>,
    /// l_mu, l_infinity or r_mu.
    #[arg(long)]
    law: Option<String>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Flags {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::parse(&std::fs::read_to_string(path)?)?,
            None => ExperimentConfig::default(),
        };
        if let Some(f) = &self.family {
            cfg.family = parse_family_spec(f)?;
        }
        if let Some(mu) = &self.mu {
            cfg.mu = parse_mu(mu)?;
        }
        let text = [
            ("lambda", self.lambda.map(|v| v.to_string())),
            ("order", self.order.map(|v| v.to_string())),
            ("horizon", self.horizon.map(|v| v.to_string())),
            ("warmup", self.warmup.map(|v| v.to_string())),
            ("batches", self.batches.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("jmax", self.jmax.map(|v| v.to_string())),
            ("j", self.j.clone()),
            ("law", self.law.clone()),
        ];
        for (key, value) in text {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn sink(cfg: &ExperimentConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Asym(f) => {
            let cfg = f.resolve()?;
            let mut out = sink(&cfg)?;
            cmd_asym(&cfg, &mut out)?;
            out.flush()?;
        }
        Command::Pmf(f) => {
            let cfg = f.resolve()?;
            let mut out = sink(&cfg)?;
            cmd_pmf(&cfg, &mut out)?;
            out.flush()?;
        }
        Command::Simulate(f) => {
            let cfg = f.resolve()?;
            let mut out = sink(&cfg)?;
            let summary = cmd_simulate(&cfg, &mut out)?;
            out.flush()?;
            let json = serde_json::to_string_pretty(&summary)?;
            match &cfg.out {
                Some(path) => std::fs::write(path.with_extension("json"), json + "\n")?,
                None => eprintln!("{json}"),
            }
        }
        Command::Compare(f) => {
            let cfg = f.resolve()?;
            let mut out = sink(&cfg)?;
            cmd_compare(&cfg, &mut out)?;
            out.flush()?;
        }
        Command::Validate => {
            let results = cmd_validate(io::stdout().lock())?;
            if results.iter().any(|r| !r.passed) {
                return Ok(VALIDATION_FAILURE);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::UnstableModel { .. } = e {
                eprintln!("the retrial queue is stationary only under the traffic condition rho = lambda * beta1 < 1");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
