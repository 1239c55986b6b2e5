use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use finsler::harness::{exit_code, run_suite, Format, RunConfig, WORKERS_ENV};

#[derive(Parser)]
#[command(name = "finsler", version, about = "Check conformal-change identities and classify Finsler structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-sided checks of the transformation formulas.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Comma-separated theorem ids, or `all`.
        #[arg(long)]
        theorems: Option<String>,
    },
    /// Membership tests for special classes.
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        predicates: Option<String>,
    },
    /// Whether properties transfer across the conformal change.
    Invariance {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        propositions: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON config; flags given here win over its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Metric spec file (repeatable).
    #[arg(long)]
    metric: Vec<PathBuf>,
    /// Conformal factor in `x1..xn` (repeatable).
    #[arg(long)]
    sigma: Vec<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["json", "markdown"])]
    format: Option<String>,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
}

impl Common {
    fn into_config(self) -> finsler::Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_json_file(p)?,
            None => RunConfig::default(),
        };
        if !self.metric.is_empty() {
            c.metrics = self.metric;
        }
        if !self.sigma.is_empty() {
            c.sigmas = self.sigma;
        }
        c.samples = self.samples.unwrap_or(c.samples);
        c.seed = self.seed.unwrap_or(c.seed);
        c.tol = self.tol.or(c.tol);
        c.out = self.out.or(c.out);
        c.workers = self.workers.or(c.workers);
        if let Some(f) = self.format {
            c.format = if f == "markdown" { Format::Markdown } else { Format::Json };
        }
        Ok(c)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match cli.command {
        Command::Verify { common, theorems } => common.into_config().map(|mut c| {
            if let Some(t) = theorems {
                c.theorems = vec![t];
            }
            c
        }),
        Command::Classify { common, predicates } => common.into_config().map(|mut c| {
            if let Some(p) = predicates {
                c.predicates = vec![p];
            }
            c
        }),
        Command::Invariance { common, propositions } => common.into_config().map(|mut c| {
            if let Some(p) = propositions {
                c.propositions = vec![p];
            }
            c
        }),
    };
    let result = config.and_then(|c| {
        let r = run_suite(&c)?;
        if c.out.is_none() {
            println!("{}", r.render(c.format));
        } else {
            eprint!("{}", r.to_markdown());
        }
        Ok(r)
    });
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(exit_code(&result) as u8)
}
