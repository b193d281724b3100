use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use critfpp::experiments::{parse_kv, run, ExperimentReport, ExperimentSpec, Format};
use critfpp::Error;

/// Critical first-passage percolation experiments.
#[derive(Parser)]
#[command(name = "critfpp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustive and seeded identity checks.
    Verify {
        /// prop-equality, bijection or shape-identity
        suite: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Monte Carlo moments of passage times.
    Estimate {
        /// cn, b0n, t0nu or tprime
        #[arg(long)]
        quantity: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Loop-ensemble radius increments: mgf, density-check, renewal or constants.
    Cle {
        action: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Empirical tails with log-linear fits.
    Tails {
        /// sx, mj or tprime
        #[arg(long)]
        stat: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Wet-region hulls and their cluster-loop counterparts.
    Shape {
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Args, Default)]
struct Opts {
    /// `key = value` file; flags given here take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated distances or circuit indices
    #[arg(long, value_name = "LIST")]
    n: Option<String>,
    /// Inner annulus radius
    #[arg(long)]
    r: Option<String>,
    /// Outer annulus radius
    #[arg(long = "R", id = "big_r")]
    big_r: Option<String>,
    /// Replicas
    #[arg(long)]
    reps: Option<String>,
    /// Master seed
    #[arg(long)]
    seed: Option<String>,
    /// Worker threads (also CRITFPP_THREADS)
    #[arg(long)]
    threads: Option<String>,
    /// Search window as a multiple of n
    #[arg(long)]
    window_factor: Option<String>,
    /// Enumerate every coloring instead of sampling
    #[arg(long)]
    exhaustive: bool,
    /// Renewal time
    #[arg(long)]
    t: Option<String>,
    /// Inner radius for the loop-count bracket
    #[arg(long)]
    epsilon: Option<String>,
    /// MGF arguments
    #[arg(long, allow_hyphen_values = true, value_name = "LIST")]
    lambda: Option<String>,
    /// Dyadic scales for S_x
    #[arg(long, value_name = "LIST")]
    x: Option<String>,
    /// Starting dyadic levels for m(j)
    #[arg(long, value_name = "LIST")]
    j: Option<String>,
    /// Levels scanned past j before censoring
    #[arg(long)]
    cap: Option<String>,
    /// Direction of the point target
    #[arg(long, allow_hyphen_values = true, value_name = "UX,UY")]
    direction: Option<String>,
    /// Starting window radius for shape runs
    #[arg(long)]
    window: Option<String>,
    /// Largest window radius for shape runs
    #[arg(long)]
    max_window: Option<String>,
    /// Write the report here (CSV gets a .manifest.json sidecar)
    #[arg(long)]
    output: Option<String>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
}

impl Opts {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let fields: [(&'static str, &Option<String>); 18] = [
            ("n", &self.n),
            ("r", &self.r),
            ("R", &self.big_r),
            ("reps", &self.reps),
            ("seed", &self.seed),
            ("threads", &self.threads),
            ("window_factor", &self.window_factor),
            ("t", &self.t),
            ("epsilon", &self.epsilon),
            ("lambda", &self.lambda),
            ("x", &self.x),
            ("j", &self.j),
            ("cap", &self.cap),
            ("direction", &self.direction),
            ("window", &self.window),
            ("max_window", &self.max_window),
            ("output", &self.output),
            ("format", &self.format),
        ];
        for (k, val) in fields {
            if let Some(s) = val {
                v.push((k, s.clone()));
            }
        }
        if self.exhaustive {
            v.push(("exhaustive", "true".into()));
        }
        v
    }
}

fn build_spec(cli: Cli) -> Result<ExperimentSpec, Error> {
    let (command, target, opts) = match cli.command {
        Command::Verify { suite, opts } => ("verify", suite, opts),
        Command::Estimate { quantity, opts } => ("estimate", quantity, opts),
        Command::Cle { action, opts } => ("cle", action, opts),
        Command::Tails { stat, opts } => ("tails", stat, opts),
        Command::Shape { opts } => ("shape", String::new(), opts),
    };
    let mut spec = ExperimentSpec::new(command, &target);
    if let Some(path) = &opts.config {
        let text = std::fs::read_to_string(path)?;
        for (k, v) in parse_kv(&text)? {
            if k == "command" || k == "target" {
                continue;
            }
            spec.set(&k, &v)?;
        }
    }
    for (k, v) in opts.pairs() {
        spec.set(k, &v)?;
    }
    Ok(spec)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidSpec { .. }
        | Error::InvalidArgument(_)
        | Error::InvalidAnnulus { .. }
        | Error::Parse { .. }
        | Error::DomainError(_)
        | Error::RegionTooLarge { .. } => 2,
        _ => 3,
    }
}

fn emit(report: &ExperimentReport) -> Result<(), Error> {
    for line in &report.summary {
        eprintln!("{line}");
    }
    match &report.manifest.spec.output {
        Some(path) => report.write(std::path::Path::new(path)),
        None => {
            let body = match report.manifest.spec.format {
                Format::Csv => report.to_csv(),
                Format::Json => report.to_json() + "\n",
            };
            match std::io::stdout().lock().write_all(body.as_bytes()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => other.map_err(Error::from),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_spec(cli).and_then(|spec| {
        let report = run(&spec)?;
        emit(&report)?;
        Ok(report)
    });
    match result {
        Ok(report) if report.verdict == Some(false) => {
            eprintln!("verification FAILED");
            ExitCode::from(1)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
