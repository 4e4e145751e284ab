use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cfactor::cli::{self, Command, Format, Outcome, RunConfig};
use cfactor::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "cfactor", version, about = "Consistency-factor inference, calibration and asymptotics")]
struct Args {
    #[command(subcommand)]
    command: Option<Cmd>,

    /// JSON run config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed for simulations.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// JSON report path; tabular reports also get a `.csv` next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Format printed to stdout when no `--out` is given.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Grid nodes per dimension.
    #[arg(long, global = true)]
    grid_points: Option<usize>,

    /// Monte Carlo trials per point.
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// True values to sweep: points separated by `;`, coordinates by `,`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    sweep: Option<String>,

    /// Run the acceptance suite (same as the `self-check` subcommand).
    #[arg(long)]
    self_check: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Posterior density on a grid.
    Assign,
    /// Equal-tail credible interval(s).
    Interval,
    /// Sequential Bayes updates over the sample.
    Update,
    /// Monte Carlo coverage of credible intervals.
    Calibrate,
    /// Factorization discrepancy over candidate factors.
    FactorScan,
    /// Coverage as a function of sample size.
    Asymptotics,
    /// Exact-calibration residual.
    Residual,
    /// Acceptance suite.
    SelfCheck,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum FormatArg {
    Json,
    Csv,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Assign => Command::Assign,
            Cmd::Interval => Command::Interval,
            Cmd::Update => Command::Update,
            Cmd::Calibrate => Command::Calibrate,
            Cmd::FactorScan => Command::FactorScan,
            Cmd::Asymptotics => Command::Asymptotics,
            Cmd::Residual => Command::Residual,
            Cmd::SelfCheck => Command::SelfCheck,
        }
    }
}

fn parse_sweep(text: &str) -> Result<Vec<Vec<f64>>> {
    text.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|point| {
            point
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Validation {
                            field: "sweep".into(),
                            message: format!("`{v}` is not a number"),
                        })
                })
                .collect()
        })
        .collect()
}

fn configure(args: &Args) -> Result<(Command, RunConfig)> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let requested = if args.self_check {
        Some(Command::SelfCheck)
    } else {
        args.command.map(Command::from)
    };
    let command = cfg.resolve_command(requested)?;
    if let Some(s) = args.seed {
        cfg.seed = Some(s);
    }
    if let Some(t) = args.trials {
        cfg.trials = Some(t);
    }
    if let Some(n) = args.grid_points {
        cfg.grid.nodes = Some(n);
    }
    if let Some(s) = &args.sweep {
        cfg.sweep = parse_sweep(s)?;
        cfg.true_value = None;
    }
    if let Some(p) = &args.out {
        cfg.output.path = Some(p.clone());
    }
    if let Some(f) = args.format {
        cfg.output.format = Some(match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        });
    }
    Ok((command, cfg))
}

fn emit(command: Command, cfg: &RunConfig, outcome: &Outcome) -> Result<()> {
    let json = cli::to_json_bytes(&cli::envelope(command, outcome))?;
    let format = cfg.output.format.unwrap_or_default();
    if format == Format::Csv && outcome.csv.is_none() {
        return Err(Error::Validation {
            field: "format".into(),
            message: format!("`{}` produces no table", command.name()),
        });
    }
    let path = match (&cfg.output.path, command) {
        (Some(p), _) => Some(p.clone()),
        (None, Command::SelfCheck) => Some(PathBuf::from("cfactor-selfcheck.json")),
        (None, _) => None,
    };
    match path {
        Some(p) => {
            if let Some(csv) = &outcome.csv {
                cli::write_atomic(&csv_path(&p), csv.as_bytes())?;
            }
            cli::write_atomic(&p, &json)?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            match (format, &outcome.csv) {
                (Format::Csv, Some(csv)) => out.write_all(csv.as_bytes())?,
                _ => out.write_all(&json)?,
            }
        }
    }
    Ok(())
}

fn csv_path(json_path: &Path) -> PathBuf {
    json_path.with_extension("csv")
}

fn run(args: &Args) -> Result<i32> {
    let (command, cfg) = configure(args)?;
    cli::init_workers()?;
    let outcome = cli::execute(command, &cfg)?;
    emit(command, &cfg, &outcome)?;
    Ok(outcome.status)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("{}", cli::error_object(&e));
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
