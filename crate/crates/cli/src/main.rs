mod commands;
mod input;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pimodel::Tolerance;
use serde_json::{json, Value};

use input::{Failure, Outcome};

/// Partial isometries, characteristic functions and model spaces.
#[derive(Parser, Debug)]
#[command(name = "pimodel", version)]
struct Cli {
    /// Relative singular-value threshold for rank decisions.
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Residual threshold for identities and witnesses.
    #[arg(long, global = true)]
    tol_res: Option<f64>,
    /// Number of sample points in the disk.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Extension,
    Defect,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a partial isometry and report indices, CNU status, spectrum.
    Analyze { input: PathBuf },
    /// Sample the characteristic function.
    Charfn {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = RouteArg::Extension)]
        route: RouteArg,
    },
    /// Compare two partial isometries under every implemented order.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Number of search starts for the isometric order.
        #[arg(long, default_value_t = 8)]
        budget: usize,
    },
    /// Model space data of a finite Blaschke product.
    Blaschke { input: PathBuf },
    /// Clark measures and round trips; `--carrier` checks the singular inner
    /// function restricted to the listed carrier points instead.
    Clark {
        #[arg(required_unless_present = "carrier")]
        input: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', conflicts_with = "input")]
        carrier: Vec<i64>,
    },
    /// Kernel identities and Gram positivity on sampled points.
    Kernels { input: PathBuf },
}

/// Resolved global settings shared by every command.
pub struct Settings {
    pub tol: Tolerance,
    pub samples: Option<usize>,
    pub seed: u64,
    pub format: Format,
}

/// What a command produces: the JSON result, and optionally a CSV table.
pub struct Report {
    pub inputs: Value,
    pub result: Value,
    pub csv: Option<(Vec<String>, Vec<Vec<f64>>)>,
}

fn settings(cli: &Cli) -> Outcome<Settings> {
    let base = Tolerance::default();
    let tol = Tolerance {
        rank_eps: cli.tol_rank.unwrap_or(base.rank_eps),
        residual_eps: cli.tol_res.unwrap_or(base.residual_eps),
    };
    tol.check()?;
    Ok(Settings {
        tol,
        samples: cli.samples,
        seed: cli.seed,
        format: cli.format,
    })
}

fn render(name: &str, s: &Settings, report: Report) -> Outcome<String> {
    match s.format {
        Format::Json => {
            let doc = json!({
                "command": name,
                "seed": s.seed,
                "tolerances": {
                    "rank_eps": s.tol.rank_eps,
                    "residual_eps": s.tol.residual_eps,
                },
                "inputs": report.inputs,
                "result": report.result,
            });
            let mut text = serde_json::to_string_pretty(&doc)
                .map_err(|e| Failure::Numerical(e.to_string()))?;
            text.push('\n');
            Ok(text)
        }
        Format::Csv => {
            let (header, rows) = report.csv.ok_or_else(|| {
                Failure::Input(format!(
                    "--format csv is only available for charfn, not {name}"
                ))
            })?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Failure::Numerical(e.to_string());
            w.write_record(&header).map_err(io)?;
            for row in rows {
                w.write_record(row.iter().map(|x| x.to_string()))
                    .map_err(io)?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| Failure::Numerical(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Failure::Numerical(e.to_string()))
        }
    }
}

fn run(cli: Cli) -> Outcome<()> {
    let s = settings(&cli)?;
    let (name, report) = match &cli.command {
        Command::Analyze { input } => ("analyze", commands::analyze(&s, input)?),
        Command::Charfn { input, route } => ("charfn", commands::charfn(&s, input, *route)?),
        Command::Compare { a, b, budget } => ("compare", commands::compare(&s, a, b, *budget)?),
        Command::Blaschke { input } => ("blaschke", commands::blaschke(&s, input)?),
        Command::Clark { input, carrier } => {
            ("clark", commands::clark(&s, input.as_deref(), carrier)?)
        }
        Command::Kernels { input } => ("kernels", commands::kernels(&s, input)?),
    };
    let text = render(name, &s, report)?;
    match &cli.output {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Input(e.to_string())),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let kind = match f {
                Failure::Input(_) => "input error",
                Failure::Numerical(_) => "numerical failure",
            };
            eprintln!("pimodel: {kind}: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
