//! `urnlab` — validate, classify, evolve and simulate balanced urn models
//! with multiple drawings.
//!
//! Every subcommand reads a JSON model file, writes a machine-readable
//! report to stdout (or `--output`), and signals its outcome through a
//! stable exit code: 0 success, 2 unreadable or invalid model file,
//! 3 unbalanced, 4 non-tenable, 5 not linear, 6 state cap exceeded,
//! 7 conformance failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use urnlab::exact::conform::run_conformance;
use urnlab::exact::eigen::eigen_report;
use urnlab::exact::moments::{
    covariance_trajectory, enumerate_moments, mean_trajectory, MomentState,
};
use urnlab::exact::{distribution_csv, evolve_distribution, DEFAULT_STATE_CAP};
use urnlab::monte_carlo::{run_ensemble, SimulationPlan};
use urnlab::scalar::ratio_string;
use urnlab::{Composition, Error, Rational, ReducedMatrix, Scheme, UrnModel};

#[derive(Parser)]
#[command(name = "urnlab", version, about, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Report format where both are supported.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Maximum support size for exact evolution; overrides URNLAB_CAP.
    #[arg(long, global = true)]
    cap: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Product,
    Recurrence,
    Enumerate,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Report balance, tenability and the initial total.
    Validate { model: PathBuf },
    /// Linearity verdict with the reduced matrix and eigen diagnostics.
    Classify { model: PathBuf },
    /// Expand a reduced-form model file into full rows.
    Expand {
        model: PathBuf,
        /// For ordered schemes: use the single-draw embedding, whose rows
        /// are rows of the reduced matrix itself.
        #[arg(long)]
        m1: bool,
    },
    /// Embed an unordered model into its ordered counterpart.
    Embed { model: PathBuf },
    /// Exact mean and covariance per step.
    Moments {
        model: PathBuf,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Method::Recurrence)]
        method: Method,
    },
    /// Exact composition distribution at a step.
    Distribution {
        model: PathBuf,
        #[arg(long)]
        steps: usize,
    },
    /// Monte Carlo ensemble statistics.
    Simulate {
        model: PathBuf,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Resolve the covariance constants against enumeration.
    Conform {
        model: PathBuf,
        #[arg(long)]
        steps: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, code)) => {
            if let Err(e) = emit(&cli.output, &report) {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_)
        | Error::InvalidArgument(_)
        | Error::InvalidDimension(_)
        | Error::NonIntegral(_)
        | Error::Overflow(_) => 2,
        Error::Unbalanced(_) | Error::NonpositiveBalance(_) => 3,
        Error::NotTenable(_) => 4,
        Error::NotLinear(_) => 5,
        Error::CapExceeded(_) => 6,
        Error::Conformance(_) => 7,
        _ => 1,
    }
}

fn emit(output: &Option<PathBuf>, report: &str) -> std::io::Result<()> {
    match output {
        Some(path) => std::fs::write(path, report),
        None => std::io::stdout().write_all(report.as_bytes()),
    }
}

fn state_cap(cli: &Cli) -> usize {
    cli.cap
        .or_else(|| {
            std::env::var("URNLAB_CAP")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(DEFAULT_STATE_CAP)
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn run(cli: &Cli) -> Result<(String, u8), Error> {
    let cap = state_cap(cli);
    match &cli.command {
        Command::Validate { model } => cmd_validate(model),
        Command::Classify { model } => cmd_classify(model),
        Command::Expand { model, m1 } => cmd_expand(model, *m1),
        Command::Embed { model } => cmd_embed(model),
        Command::Moments {
            model,
            steps,
            method,
        } => cmd_moments(
            model,
            *steps,
            *method,
            cap,
            cli.format.unwrap_or(Format::Json),
        ),
        // the distribution dump is CSV unless asked otherwise
        Command::Distribution { model, steps } => {
            cmd_distribution(model, *steps, cap, cli.format.unwrap_or(Format::Csv))
        }
        Command::Simulate {
            model,
            steps,
            runs,
            seed,
            workers,
        } => cmd_simulate(
            model,
            *steps,
            *runs,
            *seed,
            *workers,
            cli.format.unwrap_or(Format::Json),
        ),
        Command::Conform { model, steps } => cmd_conform(model, *steps, cap),
    }
}

fn cmd_validate(path: &Path) -> Result<(String, u8), Error> {
    let model = UrnModel::from_json_file(path)?;
    let sigma = match model.matrix().validate_balance() {
        Ok(sigma) => sigma,
        Err(e @ (Error::Unbalanced(_) | Error::NonpositiveBalance(_))) => {
            let report = serde_json::json!({
                "balanced": false,
                "error": e.to_string(),
            });
            return Ok((pretty(&report), 3));
        }
        Err(e) => return Err(e),
    };
    let tenability = model.matrix().validate_tenability();
    let report = serde_json::json!({
        "balanced": true,
        "sigma": sigma,
        "t0": model.total0(),
        "tenable": tenability.tenable,
        "violations": tenability.violations,
    });
    let code = if tenability.tenable { 0 } else { 4 };
    Ok((pretty(&report), code))
}

fn cmd_classify(path: &Path) -> Result<(String, u8), Error> {
    let model = UrnModel::from_json_file(path)?;
    let verdict = model.matrix().classify()?;
    let mut report = verdict.to_json();
    if let Some(reduced) = &verdict.reduced {
        report["eigen"] =
            serde_json::to_value(eigen_report(reduced)).expect("eigen report serializes");
    }
    Ok((pretty(&report), 0))
}

/// The reduced-form fields of a model file, for `expand --m1`.
#[derive(Deserialize)]
struct ReducedFile {
    colors: usize,
    sample_size: usize,
    scheme: Scheme,
    initial: Vec<i64>,
    reduced: Option<Vec<Vec<i64>>>,
}

fn cmd_expand(path: &Path, m1: bool) -> Result<(String, u8), Error> {
    let model = if m1 {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let file: ReducedFile =
            serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
        let rows = file.reduced.ok_or_else(|| {
            Error::InvalidArgument("--m1 expansion needs a \"reduced\" model file".into())
        })?;
        if !file.scheme.is_ordered() {
            return Err(Error::InvalidArgument(
                "--m1 expansion produces ordered rows; the scheme must be MSEQ or RSEQ".into(),
            ));
        }
        let reduced = ReducedMatrix::new(rows)?;
        if reduced.colors() != file.colors {
            return Err(Error::Parse(format!(
                "reduced matrix has {} rows, \"colors\" says {}",
                reduced.colors(),
                file.colors
            )));
        }
        let matrix = reduced.embed_m1(file.sample_size, file.scheme)?;
        UrnModel::new(matrix, Composition::new(file.initial)?)?
    } else {
        UrnModel::from_json_file(path)?
    };
    Ok((model.to_json_string() + "\n", 0))
}

fn cmd_embed(path: &Path) -> Result<(String, u8), Error> {
    let model = UrnModel::from_json_file(path)?;
    let embedded = model.matrix().embed_ordered()?;
    let embedded = UrnModel::new(embedded, model.initial().clone())?;
    Ok((embedded.to_json_string() + "\n", 0))
}

fn moments_json(states: &[MomentState<Rational>], with_sigma: bool) -> serde_json::Value {
    states
        .iter()
        .map(|s| {
            let mut v = s.to_json();
            if !with_sigma {
                v.as_object_mut().expect("object").remove("sigma");
            }
            v
        })
        .collect()
}

fn moments_csv(states: &[MomentState<Rational>], with_sigma: bool) -> String {
    let r = states[0].mu.len();
    let mut out = String::from("step");
    for i in 1..=r {
        out.push_str(&format!(",mu{i}"));
    }
    if with_sigma {
        for i in 1..=r {
            for j in 1..=r {
                out.push_str(&format!(",sigma{i}{j}"));
            }
        }
    }
    out.push('\n');
    for s in states {
        out.push_str(&s.step.to_string());
        for v in &s.mu {
            out.push_str(&format!(",{}", ratio_string(v)));
        }
        if with_sigma {
            for row in s.sigma.rows() {
                for v in row {
                    out.push_str(&format!(",{}", ratio_string(v)));
                }
            }
        }
        out.push('\n');
    }
    out
}

fn cmd_moments(
    path: &Path,
    steps: usize,
    method: Method,
    cap: usize,
    format: Format,
) -> Result<(String, u8), Error> {
    let model = UrnModel::from_json_file(path)?;
    match method {
        Method::Product => {
            let means = mean_trajectory::<Rational>(&model, steps)?;
            match format {
                Format::Json => {
                    let v: Vec<serde_json::Value> = means
                        .iter()
                        .enumerate()
                        .map(|(step, mu)| {
                            serde_json::json!({
                                "step": step,
                                "mu": mu.iter().map(ratio_string).collect::<Vec<_>>(),
                            })
                        })
                        .collect();
                    Ok((pretty(&serde_json::Value::Array(v)), 0))
                }
                Format::Csv => {
                    let r = model.colors();
                    let mut out = String::from("step");
                    for i in 1..=r {
                        out.push_str(&format!(",mu{i}"));
                    }
                    out.push('\n');
                    for (step, mu) in means.iter().enumerate() {
                        out.push_str(&step.to_string());
                        for v in mu {
                            out.push_str(&format!(",{}", ratio_string(v)));
                        }
                        out.push('\n');
                    }
                    Ok((out, 0))
                }
            }
        }
        Method::Recurrence => {
            let states = covariance_trajectory::<Rational>(&model, steps, cap)?;
            Ok(match format {
                Format::Json => (pretty(&moments_json(&states, true)), 0),
                Format::Csv => (moments_csv(&states, true), 0),
            })
        }
        Method::Enumerate => {
            let states = enumerate_moments::<Rational>(&model, steps, cap)?;
            Ok(match format {
                Format::Json => (pretty(&moments_json(&states, true)), 0),
                Format::Csv => (moments_csv(&states, true), 0),
            })
        }
        Method::All => {
            if format == Format::Csv {
                return Err(Error::InvalidArgument(
                    "--method all emits a JSON comparison report".into(),
                ));
            }
            let means = mean_trajectory::<Rational>(&model, steps)?;
            let recurrence = covariance_trajectory::<Rational>(&model, steps, cap)?;
            let enumerated = enumerate_moments::<Rational>(&model, steps, cap)?;
            let mut equal = true;
            let mut per_step = Vec::with_capacity(steps + 1);
            for n in 0..=steps {
                let mu_eq = means[n] == recurrence[n].mu && means[n] == enumerated[n].mu;
                let sigma_eq = recurrence[n].sigma == enumerated[n].sigma;
                equal &= mu_eq && sigma_eq;
                per_step.push(serde_json::json!({
                    "step": n,
                    "product_mu": means[n].iter().map(ratio_string).collect::<Vec<_>>(),
                    "recurrence": recurrence[n].to_json(),
                    "enumerate": enumerated[n].to_json(),
                    "mu_equal": mu_eq,
                    "sigma_equal": sigma_eq,
                }));
            }
            let report = serde_json::json!({
                "per_step": per_step,
                "equal": equal,
            });
            Ok((pretty(&report), 0))
        }
    }
}

fn cmd_distribution(
    path: &Path,
    steps: usize,
    cap: usize,
    format: Format,
) -> Result<(String, u8), Error> {
    let model = UrnModel::from_json_file(path)?;
    let dist = evolve_distribution::<Rational>(&model, steps, cap)?;
    match format {
        Format::Csv => Ok((distribution_csv(&dist), 0)),
        Format::Json => {
            let support: Vec<serde_json::Value> = dist
                .iter()
                .map(|(x, p)| {
                    serde_json::json!({
                        "x": x.counts(),
                        "prob": ratio_string(p),
                    })
                })
                .collect();
            let report = serde_json::json!({
                "step": dist.step(),
                "support": support,
            });
            Ok((pretty(&report), 0))
        }
    }
}

fn cmd_simulate(
    path: &Path,
    steps: usize,
    runs: u64,
    seed: u64,
    workers: usize,
    format: Format,
) -> Result<(String, u8), Error> {
    let model = UrnModel::from_json_file(path)?;
    let plan = SimulationPlan {
        model,
        steps,
        runs,
        seed,
        workers,
    };
    let summary = run_ensemble(&plan)?;
    Ok(match format {
        Format::Json => (pretty(&summary.to_json()), 0),
        Format::Csv => (summary.to_csv(), 0),
    })
}

fn cmd_conform(path: &Path, steps: usize, cap: usize) -> Result<(String, u8), Error> {
    let model = UrnModel::from_json_file(path)?;
    let report = run_conformance(&model, steps, cap)?;
    let code = if report.ok { 0 } else { 7 };
    Ok((pretty(&report.to_json()), code))
}
