//! `frob`: runs experiments and prints one JSON report.

mod catalog;
mod experiments;
mod params;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use frob_core::report::Status;
use params::{Globals, UsageError};

#[derive(Parser)]
#[command(name = "frob", version, about = "Exact-arithmetic experiments over finite fields")]
#[command(allow_external_subcommands = true, args_conflicts_with_subcommands = false)]
struct Cli {
    /// JSON config: {experiment, params, seed, budget_points, out, csv}
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// cap on candidate tuples in point enumeration
    #[arg(long = "budget-points", global = true)]
    budget_points: Option<u64>,
    /// write tables as CSV
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Option<Cmd>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the experiment catalog
    List,
    /// Run an experiment: `frob run hecke-verify q=5 t=2`
    Run {
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        args: Vec<String>,
    },
    #[command(external_subcommand)]
    External(Vec<String>),
}

const EXIT_USAGE: u8 = 2;
const EXIT_FAIL: u8 = 1;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let globals = Globals {
        config: cli.config.clone(),
        out: cli.out.clone(),
        seed: cli.seed,
        budget_points: cli.budget_points,
        csv: cli.csv.clone(),
    };
    let raw = match cli.cmd {
        Some(Cmd::List) => {
            let out = serde_json::to_string_pretty(&catalog::catalog()).expect("catalog serializes");
            println!("{out}");
            return ExitCode::SUCCESS;
        }
        Some(Cmd::Run { args }) => args,
        Some(Cmd::External(args)) => args,
        None => Vec::new(),
    };
    let inv = match params::resolve(&raw, &globals) {
        Ok(i) => i,
        Err(e) => return usage(&e, None),
    };
    if let Some(b) = inv.budget_points {
        frob_core::spans::set_point_budget(b);
    }
    let start = Instant::now();
    let outcome = experiments::run(&inv);
    let elapsed = start.elapsed().as_secs_f64() * 1000.0;
    let mut report = json!({
        "experiment": inv.experiment.name,
        "topic": inv.experiment.topic,
        "params": inv.params.to_json(),
        "seed": inv.seed,
        "versions": {"frob": env!("CARGO_PKG_VERSION")},
        "timing": {"elapsed_ms": elapsed},
    });
    if let Some(b) = inv.budget_points {
        report["budget_points"] = json!(b);
    }
    let code = match outcome {
        Ok(o) => {
            let status = o.final_status();
            report["status"] = serde_json::to_value(status).expect("status serializes");
            report["checks"] = serde_json::to_value(&o.checks).expect("checks serialize");
            report["results"] = o.results;
            if let Some(path) = &inv.csv {
                if let Err(e) = write_tables(path, &o.tables) {
                    eprintln!("frob: {e}");
                    return ExitCode::from(EXIT_FAIL);
                }
            }
            if status == Status::Fail {
                EXIT_FAIL
            } else {
                0
            }
        }
        Err(experiments::Failure::Usage(e)) => return usage(&e, Some(report)),
        Err(experiments::Failure::Core(e)) => {
            let usage_like = matches!(
                e,
                frob_core::Error::Invalid(_)
                    | frob_core::Error::NotPrime(_)
                    | frob_core::Error::EvenCharacteristic
                    | frob_core::Error::Dimension(_)
                    | frob_core::Error::FieldMismatch
            );
            report["status"] = json!("error");
            report["error"] = error_json(&e);
            if usage_like {
                EXIT_USAGE
            } else {
                EXIT_FAIL
            }
        }
    };
    match emit(&report, inv.out.as_deref()) {
        Ok(()) => ExitCode::from(code),
        Err(e) => {
            eprintln!("frob: {e}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}

fn error_json(e: &frob_core::Error) -> Value {
    match e {
        frob_core::Error::Budget { what, needed, limit } => json!({
            "kind": "budget", "what": what, "needed": needed.to_string(), "limit": limit.to_string(),
            "message": e.to_string(),
        }),
        other => json!({"kind": format!("{other:?}").split(['(', ' ']).next().unwrap_or("error").to_lowercase(), "message": other.to_string()}),
    }
}

fn usage(e: &UsageError, report: Option<Value>) -> ExitCode {
    let mut r = report.unwrap_or_else(|| json!({}));
    r["status"] = json!("usage-error");
    r["error"] = json!({"kind": "usage", "message": e.to_string()});
    println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
    eprintln!("frob: {e}");
    ExitCode::from(EXIT_USAGE)
}

fn emit(report: &Value, out: Option<&Path>) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    match out {
        Some(p) => std::fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// One table goes to `path`; several go to `<stem>-<name>.csv` beside it.
fn write_tables(path: &Path, tables: &[(String, String)]) -> std::io::Result<()> {
    match tables {
        [] => Err(std::io::Error::new(std::io::ErrorKind::InvalidInput, "this experiment produces no table")),
        [(_, csv)] => std::fs::write(path, csv),
        many => {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("table");
            for (name, csv) in many {
                std::fs::write(path.with_file_name(format!("{stem}-{name}.csv")), csv)?;
            }
            Ok(())
        }
    }
}
