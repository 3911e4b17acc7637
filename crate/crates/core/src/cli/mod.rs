//! Batch front-end: problem documents in, reports out.
//!
//! Exit codes: 0 when every requested check passes, 1 when one fails,
//! 2 for unreadable or invalid input.

pub mod doc;
mod pipeline;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use doc::ProblemDocument;
pub use pipeline::{load, run_document, InputError, RunOptions, Stage, DEFAULT_TOL};
pub use report::{explain, Report};

#[derive(Parser, Debug)]
#[command(name = "eds-waves", version, about = "Travelling-wave reductions and integrability checks")]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run the pipeline on a problem document and print the JSON report.
    Run {
        doc: PathBuf,
        /// Comma-separated stages: integrability,structure,extract,integrals,densities,numeric.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
        /// Grid node counts as NX,NT.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        /// Sign-convention note echoed into the report.
        #[arg(long)]
        convention: Option<String>,
        /// Write the report here instead of stdout.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Print the text summary to stderr.
        #[arg(long)]
        summary: bool,
    },
    /// Render a report as text.
    Explain { report: PathBuf },
}

fn parse_grid(s: &str) -> Option<(usize, usize)> {
    let (a, b) = s.split_once(',')?;
    let (nx, nt) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
    (nx > 0 && nt > 0).then_some((nx, nt))
}

fn input_error(msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    2
}

/// Entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match args.cmd {
        Cmd::Run { doc, only, grid, tol, convention, out, summary } => {
            let only = match only {
                Some(names) => {
                    let mut stages = Vec::new();
                    for n in names {
                        match Stage::from_name(n.trim()) {
                            Some(s) => stages.push(s),
                            None => return input_error(format!("unknown stage `{n}`")),
                        }
                    }
                    Some(stages)
                }
                None => None,
            };
            let grid = match grid.as_deref().map(parse_grid) {
                Some(None) => return input_error("--grid expects NX,NT with positive counts"),
                Some(g) => g,
                None => None,
            };
            let opts = RunOptions { only, grid, tol, convention };
            let report = match load(&doc.to_string_lossy()).and_then(|d| run_document(&d, &opts)) {
                Ok(r) => r,
                Err(e) => return input_error(e),
            };
            let json = report.to_json();
            match out {
                Some(p) => {
                    if let Err(e) = std::fs::write(&p, &json) {
                        return input_error(format!("cannot write {}: {e}", p.display()));
                    }
                }
                None => print!("{json}"),
            }
            if summary {
                eprint!("{}", explain(&report));
            }
            if report.pass {
                0
            } else {
                1
            }
        }
        Cmd::Explain { report } => {
            let text = match std::fs::read_to_string(&report) {
                Ok(t) => t,
                Err(e) => return input_error(format!("cannot read {}: {e}", report.display())),
            };
            match serde_json::from_str::<Report>(&text) {
                Ok(r) if r.schema == report::REPORT_SCHEMA => {
                    print!("{}", explain(&r));
                    0
                }
                Ok(r) => input_error(format!("unsupported report schema `{}`", r.schema)),
                Err(e) => input_error(format!("malformed report: {e}")),
            }
        }
    }
}
