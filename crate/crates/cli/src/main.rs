//! `engine run <file>...`: interpret scenario files and check their
//! expectations.
//!
//! Exit status: 0 when every expectation is met, 1 when a coherent verdict
//! was expected but not reached, 2 for any other mismatch, 3 for parse,
//! validation or run errors. With several files the largest status wins.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dice::harness::{explain, load_scenario, report_text, run_scenario_with, RunOptions};

#[derive(Parser)]
#[command(name = "engine", version, about = "Interpret discourse scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenario files.
    Run {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Print the inference trace.
        #[arg(long)]
        trace: bool,
        /// Step bound for each closure.
        #[arg(long, value_name = "N")]
        max_steps: Option<usize>,
        /// Maximum context nesting depth.
        #[arg(long, value_name = "N")]
        depth: Option<usize>,
        /// Write the structured report here; with several files, one
        /// `<stem>.report` per scenario in this directory.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
}

struct Outcome {
    code: u8,
    stdout: String,
    stderr: String,
}

fn run_one(file: &Path, trace: bool, opts: &RunOptions, report: Option<PathBuf>) -> Outcome {
    let mut out = Outcome { code: 0, stdout: String::new(), stderr: String::new() };
    let scenario = match load_scenario(file) {
        Ok(s) => s,
        Err(e) => {
            out.code = 3;
            out.stderr = format!("{}: {e}\n", file.display());
            return out;
        }
    };
    let report_data = match run_scenario_with(&scenario, opts) {
        Ok(r) => r,
        Err(e) => {
            out.code = 3;
            out.stderr = format!("{}: {e}\n", file.display());
            return out;
        }
    };
    if trace {
        out.stdout.push_str(&explain(&report_data));
    }
    for e in &report_data.expectations {
        let status = if e.met { "ok" } else { "FAILED" };
        out.stdout.push_str(&format!("{}: expect {} (line {}) {status}\n", scenario.name, e.text, e.line));
    }
    out.stdout.push_str(&format!("{}: {}\n", scenario.name, report_data.verdict));
    if let Some(path) = report {
        if let Err(e) = std::fs::write(&path, report_text(&report_data)) {
            out.stderr.push_str(&format!("cannot write {}: {e}\n", path.display()));
            out.code = 3;
            return out;
        }
    }
    out.code = report_data.exit_code() as u8;
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run { files, trace, max_steps, depth, report } = cli.command;
    let opts = RunOptions { max_steps, max_depth: depth };
    let report_for = |file: &Path| -> Option<PathBuf> {
        let path = report.as_ref()?;
        if files.len() == 1 {
            return Some(path.clone());
        }
        let stem = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Some(path.join(format!("{stem}.report")))
    };
    if files.len() > 1 {
        if let Some(dir) = &report {
            if let Err(e) = std::fs::create_dir_all(dir) {
                eprintln!("cannot create {}: {e}", dir.display());
                return ExitCode::from(3);
            }
        }
    }
    let outcomes: Vec<Outcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = files
            .iter()
            .map(|f| {
                let (opts, report) = (&opts, report_for(f));
                scope.spawn(move || run_one(f, trace, opts, report))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
    });
    let mut code = 0;
    for o in outcomes {
        print!("{}", o.stdout);
        eprint!("{}", o.stderr);
        code = code.max(o.code);
    }
    ExitCode::from(code)
}
