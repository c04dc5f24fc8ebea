use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use torusgh::report::{analyze, builtin, builtin_names, emit_report, load_scenario, Format};

#[derive(Parser)]
#[command(name = "torusgh", version, about = "Global hypoellipticity experiments for D_t + omega D_x + eps R on the 2-torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a scenario file and write its artifacts.
    Analyze {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Comma-separated subset of json,csv.
        #[arg(long, value_delimiter = ',', default_value = "json,csv")]
        formats: Vec<String>,
        #[arg(long)]
        ell_max: Option<usize>,
        #[arg(long)]
        quiet: bool,
    },
    /// Print the names of the built-in scenarios.
    ListBuiltins,
    /// Print a built-in scenario as JSON.
    DumpBuiltin { name: String },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::ListBuiltins => {
            for n in builtin_names() {
                println!("{n}");
            }
            ExitCode::SUCCESS
        }
        Command::DumpBuiltin { name } => match builtin(&name) {
            Some(sc) => {
                println!("{}", sc.to_json());
                ExitCode::SUCCESS
            }
            None => fail(1, format!("no builtin named {name:?}")),
        },
        Command::Analyze {
            scenario,
            out,
            formats,
            ell_max,
            quiet,
        } => {
            let formats: Vec<Format> = match formats.iter().map(|f| f.parse()).collect() {
                Ok(f) => f,
                Err(e) => return fail(1, e),
            };
            let mut sc = match load_scenario(&scenario) {
                Ok(s) => s,
                Err(e) => return fail(1, e),
            };
            if let Some(n) = ell_max {
                sc.ell_max = n;
                if let Err(e) = sc.validate() {
                    return fail(1, e);
                }
            }
            let report = analyze(&sc);
            let written = match emit_report(&report, &out, &formats) {
                Ok(w) => w,
                Err(e) => return fail(1, e),
            };
            if !quiet {
                println!("scenario {}", sc.name);
                for e in &report.epsilon_reports {
                    println!(
                        "  eps = {}: {:?} (theta = {}, C = {}, hits = {})",
                        e.epsilon,
                        e.gh.result.verdict,
                        e.gh.result.fitted_theta,
                        e.gh.result.fitted_c,
                        e.gh.result.gamma_q_hits.len()
                    );
                }
                for p in &written {
                    println!("  wrote {}", p.display());
                }
            }
            for e in &report.errors {
                eprintln!("analysis error in {}: {}", e.stage, e.message);
            }
            ExitCode::from(report.exit_code() as u8)
        }
    }
}
