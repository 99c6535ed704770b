use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use igdyn::acceptance;
use igdyn::cli::{self, Report};

#[derive(Parser)]
#[command(name = "igdyn", version, about = "Geodesic chaos indicators on statistical manifolds")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run {
        config: PathBuf,
        /// Output directory for artifacts and report.json.
        #[arg(long, default_value = "igdyn_out")]
        out: PathBuf,
    },
    /// Run every scenario named in a list file.
    Sweep {
        list: PathBuf,
        #[arg(long, default_value = "igdyn_out")]
        out: PathBuf,
    },
    /// Run the built-in acceptance suite.
    Check {
        /// Run a single criterion.
        #[arg(long)]
        criterion: Option<u32>,
        /// Write the outcomes as JSON to this file.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

const EXIT_CLAIMS_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn finish(report: &Report, out: &PathBuf) -> ExitCode {
    if let Err(e) = cli::write_outputs(out, report) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    for s in &report.scenarios {
        println!("{} {}", if s.pass { "PASS" } else { "FAIL" }, s.name);
        if let Some(e) = &s.error {
            println!("    {e}");
        }
        for c in s.claims.iter().filter(|c| !c.pass) {
            println!(
                "    {}: predicted {:.6e}, measured {:.6e}, tolerance {:.1e}",
                c.name, c.predicted, c.measured, c.tolerance
            );
        }
    }
    println!("report written to {}", out.join("report.json").display());
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CLAIMS_FAILED)
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match args.command {
        Command::Run { config, out } => match cli::load_scenario(&config) {
            Ok(cfg) => finish(&Report::new(vec![cli::run_scenario(&cfg)]), &out),
            Err(e) => {
                eprintln!("error: {}: {e}", config.display());
                ExitCode::from(EXIT_USAGE)
            }
        },
        Command::Sweep { list, out } => {
            let loaded = cli::load_sweep_list(&list).and_then(|paths| {
                paths
                    .iter()
                    .map(|p| cli::load_scenario(p).map_err(|e| (p.clone(), e)))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|(p, e)| igdyn::Error::InvalidArgument(format!("{}: {e}", p.display())))
            });
            let report = loaded.and_then(|cfgs| cli::run_many(&cfgs, cli::thread_cap()));
            match report {
                Ok(r) => finish(&r, &out),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_USAGE)
                }
            }
        }
        Command::Check { criterion, json } => {
            let outcomes = match criterion {
                Some(id) => match acceptance::run_criterion(id) {
                    Some(o) => vec![o],
                    None => {
                        eprintln!("error: criteria are numbered 1 to {}", acceptance::CRITERION_COUNT);
                        return ExitCode::from(EXIT_USAGE);
                    }
                },
                None => acceptance::run_all(),
            };
            for o in &outcomes {
                println!("{}", o.summary());
            }
            if let Some(path) = json {
                let text = serde_json::to_string_pretty(&outcomes).expect("outcomes serialize");
                if let Err(e) = std::fs::write(&path, text + "\n") {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(EXIT_USAGE);
                }
            }
            let passed = outcomes.iter().filter(|o| o.pass()).count();
            println!("{passed}/{} criteria passed", outcomes.len());
            if passed == outcomes.len() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CLAIMS_FAILED)
            }
        }
    }
}
