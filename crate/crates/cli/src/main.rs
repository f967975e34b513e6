use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bianchi_maxwell::config::{parse_grid_overrides, Prepared, DEFAULT_SEED};
use bianchi_maxwell::pipeline::{self, PipelineError, EXIT_OK, EXIT_VERIFY_FAILED};
use bianchi_maxwell::verify::selftest::{run_selftest, Mutation};
use bianchi_maxwell::verify::{ResidualReport, Tolerances};

/// Exact source-free Maxwell fields on type-IX homogeneous spacetimes.
#[derive(Parser)]
#[command(name = "b9maxwell", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for n_ab along the time grid and write CSV and JSON tables.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Run the residual suite on a config or on an exported table.
    Verify {
        #[arg(long, required_unless_present = "table")]
        config: Option<PathBuf>,
        /// A table written by `solve` (.csv or .json).
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// e.g. "u0=0.2:1.2:5;h=0.001"
        #[arg(long)]
        grid_overrides: Option<String>,
    },
    /// Run the seeded invariant suite.
    Selftest {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Inject a known defect; the suite is then expected to fail.
        #[arg(long, value_enum, default_value_t = Inject::None)]
        inject: Inject,
    },
    /// Print the branch a config's fields fall into.
    Classify {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Inject {
    None,
    FlipC312,
    SwapV,
}

fn prepare(path: &Path) -> Result<Prepared, PipelineError> {
    Ok(pipeline::load_config(path)?.prepare()?)
}

fn print_report(report: &ResidualReport, path: &Path) {
    for c in &report.checks {
        println!(
            "{} {:<20} max {:.3e}  tol {:.1e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.max,
            c.tol
        );
    }
    if report.residual.interpolated {
        println!("note: no config available, residual evaluated on the interpolated table");
    }
    let listed = report.typo_findings.iter().filter(|f| f.allowlisted).count();
    println!(
        "typo findings: {} ({} known)",
        report.typo_findings.len(),
        listed
    );
    println!("report: {}", path.display());
}

fn run(cli: Cli) -> Result<i32, PipelineError> {
    match cli.command {
        Command::Solve { config, out_dir } => {
            let p = prepare(&config)?;
            let sol = pipeline::solve(&p)?;
            let invalid = sol.samples.iter().filter(|s| !s.valid).count();
            println!(
                "{}: {} samples on [{}, {}], {} invalid",
                sol.case(),
                sol.samples.len(),
                p.config.time_grid.t0,
                p.config.time_grid.t1,
                invalid
            );
            for path in pipeline::write_tables(&sol, &p, &out_dir)? {
                println!("wrote {}", path.display());
            }
            Ok(EXIT_OK)
        }
        Command::Verify {
            config,
            table,
            out_dir,
            seed,
            grid_overrides,
        } => {
            let mut prepared = config.as_deref().map(prepare).transpose()?;
            let table = table.as_deref().map(pipeline::load_table).transpose()?;
            if prepared.is_none() {
                if let Some(cfg) = table.as_ref().and_then(pipeline::embedded_config) {
                    prepared = Some(cfg.prepare()?);
                }
            }
            let base = prepared.as_ref().map(|p| p.verify_grid).unwrap_or_default();
            let grid = match &grid_overrides {
                Some(text) => parse_grid_overrides(text, base)?,
                None => base,
            };
            let seed = seed.or(prepared.as_ref().map(|p| p.seed)).unwrap_or(DEFAULT_SEED);
            let tol = prepared.as_ref().map(|p| p.tolerances).unwrap_or_default();
            eprintln!("seed: {seed}");
            let report = match table {
                Some(t) => pipeline::verify_table(t, prepared.as_ref(), &grid, &tol, seed)?,
                None => {
                    let mut p = prepared.clone().expect("config is required without a table");
                    p.seed = seed;
                    pipeline::verify_config(&p, &grid)?
                }
            };
            let path = pipeline::report_path(prepared.as_ref(), &out_dir);
            pipeline::write_report(&report, &path)?;
            print_report(&report, &path);
            Ok(if report.pass() { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }
        Command::Selftest { seed, inject } => {
            let mutation = match inject {
                Inject::None => Mutation::None,
                Inject::FlipC312 => Mutation::FlipC312,
                Inject::SwapV => Mutation::SwapV,
            };
            eprintln!("seed: {seed}");
            let summary = run_selftest(seed, &Tolerances::default(), mutation)?;
            for c in &summary.checks {
                println!(
                    "{} {:<20} max {:.3e}  tol {:.1e}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.max,
                    c.tol
                );
            }
            println!("{}/{} checks passed", summary.passed, summary.total);
            Ok(if summary.pass() { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }
        Command::Classify { config } => {
            let p = prepare(&config)?;
            let case = pipeline::resolve_case(&p)?;
            let free: Vec<&str> = case.free_slots().iter().map(|s| s.name()).collect();
            println!("{case} (free: {})", free.join(", "));
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = run(cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
