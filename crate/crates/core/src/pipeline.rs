//! Solve and verify orchestration shared by the command-line tool and tests.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::{check_verify_grid, ConfigError, Prepared, RunConfig, TimeGrid};
use crate::maxwell_system::{classify, CaseId, ClassifyError, DEFAULT_CLASSIFY_TOL};
use crate::spacetime::{export_solution, import_csv, import_json, ExportFormat, SpacetimeError, SpacetimeSolution};
use crate::verify::{residual_report, table_consistency, GridSpec, ResidualReport, Tolerances, VerifyError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CLASSIFY: i32 = 3;
pub const EXIT_SOLVE: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("classification: {0}")]
    Classify(#[from] ClassifyError),
    #[error("solve: {0}")]
    Spacetime(#[from] SpacetimeError),
    #[error("verify: {0}")]
    Verify(#[from] VerifyError),
    #[error("table is {table}, config resolves to {config}")]
    CaseMismatch { table: CaseId, config: CaseId },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::CaseMismatch { .. } => EXIT_CONFIG,
            PipelineError::Classify(_) | PipelineError::Spacetime(SpacetimeError::Classify(_)) => EXIT_CLASSIFY,
            PipelineError::Spacetime(SpacetimeError::Io(_) | SpacetimeError::Format(_)) => EXIT_IO,
            PipelineError::Spacetime(_) => EXIT_SOLVE,
            PipelineError::Verify(VerifyError::BadGrid(_) | VerifyError::EmptyGrid) => EXIT_CONFIG,
            PipelineError::Verify(VerifyError::Spacetime(e)) => PipelineError::Spacetime(e.clone()).exit_code(),
            PipelineError::Verify(_) => EXIT_SOLVE,
            PipelineError::Io { .. } => EXIT_IO,
        }
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    Ok(RunConfig::from_json(&text)?)
}

/// The configured branch, or the one found by classifying the time grid.
pub fn resolve_case(p: &Prepared) -> Result<CaseId, PipelineError> {
    let case = match p.config.case {
        Some(c) => c,
        None => classify(&p.curve, &p.grid, DEFAULT_CLASSIFY_TOL)?,
    };
    p.check_free_slots(case)?;
    Ok(case)
}

pub fn solve(p: &Prepared) -> Result<SpacetimeSolution, PipelineError> {
    let case = resolve_case(p)?;
    let parameters = serde_json::json!({ "config": p.config });
    Ok(SpacetimeSolution::assemble(case, p.curve.clone(), &p.grid, parameters)?)
}

/// Writes the CSV and JSON tables; returns the paths written.
pub fn write_tables(sol: &SpacetimeSolution, p: &Prepared, out_dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;
    let output = p.config.output.clone().unwrap_or_default();
    let targets = [
        (output.csv.unwrap_or_else(|| "solution.csv".into()), ExportFormat::Csv),
        (output.json.unwrap_or_else(|| "solution.json".into()), ExportFormat::Json),
    ];
    let mut written = Vec::new();
    for (name, format) in targets {
        let path = out_dir.join(name);
        let file = fs::File::create(&path).map_err(|e| io_error(&path, e))?;
        export_solution(sol, format, std::io::BufWriter::new(file))?;
        written.push(path);
    }
    Ok(written)
}

pub fn report_path(p: Option<&Prepared>, out_dir: &Path) -> PathBuf {
    let name = p
        .and_then(|p| p.config.output.as_ref())
        .and_then(|o| o.report.clone())
        .unwrap_or_else(|| "report.json".into());
    out_dir.join(name)
}

pub fn write_report(report: &ResidualReport, path: &Path) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Reads a `.csv` or `.json` table.
pub fn load_table(path: &Path) -> Result<SpacetimeSolution, PipelineError> {
    let file = fs::File::open(path).map_err(|e| io_error(path, e))?;
    let reader = std::io::BufReader::new(file);
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    Ok(if is_csv { import_csv(reader)? } else { import_json(reader)? })
}

/// The run configuration embedded in a table header by [`solve`], if any.
pub fn embedded_config(table: &SpacetimeSolution) -> Option<RunConfig> {
    serde_json::from_value(table.header.parameters.get("config")?.clone()).ok()
}

pub fn verify_config(p: &Prepared, grid: &GridSpec) -> Result<ResidualReport, PipelineError> {
    check_verify_grid(grid, &p.config.time_grid)?;
    let sol = solve(p)?;
    Ok(residual_report(&sol, grid, &p.tolerances, p.seed)?)
}

/// Verifies a stored table. With a config the table is checked sample by
/// sample against the re-solved curve; without one the residual is
/// evaluated on the interpolated table.
pub fn verify_table(
    table: SpacetimeSolution,
    config: Option<&Prepared>,
    grid: &GridSpec,
    tol: &Tolerances,
    seed: u64,
) -> Result<ResidualReport, PipelineError> {
    let Some(p) = config else {
        return Ok(residual_report(&table, grid, tol, seed)?);
    };
    let case = resolve_case(p)?;
    if case != table.case() {
        return Err(PipelineError::CaseMismatch {
            table: table.case(),
            config: case,
        });
    }
    let t = table.grid();
    let span = TimeGrid {
        t0: t[0],
        t1: t[t.len() - 1],
        steps: t.len().saturating_sub(1).max(1),
    };
    check_verify_grid(grid, &span)?;
    let reference = SpacetimeSolution::assemble(case, p.curve.clone(), &t, serde_json::Value::Null)?;
    let hybrid = table.with_curve(p.curve.clone());
    let mut report = residual_report(&hybrid, grid, tol, seed)?;
    report.checks.push(table_consistency(&hybrid, &reference, tol.table_consistency)?);
    Ok(report)
}
