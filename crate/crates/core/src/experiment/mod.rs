//! Batch experiments: configuration, pipelines and output files.

mod config;
mod output;
mod run;

use std::path::{Path, PathBuf};

pub use config::{tokenize, Experiment, ExperimentConfig, BLOCK_MAX_SITES, FULL_SPACE_MAX_SITES, KEYS};
pub use output::{csv_body, emit_figure_data, summary_json, write_outputs, Cell, Figure, Table};
pub use run::{
    exact_ness, run_experiment, sector_superoperator, spectrum, BlockRow, ExperimentResult, NessRecord, ScanRow,
    SectorRow, SpectrumRecord, SymmetryReport, ALGEBRA_MAX_SITES, MULTIPLICITY_MAX_SITES, SCAN_SPECTRUM_CAP,
    UNIFORM_CURRENT_TOL,
};

use crate::error::{Error, Result};

/// Process exit status for a finished or failed run.
pub fn exit_code(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(_) => 0,
        Err(Error::Config(_)) | Err(Error::InvalidParameter(_)) => 2,
        Err(_) => 3,
    }
}

/// What a completed run produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub result: ExperimentResult,
    pub files: Vec<PathBuf>,
    pub flagged: bool,
}

/// Reads a config file, applying command-line overrides.
pub fn load_config(path: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(o) = out {
        cfg.out = o.to_path_buf();
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Validates, runs and writes all outputs.
pub fn run(cfg: &ExperimentConfig, allow_large: bool) -> Result<RunOutcome> {
    cfg.validate()?;
    cfg.check_size(allow_large)?;
    let result = run_experiment(cfg)?;
    let files = write_outputs(cfg, &result, &cfg.out)?;
    Ok(RunOutcome {
        flagged: result.flagged(),
        result,
        files,
    })
}
