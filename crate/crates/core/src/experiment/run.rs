//! Experiment pipelines.

use log::{info, warn};

use crate::error::{Error, Result};
use crate::liouvillian::{assemble_liouvillian, restrict, Superoperator};
use crate::models::{build_flip_parity, Drive, OpenModel, XxzParams};
use crate::observables::{continuity_residual, transport_profile};
use crate::scalar::Complex;
use crate::spectra::{cumulative_distribution, default_r_grid, full_spectrum, SPECTRUM_CAP};
use crate::steadystate::{ness_multiplicity_report, null_dimension, solve_ness, NessMethod, NULL_TOL, SVD_CAP};
use crate::symmetry::{
    classify_symmetry, evans_algebra_closure, evans_generators, flip_parity_sectors, magnetization_parity_sectors,
    quotient_blocks, BlockSelection, SectorSpec, CLUSTER_TOL,
};
use crate::trajectories::{estimate_ness_observables, TimePoint};

use super::config::{Experiment, ExperimentConfig};

/// Blocks up to this size get a spectral gap during `scan-n`.
pub const SCAN_SPECTRUM_CAP: usize = 1024;
/// Largest chain for the algebra-closure check in `symmetry-report`.
pub const ALGEBRA_MAX_SITES: usize = 4;
/// Largest chain for per-sector null-space dimensions in `symmetry-report`.
pub const MULTIPLICITY_MAX_SITES: usize = 6;
/// Bonds are reported as carrying a uniform current if they agree this well.
pub const UNIFORM_CURRENT_TOL: f64 = 1e-9;

/// Outcome of a steady-state computation (exact or sampled).
#[derive(Clone, Debug, PartialEq)]
pub struct NessRecord {
    pub n: usize,
    pub mu: f64,
    pub sector: SectorSpec,
    /// `ok`, or `no-convergence` when the solver gave up or the trajectory
    /// bond currents disagree.
    pub status: String,
    pub method: String,
    pub block_dim: usize,
    pub null_dim: usize,
    pub residual: f64,
    pub min_eigenvalue: f64,
    pub trace_error: f64,
    /// Bond-averaged current.
    pub current: f64,
    pub current_stderr: Option<f64>,
    pub currents: Vec<f64>,
    pub currents_stderr: Option<Vec<f64>>,
    pub magnetizations: Vec<f64>,
    pub magnetizations_stderr: Option<Vec<f64>>,
    /// Largest interior `|tr(σ^z_i L ρ)| / 2`.
    pub continuity: f64,
    pub spread: f64,
}

impl NessRecord {
    fn failed(n: usize, mu: f64, sector: SectorSpec, method: String, block_dim: usize) -> Self {
        Self {
            n,
            mu,
            sector,
            status: "no-convergence".into(),
            method,
            block_dim,
            null_dim: 0,
            residual: f64::NAN,
            min_eigenvalue: f64::NAN,
            trace_error: f64::NAN,
            current: f64::NAN,
            current_stderr: None,
            currents: vec![f64::NAN; n - 1],
            currents_stderr: None,
            magnetizations: vec![f64::NAN; n],
            magnetizations_stderr: None,
            continuity: f64::NAN,
            spread: f64::NAN,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRecord {
    pub n: usize,
    pub mu: f64,
    pub sector: SectorSpec,
    pub block_dim: usize,
    pub eigenvalues: Vec<Complex<f64>>,
    pub zero_modes: usize,
    pub gap: Option<f64>,
    pub max_real_part: f64,
    pub conjugation_defect: f64,
    /// `(r, W(r))`, ascending in `r` and ending at `r = 0`.
    pub wr: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub ness: NessRecord,
    pub gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockRow {
    pub label: String,
    pub eigenvalue: Complex<f64>,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectorRow {
    pub label: String,
    pub dim: usize,
    pub block_dim: usize,
    pub null_dim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    pub n: usize,
    pub drive: Drive,
    pub classification: String,
    pub quotient_blocks: Vec<BlockRow>,
    pub sectors: Vec<SectorRow>,
    pub algebra_dim: Option<usize>,
    pub full_null_dim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentResult {
    Ness(NessRecord),
    Trajectory { ness: NessRecord, series: Vec<TimePoint<f64>>, exact: Option<NessRecord> },
    Spectrum(SpectrumRecord),
    WrDist(SpectrumRecord),
    ScanN(Vec<ScanRow>),
    ScanMu(Vec<ScanRow>),
    Symmetry(SymmetryReport),
}

impl ExperimentResult {
    pub fn experiment(&self) -> Experiment {
        match self {
            ExperimentResult::Ness(_) => Experiment::NessExact,
            ExperimentResult::Trajectory { .. } => Experiment::NessTrajectory,
            ExperimentResult::Spectrum(_) => Experiment::Spectrum,
            ExperimentResult::WrDist(_) => Experiment::WrDist,
            ExperimentResult::ScanN(_) => Experiment::ScanN,
            ExperimentResult::ScanMu(_) => Experiment::ScanMu,
            ExperimentResult::Symmetry(_) => Experiment::SymmetryReport,
        }
    }

    /// True if some part of the result did not converge.
    pub fn flagged(&self) -> bool {
        match self {
            ExperimentResult::Ness(r) => !r.is_ok(),
            ExperimentResult::Trajectory { ness, .. } => !ness.is_ok(),
            ExperimentResult::ScanN(rows) | ExperimentResult::ScanMu(rows) => rows.iter().any(|r| !r.ness.is_ok()),
            _ => false,
        }
    }
}

fn model(cfg: &ExperimentConfig, n: usize, mu: f64) -> Result<OpenModel<f64>> {
    OpenModel::xxz(XxzParams::new(n, cfg.delta, cfg.gamma, mu, cfg.drive)?)
}

/// The generator restricted to the configured sector (or the full space).
pub fn sector_superoperator(model: &OpenModel<f64>, sector: SectorSpec) -> Result<Superoperator<f64>> {
    match sector {
        SectorSpec::Full => assemble_liouvillian(model),
        spec => {
            let dec = magnetization_parity_sectors::<f64>(model.n())?;
            let a = spec.resolve(&dec)?.expect("sector");
            restrict(model, &dec, &BlockSelection::diagonal(&dec, a))
        }
    }
}

/// Exact steady state of one chain; solver non-convergence is recorded, not
/// raised.
pub fn exact_ness(cfg: &ExperimentConfig, n: usize, mu: f64) -> Result<NessRecord> {
    let model = model(cfg, n, mu)?;
    let sup = sector_superoperator(&model, cfg.sector)?;
    info!("n = {n}, mu = {mu}: block {} of dimension {}", sup.label(), sup.dim());
    let states = match solve_ness(&sup, cfg.solver, cfg.tol) {
        Ok(s) => s,
        Err(Error::NoConvergence(msg)) => {
            warn!("n = {n}, mu = {mu}: {msg}");
            return Ok(NessRecord::failed(n, mu, cfg.sector, cfg.solver.to_string(), sup.dim()));
        }
        Err(e) => return Err(e),
    };
    if states.len() > 1 {
        warn!("{}-dimensional null space; reporting the first extremal state", states.len());
    }
    let st = &states[0];
    let prof = transport_profile(&st.rho, n, UNIFORM_CURRENT_TOL)?;
    let continuity = continuity_residual(&model, &st.rho)?.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    let current = prof.currents.iter().sum::<f64>() / prof.currents.len() as f64;
    Ok(NessRecord {
        n,
        mu,
        sector: cfg.sector,
        status: "ok".into(),
        method: st.method.to_string(),
        block_dim: sup.dim(),
        null_dim: st.null_dim,
        residual: st.residual,
        min_eigenvalue: st.min_eigenvalue,
        trace_error: st.trace_error(),
        current,
        current_stderr: None,
        spread: prof.current_spread(),
        currents: prof.currents,
        currents_stderr: None,
        magnetizations: prof.magnetizations,
        magnetizations_stderr: None,
        continuity,
    })
}

fn trajectory(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let model = model(cfg, cfg.n, cfg.mu)?;
    let est = estimate_ness_observables(&model, &cfg.trajectory_config())?;
    if !est.converged {
        warn!(
            "bond-current spread {:e} exceeds 3 pooled standard errors ({:e})",
            est.spread, est.pooled_stderr
        );
    }
    let ness = NessRecord {
        n: cfg.n,
        mu: cfg.mu,
        sector: cfg.sector,
        status: if est.converged { "ok" } else { "no-convergence" }.into(),
        method: format!("trajectories(order {})", cfg.trotter_order),
        block_dim: 0,
        null_dim: 0,
        residual: f64::NAN,
        min_eigenvalue: f64::NAN,
        trace_error: f64::NAN,
        current: est.current.mean,
        current_stderr: Some(est.current.stderr),
        currents: est.bond_currents.iter().map(|e| e.mean).collect(),
        currents_stderr: Some(est.bond_currents.iter().map(|e| e.stderr).collect()),
        magnetizations: est.magnetizations.iter().map(|e| e.mean).collect(),
        magnetizations_stderr: Some(est.magnetizations.iter().map(|e| e.stderr).collect()),
        continuity: f64::NAN,
        spread: est.spread,
    };
    // small blocks also get the exact answer for comparison
    let dim = match cfg.sector {
        SectorSpec::Full => model.dim() * model.dim(),
        spec => {
            let dec = magnetization_parity_sectors::<f64>(cfg.n)?;
            let d = dec.sectors()[spec.resolve(&dec)?.expect("sector")].dim();
            d * d
        }
    };
    let exact = if dim <= SVD_CAP {
        let mut c = cfg.clone();
        c.solver = NessMethod::Dense;
        Some(exact_ness(&c, cfg.n, cfg.mu)?)
    } else {
        None
    };
    Ok(ExperimentResult::Trajectory {
        ness,
        series: est.series,
        exact,
    })
}

/// Spectrum of the configured block, with `W(r)` on `r_points` points.
pub fn spectrum(cfg: &ExperimentConfig, n: usize, mu: f64, cap: usize) -> Result<SpectrumRecord> {
    let model = model(cfg, n, mu)?;
    let sup = sector_superoperator(&model, cfg.sector)?;
    let spec = full_spectrum(&sup, cap)?;
    let grid = default_r_grid(&spec, cfg.r_points);
    Ok(SpectrumRecord {
        n,
        mu,
        sector: cfg.sector,
        block_dim: sup.dim(),
        zero_modes: spec.zero_modes,
        gap: spec.gap,
        max_real_part: spec.max_real_part(),
        conjugation_defect: spec.conjugation_defect(),
        wr: cumulative_distribution(&spec, &grid)?,
        eigenvalues: spec.eigenvalues,
    })
}

fn scan_row(cfg: &ExperimentConfig, n: usize, mu: f64) -> Result<ScanRow> {
    let ness = exact_ness(cfg, n, mu)?;
    let gap = if ness.block_dim <= SCAN_SPECTRUM_CAP {
        spectrum(cfg, n, mu, SCAN_SPECTRUM_CAP)?.gap
    } else {
        None
    };
    Ok(ScanRow { ness, gap })
}

fn symmetry_report(cfg: &ExperimentConfig) -> Result<SymmetryReport> {
    let n = cfg.n;
    let model = model(cfg, n, cfg.mu)?;
    let s = build_flip_parity::<f64>(n)?;
    let kind = classify_symmetry(&model, &s, 1e-10)?;
    let sdec = flip_parity_sectors::<f64>(n)?;
    let quotient_blocks = quotient_blocks(&sdec, CLUSTER_TOL)
        .iter()
        .enumerate()
        .map(|(k, b)| BlockRow {
            label: format!("B{}", k + 1),
            eigenvalue: b.eigenvalue,
            dim: b.dim,
        })
        .collect();
    let sectors = if cfg.drive == Drive::Strong {
        let dec = magnetization_parity_sectors::<f64>(n)?;
        let nulls = if n <= MULTIPLICITY_MAX_SITES {
            Some(ness_multiplicity_report(&model, &dec)?)
        } else {
            None
        };
        dec.sectors()
            .iter()
            .enumerate()
            .map(|(k, sec)| SectorRow {
                label: sec.label.to_string(),
                dim: sec.dim(),
                block_dim: sec.dim() * sec.dim(),
                null_dim: nulls.as_ref().map(|r| r[k].null_dim),
            })
            .collect()
    } else {
        Vec::new()
    };
    let algebra_dim = if n <= ALGEBRA_MAX_SITES {
        Some(evans_algebra_closure(&evans_generators(&model), model.dim() * model.dim())?.dim)
    } else {
        None
    };
    let full_null_dim = if cfg.drive == Drive::Weak && n <= ALGEBRA_MAX_SITES {
        Some(null_dimension(&assemble_liouvillian(&model)?, NULL_TOL)?)
    } else {
        None
    };
    Ok(SymmetryReport {
        n,
        drive: cfg.drive,
        classification: kind.to_string(),
        quotient_blocks,
        sectors,
        algebra_dim,
        full_null_dim,
    })
}

/// Runs the configured experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    Ok(match cfg.experiment {
        Experiment::NessExact => ExperimentResult::Ness(exact_ness(cfg, cfg.n, cfg.mu)?),
        Experiment::NessTrajectory => trajectory(cfg)?,
        Experiment::Spectrum => ExperimentResult::Spectrum(spectrum(cfg, cfg.n, cfg.mu, SPECTRUM_CAP)?),
        Experiment::WrDist => ExperimentResult::WrDist(spectrum(cfg, cfg.n, cfg.mu, SPECTRUM_CAP)?),
        Experiment::ScanN => ExperimentResult::ScanN(
            cfg.n_values
                .iter()
                .map(|&n| scan_row(cfg, n, cfg.mu))
                .collect::<Result<_>>()?,
        ),
        Experiment::ScanMu => ExperimentResult::ScanMu(
            cfg.mu_values
                .iter()
                .map(|&mu| scan_row(cfg, cfg.n, mu))
                .collect::<Result<_>>()?,
        ),
        Experiment::SymmetryReport => ExperimentResult::Symmetry(symmetry_report(cfg)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    #[test]
    fn dark_sector_profile() {
        let r = exact_ness(&cfg("experiment=ness-exact n=4 drive=strong sector=-1,0 delta=2"), 4, 0.2).unwrap();
        assert!(r.is_ok());
        assert_eq!(r.block_dim, 1);
        assert!(r.current.abs() < 1e-10);
        assert!(r.magnetizations.iter().all(|m| m.abs() < 1e-10));
    }

    #[test]
    fn scan_n_current_falls() {
        let res = run_experiment(&cfg("experiment=scan-n drive=strong delta=2 mu=0.2 gamma=1 sector=+1,0 n_values=4,6")).unwrap();
        let ExperimentResult::ScanN(rows) = res else { panic!() };
        assert_eq!(rows.len(), 2);
        assert!(rows[0].ness.current.abs() > rows[1].ness.current.abs());
        assert!(rows.iter().all(|r| r.gap.is_some()));
    }

    #[test]
    fn weak_report_has_two_blocks() {
        let res = run_experiment(&cfg("experiment=symmetry-report drive=weak n=3")).unwrap();
        let ExperimentResult::Symmetry(rep) = res else { panic!() };
        assert_eq!(rep.classification, "weak");
        assert_eq!(rep.quotient_blocks.len(), 2);
        assert_eq!(rep.quotient_blocks.iter().map(|b| b.dim).sum::<usize>(), 64);
        assert_eq!(rep.algebra_dim, Some(64));
        assert_eq!(rep.full_null_dim, Some(1));
    }

    #[test]
    fn strong_report_lists_sectors() {
        let res = run_experiment(&cfg("experiment=symmetry-report drive=strong n=4")).unwrap();
        let ExperimentResult::Symmetry(rep) = res else { panic!() };
        assert_eq!(rep.classification, "strong");
        assert_eq!(rep.sectors.iter().map(|s| s.dim).sum::<usize>(), 16);
        assert!(rep.sectors.iter().all(|s| s.null_dim.unwrap() >= 1));
        assert!(rep.algebra_dim.unwrap() < 256);
    }

    #[test]
    fn weak_sector_rejected_before_work() {
        assert!(ExperimentConfig::parse("experiment=ness-exact drive=weak sector=+1,0").is_err());
    }

    #[test]
    fn trajectory_carries_exact_reference() {
        let res = run_experiment(&cfg("experiment=ness-trajectory n=4 n_traj=40 t_burn=5 t_sample=20 dt=0.02")).unwrap();
        let ExperimentResult::Trajectory { ness, exact, series } = res else { panic!() };
        let exact = exact.unwrap();
        assert!(ness.current_stderr.unwrap() > 0.0);
        assert!((ness.current - exact.current).abs() < 5.0 * ness.current_stderr.unwrap() + 1e-3);
        assert!(!series.is_empty());
    }

    #[test]
    fn spectrum_record() {
        let res = run_experiment(&cfg("experiment=wr-dist n=2 drive=weak")).unwrap();
        let ExperimentResult::WrDist(s) = res else { panic!() };
        assert_eq!(s.eigenvalues.len(), 16);
        assert_eq!(s.wr.last().unwrap(), &(0.0, 1.0));
        assert!(s.max_real_part <= 1e-10);
    }
}
