//! CSV and JSON emission.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::trajectories::write_time_series_csv;

use super::config::ExperimentConfig;
use super::run::{ExperimentResult, NessRecord, SpectrumRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    /// `-J` against chain length.
    Fig1,
    /// Magnetization profiles.
    Fig2,
    /// Spectral gap against chain length.
    Fig3,
    /// Cumulative distribution `W(r)` of relaxation rates.
    Fig4,
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
        })
    }
}

/// One CSV field.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(x) if x.is_nan() => f.write_str("nan"),
            Cell::Num(x) => write!(f, "{x:.16e}"),
            Cell::Int(k) => write!(f, "{k}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// Column names plus rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    /// CSV body (column line and rows, no comment header).
    pub fn body(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }
}

fn num(x: f64) -> Cell {
    Cell::Num(x)
}

fn text(s: impl ToString) -> Cell {
    Cell::Text(s.to_string())
}

fn mismatch(result: &ExperimentResult, figure: Figure) -> Error {
    Error::InvalidParameter(format!("{figure} cannot be drawn from {} results", result.experiment()))
}

fn fig1_rows(t: &mut Table, r: &NessRecord) {
    let mut row = vec![Cell::Int(r.n), num(-r.current)];
    if t.columns.contains(&"stderr") {
        row.push(num(r.current_stderr.unwrap_or(f64::NAN)));
    }
    row.push(text(r.sector));
    t.rows.push(row);
}

fn fig2_rows(t: &mut Table, r: &NessRecord) {
    for (i, m) in r.magnetizations.iter().enumerate() {
        let x = i as f64 / (r.n - 1) as f64;
        let mut row = vec![Cell::Int(i + 1), num(x), num(*m)];
        if t.columns.contains(&"stderr") {
            row.push(num(r.magnetizations_stderr.as_ref().map_or(f64::NAN, |s| s[i])));
        }
        row.extend([Cell::Int(r.n), text(r.sector)]);
        t.rows.push(row);
    }
}

fn fig4_rows(t: &mut Table, s: &SpectrumRecord) {
    for (r, w) in &s.wr {
        t.rows.push(vec![num(*r), num(*w), text(s.sector)]);
    }
}

/// Figure data from matching results.
///
/// fig1: `(n, -J, sector)`; fig2: `(site, x = (site-1)/(n-1), M, n, sector)`;
/// fig3: `(n, R, sector)`, skipping blocks without nonzero modes; fig4:
/// `(r, W, sector)`. Sampled results add a `stderr` column to fig1/fig2.
pub fn emit_figure_data(result: &ExperimentResult, figure: Figure) -> Result<Table> {
    use ExperimentResult as R;
    let sampled = matches!(result, R::Trajectory { .. });
    match figure {
        Figure::Fig1 => {
            let mut t = Table::new(if sampled { &["n", "minus_J", "stderr", "sector"] } else { &["n", "minus_J", "sector"] });
            match result {
                R::Ness(r) | R::Trajectory { ness: r, .. } => fig1_rows(&mut t, r),
                R::ScanN(rows) => rows.iter().for_each(|row| fig1_rows(&mut t, &row.ness)),
                _ => return Err(mismatch(result, figure)),
            }
            Ok(t)
        }
        Figure::Fig2 => {
            let mut t = Table::new(if sampled {
                &["site", "x", "M", "stderr", "n", "sector"]
            } else {
                &["site", "x", "M", "n", "sector"]
            });
            match result {
                R::Ness(r) | R::Trajectory { ness: r, .. } => fig2_rows(&mut t, r),
                R::ScanN(rows) => rows.iter().for_each(|row| fig2_rows(&mut t, &row.ness)),
                _ => return Err(mismatch(result, figure)),
            }
            Ok(t)
        }
        Figure::Fig3 => {
            let mut t = Table::new(&["n", "R", "sector"]);
            match result {
                R::Spectrum(s) | R::WrDist(s) => {
                    if let Some(g) = s.gap {
                        t.rows.push(vec![Cell::Int(s.n), num(g), text(s.sector)]);
                    }
                }
                R::ScanN(rows) => {
                    for row in rows {
                        if let Some(g) = row.gap {
                            t.rows.push(vec![Cell::Int(row.ness.n), num(g), text(row.ness.sector)]);
                        }
                    }
                }
                _ => return Err(mismatch(result, figure)),
            }
            Ok(t)
        }
        Figure::Fig4 => {
            let mut t = Table::new(&["r", "W", "sector"]);
            match result {
                R::Spectrum(s) | R::WrDist(s) => fig4_rows(&mut t, s),
                _ => return Err(mismatch(result, figure)),
            }
            Ok(t)
        }
    }
}

fn current_table(r: &NessRecord) -> Table {
    let sampled = r.currents_stderr.is_some();
    let mut t = Table::new(if sampled { &["bond", "J", "stderr"] } else { &["bond", "J"] });
    for (i, j) in r.currents.iter().enumerate() {
        let mut row = vec![Cell::Int(i + 1), num(*j)];
        if let Some(se) = &r.currents_stderr {
            row.push(num(se[i]));
        }
        t.rows.push(row);
    }
    t
}

fn profile_table(r: &NessRecord) -> Table {
    let sampled = r.magnetizations_stderr.is_some();
    let mut t = Table::new(if sampled { &["site", "M", "stderr"] } else { &["site", "M"] });
    for (i, m) in r.magnetizations.iter().enumerate() {
        let mut row = vec![Cell::Int(i + 1), num(*m)];
        if let Some(se) = &r.magnetizations_stderr {
            row.push(num(se[i]));
        }
        t.rows.push(row);
    }
    t
}

fn spectrum_table(s: &SpectrumRecord) -> Table {
    let mut t = Table::new(&["index", "re", "im"]);
    for (k, l) in s.eigenvalues.iter().enumerate() {
        t.rows.push(vec![Cell::Int(k), num(l.re), num(l.im)]);
    }
    t
}

fn wr_table(s: &SpectrumRecord) -> Table {
    let mut t = Table::new(&["r", "W"]);
    for (r, w) in &s.wr {
        t.rows.push(vec![num(*r), num(*w)]);
    }
    t
}

fn scan_table(rows: &[super::run::ScanRow]) -> Table {
    let mut t = Table::new(&["n", "mu", "J", "minus_J", "gap", "spread", "residual", "null_dim", "status", "sector"]);
    for row in rows {
        let r = &row.ness;
        t.rows.push(vec![
            Cell::Int(r.n),
            num(r.mu),
            num(r.current),
            num(-r.current),
            num(row.gap.unwrap_or(f64::NAN)),
            num(r.spread),
            num(r.residual),
            Cell::Int(r.null_dim),
            text(&r.status),
            text(r.sector),
        ]);
    }
    t
}

fn jnum(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn ness_json(r: &NessRecord) -> Value {
    json!({
        "n": r.n,
        "mu": r.mu,
        "sector": r.sector.to_string(),
        "status": r.status,
        "method": r.method,
        "block_dim": r.block_dim,
        "null_dim": r.null_dim,
        "residual": jnum(r.residual),
        "min_eigenvalue": jnum(r.min_eigenvalue),
        "trace_error": jnum(r.trace_error),
        "J": jnum(r.current),
        "J_stderr": r.current_stderr.map(jnum),
        "bond_spread": jnum(r.spread),
        "continuity_residual": jnum(r.continuity),
    })
}

fn spectrum_json(s: &SpectrumRecord) -> Value {
    json!({
        "n": s.n,
        "mu": s.mu,
        "sector": s.sector.to_string(),
        "block_dim": s.block_dim,
        "eigenvalues": s.eigenvalues.len(),
        "zero_modes": s.zero_modes,
        "gap": s.gap.map(jnum),
        "max_real_part": jnum(s.max_real_part),
        "conjugation_defect": jnum(s.conjugation_defect),
    })
}

/// Summary of a run as JSON, including the resolved config.
pub fn summary_json(cfg: &ExperimentConfig, result: &ExperimentResult) -> Value {
    use ExperimentResult as R;
    let config: serde_json::Map<String, Value> = cfg.resolved().into_iter().map(|(k, v)| (k, Value::String(v))).collect();
    let body = match result {
        R::Ness(r) => ness_json(r),
        R::Trajectory { ness, exact, .. } => {
            let mut v = ness_json(ness);
            if let Some(e) = exact {
                v["exact_J"] = jnum(e.current);
                let se = ness.current_stderr.unwrap_or(f64::NAN);
                v["sigmas_from_exact"] = jnum((ness.current - e.current).abs() / se);
            }
            v
        }
        R::Spectrum(s) | R::WrDist(s) => spectrum_json(s),
        R::ScanN(rows) | R::ScanMu(rows) => json!(rows
            .iter()
            .map(|r| {
                let mut v = ness_json(&r.ness);
                v["gap"] = r.gap.map_or(Value::Null, jnum);
                v
            })
            .collect::<Vec<_>>()),
        R::Symmetry(rep) => json!({
            "n": rep.n,
            "drive": rep.drive.to_string(),
            "classification": rep.classification,
            "quotient_blocks": rep.quotient_blocks.iter().map(|b| json!({
                "label": b.label,
                "eigenvalue": [jnum(b.eigenvalue.re), jnum(b.eigenvalue.im)],
                "dim": b.dim,
            })).collect::<Vec<_>>(),
            "quotient_dim_total": rep.quotient_blocks.iter().map(|b| b.dim).sum::<usize>(),
            "algebra_dim": rep.algebra_dim,
            "full_null_dim": rep.full_null_dim,
        }),
    };
    json!({
        "config": config,
        "experiment": result.experiment().to_string(),
        "flagged": result.flagged(),
        "result": body,
    })
}

fn write_table(dir: &Path, name: &str, header: &str, t: &Table) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, format!("{header}{}", t.body()))?;
    Ok(path)
}

/// Writes every output file of `result` into `dir`, returning the paths.
pub fn write_outputs(cfg: &ExperimentConfig, result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    use ExperimentResult as R;
    fs::create_dir_all(dir)?;
    let header = cfg.header();
    let mut files = Vec::new();
    let mut table = |name: &str, t: Table| -> Result<()> {
        files.push(write_table(dir, name, &header, &t)?);
        Ok(())
    };
    match result {
        R::Ness(r) | R::Trajectory { ness: r, .. } => {
            table("current.csv", current_table(r))?;
            table("profile.csv", profile_table(r))?;
            table("fig1.csv", emit_figure_data(result, Figure::Fig1)?)?;
            table("fig2.csv", emit_figure_data(result, Figure::Fig2)?)?;
        }
        R::Spectrum(s) | R::WrDist(s) => {
            table("spectrum.csv", spectrum_table(s))?;
            table("wr.csv", wr_table(s))?;
            table("fig3.csv", emit_figure_data(result, Figure::Fig3)?)?;
            table("fig4.csv", emit_figure_data(result, Figure::Fig4)?)?;
        }
        R::ScanN(rows) => {
            table("scan.csv", scan_table(rows))?;
            table("fig1.csv", emit_figure_data(result, Figure::Fig1)?)?;
            table("fig2.csv", emit_figure_data(result, Figure::Fig2)?)?;
            table("fig3.csv", emit_figure_data(result, Figure::Fig3)?)?;
        }
        R::ScanMu(rows) => {
            table("scan.csv", scan_table(rows))?;
        }
        R::Symmetry(rep) => {
            let mut blocks = Table::new(&["block", "eigenvalue_re", "eigenvalue_im", "dim"]);
            for b in &rep.quotient_blocks {
                blocks.rows.push(vec![text(&b.label), num(b.eigenvalue.re), num(b.eigenvalue.im), Cell::Int(b.dim)]);
            }
            table("blocks.csv", blocks)?;
            if !rep.sectors.is_empty() {
                let mut sectors = Table::new(&["sector", "dim", "block_dim", "null_dim"]);
                for s in &rep.sectors {
                    sectors.rows.push(vec![
                        text(&s.label),
                        Cell::Int(s.dim),
                        Cell::Int(s.block_dim),
                        s.null_dim.map_or(text("nan"), Cell::Int),
                    ]);
                }
                table("sectors.csv", sectors)?;
            }
        }
    }
    if let R::Trajectory { series, .. } = result {
        let path = dir.join("timeseries.csv");
        let mut buf = header.clone().into_bytes();
        write_time_series_csv(&mut buf, series)?;
        fs::write(&path, buf)?;
        files.push(path);
    }
    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary_json(cfg, result)).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(&path, text + "\n")?;
    files.push(path);
    Ok(files)
}

/// Strips `#` comment lines, leaving the CSV body.
pub fn csv_body(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}
