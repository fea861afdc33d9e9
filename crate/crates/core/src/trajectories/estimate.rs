//! Ensemble statistics over trajectories.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::OpenModel;
use crate::scalar::Real;

use super::unravel::{TrajectoryConfig, TrajectoryEngine, TrajectorySeries};

/// Mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T: Real> {
    pub mean: T,
    pub stderr: T,
}

impl<T: Real> Estimate<T> {
    /// Sample mean and standard error of the mean (N-1 variance).
    pub fn from_samples(xs: &[T]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                mean: T::zero(),
                stderr: T::zero(),
            };
        }
        let nf = T::lit(n as f64);
        let mean = xs.iter().fold(T::zero(), |a, x| a + *x) / nf;
        if n < 2 {
            return Self { mean, stderr: T::zero() };
        }
        let var = xs.iter().fold(T::zero(), |a, x| a + (*x - mean) * (*x - mean)) / T::lit((n - 1) as f64);
        Self {
            mean,
            stderr: (var / nf).sqrt(),
        }
    }

    /// Distance to `target` in units of the standard error.
    pub fn sigmas_from(&self, target: T) -> T {
        let d = (self.mean - target).abs();
        if self.stderr > T::zero() {
            d / self.stderr
        } else if d == T::zero() {
            T::zero()
        } else {
            T::lit(f64::INFINITY)
        }
    }
}

/// Ensemble mean at one sampling time.
#[derive(Clone, Debug, PartialEq)]
pub struct TimePoint<T: Real> {
    pub time: T,
    /// `J`, `J_i` or `M_i`.
    pub observable: String,
    pub estimate: Estimate<T>,
}

#[derive(Clone, Debug)]
pub struct TrajectoryEstimate<T: Real> {
    /// Bond-averaged current.
    pub current: Estimate<T>,
    pub bond_currents: Vec<Estimate<T>>,
    pub magnetizations: Vec<Estimate<T>>,
    /// `max_i J_i - min_i J_i` over the bond means.
    pub spread: T,
    /// `sqrt(mean_i se_i^2)` over bonds.
    pub pooled_stderr: T,
    pub converged: bool,
    pub n_traj: usize,
    pub total_jumps: usize,
    pub refined_steps: usize,
    pub max_leakage: T,
    pub series: Vec<TimePoint<T>>,
}

fn time_mean<T: Real>(rows: &[Vec<T>], i: usize) -> T {
    rows.iter().fold(T::zero(), |a, r| a + r[i]) / T::lit(rows.len() as f64)
}

fn bond_average<T: Real>(row: &[T]) -> T {
    row.iter().fold(T::zero(), |a, x| a + *x) / T::lit(row.len().max(1) as f64)
}

/// Runs `config.n_traj` trajectories in parallel and averages over time and
/// over the ensemble.
pub fn estimate_ness_observables<T: Real>(model: &OpenModel<T>, config: &TrajectoryConfig<T>) -> Result<TrajectoryEstimate<T>> {
    let engine = TrajectoryEngine::new(model, config)?;
    let runs: Vec<TrajectorySeries<T>> = (0..config.n_traj)
        .into_par_iter()
        .map(|k| engine.run(k))
        .collect::<Result<_>>()?;
    Ok(summarize(&runs, model.n()))
}

fn summarize<T: Real>(runs: &[TrajectorySeries<T>], n: usize) -> TrajectoryEstimate<T> {
    let bonds = n - 1;
    let per_bond: Vec<Estimate<T>> = (0..bonds)
        .map(|i| Estimate::from_samples(&runs.iter().map(|r| time_mean(&r.currents, i)).collect::<Vec<_>>()))
        .collect();
    let per_site: Vec<Estimate<T>> = (0..n)
        .map(|i| Estimate::from_samples(&runs.iter().map(|r| time_mean(&r.magnetizations, i)).collect::<Vec<_>>()))
        .collect();
    let averaged: Vec<T> = runs
        .iter()
        .map(|r| r.currents.iter().fold(T::zero(), |a, row| a + bond_average(row)) / T::lit(r.currents.len() as f64))
        .collect();
    let current = Estimate::from_samples(&averaged);
    let (lo, hi) = per_bond.iter().fold((T::lit(f64::INFINITY), T::lit(f64::NEG_INFINITY)), |(lo, hi), e| (lo.min(e.mean), hi.max(e.mean)));
    let spread = if bonds > 0 { hi - lo } else { T::zero() };
    let pooled_stderr = if bonds > 0 {
        (per_bond.iter().fold(T::zero(), |a, e| a + e.stderr * e.stderr) / T::lit(bonds as f64)).sqrt()
    } else {
        T::zero()
    };
    let converged = spread <= T::lit(3.0) * pooled_stderr;

    let mut series = Vec::new();
    if let Some(first) = runs.first() {
        for (k, t) in first.times.iter().enumerate() {
            let at = |f: &dyn Fn(&TrajectorySeries<T>) -> T| Estimate::from_samples(&runs.iter().map(f).collect::<Vec<_>>());
            series.push(TimePoint {
                time: *t,
                observable: "J".into(),
                estimate: at(&|r| bond_average(&r.currents[k])),
            });
            for i in 0..bonds {
                series.push(TimePoint {
                    time: *t,
                    observable: format!("J_{}", i + 1),
                    estimate: at(&|r| r.currents[k][i]),
                });
            }
            for i in 0..n {
                series.push(TimePoint {
                    time: *t,
                    observable: format!("M_{}", i + 1),
                    estimate: at(&|r| r.magnetizations[k][i]),
                });
            }
        }
    }
    TrajectoryEstimate {
        current,
        bond_currents: per_bond,
        magnetizations: per_site,
        spread,
        pooled_stderr,
        converged,
        n_traj: runs.len(),
        total_jumps: runs.iter().map(|r| r.jumps).sum(),
        refined_steps: runs.iter().map(|r| r.refined_steps).sum(),
        max_leakage: runs.iter().fold(T::zero(), |a, r| a.max(r.max_leakage)),
        series,
    }
}

/// Writes `time,observable,mean,stderr` rows.
pub fn write_time_series_csv<T: Real, W: Write>(out: &mut W, series: &[TimePoint<T>]) -> Result<()> {
    writeln!(out, "time,observable,mean,stderr")?;
    for p in series {
        writeln!(
            out,
            "{:.16e},{},{:.16e},{:.16e}",
            p.time.to_f64_lossy(),
            p.observable,
            p.estimate.mean.to_f64_lossy(),
            p.estimate.stderr.to_f64_lossy()
        )
        .map_err(Error::from)?;
    }
    Ok(())
}
