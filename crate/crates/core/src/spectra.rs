//! Liouvillian spectra, spectral gap and the cumulative rate distribution.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::spectral_norm_estimate;
use crate::liouvillian::{restrict, Superoperator};
use crate::models::OpenModel;
use crate::scalar::{abs, Complex, Real};
use crate::steadystate::NULL_TOL;
use crate::symmetry::{BlockSelection, SymmetryDecomposition};

/// Default largest block for the dense eigensolver.
pub const SPECTRUM_CAP: usize = 2500;

/// All eigenvalues of one block.
#[derive(Clone, Debug)]
pub struct SpectrumResult<T: Real> {
    /// Sorted by decreasing real part, then increasing imaginary part.
    pub eigenvalues: Vec<Complex<T>>,
    pub label: String,
    /// Eigenvalues with `|λ| ≤ zero_threshold`.
    pub zero_modes: usize,
    /// `1e-10 · ‖L‖₂` (estimated).
    pub zero_threshold: T,
    /// Spectral gap, if there is a nonzero mode.
    pub gap: Option<T>,
}

impl<T: Real> SpectrumResult<T> {
    /// Builds a result from raw eigenvalues with an explicit zero threshold.
    pub fn from_eigenvalues(label: impl Into<String>, mut eigenvalues: Vec<Complex<T>>, zero_threshold: T) -> Self {
        eigenvalues.sort_by(|a, b| {
            b.re.partial_cmp(&a.re)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
        });
        let zero_modes = eigenvalues.iter().filter(|l| abs(**l) <= zero_threshold).count();
        let mut out = Self {
            eigenvalues,
            label: label.into(),
            zero_modes,
            zero_threshold,
            gap: None,
        };
        out.gap = spectral_gap(&out, zero_threshold).ok();
        out
    }

    /// Largest real part among the nonzero modes (`-∞` if there are none).
    pub fn max_nonzero_real_part(&self) -> T {
        self.eigenvalues
            .iter()
            .filter(|l| abs(**l) > self.zero_threshold)
            .map(|l| l.re)
            .fold(T::lit(f64::NEG_INFINITY), |a, b| a.max(b))
    }

    /// Largest real part of any eigenvalue.
    pub fn max_real_part(&self) -> T {
        self.eigenvalues.iter().map(|l| l.re).fold(T::lit(f64::NEG_INFINITY), |a, b| a.max(b))
    }

    /// Largest distance from `conj(λ)` to the nearest eigenvalue.
    pub fn conjugation_defect(&self) -> T {
        conjugation_defect(&self.eigenvalues)
    }
}

/// All eigenvalues of a block by dense Schur decomposition.
pub fn full_spectrum<T: Real>(sup: &Superoperator<T>, cap: usize) -> Result<SpectrumResult<T>> {
    if sup.dim() > cap {
        return Err(Error::DimensionOverCap { dim: sup.dim(), cap });
    }
    let norm = spectral_norm_estimate(sup.matrix(), 60);
    let threshold = T::lit(NULL_TOL) * norm.max(T::one());
    let eig: Vec<Complex<T>> = if sup.dim() == 0 {
        Vec::new()
    } else {
        let schur = sup.matrix().to_dense().schur();
        let (_, t) = schur.unpack();
        (0..sup.dim()).map(|i| t[(i, i)]).collect()
    };
    Ok(SpectrumResult::from_eigenvalues(sup.label(), eig, threshold))
}

/// Spectra of every diagonal block of `dec`, computed in parallel.
pub fn diagonal_block_spectra<T: Real>(
    model: &OpenModel<T>,
    dec: &SymmetryDecomposition<T>,
    cap: usize,
) -> Result<Vec<SpectrumResult<T>>> {
    (0..dec.len())
        .into_par_iter()
        .map(|a| full_spectrum(&restrict(model, dec, &BlockSelection::diagonal(dec, a))?, cap))
        .collect()
}

/// `R = min(-Re λ)` over eigenvalues with `|λ| > zero_tol`.
pub fn spectral_gap<T: Real>(spec: &SpectrumResult<T>, zero_tol: T) -> Result<T> {
    spec.eigenvalues
        .iter()
        .filter(|l| abs(**l) > zero_tol)
        .map(|l| -l.re)
        .fold(None, |acc: Option<T>, x| Some(acc.map_or(x, |a| a.min(x))))
        .ok_or(Error::NoNonzeroModes)
}

/// `W(r)`: the fraction of eigenvalues with `Re λ ≤ r`.
///
/// Zero modes count as `Re λ = 0`, and real parts in `(0, 1e-10]` (rounding
/// noise) are clamped to 0, so `W(0) = 1`.
pub fn cumulative_distribution<T: Real>(spec: &SpectrumResult<T>, r_grid: &[T]) -> Result<Vec<(T, T)>> {
    if r_grid.is_empty() {
        return Err(Error::Empty("r grid"));
    }
    if spec.eigenvalues.is_empty() {
        return Err(Error::Empty("spectrum"));
    }
    let noise = T::lit(NULL_TOL);
    let mut re: Vec<T> = spec
        .eigenvalues
        .iter()
        .map(|l| {
            if abs(*l) <= spec.zero_threshold || (l.re > T::zero() && l.re <= noise) {
                T::zero()
            } else {
                l.re
            }
        })
        .collect();
    re.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let total = T::lit(re.len() as f64);
    Ok(r_grid
        .iter()
        .map(|&r| {
            let count = re.partition_point(|x| *x <= r);
            (r, T::lit(count as f64) / total)
        })
        .collect())
}

/// `points` equally spaced values from the most negative real part to 0.
pub fn default_r_grid<T: Real>(spec: &SpectrumResult<T>, points: usize) -> Vec<T> {
    let lo = spec.eigenvalues.iter().map(|l| l.re).fold(T::zero(), |a, b| a.min(b));
    let points = points.max(2);
    (0..points)
        .map(|k| lo * T::lit(1.0 - k as f64 / (points - 1) as f64))
        .collect()
}

/// Largest distance from `conj(λ)` to the nearest element of `eigs`.
pub fn conjugation_defect<T: Real>(eigs: &[Complex<T>]) -> T {
    let mut sorted: Vec<Complex<T>> = eigs.to_vec();
    sorted.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal));
    let mut worst = T::zero();
    for l in eigs {
        let target = l.conj();
        let mut best = T::lit(f64::INFINITY);
        let start = sorted.partition_point(|x| x.re < target.re);
        // scan outwards while the real-part distance alone can still improve
        let mut i = start;
        while i < sorted.len() && sorted[i].re - target.re <= best {
            best = best.min(abs(sorted[i] - target));
            i += 1;
        }
        let mut i = start;
        while i > 0 && target.re - sorted[i - 1].re <= best {
            best = best.min(abs(sorted[i - 1] - target));
            i -= 1;
        }
        worst = worst.max(best);
    }
    worst
}
