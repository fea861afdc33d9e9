//! Weak/strong classification of a candidate symmetry of an open model.

use std::fmt;

use crate::error::{Error, Result};
use crate::liouvillian::{assemble_liouvillian, conjugation_superop};
use crate::models::OpenModel;
use crate::operator::{hs_inner, SparseOperator};
use crate::scalar::{abs, Real};

/// Largest chain for which the superoperator commutator fallback is tried.
pub const SUPEROP_FALLBACK_MAX_SITES: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryKind {
    /// `S` commutes with `H` and every `L_m`.
    Strong,
    /// `x ↦ S x S†` commutes with the generator.
    Weak,
    None,
}

impl fmt::Display for SymmetryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymmetryKind::Strong => "strong",
            SymmetryKind::Weak => "weak",
            SymmetryKind::None => "none",
        })
    }
}

fn commutes<T: Real>(s: &SparseOperator<T>, a: &SparseOperator<T>, tol: T) -> Result<bool> {
    let norm = s.commutator(a)?.frobenius_norm();
    Ok(norm <= tol * a.frobenius_norm().max(T::one()))
}

/// True if `S L_m S†` equals a phase times a distinct `L_k` for every `m`.
fn permutes_jumps<T: Real>(s: &SparseOperator<T>, jumps: &[SparseOperator<T>], tol: T) -> Result<bool> {
    let sd = s.adjoint();
    let mut used = vec![false; jumps.len()];
    for l in jumps {
        let y = s.matmul(l)?.matmul(&sd)?;
        let ny = y.frobenius_norm();
        let scale = tol * ny.max(T::one());
        let mut found = false;
        for (k, lk) in jumps.iter().enumerate() {
            if used[k] {
                continue;
            }
            let nk = lk.frobenius_norm();
            if nk <= T::zero() {
                if ny <= scale {
                    used[k] = true;
                    found = true;
                    break;
                }
                continue;
            }
            let coef = hs_inner(lk, &y)? / (nk * nk);
            if (abs(coef) - T::one()).abs() > tol {
                continue;
            }
            if y.minus(&lk.scale(coef))?.frobenius_norm() <= scale {
                used[k] = true;
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Classifies `s` as a strong, weak or no symmetry of `model`.
///
/// Strong: `[S, H] = 0` and `[S, L_m] = 0` for all `m`. Weak: `[S, H] = 0`
/// and conjugation by `S` permutes the jumps up to phases, or (for at most
/// six sites) the assembled generator commutes with `S ⊗ S̄`. Commutator
/// norms are Frobenius norms relative to `max(1, ‖A‖)`.
pub fn classify_symmetry<T: Real>(model: &OpenModel<T>, s: &SparseOperator<T>, tol: T) -> Result<SymmetryKind> {
    if s.nrows() != model.dim() || s.ncols() != model.dim() {
        return Err(Error::DimensionMismatch {
            left: s.nrows(),
            right: model.dim(),
        });
    }
    let defect = s.unitarity_defect();
    if defect > tol {
        return Err(Error::NotUnitary {
            deviation: defect.to_f64_lossy(),
        });
    }
    let h_ok = commutes(s, model.hamiltonian(), tol)?;
    if h_ok {
        let mut strong = true;
        for l in model.jumps() {
            if !commutes(s, l, tol)? {
                strong = false;
                break;
            }
        }
        if strong {
            return Ok(SymmetryKind::Strong);
        }
        if permutes_jumps(s, model.jumps(), tol)? {
            return Ok(SymmetryKind::Weak);
        }
    }
    if model.n() <= SUPEROP_FALLBACK_MAX_SITES {
        let l = assemble_liouvillian(model)?;
        let sh = conjugation_superop(s);
        let lm = l.matrix();
        let comm = lm.matmul(&sh)?.minus(&sh.matmul(lm)?)?.frobenius_norm();
        if comm <= tol * lm.frobenius_norm().max(T::one()) {
            return Ok(SymmetryKind::Weak);
        }
    }
    Ok(SymmetryKind::None)
}
