use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{abs, cone, cr, czero, Complex, Real};

use super::sparse::SparseOperator;

/// Dense density operator on the full `2^n`-dimensional space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real> {
    mat: DMatrix<Complex<T>>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(mat: DMatrix<Complex<T>>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch {
                left: mat.nrows(),
                right: mat.ncols(),
            });
        }
        Ok(Self { mat })
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn from_pure(psi: &[Complex<T>]) -> Result<Self> {
        let norm2 = psi.iter().fold(T::zero(), |a, v| a + v.norm_sqr());
        if norm2 <= T::zero() {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        let d = psi.len();
        let mat = DMatrix::from_fn(d, d, |r, c| psi[r] * psi[c].conj() / cr(norm2));
        Ok(Self { mat })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = cr(T::one() / T::lit(dim as f64));
        Self {
            mat: DMatrix::from_fn(dim, dim, |r, c| if r == c { w } else { czero() }),
        }
    }

    /// Projector onto the computational basis state `index`.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut mat = DMatrix::from_element(dim, dim, czero());
        mat[(index, index)] = cone();
        Self { mat }
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex<T>> {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> Complex<T> {
        self.mat.trace()
    }

    pub fn is_normalized(&self, tol: T) -> bool {
        abs(self.trace() - cone()) <= tol
    }

    /// Max entrywise `|ρ - ρ†|`.
    pub fn hermiticity_defect(&self) -> T {
        let d = self.dim();
        let mut worst = T::zero();
        for r in 0..d {
            for c in r..d {
                worst = worst.max(abs(self.mat[(r, c)] - self.mat[(c, r)].conj()));
            }
        }
        worst
    }

    /// `(ρ + ρ†)/2`.
    pub fn hermitized(&self) -> Self {
        let half = cr(T::lit(0.5));
        let mat = (&self.mat + self.mat.adjoint()) * half;
        Self { mat }
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if abs(t) == T::zero() {
            return Err(Error::InvalidParameter("cannot normalize a traceless operator".into()));
        }
        Ok(Self {
            mat: &self.mat / t,
        })
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<T> {
        let mut ev: Vec<T> = self.hermitized().mat.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues().first().copied().unwrap_or_else(T::zero)
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> T {
        (&self.mat * &self.mat).trace().re
    }

    /// `⟨ψ|ρ|ψ⟩` for a normalized `ψ`.
    pub fn overlap_with_pure(&self, psi: &[Complex<T>]) -> Complex<T> {
        let d = self.dim();
        let mut s = czero();
        for r in 0..d {
            if psi[r] == czero() {
                continue;
            }
            for c in 0..d {
                s += psi[r].conj() * self.mat[(r, c)] * psi[c];
            }
        }
        s
    }

    /// `U ρ U†`.
    pub fn conjugated_by(&self, u: &SparseOperator<T>) -> Result<Self> {
        if u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: u.ncols(),
                right: self.dim(),
            });
        }
        let left = u.mul_dense(&self.mat);
        Ok(Self {
            mat: u.adjoint().dense_mul(&left),
        })
    }

    /// Affine combination `Σ w_k ρ_k`.
    pub fn combine(parts: &[(T, &DensityMatrix<T>)]) -> Result<Self> {
        let first = parts.first().ok_or(Error::Empty("combination"))?;
        let d = first.1.dim();
        let mut mat = DMatrix::from_element(d, d, czero());
        for (w, rho) in parts {
            if rho.dim() != d {
                return Err(Error::DimensionMismatch {
                    left: d,
                    right: rho.dim(),
                });
            }
            mat += &rho.mat * cr(*w);
        }
        Ok(Self { mat })
    }
}

/// `tr(obs · ρ)`.
pub fn expectation<T: Real>(obs: &SparseOperator<T>, rho: &DensityMatrix<T>) -> Result<Complex<T>> {
    if obs.nrows() != rho.dim() || obs.ncols() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: obs.nrows(),
            right: rho.dim(),
        });
    }
    if !rho.is_normalized(T::lit(1e-8)) {
        log::warn!("expectation taken on a non-normalized density matrix (trace {})", rho.trace());
    }
    let m = rho.matrix();
    Ok(obs.iter().fold(czero(), |acc, (r, c, v)| acc + v * m[(c, r)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{site_operator, SiteKind};
    use crate::scalar::c;

    #[test]
    fn expectation_examples() {
        let n = 3;
        let dim = 1 << n;
        let id = SparseOperator::<f64>::identity(dim);
        let mixed = DensityMatrix::maximally_mixed(dim);
        assert!((expectation(&id, &mixed).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        let z1 = site_operator(SiteKind::Z, 1, n).unwrap();
        assert!(expectation(&z1, &mixed).unwrap().norm() < 1e-15);
        let up = DensityMatrix::basis_state(dim, 0);
        assert_eq!(expectation(&z1, &up).unwrap(), c(1.0, 0.0));
        assert!(expectation(&SparseOperator::identity(4), &up).is_err());
    }

    #[test]
    fn pure_state_properties() {
        let s = 0.5f64.sqrt();
        let psi = vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-s, 0.0)];
        let rho: DensityMatrix<f64> = DensityMatrix::from_pure(&psi).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-14);
        assert!((rho.overlap_with_pure(&psi).re - 1.0).abs() < 1e-14);
        let ev: Vec<f64> = rho.eigenvalues();
        assert!(ev[0].abs() < 1e-14 && (ev[3] - 1.0).abs() < 1e-14);
        assert!(rho.hermiticity_defect() < 1e-16);
    }
}
