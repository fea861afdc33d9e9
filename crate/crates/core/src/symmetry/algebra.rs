//! Dimension of the operator algebra generated by a set of operators.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::models::OpenModel;
use crate::operator::SparseOperator;
use crate::scalar::{cr, czero, Complex, Real};

/// Pivot below which a new product counts as linearly dependent.
pub const ALGEBRA_PIVOT: f64 = 1e-10;

/// Result of [`evans_algebra_closure`].
#[derive(Clone, Debug)]
pub struct AlgebraClosure<T: Real> {
    /// Dimension of the generated algebra.
    pub dim: usize,
    /// Hilbert dimension `N`.
    pub ambient: usize,
    /// Hilbert–Schmidt orthonormal basis of the algebra.
    pub basis: Vec<DMatrix<Complex<T>>>,
}

impl<T: Real> AlgebraClosure<T> {
    /// True if the algebra is all of `B(H)`, i.e. `dim = N²`.
    pub fn is_full(&self) -> bool {
        self.dim == self.ambient * self.ambient
    }
}

fn hs_dot<T: Real>(a: &DMatrix<Complex<T>>, b: &DMatrix<Complex<T>>) -> Complex<T> {
    a.iter().zip(b.iter()).fold(czero(), |s, (x, y)| s + x.conj() * y)
}

fn hs_norm<T: Real>(a: &DMatrix<Complex<T>>) -> T {
    a.iter().fold(T::zero(), |s, x| s + x.norm_sqr()).sqrt()
}

/// `{H, L_m, L_m†}` for a model.
pub fn evans_generators<T: Real>(model: &OpenModel<T>) -> Vec<SparseOperator<T>> {
    let mut g = vec![model.hamiltonian().clone()];
    for l in model.jumps() {
        g.push(l.clone());
        g.push(l.adjoint());
    }
    g
}

/// Dimension of the unital associative algebra generated by `generators`
/// and their adjoints.
///
/// The span is grown by left-multiplying the newest basis elements by each
/// generator and orthonormalizing (Hilbert–Schmidt, pivot `1e-10` relative
/// to the candidate norm) until no new direction appears. More than
/// `dim_cap` growth rounds is reported as [`Error::NoConvergence`].
pub fn evans_algebra_closure<T: Real>(generators: &[SparseOperator<T>], dim_cap: usize) -> Result<AlgebraClosure<T>> {
    let n = match generators.first() {
        Some(g) => g.nrows(),
        None => return Err(Error::Empty("generators")),
    };
    for g in generators {
        if g.nrows() != n || g.ncols() != n {
            return Err(Error::DimensionMismatch {
                left: g.nrows(),
                right: n,
            });
        }
    }
    let mut gens: Vec<SparseOperator<T>> = Vec::with_capacity(2 * generators.len());
    for g in generators {
        gens.push(g.clone());
        let a = g.adjoint();
        if !a.same_entries(g) {
            gens.push(a);
        }
    }
    let pivot = T::lit(ALGEBRA_PIVOT);
    let full = n * n;
    let mut basis: Vec<DMatrix<Complex<T>>> = Vec::new();
    let try_add = |basis: &mut Vec<DMatrix<Complex<T>>>, mut v: DMatrix<Complex<T>>| -> bool {
        let norm0 = hs_norm(&v);
        if norm0 <= T::zero() || basis.len() == full {
            return false;
        }
        for _ in 0..2 {
            for b in basis.iter() {
                let p = hs_dot(b, &v);
                v -= b * p;
            }
        }
        let norm = hs_norm(&v);
        if norm <= pivot * norm0 {
            return false;
        }
        v *= cr(T::one() / norm);
        basis.push(v);
        true
    };
    try_add(&mut basis, DMatrix::identity(n, n));
    let mut frontier: Vec<usize> = vec![0];
    let mut rounds = 0usize;
    while !frontier.is_empty() {
        if rounds >= dim_cap {
            return Err(Error::NoConvergence(format!(
                "algebra closure not stable after {rounds} rounds; partial dimension {}",
                basis.len()
            )));
        }
        rounds += 1;
        let mut next = Vec::new();
        for &f in &frontier {
            for g in &gens {
                let cand = g.mul_dense(&basis[f]);
                if try_add(&mut basis, cand) {
                    next.push(basis.len() - 1);
                }
            }
        }
        frontier = next;
    }
    Ok(AlgebraClosure {
        dim: basis.len(),
        ambient: n,
        basis,
    })
}
