//! Small dense and Krylov helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operator::SparseOperator;
use crate::scalar::{abs, cr, czero, Complex, Real};

/// Right null space of a square matrix from its SVD.
#[derive(Clone, Debug)]
pub struct NullSpace<T: Real> {
    /// Orthonormal null vectors.
    pub vectors: Vec<DVector<Complex<T>>>,
    /// Largest singular value.
    pub sigma_max: T,
    /// Smallest singular value above the cutoff (0 if there is none).
    pub sigma_gap: T,
}

/// Singular vectors with `σ < rel_tol · σ_max`.
pub fn null_space<T: Real>(a: &DMatrix<Complex<T>>, rel_tol: T) -> NullSpace<T> {
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let sigma_max = svd.singular_values.iter().copied().fold(T::zero(), |m, s| m.max(s));
    let cut = rel_tol * sigma_max;
    let mut vectors = Vec::new();
    let mut sigma_gap = T::zero();
    let mut first = true;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s < cut || sigma_max <= T::zero() {
            vectors.push(v_t.row(k).adjoint());
        } else if first || s < sigma_gap {
            sigma_gap = s;
            first = false;
        }
    }
    NullSpace {
        vectors,
        sigma_max,
        sigma_gap,
    }
}

/// Estimate of `‖A‖₂` by power iteration on `A†A`.
pub fn spectral_norm_estimate<T: Real>(a: &SparseOperator<T>, iterations: usize) -> T {
    let n = a.ncols();
    if n == 0 || a.is_zero() {
        return T::zero();
    }
    let mut x: Vec<Complex<T>> = (0..n)
        .map(|i| Complex::new(T::one(), T::lit(((i * 7919) % 13) as f64 / 13.0)))
        .collect();
    let mut est = T::zero();
    for _ in 0..iterations {
        let nx = norm(&x);
        if nx <= T::zero() {
            break;
        }
        for v in x.iter_mut() {
            *v /= cr(nx);
        }
        let y = a.matvec(&x);
        est = norm(&y);
        x = a.adjoint_matvec(&y);
    }
    est
}

pub(crate) fn norm<T: Real>(x: &[Complex<T>]) -> T {
    x.iter().fold(T::zero(), |a, v| a + v.norm_sqr()).sqrt()
}

pub(crate) fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(czero(), |s, (x, y)| s + x.conj() * y)
}

/// Outcome of [`gmres`].
#[derive(Clone, Debug)]
pub struct GmresOutcome<T: Real> {
    pub x: Vec<Complex<T>>,
    /// Final relative residual `‖b - A x‖ / ‖b‖`.
    pub residual: T,
    pub iterations: usize,
}

/// Restarted GMRES with right preconditioner `precond` (applied as `x = P y`).
pub fn gmres<T: Real>(
    apply: impl Fn(&[Complex<T>]) -> Vec<Complex<T>>,
    precond: impl Fn(&[Complex<T>]) -> Vec<Complex<T>>,
    b: &[Complex<T>],
    tol: T,
    restart: usize,
    max_iter: usize,
) -> Result<GmresOutcome<T>> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![czero(); n];
    if bnorm <= T::zero() {
        return Ok(GmresOutcome {
            x,
            residual: T::zero(),
            iterations: 0,
        });
    }
    let mut total = 0;
    loop {
        let ax = apply(&x);
        let r: Vec<Complex<T>> = b.iter().zip(&ax).map(|(p, q)| *p - *q).collect();
        let beta = norm(&r);
        if beta / bnorm <= tol {
            return Ok(GmresOutcome {
                x,
                residual: beta / bnorm,
                iterations: total,
            });
        }
        if total >= max_iter {
            return Err(Error::NoConvergence(format!(
                "GMRES residual {:e} after {total} iterations",
                (beta / bnorm).to_f64_lossy()
            )));
        }
        let m = restart.min(max_iter - total).max(1);
        let mut basis: Vec<Vec<Complex<T>>> = vec![r.iter().map(|v| *v / cr(beta)).collect()];
        let mut h = DMatrix::from_element(m + 1, m, czero::<T>());
        let mut cs: Vec<Complex<T>> = Vec::with_capacity(m);
        let mut sn: Vec<Complex<T>> = Vec::with_capacity(m);
        let mut g = vec![czero::<T>(); m + 1];
        g[0] = cr(beta);
        let mut k_done = 0;
        for k in 0..m {
            let mut w = apply(&precond(&basis[k]));
            for (j, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                h[(j, k)] = hij;
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= hij * *vi;
                }
            }
            let hn = norm(&w);
            h[(k + 1, k)] = cr(hn);
            for j in 0..k {
                let (a, b2) = (h[(j, k)], h[(j + 1, k)]);
                h[(j, k)] = cs[j].conj() * a + sn[j].conj() * b2;
                h[(j + 1, k)] = -sn[j] * a + cs[j] * b2;
            }
            let (a, b2) = (h[(k, k)], h[(k + 1, k)]);
            let den = (a.norm_sqr() + b2.norm_sqr()).sqrt();
            let (c, s) = if den > T::zero() {
                (a / cr(den), b2 / cr(den))
            } else {
                (cr(T::one()), czero())
            };
            cs.push(c);
            sn.push(s);
            h[(k, k)] = c.conj() * a + s.conj() * b2;
            h[(k + 1, k)] = czero();
            g[k + 1] = -s * g[k];
            g[k] = c.conj() * g[k];
            total += 1;
            k_done = k + 1;
            if abs(g[k + 1]) / bnorm <= tol || hn <= T::zero() {
                break;
            }
            basis.push(w.iter().map(|v| *v / cr(hn)).collect());
        }
        let mut y = vec![czero::<T>(); k_done];
        for i in (0..k_done).rev() {
            let mut s = g[i];
            for j in i + 1..k_done {
                s -= h[(i, j)] * y[j];
            }
            y[i] = s / h[(i, i)];
        }
        let mut z = vec![czero::<T>(); n];
        for (j, yj) in y.iter().enumerate() {
            for (zi, vi) in z.iter_mut().zip(&basis[j]) {
                *zi += *yj * *vi;
            }
        }
        for (xi, pi) in x.iter_mut().zip(precond(&z)) {
            *xi += pi;
        }
    }
}

/// Incomplete LU factorization with the sparsity pattern of the matrix.
#[derive(Clone, Debug)]
pub struct Ilu0<T: Real> {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex<T>>,
    diag: Vec<usize>,
}

impl<T: Real> Ilu0<T> {
    /// Fails if a pivot vanishes or the diagonal is not stored.
    pub fn new(a: &SparseOperator<T>) -> Result<Self> {
        let (rp, ci, vals) = a.csr();
        let (row_ptr, col_idx, mut values) = (rp.to_vec(), ci.to_vec(), vals.to_vec());
        let n = a.nrows();
        let mut diag = vec![usize::MAX; n];
        for i in 0..n {
            for p in row_ptr[i]..row_ptr[i + 1] {
                if col_idx[p] == i {
                    diag[i] = p;
                }
            }
            if diag[i] == usize::MAX {
                return Err(Error::InvalidParameter(format!("ILU(0): no diagonal entry in row {i}")));
            }
        }
        for i in 0..n {
            let (start, end) = (row_ptr[i], row_ptr[i + 1]);
            for p in start..end {
                let k = col_idx[p];
                if k >= i {
                    break;
                }
                let pivot = values[diag[k]];
                if pivot.norm_sqr() == T::zero() {
                    return Err(Error::InvalidParameter(format!("ILU(0): zero pivot in row {k}")));
                }
                let lik = values[p] / pivot;
                values[p] = lik;
                // a_ij -= l_ik u_kj for j > k present in both rows
                let mut q = diag[k] + 1;
                let mut r = p + 1;
                while q < row_ptr[k + 1] && r < end {
                    match col_idx[q].cmp(&col_idx[r]) {
                        std::cmp::Ordering::Less => q += 1,
                        std::cmp::Ordering::Greater => r += 1,
                        std::cmp::Ordering::Equal => {
                            let u = values[q];
                            values[r] -= lik * u;
                            q += 1;
                            r += 1;
                        }
                    }
                }
            }
            if values[diag[i]].norm_sqr() == T::zero() {
                return Err(Error::InvalidParameter(format!("ILU(0): zero pivot in row {i}")));
            }
        }
        Ok(Self {
            row_ptr,
            col_idx,
            values,
            diag,
        })
    }

    /// `(LU)⁻¹ x`.
    pub fn solve(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.diag.len();
        let mut y = x.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for p in self.row_ptr[i]..self.diag[i] {
                s -= self.values[p] * y[self.col_idx[p]];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for p in self.diag[i] + 1..self.row_ptr[i + 1] {
                s -= self.values[p] * y[self.col_idx[p]];
            }
            y[i] = s / self.values[self.diag[i]];
        }
        y
    }
}

/// Ascending eigenvalues and eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigen<T: Real>(m: &DMatrix<Complex<T>>) -> (Vec<T>, DMatrix<Complex<T>>) {
    let h = (m + m.adjoint()) * cr(T::lit(0.5));
    let eig = h.symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m.nrows(), idx.len(), |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}
