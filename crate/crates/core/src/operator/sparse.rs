use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{abs, cone, cr, czero, Complex, Real};

/// Entries with modulus at or below this value are dropped on construction.
pub const PRUNE_EPS: f64 = 1e-14;

/// Complex sparse matrix in compressed-row form.
///
/// Rows are sorted by column, carry no duplicates and no entries below
/// [`PRUNE_EPS`]. Most operators are square (`2^n × 2^n`), but sector
/// isometries are rectangular, so both extents are stored.
#[derive(Clone, PartialEq)]
pub struct SparseOperator<T: Real> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex<T>>,
}

impl<T: Real> fmt::Debug for SparseOperator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparseOperator({}x{}, nnz={})", self.nrows, self.ncols, self.nnz())?;
        if self.nnz() <= 32 {
            let entries: Vec<_> = self.iter().collect();
            write!(f, " {entries:?}")?;
        }
        Ok(())
    }
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

impl<T: Real> SparseOperator<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![cone(); dim])
    }

    pub fn from_diagonal(diag: &[Complex<T>]) -> Self {
        let n = diag.len();
        Self::from_triplets(n, n, diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Builds the canonical form from unordered triplets, summing duplicates.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Complex<T>)>,
    {
        let mut t: Vec<(usize, usize, Complex<T>)> = triplets.into_iter().collect();
        t.sort_unstable_by_key(|a| (a.0, a.1));
        let eps = T::lit(PRUNE_EPS);
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(t.len());
        let mut values = Vec::with_capacity(t.len());
        let mut rows = Vec::with_capacity(t.len());
        let mut k = 0;
        while k < t.len() {
            let (r, c, mut v) = t[k];
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of bounds");
            k += 1;
            while k < t.len() && t[k].0 == r && t[k].1 == c {
                v += t[k].2;
                k += 1;
            }
            if abs(v) > eps {
                rows.push(r);
                col_idx.push(c);
                values.push(v);
            }
        }
        for r in rows {
            row_ptr[r + 1] += 1;
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_dense(m: &DMatrix<Complex<T>>) -> Self {
        let (nr, nc) = m.shape();
        Self::from_triplets(
            nr,
            nc,
            (0..nr).flat_map(|r| (0..nc).map(move |c| (r, c, m[(r, c)]))),
        )
    }

    pub fn to_dense(&self) -> DMatrix<Complex<T>> {
        let mut m = DMatrix::from_element(self.nrows, self.ncols, czero());
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Side length of a square operator.
    pub fn dim(&self) -> usize {
        debug_assert_eq!(self.nrows, self.ncols);
        self.nrows
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex<T>)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex<T>)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        let cols = &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]];
        match cols.binary_search(&c) {
            Ok(k) => self.values[self.row_ptr[r] + k],
            Err(_) => czero(),
        }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::from_triplets(self.nrows, self.ncols, self.iter().map(|(r, c, v)| (r, c, v * s)))
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(cr(s))
    }

    fn combine(&self, other: &Self, sign: T) -> Result<Self> {
        check_dims(self.nrows, other.nrows)?;
        check_dims(self.ncols, other.ncols)?;
        let s = cr(sign);
        Ok(Self::from_triplets(
            self.nrows,
            self.ncols,
            self.iter().chain(other.iter().map(|(r, c, v)| (r, c, v * s))),
        ))
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.combine(other, T::one())
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.combine(other, -T::one())
    }

    /// Matrix product `self · other` (row-by-row accumulation).
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_dims(self.ncols, other.nrows)?;
        let mut acc = vec![czero::<T>(); other.ncols];
        let mut seen = vec![usize::MAX; other.ncols];
        let mut touched = Vec::new();
        let mut triplets = Vec::new();
        for r in 0..self.nrows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if seen[c] != r {
                        seen[c] = r;
                        acc[c] = czero();
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &touched {
                triplets.push((r, c, acc[c]));
            }
            touched.clear();
        }
        Ok(Self::from_triplets(self.nrows, other.ncols, triplets))
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.iter().map(|(r, c, v)| (c, r, v)))
    }

    pub fn conj(&self) -> Self {
        Self::from_triplets(self.nrows, self.ncols, self.iter().map(|(r, c, v)| (r, c, v.conj())))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.iter().map(|(r, c, v)| (c, r, v.conj())),
        )
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (nr, nc) = (self.nrows * other.nrows, self.ncols * other.ncols);
        let mut triplets = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, a) in self.iter() {
            for (r2, c2, b) in other.iter() {
                triplets.push((r1 * other.nrows + r2, c1 * other.ncols + c2, a * b));
            }
        }
        Self::from_triplets(nr, nc, triplets)
    }

    /// `[a, b] = ab - ba`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.minus(&other.matmul(self)?)
    }

    /// `{a, b} = ab + ba`.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.plus(&other.matmul(self)?)
    }

    pub fn trace(&self) -> Complex<T> {
        let mut t = czero();
        for r in 0..self.nrows.min(self.ncols) {
            t += self.get(r, r);
        }
        t
    }

    pub fn frobenius_norm(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc + v.norm_sqr())
            .sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, &v| acc.max(abs(v)))
    }

    pub fn is_diagonal(&self) -> bool {
        self.iter().all(|(r, c, _)| r == c)
    }

    pub fn diagonal(&self) -> Vec<Complex<T>> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square()
            && self
                .minus(&self.adjoint())
                .map(|d| d.max_abs() <= tol)
                .unwrap_or(false)
    }

    /// Max entrywise deviation of `self† self` from the identity.
    pub fn unitarity_defect(&self) -> T {
        let id = Self::identity(self.ncols);
        match self.adjoint().matmul(self) {
            Ok(p) => p.minus(&id).map(|d| d.max_abs()).unwrap_or(T::max_value().unwrap()),
            Err(_) => T::max_value().unwrap(),
        }
    }

    /// Exact equality of stored patterns and values.
    pub fn same_entries(&self, other: &Self) -> bool {
        self == other
    }

    /// Max entrywise distance between two operators of equal shape.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        Ok(self.minus(other)?.max_abs())
    }

    pub fn matvec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut y = vec![czero(); self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (r, out) in y.iter_mut().enumerate() {
            let mut s = czero();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *out = s;
        }
    }

    /// `y = self† x`.
    pub fn adjoint_matvec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![czero(); self.ncols];
        for (r, c, v) in self.iter() {
            y[c] += v.conj() * x[r];
        }
        y
    }

    /// Column `c` as sparse (row, value) pairs.
    pub fn column(&self, c: usize) -> Vec<(usize, Complex<T>)> {
        self.iter()
            .filter(|&(_, cc, _)| cc == c)
            .map(|(r, _, v)| (r, v))
            .collect()
    }

    /// Dense product `self · m`.
    pub fn mul_dense(&self, m: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
        assert_eq!(self.ncols, m.nrows());
        let mut out = DMatrix::from_element(self.nrows, m.ncols(), czero());
        for (r, k, v) in self.iter() {
            for c in 0..m.ncols() {
                out[(r, c)] += v * m[(k, c)];
            }
        }
        out
    }

    /// Dense product `m · self`.
    pub fn dense_mul(&self, m: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
        assert_eq!(m.ncols(), self.nrows);
        let mut out = DMatrix::from_element(m.nrows(), self.ncols, czero());
        for (k, c, v) in self.iter() {
            for r in 0..m.nrows() {
                out[(r, c)] += m[(r, k)] * v;
            }
        }
        out
    }

    /// Raw compressed-row arrays `(row_ptr, col_idx, values)`.
    pub(crate) fn csr(&self) -> (&[usize], &[usize], &[Complex<T>]) {
        (&self.row_ptr, &self.col_idx, &self.values)
    }

    /// A copy with row `r` replaced by the given sorted `(col, value)` pairs.
    pub fn with_row(&self, r: usize, entries: &[(usize, Complex<T>)]) -> Self {
        let triplets = self
            .iter()
            .filter(|&(rr, _, _)| rr != r)
            .chain(entries.iter().map(|&(c, v)| (r, c, v)));
        Self::from_triplets(self.nrows, self.ncols, triplets)
    }

    /// Converts to another scalar precision.
    pub fn cast<U: Real>(&self) -> SparseOperator<U> {
        SparseOperator::from_triplets(
            self.nrows,
            self.ncols,
            self.iter().map(|(r, c, v)| {
                (
                    r,
                    c,
                    Complex::new(U::lit(v.re.to_f64_lossy()), U::lit(v.im.to_f64_lossy())),
                )
            }),
        )
    }
}

/// Hilbert–Schmidt inner product `tr(a† b)`.
pub fn hs_inner<T: Real>(a: &SparseOperator<T>, b: &SparseOperator<T>) -> Result<Complex<T>> {
    check_dims(a.nrows, b.nrows)?;
    check_dims(a.ncols, b.ncols)?;
    let mut s = czero();
    for r in 0..a.nrows {
        let mut ia = a.row_ptr[r];
        let mut ib = b.row_ptr[r];
        while ia < a.row_ptr[r + 1] && ib < b.row_ptr[r + 1] {
            match a.col_idx[ia].cmp(&b.col_idx[ib]) {
                std::cmp::Ordering::Less => ia += 1,
                std::cmp::Ordering::Greater => ib += 1,
                std::cmp::Ordering::Equal => {
                    s += a.values[ia].conj() * b.values[ib];
                    ia += 1;
                    ib += 1;
                }
            }
        }
    }
    Ok(s)
}
