//! Symmetry decompositions of the Hilbert space and of operator space.
//!
//! A [`SymmetryDecomposition`] is a list of orthogonal sectors `H_α`, each
//! carried by an isometry `V_α : H_α → H`. Operator space then splits into
//! blocks `B_{α,β} = V_α (·) V_β†` (see [`blocks`]).

mod algebra;
pub mod blocks;
mod classify;

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::models::{build_flip_parity, build_magnetization};
use crate::operator::SparseOperator;
use crate::scalar::{abs, cone, cr, czero, Complex, Real};

pub use algebra::{evans_algebra_closure, evans_generators, AlgebraClosure, ALGEBRA_PIVOT};
pub use blocks::{operator_blocks, quotient_blocks, BlockSelection, OperatorBlock, QuotientBlock};
pub use classify::{classify_symmetry, SymmetryKind, SUPEROP_FALLBACK_MAX_SITES};

/// Default eigenphase clustering tolerance.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Eigenvalue labels of one sector, one entry per decomposition stage.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorLabel<T: Real> {
    pub values: Vec<Complex<T>>,
    pub names: Vec<String>,
}

fn fmt_value<T: Real>(v: Complex<T>) -> String {
    let (re, im) = (v.re.to_f64_lossy(), v.im.to_f64_lossy());
    if im.abs() < 1e-9 {
        if (re - re.round()).abs() < 1e-9 {
            let r = re.round() as i64;
            if r > 0 {
                format!("+{r}")
            } else {
                format!("{r}")
            }
        } else {
            format!("{re:.6}")
        }
    } else {
        format!("{re:.6}{im:+.6}i")
    }
}

impl<T: Real> SectorLabel<T> {
    /// Value of the stage called `name`, if present.
    pub fn get(&self, name: &str) -> Option<Complex<T>> {
        self.names.iter().position(|n| n == name).map(|k| self.values[k])
    }

    /// True if stage `name` exists and its value is within `1e-9` of `value`.
    pub fn has(&self, name: &str, value: f64) -> bool {
        self.get(name)
            .map(|v| (v.re.to_f64_lossy() - value).abs() < 1e-9 && v.im.to_f64_lossy().abs() < 1e-9)
            .unwrap_or(false)
    }
}

impl<T: Real> fmt::Display for SectorLabel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .names
            .iter()
            .zip(&self.values)
            .map(|(n, v)| format!("{n}={}", fmt_value(*v)))
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

/// One symmetry sector `H_α`.
#[derive(Clone, Debug)]
pub struct Sector<T: Real> {
    pub label: SectorLabel<T>,
    /// Orthonormal columns spanning the sector (`N × dim H_α`).
    pub isometry: SparseOperator<T>,
}

impl<T: Real> Sector<T> {
    pub fn dim(&self) -> usize {
        self.isometry.ncols()
    }
}

/// Orthogonal sectors of `H = C^N`, possibly covering only part of it.
#[derive(Clone, Debug)]
pub struct SymmetryDecomposition<T: Real> {
    ambient: usize,
    sectors: Vec<Sector<T>>,
}

impl<T: Real> SymmetryDecomposition<T> {
    pub fn from_sectors(ambient: usize, sectors: Vec<Sector<T>>) -> Result<Self> {
        for s in &sectors {
            if s.isometry.nrows() != ambient {
                return Err(Error::DimensionMismatch {
                    left: s.isometry.nrows(),
                    right: ambient,
                });
            }
        }
        Ok(Self { ambient, sectors })
    }

    /// The single sector `H` itself.
    pub fn trivial(ambient: usize) -> Self {
        Self {
            ambient,
            sectors: vec![Sector {
                label: SectorLabel {
                    values: vec![],
                    names: vec![],
                },
                isometry: SparseOperator::identity(ambient),
            }],
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn sectors(&self) -> &[Sector<T>] {
        &self.sectors
    }

    pub fn len(&self) -> usize {
        self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sectors.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.sectors.iter().map(Sector::dim).collect()
    }

    /// Sector eigenvalues of the last decomposition stage.
    pub fn eigenvalues(&self) -> Vec<Complex<T>> {
        self.sectors
            .iter()
            .map(|s| s.label.values.last().copied().unwrap_or_else(cone))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.dims().iter().sum::<usize>() == self.ambient
    }

    /// Renames the last stage of every label.
    pub fn named(mut self, name: &str) -> Self {
        for s in &mut self.sectors {
            if let Some(last) = s.label.names.last_mut() {
                *last = name.to_string();
            }
        }
        self
    }

    /// Keeps only sectors whose label satisfies `keep`.
    pub fn select(&self, keep: impl Fn(&SectorLabel<T>) -> bool) -> Self {
        Self {
            ambient: self.ambient,
            sectors: self.sectors.iter().filter(|s| keep(&s.label)).cloned().collect(),
        }
    }

    pub fn find(&self, pred: impl Fn(&SectorLabel<T>) -> bool) -> Option<usize> {
        self.sectors.iter().position(|s| pred(&s.label))
    }

    /// Worst deviation from `V_α† V_β = δ_{αβ} 1`.
    pub fn orthonormality_defect(&self) -> T {
        let mut worst = T::zero();
        for (a, sa) in self.sectors.iter().enumerate() {
            for (b, sb) in self.sectors.iter().enumerate() {
                let g = sa.isometry.adjoint().matmul(&sb.isometry).expect("shared ambient");
                let d = if a == b {
                    g.minus(&SparseOperator::identity(sa.dim())).expect("square").max_abs()
                } else {
                    g.max_abs()
                };
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Worst deviation from `Σ_α V_α V_α† = 1` (complete decompositions).
    pub fn completeness_defect(&self) -> T {
        let mut sum = SparseOperator::zeros(self.ambient, self.ambient);
        for s in &self.sectors {
            let p = s.isometry.matmul(&s.isometry.adjoint()).expect("shapes");
            sum = sum.plus(&p).expect("shapes");
        }
        sum.minus(&SparseOperator::identity(self.ambient))
            .expect("square")
            .max_abs()
    }

    /// Worst deviation of `Σ_α s_α V_α V_α†` from `op`.
    pub fn reconstruction_defect(&self, op: &SparseOperator<T>) -> Result<T> {
        let mut sum = SparseOperator::zeros(self.ambient, self.ambient);
        for (s, val) in self.sectors.iter().zip(self.eigenvalues()) {
            let p = s.isometry.matmul(&s.isometry.adjoint())?.scale(val);
            sum = sum.plus(&p)?;
        }
        sum.max_abs_diff(op)
    }

    /// `V_α x V_β†` for a `dim H_α × dim H_β` matrix `x`.
    pub fn embed(&self, alpha: usize, beta: usize, x: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
        let va = &self.sectors[alpha].isometry;
        let vb = &self.sectors[beta].isometry;
        vb.adjoint().dense_mul(&va.mul_dense(x))
    }

    /// `V_α† x V_β` for an ambient matrix `x`.
    pub fn compress(&self, alpha: usize, beta: usize, x: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
        let va = &self.sectors[alpha].isometry;
        let vb = &self.sectors[beta].isometry;
        va.adjoint().mul_dense(&vb.dense_mul(x))
    }
}

/// A column vector stored as sorted `(row, value)` pairs.
type SparseVec<T> = Vec<(usize, Complex<T>)>;

fn sparse_dot<T: Real>(a: &SparseVec<T>, b: &SparseVec<T>) -> Complex<T> {
    let (mut i, mut j) = (0, 0);
    let mut s = czero();
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += a[i].1.conj() * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    s
}

fn sparse_axpy<T: Real>(v: &SparseVec<T>, alpha: Complex<T>, x: &SparseVec<T>) -> SparseVec<T> {
    let mut out = Vec::with_capacity(v.len() + x.len());
    let (mut i, mut j) = (0, 0);
    while i < v.len() || j < x.len() {
        if j >= x.len() || (i < v.len() && v[i].0 < x[j].0) {
            out.push(v[i]);
            i += 1;
        } else if i >= v.len() || x[j].0 < v[i].0 {
            out.push((x[j].0, alpha * x[j].1));
            j += 1;
        } else {
            out.push((v[i].0, v[i].1 + alpha * x[j].1));
            i += 1;
            j += 1;
        }
    }
    out
}

/// Orthonormal basis of the column space of `op` (modified Gram–Schmidt
/// with one reorthogonalization pass). Columns are processed in order.
fn column_space<T: Real>(op: &SparseOperator<T>, pivot: T) -> SparseOperator<T> {
    let n = op.nrows();
    let mut columns: Vec<SparseVec<T>> = vec![Vec::new(); op.ncols()];
    for (r, c, v) in op.iter() {
        columns[c].push((r, v));
    }
    let mut basis: Vec<SparseVec<T>> = Vec::new();
    let mut by_row: Vec<Vec<usize>> = vec![Vec::new(); n];
    for col in columns {
        let norm0 = col.iter().fold(T::zero(), |a, (_, v)| a + v.norm_sqr()).sqrt();
        if norm0 <= pivot {
            continue;
        }
        let mut v = col;
        for _ in 0..2 {
            let mut touching: Vec<usize> = v.iter().flat_map(|(r, _)| by_row[*r].iter().copied()).collect();
            touching.sort_unstable();
            touching.dedup();
            for k in touching {
                let p = sparse_dot(&basis[k], &v);
                if abs(p) > T::zero() {
                    v = sparse_axpy(&v, -p, &basis[k]);
                }
            }
        }
        v.retain(|(_, x)| abs(*x) > T::lit(crate::operator::PRUNE_EPS));
        let norm = v.iter().fold(T::zero(), |a, (_, x)| a + x.norm_sqr()).sqrt();
        if norm <= pivot * norm0.max(T::one()) {
            continue;
        }
        let inv = cr(T::one() / norm);
        for e in v.iter_mut() {
            e.1 *= inv;
        }
        let id = basis.len();
        for (r, _) in &v {
            by_row[*r].push(id);
        }
        basis.push(v);
    }
    let d = basis.len();
    SparseOperator::from_triplets(
        n,
        d,
        basis
            .into_iter()
            .enumerate()
            .flat_map(|(c, v)| v.into_iter().map(move |(r, x)| (r, c, x))),
    )
}

/// Single-linkage clusters of points; errors if two clusters are almost touching.
fn cluster<T: Real>(points: &[Complex<T>], tol: T) -> Result<Vec<Vec<usize>>> {
    let k = points.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| points[a].re.partial_cmp(&points[b].re).unwrap_or(std::cmp::Ordering::Equal));
    let wide = tol * T::lit(10.0);
    let mut near_misses = Vec::new();
    for (ai, &a) in order.iter().enumerate() {
        for &b in &order[ai + 1..] {
            if points[b].re - points[a].re > wide {
                break;
            }
            let d = abs(points[a] - points[b]);
            if d <= tol {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                parent[ra] = rb;
            } else if d <= wide {
                near_misses.push((a, b, d));
            }
        }
    }
    for (a, b, d) in near_misses {
        if root(&mut parent, a) != root(&mut parent, b) {
            return Err(Error::AmbiguousEigenphases(d.to_f64_lossy()));
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut index_of = vec![usize::MAX; k];
    for i in 0..k {
        let r = root(&mut parent, i);
        if index_of[r] == usize::MAX {
            index_of[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[index_of[r]].push(i);
    }
    Ok(groups)
}

fn mean<T: Real>(points: &[Complex<T>], idx: &[usize]) -> Complex<T> {
    let s = idx.iter().fold(czero::<T>(), |a, &i| a + points[i]);
    s / cr(T::lit(idx.len() as f64))
}

fn phase<T: Real>(z: Complex<T>) -> T {
    let a = z.im.atan2(z.re);
    if a < -T::lit(1e-12) {
        a + T::two_pi()
    } else {
        a.max(T::zero())
    }
}

fn sector<T: Real>(value: Complex<T>, isometry: SparseOperator<T>) -> Sector<T> {
    Sector {
        label: SectorLabel {
            values: vec![value],
            names: vec!["s".to_string()],
        },
        isometry,
    }
}

/// Eigen-decomposition of a unitary symmetry (or a Hermitian generator).
///
/// Diagonal operators are grouped exactly by their diagonal; involutions use
/// the projectors `(1 ± S)/2`; other unitaries are diagonalized densely and
/// their eigenphases clustered with tolerance `tol`; Hermitian operators use a
/// dense Hermitian eigensolver. Unitary sectors are ordered by eigenphase in
/// `[0, 2π)`, real spectra ascending.
pub fn eigendecompose_symmetry<T: Real>(op: &SparseOperator<T>, tol: T) -> Result<SymmetryDecomposition<T>> {
    if !op.is_square() {
        return Err(Error::DimensionMismatch {
            left: op.nrows(),
            right: op.ncols(),
        });
    }
    let n = op.nrows();
    let unitarity = op.unitarity_defect();
    let unitary = unitarity <= tol;
    let hermitian = op.is_hermitian(tol);

    if op.is_diagonal() {
        let diag = op.diagonal();
        let mut groups = cluster(&diag, tol)?;
        let key = |g: &Vec<usize>| mean(&diag, g);
        if unitary && !hermitian {
            groups.sort_by(|a, b| phase(key(a)).partial_cmp(&phase(key(b))).unwrap());
        } else {
            groups.sort_by(|a, b| key(a).re.partial_cmp(&key(b).re).unwrap());
        }
        let sectors = groups
            .iter()
            .map(|g| {
                let iso = SparseOperator::from_triplets(
                    n,
                    g.len(),
                    g.iter().enumerate().map(|(c, &r)| (r, c, cone())),
                );
                sector(key(g), iso)
            })
            .collect();
        return SymmetryDecomposition::from_sectors(n, sectors);
    }

    if unitary {
        let sq = op.matmul(op)?;
        if sq.max_abs_diff(&SparseOperator::identity(n))? <= tol {
            let id = SparseOperator::identity(n);
            let mut sectors = Vec::new();
            for sign in [T::one(), -T::one()] {
                let proj = id.plus(&op.scale_real(sign))?.scale_real(T::lit(0.5));
                let iso = column_space(&proj, T::lit(1e-10));
                if iso.ncols() > 0 {
                    sectors.push(sector(cr(sign), iso));
                }
            }
            return SymmetryDecomposition::from_sectors(n, sectors);
        }
        let schur = op.to_dense().schur();
        let (q, t) = schur.unpack();
        let evs: Vec<Complex<T>> = (0..n).map(|i| t[(i, i)]).collect();
        let mut groups = cluster(&evs, tol)?;
        groups.sort_by(|a, b| phase(mean(&evs, a)).partial_cmp(&phase(mean(&evs, b))).unwrap());
        let sectors = groups
            .iter()
            .map(|g| {
                let cols = DMatrix::from_fn(n, g.len(), |r, c| q[(r, g[c])]);
                let val = mean(&evs, g);
                let val = val / cr(abs(val));
                sector(val, SparseOperator::from_dense(&cols))
            })
            .collect();
        return SymmetryDecomposition::from_sectors(n, sectors);
    }

    if hermitian {
        let eig = op.to_dense().symmetric_eigen();
        let evs: Vec<Complex<T>> = eig.eigenvalues.iter().map(|&v| cr(v)).collect();
        let mut groups = cluster(&evs, tol)?;
        groups.sort_by(|a, b| mean(&evs, a).re.partial_cmp(&mean(&evs, b).re).unwrap());
        let sectors = groups
            .iter()
            .map(|g| {
                let cols = DMatrix::from_fn(n, g.len(), |r, c| eig.eigenvectors[(r, g[c])]);
                sector(mean(&evs, g), column_space(&SparseOperator::from_dense(&cols), T::lit(1e-10)))
            })
            .collect();
        return SymmetryDecomposition::from_sectors(n, sectors);
    }

    Err(Error::NotUnitary {
        deviation: unitarity.to_f64_lossy(),
    })
}

/// Per-sector result of testing whether `op` preserves it.
struct Compressed<T: Real> {
    inner: SparseOperator<T>,
    leak: T,
}

fn compress_into_sector<T: Real>(v: &SparseOperator<T>, op: &SparseOperator<T>) -> Result<Compressed<T>> {
    let image = op.matmul(v)?;
    let inner = v.adjoint().matmul(&image)?;
    let leak = image.minus(&v.matmul(&inner)?)?.frobenius_norm();
    Ok(Compressed { inner, leak })
}

fn refine_impl<T: Real>(
    dec: &SymmetryDecomposition<T>,
    op: &SparseOperator<T>,
    tol: T,
    strict: bool,
) -> Result<SymmetryDecomposition<T>> {
    if op.nrows() != dec.ambient || op.ncols() != dec.ambient {
        return Err(Error::DimensionMismatch {
            left: op.nrows(),
            right: dec.ambient,
        });
    }
    let mut mixing = Vec::new();
    let mut out = Vec::new();
    for s in &dec.sectors {
        let comp = compress_into_sector(&s.isometry, op)?;
        if comp.leak > tol {
            mixing.push(s.label.to_string());
            out.push(s.clone());
            continue;
        }
        let sub = eigendecompose_symmetry(&comp.inner, tol)?;
        for child in sub.sectors {
            let mut label = s.label.clone();
            label.values.extend(child.label.values);
            label.names.extend(child.label.names);
            out.push(Sector {
                label,
                isometry: s.isometry.matmul(&child.isometry)?,
            });
        }
    }
    if strict && !mixing.is_empty() {
        return Err(Error::SectorMixing { sectors: mixing });
    }
    SymmetryDecomposition::from_sectors(dec.ambient, out)
}

/// Refines every sector of `dec` by the eigenvalues of `op`.
///
/// Fails with [`Error::SectorMixing`] if `op` maps any sector off itself.
pub fn refine_by<T: Real>(dec: &SymmetryDecomposition<T>, op: &SparseOperator<T>, tol: T) -> Result<SymmetryDecomposition<T>> {
    refine_impl(dec, op, tol, true)
}

/// Like [`refine_by`], but sectors that `op` does not preserve are kept
/// unrefined instead of failing.
pub fn refine_where_preserved<T: Real>(
    dec: &SymmetryDecomposition<T>,
    op: &SparseOperator<T>,
    tol: T,
) -> Result<SymmetryDecomposition<T>> {
    refine_impl(dec, op, tol, false)
}

/// Joint sectors of total magnetization `M` and, on `m = 0`, the flip-parity
/// `S`. Stage names are `"m"` and `"s"`.
pub fn magnetization_parity_sectors<T: Real>(n: usize) -> Result<SymmetryDecomposition<T>> {
    let tol = T::lit(CLUSTER_TOL);
    let m = eigendecompose_symmetry(&build_magnetization::<T>(n)?, tol)?.named("m");
    let s = build_flip_parity::<T>(n)?;
    Ok(refine_where_preserved(&m, &s, tol)?.named_last_stage_if_refined("s"))
}

impl<T: Real> SymmetryDecomposition<T> {
    fn named_last_stage_if_refined(mut self, name: &str) -> Self {
        for s in &mut self.sectors {
            if s.label.names.len() > 1 {
                if let Some(last) = s.label.names.last_mut() {
                    *last = name.to_string();
                }
            }
        }
        self
    }
}

/// Which joint `(S, M)` sector to work in.
///
/// Written `full`, `s,m` (for example `+1,0` or `-1,0`; `s` only exists on
/// `m = 0`) or `*,m` for a whole magnetization sector. `m` is the
/// eigenvalue of `M = Σ σ^z_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SectorSpec {
    Full,
    Sector { s: Option<i32>, m: i32 },
}

impl SectorSpec {
    /// Index of the matching sector of [`magnetization_parity_sectors`].
    pub fn resolve<T: Real>(&self, dec: &SymmetryDecomposition<T>) -> Result<Option<usize>> {
        match *self {
            SectorSpec::Full => Ok(None),
            SectorSpec::Sector { s, m } => {
                let found = dec.find(|l| {
                    l.has("m", m as f64)
                        && match s {
                            Some(s) => l.has("s", s as f64),
                            None => l.get("s").is_none(),
                        }
                });
                found
                    .map(Some)
                    .ok_or_else(|| Error::InvalidParameter(format!("no sector {self} in this chain")))
            }
        }
    }
}

impl fmt::Display for SectorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SectorSpec::Full => f.write_str("full"),
            SectorSpec::Sector { s: Some(s), m } => write!(f, "{s:+},{m}"),
            SectorSpec::Sector { s: None, m } => write!(f, "*,{m}"),
        }
    }
}

impl std::str::FromStr for SectorSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let t = text.trim();
        if t == "full" {
            return Ok(SectorSpec::Full);
        }
        let bad = || Error::InvalidParameter(format!("sector {text:?}: expected full, s,m or *,m"));
        let (a, b) = t.split_once(',').ok_or_else(bad)?;
        let m: i32 = b.trim().parse().map_err(|_| bad())?;
        let s = match a.trim() {
            "*" => None,
            other => match other.parse::<i32>().map_err(|_| bad())? {
                1 => Some(1),
                -1 => Some(-1),
                _ => return Err(bad()),
            },
        };
        if s.is_some() && m != 0 {
            return Err(Error::InvalidParameter(format!(
                "sector {text:?}: the parity label exists only for m = 0"
            )));
        }
        Ok(SectorSpec::Sector { s, m })
    }
}

/// Decomposition by the flip-parity `S` alone.
pub fn flip_parity_sectors<T: Real>(n: usize) -> Result<SymmetryDecomposition<T>> {
    Ok(eigendecompose_symmetry(&build_flip_parity::<T>(n)?, T::lit(CLUSTER_TOL))?.named("s"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::BasisState;
    use crate::scalar::c;

    type Op = SparseOperator<f64>;
    const TOL: f64 = 1e-8;

    /// `dim H_±` from the trace of `(1 ± S)/2`.
    fn projector_dims(s: &Op) -> (usize, usize) {
        let n = s.dim() as f64;
        let t = s.trace().re;
        (((n + t) / 2.0).round() as usize, ((n - t) / 2.0).round() as usize)
    }

    #[test]
    fn flip_parity_dims_match_trace_oracle() {
        for n in 2..=6 {
            let s: Op = build_flip_parity(n).unwrap();
            let dec = eigendecompose_symmetry(&s, TOL).unwrap();
            let (plus, minus) = projector_dims(&s);
            let dims = dec.dims();
            assert_eq!(dims, vec![plus, minus].into_iter().filter(|&d| d > 0).collect::<Vec<_>>());
            assert!(dec.orthonormality_defect() < 1e-12);
            assert!(dec.completeness_defect() < 1e-12);
            assert!(dec.reconstruction_defect(&s).unwrap() < 1e-12);
        }
        let dec = eigendecompose_symmetry(&build_flip_parity::<f64>(4).unwrap(), TOL).unwrap();
        assert_eq!(dec.dims(), vec![10, 6]);
        assert_eq!(dec.eigenvalues(), vec![c(1.0, 0.0), c(-1.0, 0.0)]);
    }

    #[test]
    fn magnetization_sectors_are_binomial() {
        let m: Op = build_magnetization(4).unwrap();
        let dec = eigendecompose_symmetry(&m, TOL).unwrap();
        assert_eq!(dec.dims(), vec![1, 4, 6, 4, 1]);
        let vals: Vec<f64> = dec.eigenvalues().iter().map(|v| v.re).collect();
        assert_eq!(vals, vec![-4.0, -2.0, 0.0, 2.0, 4.0]);
        assert!(dec.reconstruction_defect(&m).unwrap() < 1e-12);
    }

    #[test]
    fn identity_is_one_sector() {
        let dec = eigendecompose_symmetry(&Op::identity(8), TOL).unwrap();
        assert_eq!(dec.dims(), vec![8]);
        assert_eq!(dec.eigenvalues(), vec![c(1.0, 0.0)]);
    }

    #[test]
    fn generic_unitary_uses_dense_path() {
        // diag(1, e^{i}, e^{i}, e^{i√2}) rotated by a real orthogonal map
        let phases = [0.0f64, 1.0, 1.0, 2f64.sqrt()];
        let d = Op::from_diagonal(&phases.map(|p| c(p.cos(), p.sin())));
        let (a, b) = (0.3f64.cos(), 0.3f64.sin());
        let rot = Op::from_triplets(
            4,
            4,
            vec![
                (0, 0, c(a, 0.0)),
                (0, 1, c(-b, 0.0)),
                (1, 0, c(b, 0.0)),
                (1, 1, c(a, 0.0)),
                (2, 2, c(a, 0.0)),
                (2, 3, c(-b, 0.0)),
                (3, 2, c(b, 0.0)),
                (3, 3, c(a, 0.0)),
            ],
        );
        let u = rot.matmul(&d).unwrap().matmul(&rot.adjoint()).unwrap();
        let dec = eigendecompose_symmetry(&u, TOL).unwrap();
        assert_eq!(dec.dims(), vec![1, 2, 1]);
        assert!(dec.reconstruction_defect(&u).unwrap() < 1e-10);
        assert!(dec.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn near_degenerate_phases_are_ambiguous() {
        let d = Op::from_diagonal(&[c(1.0, 0.0), c((5e-8f64).cos(), (5e-8f64).sin())]);
        assert!(matches!(
            eigendecompose_symmetry(&d, TOL),
            Err(Error::AmbiguousEigenphases(_))
        ));
    }

    #[test]
    fn non_unitary_rejected() {
        let a = Op::from_triplets(2, 2, vec![(0, 1, c(1.0, 0.0)), (0, 0, c(0.5, 0.0))]);
        assert!(matches!(eigendecompose_symmetry(&a, TOL), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn refine_parity_by_magnetization_on_zero_sector() {
        let n = 4;
        let m = eigendecompose_symmetry(&build_magnetization::<f64>(n).unwrap(), TOL)
            .unwrap()
            .named("m");
        let zero = m.select(|l| l.has("m", 0.0));
        assert_eq!(zero.dims(), vec![6]);
        let s = build_flip_parity(n).unwrap();
        let refined = refine_by(&zero, &s, TOL).unwrap().named("s");
        assert_eq!(refined.dims(), vec![5, 1]);
        assert!(refined.sectors()[1].label.has("s", -1.0));
        // the s = -1, m = 0 sector is spanned by (|0110⟩ - |1001⟩)/√2
        let v = &refined.sectors()[1].isometry;
        let a = BasisState::parse("0110").unwrap().index();
        let b = BasisState::parse("1001").unwrap().index();
        let (va, vb) = (v.get(a, 0), v.get(b, 0));
        assert!((va.norm() - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((va + vb).norm() < 1e-14);
        assert!(refined.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn parity_mixes_nonzero_magnetization() {
        let n = 4;
        let m = eigendecompose_symmetry(&build_magnetization::<f64>(n).unwrap(), TOL)
            .unwrap()
            .named("m");
        let s = build_flip_parity(n).unwrap();
        match refine_by(&m, &s, TOL) {
            Err(Error::SectorMixing { sectors }) => assert_eq!(sectors.len(), 4),
            other => panic!("expected mixing, got {other:?}"),
        }
    }

    #[test]
    fn refine_by_identity_is_noop() {
        let dec = flip_parity_sectors::<f64>(4).unwrap();
        let r = refine_by(&dec, &Op::identity(16), TOL).unwrap();
        assert_eq!(r.dims(), dec.dims());
        for (a, b) in r.sectors().iter().zip(dec.sectors()) {
            assert_eq!(a.isometry, b.isometry);
        }
    }

    #[test]
    fn joint_sectors_cover_space() {
        for n in 2..=6 {
            let dec = magnetization_parity_sectors::<f64>(n).unwrap();
            assert!(dec.is_complete());
            assert!(dec.completeness_defect() < 1e-12);
            assert!(dec.orthonormality_defect() < 1e-12);
            let refined = dec.sectors().iter().filter(|s| s.label.names.len() == 2).count();
            // m = 0 exists only for even n; its s = -1 part is empty for n = 2
            let expected = match n {
                2 => 1,
                _ if n % 2 == 0 => 2,
                _ => 0,
            };
            assert_eq!(refined, expected, "n={n}");
        }
        let dec = magnetization_parity_sectors::<f64>(4).unwrap();
        let i = dec.find(|l| l.has("m", 0.0) && l.has("s", -1.0)).unwrap();
        assert_eq!(dec.sectors()[i].dim(), 1);
        assert_eq!(dec.sectors()[i].label.to_string(), "(m=0,s=-1)");
    }

    #[test]
    fn sector_specs() {
        let dec = magnetization_parity_sectors::<f64>(4).unwrap();
        let even: SectorSpec = "+1,0".parse().unwrap();
        let idx = even.resolve(&dec).unwrap().unwrap();
        assert_eq!(dec.sectors()[idx].dim(), 5);
        assert_eq!(even.to_string(), "+1,0");
        let odd: SectorSpec = "-1,0".parse().unwrap();
        assert_eq!(dec.sectors()[odd.resolve(&dec).unwrap().unwrap()].dim(), 1);
        let two: SectorSpec = "*,2".parse().unwrap();
        assert_eq!(dec.sectors()[two.resolve(&dec).unwrap().unwrap()].dim(), 4);
        assert_eq!("full".parse::<SectorSpec>().unwrap().resolve(&dec).unwrap(), None);
        assert!("+1,2".parse::<SectorSpec>().is_err());
        assert!("2,0".parse::<SectorSpec>().is_err());
        assert!("*,0".parse::<SectorSpec>().unwrap().resolve(&dec).is_err());
        assert!("*,1".parse::<SectorSpec>().unwrap().resolve(&dec).is_err());
    }

    #[test]
    fn embed_compress_round_trip() {
        let dec = flip_parity_sectors::<f64>(3).unwrap();
        let (da, db) = (dec.sectors()[0].dim(), dec.sectors()[1].dim());
        let x = DMatrix::from_fn(da, db, |r, col| c(r as f64 + 0.5, col as f64 - 1.0));
        let big = dec.embed(0, 1, &x);
        assert_eq!(big.nrows(), 8);
        let back = dec.compress(0, 1, &big);
        assert!((back - x).norm() < 1e-13);
        // opposite block sees nothing
        assert!(dec.compress(1, 0, &big).norm() < 1e-13);
    }
}
