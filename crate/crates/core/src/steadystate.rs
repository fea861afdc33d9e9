//! Non-equilibrium steady states: null vectors of (restricted) generators.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{dot, gmres, hermitian_eigen, norm, null_space, Ilu0};
use crate::liouvillian::{restrict, Superoperator};
use crate::models::OpenModel;
use crate::operator::{DensityMatrix, SparseOperator};
use crate::scalar::{c, cr, czero, Complex, Real};
use crate::symmetry::{BlockSelection, SymmetryDecomposition};

/// Relative singular-value cutoff for the null space.
pub const NULL_TOL: f64 = 1e-10;
/// Eigenvalues of a returned state must be at least `-POSITIVITY_TOL`.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Largest block handled by the dense solver under [`NessMethod::Auto`].
pub const DENSE_CAP: usize = 4096;
/// Above this size the dense solver first tries an LU solve, which proves
/// a one-dimensional null space by conditioning, and uses the SVD only if
/// that fails.
pub const SVD_CAP: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NessMethod {
    /// SVD of the dense block; finds the whole null space.
    Dense,
    /// ILU(0)-preconditioned GMRES on the trace-constrained system; assumes a
    /// one-dimensional null space.
    Iterative,
    /// Dense up to [`DENSE_CAP`], iterative above.
    Auto,
}

impl fmt::Display for NessMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NessMethod::Dense => "dense",
            NessMethod::Iterative => "iterative",
            NessMethod::Auto => "auto",
        })
    }
}

impl FromStr for NessMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(NessMethod::Dense),
            "iterative" => Ok(NessMethod::Iterative),
            "auto" => Ok(NessMethod::Auto),
            other => Err(Error::InvalidParameter(format!("unknown solver {other:?}"))),
        }
    }
}

/// One steady state of a block.
#[derive(Clone, Debug)]
pub struct SteadyStateResult<T: Real> {
    /// The state on the full Hilbert space.
    pub rho: DensityMatrix<T>,
    pub label: String,
    /// `‖L ρ‖_F`.
    pub residual: T,
    /// Smallest eigenvalue of `rho`.
    pub min_eigenvalue: T,
    /// Dimension of the null space the state was taken from.
    pub null_dim: usize,
    pub method: NessMethod,
}

impl<T: Real> SteadyStateResult<T> {
    pub fn trace_error(&self) -> T {
        (self.rho.trace() - cr(T::one())).norm_sqr().sqrt()
    }
}

type Coords<T> = Vec<Complex<T>>;

fn axpy<T: Real>(y: &mut [Complex<T>], a: T, x: &[Complex<T>]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += *xi * cr(a);
    }
}

fn real_dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    dot(a, b).re
}

/// Real Gram–Schmidt on Hermitian coordinate vectors.
fn orthonormalize<T: Real>(vs: Vec<Coords<T>>, against: &[Coords<T>], pivot: T) -> Vec<Coords<T>> {
    let mut out: Vec<Coords<T>> = Vec::new();
    for mut v in vs {
        let n0 = norm(&v);
        if n0 <= T::zero() {
            continue;
        }
        for _ in 0..2 {
            for b in against.iter().chain(out.iter()) {
                let p = real_dot(b, &v);
                axpy(&mut v, -p, b);
            }
        }
        let n1 = norm(&v);
        if n1 > pivot * n0 {
            for x in v.iter_mut() {
                *x /= cr(n1);
            }
            out.push(v);
        }
    }
    out
}

fn trace_of<T: Real>(t: &[Complex<T>], x: &[Complex<T>]) -> Complex<T> {
    t.iter().zip(x).fold(czero(), |s, (a, b)| s + *a * *b)
}

/// Eigenvalues of the sector matrix; the second value is whether the block
/// spans the whole space.
fn block_spectrum<T: Real>(sup: &Superoperator<T>, x: &[Complex<T>]) -> (Vec<T>, DMatrix<Complex<T>>, bool) {
    let (m, complete) = sup.sector_matrix(x);
    let (vals, vecs) = hermitian_eigen(&m);
    (vals, vecs, complete)
}

fn lambda_min<T: Real>(sup: &Superoperator<T>, x: &[Complex<T>]) -> T {
    block_spectrum(sup, x).0.first().copied().unwrap_or(T::zero())
}

fn finish<T: Real>(sup: &Superoperator<T>, x: Coords<T>, null_dim: usize, method: NessMethod) -> Result<SteadyStateResult<T>> {
    let residual = norm(&sup.apply(&x));
    let (vals, _, complete) = block_spectrum(sup, &x);
    let mut min_eig = vals.first().copied().unwrap_or(T::zero());
    if min_eig < -T::lit(POSITIVITY_TOL) {
        return Err(Error::PositivityFailure {
            min_eig: min_eig.to_f64_lossy(),
        });
    }
    if !complete {
        min_eig = min_eig.min(T::zero());
    }
    let rho = DensityMatrix::new(sup.operator_of(&x))?;
    Ok(SteadyStateResult {
        rho,
        label: sup.label().to_string(),
        residual,
        min_eigenvalue: min_eig,
        null_dim,
        method,
    })
}

/// Hermitian, unit-trace steady states of `sup`.
///
/// The dense method returns one state per dimension of the null space
/// (singular values below `tol · σ_max`): a state maximizing the smallest
/// eigenvalue over the normalized null space, followed by states pushed
/// from it to the positivity boundary along each remaining direction.
/// Blocks larger than [`SVD_CAP`] are first solved by dense LU with one
/// row of `L` replaced by the trace constraint. The iterative method solves
/// the same replaced-row system by GMRES with an ILU(0) preconditioner, to
/// relative residual `tol`, and assumes a one-dimensional null space.
pub fn solve_ness<T: Real>(sup: &Superoperator<T>, method: NessMethod, tol: T) -> Result<Vec<SteadyStateResult<T>>> {
    if !sup.is_trace_bearing() {
        return Err(Error::NoTraceBearingNullVector(sup.label().to_string()));
    }
    let method = match method {
        NessMethod::Auto if sup.dim() <= DENSE_CAP => NessMethod::Dense,
        NessMethod::Auto => NessMethod::Iterative,
        m => m,
    };
    match method {
        NessMethod::Dense => solve_dense(sup, tol),
        _ => solve_iterative(sup, tol).map(|r| vec![r]),
    }
}

fn hermitian_null_basis<T: Real>(sup: &Superoperator<T>, vectors: &[DVector<Complex<T>>]) -> Result<Vec<Coords<T>>> {
    let mut herm = Vec::with_capacity(2 * vectors.len());
    let half = cr(T::lit(0.5));
    let mhalf_i = c::<T>(0.0, -0.5);
    for v in vectors {
        let v: Coords<T> = v.iter().copied().collect();
        let va = sup.adjoint_coords(&v)?;
        herm.push(v.iter().zip(&va).map(|(a, b)| (*a + *b) * half).collect());
        herm.push(v.iter().zip(&va).map(|(a, b)| (*a - *b) * mhalf_i).collect());
    }
    let mut basis = orthonormalize(herm, &[], T::lit(1e-6));
    basis.truncate(vectors.len());
    Ok(basis)
}

fn solve_dense<T: Real>(sup: &Superoperator<T>, tol: T) -> Result<Vec<SteadyStateResult<T>>> {
    if sup.dim() > SVD_CAP {
        if let Some(x) = solve_replaced_row_lu(sup, tol)? {
            let x = normalize_state(sup, x)?;
            return Ok(vec![finish(sup, x, 1, NessMethod::Dense)?]);
        }
        log::info!("block {} is degenerate or ill-conditioned; falling back to SVD", sup.label());
    }
    let a = sup.matrix().to_dense();
    let ns = null_space(&a, tol);
    let d = ns.vectors.len();
    if d == 0 {
        return Err(Error::NoTraceBearingNullVector(format!("{} (null space empty)", sup.label())));
    }
    let basis = hermitian_null_basis(sup, &ns.vectors)?;
    let t = sup.trace_functional();
    let taus: Vec<T> = basis.iter().map(|h| trace_of(&t, h).re).collect();
    let tau = taus.iter().fold(T::zero(), |s, x| s + *x * *x).sqrt();
    if tau <= T::lit(1e-8) {
        return Err(Error::NoTraceBearingNullVector(sup.label().to_string()));
    }
    let mut u = vec![czero(); sup.dim()];
    for (h, tj) in basis.iter().zip(&taus) {
        axpy(&mut u, *tj / tau, h);
    }
    let rho0: Coords<T> = u.iter().map(|x| *x / cr(tau)).collect();
    let dirs = orthonormalize(basis.clone(), std::slice::from_ref(&u), T::lit(1e-6));
    let null_dim = d;
    if dirs.is_empty() {
        return Ok(vec![finish(sup, rho0, null_dim, NessMethod::Dense)?]);
    }

    let best = maximize_lambda_min(sup, &rho0, &dirs);
    let lam = lambda_min(sup, &best);
    if lam < -T::lit(POSITIVITY_TOL) {
        return Err(Error::PositivityFailure {
            min_eig: lam.to_f64_lossy(),
        });
    }
    let mut out = vec![finish(sup, best.clone(), null_dim, NessMethod::Dense)?];
    for g in &dirs {
        let mut pick = None;
        for sign in [T::one(), -T::one()] {
            let tmax = boundary_step(sup, &best, g, sign);
            if pick.map(|(t, _)| tmax > t).unwrap_or(true) {
                pick = Some((tmax, sign));
            }
        }
        let (tmax, sign) = pick.expect("two candidates");
        let mut x = best.clone();
        axpy(&mut x, sign * tmax, g);
        out.push(finish(sup, x, null_dim, NessMethod::Dense)?);
    }
    Ok(out)
}

/// Largest `s ≥ 0` keeping `base + sign·s·g` positive semidefinite.
fn boundary_step<T: Real>(sup: &Superoperator<T>, base: &[Complex<T>], g: &[Complex<T>], sign: T) -> T {
    let ok = |s: T| {
        let mut x = base.to_vec();
        axpy(&mut x, sign * s, g);
        lambda_min(sup, &x) >= -T::lit(POSITIVITY_TOL) * T::lit(0.1)
    };
    let mut hi = norm(base).max(T::lit(1e-6));
    let mut lo = T::zero();
    let mut grown = 0;
    while ok(hi) && grown < 60 {
        lo = hi;
        hi *= T::lit(2.0);
        grown += 1;
    }
    for _ in 0..60 {
        let mid = (lo + hi) * T::lit(0.5);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Projected subgradient ascent of `λ_min(ρ0 + Σ c_j g_j)`.
fn maximize_lambda_min<T: Real>(sup: &Superoperator<T>, rho0: &[Complex<T>], dirs: &[Coords<T>]) -> Coords<T> {
    let k = dirs.len();
    let mut coef = vec![T::zero(); k];
    let build = |coef: &[T]| {
        let mut x = rho0.to_vec();
        for (cj, g) in coef.iter().zip(dirs) {
            axpy(&mut x, *cj, g);
        }
        x
    };
    let dir_mats: Vec<DMatrix<Complex<T>>> = dirs.iter().map(|g| sup.sector_matrix(g).0).collect();
    let scale = norm(rho0);
    let mut best = (T::lit(f64::NEG_INFINITY), coef.clone());
    for it in 0..400 {
        let x = build(&coef);
        let (vals, vecs, _) = block_spectrum(sup, &x);
        let lam = vals[0];
        if lam > best.0 {
            best = (lam, coef.clone());
        }
        let v = vecs.column(0);
        let grad: Vec<T> = dir_mats.iter().map(|m| (v.adjoint() * m * v)[(0, 0)].re).collect();
        let gn = grad.iter().fold(T::zero(), |s, x| s + *x * *x).sqrt();
        if gn <= T::zero() {
            break;
        }
        let step = scale * T::lit(0.5) / T::lit((it as f64 + 1.0).sqrt());
        for (cj, gj) in coef.iter_mut().zip(&grad) {
            *cj += step * *gj / gn;
        }
    }
    build(&best.1)
}

/// Row of the trace constraint replacing a dependent row of `L`.
fn trace_row<T: Real>(sup: &Superoperator<T>) -> (usize, Vec<(usize, Complex<T>)>) {
    let t = sup.trace_functional();
    let entries: Vec<(usize, Complex<T>)> = t.iter().enumerate().filter(|(_, v)| v.norm_sqr() > T::zero()).map(|(k, v)| (k, *v)).collect();
    let k = entries.last().map(|e| e.0).unwrap_or(0);
    (k, entries)
}

/// Hermitizes a null vector in place and scales it to unit trace.
fn normalize_state<T: Real>(sup: &Superoperator<T>, mut x: Coords<T>) -> Result<Coords<T>> {
    let xa = sup.adjoint_coords(&x)?;
    for (a, b) in x.iter_mut().zip(&xa) {
        *a = (*a + *b) * cr(T::lit(0.5));
    }
    let tr = trace_of(&sup.trace_functional(), &x);
    if tr.norm_sqr().sqrt() <= T::lit(1e-12) {
        return Err(Error::NoTraceBearingNullVector(sup.label().to_string()));
    }
    for a in x.iter_mut() {
        *a /= tr;
    }
    Ok(x)
}

/// Dense LU of the generator with one dependent row replaced by the trace
/// constraint. Returns `None` if that matrix is numerically singular, i.e.
/// the null space is not one-dimensional.
fn solve_replaced_row_lu<T: Real>(sup: &Superoperator<T>, tol: T) -> Result<Option<Coords<T>>> {
    let (k, row) = trace_row(sup);
    let a = sup.matrix().with_row(k, &row).to_dense();
    let scale = a.norm();
    let lu = a.lu();
    let mut rhs = DVector::from_element(sup.dim(), czero::<T>());
    rhs[k] = cr(T::one());
    let x = match lu.solve(&rhs) {
        Some(x) => x,
        None => return Ok(None),
    };
    // ‖A⁻¹‖ from a few probe solves; a singular A blows these up
    let mut inv_norm = norm(x.as_slice());
    for p in 0..3usize {
        let probe = DVector::from_fn(sup.dim(), |i, _| {
            let h = (i.wrapping_mul(2654435761).wrapping_add(p * 97)) % 1000;
            Complex::new(T::lit(h as f64 / 1000.0 - 0.5), T::lit(((h * 7) % 1000) as f64 / 1000.0 - 0.5))
        });
        if let Some(y) = lu.solve(&probe) {
            inv_norm = inv_norm.max(norm(y.as_slice()) / norm(probe.as_slice()));
        } else {
            return Ok(None);
        }
    }
    if scale * inv_norm * tol > T::one() {
        return Ok(None);
    }
    Ok(Some(x.iter().copied().collect()))
}

fn solve_iterative<T: Real>(sup: &Superoperator<T>, tol: T) -> Result<SteadyStateResult<T>> {
    let (k, row) = trace_row(sup);
    let a = sup.matrix().with_row(k, &row);
    let diag_scale = (0..a.nrows()).map(|i| a.get(i, i).norm_sqr().sqrt()).fold(T::zero(), |s, x| s + x)
        / T::lit(a.nrows().max(1) as f64);
    let shift = cr(diag_scale.max(T::lit(1e-12)) * T::lit(1e-3));
    let pre = a.plus(&SparseOperator::from_diagonal(&vec![shift; a.nrows()]))?;
    let ilu = Ilu0::new(&pre)?;
    let mut b = vec![czero(); sup.dim()];
    b[k] = cr(T::one());
    let out = gmres(|x| a.matvec(x), |x| ilu.solve(x), &b, tol, 300, 30_000)?;
    let x = normalize_state(sup, out.x)?;
    finish(sup, x, 1, NessMethod::Iterative)
}

/// Numerical null-space dimension of a block (dense).
pub fn null_dimension<T: Real>(sup: &Superoperator<T>, tol: T) -> Result<usize> {
    if sup.dim() > DENSE_CAP {
        return Err(Error::DimensionOverCap {
            dim: sup.dim(),
            cap: DENSE_CAP,
        });
    }
    Ok(null_space(&sup.matrix().to_dense(), tol).vectors.len())
}

/// `Σ_k u_k ρ_k` for weights on the simplex.
pub fn convex_combination<T: Real>(results: &[SteadyStateResult<T>], weights: &[T]) -> Result<DensityMatrix<T>> {
    if results.is_empty() {
        return Err(Error::Empty("steady states"));
    }
    if results.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            left: results.len(),
            right: weights.len(),
        });
    }
    if weights.iter().any(|w| *w < T::zero()) {
        return Err(Error::InvalidParameter("negative convex weight".into()));
    }
    let total = weights.iter().fold(T::zero(), |s, w| s + *w);
    if (total - T::one()).abs() > T::lit(1e-12) {
        return Err(Error::InvalidParameter(format!("convex weights sum to {total}")));
    }
    let parts: Vec<(T, &DensityMatrix<T>)> = weights.iter().copied().zip(results.iter().map(|r| &r.rho)).collect();
    DensityMatrix::combine(&parts)
}

/// Measured null-space dimension of one block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicityEntry {
    pub label: String,
    pub block_dim: usize,
    pub null_dim: usize,
}

/// Null-space dimension of every diagonal block `(α, α)`.
///
/// Fails if a diagonal block has no null vector, which would contradict the
/// existence of a steady state in every invariant diagonal block.
pub fn ness_multiplicity_report<T: Real>(
    model: &OpenModel<T>,
    dec: &SymmetryDecomposition<T>,
) -> Result<Vec<MultiplicityEntry>> {
    let rows: Vec<MultiplicityEntry> = (0..dec.len())
        .into_par_iter()
        .map(|a| {
            let sup = restrict(model, dec, &BlockSelection::diagonal(dec, a))?;
            let null_dim = null_dimension(&sup, T::lit(NULL_TOL))?;
            Ok(MultiplicityEntry {
                label: sup.label().to_string(),
                block_dim: sup.dim(),
                null_dim,
            })
        })
        .collect::<Result<_>>()?;
    if let Some(bad) = rows.iter().find(|r| r.null_dim == 0) {
        return Err(Error::NoTraceBearingNullVector(bad.label.clone()));
    }
    Ok(rows)
}

/// Null-space dimension of every off-diagonal block `(α, β)`, `α ≠ β`.
pub fn offdiagonal_null_report<T: Real>(
    model: &OpenModel<T>,
    dec: &SymmetryDecomposition<T>,
) -> Result<Vec<MultiplicityEntry>> {
    let pairs: Vec<(usize, usize)> = (0..dec.len())
        .flat_map(|a| (0..dec.len()).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    pairs
        .into_par_iter()
        .map(|(a, b)| {
            let sup = restrict(model, dec, &BlockSelection::operator(dec, a, b))?;
            Ok(MultiplicityEntry {
                label: sup.label().to_string(),
                block_dim: sup.dim(),
                null_dim: null_dimension(&sup, T::lit(NULL_TOL))?,
            })
        })
        .collect()
}
