//! Spin-current and magnetization profiles.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::liouvillian::apply_lindbladian;
use crate::models::{build_current, build_flip_parity, build_xxz_hamiltonian, OpenModel};
use crate::operator::{expectation, site_operator, DensityMatrix, SiteKind, SparseOperator};
use crate::scalar::{c, Complex, Real};

/// Largest imaginary part tolerated on a Hermitian expectation value.
pub const IMAG_TOL: f64 = 1e-10;

fn real_expectation<T: Real>(obs: &SparseOperator<T>, rho: &DensityMatrix<T>) -> Result<T> {
    let v = expectation(obs, rho)?;
    if v.im.abs() > T::lit(IMAG_TOL) {
        return Err(Error::SignificantImaginary(v.im.to_f64_lossy()));
    }
    Ok(v.re)
}

fn check_dim<T: Real>(rho: &DensityMatrix<T>, n: usize) -> Result<()> {
    if rho.dim() != 1 << n {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: 1 << n,
        });
    }
    Ok(())
}

/// `J_i = tr(j_i ρ)` for bonds `i = 1..n-1`.
pub fn current_profile<T: Real>(rho: &DensityMatrix<T>, n: usize) -> Result<Vec<T>> {
    check_dim(rho, n)?;
    (1..n).map(|i| real_expectation(&build_current(i, n)?, rho)).collect()
}

/// `M_i = tr(σ^z_i ρ)` for sites `i = 1..n`.
pub fn magnetization_profile<T: Real>(rho: &DensityMatrix<T>, n: usize) -> Result<Vec<T>> {
    check_dim(rho, n)?;
    (1..=n)
        .map(|i| real_expectation(&site_operator(SiteKind::Z, i, n)?, rho))
        .collect()
}

/// Bond currents, site magnetizations and, if the bond currents agree
/// within `tol`, their common value.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportProfile<T: Real> {
    pub currents: Vec<T>,
    pub magnetizations: Vec<T>,
    pub uniform_current: Option<T>,
}

impl<T: Real> TransportProfile<T> {
    /// `max_i J_i - min_i J_i`.
    pub fn current_spread(&self) -> T {
        spread(&self.currents)
    }
}

pub(crate) fn spread<T: Real>(xs: &[T]) -> T {
    let hi = xs.iter().copied().fold(T::lit(f64::NEG_INFINITY), |a, b| a.max(b));
    let lo = xs.iter().copied().fold(T::lit(f64::INFINITY), |a, b| a.min(b));
    if xs.is_empty() {
        T::zero()
    } else {
        hi - lo
    }
}

pub fn transport_profile<T: Real>(rho: &DensityMatrix<T>, n: usize, tol: T) -> Result<TransportProfile<T>> {
    let currents = current_profile(rho, n)?;
    let magnetizations = magnetization_profile(rho, n)?;
    let uniform_current = if spread(&currents) < tol {
        Some(currents.iter().fold(T::zero(), |a, b| a + *b) / T::lit(currents.len() as f64))
    } else {
        None
    };
    Ok(TransportProfile {
        currents,
        magnetizations,
        uniform_current,
    })
}

/// `r_i = tr(σ^z_i L(ρ)) / 2` for interior sites `i = 2..n-1`.
pub fn continuity_residual<T: Real>(model: &OpenModel<T>, rho: &DensityMatrix<T>) -> Result<Vec<T>> {
    let n = model.n();
    check_dim(rho, n)?;
    let lr = DensityMatrix::new(apply_lindbladian(model, rho.matrix())?)?;
    let half = T::lit(0.5);
    (2..n)
        .map(|i| {
            let z = site_operator::<T>(SiteKind::Z, i, n)?;
            let m = lr.matrix();
            let v = z.iter().fold(Complex::new(T::zero(), T::zero()), |acc, (r, col, x)| acc + x * m[(col, r)]);
            Ok(v.re * half)
        })
        .collect()
}

/// Largest entry of `i[H, σ^z_i/2] - (j_{i-1} - j_i)` over all sites, with
/// `j_0 = j_n = 0`. Zero (to rounding) confirms the sign convention of
/// [`build_current`].
pub fn continuity_identity_defect<T: Real>(n: usize, delta: T) -> Result<T> {
    let h = build_xxz_hamiltonian::<T>(n, delta)?;
    let dim = 1 << n;
    let mut worst = T::zero();
    for i in 1..=n {
        let z = site_operator::<T>(SiteKind::Z, i, n)?.scale_real(T::lit(0.5));
        let lhs = h.commutator(&z)?.scale(c(0.0, 1.0));
        let mut rhs = SparseOperator::zeros(dim, dim);
        if i > 1 {
            rhs = rhs.plus(&build_current(i - 1, n)?)?;
        }
        if i < n {
            rhs = rhs.minus(&build_current(i, n)?)?;
        }
        worst = worst.max(lhs.max_abs_diff(&rhs)?);
    }
    Ok(worst)
}

/// `S ρ S†` with `S` the flip-parity.
pub fn flip_parity_image<T: Real>(rho: &DensityMatrix<T>, n: usize) -> Result<DensityMatrix<T>> {
    check_dim(rho, n)?;
    rho.conjugated_by(&build_flip_parity(n)?.adjoint())
}

/// Largest violation of `M_i(SρS†) = -M_{n+1-i}(ρ)` and
/// `J_i(SρS†) = J_{n-i}(ρ)`.
pub fn flip_parity_profile_defect<T: Real>(rho: &DensityMatrix<T>, n: usize) -> Result<T> {
    let img = flip_parity_image(rho, n)?;
    let (m, mi) = (magnetization_profile(rho, n)?, magnetization_profile(&img, n)?);
    let (j, ji) = (current_profile(rho, n)?, current_profile(&img, n)?);
    let mut worst = T::zero();
    for i in 0..n {
        worst = worst.max((mi[i] + m[n - 1 - i]).abs());
    }
    for i in 0..n - 1 {
        worst = worst.max((ji[i] - j[n - 2 - i]).abs());
    }
    Ok(worst)
}

/// Random density matrix `A A† / tr(A A†)` (for tests and diagnostics).
pub fn random_density<T: Real, R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix<T> {
    use rand_distr::{Distribution, StandardNormal};
    let a = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c::<T>(re, im)
    });
    let p = &a * a.adjoint();
    let tr = p.trace();
    DensityMatrix::new(p / tr).expect("square")
}
