//! Boundary-driven open XXZ chains: Hamiltonian, jump operators, symmetry
//! operators and the bond current.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::operator::{site_operator, BasisState, SiteKind, SparseOperator};
use crate::scalar::{cone, cr, Complex, Real};

/// Which pair of boundary baths couples to the chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Drive {
    /// Four single-site flips on sites 1 and n.
    Weak,
    /// Two pair hops between sites 1 and n; conserves magnetization.
    Strong,
}

impl fmt::Display for Drive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Drive::Weak => "weak",
            Drive::Strong => "strong",
        })
    }
}

impl FromStr for Drive {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weak" => Ok(Drive::Weak),
            "strong" => Ok(Drive::Strong),
            other => Err(Error::InvalidParameter(format!("unknown drive {other:?}"))),
        }
    }
}

/// Physical parameters of the driven chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XxzParams<T: Real> {
    pub n: usize,
    pub delta: T,
    pub gamma: T,
    pub mu: T,
    pub drive: Drive,
}

impl<T: Real> XxzParams<T> {
    pub fn new(n: usize, delta: T, gamma: T, mu: T, drive: Drive) -> Result<Self> {
        let p = Self {
            n,
            delta,
            gamma,
            mu,
            drive,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_chain(self.n)?;
        check_bath(self.gamma, self.mu)?;
        if !self.delta.is_finite() {
            return Err(Error::InvalidParameter("delta must be finite".into()));
        }
        Ok(())
    }
}

/// Hamiltonian plus jump operators on `n` spins.
#[derive(Clone, Debug)]
pub struct OpenModel<T: Real> {
    n: usize,
    params: Option<XxzParams<T>>,
    hamiltonian: SparseOperator<T>,
    jumps: Vec<SparseOperator<T>>,
}

impl<T: Real> OpenModel<T> {
    /// The driven XXZ chain.
    pub fn xxz(params: XxzParams<T>) -> Result<Self> {
        params.validate()?;
        let hamiltonian = build_xxz_hamiltonian(params.n, params.delta)?;
        let jumps = match params.drive {
            Drive::Weak => build_weak_drive(params.n, params.gamma, params.mu)?.to_vec(),
            Drive::Strong => build_strong_drive(params.n, params.gamma, params.mu)?.to_vec(),
        };
        Ok(Self {
            n: params.n,
            params: Some(params),
            hamiltonian,
            jumps,
        })
    }

    /// Arbitrary Hamiltonian and jumps on `n` spins.
    pub fn custom(n: usize, hamiltonian: SparseOperator<T>, jumps: Vec<SparseOperator<T>>) -> Result<Self> {
        let dim = 1usize << n;
        for op in std::iter::once(&hamiltonian).chain(jumps.iter()) {
            if op.nrows() != dim || op.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    left: op.nrows(),
                    right: dim,
                });
            }
        }
        if !hamiltonian.is_hermitian(T::lit(1e-12)) {
            return Err(Error::InvalidParameter("Hamiltonian is not Hermitian".into()));
        }
        Ok(Self {
            n,
            params: None,
            hamiltonian,
            jumps,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn params(&self) -> Option<&XxzParams<T>> {
        self.params.as_ref()
    }

    pub fn hamiltonian(&self) -> &SparseOperator<T> {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[SparseOperator<T>] {
        &self.jumps
    }
}

fn check_chain(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("chain length {n} < 2")));
    }
    if n > 16 {
        return Err(Error::InvalidParameter(format!("chain length {n} > 16")));
    }
    Ok(())
}

fn check_bath<T: Real>(gamma: T, mu: T) -> Result<()> {
    if !(gamma > T::zero()) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} must be > 0")));
    }
    if !(mu >= T::zero() && mu <= T::one()) {
        return Err(Error::InvalidParameter(format!("mu = {mu} outside [0, 1]")));
    }
    Ok(())
}

fn pair<T: Real>(a: SiteKind, i: usize, b: SiteKind, j: usize, n: usize) -> Result<SparseOperator<T>> {
    site_operator::<T>(a, i, n)?.matmul(&site_operator(b, j, n)?)
}

/// Two-site XXZ coupling `σ^x σ^x + σ^y σ^y + Δ σ^z σ^z` on bond `(i, i+1)`.
pub fn build_bond_hamiltonian<T: Real>(i: usize, n: usize, delta: T) -> Result<SparseOperator<T>> {
    if i == 0 || i >= n {
        return Err(Error::BondOutOfRange { bond: i, n });
    }
    let xx = pair::<T>(SiteKind::X, i, SiteKind::X, i + 1, n)?;
    let yy = pair::<T>(SiteKind::Y, i, SiteKind::Y, i + 1, n)?;
    let zz = pair::<T>(SiteKind::Z, i, SiteKind::Z, i + 1, n)?;
    xx.plus(&yy)?.plus(&zz.scale_real(delta))
}

/// `H = Σ_{i<n} [σ^x_i σ^x_{i+1} + σ^y_i σ^y_{i+1} + Δ σ^z_i σ^z_{i+1}]`.
pub fn build_xxz_hamiltonian<T: Real>(n: usize, delta: T) -> Result<SparseOperator<T>> {
    check_chain(n)?;
    let mut h = SparseOperator::zeros(1 << n, 1 << n);
    for i in 1..n {
        h = h.plus(&build_bond_hamiltonian(i, n, delta)?)?;
    }
    Ok(h)
}

/// Boundary flips, in order `[√(Γ(1-μ)) σ^+_1, √(Γ(1+μ)) σ^-_1, √(Γ(1+μ)) σ^+_n, √(Γ(1-μ)) σ^-_n]`.
pub fn build_weak_drive<T: Real>(n: usize, gamma: T, mu: T) -> Result<[SparseOperator<T>; 4]> {
    check_chain(n)?;
    check_bath(gamma, mu)?;
    let lo = (gamma * (T::one() - mu)).sqrt();
    let hi = (gamma * (T::one() + mu)).sqrt();
    Ok([
        site_operator::<T>(SiteKind::Plus, 1, n)?.scale_real(lo),
        site_operator::<T>(SiteKind::Minus, 1, n)?.scale_real(hi),
        site_operator::<T>(SiteKind::Plus, n, n)?.scale_real(hi),
        site_operator::<T>(SiteKind::Minus, n, n)?.scale_real(lo),
    ])
}

/// Pair hops `[Γ(1-μ) σ^+_1 σ^-_n, Γ(1+μ) σ^-_1 σ^+_n]`.
///
/// The amplitudes are `Γ(1±μ)` without a square root, so the hop rates are
/// `Γ²(1±μ)²`.
pub fn build_strong_drive<T: Real>(n: usize, gamma: T, mu: T) -> Result<[SparseOperator<T>; 2]> {
    check_chain(n)?;
    check_bath(gamma, mu)?;
    let lo = gamma * (T::one() - mu);
    let hi = gamma * (T::one() + mu);
    Ok([
        pair::<T>(SiteKind::Plus, 1, SiteKind::Minus, n, n)?.scale_real(lo),
        pair::<T>(SiteKind::Minus, 1, SiteKind::Plus, n, n)?.scale_real(hi),
    ])
}

/// Site reflection `|a_1 … a_n⟩ ↦ |a_n … a_1⟩`.
pub fn build_parity<T: Real>(n: usize) -> Result<SparseOperator<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let dim = 1usize << n;
    let triplets = (0..dim).map(|col| {
        let row = BasisState::new(n, col).expect("valid index").reversed().index();
        (row, col, cone())
    });
    Ok(SparseOperator::from_triplets(dim, dim, triplets))
}

/// Spin flip on every site, `Π_i σ^x_i`.
pub fn build_global_flip<T: Real>(n: usize) -> Result<SparseOperator<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let dim = 1usize << n;
    Ok(SparseOperator::from_triplets(
        dim,
        dim,
        (0..dim).map(|col| (col ^ (dim - 1), col, cone())),
    ))
}

/// Parity-like Z₂ symmetry `S = P Π_i σ^x_i`.
pub fn build_flip_parity<T: Real>(n: usize) -> Result<SparseOperator<T>> {
    build_parity::<T>(n)?.matmul(&build_global_flip(n)?)
}

/// Total magnetization `M = Σ_i σ^z_i` (diagonal).
pub fn build_magnetization<T: Real>(n: usize) -> Result<SparseOperator<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let diag: Vec<Complex<T>> = (0..1usize << n)
        .map(|i| cr(T::lit(BasisState::new(n, i).expect("valid index").magnetization() as f64)))
        .collect();
    Ok(SparseOperator::from_diagonal(&diag))
}

/// Bond current `j_i = σ^x_i σ^y_{i+1} - σ^y_i σ^x_{i+1}`.
///
/// In ladder form this is `2i(σ^+_i σ^-_{i+1} - σ^-_i σ^+_{i+1})`; it measures
/// magnetization flowing from site `i` to `i+1`, so that
/// `i[H, σ^z_i/2] = j_{i-1} - j_i` in the bulk.
pub fn build_current<T: Real>(i: usize, n: usize) -> Result<SparseOperator<T>> {
    if i == 0 || i >= n {
        return Err(Error::BondOutOfRange { bond: i, n });
    }
    let xy = pair::<T>(SiteKind::X, i, SiteKind::Y, i + 1, n)?;
    let yx = pair::<T>(SiteKind::Y, i, SiteKind::X, i + 1, n)?;
    xy.minus(&yx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use crate::scalar::czero;

    type Op = SparseOperator<f64>;

    fn dense_eigs(op: &Op) -> Vec<f64> {
        let mut ev: Vec<f64> = op.to_dense().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    fn apply(op: &Op, s: &str) -> Vec<(String, Complex<f64>)> {
        let st = BasisState::parse(s).unwrap();
        op.column(st.index())
            .into_iter()
            .map(|(r, v)| (BasisState::new(st.n(), r).unwrap().to_string(), v))
            .collect()
    }

    #[test]
    fn two_site_spectra() {
        let ev = dense_eigs(&build_xxz_hamiltonian(2, 1.0).unwrap());
        for (a, b) in ev.iter().zip([-3.0, 1.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let ev = dense_eigs(&build_xxz_hamiltonian(2, 0.0).unwrap());
        for (a, b) in ev.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn hamiltonian_symmetries() {
        for n in 2..=8 {
            for delta in [0.0, 0.5, 1.0, 2.0] {
                let h: Op = build_xxz_hamiltonian(n, delta).unwrap();
                assert!(h.is_hermitian(0.0));
                let m = build_magnetization(n).unwrap();
                assert!(h.commutator(&m).unwrap().is_zero());
                let s = build_flip_parity(n).unwrap();
                assert!(h.commutator(&s).unwrap().is_zero(), "n={n}");
            }
        }
        assert!(build_xxz_hamiltonian::<f64>(1, 1.0).is_err());
    }

    #[test]
    fn weak_drive_amplitudes() {
        let l = build_weak_drive::<f64>(3, 1.0, 1.0).unwrap();
        assert!(l[0].is_zero() && l[3].is_zero());
        let l = build_weak_drive::<f64>(3, 2.0, 0.0).unwrap();
        for op in &l {
            assert!((op.max_abs() - 2f64.sqrt()).abs() < 1e-15);
        }
        let l = build_weak_drive::<f64>(2, 1.0, 0.2).unwrap();
        let expect = [
            site_operator(SiteKind::Plus, 1, 2).unwrap().scale_real(0.8f64.sqrt()),
            site_operator(SiteKind::Minus, 1, 2).unwrap().scale_real(1.2f64.sqrt()),
            site_operator(SiteKind::Plus, 2, 2).unwrap().scale_real(1.2f64.sqrt()),
            site_operator(SiteKind::Minus, 2, 2).unwrap().scale_real(0.8f64.sqrt()),
        ];
        for (a, b) in l.iter().zip(expect.iter()) {
            assert_eq!(a, b);
        }
        assert!(build_weak_drive::<f64>(3, 0.0, 0.2).is_err());
        assert!(build_weak_drive::<f64>(3, 1.0, 1.5).is_err());
    }

    #[test]
    fn strong_drive_structure() {
        let n = 4;
        let l = build_strong_drive::<f64>(n, 1.0, 0.2).unwrap();
        let m = build_magnetization(n).unwrap();
        let s = build_flip_parity(n).unwrap();
        for op in &l {
            assert!(op.commutator(&m).unwrap().is_zero());
            assert!(op.commutator(&s).unwrap().is_zero());
        }
        // L_1 = 0.8 σ^+_1 σ^-_4 takes |1 a a 0⟩ to |0 a a 1⟩.
        assert_eq!(apply(&l[0], "1000"), vec![("0001".to_string(), c(0.8, 0.0))]);
        assert_eq!(apply(&l[0], "1101"), vec![]);
        assert_eq!(apply(&l[1], "0111"), vec![("1110".to_string(), c(1.2, 0.0))]);
        // dense Kronecker oracle
        let sp = crate::operator::site_operator::<f64>(SiteKind::Plus, 1, 1).unwrap();
        let sm = crate::operator::site_operator::<f64>(SiteKind::Minus, 1, 1).unwrap();
        let id2 = Op::identity(2);
        let oracle = sp.kron(&id2).kron(&id2).kron(&sm).scale_real(0.8);
        assert!(l[0].max_abs_diff(&oracle).unwrap() < 1e-15);
        assert!(build_strong_drive::<f64>(n, 1.0, 1.0).unwrap()[0].is_zero());
    }

    #[test]
    fn parity_and_flip_parity() {
        let p: Op = build_parity(4).unwrap();
        assert_eq!(apply(&p, "0110"), vec![("0110".into(), c(1.0, 0.0))]);
        assert_eq!(apply(&p, "1000"), vec![("0001".into(), c(1.0, 0.0))]);
        let p5: Op = build_parity(5).unwrap();
        assert_eq!(p5.matmul(&p5).unwrap(), Op::identity(32));
        let s: Op = build_flip_parity(4).unwrap();
        assert_eq!(apply(&s, "0110"), vec![("1001".into(), c(1.0, 0.0))]);
        assert_eq!(apply(&s, "1001"), vec![("0110".into(), c(1.0, 0.0))]);
        assert_eq!(s.matmul(&s).unwrap(), Op::identity(16));
        assert_eq!(s.unitarity_defect(), 0.0);
    }

    #[test]
    fn magnetization_spectrum() {
        let m: Op = build_magnetization(4).unwrap();
        assert_eq!(m.get(0, 0), c(4.0, 0.0));
        let idx = BasisState::parse("0101").unwrap().index();
        assert_eq!(m.get(idx, idx), czero());
        let m3: Op = build_magnetization(3).unwrap();
        let mut d: Vec<i32> = m3.diagonal().iter().map(|v| v.re as i32).collect();
        d.sort();
        assert_eq!(d, vec![-3, -1, -1, -1, 1, 1, 1, 3]);
    }

    #[test]
    fn current_forms_agree() {
        for n in 2..=5 {
            for i in 1..n {
                let j: Op = build_current(i, n).unwrap();
                let pm = pair::<f64>(SiteKind::Plus, i, SiteKind::Minus, i + 1, n).unwrap();
                let mp = pair::<f64>(SiteKind::Minus, i, SiteKind::Plus, i + 1, n).unwrap();
                let ladder = pm.minus(&mp).unwrap().scale(c(0.0, 2.0));
                assert!(j.max_abs_diff(&ladder).unwrap() < 1e-15);
                // the opposite-sign ladder expression is exactly -j_i
                let flipped = mp.minus(&pm).unwrap().scale(c(0.0, 2.0));
                assert!(j.plus(&flipped).unwrap().is_zero());
                assert!(j.is_hermitian(0.0));
                assert_eq!(j.trace(), czero());
                assert!(j.diagonal().iter().all(|v| *v == czero()));
            }
        }
        assert!(build_current::<f64>(4, 4).is_err());
    }

    #[test]
    fn flip_parity_maps_weak_jumps_onto_each_other() {
        for n in 2..=6 {
            let s: Op = build_flip_parity(n).unwrap();
            let sd = s.adjoint();
            let l = build_weak_drive(n, 1.0, 0.2).unwrap();
            let conj = |x: &Op| s.matmul(x).unwrap().matmul(&sd).unwrap();
            assert_eq!(conj(&l[0]), l[3]);
            assert_eq!(conj(&l[1]), l[2]);
        }
    }

    #[test]
    fn model_invariants() {
        let p = XxzParams::new(4, 2.0, 1.0, 0.2, Drive::Weak).unwrap();
        let m: OpenModel<f64> = OpenModel::xxz(p).unwrap();
        assert_eq!(m.jumps().len(), 4);
        let p = XxzParams::new(4, 2.0, 1.0, 0.2, Drive::Strong).unwrap();
        let m: OpenModel<f64> = OpenModel::xxz(p).unwrap();
        assert_eq!(m.jumps().len(), 2);
        assert!(m.jumps().iter().all(|l| l.dim() == 16));
        assert!(OpenModel::custom(1, Op::identity(4), vec![]).is_err());
        let bad = Op::from_triplets(2, 2, vec![(0, 1, c(1.0, 0.0))]);
        assert!(OpenModel::custom(1, bad, vec![]).is_err());
    }
}
