//! Operator-space blocks induced by a symmetry decomposition.

use crate::scalar::{abs, Complex, Real};

use super::SymmetryDecomposition;

/// `B_{α,β} = {|ψ⟩⟨φ| : ψ ∈ H_α, φ ∈ H_β}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OperatorBlock {
    pub left: usize,
    pub right: usize,
    pub rows: usize,
    pub cols: usize,
}

impl OperatorBlock {
    pub fn dim(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_diagonal(&self) -> bool {
        self.left == self.right
    }
}

/// Eigenspace of the adjoint action `x ↦ S x S†` with eigenvalue
/// `s'_ν = s_α s̄_β`, i.e. the direct sum of the member blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct QuotientBlock<T: Real> {
    pub eigenvalue: Complex<T>,
    pub members: Vec<(usize, usize)>,
    pub dim: usize,
}

/// A set of operator blocks treated as one invariant subspace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSelection {
    pub label: String,
    pub members: Vec<(usize, usize)>,
}

impl BlockSelection {
    pub fn operator<T: Real>(dec: &SymmetryDecomposition<T>, alpha: usize, beta: usize) -> Self {
        let s = dec.sectors();
        let label = if alpha == beta {
            s[alpha].label.to_string()
        } else {
            format!("{}x{}", s[alpha].label, s[beta].label)
        };
        Self {
            label,
            members: vec![(alpha, beta)],
        }
    }

    pub fn diagonal<T: Real>(dec: &SymmetryDecomposition<T>, alpha: usize) -> Self {
        Self::operator(dec, alpha, alpha)
    }

    pub fn quotient<T: Real>(index: usize, block: &QuotientBlock<T>) -> Self {
        Self {
            label: format!("B{}", index + 1),
            members: block.members.clone(),
        }
    }

    /// Every block of `dec`.
    pub fn all<T: Real>(dec: &SymmetryDecomposition<T>) -> Self {
        let k = dec.len();
        Self {
            label: "full".into(),
            members: (0..k).flat_map(|a| (0..k).map(move |b| (a, b))).collect(),
        }
    }

    pub fn contains(&self, pair: (usize, usize)) -> bool {
        self.members.contains(&pair)
    }

    /// True if every member is a diagonal block `(α, α)` or the set is closed
    /// under `(α, β) ↦ (β, α)`.
    pub fn is_adjoint_closed(&self) -> bool {
        self.members.iter().all(|&(a, b)| self.contains((b, a)))
    }
}

/// All `n_S²` blocks, row-major in `(α, β)`.
pub fn operator_blocks<T: Real>(dec: &SymmetryDecomposition<T>) -> Vec<OperatorBlock> {
    let dims = dec.dims();
    let mut out = Vec::with_capacity(dims.len() * dims.len());
    for (a, &ra) in dims.iter().enumerate() {
        for (b, &cb) in dims.iter().enumerate() {
            out.push(OperatorBlock {
                left: a,
                right: b,
                rows: ra,
                cols: cb,
            });
        }
    }
    out
}

/// Groups blocks by the eigenvalue `Π_k s_{α,k} s̄_{β,k}` of the adjoint
/// action of every decomposition stage. The block with eigenvalue 1 (which
/// holds every diagonal pair) comes first; the rest are ordered by phase.
pub fn quotient_blocks<T: Real>(dec: &SymmetryDecomposition<T>, tol: T) -> Vec<QuotientBlock<T>> {
    let dims = dec.dims();
    let labels: Vec<&Vec<Complex<T>>> = dec.sectors().iter().map(|s| &s.label.values).collect();
    let key = |a: usize, b: usize| -> Vec<Complex<T>> {
        labels[a]
            .iter()
            .zip(labels[b].iter())
            .map(|(x, y)| *x * y.conj())
            .collect()
    };
    let close = |x: &[Complex<T>], y: &[Complex<T>]| {
        x.len() == y.len() && x.iter().zip(y).all(|(p, q)| abs(*p - *q) <= tol)
    };
    let mut groups: Vec<(Vec<Complex<T>>, Vec<(usize, usize)>)> = Vec::new();
    for a in 0..dims.len() {
        for b in 0..dims.len() {
            let k = key(a, b);
            match groups.iter_mut().find(|(g, _)| close(g, &k)) {
                Some((_, members)) => members.push((a, b)),
                None => groups.push((k, vec![(a, b)])),
            }
        }
    }
    let is_one = |k: &[Complex<T>]| k.iter().all(|z| abs(*z - Complex::new(T::one(), T::zero())) <= tol);
    let phase_key = |k: &[Complex<T>]| -> Vec<f64> {
        k.iter()
            .map(|z| {
                let p = z.im.atan2(z.re).to_f64_lossy();
                if p < -1e-12 {
                    p + std::f64::consts::TAU
                } else {
                    p.max(0.0)
                }
            })
            .collect()
    };
    groups.sort_by(|(ka, _), (kb, _)| {
        is_one(kb)
            .cmp(&is_one(ka))
            .then_with(|| phase_key(ka).partial_cmp(&phase_key(kb)).unwrap_or(std::cmp::Ordering::Equal))
    });
    groups
        .into_iter()
        .map(|(k, members)| QuotientBlock {
            eigenvalue: k.iter().fold(Complex::new(T::one(), T::zero()), |acc, z| acc * z),
            dim: members.iter().map(|&(a, b)| dims[a] * dims[b]).sum(),
            members,
        })
        .collect()
}
