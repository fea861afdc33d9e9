//! Vectorized Lindblad generators, full or restricted to symmetry blocks.
//!
//! Operators are vectorized row-major: `vec(x)[i·N + j] = x[i, j]`, so that
//! `vec(A x B) = (A ⊗ Bᵀ) vec(x)`. A block `(α, β)` of operator space is
//! coordinatized by `x̃ = V_α† x V_β`, again stacked row-major; a
//! superoperator on several blocks concatenates their coordinates.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::models::OpenModel;
use crate::operator::SparseOperator;
use crate::scalar::{c, cone, cr, czero, Complex, Real};
use crate::symmetry::{BlockSelection, SymmetryDecomposition};

/// Relative off-block norm above which a restriction is rejected.
pub const LEAKAGE_TOL: f64 = 1e-10;

/// One operator block inside a superoperator's coordinate vector.
#[derive(Clone, Debug)]
pub struct BlockPart<T: Real> {
    pub pair: (usize, usize),
    pub label: String,
    /// `V_α`
    pub left: SparseOperator<T>,
    /// `V_β`
    pub right: SparseOperator<T>,
    pub offset: usize,
}

impl<T: Real> BlockPart<T> {
    pub fn rows(&self) -> usize {
        self.left.ncols()
    }

    pub fn cols(&self) -> usize {
        self.right.ncols()
    }

    pub fn len(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_diagonal(&self) -> bool {
        self.pair.0 == self.pair.1
    }
}

/// Matrix of a Lindblad generator on some invariant set of operator blocks.
#[derive(Clone, Debug)]
pub struct Superoperator<T: Real> {
    label: String,
    ambient: usize,
    parts: Vec<BlockPart<T>>,
    matrix: SparseOperator<T>,
    leakage: T,
}

impl<T: Real> Superoperator<T> {
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Number of block coordinates.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Hilbert dimension `N` of the underlying chain.
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn matrix(&self) -> &SparseOperator<T> {
        &self.matrix
    }

    pub fn parts(&self) -> &[BlockPart<T>] {
        &self.parts
    }

    /// Relative off-block norm measured during restriction (0 for the full space).
    pub fn leakage(&self) -> T {
        self.leakage
    }

    /// True if some part is a diagonal block, i.e. the block can carry trace.
    pub fn is_trace_bearing(&self) -> bool {
        self.parts.iter().any(|p| p.is_diagonal() && !p.is_empty())
    }

    /// Block coordinates of an ambient operator `x`.
    pub fn coords_of(&self, x: &DMatrix<Complex<T>>) -> Vec<Complex<T>> {
        let mut out = Vec::with_capacity(self.dim());
        for p in &self.parts {
            let xt = p.left.adjoint().mul_dense(&p.right.dense_mul(x));
            for i in 0..p.rows() {
                for j in 0..p.cols() {
                    out.push(xt[(i, j)]);
                }
            }
        }
        out
    }

    /// The `x̃` matrix of part `k` from a coordinate vector.
    pub fn part_matrix(&self, k: usize, coords: &[Complex<T>]) -> DMatrix<Complex<T>> {
        let p = &self.parts[k];
        DMatrix::from_fn(p.rows(), p.cols(), |i, j| coords[p.offset + i * p.cols() + j])
    }

    /// The ambient operator `Σ V_α x̃ V_β†` with the given coordinates.
    pub fn operator_of(&self, coords: &[Complex<T>]) -> DMatrix<Complex<T>> {
        let mut x = DMatrix::from_element(self.ambient, self.ambient, czero());
        for (k, p) in self.parts.iter().enumerate() {
            let xt = self.part_matrix(k, coords);
            x += p.right.adjoint().dense_mul(&p.left.mul_dense(&xt));
        }
        x
    }

    /// Coefficients `t` with `tr(operator_of(c)) = Σ_k t_k c_k`.
    pub fn trace_functional(&self) -> Vec<Complex<T>> {
        let mut t = vec![czero(); self.dim()];
        for p in self.parts.iter().filter(|p| p.is_diagonal()) {
            for i in 0..p.rows() {
                t[p.offset + i * p.cols() + i] = cone();
            }
        }
        t
    }

    /// Coordinates of `x†` given those of `x`; the block must contain
    /// `(β, α)` whenever it contains `(α, β)`.
    pub fn adjoint_coords(&self, coords: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let mut out = vec![czero(); coords.len()];
        for p in &self.parts {
            let q = self
                .parts
                .iter()
                .find(|q| q.pair == (p.pair.1, p.pair.0))
                .ok_or_else(|| Error::InvalidParameter(format!("block {} is not closed under adjoint", self.label)))?;
            for i in 0..p.rows() {
                for j in 0..p.cols() {
                    out[q.offset + j * q.cols() + i] = coords[p.offset + i * p.cols() + j].conj();
                }
            }
        }
        Ok(out)
    }

    /// The operator in the basis `[V_α …]` of the sectors touched by the
    /// block, and whether those sectors span the whole space.
    pub fn sector_matrix(&self, coords: &[Complex<T>]) -> (DMatrix<Complex<T>>, bool) {
        let mut order: Vec<(usize, usize)> = Vec::new();
        for p in &self.parts {
            for (s, d) in [(p.pair.0, p.rows()), (p.pair.1, p.cols())] {
                if !order.iter().any(|&(t, _)| t == s) {
                    order.push((s, d));
                }
            }
        }
        let mut start = HashMap::new();
        let mut total = 0;
        for &(s, d) in &order {
            start.insert(s, total);
            total += d;
        }
        let mut m = DMatrix::from_element(total, total, czero());
        for (k, p) in self.parts.iter().enumerate() {
            let (r0, c0) = (start[&p.pair.0], start[&p.pair.1]);
            let x = self.part_matrix(k, coords);
            m.view_mut((r0, c0), (p.rows(), p.cols())).copy_from(&x);
        }
        (m, total == self.ambient)
    }

    pub fn apply(&self, coords: &[Complex<T>]) -> Vec<Complex<T>> {
        self.matrix.matvec(coords)
    }

    /// Writes `row col re im` lines, one per stored entry.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# {} x {} block {}", self.dim(), self.dim(), self.label)?;
        for (r, col, v) in self.matrix.iter() {
            writeln!(w, "{r} {col} {:.16e} {:.16e}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// Row-major `vec(x)`.
pub fn vectorize<T: Real>(x: &DMatrix<Complex<T>>) -> Vec<Complex<T>> {
    let mut v = Vec::with_capacity(x.len());
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            v.push(x[(i, j)]);
        }
    }
    v
}

/// Inverse of [`vectorize`] for an `n × n` operator.
pub fn unvectorize<T: Real>(v: &[Complex<T>], n: usize) -> Result<DMatrix<Complex<T>>> {
    if v.len() != n * n {
        return Err(Error::DimensionMismatch {
            left: v.len(),
            right: n * n,
        });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| v[i * n + j]))
}

/// `Ŝ = S ⊗ S̄`, the matrix of `x ↦ S x S†`.
pub fn conjugation_superop<T: Real>(s: &SparseOperator<T>) -> SparseOperator<T> {
    s.kron(&s.conj())
}

fn dissipation_rate<T: Real>(model: &OpenModel<T>) -> Result<SparseOperator<T>> {
    let n = model.dim();
    let mut k = SparseOperator::zeros(n, n);
    for l in model.jumps() {
        k = k.plus(&l.adjoint().matmul(l)?)?;
    }
    Ok(k)
}

/// The full `N² × N²` generator.
pub fn assemble_liouvillian<T: Real>(model: &OpenModel<T>) -> Result<Superoperator<T>> {
    let n = model.dim();
    let id = SparseOperator::identity(n);
    let h = model.hamiltonian();
    let mut m = h
        .kron(&id)
        .minus(&id.kron(&h.transpose()))?
        .scale(c(0.0, -1.0));
    let k = dissipation_rate(model)?;
    let half = T::lit(0.5);
    m = m.minus(&k.kron(&id).plus(&id.kron(&k.transpose()))?.scale_real(half))?;
    for l in model.jumps() {
        m = m.plus(&l.kron(&l.conj()))?;
    }
    Ok(Superoperator {
        label: "full".into(),
        ambient: n,
        parts: vec![BlockPart {
            pair: (0, 0),
            label: "full".into(),
            left: id.clone(),
            right: id,
            offset: 0,
        }],
        matrix: m,
        leakage: T::zero(),
    })
}

/// Matrix-free `L(x) = -i[H, x] + Σ_m (L_m x L_m† - ½{L_m†L_m, x})`.
pub fn apply_lindbladian<T: Real>(model: &OpenModel<T>, x: &DMatrix<Complex<T>>) -> Result<DMatrix<Complex<T>>> {
    let n = model.dim();
    if x.nrows() != n || x.ncols() != n {
        return Err(Error::DimensionMismatch {
            left: x.nrows(),
            right: n,
        });
    }
    let h = model.hamiltonian();
    let mi = c::<T>(0.0, -1.0);
    let mut out = (h.mul_dense(x) - h.dense_mul(x)) * mi;
    let half = cr(T::lit(0.5));
    for l in model.jumps() {
        let k = l.adjoint().matmul(l)?;
        out += l.adjoint().dense_mul(&l.mul_dense(x));
        out -= (k.mul_dense(x) + k.dense_mul(x)) * half;
    }
    Ok(out)
}

/// Which factor of a term `coef · A x B` is the identity.
enum Factor {
    Identity,
    Op(usize),
}

/// Restriction of the model's generator to the blocks listed in `selection`.
///
/// The blocks are built from the compressed operators `V_α'† A V_α`
/// without forming the full superoperator. The norm of everything mapped
/// outside the selection is measured; if it exceeds `1e-10` relative to the
/// in-block norm the selection is not invariant and
/// [`Error::LeakageDetected`] is returned.
pub fn restrict<T: Real>(
    model: &OpenModel<T>,
    dec: &SymmetryDecomposition<T>,
    selection: &BlockSelection,
) -> Result<Superoperator<T>> {
    let n = model.dim();
    if dec.ambient_dim() != n {
        return Err(Error::DimensionMismatch {
            left: dec.ambient_dim(),
            right: n,
        });
    }
    let sectors = dec.sectors();
    let ns = sectors.len();
    for &(a, b) in &selection.members {
        if a >= ns || b >= ns {
            return Err(Error::InvalidParameter(format!("block ({a},{b}) outside decomposition")));
        }
    }

    // ops: H, K, L_m, L_m†
    let mut ops = vec![model.hamiltonian().clone(), dissipation_rate(model)?];
    for l in model.jumps() {
        ops.push(l.clone());
        ops.push(l.adjoint());
    }
    let half = c::<T>(-0.5, 0.0);
    let mut terms: Vec<(Factor, Factor, Complex<T>)> = vec![
        (Factor::Op(0), Factor::Identity, c(0.0, -1.0)),
        (Factor::Identity, Factor::Op(0), c(0.0, 1.0)),
        (Factor::Op(1), Factor::Identity, half),
        (Factor::Identity, Factor::Op(1), half),
    ];
    for m in 0..model.jumps().len() {
        terms.push((Factor::Op(2 + 2 * m), Factor::Op(3 + 2 * m), cone()));
    }

    // compressed[op][(α', α)] = V_α'† op V_α, computed lazily
    let mut compressed: Vec<HashMap<(usize, usize), SparseOperator<T>>> = vec![HashMap::new(); ops.len()];
    let mut comp = |o: usize, a: usize, b: usize| -> Result<SparseOperator<T>> {
        if let Some(x) = compressed[o].get(&(a, b)) {
            return Ok(x.clone());
        }
        let x = sectors[a]
            .isometry
            .adjoint()
            .matmul(&ops[o].matmul(&sectors[b].isometry)?)?;
        compressed[o].insert((a, b), x.clone());
        Ok(x)
    };

    let mut parts = Vec::with_capacity(selection.members.len());
    let mut offset_of = HashMap::new();
    let mut offset = 0;
    for &(a, b) in &selection.members {
        let label = if a == b {
            sectors[a].label.to_string()
        } else {
            format!("{}x{}", sectors[a].label, sectors[b].label)
        };
        offset_of.insert((a, b), offset);
        parts.push(BlockPart {
            pair: (a, b),
            label,
            left: sectors[a].isometry.clone(),
            right: sectors[b].isometry.clone(),
            offset,
        });
        offset += sectors[a].dim() * sectors[b].dim();
    }
    let dim = offset;
    let dims = dec.dims();

    let mut inner = Vec::new();
    let mut outer: HashMap<(usize, usize, usize, usize), Vec<(usize, usize, Complex<T>)>> = HashMap::new();
    for &(a, b) in &selection.members {
        let src = offset_of[&(a, b)];
        let db = dims[b];
        for (fa, fb, coef) in &terms {
            let targets_a: Vec<usize> = match fa {
                Factor::Identity => vec![a],
                Factor::Op(_) => (0..ns).collect(),
            };
            let targets_b: Vec<usize> = match fb {
                Factor::Identity => vec![b],
                Factor::Op(_) => (0..ns).collect(),
            };
            for &ta in &targets_a {
                let amat = match fa {
                    Factor::Identity => None,
                    Factor::Op(o) => {
                        let x = comp(*o, ta, a)?;
                        if x.is_zero() {
                            continue;
                        }
                        Some(x)
                    }
                };
                for &tb in &targets_b {
                    // (B_{β β'})ᵀ
                    let bmat = match fb {
                        Factor::Identity => None,
                        Factor::Op(o) => {
                            let x = comp(*o, b, tb)?;
                            if x.is_zero() {
                                continue;
                            }
                            Some(x)
                        }
                    };
                    let dtb = dims[tb];
                    let target = offset_of.get(&(ta, tb)).copied();
                    let a_entries: Vec<(usize, usize, Complex<T>)> = match &amat {
                        None => (0..dims[a]).map(|i| (i, i, cone())).collect(),
                        Some(x) => x.iter().collect(),
                    };
                    let b_entries: Vec<(usize, usize, Complex<T>)> = match &bmat {
                        None => (0..db).map(|i| (i, i, cone())).collect(),
                        Some(x) => x.iter().collect(),
                    };
                    for &(ra, ca, va) in &a_entries {
                        for &(rb, cb, vb) in &b_entries {
                            // source (ca, rb), target (ra, cb)
                            let row = ra * dtb + cb;
                            let col = src + ca * db + rb;
                            let v = *coef * va * vb;
                            match target {
                                Some(t) => inner.push((t + row, col, v)),
                                None => outer.entry((ta, tb, a, b)).or_default().push((row, col, v)),
                            }
                        }
                    }
                }
            }
        }
    }
    let matrix = SparseOperator::from_triplets(dim, dim, inner);
    let mut leak2 = T::zero();
    for ((ta, tb, _, _), trip) in outer {
        let blk = SparseOperator::from_triplets(dims[ta] * dims[tb], dim, trip);
        leak2 += blk.frobenius_norm().powi(2);
    }
    let norm = matrix.frobenius_norm();
    let leakage = if norm > T::zero() {
        leak2.sqrt() / norm
    } else if leak2 > T::zero() {
        T::max_value().unwrap_or(T::one())
    } else {
        T::zero()
    };
    if leakage > T::lit(LEAKAGE_TOL) {
        return Err(Error::LeakageDetected {
            block: selection.label.clone(),
            leakage: leakage.to_f64_lossy(),
        });
    }
    Ok(Superoperator {
        label: selection.label.clone(),
        ambient: n,
        parts,
        matrix,
        leakage,
    })
}

/// Restrictions to every diagonal block `(α, α)` of `dec`, in parallel.
pub fn restrict_diagonal_blocks<T: Real>(
    model: &OpenModel<T>,
    dec: &SymmetryDecomposition<T>,
) -> Result<Vec<Superoperator<T>>> {
    use rayon::prelude::*;
    (0..dec.len())
        .into_par_iter()
        .map(|a| restrict(model, dec, &BlockSelection::diagonal(dec, a)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_flip_parity, Drive, XxzParams};
    use crate::operator::{site_operator, SiteKind};
    use crate::symmetry::{flip_parity_sectors, magnetization_parity_sectors, operator_blocks, quotient_blocks};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type M = DMatrix<Complex<f64>>;

    fn xxz(n: usize, drive: Drive) -> OpenModel<f64> {
        OpenModel::xxz(XxzParams::new(n, 0.7, 1.0, 0.2, drive).unwrap()).unwrap()
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> M {
        M::from_fn(n, n, |_, _| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn vectorization_round_trip_is_row_major() {
        let x = M::from_fn(3, 3, |i, j| Complex::new((3 * i + j) as f64, 0.0));
        let v = vectorize(&x);
        assert_eq!(v[1], Complex::new(1.0, 0.0));
        assert_eq!(v[3], Complex::new(3.0, 0.0));
        assert_eq!(unvectorize(&v, 3).unwrap(), x);
        assert!(unvectorize(&v, 2).is_err());
    }

    #[test]
    fn kron_convention_matches_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (a, b, x) = (random_matrix(3, &mut rng), random_matrix(3, &mut rng), random_matrix(3, &mut rng));
        let sa = SparseOperator::from_dense(&a);
        let sb = SparseOperator::from_dense(&b);
        let lhs = sa.kron(&sb.transpose()).matvec(&vectorize(&x));
        let rhs = vectorize(&(&a * &x * &b));
        for (l, r) in lhs.iter().zip(&rhs) {
            assert!((l - r).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_is_left_null_vector() {
        for drive in [Drive::Weak, Drive::Strong] {
            for n in 2..=4 {
                let sup = assemble_liouvillian(&xxz(n, drive)).unwrap();
                let id = vectorize(&M::identity(1 << n, 1 << n));
                let left = sup.matrix().adjoint_matvec(&id);
                assert!(left.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
            }
        }
    }

    #[test]
    fn amplitude_damping_spectrum() {
        let gamma: f64 = 0.8;
        let l = site_operator::<f64>(SiteKind::Minus, 1, 1).unwrap().scale_real(gamma.sqrt());
        let model = OpenModel::custom(1, SparseOperator::zeros(2, 2), vec![l]).unwrap();
        let sup = assemble_liouvillian(&model).unwrap();
        let mut ev: Vec<Complex<f64>> = sup.matrix().to_dense().schur().eigenvalues().unwrap().iter().copied().collect();
        ev.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap());
        let expected = [0.0, -gamma / 2.0, -gamma / 2.0, -gamma];
        for (e, x) in ev.iter().zip(expected) {
            assert!((e - Complex::new(x, 0.0)).norm() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn matrix_free_action_matches_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for drive in [Drive::Weak, Drive::Strong] {
            let model = xxz(3, drive);
            let sup = assemble_liouvillian(&model).unwrap();
            for _ in 0..20 {
                let x = random_matrix(8, &mut rng);
                let a = vectorize(&apply_lindbladian(&model, &x).unwrap());
                let b = sup.apply(&vectorize(&x));
                let d = a.iter().zip(&b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
                assert!(d < 1e-12);
            }
        }
    }

    #[test]
    fn trace_and_hermiticity_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=6 {
            for drive in [Drive::Weak, Drive::Strong] {
                let model = xxz(n, drive);
                let x = random_matrix(1 << n, &mut rng);
                let lx = apply_lindbladian(&model, &x).unwrap();
                assert!(lx.trace().norm() < 1e-11, "n={n}");
                if n <= 4 {
                    let lxa = apply_lindbladian(&model, &x.adjoint()).unwrap();
                    assert!((lxa - lx.adjoint()).norm() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn trivial_restriction_equals_full_assembly() {
        let model = xxz(3, Drive::Weak);
        let dec = SymmetryDecomposition::trivial(8);
        let r = restrict(&model, &dec, &BlockSelection::all(&dec)).unwrap();
        let full = assemble_liouvillian(&model).unwrap();
        assert!(r.matrix().max_abs_diff(full.matrix()).unwrap() < 1e-13);
    }

    #[test]
    fn strong_blocks_are_invariant_and_match_full() {
        let n = 4;
        let model = xxz(n, Drive::Strong);
        let full = assemble_liouvillian(&model).unwrap();
        let dec = magnetization_parity_sectors::<f64>(n).unwrap();
        let mut total = 0;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for blk in operator_blocks(&dec) {
            let sel = BlockSelection::operator(&dec, blk.left, blk.right);
            let r = restrict(&model, &dec, &sel).unwrap();
            assert!(r.leakage() < 1e-10);
            total += r.dim();
            // compressed action equals full action on embedded operators
            let coords: Vec<Complex<f64>> =
                (0..r.dim()).map(|_| Complex::new(rng.random_range(-1.0..1.0), 0.3)).collect();
            let x = r.operator_of(&coords);
            let lx = unvectorize(&full.apply(&vectorize(&x)), 16).unwrap();
            let back = r.coords_of(&lx);
            let direct = r.apply(&coords);
            let d = back.iter().zip(&direct).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
            assert!(d < 1e-12);
            assert!((r.operator_of(&direct) - lx).norm() < 1e-11);
        }
        assert_eq!(total, 256);
    }

    #[test]
    fn dark_block_is_zero() {
        let model = xxz(4, Drive::Strong);
        let dec = magnetization_parity_sectors::<f64>(4).unwrap();
        let a = dec.find(|l| l.has("m", 0.0) && l.has("s", -1.0)).unwrap();
        let r = restrict(&model, &dec, &BlockSelection::diagonal(&dec, a)).unwrap();
        assert_eq!(r.dim(), 1);
        assert!(r.matrix().get(0, 0).norm() < 1e-14);
    }

    #[test]
    fn weak_drive_needs_quotient_blocks() {
        let model = xxz(2, Drive::Weak);
        let dec = flip_parity_sectors::<f64>(2).unwrap();
        assert!(matches!(
            restrict(&model, &dec, &BlockSelection::diagonal(&dec, 0)),
            Err(Error::LeakageDetected { .. })
        ));
        let q = quotient_blocks(&dec, 1e-8);
        let b1 = restrict(&model, &dec, &BlockSelection::quotient(0, &q[0])).unwrap();
        let b2 = restrict(&model, &dec, &BlockSelection::quotient(1, &q[1])).unwrap();
        assert_eq!(b1.dim() + b2.dim(), 16);
        // B1 mixes (+,+) with (-,-)
        let p = &b1.parts()[1];
        let cross = b1
            .matrix()
            .iter()
            .filter(|&(r, c, _)| r >= p.offset && c < p.offset)
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max);
        assert!(cross > 1e-3);
        assert!(!b2.trace_functional().iter().any(|t| t.norm() > 0.0));
        assert!(b1.is_trace_bearing() && !b2.is_trace_bearing());
    }

    #[test]
    fn conjugation_superop_commutes_for_weak_symmetry() {
        let model = xxz(3, Drive::Weak);
        let full = assemble_liouvillian(&model).unwrap();
        let s = conjugation_superop(&build_flip_parity::<f64>(3).unwrap());
        let lhs = full.matrix().matmul(&s).unwrap();
        let rhs = s.matmul(full.matrix()).unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn triplet_dump() {
        let model = xxz(2, Drive::Strong);
        let sup = assemble_liouvillian(&model).unwrap();
        let mut buf = Vec::new();
        sup.write_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), sup.matrix().nnz() + 1);
    }
}
