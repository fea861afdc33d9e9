//! Quantum-jump unraveling of the Lindblad flow.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::models::{build_current, OpenModel};
use crate::operator::{site_operator, SiteKind, SparseOperator};
use crate::scalar::{c, ci, cr, czero, Complex, Real};
use crate::symmetry::{magnetization_parity_sectors, SectorSpec};

use super::trotter::TrotterPropagator;

/// Deepest step halving allowed by the norm-drop guard.
pub const MAX_REFINEMENT: usize = 10;
/// A step is rejected if it removes more than this fraction of the norm.
pub const MAX_NORM_DROP: f64 = 0.1;

/// Parameters of a trajectory run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryConfig<T: Real> {
    pub dt: T,
    pub t_burn: T,
    /// Length of the sampling window after burn-in.
    pub t_sample: T,
    /// Time between samples; must be a multiple of `dt`.
    pub stride: T,
    pub n_traj: usize,
    pub seed: u64,
    /// 1 or 2.
    pub trotter_order: u8,
    /// Sector the random initial states are drawn from.
    pub sector: SectorSpec,
}

impl<T: Real> TrajectoryConfig<T> {
    /// `dt = 0.01`, burn-in `20/Γ`, 100 time units of samples at stride 1,
    /// second-order splitting, full space.
    pub fn with_defaults(gamma: T, n_traj: usize, seed: u64) -> Self {
        Self {
            dt: T::lit(0.01),
            t_burn: T::lit(20.0) / gamma,
            t_sample: T::lit(100.0),
            stride: T::one(),
            n_traj,
            seed,
            trotter_order: 2,
            sector: SectorSpec::Full,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.dt > T::zero()) {
            return bad(format!("dt = {} must be > 0", self.dt));
        }
        if !(self.t_sample > T::zero()) {
            return bad(format!("t_sample = {} must be > 0", self.t_sample));
        }
        if self.t_burn < T::zero() {
            return bad(format!("t_burn = {} must be >= 0", self.t_burn));
        }
        if self.n_traj == 0 {
            return bad("n_traj must be >= 1".into());
        }
        if !(self.trotter_order == 1 || self.trotter_order == 2) {
            return bad(format!("trotter order {} not in {{1, 2}}", self.trotter_order));
        }
        let ratio = (self.stride / self.dt).to_f64_lossy();
        if ratio < 1.0 - 1e-9 || (ratio - ratio.round()).abs() > 1e-6 {
            return bad(format!("stride {} is not a multiple of dt {}", self.stride, self.dt));
        }
        Ok(())
    }

    fn steps(&self, t: T) -> usize {
        (t / self.dt).to_f64_lossy().round() as usize
    }

    /// Number of samples per trajectory.
    pub fn samples(&self) -> usize {
        ((self.t_sample / self.stride).to_f64_lossy().round() as usize).max(1)
    }
}

/// Observables recorded along one trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySeries<T: Real> {
    pub times: Vec<T>,
    /// `currents[k][i]`: bond `i+1` at sample `k`.
    pub currents: Vec<Vec<T>>,
    /// `magnetizations[k][i]`: site `i+1` at sample `k`.
    pub magnetizations: Vec<Vec<T>>,
    pub jumps: usize,
    /// Steps split by the norm-drop guard.
    pub refined_steps: usize,
    /// Largest relative amplitude outside the initial sector seen at a sample.
    pub max_leakage: T,
}

enum Coherent<T: Real> {
    /// XXZ chain: bond splitting for `H`, then the decay factor.
    Trotter { props: Vec<TrotterPropagator<T>> },
    /// Anything else: Taylor series of `exp(-i H_eff τ)`.
    Taylor { h_eff: SparseOperator<T> },
}

enum Decay<T: Real> {
    /// `exp(-K τ)` for diagonal `K = ½ Σ L†L`.
    Diagonal(Vec<T>),
    General(SparseOperator<T>),
}

/// Prepared propagators and observables for repeated trajectory runs.
pub struct TrajectoryEngine<T: Real> {
    n: usize,
    dim: usize,
    config: TrajectoryConfig<T>,
    coherent: Coherent<T>,
    decay: Decay<T>,
    jumps: Vec<SparseOperator<T>>,
    currents: Vec<SparseOperator<T>>,
    sz: Vec<SparseOperator<T>>,
    sector: Option<SparseOperator<T>>,
}

fn norm2<T: Real>(x: &[Complex<T>]) -> T {
    x.iter().fold(T::zero(), |a, v| a + v.norm_sqr())
}

/// `exp(-i A τ) x` by Taylor series (for small `‖A‖τ`).
fn taylor_exp<T: Real>(a: &SparseOperator<T>, tau: T, x: &mut Vec<Complex<T>>, anti: bool) {
    // anti: exp(-A τ) instead of exp(-i A τ)
    let factor = if anti { cr(-tau) } else { ci::<T>() * cr(-tau) };
    let mut term = x.clone();
    let mut sum = x.clone();
    let scale = norm2(x).sqrt();
    for k in 1..60 {
        let next = a.matvec(&term);
        let f = factor / cr(T::lit(k as f64));
        term = next.into_iter().map(|v| v * f).collect();
        for (s, t) in sum.iter_mut().zip(&term) {
            *s += *t;
        }
        if norm2(&term).sqrt() <= T::machine_eps() * scale {
            break;
        }
    }
    *x = sum;
}

impl<T: Real> TrajectoryEngine<T> {
    pub fn new(model: &OpenModel<T>, config: &TrajectoryConfig<T>) -> Result<Self> {
        config.validate()?;
        let n = model.n();
        let dim = model.dim();
        let mut k = SparseOperator::zeros(dim, dim);
        for l in model.jumps() {
            k = k.plus(&l.adjoint().matmul(l)?)?;
        }
        let k = k.scale_real(T::lit(0.5));
        let decay = if k.is_diagonal() {
            Decay::Diagonal(k.diagonal().iter().map(|z| z.re).collect())
        } else {
            Decay::General(k.clone())
        };
        let coherent = match model.params() {
            Some(p) => Coherent::Trotter {
                props: (0..=MAX_REFINEMENT)
                    .map(|lvl| {
                        let h = config.dt / T::lit((1u64 << lvl) as f64);
                        TrotterPropagator::new(n, p.delta, h, config.trotter_order)
                    })
                    .collect(),
            },
            None => Coherent::Taylor {
                h_eff: model.hamiltonian().minus(&k.scale(ci()))?,
            },
        };
        let sector = match config.sector {
            SectorSpec::Full => None,
            spec => {
                let dec = magnetization_parity_sectors::<T>(n)?;
                let idx = spec.resolve(&dec)?.expect("not full");
                Some(dec.sectors()[idx].isometry.clone())
            }
        };
        Ok(Self {
            n,
            dim,
            config: config.clone(),
            coherent,
            decay,
            jumps: model.jumps().to_vec(),
            currents: (1..n).map(|i| build_current(i, n)).collect::<Result<_>>()?,
            sz: (1..=n).map(|i| site_operator(SiteKind::Z, i, n)).collect::<Result<_>>()?,
            sector,
        })
    }

    pub fn config(&self) -> &TrajectoryConfig<T> {
        &self.config
    }

    fn apply_decay(&self, psi: &mut Vec<Complex<T>>, tau: T) {
        match &self.decay {
            Decay::Diagonal(kd) => {
                for (x, k) in psi.iter_mut().zip(kd) {
                    *x *= cr((-*k * tau).exp());
                }
            }
            Decay::General(k) => taylor_exp(k, tau, psi, true),
        }
    }

    /// One step of length `dt / 2^level` under `H_eff = H - iK`.
    fn raw_step(&self, psi: &mut Vec<Complex<T>>, level: usize) {
        let h = self.config.dt / T::lit((1u64 << level) as f64);
        match &self.coherent {
            Coherent::Trotter { props } => {
                if self.config.trotter_order >= 2 {
                    let half = h * T::lit(0.5);
                    self.apply_decay(psi, half);
                    props[level].step(psi);
                    self.apply_decay(psi, half);
                } else {
                    props[level].step(psi);
                    self.apply_decay(psi, h);
                }
            }
            Coherent::Taylor { h_eff } => taylor_exp(h_eff, h, psi, false),
        }
    }

    /// Random normalized state in the configured sector.
    pub fn initial_state(&self, rng: &mut ChaCha8Rng) -> Vec<Complex<T>> {
        let mut gauss = || {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            c::<T>(re, im)
        };
        let psi: Vec<Complex<T>> = match &self.sector {
            None => (0..self.dim).map(|_| gauss()).collect(),
            Some(v) => {
                let g: Vec<Complex<T>> = (0..v.ncols()).map(|_| gauss()).collect();
                v.matvec(&g)
            }
        };
        let nrm = norm2(&psi).sqrt();
        psi.into_iter().map(|x| x / cr(nrm)).collect()
    }

    /// Advances by `dt`, splitting steps that lose too much norm, and
    /// performs jumps whenever the squared norm falls below `threshold`.
    fn advance(&self, psi: &mut Vec<Complex<T>>, level: usize, st: &mut JumpState<T>, rng: &mut ChaCha8Rng) -> Result<()> {
        let before = norm2(psi);
        let mut trial = psi.clone();
        self.raw_step(&mut trial, level);
        let after = norm2(&trial);
        if level < MAX_REFINEMENT && after < before * T::lit(1.0 - MAX_NORM_DROP) {
            st.refined += 1;
            self.advance(psi, level + 1, st, rng)?;
            return self.advance(psi, level + 1, st, rng);
        }
        if !after.is_finite() {
            return Err(Error::TrajectoryPathology("non-finite state norm".into()));
        }
        *psi = trial;
        if after < st.threshold {
            self.jump(psi, st, rng)?;
        }
        Ok(())
    }

    fn jump(&self, psi: &mut Vec<Complex<T>>, st: &mut JumpState<T>, rng: &mut ChaCha8Rng) -> Result<()> {
        let candidates: Vec<Vec<Complex<T>>> = self.jumps.iter().map(|l| l.matvec(psi)).collect();
        let weights: Vec<T> = candidates.iter().map(|v| norm2(v)).collect();
        let total = weights.iter().fold(T::zero(), |a, b| a + *b);
        if !(total > T::zero()) {
            return Err(Error::TrajectoryPathology(format!(
                "norm decayed to {} but every jump rate vanishes",
                norm2(psi)
            )));
        }
        let u = T::lit(rng.random::<f64>()) * total;
        let mut acc = T::zero();
        let mut pick = weights.len() - 1;
        for (m, w) in weights.iter().enumerate() {
            acc += *w;
            if u < acc {
                pick = m;
                break;
            }
        }
        let nrm = weights[pick].sqrt();
        *psi = candidates[pick].iter().map(|x| *x / cr(nrm)).collect();
        st.threshold = T::lit(rng.random::<f64>());
        st.jumps += 1;
        Ok(())
    }

    fn expect(&self, op: &SparseOperator<T>, psi: &[Complex<T>], nrm2: T) -> T {
        let y = op.matvec(psi);
        psi.iter().zip(&y).fold(czero::<T>(), |a, (x, v)| a + x.conj() * *v).re / nrm2
    }

    fn leakage(&self, psi: &[Complex<T>]) -> T {
        match &self.sector {
            None => T::zero(),
            Some(v) => {
                let inside = v.matvec(&v.adjoint_matvec(psi));
                let out: Vec<Complex<T>> = psi.iter().zip(&inside).map(|(a, b)| *a - *b).collect();
                (norm2(&out) / norm2(psi)).sqrt()
            }
        }
    }

    /// Runs trajectory number `index`, seeded with `seed ^ index`.
    pub fn run(&self, index: usize) -> Result<TrajectorySeries<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ index as u64);
        let psi0 = self.initial_state(&mut rng);
        self.run_from(psi0, &mut rng)
    }

    /// Runs from a given (normalized) initial state.
    pub fn run_from(&self, mut psi: Vec<Complex<T>>, rng: &mut ChaCha8Rng) -> Result<TrajectorySeries<T>> {
        if psi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: psi.len(),
                right: self.dim,
            });
        }
        let cfg = &self.config;
        let mut st = JumpState {
            threshold: T::lit(rng.random::<f64>()),
            jumps: 0,
            refined: 0,
        };
        let burn = cfg.steps(cfg.t_burn);
        let stride = cfg.steps(cfg.stride).max(1);
        let samples = cfg.samples();
        let mut out = TrajectorySeries {
            times: Vec::with_capacity(samples),
            currents: Vec::with_capacity(samples),
            magnetizations: Vec::with_capacity(samples),
            jumps: 0,
            refined_steps: 0,
            max_leakage: T::zero(),
        };
        for _ in 0..burn {
            self.advance(&mut psi, 0, &mut st, rng)?;
        }
        let mut step = burn;
        for k in 0..samples {
            if k > 0 {
                for _ in 0..stride {
                    self.advance(&mut psi, 0, &mut st, rng)?;
                }
                step += stride;
            }
            let nrm2 = norm2(&psi);
            out.times.push(cfg.dt * T::lit(step as f64));
            out.currents.push(self.currents.iter().map(|j| self.expect(j, &psi, nrm2)).collect());
            out.magnetizations.push(self.sz.iter().map(|z| self.expect(z, &psi, nrm2)).collect());
            out.max_leakage = out.max_leakage.max(self.leakage(&psi));
        }
        out.jumps = st.jumps;
        out.refined_steps = st.refined;
        Ok(out)
    }

    /// Evolves `psi` for `steps` steps of `dt` (jumps included) and returns
    /// the normalized final state.
    pub fn evolve(&self, mut psi: Vec<Complex<T>>, steps: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Complex<T>>> {
        let mut st = JumpState {
            threshold: T::lit(rng.random::<f64>()),
            jumps: 0,
            refined: 0,
        };
        for _ in 0..steps {
            self.advance(&mut psi, 0, &mut st, rng)?;
        }
        let nrm = norm2(&psi).sqrt();
        Ok(psi.into_iter().map(|x| x / cr(nrm)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

struct JumpState<T: Real> {
    threshold: T,
    jumps: usize,
    refined: usize,
}

/// One trajectory of `model` (see [`TrajectoryEngine::run`]).
pub fn run_trajectory<T: Real>(model: &OpenModel<T>, config: &TrajectoryConfig<T>, index: usize) -> Result<TrajectorySeries<T>> {
    TrajectoryEngine::new(model, config)?.run(index)
}
