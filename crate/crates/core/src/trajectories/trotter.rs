//! Even/odd bond splitting of the XXZ propagator.

use crate::scalar::{Complex, Real};

/// `exp(-i τ h)` for one XXZ bond `h = σˣσˣ + σʸσʸ + Δ σᶻσᶻ`.
///
/// `|00⟩` and `|11⟩` acquire `e^{-iΔτ}`; on `(|01⟩, |10⟩)` the gate is
/// `e^{iΔτ} [[cos 2τ, -i sin 2τ], [-i sin 2τ, cos 2τ]]`.
#[derive(Clone, Copy, Debug)]
pub struct BondGate<T: Real> {
    aligned: Complex<T>,
    diag: Complex<T>,
    off: Complex<T>,
}

impl<T: Real> BondGate<T> {
    pub fn new(delta: T, tau: T) -> Self {
        let phase = |x: T| Complex::new(x.cos(), x.sin());
        let two = tau * T::lit(2.0);
        let p = phase(delta * tau);
        Self {
            aligned: phase(-delta * tau),
            diag: p * Complex::new(two.cos(), T::zero()),
            off: p * Complex::new(T::zero(), -two.sin()),
        }
    }

    /// Applies the gate to bond `(i, i+1)` (1-based) of an `n`-site state.
    pub fn apply(&self, psi: &mut [Complex<T>], i: usize, n: usize) {
        let bi = 1usize << (n - i);
        let bj = 1usize << (n - i - 1);
        for idx in 0..psi.len() {
            let (a, b) = (idx & bi != 0, idx & bj != 0);
            match (a, b) {
                (false, false) | (true, true) => psi[idx] *= self.aligned,
                (false, true) => {
                    let partner = idx ^ bi ^ bj;
                    let (x, y) = (psi[idx], psi[partner]);
                    psi[idx] = self.diag * x + self.off * y;
                    psi[partner] = self.off * x + self.diag * y;
                }
                (true, false) => {}
            }
        }
    }
}

/// Precomputed gates for one time step of a given splitting order.
#[derive(Clone, Debug)]
pub struct TrotterPropagator<T: Real> {
    n: usize,
    order: u8,
    full: BondGate<T>,
    half: BondGate<T>,
}

impl<T: Real> TrotterPropagator<T> {
    /// `order` 1: `A(dt) B(dt)`; order 2: `A(dt/2) B(dt) A(dt/2)`, with `A`
    /// the odd bonds `(1,2), (3,4), …` and `B` the even ones.
    pub fn new(n: usize, delta: T, dt: T, order: u8) -> Self {
        Self {
            n,
            order,
            full: BondGate::new(delta, dt),
            half: BondGate::new(delta, dt * T::lit(0.5)),
        }
    }

    fn layer(&self, psi: &mut [Complex<T>], gate: &BondGate<T>, first: usize) {
        let mut i = first;
        while i < self.n {
            gate.apply(psi, i, self.n);
            i += 2;
        }
    }

    pub fn step(&self, psi: &mut [Complex<T>]) {
        if self.order >= 2 {
            self.layer(psi, &self.half, 1);
            self.layer(psi, &self.full, 2);
            self.layer(psi, &self.half, 1);
        } else {
            self.layer(psi, &self.full, 1);
            self.layer(psi, &self.full, 2);
        }
    }
}

/// One Trotter step of `exp(-i H dt)` for the XXZ chain.
pub fn trotter_step<T: Real>(n: usize, delta: T, psi: &mut [Complex<T>], dt: T, order: u8) {
    TrotterPropagator::new(n, delta, dt, order).step(psi);
}
