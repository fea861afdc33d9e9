use crate::error::{Error, Result};
use crate::scalar::{c, Complex, Real};

use super::sparse::SparseOperator;

/// Single-site spin-1/2 operator kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiteKind {
    X,
    Y,
    Z,
    /// `σ^+ = (σ^x + iσ^y)/2`, maps `|1⟩ → |0⟩`.
    Plus,
    /// `σ^- = (σ^x - iσ^y)/2`, maps `|0⟩ → |1⟩`.
    Minus,
}

impl SiteKind {
    /// Image of the local state `a` as `(a', amplitude)`, if nonzero.
    fn act<T: Real>(self, a: u8) -> Option<(u8, Complex<T>)> {
        match (self, a) {
            (SiteKind::X, _) => Some((1 - a, c(1.0, 0.0))),
            (SiteKind::Y, 0) => Some((1, c(0.0, 1.0))),
            (SiteKind::Y, _) => Some((0, c(0.0, -1.0))),
            (SiteKind::Z, 0) => Some((0, c(1.0, 0.0))),
            (SiteKind::Z, _) => Some((1, c(-1.0, 0.0))),
            (SiteKind::Plus, 1) => Some((0, c(1.0, 0.0))),
            (SiteKind::Minus, 0) => Some((1, c(1.0, 0.0))),
            _ => None,
        }
    }
}

/// Embeds a single-site operator at `site` (1-based) of an `n`-site chain.
pub fn site_operator<T: Real>(kind: SiteKind, site: usize, n: usize) -> Result<SparseOperator<T>> {
    if site == 0 || site > n {
        return Err(Error::SiteOutOfRange { site, n });
    }
    let dim = 1usize << n;
    let shift = n - site;
    let triplets = (0..dim).filter_map(|col| {
        let a = ((col >> shift) & 1) as u8;
        kind.act::<T>(a).map(|(b, amp)| {
            let row = (col & !(1 << shift)) | ((b as usize) << shift);
            (row, col, amp)
        })
    });
    Ok(SparseOperator::from_triplets(dim, dim, triplets))
}
