use std::fmt;

use crate::error::{Error, Result};

/// Computational basis state `|a_1 … a_n⟩` of an `n`-site chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    n: usize,
    index: usize,
}

impl BasisState {
    pub fn new(n: usize, index: usize) -> Result<Self> {
        if n == 0 || n >= usize::BITS as usize || index >= 1 << n {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} invalid for n = {n}"
            )));
        }
        Ok(Self { n, index })
    }

    /// Builds a state from its bit string, site 1 first.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut index = 0usize;
        for &b in bits {
            if b > 1 {
                return Err(Error::InvalidParameter(format!("bit value {b}")));
            }
            index = (index << 1) | b as usize;
        }
        Self::new(bits.len(), index)
    }

    /// Parses strings such as `"0110"`.
    pub fn parse(s: &str) -> Result<Self> {
        let bits: Vec<u8> = s
            .chars()
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidParameter(format!("bad bit string {s:?}"))),
            })
            .collect::<Result<_>>()?;
        Self::from_bits(&bits)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Occupation `a_site` (sites are 1-based).
    pub fn bit(&self, site: usize) -> u8 {
        debug_assert!((1..=self.n).contains(&site));
        ((self.index >> (self.n - site)) & 1) as u8
    }

    pub fn bits(&self) -> Vec<u8> {
        (1..=self.n).map(|i| self.bit(i)).collect()
    }

    /// Eigenvalue of `σ^z_site`.
    pub fn sz(&self, site: usize) -> i32 {
        1 - 2 * self.bit(site) as i32
    }

    /// Eigenvalue of the total magnetization `Σ σ^z_i`.
    pub fn magnetization(&self) -> i32 {
        self.n as i32 - 2 * self.index.count_ones() as i32
    }

    pub fn flipped(&self, site: usize) -> Self {
        Self {
            n: self.n,
            index: self.index ^ (1 << (self.n - site)),
        }
    }

    /// Site-reversed state `|a_n … a_1⟩`.
    pub fn reversed(&self) -> Self {
        let mut out = 0usize;
        for k in 0..self.n {
            if self.index >> k & 1 == 1 {
                out |= 1 << (self.n - 1 - k);
            }
        }
        Self {
            n: self.n,
            index: out,
        }
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 1..=self.n {
            write!(f, "{}", self.bit(i))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn site_one_is_most_significant() {
        let s = BasisState::parse("100").unwrap();
        assert_eq!(s.index(), 4);
        assert_eq!(s.bit(1), 1);
        assert_eq!(s.sz(1), -1);
        assert_eq!(s.sz(2), 1);
        assert_eq!(s.to_string(), "100");
    }

    #[test]
    fn index_bits_bijection() {
        for idx in 0..32 {
            let s = BasisState::new(5, idx).unwrap();
            assert_eq!(BasisState::from_bits(&s.bits()).unwrap(), s);
        }
    }

    #[test]
    fn reversal_and_magnetization() {
        let s = BasisState::parse("1000").unwrap();
        assert_eq!(s.reversed().to_string(), "0001");
        assert_eq!(s.magnetization(), 2);
        assert_eq!(BasisState::parse("0101").unwrap().magnetization(), 0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(BasisState::new(2, 4).is_err());
        assert!(BasisState::parse("012").is_err());
    }
}
