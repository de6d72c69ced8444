//! Half-integer spin labels, stored as `2j` so that comparisons stay exact.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Irreducible representation label of SU(2): spin `j`, dimension `2j+1`.
///
/// Matrix indices run over `m = -j, ..., j` in ascending order; index `k`
/// corresponds to `m = k - j`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Spin(u32);

impl Spin {
    pub const ZERO: Spin = Spin(0);
    pub const HALF: Spin = Spin(1);
    pub const ONE: Spin = Spin(2);

    pub const fn from_twice(two_j: u32) -> Spin {
        Spin(two_j)
    }

    pub fn new(j: f64) -> Result<Spin> {
        let t = 2.0 * j;
        if !(t >= 0.0) || (t - t.round()).abs() > 1e-9 || t > u32::MAX as f64 {
            return Err(Error::InvalidSpin(j));
        }
        Ok(Spin(t.round() as u32))
    }

    pub const fn two_j(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub const fn dim(self) -> usize {
        self.0 as usize + 1
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// Twice the magnetic number at matrix index `k`.
    pub fn two_m(self, k: usize) -> i32 {
        2 * k as i32 - self.0 as i32
    }

    /// Matrix index of the magnetic number with doubled value `two_m`, if valid.
    pub fn index_of(self, two_m: i32) -> Option<usize> {
        let k = two_m + self.0 as i32;
        if k < 0 || k % 2 != 0 || k / 2 > self.0 as i32 {
            None
        } else {
            Some((k / 2) as usize)
        }
    }

    /// All spins `0, 1/2, ..., self`.
    pub fn up_to(self) -> impl DoubleEndedIterator<Item = Spin> + Clone {
        (0..=self.0).map(Spin)
    }

    pub fn add(self, other: Spin) -> Spin {
        Spin(self.0 + other.0)
    }

    pub fn saturating_sub(self, other: Spin) -> Spin {
        Spin(self.0.saturating_sub(other.0))
    }

    /// Sum of `d²` over all spins up to `self`: the dimension of the band-limited space.
    pub fn band_dim(self) -> usize {
        let d = self.dim();
        d * (d + 1) * (2 * d + 1) / 6
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Triangle rule: spins `J` with `|j1-j2| <= J <= j1+j2` and `J ≡ j1+j2 (mod 1)`.
pub fn coupled_spins(j1: Spin, j2: Spin) -> impl Iterator<Item = Spin> {
    let lo = j1.0.abs_diff(j2.0);
    let hi = j1.0 + j2.0;
    (lo..=hi).step_by(2).map(Spin)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(Spin::new(1.5).unwrap(), Spin::from_twice(3));
        assert!(Spin::new(0.3).is_err());
        assert!(Spin::new(-1.0).is_err());
        assert_eq!(Spin::from_twice(3).to_string(), "3/2");
        assert_eq!(Spin::from_twice(4).to_string(), "2");
        assert_eq!(Spin::from_twice(3).two_m(0), -3);
        assert_eq!(Spin::from_twice(3).index_of(1), Some(2));
        assert_eq!(Spin::from_twice(3).index_of(0), None);
        assert_eq!(Spin::from_twice(16).band_dim(), (1..=17).map(|d| d * d).sum::<usize>());
    }

    #[test]
    fn triangle() {
        let v: Vec<_> = coupled_spins(Spin::new(3.0).unwrap(), Spin::ONE).collect();
        assert_eq!(v, vec![Spin::new(2.0).unwrap(), Spin::new(3.0).unwrap(), Spin::new(4.0).unwrap()]);
    }
}
