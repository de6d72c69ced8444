//! The fundamental tuple `q = (D_{11} − 1, D_{12}, D_{21}, D_{22} − 1)` of the
//! spin-½ representation, its Leibniz structure, and monomials `q^α`.

use crate::fourier::SpectralFunction;
use crate::group::{GroupPoint, C64};
use crate::spin::Spin;

pub const TUPLE_LABELS: [&str; 4] = ["q11", "q12", "q21", "q22"];

/// Component `i = 2r + c` is the entry `(r, c)` of the spin-½ matrix minus `δ_rc`.
#[derive(Clone, Debug)]
pub struct FundamentalTuple {
    comps: [SpectralFunction; 4],
}

impl Default for FundamentalTuple {
    fn default() -> Self {
        FundamentalTuple::new()
    }
}

impl FundamentalTuple {
    pub fn new() -> FundamentalTuple {
        let comp = |i: usize| {
            let (r, c) = (i / 2, i % 2);
            let mut f = SpectralFunction::entry(Spin::HALF, Spin::HALF, r, c);
            if r == c {
                f.coeff_mut(Spin::ZERO)[(0, 0)] -= C64::from(1.0);
            }
            f
        };
        FundamentalTuple { comps: [comp(0), comp(1), comp(2), comp(3)] }
    }

    pub fn index(r: usize, c: usize) -> usize {
        2 * r + c
    }

    pub fn component(&self, i: usize) -> &SpectralFunction {
        &self.comps[i]
    }

    pub fn components(&self) -> &[SpectralFunction; 4] {
        &self.comps
    }

    /// `q(x)` read directly off the matrix of `x`.
    pub fn values(x: &GroupPoint) -> [C64; 4] {
        let u = x.matrix();
        [u[(0, 0)] - 1.0, u[(0, 1)], u[(1, 0)], u[(1, 1)] - 1.0]
    }

    /// Cross terms of the product rule: `q_i(zw) = q_i(z) + q_i(w) + Σ q_j(z) q_k(w)`
    /// over the returned `(j, k)` pairs.
    pub fn cross_terms(i: usize) -> [(usize, usize); 2] {
        let (r, c) = (i / 2, i % 2);
        [(Self::index(r, 0), Self::index(0, c)), (Self::index(r, 1), Self::index(1, c))]
    }

    /// Worst residual of the product rule at the pair `(z, w)`.
    pub fn leibniz_residual(z: &GroupPoint, w: &GroupPoint) -> f64 {
        let (qz, qw, qzw) = (Self::values(z), Self::values(w), Self::values(&z.mul(w)));
        (0..4)
            .map(|i| {
                let cross: C64 = Self::cross_terms(i).iter().map(|&(j, k)| qz[j] * qw[k]).sum();
                (qzw[i] - qz[i] - qw[i] - cross).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `q^α = Π q_i^{α_i}` as a spectral function (band `|α|/2`).
    pub fn monomial(&self, alpha: &[u8]) -> SpectralFunction {
        crate::symbol::taylor::monomial(&self.comps, alpha)
    }

    /// Every component vanishes at the identity.
    pub fn vanishes_at_identity(&self) -> bool {
        self.comps.iter().all(|q| q.evaluate(&GroupPoint::identity()).norm() < 1e-14)
    }
}

/// All multi-indices over `n` components with total degree `≤ max_degree`,
/// ordered by degree and then lexicographically (largest first component first).
pub fn multi_indices(n: usize, max_degree: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for deg in 0..=max_degree {
        let mut cur = vec![0u8; n];
        fill(&mut out, &mut cur, 0, deg);
    }
    out
}

fn fill(out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, pos: usize, left: usize) {
    if pos + 1 == cur.len() {
        cur[pos] = left as u8;
        out.push(cur.clone());
        return;
    }
    for k in (0..=left).rev() {
        cur[pos] = k as u8;
        fill(out, cur, pos + 1, left - k);
    }
    cur[pos] = 0;
}

/// All multisets of tuple components of size exactly `l`, as exponent vectors.
pub fn difference_indices(l: usize) -> Vec<[u8; 4]> {
    multi_indices(4, l)
        .into_iter()
        .filter(|a| a.iter().map(|&x| x as usize).sum::<usize>() == l)
        .map(|a| [a[0], a[1], a[2], a[3]])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn product_rule_and_vanishing() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let (z, w) = (GroupPoint::random(&mut rng), GroupPoint::random(&mut rng));
            assert!(FundamentalTuple::leibniz_residual(&z, &w) < 1e-14);
        }
        assert!(FundamentalTuple::new().vanishes_at_identity());
    }

    #[test]
    fn spectral_components_match_matrix_entries() {
        let t = FundamentalTuple::new();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let x = GroupPoint::random(&mut rng);
        let direct = FundamentalTuple::values(&x);
        for i in 0..4 {
            assert!((t.component(i).evaluate(&x) - direct[i]).norm() < 1e-14);
        }
        let m = t.monomial(&[1, 2, 0, 1]);
        let want = direct[0] * direct[1] * direct[1] * direct[3];
        assert!((m.evaluate(&x) - want).norm() < 1e-13);
    }

    #[test]
    fn index_counts() {
        assert_eq!(multi_indices(3, 2).len(), 10);
        assert_eq!(multi_indices(3, 2)[1], vec![1, 0, 0]);
        assert_eq!(difference_indices(2).len(), 10);
    }
}
