//! Left-invariant differential operators and the group Taylor operators `X_q^{(α)}`.
//!
//! The operators are biorthogonal to the tuple monomials at the identity,
//! `X^{(α)} q^β(e) = δ_{αβ}`, which makes
//! `f(xy) = Σ_{|α|<N} q^α(y) X^{(α)} f(x) + O(dist(y,e)^N)`.
//! Composition and adjoint expansions pair these operators with differences
//! taken against the reflected tuple `q̌(y) = q(y⁻¹)`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fourier::{forward, SpectralFunction};
use crate::group::{GroupPoint, LieVec, C64};
use crate::irreps::{drep_basis, CMat};
use crate::quadrature::shared_grid;
use crate::spin::Spin;
use crate::symbol::tuple::{multi_indices, FundamentalTuple};

/// A left-invariant differential operator `Σ c_w X_{w_1}⋯X_{w_k}` in the basis `X_1, X_2, X_3`.
#[derive(Clone, Debug, Default)]
pub struct DiffOp {
    pub terms: Vec<(C64, Vec<usize>)>,
}

impl DiffOp {
    pub fn identity() -> DiffOp {
        DiffOp { terms: vec![(C64::from(1.0), vec![])] }
    }

    pub fn word(w: &[usize]) -> DiffOp {
        DiffOp { terms: vec![(C64::from(1.0), w.to_vec())] }
    }

    /// Normal-ordered monomial `X_1^{a} X_2^{b} X_3^{c}`.
    pub fn normal(beta: &[u8]) -> DiffOp {
        let mut w = Vec::new();
        for (k, &e) in beta.iter().enumerate() {
            w.extend(std::iter::repeat_n(k, e as usize));
        }
        DiffOp::word(&w)
    }

    pub fn order(&self) -> usize {
        self.terms.iter().map(|(_, w)| w.len()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(c, _)| c.norm() == 0.0)
    }

    /// The symbol `σ(ξ) = Σ c_w dξ(X_{w_1})⋯dξ(X_{w_k})`.
    pub fn matrix(&self, j: Spin) -> CMat {
        let basis = drep_basis(j);
        let mut out = CMat::zeros(j.dim(), j.dim());
        for (c, w) in &self.terms {
            let mut m = CMat::identity(j.dim(), j.dim());
            for &k in w {
                m *= &basis[k];
            }
            out += m * *c;
        }
        out
    }

    pub fn apply(&self, f: &SpectralFunction) -> SpectralFunction {
        f.left_multiply(|j| self.matrix(j))
    }

    /// `(P g)(e) = Σ d_ξ Tr(σ_P(ξ) ĝ(ξ))`.
    pub fn at_identity(&self, g: &SpectralFunction) -> C64 {
        g.band()
            .up_to()
            .map(|j| (self.matrix(j) * g.coeff(j)).trace() * j.dim() as f64)
            .sum()
    }
}

/// `f ∘ inv` as a spectral function, computed exactly on a grid.
pub fn reflect(f: &SpectralFunction) -> Result<SpectralFunction> {
    let grid = shared_grid(f.band())?;
    let g = crate::fourier::GridFunction::from_fn(Arc::clone(&grid), |y| f.evaluate(&y.inverse()));
    forward(&g, f.band())
}

/// Taylor operators of order `N` for the first three components of the tuple
/// (the fourth is dependent at the identity and its operators vanish).
#[derive(Clone, Debug)]
pub struct TaylorOperators {
    pub order: usize,
    /// Multi-indices over the three active components, `|α| < N`.
    pub indices: Vec<Vec<u8>>,
    pub ops: Vec<DiffOp>,
    /// Active components `q_1, q_2, q_3`.
    pub tuple: Vec<SpectralFunction>,
    /// Their reflections `q_i(y⁻¹)`, used as difference tuple in expansions.
    pub reflected: Vec<SpectralFunction>,
    /// Monomials `q^α` per index.
    pub monomials: Vec<SpectralFunction>,
    pub rank: usize,
    pub sigma_min: f64,
    pub biorthogonality_residual: f64,
}

/// Builds `X^{(α)}` from the moment matrix `M[β][α] = X^β q^α(e)` by a
/// least-squares inverse with a rank check.
pub fn taylor_operators(q: &FundamentalTuple, n: usize) -> Result<TaylorOperators> {
    let tuple: Vec<SpectralFunction> = (0..3).map(|i| q.component(i).clone()).collect();
    TaylorOperators::new(tuple, n)
}

impl TaylorOperators {
    pub fn new(tuple: Vec<SpectralFunction>, n: usize) -> Result<TaylorOperators> {
        assert_eq!(tuple.len(), 3, "three active components span the Lie algebra of SU(2)");
        let indices = if n == 0 { vec![] } else { multi_indices(3, n - 1) };
        let monomials: Vec<SpectralFunction> = indices.iter().map(|a| monomial(&tuple, a)).collect();
        let k = indices.len();
        let words: Vec<DiffOp> = indices.iter().map(|b| DiffOp::normal(b)).collect();
        let mut m = DMatrix::<C64>::zeros(k, k);
        for (bi, w) in words.iter().enumerate() {
            for (ai, qa) in monomials.iter().enumerate() {
                m[(bi, ai)] = w.at_identity(qa);
            }
        }
        let (rank, sigma_min, c) = if k == 0 {
            (0, f64::INFINITY, DMatrix::zeros(0, 0))
        } else {
            let svd = m.clone().svd(true, true);
            let smax = svd.singular_values.max();
            let tol = 1e-12 * smax.max(1.0);
            let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
            let smin = svd.singular_values.min();
            if rank < k {
                return Err(Error::RankDeficient { rank, size: k, sigma_min: smin });
            }
            // C·M = I, minimal-norm least-squares inverse
            let c = svd.pseudo_inverse(tol).map_err(|e| Error::Config(e.to_string()))?;
            (rank, smin, c)
        };
        let deg = |v: &Vec<u8>| v.iter().map(|&x| x as usize).sum::<usize>();
        // q^α vanishes to order |α|, so M and its inverse are triangular in degree:
        // X^{(α)} only involves words of length ≤ |α|
        let ops: Vec<DiffOp> = (0..k)
            .map(|a| DiffOp {
                terms: (0..k)
                    .filter(|&b| deg(&indices[b]) <= deg(&indices[a]) && c[(a, b)].norm() > 0.0)
                    .flat_map(|b| {
                        let cab = c[(a, b)];
                        words[b].terms.iter().map(move |(cw, w)| (cab * cw, w.clone()))
                    })
                    .collect(),
            })
            .collect();
        let reflected = tuple.iter().map(reflect).collect::<Result<Vec<_>>>()?;
        let mut t = TaylorOperators {
            order: n,
            indices,
            ops,
            tuple,
            reflected,
            monomials,
            rank,
            sigma_min,
            biorthogonality_residual: 0.0,
        };
        t.biorthogonality_residual = t.biorthogonality();
        Ok(t)
    }

    /// `max |X^{(α)} q^β(e) − δ_{αβ}|`.
    pub fn biorthogonality(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, op) in self.ops.iter().enumerate() {
            for (b, qb) in self.monomials.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((op.at_identity(qb) - want).norm());
            }
        }
        worst
    }

    /// Position of a 3-component multi-index.
    pub fn position(&self, alpha: &[u8]) -> Option<usize> {
        self.indices.iter().position(|a| a.as_slice() == alpha)
    }

    /// `X^{(α)}` for a 4-component index; `None` when the dependent fourth component
    /// appears (those operators are zero).
    pub fn op4(&self, alpha: &[u8; 4]) -> Option<&DiffOp> {
        if alpha[3] != 0 {
            return None;
        }
        self.position(&alpha[..3]).map(|p| &self.ops[p])
    }

    /// Indices with `|α| ≤ r` (capped by the order).
    pub fn indices_up_to(&self, r: usize) -> impl Iterator<Item = (usize, &Vec<u8>)> {
        self.indices.iter().enumerate().filter(move |(_, a)| a.iter().map(|&x| x as usize).sum::<usize>() <= r)
    }

    /// Taylor polynomial `Σ_{|α|<N} q^α(y) X^{(α)} f(x)`.
    pub fn expand(&self, f: &SpectralFunction, x: &GroupPoint, y: &GroupPoint) -> C64 {
        let qs: Vec<C64> = self.tuple.iter().map(|q| q.evaluate(y)).collect();
        self.indices
            .iter()
            .zip(&self.ops)
            .map(|(a, op)| {
                let mono: C64 = a.iter().zip(&qs).map(|(&e, &v)| v.powu(e as u32)).product();
                mono * op.apply(f).evaluate(x)
            })
            .sum()
    }

    /// Remainder `|f(xy) − Σ q^α(y) X^{(α)} f(x)|`.
    pub fn remainder(&self, f: &SpectralFunction, x: &GroupPoint, y: &GroupPoint) -> f64 {
        (f.evaluate(&x.mul(y)) - self.expand(f, x, y)).norm()
    }
}

/// `Π q_i^{α_i}` by exact spectral products.
pub fn monomial(tuple: &[SpectralFunction], alpha: &[u8]) -> SpectralFunction {
    let mut out = SpectralFunction::constant(Spin::ZERO, C64::from(1.0));
    for (q, &a) in tuple.iter().zip(alpha) {
        for _ in 0..a {
            let band = out.band().add(q.band());
            out = crate::cg::multiply(&out, q, band);
        }
    }
    out
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    num / den
}

/// Remainder slope of the Taylor formula on a shrinking sweep `y = exp(t Z)`.
pub fn remainder_slope(t: &TaylorOperators, f: &SpectralFunction, x: &GroupPoint, z: &LieVec, steps: &[f64]) -> (f64, Vec<(f64, f64)>) {
    let pts: Vec<(f64, f64)> = steps
        .iter()
        .map(|&s| {
            let y = z.scale(s).exp();
            (crate::group::distance(&y, &GroupPoint::identity()), t.remainder(f, x, &y))
        })
        .collect();
    (loglog_slope(&pts), pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn biorthogonal_up_to_order_three() {
        let q = FundamentalTuple::new();
        for n in 0..=3 {
            let t = taylor_operators(&q, n).unwrap();
            assert!(t.biorthogonality_residual <= 1e-10, "N={n}: {}", t.biorthogonality_residual);
            for (a, op) in t.indices.iter().zip(&t.ops) {
                assert!(op.order() <= a.iter().map(|&x| x as usize).sum::<usize>());
            }
        }
    }

    #[test]
    fn remainder_has_the_right_order() {
        let q = FundamentalTuple::new();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let f = SpectralFunction::random(Spin::ONE, &mut rng);
        let x = GroupPoint::random(&mut rng);
        let z = LieVec([0.3, -0.7, 0.5]);
        let steps: Vec<f64> = (0..6).map(|k| 0.2 * 0.5f64.powi(k)).collect();
        for n in 1..=3 {
            let t = taylor_operators(&q, n).unwrap();
            let (slope, _) = remainder_slope(&t, &f, &x, &z, &steps);
            assert!((slope - n as f64).abs() < 0.2, "N={n}: slope {slope}");
        }
    }

    #[test]
    fn reflection_of_the_tuple() {
        let q = FundamentalTuple::new();
        let r = reflect(q.component(0)).unwrap();
        // q11(y⁻¹) = conj(a) − 1 = q22(y)
        assert!(r.sub(q.component(3)).plancherel_norm() < 1e-13);
    }
}
