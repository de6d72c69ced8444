//! Empirical `H^{s_in} → H^{s_out}` operator norms.
//!
//! Coordinates are Plancherel-weighted: the input basis vector `(j, r, c)` is the
//! function with `f̂(j)_{rc} = ⟨j⟩^{−s_in}/√d_j`, which has unit `H^{s_in}` norm,
//! and outputs are read back with the matching `H^{s_out}` weights. The
//! operator norm is then the largest singular value of the weighted matrix.
//! Small bands build that matrix densely; large bands run Lanczos on `BᴴB`
//! through the operator and its adjoint.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::SpectralFunction;
use crate::group::{sample_standard_normal, C64};
use crate::irreps::bracket;
use crate::spin::Spin;

/// Relative mass an operator may drop before its report is flagged.
pub const TRUNCATION_FLAG: f64 = 1e-9;

/// Largest dense matrix dimension [`OperatorMatrix::build`] accepts.
pub const DENSE_LIMIT: usize = 2500;

type Map<'a> = Box<dyn Fn(&SpectralFunction) -> SpectralFunction + Send + Sync + 'a>;

/// A linear map between band-limited spaces together with its `L²` adjoint.
pub struct LinearOp<'a> {
    pub in_band: Spin,
    pub out_band: Spin,
    apply: Map<'a>,
    adjoint: Map<'a>,
    lost: Vec<Arc<AtomicU64>>,
}

fn record(cell: &AtomicU64, v: f64) {
    let mut cur = cell.load(Ordering::Relaxed);
    while f64::from_bits(cur) < v {
        match cell.compare_exchange(cur, v.to_bits(), Ordering::Relaxed, Ordering::Relaxed) {
            Ok(_) => break,
            Err(x) => cur = x,
        }
    }
}

impl<'a> LinearOp<'a> {
    /// `apply` maps band `in_band` to band `out_band`; outputs above `out_band`
    /// are cut and the dropped relative mass is recorded.
    pub fn new(
        in_band: Spin,
        out_band: Spin,
        apply: impl Fn(&SpectralFunction) -> SpectralFunction + Send + Sync + 'a,
        adjoint: impl Fn(&SpectralFunction) -> SpectralFunction + Send + Sync + 'a,
    ) -> LinearOp<'a> {
        let cell = Arc::new(AtomicU64::new(0f64.to_bits()));
        let (c1, c2) = (Arc::clone(&cell), Arc::clone(&cell));
        LinearOp {
            in_band,
            out_band,
            apply: Box::new(move |f| {
                let g = apply(f);
                if g.band() > out_band {
                    record(&c1, g.relative_mass_above(out_band));
                }
                g.with_band(out_band)
            }),
            adjoint: Box::new(move |g| {
                let f = adjoint(g);
                if f.band() > in_band {
                    record(&c2, f.relative_mass_above(in_band));
                }
                f.with_band(in_band)
            }),
            lost: vec![cell],
        }
    }

    pub fn identity(band: Spin) -> LinearOp<'a> {
        LinearOp::new(band, band, |f| f.clone(), |g| g.clone())
    }

    /// A scalar Fourier multiplier `h(ξ)` (self-adjoint for real `h`).
    pub fn multiplier(band: Spin, h: impl Fn(Spin) -> f64 + Send + Sync + Clone + 'a) -> LinearOp<'a> {
        let h2 = h.clone();
        LinearOp::new(band, band, move |f| f.map_scalar(&h), move |g| g.map_scalar(&h2))
    }

    pub fn apply(&self, f: &SpectralFunction) -> SpectralFunction {
        (self.apply)(&f.with_band(self.in_band))
    }

    pub fn apply_adjoint(&self, g: &SpectralFunction) -> SpectralFunction {
        (self.adjoint)(&g.with_band(self.out_band))
    }

    /// `self − other` on the common input band and the larger output band.
    pub fn sub(self, other: LinearOp<'a>) -> LinearOp<'a> {
        let in_band = self.in_band.min(other.in_band);
        let out_band = self.out_band.max(other.out_band);
        let mut lost = self.lost.clone();
        lost.extend(other.lost.iter().cloned());
        let (a, b) = (Arc::new(self), Arc::new(other));
        let (a2, b2) = (Arc::clone(&a), Arc::clone(&b));
        let mut op = LinearOp::new(
            in_band,
            out_band,
            move |f| a.apply(f).with_band(out_band).sub(&b.apply(f).with_band(out_band)),
            move |g| a2.apply_adjoint(g).with_band(in_band).sub(&b2.apply_adjoint(g).with_band(in_band)),
        );
        op.lost.extend(lost);
        op
    }

    /// `self ∘ other`; `other`'s output must fit into `self`'s input band.
    pub fn compose(self, other: LinearOp<'a>) -> LinearOp<'a> {
        assert!(other.out_band <= self.in_band, "composition would cut {} to {}", other.out_band, self.in_band);
        let (in_band, out_band) = (other.in_band, self.out_band);
        let mut lost = self.lost.clone();
        lost.extend(other.lost.iter().cloned());
        let (a, b) = (Arc::new(self), Arc::new(other));
        let (a2, b2) = (Arc::clone(&a), Arc::clone(&b));
        let mut op = LinearOp::new(in_band, out_band, move |f| a.apply(&b.apply(f)), move |g| b2.apply_adjoint(&a2.apply_adjoint(g)));
        op.lost.extend(lost);
        op
    }

    /// The adjoint as an operator in its own right.
    pub fn adjoint(self) -> LinearOp<'a> {
        let (in_band, out_band) = (self.out_band, self.in_band);
        let lost = self.lost.clone();
        let a = Arc::new(self);
        let a2 = Arc::clone(&a);
        let mut op = LinearOp::new(in_band, out_band, move |g| a.apply_adjoint(g), move |f| a2.apply(f));
        op.lost.extend(lost);
        op
    }

    /// The same map on the smaller input band `band` (inputs are zero-padded).
    pub fn restrict_input(self, band: Spin) -> LinearOp<'a> {
        assert!(band <= self.in_band);
        let out_band = self.out_band;
        let lost = self.lost.clone();
        let a = Arc::new(self);
        let a2 = Arc::clone(&a);
        let mut op = LinearOp::new(band, out_band, move |f| a.apply(f), move |g| a2.apply_adjoint(g).with_band(band));
        op.lost.extend(lost);
        op
    }

    /// Largest relative mass any stage has dropped so far.
    pub fn truncation(&self) -> f64 {
        self.lost.iter().map(|c| f64::from_bits(c.load(Ordering::Relaxed))).fold(0.0, f64::max)
    }

    /// `|⟨Au, v⟩ − ⟨u, A*v⟩| / (‖Au‖‖v‖ + ‖u‖‖A*v‖)` on seeded random pairs.
    pub fn adjoint_consistency(&self, seed: u64, pairs: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..pairs {
            let u = SpectralFunction::random(self.in_band, &mut rng);
            let v = SpectralFunction::random(self.out_band, &mut rng);
            let (au, asv) = (self.apply(&u), self.apply_adjoint(&v));
            let lhs = au.inner(&v);
            let rhs = u.inner(&asv);
            let scale = au.plancherel_norm() * v.plancherel_norm() + u.plancherel_norm() * asv.plancherel_norm();
            if scale > 0.0 {
                worst = worst.max((lhs - rhs).norm() / scale);
            }
        }
        worst
    }
}

/// Weighted coordinates of a band, optionally restricted to spins above `shell`.
#[derive(Clone, Copy, Debug)]
struct Coords {
    band: Spin,
    shell: Option<Spin>,
}

impl Coords {
    fn active(&self, j: Spin) -> bool {
        self.shell.is_none_or(|lo| j > lo)
    }

    fn len(&self) -> usize {
        self.band.up_to().filter(|&j| self.active(j)).map(|j| j.dim() * j.dim()).sum()
    }

    /// `f̂(j)_{rc} = v_k ⟨j⟩^{−s}/√d_j`.
    fn to_function(&self, v: &[C64], s: f64) -> SpectralFunction {
        let mut f = SpectralFunction::zeros(self.band);
        let mut k = 0;
        for j in self.band.up_to().filter(|&j| self.active(j)) {
            let d = j.dim();
            let w = bracket(j).powf(-s) / (d as f64).sqrt();
            let c = f.coeff_mut(j);
            for r in 0..d {
                for col in 0..d {
                    c[(r, col)] = v[k] * w;
                    k += 1;
                }
            }
        }
        f
    }

    /// `v_k = f̂(j)_{rc} ⟨j⟩^{s} √d_j`.
    fn from_function(&self, f: &SpectralFunction, s: f64) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.len());
        for j in self.band.up_to().filter(|&j| self.active(j)) {
            let d = j.dim();
            let w = bracket(j).powf(s) * (d as f64).sqrt();
            let c = f.get(j);
            for r in 0..d {
                for col in 0..d {
                    v.push(c.map_or(C64::new(0.0, 0.0), |m| m[(r, col)] * w));
                }
            }
        }
        v
    }
}

/// The weighted matrix `B` of an operator between `H^{s_in}` and `H^{s_out}`.
struct Weighted<'o, 'a> {
    op: &'o LinearOp<'a>,
    input: Coords,
    output: Coords,
    s_in: f64,
    s_out: f64,
}

impl Weighted<'_, '_> {
    fn apply(&self, v: &[C64]) -> Vec<C64> {
        let f = self.input.to_function(v, self.s_in);
        self.output.from_function(&self.op.apply(&f), self.s_out)
    }

    /// `Bᴴ = D_in A* D_out`.
    fn apply_adjoint(&self, w: &[C64]) -> Vec<C64> {
        let g = self.output.to_function(w, -self.s_out);
        self.input.from_function(&self.op.apply_adjoint(&g), -self.s_in)
    }
}

/// Dense weighted matrix of an operator.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub in_band: Spin,
    pub out_band: Spin,
    pub s_in: f64,
    pub s_out: f64,
    pub entries: DMatrix<C64>,
    pub truncation: f64,
}

impl OperatorMatrix {
    /// Applies the operator to every input basis vector (in parallel over columns).
    pub fn build(op: &LinearOp, s_in: f64, s_out: f64) -> Result<OperatorMatrix> {
        let w = Weighted { op, input: Coords { band: op.in_band, shell: None }, output: Coords { band: op.out_band, shell: None }, s_in, s_out };
        let (n, m) = (w.input.len(), w.output.len());
        if n.max(m) > DENSE_LIMIT {
            return Err(Error::Config(format!("dense operator matrix {m}×{n} exceeds the {DENSE_LIMIT} limit; use op_norm")));
        }
        let cols: Vec<Vec<C64>> = (0..n)
            .into_par_iter()
            .map(|k| {
                let mut e = vec![C64::new(0.0, 0.0); n];
                e[k] = C64::from(1.0);
                w.apply(&e)
            })
            .collect();
        let entries = DMatrix::from_fn(m, n, |r, c| cols[c][r]);
        Ok(OperatorMatrix { in_band: op.in_band, out_band: op.out_band, s_in, s_out, entries, truncation: op.truncation() })
    }

    pub fn singular_values(&self) -> Vec<f64> {
        self.entries.clone().svd(false, false).singular_values.iter().copied().collect()
    }

    pub fn op_norm(&self) -> f64 {
        self.singular_values().into_iter().fold(0.0, f64::max)
    }

    pub fn flagged(&self) -> bool {
        self.truncation > TRUNCATION_FLAG
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NormEstimate {
    pub norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Relative mass the operator dropped at its output bands.
    pub truncation: f64,
    pub flagged: bool,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest eigenvalue of the symmetric tridiagonal matrix `(α, β)`.
fn tridiagonal_top(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    t.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Lanczos options for [`op_norm`].
#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    pub max_iter: usize,
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { max_iter: 80, rel_tol: 1e-7, seed: 17 }
    }
}

/// `‖A‖_{H^{s_in} → H^{s_out}}` by Lanczos on `BᴴB` with full reorthogonalization.
/// With `shell = Some(lo)` the input is restricted to spins above `lo`.
pub fn op_norm(op: &LinearOp, s_in: f64, s_out: f64, shell: Option<Spin>, opts: LanczosOptions) -> NormEstimate {
    let w = Weighted { op, input: Coords { band: op.in_band, shell }, output: Coords { band: op.out_band, shell: None }, s_in, s_out };
    let n = w.input.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v: Vec<C64> = (0..n).map(|_| C64::new(sample_standard_normal(&mut rng), sample_standard_normal(&mut rng))).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    let mut basis: Vec<Vec<C64>> = vec![v];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut theta = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    for k in 0..opts.max_iter.min(n) {
        iterations = k + 1;
        let vk = &basis[k];
        let mut x = w.apply_adjoint(&w.apply(vk));
        let a = dot(vk, &x).re;
        alpha.push(a);
        // two passes of classical Gram–Schmidt against the whole basis
        for _ in 0..2 {
            let coeffs: Vec<C64> = basis.par_iter().map(|b| dot(b, &x)).collect();
            for (b, c) in basis.iter().zip(&coeffs) {
                for (xi, bi) in x.iter_mut().zip(b) {
                    *xi -= c * bi;
                }
            }
        }
        let next = tridiagonal_top(&alpha, &beta);
        let bnorm = norm(&x);
        if k > 0 && (next - theta).abs() <= opts.rel_tol * next.abs() {
            theta = next;
            converged = true;
            break;
        }
        theta = next;
        if bnorm <= 1e-13 * theta.abs().max(1e-300) {
            // invariant subspace: the Ritz value is exact
            converged = true;
            break;
        }
        beta.push(bnorm);
        basis.push(x.into_iter().map(|z| z / bnorm).collect());
    }
    let truncation = op.truncation();
    NormEstimate { norm: theta.max(0.0).sqrt(), iterations, converged, truncation, flagged: truncation > TRUNCATION_FLAG }
}

/// Plain power-method estimate of the same norm (a lower bound), used as an
/// independent check on [`op_norm`].
pub fn power_norm(op: &LinearOp, s_in: f64, s_out: f64, iters: usize, seed: u64) -> f64 {
    let w = Weighted { op, input: Coords { band: op.in_band, shell: None }, output: Coords { band: op.out_band, shell: None }, s_in, s_out };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = DVector::from_fn(w.input.len(), |_, _| C64::new(sample_standard_normal(&mut rng), 0.0));
    let mut est = 0.0;
    for _ in 0..iters {
        let nv = v.norm();
        v /= C64::from(nv);
        let bv = w.apply(v.as_slice());
        est = norm(&bv);
        v = DVector::from_vec(w.apply_adjoint(&bv));
    }
    est
}
