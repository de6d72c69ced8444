//! Littlewood–Paley theory on SU(2): smooth windows, spectral multipliers,
//! continuous and dyadic decompositions, and the norm estimators built on them.
//!
//! Everything acts through `|∇| = √(−Δ)`, which is the scalar `|ξ|` on the
//! `ξ`-isotypic component, so each operation is a per-spin scaling.

use std::sync::Arc;

use gauss_quad::GaussLegendre;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{inverse, GridFunction, SpectralFunction};
use crate::group::{distance, GroupPoint, LieVec, C64};
use crate::irreps::{bracket, size, CMat};
use crate::quadrature::{shared_grid, QuadratureGrid};
use crate::spin::Spin;

fn flat(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

fn flat_prime(x: f64) -> f64 {
    if x > 0.0 {
        flat(x) / (x * x)
    } else {
        0.0
    }
}

/// Smooth step: 0 for `x ≤ 0`, 1 for `x ≥ 1`.
fn step(x: f64) -> f64 {
    let (a, b) = (flat(x), flat(1.0 - x));
    a / (a + b)
}

fn step_prime(x: f64) -> f64 {
    let (a, b) = (flat(x), flat(1.0 - x));
    let s = a + b;
    (flat_prime(x) * b + a * flat_prime(1.0 - x)) / (s * s)
}

/// Composite Gauss–Legendre rule for `∫₁^T g(t) dt/t`, uniform in `log t`.
#[derive(Clone, Debug)]
pub struct LogLattice {
    pub t_max: f64,
    pub nodes: Vec<(f64, f64)>,
}

impl LogLattice {
    /// `octaves` octaves starting at `t = 1`, with `per_octave` points each,
    /// split into panels of at most 32 Gauss–Legendre nodes.
    pub fn new(octaves: usize, per_octave: usize) -> Result<LogLattice> {
        let panels = per_octave.div_ceil(32).max(1);
        let gl = GaussLegendre::new((per_octave / panels).max(2)).map_err(|e| Error::Config(format!("log lattice: {e}")))?;
        let h = std::f64::consts::LN_2 / panels as f64;
        let mut nodes = Vec::with_capacity(octaves * per_octave);
        for k in 0..octaves * panels {
            let s0 = k as f64 * h;
            for &(x, w) in gl.as_node_weight_pairs().iter() {
                let s = s0 + 0.5 * h * (x + 1.0);
                nodes.push((s.exp(), 0.5 * h * w));
            }
        }
        nodes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(LogLattice { t_max: 2f64.powi(octaves as i32), nodes })
    }

    /// Lattice covering every block that can touch sizes up to `top`.
    pub fn covering(top: f64, per_octave: usize) -> Result<LogLattice> {
        // ψ(λ/t) vanishes once t ≥ 2λ
        let octaves = ((2.0 * top).max(1.0).log2().ceil() as usize).max(1);
        LogLattice::new(octaves, per_octave)
    }

    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().map(|&(t, w)| w * g(t)).sum()
    }
}

/// `φ` and `ψ = −λφ′` with `φ = 1` on `[−1/2, 1/2]` and `φ = 0` outside `(−1, 1)`.
#[derive(Clone, Debug)]
pub struct WindowPair {
    pub points_per_octave: usize,
    pub partition_residual: f64,
}

/// Minimum lattice density for the continuous decomposition.
pub const MIN_POINTS_PER_OCTAVE: usize = 32;

/// Default density; the flat edges of the windows need about this many
/// points per octave to keep the partition residual near 1e-11.
pub const DEFAULT_POINTS_PER_OCTAVE: usize = 128;

/// Builds the windows and checks `φ(λ) + ∫₁^∞ ψ(λ/t) dt/t = 1` for `λ ≥ 1`.
pub fn make_windows(points_per_octave: usize) -> Result<WindowPair> {
    let ppo = points_per_octave.max(MIN_POINTS_PER_OCTAVE);
    let mut w = WindowPair { points_per_octave: ppo, partition_residual: 0.0 };
    let mut worst: f64 = 0.0;
    for k in 0..=200 {
        let lam = 1.0 + 0.37 * k as f64;
        let lat = LogLattice::covering(lam, ppo)?;
        let total = w.phi(lam) + lat.integrate(|t| w.psi(lam / t));
        worst = worst.max((total - 1.0).abs());
    }
    w.partition_residual = worst;
    if worst > 1e-8 {
        return Err(Error::WindowPartition(worst));
    }
    Ok(w)
}

impl WindowPair {
    pub fn phi(&self, lam: f64) -> f64 {
        step(2.0 * (1.0 - lam.abs()))
    }

    pub fn dphi(&self, lam: f64) -> f64 {
        -2.0 * lam.signum() * step_prime(2.0 * (1.0 - lam.abs()))
    }

    pub fn psi(&self, lam: f64) -> f64 {
        -lam * self.dphi(lam)
    }

    /// Dyadic ring `ϑ(λ) = φ(λ/2) − φ(λ)`.
    pub fn theta(&self, lam: f64) -> f64 {
        self.phi(lam / 2.0) - self.phi(lam)
    }

    /// `ϑ_k(λ) = ϑ(λ/2^k)`.
    pub fn theta_k(&self, k: usize, lam: f64) -> f64 {
        self.theta(lam / 2f64.powi(k as i32))
    }

    /// Continuous lattice reaching past every size up to `top`.
    pub fn lattice(&self, top: f64) -> LogLattice {
        LogLattice::covering(top, self.points_per_octave).expect("valid lattice")
    }
}

impl Default for WindowPair {
    fn default() -> Self {
        make_windows(DEFAULT_POINTS_PER_OCTAVE).expect("standard windows pass the partition test")
    }
}

/// `h(|∇|/t) f`.
pub fn multiplier_apply(h: impl Fn(f64) -> f64, t: f64, f: &SpectralFunction) -> SpectralFunction {
    f.map_scalar(|j| h(size(j) / t))
}

/// `ψ_t(|∇|) f`, spectrally supported in `t/2 ≤ |ξ| ≤ t`.
pub fn lp_block(w: &WindowPair, t: f64, f: &SpectralFunction) -> SpectralFunction {
    multiplier_apply(|l| w.psi(l), t, f)
}

/// `φ(|∇|) f`.
pub fn low_block(w: &WindowPair, f: &SpectralFunction) -> SpectralFunction {
    multiplier_apply(|l| w.phi(l), 1.0, f)
}

/// `φ(|∇|)f + ∫₁^T ψ_t(|∇|)f dt/t` on the log lattice; equals `φ(|∇|/T) f`.
pub fn continuous_reconstruct(w: &WindowPair, lattice: &LogLattice, f: &SpectralFunction) -> SpectralFunction {
    let weights = |j: Spin| {
        let l = size(j);
        w.phi(l) + lattice.integrate(|t| w.psi(l / t))
    };
    f.map_scalar(weights)
}

/// Number of dyadic rings needed so that `φ + Σ_{k<K} ϑ_k = 1` on the band.
pub fn dyadic_depth(band: Spin) -> usize {
    let top = size(band);
    let mut k = 0;
    // φ(λ/2^K) = 1 once 2^K ≥ 2·top
    while 2f64.powi(k as i32) < 2.0 * top {
        k += 1;
    }
    k
}

/// `[φ(|∇|)f, ϑ_0(|∇|)f, ϑ_1(|∇|)f, …]` covering the whole band.
pub fn dyadic_blocks(w: &WindowPair, f: &SpectralFunction) -> Vec<SpectralFunction> {
    let mut out = vec![low_block(w, f)];
    for k in 0..dyadic_depth(f.band()) {
        out.push(multiplier_apply(|l| w.theta_k(k, l), 1.0, f));
    }
    out
}

/// Kernel of a multiplier and its `L¹` diagnostics.
#[derive(Clone, Debug)]
pub struct KernelProfile {
    pub t: f64,
    pub kernel: GridFunction,
    pub l1: f64,
    /// `‖dist(·,e)^r ȟ_t‖_{L¹}`.
    pub weighted_l1: f64,
    pub r: f64,
}

/// `ȟ_t = Σ d_ξ h(|ξ|/t) Tr ξ` on `grid`; `h` must vanish for `|λ| ≥ 1`.
pub fn kernel_profile(h: impl Fn(f64) -> f64, t: f64, grid: &Arc<QuadratureGrid>, r: f64) -> Result<KernelProfile> {
    let band = grid.band();
    let next = Spin::from_twice(band.two_j() + 1);
    if size(next) < t {
        return Err(Error::GridTooCoarse { requested: format!("sizes up to {t}"), available: band.to_string() });
    }
    let mut spec = SpectralFunction::zeros(band);
    for j in band.up_to() {
        let v = h(size(j) / t);
        if v != 0.0 {
            *spec.coeff_mut(j) = CMat::identity(j.dim(), j.dim()) * C64::from(v);
        }
    }
    let kernel = inverse(&spec, grid)?;
    let e = GroupPoint::identity();
    let weighted: Vec<C64> = (0..grid.len())
        .map(|i| kernel.values[i].norm() * distance(&grid.node(i), &e).powf(r))
        .map(C64::from)
        .collect();
    let weighted_l1 = grid.integrate(&weighted).re;
    Ok(KernelProfile { t, l1: kernel.l1_norm(), kernel, weighted_l1, r })
}

/// `‖f‖_{H^s} / (t^s ‖f‖_{L²})` for `f` spectrally inside `|ξ| ≤ t`.
pub fn bernstein_check(f: &SpectralFunction, s: f64, t: f64) -> Result<f64> {
    if let Some(j) = f.band().up_to().rev().find(|&j| f.coeff(j).norm() > 0.0) {
        if size(j) > t * (1.0 + 1e-12) {
            return Err(Error::Config(format!("spectrum reaches |ξ| = {} beyond t = {t}", size(j))));
        }
    }
    Ok(f.sobolev_norm(s) / (t.powf(s) * f.plancherel_norm()))
}

/// Grid used to estimate sup norms of band-limited functions.
fn sup_grid(band: Spin) -> Result<Arc<QuadratureGrid>> {
    shared_grid(band.max(Spin::HALF))
}

fn sup_norm(f: &SpectralFunction, grid: &Arc<QuadratureGrid>) -> Result<f64> {
    Ok(inverse(f, grid)?.sup_norm())
}

/// Lattice `t = 2^{k/4}` of block scales that meet the band.
fn sup_lattice(band: Spin) -> Vec<f64> {
    let top = size(band);
    (0..).map(|k| 2f64.powf(k as f64 / 4.0)).take_while(|&t| t / 2.0 <= top).collect()
}

/// `C^r_*` estimator `sup|φ(|∇|)f| + sup_t t^r |ψ_t(|∇|)f|_∞`, any sign of `r`.
pub fn zygmund_norm(w: &WindowPair, f: &SpectralFunction, r: f64) -> Result<f64> {
    let grid = sup_grid(f.band())?;
    let low = sup_norm(&low_block(w, f), &grid)?;
    let mut high: f64 = 0.0;
    for t in sup_lattice(f.band()) {
        let b = lp_block(w, t, f);
        if b.plancherel_norm() > 0.0 {
            high = high.max(t.powf(r) * sup_norm(&b, &grid)?);
        }
    }
    Ok(low + high)
}

/// Square-function `H^s` norm `(‖φ f‖² + Σ_k 2^{2ks} ‖ϑ_k f‖²)^{1/2}`.
pub fn square_function_norm(w: &WindowPair, f: &SpectralFunction, s: f64) -> f64 {
    let blocks = dyadic_blocks(w, f);
    let mut acc = blocks[0].plancherel_norm().powi(2);
    for (k, b) in blocks[1..].iter().enumerate() {
        acc += 2f64.powf(2.0 * k as f64 * s) * b.plancherel_norm().powi(2);
    }
    acc.sqrt()
}

/// Extreme values of `square_function_norm / sobolev_norm` over single spins up to `band`.
pub fn square_function_bracket(w: &WindowPair, band: Spin, s: f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for j in band.up_to() {
        let f = SpectralFunction::single(band, j, CMat::identity(j.dim(), j.dim()));
        let q = square_function_norm(w, &f, s) / f.sobolev_norm(s);
        lo = lo.min(q);
        hi = hi.max(q);
    }
    (lo, hi)
}

/// Per-scale block norms, as emitted by the `lp` experiment.
#[derive(Clone, Debug, Serialize)]
pub struct BlockRow {
    pub t: f64,
    pub l2: f64,
    pub linf: f64,
    pub hs: f64,
}

pub fn block_table(w: &WindowPair, f: &SpectralFunction, s: f64) -> Result<Vec<BlockRow>> {
    let grid = sup_grid(f.band())?;
    sup_lattice(f.band())
        .into_iter()
        .map(|t| {
            let b = lp_block(w, t, f);
            Ok(BlockRow { t, l2: b.plancherel_norm(), linf: sup_norm(&b, &grid)?, hs: b.sobolev_norm(s) })
        })
        .collect()
}

/// `max_x |X^α φ(|∇|/t) f|` for a word `α` in the basis vector fields.
pub fn derivative_growth(w: &WindowPair, f: &SpectralFunction, t: f64, word: &[usize]) -> Result<f64> {
    let mut g = multiplier_apply(|l| w.phi(l), t, f);
    for &k in word.iter().rev() {
        g = g.lie_derivative(&LieVec::basis(k));
    }
    sup_norm(&g, &sup_grid(f.band())?)
}

/// A `C^r_*` witness: dyadic shells `k` carrying random data normalized to
/// sup norm `2^{−kr}`, so `|f|_{C^r_*}` is of order one by construction.
pub fn zygmund_witness<R: Rng + ?Sized>(w: &WindowPair, r: f64, band: Spin, rng: &mut R) -> Result<SpectralFunction> {
    let grid = sup_grid(band)?;
    let raw = SpectralFunction::random(band, rng).real_part();
    let mut out = SpectralFunction::zeros(band);
    for (k, b) in dyadic_blocks(w, &raw).into_iter().enumerate() {
        let n = sup_norm(&b, &grid)?;
        if n > 0.0 {
            let scale = 2f64.powf(-(k as f64) * r) / n;
            out.add_scaled(&b, C64::from(scale));
        }
    }
    Ok(out)
}

/// `⟨ξ⟩^r`-weighted spin profile, handy for Sobolev witnesses.
pub fn bracket_weight(r: f64) -> impl Fn(Spin) -> f64 {
    move |j| bracket(j).powf(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn window_values() {
        let w = WindowPair::default();
        assert_eq!(w.phi(0.3), 1.0);
        assert_eq!(w.phi(1.5), 0.0);
        assert!(w.partition_residual <= 1e-8);
        for lam in [0.55, 0.7, 0.8, 0.93] {
            let h = 1e-5;
            let fd = (w.phi(lam + h) - w.phi(lam - h)) / (2.0 * h);
            assert!((w.psi(lam) + lam * fd).abs() < 1e-6);
        }
    }

    #[test]
    fn reconstructions() {
        let w = WindowPair::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let f = SpectralFunction::random(Spin::from_twice(12), &mut rng);
        let lat = w.lattice(size(f.band()));
        let rec = continuous_reconstruct(&w, &lat, &f);
        assert!(rec.sub(&f).plancherel_norm() <= 1e-8 * f.plancherel_norm());
        let sum = dyadic_blocks(&w, &f).iter().fold(SpectralFunction::zeros(f.band()), |a, b| a.add(b));
        assert!(sum.sub(&f).plancherel_norm() <= 1e-12 * f.plancherel_norm());
    }

    #[test]
    fn block_support() {
        let w = WindowPair::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let f = SpectralFunction::random(Spin::from_twice(16), &mut rng);
        for t in [1.0, 2.5, 4.0, 5.3] {
            let b = lp_block(&w, t, &f);
            for j in f.band().up_to() {
                let l = size(j);
                if l < t / 2.0 || l > t {
                    assert_eq!(b.coeff(j).norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn bernstein_single_entry() {
        let band = Spin::from_twice(8);
        let f = SpectralFunction::entry(band, band, 1, 2);
        let t = size(band);
        for s in [0.0, 1.0, 2.0] {
            let q = bernstein_check(&f, s, t).unwrap();
            assert!((q - (bracket(band) / t).powf(s)).abs() < 1e-12);
        }
    }

    #[test]
    fn zygmund_of_constant() {
        let w = WindowPair::default();
        let c = SpectralFunction::constant(Spin::from_twice(4), C64::new(-2.5, 0.0));
        for r in [-1.0, 0.5, 2.0] {
            assert!((zygmund_norm(&w, &c, r).unwrap() - 2.5).abs() < 1e-12);
        }
    }
}
