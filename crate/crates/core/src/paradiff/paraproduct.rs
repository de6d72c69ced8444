//! Para-products `T_a u = ∫ [φ(gap·|∇|/t) a]·[ψ_t(|∇|) u] dt/t`, the
//! decomposition `au = T_a u + T_u a + R(a, u)`, and Bony's para-linearization.
//!
//! The integrand is bilinear in the isotypic parts `a_η`, `u_ξ`, so the whole
//! lattice integral collapses to one weight per pair of spins,
//! `W(η, ξ) = ∫ φ(gap·|η|/t) ψ(|ξ|/t) dt/t`, and each operator is a short sum
//! of exact products.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::cg::multiply;
use crate::error::Result;
use crate::fourier::{forward, inverse, multiply_on_grid, GridFunction, SpectralFunction};
use crate::group::C64;
use crate::irreps::size;
use crate::lp::{multiplier_apply, zygmund_norm, LogLattice, WindowPair};
use crate::paradiff::opnorm::LinearOp;
use crate::quadrature::shared_grid;
use crate::spin::Spin;
use crate::symbol::{Field, Symbol, Term};

/// The para-product weights `W(η, ξ)` for spins up to `band`.
#[derive(Clone, Debug)]
pub struct GapWeights {
    pub gap: f64,
    pub band: Spin,
    table: Vec<Vec<f64>>,
    pub lattice: LogLattice,
}

impl GapWeights {
    pub fn new(w: &WindowPair, gap: f64, band: Spin) -> GapWeights {
        let lattice = w.lattice(size(band));
        let table = band
            .up_to()
            .map(|eta| {
                let mu = size(eta);
                band.up_to().map(|xi| lattice.integrate(|t| w.phi(gap * mu / t) * w.psi(size(xi) / t))).collect()
            })
            .collect();
        GapWeights { gap, band, table, lattice }
    }

    /// `W(η, ξ)`: the share of `a_η u_ξ` assigned to `T_a u`.
    pub fn at(&self, eta: Spin, xi: Spin) -> f64 {
        self.table[eta.two_j() as usize][xi.two_j() as usize]
    }

    /// Weight of `a_η u_ξ` in the remainder: `1 − W(η, ξ) − W(ξ, η)`.
    pub fn remainder_weight(&self, eta: Spin, xi: Spin) -> f64 {
        1.0 - self.at(eta, xi) - self.at(xi, eta)
    }

    fn check(&self, a: &SpectralFunction, u: &SpectralFunction) {
        assert!(a.band() <= self.band && u.band() <= self.band, "para-product weights cover spins up to {}", self.band);
    }
}

fn isotypic(a: &SpectralFunction, eta: Spin) -> Option<SpectralFunction> {
    let block = a.coeff(eta);
    if block.iter().all(|z| z.norm() == 0.0) {
        return None;
    }
    Some(SpectralFunction::single(eta, eta, block.clone()))
}

/// `Σ_η a_η · (w(η, ·) u)` on the full output band.
fn bilinear(a: &SpectralFunction, u: &SpectralFunction, weight: impl Fn(Spin, Spin) -> f64 + Sync) -> SpectralFunction {
    let out = a.band().add(u.band());
    let parts: Vec<SpectralFunction> = a
        .band()
        .up_to()
        .collect::<Vec<_>>()
        .into_par_iter()
        .filter_map(|eta| {
            let ae = isotypic(a, eta)?;
            let wu = u.map_scalar(|xi| weight(eta, xi));
            if wu.coeffs().iter().all(|m| m.iter().all(|z| z.norm() == 0.0)) {
                return None;
            }
            Some(multiply(&ae, &wu, out))
        })
        .collect();
    let mut acc = SpectralFunction::zeros(out);
    for p in &parts {
        acc.add_scaled(p, C64::from(1.0));
    }
    acc
}

/// Adjoint of `u ↦ Σ_η a_η (w(η, ·) u)` restricted to inputs of band `in_band`.
fn bilinear_adjoint(a: &SpectralFunction, v: &SpectralFunction, in_band: Spin, weight: impl Fn(Spin, Spin) -> f64 + Sync) -> SpectralFunction {
    let parts: Vec<SpectralFunction> = a
        .band()
        .up_to()
        .collect::<Vec<_>>()
        .into_par_iter()
        .filter_map(|eta| {
            let ae = isotypic(a, eta)?.conj();
            Some(multiply(&ae, v, in_band).map_scalar(|xi| weight(eta, xi)))
        })
        .collect();
    let mut acc = SpectralFunction::zeros(in_band);
    for p in &parts {
        acc.add_scaled(p, C64::from(1.0));
    }
    acc
}

/// `T_a u` through the collapsed weights.
pub fn paraproduct(weights: &GapWeights, a: &SpectralFunction, u: &SpectralFunction) -> SpectralFunction {
    weights.check(a, u);
    bilinear(a, u, |eta, xi| weights.at(eta, xi))
}

/// `T_a u` as the literal lattice sum `Σ_t w_t [φ(gap|∇|/t)a]·[ψ_t(|∇|)u]`.
/// Costs one product per lattice node; meant for small bands and cross-checks.
pub fn paraproduct_lattice(w: &WindowPair, gap: f64, a: &SpectralFunction, u: &SpectralFunction) -> SpectralFunction {
    let lattice = w.lattice(size(u.band().max(a.band())));
    let out = a.band().add(u.band());
    let parts: Vec<SpectralFunction> = lattice
        .nodes
        .par_iter()
        .filter_map(|&(t, wt)| {
            let low = multiplier_apply(|l| w.phi(gap * l), t, a);
            let high = multiplier_apply(|l| w.psi(l), t, u);
            if high.plancherel_norm() == 0.0 || low.plancherel_norm() == 0.0 {
                return None;
            }
            Some(multiply(&low, &high, out).scale(C64::from(wt)))
        })
        .collect();
    let mut acc = SpectralFunction::zeros(out);
    for p in &parts {
        acc.add_scaled(p, C64::from(1.0));
    }
    acc
}

/// `u ↦ T_a u` on inputs of band `in_band`, with its adjoint.
pub fn para_operator<'a>(weights: &'a GapWeights, a: &'a SpectralFunction, in_band: Spin) -> LinearOp<'a> {
    assert!(in_band <= weights.band && a.band() <= weights.band);
    LinearOp::new(
        in_band,
        in_band.add(a.band()),
        move |u| bilinear(a, u, |eta, xi| weights.at(eta, xi)),
        move |v| bilinear_adjoint(a, v, in_band, |eta, xi| weights.at(eta, xi)),
    )
}

/// `u ↦ R(a, u)` on inputs of band `in_band`, with its adjoint.
pub fn remainder_operator<'a>(weights: &'a GapWeights, a: &'a SpectralFunction, in_band: Spin) -> LinearOp<'a> {
    assert!(in_band <= weights.band && a.band() <= weights.band);
    LinearOp::new(
        in_band,
        in_band.add(a.band()),
        move |u| bilinear(a, u, |eta, xi| weights.remainder_weight(eta, xi)),
        move |v| bilinear_adjoint(a, v, in_band, |eta, xi| weights.remainder_weight(eta, xi)),
    )
}

#[derive(Clone, Debug)]
pub struct ParaDecomposition {
    pub ta_u: SpectralFunction,
    pub tu_a: SpectralFunction,
    pub remainder: SpectralFunction,
    /// `‖T_a u + T_u a + R − au‖ / ‖au‖` against the grid product.
    pub reconstruction_residual: f64,
}

/// `au = T_a u + T_u a + R(a, u)`; each part is computed from its own weights.
pub fn para_decompose(weights: &GapWeights, a: &SpectralFunction, u: &SpectralFunction) -> Result<ParaDecomposition> {
    weights.check(a, u);
    let ta_u = bilinear(a, u, |eta, xi| weights.at(eta, xi));
    let tu_a = bilinear(u, a, |xi, eta| weights.at(xi, eta));
    let remainder = bilinear(a, u, |eta, xi| weights.remainder_weight(eta, xi));
    let out = a.band().add(u.band());
    let product = multiply_on_grid(a, u, out)?;
    let sum = ta_u.add(&tu_a).add(&remainder);
    let scale = product.plancherel_norm().max(f64::MIN_POSITIVE);
    let reconstruction_residual = sum.sub(&product).plancherel_norm() / scale;
    Ok(ParaDecomposition { ta_u, tu_a, remainder, reconstruction_residual })
}

/// `sup |f|` sampled on a grid fine enough to resolve `f`.
pub fn sup_norm(f: &SpectralFunction) -> Result<f64> {
    let grid = shared_grid(f.band().max(Spin::from_twice(4)))?;
    Ok(inverse(f, &grid)?.sup_norm())
}

#[derive(Clone, Debug, Serialize)]
pub struct RemainderRatios {
    pub s: f64,
    pub r: f64,
    /// `‖R(a,u)‖_{H^s} / (|a|_∞ ‖u‖_{H^s})`.
    pub plain: f64,
    /// `‖R(a,u)‖_{H^{s+r}} / (|a|_{C^r_*} ‖u‖_{H^s})`.
    pub improved: f64,
}

impl ParaDecomposition {
    pub fn remainder_ratios(&self, w: &WindowPair, a: &SpectralFunction, u: &SpectralFunction, s: f64, r: f64) -> Result<RemainderRatios> {
        let un = u.sobolev_norm(s);
        let plain = self.remainder.sobolev_norm(s) / (sup_norm(a)? * un);
        let improved = self.remainder.sobolev_norm(s + r) / (zygmund_norm(w, a, r)? * un);
        Ok(RemainderRatios { s, r, plain, improved })
    }
}

/// A polynomial profile `F(z) = Σ c_k z^k`.
#[derive(Clone, Debug, Serialize)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Polynomial {
        Polynomial { coeffs }
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Polynomial {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Polynomial { coeffs: c }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Polynomial {
        let coeffs = if self.coeffs.len() <= 1 { vec![0.0] } else { self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect() };
        Polynomial { coeffs }
    }

    /// `F(u)` as an exact spectral function (band `degree · band(u)`).
    pub fn spectral(&self, u: &SpectralFunction) -> SpectralFunction {
        let mut acc = SpectralFunction::constant(Spin::ZERO, C64::from(*self.coeffs.last().unwrap_or(&0.0)));
        for &c in self.coeffs.iter().rev().skip(1) {
            let band = acc.band().add(u.band());
            acc = multiply(&acc, u, band);
            acc.coeff_mut(Spin::ZERO)[(0, 0)] += C64::from(c);
        }
        acc
    }
}

#[derive(Clone, Debug)]
pub struct BonyReport {
    /// `l_u(x, ξ) = ∫₁^∞ F′(u_t(x)) ψ(|ξ|/t) dt/t · I`.
    pub symbol: Symbol,
    /// `max |F(u) − F(u₁) − Op(l_u)u| / max |F(u)|` on the grid.
    pub identity_residual: f64,
    pub lattice_nodes: usize,
    pub grid_points: usize,
}

/// Para-linearization `F(u) = F(u₁) + Op(l_u)u` with `u₁ = φ(|∇|)u` and
/// `u_t = φ(|∇|/t)u`, built by pointwise lattice sums on a grid.
pub fn bony_linearize(w: &WindowPair, f: &Polynomial, u: &SpectralFunction) -> Result<BonyReport> {
    let band = u.band();
    let fp = f.derivative();
    let coeff_band = Spin::from_twice(band.two_j() * f.degree().saturating_sub(1) as u32);
    let grid = shared_grid(coeff_band.max(band).max(Spin::HALF))?;
    let spins: Vec<Spin> = band.up_to().collect();
    let parts: Vec<GridFunction> = spins
        .iter()
        .map(|&xi| inverse(&SpectralFunction::single(band, xi, u.coeff(xi).clone()), &grid))
        .collect::<Result<_>>()?;
    let lattice = w.lattice(size(band));
    let phi: Vec<Vec<f64>> = lattice.nodes.iter().map(|&(t, _)| spins.iter().map(|&xi| w.phi(size(xi) / t)).collect()).collect();
    let psi: Vec<Vec<f64>> = lattice.nodes.iter().map(|&(t, wt)| spins.iter().map(|&xi| wt * w.psi(size(xi) / t)).collect()).collect();
    let low: Vec<f64> = spins.iter().map(|&xi| w.phi(size(xi))).collect();
    let n = grid.len();
    // per grid point: (g_ξ(x) for every ξ, F(u)(x), F(u₁)(x))
    let rows: Vec<(Vec<C64>, C64, C64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let vals: Vec<C64> = parts.iter().map(|p| p.values[i]).collect();
            let mut g = vec![C64::new(0.0, 0.0); spins.len()];
            for (ph, ps) in phi.iter().zip(&psi) {
                if ps.iter().all(|&x| x == 0.0) {
                    continue;
                }
                let ut: C64 = vals.iter().zip(ph).map(|(v, p)| v * p).sum();
                let d = fp.eval(ut);
                for (gk, &p) in g.iter_mut().zip(ps) {
                    *gk += d * p;
                }
            }
            let full: C64 = vals.iter().sum();
            let u1: C64 = vals.iter().zip(&low).map(|(v, p)| v * p).sum();
            (g, f.eval(full), f.eval(u1))
        })
        .collect();
    let mut terms = Vec::with_capacity(spins.len());
    for (k, &xi) in spins.iter().enumerate() {
        let gk = GridFunction::new(Arc::clone(&grid), rows.iter().map(|r| r.0[k]).collect())?;
        let coeff = forward(&gk, coeff_band)?;
        let field = Field::from_fn(band, |j| {
            let d = j.dim();
            if j == xi {
                crate::irreps::CMat::identity(d, d)
            } else {
                crate::irreps::CMat::zeros(d, d)
            }
        });
        terms.push(Term { coeff, field });
    }
    let symbol = Symbol::new(band, terms)?;
    let op_u = symbol.quantize_on_grid(u, &grid)?;
    let scale = rows.iter().map(|r| r.1.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let residual = rows.iter().zip(&op_u.values).map(|(r, o)| (r.1 - r.2 - o).norm()).fold(0.0, f64::max) / scale;
    Ok(BonyReport { symbol, identity_residual: residual, lattice_nodes: lattice.nodes.len(), grid_points: n })
}

/// `‖F(u) − F(u₁) − T_{F′(u)} u‖_{H^{s+r}}` computed exactly in spectral space.
pub fn bony_smoothing_norm(w: &WindowPair, gap: f64, f: &Polynomial, u: &SpectralFunction, s: f64, r: f64) -> f64 {
    let fu = f.spectral(u);
    let u1 = crate::lp::low_block(w, u);
    let fu1 = f.spectral(&u1);
    let fp = f.derivative().spectral(u);
    let weights = GapWeights::new(w, gap, fp.band().max(u.band()));
    let t = paraproduct(&weights, &fp, u);
    fu.sub(&fu1).sub(&t).sobolev_norm(s + r)
}
