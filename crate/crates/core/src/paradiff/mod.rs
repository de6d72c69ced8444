//! Para-differential calculus: admissible cut-offs, regularized symbols and the
//! spectral condition, para-products and Bony's para-linearization, the
//! `#`-composition and adjoint expansions, and empirical operator norms.
//!
//! Sizes follow the library convention: `|η|`, `|ξ|` are `√λ`, and the cut-off
//! scale is `⟨ξ⟩ = (1 + |ξ|²)^{1/2}`.

pub mod calculus;
pub mod opnorm;
pub mod paraproduct;
pub mod probes;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::irreps::{bracket, size};
use crate::lp::WindowPair;
use crate::spin::Spin;
use crate::symbol::Symbol;

pub use calculus::{adjoint_symbol, compose_sharp};
pub use opnorm::{LinearOp, NormEstimate, OperatorMatrix};
pub use paraproduct::{bony_linearize, para_decompose, paraproduct, GapWeights, Polynomial};

/// Relative offending mass tolerated by [`spectral_condition_check`].
pub const SPECTRAL_CONDITION_TOL: f64 = 1e-12;

/// `χ(μ, λ) = φ(μ / (δ⟨λ⟩))`: one on `μ ≤ δ⟨λ⟩/2`, zero on `μ ≥ δ⟨λ⟩`.
#[derive(Clone, Debug, Serialize)]
pub struct AdmissibleCutoff {
    pub delta: f64,
    pub gap: f64,
    pub band: Spin,
    /// `table[η][ξ] = χ(|η|, |ξ|)` for spins up to `band`.
    pub table: Vec<Vec<f64>>,
    /// `max ⟨λ⟩·|Δ_μ χ|/Δμ` over neighbouring lattice points.
    pub mu_constant: f64,
    /// `max ⟨λ⟩·|Δ_λ χ|/Δλ` over neighbouring lattice points.
    pub lambda_constant: f64,
    /// Analytic bounds `sup|φ′|/δ` and `sup|φ′|` for the two constants.
    pub mu_bound: f64,
    pub lambda_bound: f64,
    #[serde(skip)]
    windows: WindowPair,
}

fn phi_prime_sup(w: &WindowPair) -> f64 {
    (0..=20000).map(|k| w.dphi(k as f64 / 20000.0).abs()).fold(0.0, f64::max)
}

/// Builds the cut-off and checks plateau, support and lattice derivative bounds.
pub fn admissible_cutoff(delta: f64, gap: f64, band: Spin) -> Result<AdmissibleCutoff> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Config(format!("cut-off parameter δ = {delta} must lie in (0, 1/2)")));
    }
    if !(gap >= 1.0) {
        return Err(Error::Config(format!("gap = {gap} must be at least 1")));
    }
    let windows = WindowPair::default();
    let chi = |mu: f64, lam: f64| windows.phi(mu / (delta * (1.0 + lam * lam).sqrt()));
    // plateau and support on a fine μ-grid for every ξ of the band
    for xi in band.up_to() {
        let lam = size(xi);
        let scale = delta * bracket(xi);
        for k in 0..=400 {
            let mu = 1.5 * scale * k as f64 / 400.0;
            let v = chi(mu, lam);
            if mu <= 0.5 * scale && v != 1.0 {
                return Err(Error::CutoffViolation(format!("χ({mu:.4}, {lam:.4}) = {v} on the plateau")));
            }
            if mu >= scale && v != 0.0 {
                return Err(Error::CutoffViolation(format!("χ({mu:.4}, {lam:.4}) = {v} outside the support")));
            }
        }
    }
    let table: Vec<Vec<f64>> = band.up_to().map(|eta| band.up_to().map(|xi| chi(size(eta), size(xi))).collect()).collect();
    let spins: Vec<Spin> = band.up_to().collect();
    let (mut mu_c, mut lam_c) = (0.0f64, 0.0f64);
    for w in spins.windows(2) {
        let (a, b) = (w[0], w[1]);
        let dx = size(b) - size(a);
        for &other in &spins {
            let lam = size(other);
            mu_c = mu_c.max(bracket(other) * (chi(size(b), lam) - chi(size(a), lam)).abs() / dx);
            let mu = size(other);
            lam_c = lam_c.max(bracket(a) * (chi(mu, size(b)) - chi(mu, size(a))).abs() / dx);
        }
    }
    let sup = phi_prime_sup(&windows) * 1.01;
    let out = AdmissibleCutoff {
        delta,
        gap,
        band,
        table,
        mu_constant: mu_c,
        lambda_constant: lam_c,
        mu_bound: sup / delta,
        lambda_bound: sup,
        windows,
    };
    if mu_c > out.mu_bound || lam_c > out.lambda_bound {
        return Err(Error::CutoffViolation(format!(
            "difference constants ({mu_c:.3}, {lam_c:.3}) exceed ({:.3}, {:.3})",
            out.mu_bound, out.lambda_bound
        )));
    }
    Ok(out)
}

impl AdmissibleCutoff {
    pub fn value(&self, mu: f64, lam: f64) -> f64 {
        self.windows.phi(mu / (self.delta * (1.0 + lam * lam).sqrt()))
    }

    /// `χ(|η|, |ξ|)` from the table when available.
    pub fn at(&self, eta: Spin, xi: Spin) -> f64 {
        if eta <= self.band && xi <= self.band {
            self.table[eta.two_j() as usize][xi.two_j() as usize]
        } else {
            self.value(size(eta), size(xi))
        }
    }
}

/// `a^χ(x, ξ) = χ(|∇_x|, |ξ|) a(x, ξ)`.
pub fn regularize(a: &Symbol, chi: &AdmissibleCutoff) -> Symbol {
    a.filter_x_frequency(|eta, xi| chi.at(eta, xi))
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralConditionReport {
    pub delta: f64,
    pub pass: bool,
    pub total_mass: f64,
    pub offending_mass: f64,
    /// `(η, ξ, mass)` with `|η| ≥ δ⟨ξ⟩` and nonzero mass.
    pub offending: Vec<(f64, f64, f64)>,
}

/// Scans the partial Fourier mass for `|η| ≥ δ⟨ξ⟩`.
pub fn spectral_condition_check(a: &Symbol, delta: f64) -> SpectralConditionReport {
    let masses = a.partial_fourier_mass();
    let total: f64 = masses.iter().map(|m| m.2).sum();
    let offending: Vec<(f64, f64, f64)> = masses
        .iter()
        .filter(|(eta, xi, _)| size(*eta) >= delta * bracket(*xi))
        .map(|&(eta, xi, m)| (eta.value(), xi.value(), m))
        .collect();
    let bad: f64 = offending.iter().map(|o| o.2).sum();
    let rel = if total > 0.0 { bad / total } else { 0.0 };
    SpectralConditionReport { delta, pass: rel <= SPECTRAL_CONDITION_TOL, total_mass: total, offending_mass: bad, offending }
}

/// `max_ξ ⟨ξ + ½⟩/⟨ξ⟩` over the band: one difference moves `ξ` by at most a half
/// step, so the spectral parameter grows by at most this factor.
pub fn difference_parameter_factor(band: Spin) -> f64 {
    band.up_to().map(|xi| bracket(xi.add(Spin::HALF)) / bracket(xi)).fold(1.0, f64::max)
}

#[cfg(test)]
mod tests;
