//! Boundedness probes for the para-differential calculus.
//!
//! Each probe builds a remainder operator at two bands and measures its norm in
//! two Sobolev pairings. In the improved pairing the norm must stay bounded
//! (ratio ≤ 2 across the band doubling). In the plain pairing, with inputs
//! restricted to the top dyadic shell `(B/2, B]`, it must shrink like
//! `⟨B⟩^{−r}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::fourier::SpectralFunction;
use crate::group::{GroupPoint, LieVec, C64};
use crate::irreps::{bracket, size, CMat};
use crate::lp::{zygmund_witness, WindowPair};
use crate::paradiff::calculus::{adjoint_symbol, compose_sharp, symbol_operator};
use crate::paradiff::opnorm::{op_norm, LanczosOptions, LinearOp};
use crate::paradiff::paraproduct::{para_operator, remainder_operator, sup_norm, GapWeights};
use crate::paradiff::{admissible_cutoff, regularize};
use crate::spin::Spin;
use crate::symbol::order::{decay_fit, sample_points, DecayFit, NUMERICAL_ZERO, ORDER_TOL};
use crate::symbol::{taylor_operators, Field, FundamentalTuple, Symbol, TaylorOperators, Term};

/// Allowed growth of a bounded quantity across one band doubling.
pub const DOUBLING_RATIO: f64 = 2.0;

/// One line of a probe report.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeRow {
    pub probe: String,
    pub band: f64,
    pub s: f64,
    pub m: f64,
    pub m_prime: f64,
    pub r: f64,
    pub delta: f64,
    pub gap: f64,
    pub measured_norm: f64,
    pub pass_bound: Option<f64>,
    pub pass: Option<bool>,
}

impl ProbeRow {
    pub const HEADER: &'static str = "probe,band,s,m,m_prime,r,delta,gap,measured_norm,pass_bound,pass";

    pub fn csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.6e}"));
        format!(
            "{},{},{},{},{},{},{},{},{:.6e},{},{}",
            self.probe,
            self.band,
            self.s,
            self.m,
            self.m_prime,
            self.r,
            self.delta,
            self.gap,
            self.measured_norm,
            opt(self.pass_bound),
            self.pass.map_or(String::new(), |p| p.to_string())
        )
    }
}

#[derive(Clone, Debug)]
pub struct ProbeConfig {
    pub delta: f64,
    pub gap: f64,
    pub r: usize,
    pub s_values: Vec<f64>,
    pub bands: [Spin; 2],
    /// Band of the rough coefficients in the test-symbol family.
    pub coeff_band: Spin,
    pub seed: u64,
    pub lanczos: LanczosOptions,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            delta: 1.0 / 16.0,
            gap: 8.0,
            r: 1,
            s_values: vec![0.0],
            bands: [Spin::from_twice(16), Spin::from_twice(32)],
            coeff_band: Spin::ONE,
            seed: 7,
            lanczos: LanczosOptions::default(),
        }
    }
}

/// The constructed test symbols: a `C^1_*` coefficient `c` (a Zygmund witness
/// with prescribed block decay) and smooth vector-field coefficients `b_i`.
#[derive(Clone, Debug)]
pub struct TestFamily {
    pub rough: SpectralFunction,
    pub smooth: [SpectralFunction; 3],
}

impl TestFamily {
    pub fn new(w: &WindowPair, coeff_band: Spin, seed: u64) -> Result<TestFamily> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rough = zygmund_witness(w, 1.0, coeff_band, &mut rng)?;
        let mut smooth = [0, 1, 2].map(|_| SpectralFunction::random(Spin::HALF, &mut rng).real_part().scale(C64::from(0.3)));
        smooth[0].coeff_mut(Spin::ZERO)[(0, 0)] += C64::from(1.0);
        Ok(TestFamily { rough, smooth })
    }

    /// Order 0: `c(x)·(½ I + dξ(X_2)/⟨ξ⟩)`.
    pub fn order_zero(&self, xi_band: Spin) -> Symbol {
        let x2 = LieVec::basis(1);
        let field = Field::from_fn(xi_band, |j| {
            CMat::identity(j.dim(), j.dim()) * C64::from(0.5) + crate::irreps::drep(j, &x2) * C64::from(1.0 / bracket(j))
        });
        Symbol::separated(self.rough.clone(), field)
    }

    /// Order 1: `c(x)·σ_{X_1}(ξ)`.
    pub fn order_one(&self, xi_band: Spin) -> Symbol {
        Symbol::separated(self.rough.clone(), Field::vector_field(xi_band, &LieVec::basis(0)))
    }

    /// Order 1: the vector field `Σ b_i X_i`.
    pub fn vector_field(&self, xi_band: Spin) -> Symbol {
        Symbol::vector_field(xi_band, &self.smooth)
    }
}

fn half(b: Spin) -> Spin {
    Spin::from_twice(b.two_j() / 2)
}

/// Slope of `log n` against `log⟨B⟩` between the two bands.
pub fn doubling_slope(bands: [Spin; 2], norms: [f64; 2]) -> f64 {
    (norms[1] / norms[0]).ln() / (bracket(bands[1]) / bracket(bands[0])).ln()
}

/// Growth factor across the doubling. Round-off-level norms count as zero: a
/// vanishing top norm is bounded, a norm appearing from zero is not.
pub fn bounded_ratio(lo: f64, hi: f64) -> f64 {
    if hi <= NUMERICAL_ZERO {
        0.0
    } else if lo <= NUMERICAL_ZERO {
        f64::INFINITY
    } else {
        hi / lo
    }
}

struct Orders {
    m: f64,
    m_prime: f64,
    /// Order of the remainder in the improved pairing.
    improved: f64,
    /// Order without the improvement.
    plain: f64,
}

/// Measures a remainder operator at both bands in both pairings and appends the
/// per-band rows plus the ratio and contrast-slope summary rows.
fn pairing_probe(name: &str, cfg: &ProbeConfig, o: Orders, delta: f64, build: &(dyn Fn(Spin) -> Result<LinearOp<'static>> + Sync)) -> Result<Vec<ProbeRow>> {
    let ops: Vec<LinearOp<'static>> = cfg.bands.iter().map(|&b| build(b)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let row = |probe: String, band: f64, s: f64, v: f64, bound: Option<f64>, pass: Option<bool>| ProbeRow {
        probe,
        band,
        s,
        m: o.m,
        m_prime: o.m_prime,
        r: cfg.r as f64,
        delta,
        gap: cfg.gap,
        measured_norm: v,
        pass_bound: bound,
        pass,
    };
    for &s in &cfg.s_values {
        let measured: Vec<(f64, f64)> = ops
            .par_iter()
            .zip(cfg.bands.par_iter())
            .map(|(op, &b)| {
                let imp = op_norm(op, s + o.improved, s, None, cfg.lanczos).norm;
                let plain = op_norm(op, s + o.plain, s, Some(half(b)), cfg.lanczos).norm;
                (imp, plain)
            })
            .collect();
        for (k, &b) in cfg.bands.iter().enumerate() {
            rows.push(row(name.to_string(), b.value(), s, measured[k].0, None, None));
            rows.push(row(format!("{name}/contrast"), b.value(), s, measured[k].1, None, None));
        }
        let top = cfg.bands[1].value();
        let (lo, hi) = (measured[0].0, measured[1].0);
        let ratio = bounded_ratio(lo, hi);
        rows.push(row(format!("{name}/ratio"), top, s, ratio, Some(DOUBLING_RATIO), Some(ratio <= DOUBLING_RATIO)));
        let (clo, chi) = (measured[0].1, measured[1].1);
        let want = -(cfg.r as f64);
        let (slope, pass) = if chi <= NUMERICAL_ZERO {
            (f64::NEG_INFINITY, true)
        } else if clo <= NUMERICAL_ZERO {
            (f64::INFINITY, false)
        } else {
            let sl = doubling_slope(cfg.bands, [clo, chi]);
            (sl, (sl - want).abs() <= ORDER_TOL)
        };
        rows.push(row(format!("{name}/contrast_slope"), top, s, slope, Some(want), Some(pass)));
    }
    Ok(rows)
}

/// Symbols are built one spin above what the operators need, so one difference fits.
fn symbol_band(b: Spin) -> Spin {
    b.add(Spin::ONE)
}

struct Ctx {
    w: WindowPair,
    family: TestFamily,
    taylor: TaylorOperators,
}

fn context(cfg: &ProbeConfig) -> Result<Ctx> {
    let w = WindowPair::default();
    let family = TestFamily::new(&w, cfg.coeff_band, cfg.seed)?;
    let taylor = taylor_operators(&FundamentalTuple::new(), cfg.r + 1)?;
    Ok(Ctx { w, family, taylor })
}

/// `T_a ∘ T_b − T_{a#b}` for `a` of order 0 and `b` of order 1.
pub fn composition_probe(cfg: &ProbeConfig) -> Result<Vec<ProbeRow>> {
    composition_probe_at(cfg, cfg.delta, "composition")
}

fn composition_probe_at(cfg: &ProbeConfig, delta: f64, name: &str) -> Result<Vec<ProbeRow>> {
    let ctx = context(cfg)?;
    let (m, mp, r) = (0.0, 1.0, cfg.r as f64);
    let build = |b: Spin| -> Result<LinearOp<'static>> {
        let sb = symbol_band(b).add(Spin::ONE);
        let chi = admissible_cutoff(delta, cfg.gap, sb)?;
        let a = ctx.family.order_zero(sb);
        let bb = ctx.family.vector_field(sb);
        let (ar, br) = (regularize(&a, &chi), regularize(&bb, &chi));
        let sharp = regularize(&compose_sharp(&a, &bb, cfg.r, &ctx.taylor)?, &chi);
        let tb = symbol_operator(br.clone(), b);
        let ta = symbol_operator(ar, tb.out_band);
        Ok(ta.compose(tb).sub(symbol_operator(sharp, b)))
    };
    pairing_probe(name, cfg, Orders { m, m_prime: mp, improved: m + mp - r, plain: m + mp }, delta, &build)
}

/// `[T_a, T_b]` for `a` of order 0 and `b` of order 1, gaining one derivative.
pub fn commutator_probe(cfg: &ProbeConfig) -> Result<Vec<ProbeRow>> {
    let ctx = context(cfg)?;
    let (m, mp) = (0.0, 1.0);
    let build = |b: Spin| -> Result<LinearOp<'static>> {
        let sb = symbol_band(b).add(Spin::ONE);
        let chi = admissible_cutoff(cfg.delta, cfg.gap, sb)?;
        let ar = regularize(&ctx.family.order_zero(sb), &chi);
        let br = regularize(&ctx.family.vector_field(sb), &chi);
        let tb = symbol_operator(br.clone(), b);
        let ab = symbol_operator(ar.clone(), tb.out_band).compose(tb);
        let ta = symbol_operator(ar, b);
        let ba = symbol_operator(br, ta.out_band).compose(ta);
        Ok(ab.sub(ba))
    };
    // the commutator gains exactly one derivative regardless of r
    let cfg1 = ProbeConfig { r: 1, ..cfg.clone() };
    pairing_probe("commutator", &cfg1, Orders { m, m_prime: mp, improved: m + mp - 1.0, plain: m + mp }, cfg.delta, &build)
}

/// `T_a^* − T_{a^•}` for `a = c(x)σ_{X_1}` of order 1.
pub fn adjoint_probe(cfg: &ProbeConfig) -> Result<Vec<ProbeRow>> {
    let ctx = context(cfg)?;
    let (m, r) = (1.0, cfg.r as f64);
    let build = |b: Spin| -> Result<LinearOp<'static>> {
        let sb = symbol_band(b).add(Spin::ONE);
        let chi = admissible_cutoff(cfg.delta, cfg.gap, sb)?;
        let a = ctx.family.order_one(sb);
        let ar = regularize(&a, &chi);
        let x = ar.x_band();
        let star = symbol_operator(ar, b.add(x)).adjoint().restrict_input(b);
        let bullet = regularize(&adjoint_symbol(&a, cfg.r, &ctx.taylor)?, &chi);
        Ok(star.sub(symbol_operator(bullet, b)))
    };
    pairing_probe("adjoint", cfg, Orders { m, m_prime: 0.0, improved: m - r, plain: m }, cfg.delta, &build)
}

/// `T^{χ₁}_a − T^{χ₂}_a` for two admissible cut-offs and `a = c(x)σ_{X_1}`.
pub fn cutoff_freedom_probe(cfg: &ProbeConfig, deltas: (f64, f64)) -> Result<Vec<ProbeRow>> {
    let ctx = context(cfg)?;
    let (m, r) = (1.0, cfg.r as f64);
    let build = |b: Spin| -> Result<LinearOp<'static>> {
        let sb = symbol_band(b);
        let a = ctx.family.order_one(sb);
        let r1 = regularize(&a, &admissible_cutoff(deltas.0, cfg.gap, sb)?);
        let r2 = regularize(&a, &admissible_cutoff(deltas.1, cfg.gap, sb)?);
        Ok(symbol_operator(r1, b).sub(symbol_operator(r2, b)))
    };
    let mut rows = pairing_probe("cutoff_freedom", cfg, Orders { m, m_prime: 0.0, improved: m - r, plain: m }, deltas.0, &build)?;
    let a = ctx.family.order_one(crate::symbol::order::FIT_HI.add(Spin::ONE));
    let fit_band = crate::symbol::order::FIT_HI.add(Spin::ONE);
    let d = regularize(&a, &admissible_cutoff(deltas.0, cfg.gap, fit_band)?).sub(&regularize(&a, &admissible_cutoff(deltas.1, cfg.gap, fit_band)?));
    for (alpha, beta, fit) in symbol_fits(&d)? {
        let bound = m - r + alpha as f64 - beta as f64;
        rows.push(ProbeRow {
            probe: format!("cutoff_freedom/fit_a{alpha}_b{beta}"),
            band: crate::symbol::order::FIT_HI.value(),
            s: f64::NAN,
            m,
            m_prime: 0.0,
            r,
            delta: deltas.0,
            gap: cfg.gap,
            measured_norm: fit.slope,
            pass_bound: Some(bound),
            pass: Some(fit.at_most(bound)),
        });
    }
    Ok(rows)
}

/// `Op(a) − T_a = Op(a − a^χ)` for `a = c(x)σ_{X_1}`.
pub fn regularization_probe(cfg: &ProbeConfig) -> Result<Vec<ProbeRow>> {
    let ctx = context(cfg)?;
    let (m, r) = (1.0, cfg.r as f64);
    let build = |b: Spin| -> Result<LinearOp<'static>> {
        let sb = symbol_band(b);
        let a = ctx.family.order_one(sb);
        let ar = regularize(&a, &admissible_cutoff(cfg.delta, cfg.gap, sb)?);
        Ok(symbol_operator(a, b).sub(symbol_operator(ar, b)))
    };
    let mut rows = pairing_probe("a_minus_a_chi", cfg, Orders { m, m_prime: 0.0, improved: m - r, plain: m }, cfg.delta, &build)?;
    let fit_band = crate::symbol::order::FIT_HI.add(Spin::ONE);
    let a = ctx.family.order_one(fit_band);
    let d = a.sub(&regularize(&a, &admissible_cutoff(cfg.delta, cfg.gap, fit_band)?));
    for (alpha, beta, fit) in symbol_fits(&d)? {
        if alpha != 0 {
            continue;
        }
        let bound = m - r - beta as f64;
        rows.push(ProbeRow {
            probe: format!("a_minus_a_chi/fit_b{beta}"),
            band: crate::symbol::order::FIT_HI.value(),
            s: f64::NAN,
            m,
            m_prime: 0.0,
            r,
            delta: cfg.delta,
            gap: cfg.gap,
            measured_norm: fit.slope,
            pass_bound: Some(bound),
            pass: Some(fit.at_most(bound)),
        });
    }
    Ok(rows)
}

/// Decay fits of `sup_x ‖X^α D^β d‖` for `(|α|, |β|) ∈ {(0,0), (1,0), (0,1)}`,
/// worst over directions and tuple components.
fn symbol_fits(d: &Symbol) -> Result<Vec<(usize, usize, DecayFit)>> {
    let xs = sample_points(d.x_band().max(Spin::ONE))?;
    let worst = |syms: Vec<Symbol>| -> DecayFit {
        let mut acc: Vec<(Spin, f64)> = Vec::new();
        for s in &syms {
            for (j, n) in s.sup_norms(&xs) {
                match acc.iter_mut().find(|p| p.0 == j) {
                    Some(p) => p.1 = p.1.max(n),
                    None => acc.push((j, n)),
                }
            }
        }
        decay_fit(&acc)
    };
    let tuple = FundamentalTuple::new();
    Ok(vec![
        (0, 0, worst(vec![d.clone()])),
        (1, 0, worst((0..3).map(|k| d.lie_derivative(&LieVec::basis(k))).collect())),
        (0, 1, worst(tuple.components().iter().map(|q| d.difference(q)).collect())),
    ])
}

/// Stein-type probe at `s = −1`: an `S^0_{1,1}` symbol without the spectral
/// condition (reported, no bound) against one in `Σ^0_δ` (must stay bounded).
pub fn stein_probe(cfg: &ProbeConfig, delta: f64) -> Result<Vec<ProbeRow>> {
    let s = -1.0;
    let indicator = |band: Spin, xi: Spin| {
        Field::from_fn(band, move |j| if j == xi { CMat::identity(j.dim(), j.dim()) } else { CMat::zeros(j.dim(), j.dim()) })
    };
    // c_ξ = conj(D^η_{00}) with η = ξ (unconstrained) or the largest η with |η| < δ⟨ξ⟩
    let symbol = |band: Spin, constrained: bool| -> Result<Symbol> {
        let terms = band
            .up_to()
            .map(|xi| {
                let eta = if constrained { xi.up_to().filter(|&e| size(e) < delta * bracket(xi)).last().unwrap_or(Spin::ZERO) } else { xi };
                Term { coeff: SpectralFunction::entry(eta, eta, 0, 0).conj(), field: indicator(band, xi) }
            })
            .collect();
        Symbol::new(band, terms)
    };
    let mut rows = Vec::new();
    for (name, constrained) in [("stein/unconstrained", false), ("stein/spectral_condition", true)] {
        let norms: Vec<f64> = cfg
            .bands
            .iter()
            .map(|&b| Ok(op_norm(&symbol_operator(symbol(b, constrained)?, b), s, s, None, cfg.lanczos).norm))
            .collect::<Result<_>>()?;
        let base = |probe: String, band: f64, v: f64, bound: Option<f64>, pass: Option<bool>| ProbeRow {
            probe,
            band,
            s,
            m: 0.0,
            m_prime: 0.0,
            r: 0.0,
            delta,
            gap: cfg.gap,
            measured_norm: v,
            pass_bound: bound,
            pass,
        };
        for (k, &b) in cfg.bands.iter().enumerate() {
            rows.push(base(name.to_string(), b.value(), norms[k], None, None));
        }
        let ratio = bounded_ratio(norms[0], norms[1]);
        let (bound, pass) = if constrained { (Some(DOUBLING_RATIO), Some(ratio <= DOUBLING_RATIO)) } else { (None, None) };
        rows.push(base(format!("{name}/ratio"), cfg.bands[1].value(), ratio, bound, pass));
    }
    Ok(rows)
}

/// `‖T_a‖_{H^s→H^s}/|a|_∞` for a smooth `a`, and the smoothing of `R(a, ·)`
/// (`H^s → H^{s+1}`) for the `C^1_*` witness.
pub fn paraproduct_probe(cfg: &ProbeConfig) -> Result<Vec<ProbeRow>> {
    let ctx = context(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let smooth = SpectralFunction::random(cfg.coeff_band, &mut rng).real_part();
    let amax = sup_norm(&smooth)?;
    let rough = &ctx.family.rough;
    let weights: Vec<GapWeights> = cfg.bands.iter().map(|&b| GapWeights::new(&ctx.w, cfg.gap, b.max(cfg.coeff_band))).collect();
    let mut rows = Vec::new();
    let base = |probe: String, band: f64, s: f64, v: f64, bound: Option<f64>, pass: Option<bool>| ProbeRow {
        probe,
        band,
        s,
        m: 0.0,
        m_prime: 0.0,
        r: 1.0,
        delta: f64::NAN,
        gap: cfg.gap,
        measured_norm: v,
        pass_bound: bound,
        pass,
    };
    for &s in &cfg.s_values {
        for (name, f, scale, shift) in [("paraproduct", &smooth, amax, 0.0), ("paraproduct_remainder", rough, 1.0, 1.0)] {
            let norms: Vec<f64> = cfg
                .bands
                .iter()
                .zip(&weights)
                .map(|(&b, wts)| {
                    let op = if shift == 0.0 { para_operator(wts, f, b) } else { remainder_operator(wts, f, b) };
                    op_norm(&op, s, s + shift, None, cfg.lanczos).norm / scale
                })
                .collect();
            for (k, &b) in cfg.bands.iter().enumerate() {
                rows.push(base(name.to_string(), b.value(), s, norms[k], None, None));
            }
            let ratio = bounded_ratio(norms[0], norms[1]);
            rows.push(base(format!("{name}/ratio"), cfg.bands[1].value(), s, ratio, Some(DOUBLING_RATIO), Some(ratio <= DOUBLING_RATIO)));
        }
    }
    Ok(rows)
}

/// The composition probe across several cut-off parameters.
pub fn delta_sweep(cfg: &ProbeConfig, deltas: &[f64]) -> Result<Vec<ProbeRow>> {
    let mut rows = Vec::new();
    for &d in deltas {
        rows.extend(composition_probe_at(cfg, d, &format!("delta_sweep/composition@{d}"))?);
    }
    Ok(rows)
}

/// All rows that carry a pass verdict and failed.
pub fn failures(rows: &[ProbeRow]) -> Vec<&ProbeRow> {
    rows.iter().filter(|r| r.pass == Some(false)).collect()
}

/// Sample points used for `sup_x` in symbol fits.
pub fn fit_points(band: Spin) -> Result<Vec<GroupPoint>> {
    sample_points(band)
}
