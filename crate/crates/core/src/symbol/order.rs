//! Order estimation: decay fits over a fixed spin window, symbol-class norms,
//! quasi-homogeneous symbols `κ^m f(b/κ)` and the order probes built on them.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::SpectralFunction;
use crate::group::{GroupPoint, LieVec, C64};
use crate::irreps::{bracket, size, CMat};
use crate::lp::WindowPair;
use crate::quadrature::shared_grid;
use crate::spin::Spin;
use crate::symbol::field::{spectral_norm, Field};
use crate::symbol::taylor::{loglog_slope, DiffOp};
use crate::symbol::tuple::{difference_indices, multi_indices, FundamentalTuple};
use crate::symbol::Symbol;

/// Spin window `[4, 16]` of every decay fit.
pub const FIT_LO: Spin = Spin::from_twice(8);
pub const FIT_HI: Spin = Spin::from_twice(32);
/// Tolerance on fitted orders.
pub const ORDER_TOL: f64 = 0.3;
/// Norms below this are round-off; a quantity that never exceeds it is reported as zero.
pub const NUMERICAL_ZERO: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    /// Least-squares slope of `log‖·‖` against `log⟨ξ⟩`; `−∞` when numerically zero.
    pub slope: f64,
    /// `(j, ⟨ξ⟩, norm)` over the window.
    pub points: Vec<(f64, f64, f64)>,
    pub identically_zero: bool,
}

impl DecayFit {
    /// Slope within `ORDER_TOL` of `order`.
    pub fn matches(&self, order: f64) -> bool {
        (self.slope - order).abs() <= ORDER_TOL
    }

    /// Slope at most `order + ORDER_TOL` (an identically zero quantity qualifies).
    pub fn at_most(&self, order: f64) -> bool {
        self.identically_zero || self.slope <= order + ORDER_TOL
    }
}

/// Fit over `[FIT_LO, FIT_HI]`.
pub fn decay_fit(norms: &[(Spin, f64)]) -> DecayFit {
    decay_fit_window(norms, FIT_LO, FIT_HI)
}

pub fn decay_fit_window(norms: &[(Spin, f64)], lo: Spin, hi: Spin) -> DecayFit {
    let points: Vec<(f64, f64, f64)> =
        norms.iter().filter(|(j, _)| *j >= lo && *j <= hi).map(|&(j, n)| (j.value(), bracket(j), n)).collect();
    let scale = points.iter().map(|p| p.2).fold(0.0, f64::max);
    if scale <= NUMERICAL_ZERO {
        return DecayFit { slope: f64::NEG_INFINITY, points, identically_zero: true };
    }
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.2 > 1e-14 * scale).map(|p| (p.1, p.2)).collect();
    DecayFit { slope: loglog_slope(&pts), points, identically_zero: false }
}

/// `max_{|β| = l} ‖D^β P(ξ)‖` per spin, over the fundamental tuple.
pub fn difference_norms(p: &Field, l: usize, tuple: &FundamentalTuple) -> Vec<(Spin, f64)> {
    let fields: Vec<Field> = difference_indices(l)
        .par_iter()
        .map(|beta| {
            let mut f = p.clone();
            for (i, &e) in beta.iter().enumerate() {
                for _ in 0..e {
                    f = f.difference(tuple.component(i));
                }
            }
            f
        })
        .collect();
    let band = fields.iter().map(|f| f.band()).min().unwrap_or(p.band());
    band.up_to()
        .map(|j| (j, fields.iter().map(|f| spectral_norm(f.get(j))).fold(0.0, f64::max)))
        .collect()
}

/// `κ(ξ)^m = |ξ|^m`, with `κ(0)^m := 0` for `m ≠ 0`.
pub fn kappa_power(j: Spin, m: f64) -> f64 {
    if m == 0.0 {
        1.0
    } else if j == Spin::ZERO {
        0.0
    } else {
        size(j).powf(m)
    }
}

/// `‖D^β (h I)‖` decay for the multiplier `h(⟨|ξ|/t⟩) = ⟨|ξ|/t⟩^m`, `|β| = l`.
pub fn multiplier_decay(m: f64, t: f64, l: usize) -> DecayFit {
    let band = FIT_HI.add(Spin::from_twice(l as u32));
    let field = Field::multiplier(band, |j| (1.0 + (size(j) / t).powi(2)).powf(m / 2.0));
    decay_fit(&difference_norms(&field, l, &FundamentalTuple::new()))
}

#[derive(Clone, Debug, Serialize)]
pub struct SymbolClassNorm {
    pub m: f64,
    pub k: usize,
    pub l: usize,
    pub value: f64,
    /// `(α, β, ξ)` attaining the sup.
    pub worst: (Vec<u8>, [u8; 4], f64),
    pub xi_range: (f64, f64),
}

/// `sup ⟨ξ⟩^{|β|−m−|α|} ‖X^α D^β a(x, ξ)‖` over `|α| ≤ k`, `|β| ≤ l`,
/// `lo ≤ ξ ≤ hi` (capped by the band left after differencing) and the sample points.
pub fn class_norm(a: &Symbol, m: f64, k: usize, l: usize, lo: Spin, hi: Spin, xs: &[GroupPoint]) -> SymbolClassNorm {
    let tuple = FundamentalTuple::new();
    let comps = tuple.components().to_vec();
    let mut best = SymbolClassNorm { m, k, l, value: 0.0, worst: (vec![0; 3], [0; 4], 0.0), xi_range: (lo.value(), hi.value()) };
    for alpha in multi_indices(3, k) {
        let ax = a.apply_x(&DiffOp::normal(&alpha));
        let na: usize = alpha.iter().map(|&x| x as usize).sum();
        for lb in 0..=l {
            for beta in difference_indices(lb) {
                let s = ax.difference_multi(&beta, &comps);
                for (xi, n) in s.sup_norms(xs) {
                    if xi < lo || xi > hi {
                        continue;
                    }
                    let v = n * bracket(xi).powf(lb as f64 - m - na as f64);
                    if v > best.value {
                        best.value = v;
                        best.worst = (alpha.clone(), beta, xi.value());
                    }
                }
            }
        }
    }
    best
}

/// Sample points for sup norms in `x`: the nodes of the grid of the given band.
pub fn sample_points(band: Spin) -> Result<Vec<GroupPoint>> {
    Ok(shared_grid(band.max(Spin::HALF))?.nodes())
}

/// Vector-valued Zygmund norm of `x ↦ a(x, ξ)` for every `ξ`:
/// `sup_x‖φ(|∇_x|)a‖ + sup_t t^r sup_x‖ψ_t(|∇_x|)a‖`, operator norms on `ℋ_ξ`.
pub fn zygmund_norms_in_x(w: &WindowPair, a: &Symbol, r: f64) -> Result<Vec<(Spin, f64)>> {
    let xs = sample_points(a.x_band().add(Spin::HALF))?;
    let low = a.filter_x_frequency(|eta, _| w.phi(size(eta))).sup_norms(&xs);
    let top = size(a.x_band());
    let mut high = vec![0.0; low.len()];
    let mut t = 1.0;
    while t / 2.0 <= top {
        let blk = a.filter_x_frequency(|eta, _| w.psi(size(eta) / t));
        if !blk.is_empty() {
            for (h, (_, n)) in high.iter_mut().zip(blk.sup_norms(&xs)) {
                *h = f64::max(*h, t.powf(r) * n);
            }
        }
        t *= 2f64.powf(0.25);
    }
    Ok(low.into_iter().zip(high).map(|((j, l), h)| (j, l + h)).collect())
}

/// Rough-class norm `W^{m;r}_{l;q}(a) = sup_ξ Σ_{|β|≤l} ⟨ξ⟩^{|β|−m} ‖D^β a(·,ξ)‖_{r;x}`
/// over `lo ≤ ξ ≤ hi`.
pub fn rough_norm(w: &WindowPair, a: &Symbol, m: f64, r: f64, l: usize, lo: Spin, hi: Spin) -> Result<f64> {
    let comps = FundamentalTuple::new().components().to_vec();
    let mut sums: Vec<f64> = vec![0.0; a.xi_band().two_j() as usize + 1];
    let mut reach = a.xi_band();
    for lb in 0..=l {
        let mut per = vec![0.0f64; sums.len()];
        for beta in difference_indices(lb) {
            let s = a.difference_multi(&beta, &comps);
            reach = reach.min(s.xi_band());
            for (xi, n) in zygmund_norms_in_x(w, &s, r)? {
                let slot = &mut per[xi.two_j() as usize];
                *slot = slot.max(n * bracket(xi).powf(lb as f64 - m));
            }
        }
        for (s, p) in sums.iter_mut().zip(per) {
            *s += p;
        }
    }
    Ok(reach
        .up_to()
        .filter(|&xi| xi >= lo && xi <= hi)
        .map(|xi| sums[xi.two_j() as usize])
        .fold(0.0, f64::max))
}

// ---------------------------------------------------------------------------
// Matrix spectral calculus

/// Scalar analytic profiles for quasi-homogeneous symbols.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    /// `f ≡ 1`.
    One,
    /// `f(z) = z`.
    Identity,
    /// `f(z) = 1/(1 − z)`, analytic in the unit disk.
    Geometric,
    /// `f(z) = exp(z)`.
    Exp,
    /// `Σ c_k z^k`.
    Polynomial(Vec<C64>),
}

impl Profile {
    pub fn value(&self, z: C64) -> C64 {
        match self {
            Profile::One => C64::from(1.0),
            Profile::Identity => z,
            Profile::Geometric => 1.0 / (1.0 - z),
            Profile::Exp => z.exp(),
            Profile::Polynomial(c) => c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &ck| acc * z + ck),
        }
    }

    pub fn derivative(&self, z: C64) -> C64 {
        match self {
            Profile::One => C64::new(0.0, 0.0),
            Profile::Identity => C64::from(1.0),
            Profile::Geometric => 1.0 / ((1.0 - z) * (1.0 - z)),
            Profile::Exp => z.exp(),
            Profile::Polynomial(c) => {
                c.iter().enumerate().skip(1).rev().fold(C64::new(0.0, 0.0), |acc, (k, &ck)| acc * z + ck * k as f64)
            }
        }
    }

    /// Radius of the disk of analyticity about 0.
    pub fn radius(&self) -> f64 {
        match self {
            Profile::Geometric => 1.0,
            _ => f64::INFINITY,
        }
    }

    pub fn derivative_profile(&self) -> Option<Profile> {
        match self {
            Profile::One => Some(Profile::Polynomial(vec![])),
            Profile::Identity => Some(Profile::One),
            Profile::Exp => Some(Profile::Exp),
            Profile::Polynomial(c) => {
                Some(Profile::Polynomial(c.iter().enumerate().skip(1).map(|(k, &ck)| ck * k as f64).collect()))
            }
            Profile::Geometric => None,
        }
    }
}

/// Unitary eigendecomposition `M = U diag(μ) U*` of an anti-Hermitian or
/// Hermitian matrix.
fn normal_eigen(m: &CMat) -> Option<(CMat, Vec<C64>)> {
    let n = m.nrows();
    let scale = m.norm().max(1e-300);
    let skew = (m + m.adjoint()).norm() <= 1e-12 * scale;
    let herm = (m - m.adjoint()).norm() <= 1e-12 * scale;
    if !(skew || herm) {
        return None;
    }
    let h = if skew { m * C64::new(0.0, 1.0) } else { m.clone() };
    let h = (&h + h.adjoint()) * C64::from(0.5);
    let eig = h.symmetric_eigen();
    let mu = (0..n)
        .map(|k| {
            let l = eig.eigenvalues[k];
            if skew {
                C64::new(0.0, -l)
            } else {
                C64::from(l)
            }
        })
        .collect();
    Some((eig.eigenvectors, mu))
}

/// `f(M)` by spectral calculus: eigendecomposition for (skew-)Hermitian input,
/// Schur–Parlett otherwise.
pub fn matrix_function(m: &CMat, f: &dyn Fn(C64) -> C64) -> Result<CMat> {
    if let Some((u, mu)) = normal_eigen(m) {
        let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(mu.len(), mu.iter().map(|&z| f(z))));
        return Ok(&u * d * u.adjoint());
    }
    let (q, t) = m.clone().schur().unpack();
    let n = t.nrows();
    let mut fm = CMat::zeros(n, n);
    for i in 0..n {
        fm[(i, i)] = f(t[(i, i)]);
    }
    for p in 1..n {
        for i in 0..n - p {
            let j = i + p;
            let gap = t[(j, j)] - t[(i, i)];
            let mut num = t[(i, j)] * (fm[(j, j)] - fm[(i, i)]);
            for k in i + 1..j {
                num += t[(i, k)] * fm[(k, j)] - fm[(i, k)] * t[(k, j)];
            }
            if gap.norm() < 1e-10 {
                if num.norm() > 1e-12 {
                    return Err(Error::Config("Schur–Parlett: confluent eigenvalues in a non-normal block".into()));
                }
                fm[(i, j)] = C64::new(0.0, 0.0);
            } else {
                fm[(i, j)] = num / gap;
            }
        }
    }
    Ok(&q * fm * q.adjoint())
}

/// Fréchet derivative `L_f(M, E)` of the matrix function at a (skew-)Hermitian `M`
/// (Daleckii–Krein divided differences).
pub fn frechet_derivative(m: &CMat, e: &CMat, f: &Profile) -> Result<CMat> {
    let (u, mu) = normal_eigen(m).ok_or_else(|| Error::Config("Fréchet derivative needs a normal matrix".into()))?;
    let et = u.adjoint() * e * &u;
    let n = mu.len();
    let dd = CMat::from_fn(n, n, |i, j| {
        let (a, b) = (mu[i], mu[j]);
        if (a - b).norm() < 1e-9 {
            f.derivative(0.5 * (a + b))
        } else {
            (f.value(a) - f.value(b)) / (a - b)
        }
    });
    Ok(&u * et.component_mul(&dd) * u.adjoint())
}

/// A quasi-homogeneous symbol `κ(ξ)^m f(b(x,ξ)/κ(ξ))` with `b = Σ b_i(x) σ_{X_i}`.
#[derive(Clone, Debug)]
pub struct QuasiHomogeneous {
    pub profile: Profile,
    pub m: f64,
    pub b: [SpectralFunction; 3],
    /// `sup_{x,ξ} ‖b(x,ξ)‖/|ξ|` measured on sample points.
    pub r0: f64,
}

fn vector_symbol_at(b: &[C64; 3], xi: Spin) -> CMat {
    let basis = crate::irreps::drep_basis(xi);
    &basis[0] * b[0] + &basis[1] * b[1] + &basis[2] * b[2]
}

impl QuasiHomogeneous {
    pub fn new(profile: Profile, m: f64, b: [SpectralFunction; 3]) -> Result<QuasiHomogeneous> {
        let band = b.iter().map(|f| f.band()).max().unwrap_or(Spin::ZERO);
        let xs = sample_points(band.add(Spin::HALF))?;
        // on spin j, ‖b(x,ξ)‖ = 2j‖b(x,½)‖ and |ξ| = √(j(j+1)/2κ_g); the ratio increases
        // to 2√(2κ_g)‖b(x,½)‖ as j → ∞
        let kappa_g = crate::group::metric_scale();
        let r0 = xs
            .iter()
            .map(|x| {
                let v: Vec<C64> = b.iter().map(|f| f.evaluate(x)).collect();
                2.0 * (2.0 * kappa_g).sqrt() * spectral_norm(&vector_symbol_at(&[v[0], v[1], v[2]], Spin::HALF))
            })
            .fold(0.0, f64::max);
        if r0 >= profile.radius() {
            return Err(Error::OutsideAnalyticity { radius: r0, limit: profile.radius() });
        }
        Ok(QuasiHomogeneous { profile, m, b, r0 })
    }

    /// Constant-coefficient `b = Σ c_i σ_{X_i}`.
    pub fn constant(profile: Profile, m: f64, c: [f64; 3]) -> Result<QuasiHomogeneous> {
        let f = |v: f64| SpectralFunction::constant(Spin::ZERO, C64::from(v));
        QuasiHomogeneous::new(profile, m, [f(c[0]), f(c[1]), f(c[2])])
    }

    pub fn b_at(&self, x: &GroupPoint) -> [C64; 3] {
        [self.b[0].evaluate(x), self.b[1].evaluate(x), self.b[2].evaluate(x)]
    }

    /// `M(ξ) = b(x, ξ)/κ(ξ)`, zero at `ξ = 0`.
    pub fn ratio(&self, x: &GroupPoint, band: Spin) -> Field {
        let bx = self.b_at(x);
        Field::from_fn(band, |xi| vector_symbol_at(&bx, xi) * C64::from(kappa_power(xi, -1.0)))
    }

    /// `ξ ↦ κ^m f(b(x,ξ)/κ)` at a frozen point.
    pub fn frozen(&self, x: &GroupPoint, band: Spin) -> Result<Field> {
        self.frozen_with(x, band, &|z| self.profile.value(z))
    }

    /// `ξ ↦ f′(b(x,ξ)/κ)`.
    pub fn frozen_derivative(&self, x: &GroupPoint, band: Spin) -> Result<Field> {
        let ratio = self.ratio(x, band);
        let blocks: Vec<CMat> = band
            .up_to()
            .map(|xi| matrix_function(ratio.get(xi), &|z| self.profile.derivative(z)))
            .collect::<Result<_>>()?;
        Ok(Field::from_fn(band, |xi| blocks[xi.two_j() as usize].clone()))
    }

    fn frozen_with(&self, x: &GroupPoint, band: Spin, f: &(dyn Fn(C64) -> C64 + Sync)) -> Result<Field> {
        let ratio = self.ratio(x, band);
        let blocks: Vec<CMat> = band
            .up_to()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&xi| Ok(matrix_function(ratio.get(xi), f)? * C64::from(kappa_power(xi, self.m))))
            .collect::<Result<_>>()?;
        Ok(Field::from_fn(band, |xi| blocks[xi.two_j() as usize].clone()))
    }

    /// The symbol in separated form, from samples in `x` (returns the tail mass).
    pub fn to_symbol(&self, xi_band: Spin, x_band: Spin) -> Result<(Symbol, f64)> {
        let me = Arc::new(self.clone());
        Symbol::from_pointwise(xi_band, x_band, move |x, xi| {
            let bx = me.b_at(x);
            let ratio = vector_symbol_at(&bx, xi) * C64::from(kappa_power(xi, -1.0));
            matrix_function(&ratio, &|z| me.profile.value(z)).expect("normal ratio") * C64::from(kappa_power(xi, me.m))
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DkappaReport {
    pub m: f64,
    /// Worst fit over the four tuple components.
    pub fit: DecayFit,
    pub identically_zero: bool,
}

/// Decay of `D_μ κ^m − m κ^{m−1} D_μ κ`, worst over `μ`.
pub fn dkappa_probe(m: f64) -> DkappaReport {
    let band = FIT_HI.add(Spin::HALF);
    let tuple = FundamentalTuple::new();
    let km = Field::multiplier(band, |j| kappa_power(j, m));
    let k1 = Field::multiplier(band, |j| kappa_power(j, 1.0));
    let mut norms = vec![0.0f64; FIT_HI.two_j() as usize + 1];
    for q in tuple.components() {
        let lhs = km.difference(q);
        let dk = k1.difference(q);
        let rem = lhs.sub(&dk.weighted(|j| m * kappa_power(j, m - 1.0)));
        for (j, n) in rem.op_norms() {
            norms[j.two_j() as usize] = norms[j.two_j() as usize].max(n);
        }
    }
    let pairs: Vec<(Spin, f64)> = norms.iter().enumerate().map(|(k, &n)| (Spin::from_twice(k as u32), n)).collect();
    let fit = decay_fit(&pairs);
    let identically_zero = fit.identically_zero;
    DkappaReport { m, fit, identically_zero }
}

/// Results of the quasi-homogeneous order probes at frozen sample points.
#[derive(Clone, Debug, Serialize)]
pub struct QuasiHomogeneousReport {
    /// `sup ‖κ^m f(b/κ)‖`: claimed order `m`.
    pub symbol: DecayFit,
    /// `D_μ f(b/κ) − κ^{-1} f′ D_μ b + κ^{-2} f′ b D_μκ`: claimed order −2.
    pub difference_remainder: DecayFit,
    /// The same with the opposite sign on the last term.
    pub difference_remainder_flipped: DecayFit,
    /// `[f(b/κ), σ_Y]`: claimed order 0.
    pub commutator: DecayFit,
    /// `X f(b/κ) − κ^{-1} f′(b/κ) X b`: claimed order −1.
    pub derivative_remainder: DecayFit,
}

/// Order probes for `f(b/κ)` at the given points, for a vector field `Y` and direction `X`.
pub fn quasi_homogeneous_probes(qh: &QuasiHomogeneous, xs: &[GroupPoint], y: &LieVec, xdir: &LieVec) -> Result<QuasiHomogeneousReport> {
    let band = FIT_HI.add(Spin::HALF);
    let tuple = FundamentalTuple::new();
    let zero_m = QuasiHomogeneous { m: 0.0, ..qh.clone() };
    let kappa = Field::multiplier(band, |j| kappa_power(j, 1.0));
    let dkappa: Vec<Field> = tuple.components().iter().map(|q| kappa.difference(q)).collect();
    let sigma_y = Field::vector_field(band, y);
    let mut acc = [vec![0.0f64; band.two_j() as usize + 1], vec![0.0; band.two_j() as usize + 1], vec![0.0; band.two_j() as usize + 1], vec![0.0; band.two_j() as usize + 1], vec![0.0; band.two_j() as usize + 1]];
    let bump = |acc: &mut Vec<f64>, norms: Vec<(Spin, f64)>| {
        for (j, n) in norms {
            acc[j.two_j() as usize] = acc[j.two_j() as usize].max(n);
        }
    };
    let inv_kappa = |j: Spin| kappa_power(j, -1.0);
    for x in xs {
        bump(&mut acc[0], qh.frozen(x, band)?.op_norms());
        let f0 = zero_m.frozen(x, band)?;
        let fp = zero_m.frozen_derivative(x, band)?;
        let bx = qh.b_at(x);
        let bfield = Field::from_fn(band, |xi| vector_symbol_at(&bx, xi));
        for (i, q) in tuple.components().iter().enumerate() {
            let df = f0.difference(q);
            let db = bfield.difference(q);
            let t1 = fp.mul(&db).weighted(inv_kappa);
            let t2 = fp.mul(&bfield).mul(&dkappa[i]).weighted(|j| kappa_power(j, -2.0));
            bump(&mut acc[1], df.sub(&t1).add(&t2).op_norms());
            bump(&mut acc[2], df.sub(&t1).sub(&t2).op_norms());
        }
        bump(&mut acc[3], f0.commutator(&sigma_y).op_norms());
        // X f(M(x)) = L_f(M, X M) with X M = Σ (X b_i)(x) σ_{X_i}/κ
        let xb: Vec<C64> = qh.b.iter().map(|f| f.lie_derivative(xdir).evaluate(x)).collect();
        let xb = [xb[0], xb[1], xb[2]];
        let ratio = qh.ratio(x, band);
        let blocks: Vec<f64> = band
            .up_to()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&xi| {
                let e = vector_symbol_at(&xb, xi) * C64::from(inv_kappa(xi));
                let lf = frechet_derivative(ratio.get(xi), &e, &qh.profile)?;
                let fpx = matrix_function(ratio.get(xi), &|z| qh.profile.derivative(z))?;
                Ok(spectral_norm(&(lf - fpx * e)))
            })
            .collect::<Result<_>>()?;
        bump(&mut acc[4], band.up_to().zip(blocks).collect());
    }
    let fit = |v: &Vec<f64>| decay_fit(&v.iter().enumerate().map(|(k, &n)| (Spin::from_twice(k as u32), n)).collect::<Vec<_>>());
    Ok(QuasiHomogeneousReport {
        symbol: fit(&acc[0]),
        difference_remainder: fit(&acc[1]),
        difference_remainder_flipped: fit(&acc[2]),
        commutator: fit(&acc[3]),
        derivative_remainder: fit(&acc[4]),
    })
}

/// Decay of `‖[κ f(b₁/κ), σ_X](ξ)‖` (order drop of the symbol commutator: `1 + 1 − 1`).
pub fn commutator_order_probe(qh: &QuasiHomogeneous, xs: &[GroupPoint], x: &LieVec) -> Result<DecayFit> {
    let band = FIT_HI;
    let sigma = Field::vector_field(band, x);
    let mut acc = vec![0.0f64; band.two_j() as usize + 1];
    for p in xs {
        let a = qh.frozen(p, band)?;
        for (j, n) in a.commutator(&sigma).op_norms() {
            acc[j.two_j() as usize] = acc[j.two_j() as usize].max(n);
        }
    }
    Ok(decay_fit(&acc.iter().enumerate().map(|(k, &n)| (Spin::from_twice(k as u32), n)).collect::<Vec<_>>()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn fits_recover_known_powers() {
        let norms: Vec<(Spin, f64)> = FIT_HI.up_to().map(|j| (j, 3.0 * bracket(j).powf(-1.5))).collect();
        assert!((decay_fit(&norms).slope + 1.5).abs() < 1e-12);
        assert!(decay_fit(&[(FIT_LO, 0.0)]).identically_zero);
    }

    #[test]
    fn multiplier_differences_lose_one_order_each() {
        for m in [1.0, -1.0] {
            for l in 0..=2 {
                let fit = multiplier_decay(m, 1.0, l);
                assert!(fit.matches(m - l as f64), "m={m} l={l}: slope {}", fit.slope);
            }
        }
    }

    #[test]
    fn dkappa_orders() {
        let one = dkappa_probe(1.0);
        assert!(one.identically_zero);
        assert!(dkappa_probe(2.0).fit.at_most(0.0), "{:?}", dkappa_probe(2.0).fit.slope);
        assert!(dkappa_probe(-1.0).fit.at_most(-3.0), "{:?}", dkappa_probe(-1.0).fit.slope);
    }

    #[test]
    fn spectral_calculus() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let xi = Spin::from_twice(5);
        let basis = crate::irreps::drep_basis(xi);
        let m = (&basis[0] * C64::from(0.05) + &basis[2] * C64::from(-0.03)) * C64::from(1.0);
        // geometric series oracle
        let f = matrix_function(&m, &|z| Profile::Geometric.value(z)).unwrap();
        let mut series = CMat::identity(xi.dim(), xi.dim());
        let mut pow = CMat::identity(xi.dim(), xi.dim());
        for _ in 0..60 {
            pow = &pow * &m;
            series += &pow;
        }
        assert!((f - series).norm() < 1e-10);
        // non-normal input goes through Schur–Parlett; compare against exp
        let r = SpectralFunction::random(Spin::ONE, &mut rng);
        let a = r.coeff(Spin::ONE) * C64::from(0.3);
        let e = matrix_function(&a, &|z| z.exp()).unwrap();
        assert!((e - crate::irreps::expm(&a)).norm() < 1e-10);
    }

    #[test]
    fn frechet_matches_finite_differences() {
        let xi = Spin::from_twice(4);
        let basis = crate::irreps::drep_basis(xi);
        let m = &basis[0] * C64::from(0.2);
        let e = &basis[1] * C64::from(0.1);
        let p = Profile::Geometric;
        let h = 1e-6;
        let fd = (matrix_function(&(&m + &e * C64::from(h)), &|z| p.value(z)).unwrap()
            - matrix_function(&(&m - &e * C64::from(h)), &|z| p.value(z)).unwrap())
            / C64::from(2.0 * h);
        assert!((frechet_derivative(&m, &e, &p).unwrap() - fd).norm() < 1e-7);
    }

    #[test]
    fn quasi_homogeneous_basics() {
        let one = QuasiHomogeneous::constant(Profile::One, 1.0, [0.3, 0.1, 0.0]).unwrap();
        let band = Spin::from_twice(6);
        let f = one.frozen(&GroupPoint::identity(), band).unwrap();
        for j in band.up_to() {
            assert!((f.get(j) - CMat::identity(j.dim(), j.dim()) * C64::from(kappa_power(j, 1.0))).norm() < 1e-13);
        }
        assert!(matches!(
            QuasiHomogeneous::constant(Profile::Geometric, 0.0, [3.0, 0.0, 0.0]),
            Err(Error::OutsideAnalyticity { .. })
        ));
        let lin = QuasiHomogeneous::constant(Profile::Identity, 0.0, [0.5, -0.2, 0.1]).unwrap();
        let xs = [GroupPoint::identity()];
        let r = quasi_homogeneous_probes(&lin, &xs, &LieVec::basis(2), &LieVec::basis(0)).unwrap();
        assert!(r.symbol.matches(0.0), "{}", r.symbol.slope);
    }
}
