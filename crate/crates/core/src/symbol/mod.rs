//! Symbols `a(x, ξ)` and their quantization
//! `Op(a)f(x) = Σ_ξ d_ξ Tr(a(x,ξ) f̂(ξ) ξ(x))`.
//!
//! A symbol is stored in separated form `a(x, ξ) = Σ_k c_k(x) P_k(ξ)`: each term
//! pairs a band-limited coefficient with a matrix field. Quantizing a term is
//! `f ↦ c_k · (P_k f)`, an exact band-limited product. The canonical form uses
//! the entry functions `D^η_{mn}` as coefficients, which is the same data as the
//! partial Fourier transform `â(η, ξ)`.

pub mod field;
pub mod order;
pub mod taylor;
pub mod tuple;

use std::sync::Arc;

use rayon::prelude::*;
use serde_json::json;

use crate::cg::multiply;
use crate::error::{Error, Result};
use crate::fourier::{forward, inverse, GridFunction, SpectralFunction};
use crate::group::{GroupPoint, LieVec, C64};
use crate::irreps::CMat;
use crate::quadrature::{shared_grid, QuadratureGrid};
use crate::spin::Spin;

pub use field::{spectral_norm, Field};
pub use taylor::{taylor_operators, DiffOp, TaylorOperators};
pub use tuple::{FundamentalTuple, TUPLE_LABELS};

/// Relative spectral mass that may be dropped without an explicit truncation request.
pub const TRUNCATION_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Term {
    pub coeff: SpectralFunction,
    pub field: Field,
}

#[derive(Clone, Debug)]
pub struct Symbol {
    xi_band: Spin,
    terms: Vec<Term>,
}

fn is_zero_fn(f: &SpectralFunction) -> bool {
    f.coeffs().iter().all(|m| m.iter().all(|z| z.norm() == 0.0))
}

impl Symbol {
    /// Fields are cut to `xi_band`; every field must reach it.
    pub fn new(xi_band: Spin, terms: Vec<Term>) -> Result<Symbol> {
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            if t.field.band() < xi_band {
                return Err(Error::BandMismatch(format!("field band {} below symbol band {xi_band}", t.field.band())));
            }
            let field = if t.field.band() == xi_band { t.field } else { t.field.truncate(xi_band) };
            out.push(Term { coeff: t.coeff, field });
        }
        Ok(Symbol { xi_band, terms: out })
    }

    pub fn zero(xi_band: Spin) -> Symbol {
        Symbol { xi_band, terms: vec![] }
    }

    /// An `x`-independent symbol.
    pub fn from_field(field: Field) -> Symbol {
        let xi_band = field.band();
        Symbol { xi_band, terms: vec![Term { coeff: SpectralFunction::constant(Spin::ZERO, C64::from(1.0)), field }] }
    }

    pub fn identity(xi_band: Spin) -> Symbol {
        Symbol::from_field(Field::identity(xi_band))
    }

    pub fn multiplier(xi_band: Spin, h: impl Fn(Spin) -> f64) -> Symbol {
        Symbol::from_field(Field::multiplier(xi_band, h))
    }

    /// `Σ_i b_i(x) σ_{X_i}(ξ)`, the symbol of the vector field `Σ b_i X_i`.
    pub fn vector_field(xi_band: Spin, b: &[SpectralFunction; 3]) -> Symbol {
        let terms = (0..3)
            .filter(|&i| !is_zero_fn(&b[i]))
            .map(|i| Term { coeff: b[i].clone(), field: Field::vector_field(xi_band, &LieVec::basis(i)) })
            .collect();
        Symbol { xi_band, terms }
    }

    /// `c(x)·P(ξ)`.
    pub fn separated(coeff: SpectralFunction, field: Field) -> Symbol {
        let xi_band = field.band();
        Symbol { xi_band, terms: vec![Term { coeff, field }] }
    }

    pub fn xi_band(&self) -> Spin {
        self.xi_band
    }

    /// Largest coefficient band.
    pub fn x_band(&self) -> Spin {
        self.terms.iter().map(|t| t.coeff.band()).max().unwrap_or(Spin::ZERO)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Restrict to a smaller `ξ`-band.
    pub fn with_xi_band(&self, band: Spin) -> Symbol {
        let band = band.min(self.xi_band);
        Symbol { xi_band: band, terms: self.terms.iter().map(|t| Term { coeff: t.coeff.clone(), field: t.field.truncate(band) }).collect() }
    }

    fn concat(&self, other: &Symbol, sign: C64) -> Symbol {
        let band = self.xi_band.min(other.xi_band);
        let mut terms: Vec<Term> = self.with_xi_band(band).terms;
        terms.extend(other.with_xi_band(band).terms.into_iter().map(|t| Term { coeff: t.coeff, field: t.field.scale(sign) }));
        Symbol { xi_band: band, terms }.merged()
    }

    pub fn add(&self, other: &Symbol) -> Symbol {
        self.concat(other, C64::from(1.0))
    }

    pub fn sub(&self, other: &Symbol) -> Symbol {
        self.concat(other, C64::from(-1.0))
    }

    pub fn scale(&self, c: C64) -> Symbol {
        Symbol { xi_band: self.xi_band, terms: self.terms.iter().map(|t| Term { coeff: t.coeff.clone(), field: t.field.scale(c) }).collect() }
    }

    /// Merges all `x`-constant terms into one and drops zero terms.
    pub fn merged(self) -> Symbol {
        let xi_band = self.xi_band;
        let mut constant: Option<Field> = None;
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in self.terms {
            if is_zero_fn(&t.coeff) || t.field.is_zero() {
                continue;
            }
            if t.coeff.band() == Spin::ZERO {
                let f = t.field.scale(t.coeff.coeff(Spin::ZERO)[(0, 0)]);
                constant = Some(match constant {
                    Some(c) => c.add(&f),
                    None => f,
                });
            } else {
                terms.push(t);
            }
        }
        if let Some(c) = constant {
            if !c.is_zero() {
                terms.insert(0, Term { coeff: SpectralFunction::constant(Spin::ZERO, C64::from(1.0)), field: c });
            }
        }
        Symbol { xi_band, terms }
    }

    /// Pointwise product `a(x,ξ)b(x,ξ)`.
    pub fn mul(&self, other: &Symbol) -> Symbol {
        let band = self.xi_band.min(other.xi_band);
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for s in &self.terms {
            for o in &other.terms {
                let coeff = multiply(&s.coeff, &o.coeff, s.coeff.band().add(o.coeff.band()));
                terms.push(Term { coeff, field: s.field.truncate(band).mul(&o.field.truncate(band)) });
            }
        }
        Symbol { xi_band: band, terms }.merged()
    }

    /// Pointwise commutator `ab − ba`.
    pub fn commutator(&self, other: &Symbol) -> Symbol {
        self.mul(other).sub(&other.mul(self))
    }

    /// Pointwise adjoint `a(x,ξ)*`.
    pub fn adjoint_pointwise(&self) -> Symbol {
        Symbol {
            xi_band: self.xi_band,
            terms: self.terms.iter().map(|t| Term { coeff: t.coeff.conj(), field: t.field.adjoint() }).collect(),
        }
    }

    /// Left-invariant differential operator acting in `x`.
    pub fn apply_x(&self, op: &DiffOp) -> Symbol {
        Symbol {
            xi_band: self.xi_band,
            terms: self.terms.iter().map(|t| Term { coeff: op.apply(&t.coeff), field: t.field.clone() }).collect(),
        }
        .merged()
    }

    pub fn lie_derivative(&self, x: &LieVec) -> Symbol {
        Symbol {
            xi_band: self.xi_band,
            terms: self.terms.iter().map(|t| Term { coeff: t.coeff.lie_derivative(x), field: t.field.clone() }).collect(),
        }
        .merged()
    }

    /// `D_q` acting in `ξ`; the `ξ`-band shrinks by `band(q)`.
    pub fn difference(&self, q: &SpectralFunction) -> Symbol {
        let band = self.xi_band.saturating_sub(q.band());
        Symbol {
            xi_band: band,
            terms: self.terms.iter().map(|t| Term { coeff: t.coeff.clone(), field: t.field.difference(q) }).collect(),
        }
        .merged()
    }

    /// `D^α = Π D_{q_i}^{α_i}` over the given tuple.
    pub fn difference_multi(&self, alpha: &[u8], tuple: &[SpectralFunction]) -> Symbol {
        let mut out = self.clone();
        for (q, &a) in tuple.iter().zip(alpha) {
            for _ in 0..a {
                out = out.difference(q);
            }
        }
        out
    }

    pub fn map_fields(&self, f: impl Fn(&Field) -> Field) -> Symbol {
        Symbol { xi_band: self.xi_band, terms: self.terms.iter().map(|t| Term { coeff: t.coeff.clone(), field: f(&t.field) }).collect() }
            .merged()
    }

    /// Canonical form: one term per entry function `D^η_{mn}` of the coefficients.
    pub fn canonical(&self) -> Symbol {
        let xb = self.x_band();
        let mut fields: Vec<Vec<Option<Field>>> = xb.up_to().map(|e| vec![None; e.dim() * e.dim()]).collect();
        for t in &self.terms {
            for eta in t.coeff.band().up_to() {
                let ent = t.coeff.entry_coeffs(eta);
                let d = eta.dim();
                for m in 0..d {
                    for n in 0..d {
                        let c = ent[(m, n)];
                        if c.norm() == 0.0 {
                            continue;
                        }
                        let slot = &mut fields[eta.two_j() as usize][m * d + n];
                        let add = t.field.scale(c);
                        *slot = Some(match slot.take() {
                            Some(f) => f.add(&add),
                            None => add,
                        });
                    }
                }
            }
        }
        let mut terms = Vec::new();
        for eta in xb.up_to() {
            let d = eta.dim();
            for (k, f) in fields[eta.two_j() as usize].iter_mut().enumerate() {
                if let Some(field) = f.take() {
                    if !field.is_zero() {
                        terms.push(Term { coeff: SpectralFunction::entry(eta, eta, k / d, k % d), field });
                    }
                }
            }
        }
        Symbol { xi_band: self.xi_band, terms }.merged()
    }

    /// Splits every coefficient into its isotypic parts and weights the field of
    /// the `η`-part by `w(η, ξ)`: the symbol of `w(|∇_x|, ξ)` acting on `a(·, ξ)`.
    pub fn filter_x_frequency(&self, w: impl Fn(Spin, Spin) -> f64) -> Symbol {
        let mut terms = Vec::new();
        for t in &self.terms {
            for eta in t.coeff.band().up_to() {
                let block = t.coeff.coeff(eta);
                if block.iter().all(|z| z.norm() == 0.0) {
                    continue;
                }
                let field = t.field.weighted(|xi| w(eta, xi));
                if field.is_zero() {
                    continue;
                }
                terms.push(Term { coeff: SpectralFunction::single(eta, eta, block.clone()), field });
            }
        }
        Symbol { xi_band: self.xi_band, terms }.merged()
    }

    /// `∫ ‖a_η(x, ξ)‖²_HS dx` for each `(η, ξ)`, where `a_η` is the `η`-isotypic part in `x`.
    ///
    /// Uses the Gram matrix of the coefficient blocks, so no canonical form is built.
    pub fn partial_fourier_mass(&self) -> Vec<(Spin, Spin, f64)> {
        let mut out = Vec::new();
        for eta in self.x_band().up_to() {
            let parts: Vec<(&CMat, &Field)> = self
                .terms
                .iter()
                .filter(|t| t.coeff.band() >= eta)
                .map(|t| (t.coeff.coeff(eta), &t.field))
                .filter(|(c, _)| c.iter().any(|z| z.norm() > 0.0))
                .collect();
            if parts.is_empty() {
                continue;
            }
            let d = eta.dim() as f64;
            let gram: Vec<Vec<C64>> = parts
                .iter()
                .map(|(ck, _)| parts.iter().map(|(cl, _)| ck.iter().zip(cl.iter()).map(|(x, y)| x * y.conj()).sum::<C64>() * d).collect())
                .collect();
            for xi in self.xi_band.up_to() {
                let mut mass = C64::new(0.0, 0.0);
                for (k, (_, pk)) in parts.iter().enumerate() {
                    for (l, (_, pl)) in parts.iter().enumerate() {
                        let hs: C64 = pk.get(xi).iter().zip(pl.get(xi).iter()).map(|(x, y)| x * y.conj()).sum();
                        mass += gram[k][l] * hs;
                    }
                }
                if mass.re > 0.0 {
                    out.push((eta, xi, mass.re));
                }
            }
        }
        out
    }

    pub fn evaluate(&self, x: &GroupPoint, xi: Spin) -> CMat {
        let mut out = CMat::zeros(xi.dim(), xi.dim());
        for t in &self.terms {
            out += t.field.get(xi) * t.coeff.evaluate(x);
        }
        out
    }

    /// `ξ ↦ a(x, ξ)` at a fixed point.
    pub fn frozen(&self, x: &GroupPoint) -> Field {
        let cs: Vec<C64> = self.terms.iter().map(|t| t.coeff.evaluate(x)).collect();
        Field::from_fn(self.xi_band, |xi| {
            let mut out = CMat::zeros(xi.dim(), xi.dim());
            for (t, c) in self.terms.iter().zip(&cs) {
                out += t.field.get(xi) * *c;
            }
            out
        })
    }

    /// `sup_x ‖a(x, ξ)‖` over the sample points, per `ξ`.
    pub fn sup_norms(&self, xs: &[GroupPoint]) -> Vec<(Spin, f64)> {
        let per_x: Vec<Vec<(Spin, f64)>> = xs.par_iter().map(|x| self.frozen(x).op_norms()).collect();
        self.xi_band
            .up_to()
            .map(|xi| (xi, per_x.iter().map(|v| v[xi.two_j() as usize].1).fold(0.0, f64::max)))
            .collect()
    }

    fn check_input(&self, f: &SpectralFunction) -> Result<()> {
        if f.band() > self.xi_band {
            return Err(Error::BandMismatch(format!("input band {} exceeds symbol band {}", f.band(), self.xi_band)));
        }
        Ok(())
    }

    /// Exact quantization on the full output band `band(f) + x_band`.
    pub fn quantize_exact(&self, f: &SpectralFunction) -> Result<SpectralFunction> {
        self.check_input(f)?;
        let out = f.band().add(self.x_band());
        let parts: Vec<SpectralFunction> = self
            .terms
            .par_iter()
            .map(|t| multiply(&t.coeff, &t.field.apply(f), out))
            .collect();
        let mut acc = SpectralFunction::zeros(out);
        for p in &parts {
            acc.add_scaled(p, C64::from(1.0));
        }
        Ok(acc)
    }

    /// Quantization on `out_band`; refuses to drop more than [`TRUNCATION_TOL`] relative mass.
    pub fn quantize(&self, f: &SpectralFunction, out_band: Spin) -> Result<SpectralFunction> {
        let full = self.quantize_exact(f)?;
        if out_band >= full.band() {
            return Ok(full.with_band(out_band));
        }
        full.checked_truncate(out_band)
    }

    /// Quantization with an explicitly requested truncation to `out_band`.
    pub fn quantize_truncated(&self, f: &SpectralFunction, out_band: Spin) -> Result<SpectralFunction> {
        self.check_input(f)?;
        let parts: Vec<SpectralFunction> = self
            .terms
            .par_iter()
            .map(|t| multiply(&t.coeff, &t.field.apply(f), out_band))
            .collect();
        let mut acc = SpectralFunction::zeros(out_band);
        for p in &parts {
            acc.add_scaled(p, C64::from(1.0));
        }
        Ok(acc)
    }

    /// `Op(a)* g` restricted to inputs of band `in_band`: `Σ_k P_k*(c̄_k g)`.
    pub fn quantize_adjoint(&self, g: &SpectralFunction, in_band: Spin) -> SpectralFunction {
        let in_band = in_band.min(self.xi_band);
        let parts: Vec<SpectralFunction> = self
            .terms
            .par_iter()
            .map(|t| t.field.truncate(in_band).adjoint().apply(&multiply(&t.coeff.conj(), g, in_band)))
            .collect();
        let mut acc = SpectralFunction::zeros(in_band);
        for p in &parts {
            acc.add_scaled(&p.with_band(in_band), C64::from(1.0));
        }
        acc
    }

    /// Pointwise evaluation of `Op(a)f` on the nodes of a grid.
    pub fn quantize_on_grid(&self, f: &SpectralFunction, grid: &Arc<QuadratureGrid>) -> Result<GridFunction> {
        self.check_input(f)?;
        let parts: Vec<GridFunction> = self
            .terms
            .par_iter()
            .map(|t| Ok(inverse(&t.coeff, grid)?.mul(&inverse(&t.field.apply(f), grid)?)))
            .collect::<Result<_>>()?;
        let mut acc = GridFunction::constant(Arc::clone(grid), C64::new(0.0, 0.0));
        for p in &parts {
            acc = acc.add(p);
        }
        Ok(acc)
    }

    /// The right-convolution kernel `K(x, ·)` with `\widehat{K(x,·)} = a(x, ·)`.
    pub fn kernel_at(&self, x: &GroupPoint) -> SpectralFunction {
        self.frozen(x).kernel()
    }

    /// `∫ f(y) K(x, y⁻¹x) dy` by quadrature.
    pub fn kernel_apply(&self, f: &SpectralFunction, x: &GroupPoint) -> Result<C64> {
        let k = self.kernel_at(x);
        let grid = shared_grid(f.band().add(self.xi_band))?;
        let vals: Vec<C64> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let y = grid.node(i);
                f.evaluate(&y) * k.evaluate(&y.inverse().mul(x))
            })
            .collect();
        Ok(grid.integrate(&vals))
    }

    /// Builds a symbol from its entry functions `a_{rs}(·, ξ)`.
    pub fn from_entry_functions(xi_band: Spin, entry: impl Fn(Spin, usize, usize) -> SpectralFunction + Sync) -> Symbol {
        let mut terms = Vec::new();
        for xi in xi_band.up_to() {
            let d = xi.dim();
            for r in 0..d {
                for s in 0..d {
                    let c = entry(xi, r, s);
                    if is_zero_fn(&c) {
                        continue;
                    }
                    let field = Field::from_fn(xi_band, |j| {
                        let mut m = CMat::zeros(j.dim(), j.dim());
                        if j == xi {
                            m[(r, s)] = C64::from(1.0);
                        }
                        m
                    });
                    terms.push(Term { coeff: c, field });
                }
            }
        }
        Symbol { xi_band, terms }.canonical()
    }

    /// Samples `a(x, ξ)` on a grid and transforms in `x` up to `x_band`.
    /// Returns the symbol and the worst relative tail mass found one band higher.
    pub fn from_pointwise(
        xi_band: Spin,
        x_band: Spin,
        a: impl Fn(&GroupPoint, Spin) -> CMat + Sync,
    ) -> Result<(Symbol, f64)> {
        let probe = x_band.add(Spin::ONE);
        let grid = shared_grid(probe)?;
        let nodes = grid.nodes();
        let mut terms = Vec::new();
        let mut tail: f64 = 0.0;
        for xi in xi_band.up_to() {
            let d = xi.dim();
            let samples: Vec<CMat> = nodes.par_iter().map(|x| a(x, xi)).collect();
            let entries: Vec<(usize, usize, SpectralFunction)> = (0..d * d)
                .into_par_iter()
                .map(|k| {
                    let (r, s) = (k / d, k % d);
                    let g = GridFunction::new(Arc::clone(&grid), samples.iter().map(|m| m[(r, s)]).collect())?;
                    Ok((r, s, forward(&g, probe)?))
                })
                .collect::<Result<_>>()?;
            for (r, s, f) in entries {
                tail = tail.max(f.relative_mass_above(x_band));
                let c = f.with_band(x_band);
                if is_zero_fn(&c) {
                    continue;
                }
                let field = Field::from_fn(xi_band, |j| {
                    let mut m = CMat::zeros(j.dim(), j.dim());
                    if j == xi {
                        m[(r, s)] = C64::from(1.0);
                    }
                    m
                });
                terms.push(Term { coeff: c, field });
            }
        }
        Ok((Symbol { xi_band, terms }.canonical(), tail))
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "two_xi_band": self.xi_band.two_j(),
            "terms": self.terms.iter().map(|t| json!({"coeff": t.coeff.to_json(), "field": t.field.to_json()})).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Symbol> {
        let band = v["two_xi_band"].as_u64().ok_or_else(|| Error::Config("symbol json: missing two_xi_band".into()))?;
        let terms = v["terms"]
            .as_array()
            .ok_or_else(|| Error::Config("symbol json: missing terms".into()))?
            .iter()
            .map(|t| Ok(Term { coeff: SpectralFunction::from_json(&t["coeff"])?, field: Field::from_json(&t["field"])? }))
            .collect::<Result<Vec<_>>>()?;
        Symbol::new(Spin::from_twice(band as u32), terms)
    }
}

/// `σ[A](x, ξ) = ξ(x)* (Aξ)(x)`, i.e. `σ_{rs} = Σ_m conj(D^ξ_{mr}) · A(D^ξ_{ms})`.
///
/// `A` is applied to every entry function up to `xi_band`; its outputs are
/// multiplied exactly, so the symbol is exact whenever `A` is band-limited.
pub fn symbol_of_operator(a: impl Fn(&SpectralFunction) -> SpectralFunction + Sync, xi_band: Spin) -> Symbol {
    let mut terms = Vec::new();
    for xi in xi_band.up_to() {
        let d = xi.dim();
        let images: Vec<SpectralFunction> = (0..d * d).into_par_iter().map(|k| a(&SpectralFunction::entry(xi, xi, k / d, k % d))).collect();
        let conjs: Vec<SpectralFunction> = (0..d * d).map(|k| SpectralFunction::entry(xi, xi, k / d, k % d).conj()).collect();
        let entries: Vec<(usize, usize, SpectralFunction)> = (0..d * d)
            .into_par_iter()
            .map(|k| {
                let (r, s) = (k / d, k % d);
                let mut acc: Option<SpectralFunction> = None;
                for m in 0..d {
                    let img = &images[m * d + s];
                    let p = multiply(&conjs[m * d + r], img, img.band().add(xi));
                    acc = Some(match acc {
                        Some(x) => x.add(&p),
                        None => p,
                    });
                }
                (r, s, acc.expect("d ≥ 1"))
            })
            .collect();
        for (r, s, c) in entries {
            if is_zero_fn(&c) {
                continue;
            }
            let field = Field::from_fn(xi_band, |j| {
                let mut m = CMat::zeros(j.dim(), j.dim());
                if j == xi {
                    m[(r, s)] = C64::from(1.0);
                }
                m
            });
            terms.push(Term { coeff: c, field });
        }
    }
    Symbol { xi_band, terms }.canonical()
}

#[cfg(test)]
mod tests;
