//! Matrix fields `ξ ↦ P(ξ)` on the unitary dual, the `x`-independent part of a symbol.

use serde::{Deserialize, Serialize};

use crate::cg::multiply;
use crate::error::{Error, Result};
use crate::fourier::SpectralFunction;
use crate::group::{LieVec, C64};
use crate::irreps::{drep, CMat};
use crate::spin::Spin;

/// One `d_ξ × d_ξ` matrix per spin up to `band`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    band: Spin,
    mats: Vec<CMat>,
}

impl Field {
    pub fn from_fn(band: Spin, f: impl Fn(Spin) -> CMat) -> Field {
        let mats: Vec<CMat> = band.up_to().map(&f).collect();
        for (j, m) in band.up_to().zip(&mats) {
            assert_eq!(m.shape(), (j.dim(), j.dim()), "field block at spin {j} has the wrong shape");
        }
        Field { band, mats }
    }

    pub fn zeros(band: Spin) -> Field {
        Field::from_fn(band, |j| CMat::zeros(j.dim(), j.dim()))
    }

    pub fn identity(band: Spin) -> Field {
        Field::from_fn(band, |j| CMat::identity(j.dim(), j.dim()))
    }

    /// Scalar field `h(ξ)·I`.
    pub fn multiplier(band: Spin, h: impl Fn(Spin) -> f64) -> Field {
        Field::from_fn(band, |j| CMat::identity(j.dim(), j.dim()) * C64::from(h(j)))
    }

    /// The symbol of a left-invariant vector field, `σ_X(ξ) = dξ(X)`.
    pub fn vector_field(band: Spin, x: &LieVec) -> Field {
        Field::from_fn(band, |j| drep(j, x))
    }

    pub fn band(&self) -> Spin {
        self.band
    }

    pub fn get(&self, j: Spin) -> &CMat {
        &self.mats[j.two_j() as usize]
    }

    pub fn mats(&self) -> &[CMat] {
        &self.mats
    }

    pub fn truncate(&self, band: Spin) -> Field {
        assert!(band <= self.band, "cannot extend a field from {} to {band}", self.band);
        Field { band, mats: self.mats[..band.two_j() as usize + 1].to_vec() }
    }

    fn zip(&self, other: &Field, f: impl Fn(&CMat, &CMat) -> CMat) -> Field {
        let band = self.band.min(other.band);
        Field { band, mats: band.up_to().map(|j| f(self.get(j), other.get(j))).collect() }
    }

    pub fn add(&self, other: &Field) -> Field {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.zip(other, |a, b| a - b)
    }

    /// Pointwise matrix product `P(ξ)Q(ξ)`.
    pub fn mul(&self, other: &Field) -> Field {
        self.zip(other, |a, b| a * b)
    }

    pub fn commutator(&self, other: &Field) -> Field {
        self.zip(other, |a, b| a * b - b * a)
    }

    pub fn scale(&self, c: C64) -> Field {
        Field { band: self.band, mats: self.mats.iter().map(|m| m * c).collect() }
    }

    pub fn map(&self, f: impl Fn(Spin, &CMat) -> CMat) -> Field {
        Field { band: self.band, mats: self.band.up_to().zip(&self.mats).map(|(j, m)| f(j, m)).collect() }
    }

    /// Multiply each block by a scalar weight.
    pub fn weighted(&self, w: impl Fn(Spin) -> f64) -> Field {
        self.map(|j, m| m * C64::from(w(j)))
    }

    pub fn adjoint(&self) -> Field {
        self.map(|_, m| m.adjoint())
    }

    pub fn is_zero(&self) -> bool {
        self.mats.iter().all(|m| m.iter().all(|z| z.norm() == 0.0))
    }

    /// Operator norm of each block.
    pub fn op_norms(&self) -> Vec<(Spin, f64)> {
        self.band.up_to().zip(&self.mats).map(|(j, m)| (j, spectral_norm(m))).collect()
    }

    /// `sup_ξ ‖P(ξ)‖ ⟨ξ⟩^{-m}`.
    pub fn order_norm(&self, m: f64) -> f64 {
        self.op_norms().into_iter().map(|(j, n)| n * crate::irreps::bracket(j).powf(-m)).fold(0.0, f64::max)
    }

    /// Acts on a spectral function: `f̂(ξ) ↦ P(ξ)f̂(ξ)` (the band is the smaller of the two).
    pub fn apply(&self, f: &SpectralFunction) -> SpectralFunction {
        let band = self.band.min(f.band());
        f.with_band(band).left_multiply(|j| self.get(j).clone())
    }

    /// The right-convolution kernel `k` with `k̂ = P`.
    pub fn kernel(&self) -> SpectralFunction {
        SpectralFunction::from_coeffs(self.mats.clone()).expect("blocks have matching shapes")
    }

    /// The difference `D_q P = \widehat{q k}` with `k̂ = P`.
    ///
    /// Only the output spins below `band − band(q)` see every input spin that
    /// feeds them; the result is returned on that band.
    pub fn difference(&self, q: &SpectralFunction) -> Field {
        let out = self.band.saturating_sub(q.band());
        let qk = multiply(q, &self.kernel(), out);
        Field { band: out, mats: qk.coeffs().to_vec() }
    }

    /// Largest block norm over `lo ≤ ξ ≤ hi`.
    pub fn max_norm_between(&self, lo: Spin, hi: Spin) -> f64 {
        self.op_norms().into_iter().filter(|(j, _)| *j >= lo && *j <= hi).map(|(_, n)| n).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(FieldJson::from(self)).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Field> {
        let raw: FieldJson = serde_json::from_value(v.clone())?;
        raw.try_into()
    }
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.nrows() == 1 {
        return m[(0, 0)].norm();
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return f64::NAN;
    }
    // the unguarded SVD can stall on some finite inputs; cap it and fall back to `√λ_max(MᴴM)`
    match m.clone().try_svd(false, false, f64::EPSILON, 10_000) {
        Some(svd) => svd.singular_values.max(),
        None => (m.adjoint() * m).symmetric_eigenvalues().max().max(0.0).sqrt(),
    }
}

#[derive(Serialize, Deserialize)]
struct FieldJson {
    two_band: u32,
    /// `[spin][row][col] = [re, im]`
    blocks: Vec<Vec<Vec<[f64; 2]>>>,
}

impl From<&Field> for FieldJson {
    fn from(f: &Field) -> Self {
        let blocks = f
            .mats
            .iter()
            .map(|m| (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect())
            .collect();
        FieldJson { two_band: f.band.two_j(), blocks }
    }
}

impl TryFrom<FieldJson> for Field {
    type Error = Error;

    fn try_from(raw: FieldJson) -> Result<Field> {
        let band = Spin::from_twice(raw.two_band);
        if raw.blocks.len() != band.two_j() as usize + 1 {
            return Err(Error::BandMismatch(format!("{} blocks for band {band}", raw.blocks.len())));
        }
        let mut mats = Vec::with_capacity(raw.blocks.len());
        for (j, rows) in band.up_to().zip(raw.blocks) {
            let d = j.dim();
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(Error::BandMismatch(format!("block at spin {j} is not {d}×{d}")));
            }
            mats.push(CMat::from_fn(d, d, |r, c| C64::new(rows[r][c][0], rows[r][c][1])));
        }
        Ok(Field { band, mats })
    }
}
