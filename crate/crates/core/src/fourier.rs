//! The non-commutative Fourier transform on SU(2).
//!
//! `f̂(ξ) = ∫ f(x) ξ(x)* dx` and `f(x) = Σ_ξ d_ξ Tr(f̂(ξ) ξ(x))`.
//! Functions are stored spectrally; grids are only a computational device.
//!
//! The transforms are separable on the tensor grid: half-integer-frequency
//! sums over α and γ followed by a contraction with the little-d tables in β.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{sample_standard_normal, GroupPoint, LieVec, C64};
use crate::irreps::{bracket, drep, wigner_d_all, CMat};
use crate::quadrature::{shared_grid, QuadratureGrid};
use crate::spin::Spin;

/// Samples of a function at the nodes of a quadrature grid.
#[derive(Clone, Debug)]
pub struct GridFunction {
    pub grid: Arc<QuadratureGrid>,
    pub values: Vec<C64>,
}

impl GridFunction {
    pub fn new(grid: Arc<QuadratureGrid>, values: Vec<C64>) -> Result<GridFunction> {
        if values.len() != grid.len() {
            return Err(Error::BandMismatch(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: Arc<QuadratureGrid>, f: impl Fn(&GroupPoint) -> C64 + Sync) -> GridFunction {
        let values = (0..grid.len()).into_par_iter().map(|i| f(&grid.node(i))).collect();
        GridFunction { grid, values }
    }

    pub fn constant(grid: Arc<QuadratureGrid>, c: C64) -> GridFunction {
        let n = grid.len();
        GridFunction { grid, values: vec![c; n] }
    }

    pub fn mul(&self, other: &GridFunction) -> GridFunction {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        GridFunction { grid: self.grid.clone(), values }
    }

    pub fn add(&self, other: &GridFunction) -> GridFunction {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        GridFunction { grid: self.grid.clone(), values }
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        GridFunction { grid: self.grid.clone(), values }
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> GridFunction {
        GridFunction { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn integral(&self) -> C64 {
        self.grid.integrate(&self.values)
    }

    /// Quadrature L² norm.
    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<C64> = self.values.iter().map(|v| C64::from(v.norm_sqr())).collect();
        self.grid.integrate(&sq).re.max(0.0).sqrt()
    }

    /// Grid estimate of the sup norm.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Grid estimate of the L¹ norm.
    pub fn l1_norm(&self) -> f64 {
        let abs: Vec<C64> = self.values.iter().map(|v| C64::from(v.norm())).collect();
        self.grid.integrate(&abs).re
    }
}

/// Band-limited function: one coefficient matrix `f̂(j)` per spin `j ≤ band`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFunction {
    band: Spin,
    coeffs: Vec<CMat>,
}

impl SpectralFunction {
    pub fn zeros(band: Spin) -> SpectralFunction {
        let coeffs = band.up_to().map(|j| CMat::zeros(j.dim(), j.dim())).collect();
        SpectralFunction { band, coeffs }
    }

    pub fn from_coeffs(coeffs: Vec<CMat>) -> Result<SpectralFunction> {
        if coeffs.is_empty() {
            return Err(Error::BandMismatch("no coefficients".into()));
        }
        for (k, c) in coeffs.iter().enumerate() {
            if c.nrows() != k + 1 || c.ncols() != k + 1 {
                return Err(Error::BandMismatch(format!("coefficient {k} has shape {}×{}", c.nrows(), c.ncols())));
            }
        }
        Ok(SpectralFunction { band: Spin::from_twice(coeffs.len() as u32 - 1), coeffs })
    }

    pub fn constant(band: Spin, c: C64) -> SpectralFunction {
        let mut f = SpectralFunction::zeros(band);
        f.coeffs[0][(0, 0)] = c;
        f
    }

    /// The entry function `x ↦ D^j_{mn}(x)` (matrix indices `r`, `c`).
    pub fn entry(band: Spin, j: Spin, r: usize, c: usize) -> SpectralFunction {
        let mut f = SpectralFunction::zeros(band.max(j));
        f.coeffs[j.two_j() as usize][(c, r)] = C64::from(1.0 / j.dim() as f64);
        f
    }

    /// Function whose only coefficient sits at spin `j`.
    pub fn single(band: Spin, j: Spin, coeff: CMat) -> SpectralFunction {
        let mut f = SpectralFunction::zeros(band.max(j));
        f.coeffs[j.two_j() as usize] = coeff;
        f
    }

    /// Gaussian random coefficients with the given spin profile `amp(j)`.
    pub fn random_with<R: Rng + ?Sized>(band: Spin, rng: &mut R, amp: impl Fn(Spin) -> f64) -> SpectralFunction {
        let coeffs = band
            .up_to()
            .map(|j| {
                let a = amp(j);
                CMat::from_fn(j.dim(), j.dim(), |_, _| C64::new(sample_standard_normal(rng), sample_standard_normal(rng)) * a)
            })
            .collect();
        SpectralFunction { band, coeffs }
    }

    pub fn random<R: Rng + ?Sized>(band: Spin, rng: &mut R) -> SpectralFunction {
        Self::random_with(band, rng, |_| 1.0)
    }

    pub fn band(&self) -> Spin {
        self.band
    }

    pub fn coeff(&self, j: Spin) -> &CMat {
        &self.coeffs[j.two_j() as usize]
    }

    pub fn coeff_mut(&mut self, j: Spin) -> &mut CMat {
        &mut self.coeffs[j.two_j() as usize]
    }

    pub fn coeffs(&self) -> &[CMat] {
        &self.coeffs
    }

    /// Coefficient at `j`, or `None` above the band.
    pub fn get(&self, j: Spin) -> Option<&CMat> {
        self.coeffs.get(j.two_j() as usize)
    }

    /// `Σ_ξ d_ξ ⟨ξ⟩^{2s} ⟦f̂(ξ)⟧²` with the Hilbert–Schmidt norm.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.band
            .up_to()
            .map(|j| j.dim() as f64 * bracket(j).powf(2.0 * s) * self.coeff(j).norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    pub fn plancherel_norm(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    /// `L²` inner product `∫ f conj(g) = Σ d_ξ Tr(f̂ ĝ*)`.
    pub fn inner(&self, other: &SpectralFunction) -> C64 {
        let top = self.band.min(other.band);
        top.up_to()
            .map(|j| {
                let (a, b) = (self.coeff(j), other.coeff(j));
                let s: C64 = a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum();
                s * j.dim() as f64
            })
            .sum()
    }

    /// Re-band: pad with zeros or drop coefficients above `band`.
    pub fn with_band(&self, band: Spin) -> SpectralFunction {
        let mut out = SpectralFunction::zeros(band);
        for j in band.min(self.band).up_to() {
            out.coeffs[j.two_j() as usize] = self.coeff(j).clone();
        }
        out
    }

    /// Plancherel mass above `band` relative to the total.
    pub fn relative_mass_above(&self, band: Spin) -> f64 {
        let total = self.plancherel_norm().powi(2);
        if total == 0.0 || band >= self.band {
            return 0.0;
        }
        let tail: f64 = self
            .band
            .up_to()
            .filter(|&j| j > band)
            .map(|j| j.dim() as f64 * self.coeff(j).norm_squared())
            .sum();
        tail / total
    }

    /// Truncate to `band`, failing if relative mass above 1e-12 would be lost.
    pub fn checked_truncate(&self, band: Spin) -> Result<SpectralFunction> {
        let lost = self.relative_mass_above(band);
        if lost > 1e-12 {
            return Err(Error::SilentTruncation { lost });
        }
        Ok(self.with_band(band))
    }

    /// Smallest spin above which all coefficients vanish (up to `tol` in HS norm).
    pub fn effective_band(&self, tol: f64) -> Spin {
        self.band.up_to().rev().find(|&j| self.coeff(j).norm() > tol).unwrap_or(Spin::ZERO)
    }

    fn zip_with(&self, other: &SpectralFunction, f: impl Fn(&CMat, &CMat) -> CMat) -> SpectralFunction {
        let band = self.band.max(other.band);
        let (a, b) = (self.with_band(band), other.with_band(band));
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| f(x, y)).collect();
        SpectralFunction { band, coeffs }
    }

    pub fn add(&self, other: &SpectralFunction) -> SpectralFunction {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &SpectralFunction) -> SpectralFunction {
        self.zip_with(other, |x, y| x - y)
    }

    pub fn scale(&self, c: C64) -> SpectralFunction {
        SpectralFunction { band: self.band, coeffs: self.coeffs.iter().map(|m| m * c).collect() }
    }

    pub fn add_scaled(&mut self, other: &SpectralFunction, c: C64) {
        if other.band > self.band {
            *self = self.with_band(other.band);
        }
        for (k, m) in other.coeffs.iter().enumerate() {
            self.coeffs[k] += m * c;
        }
    }

    /// Apply `f̂(ξ) ↦ h(ξ)·f̂(ξ)` with a scalar weight per spin.
    pub fn map_scalar(&self, h: impl Fn(Spin) -> f64) -> SpectralFunction {
        let coeffs = self.band.up_to().map(|j| self.coeff(j) * C64::from(h(j))).collect();
        SpectralFunction { band: self.band, coeffs }
    }

    /// Apply `f̂(ξ) ↦ P(ξ)·f̂(ξ)`.
    pub fn left_multiply(&self, p: impl Fn(Spin) -> CMat) -> SpectralFunction {
        let coeffs = self.band.up_to().map(|j| p(j) * self.coeff(j)).collect();
        SpectralFunction { band: self.band, coeffs }
    }

    /// Left-invariant derivative: `\widehat{Xf}(ξ) = dξ(X)·f̂(ξ)`.
    pub fn lie_derivative(&self, x: &LieVec) -> SpectralFunction {
        self.left_multiply(|j| drep(j, x))
    }

    /// Expansion coefficients in the entry basis: `f = Σ E(j)_{mn} D^j_{mn}` with `E(j) = d_j f̂(j)ᵀ`.
    pub fn entry_coeffs(&self, j: Spin) -> CMat {
        self.coeff(j).transpose() * C64::from(j.dim() as f64)
    }

    /// Inverse of [`entry_coeffs`](Self::entry_coeffs).
    pub fn from_entry_coeffs(entries: Vec<CMat>) -> SpectralFunction {
        let coeffs = entries
            .into_iter()
            .enumerate()
            .map(|(k, e)| e.transpose() / C64::from((k + 1) as f64))
            .collect();
        SpectralFunction::from_coeffs(coeffs).expect("entry blocks have matching shapes")
    }

    /// Pointwise complex conjugate, using `conj D^j_{mn} = (−1)^{m−n} D^j_{−m,−n}`.
    pub fn conj(&self) -> SpectralFunction {
        let coeffs = self
            .band
            .up_to()
            .map(|j| {
                let d = j.dim();
                let c = self.coeff(j);
                CMat::from_fn(d, d, |r, s| {
                    let v = c[(d - 1 - r, d - 1 - s)].conj();
                    if (r + s) % 2 == 0 {
                        v
                    } else {
                        -v
                    }
                })
            })
            .collect();
        SpectralFunction { band: self.band, coeffs }
    }

    /// Real part `(f + f̄)/2`.
    pub fn real_part(&self) -> SpectralFunction {
        self.add(&self.conj()).scale(C64::from(0.5))
    }

    /// Point evaluation `Σ d_ξ Tr(f̂(ξ) ξ(x))`.
    pub fn evaluate(&self, x: &GroupPoint) -> C64 {
        let ds = wigner_d_all(self.band, x);
        self.band
            .up_to()
            .map(|j| {
                let (a, d) = (self.coeff(j), &ds[j.two_j() as usize]);
                let tr: C64 = a.iter().zip(d.transpose().iter()).map(|(x, y)| x * y).sum();
                tr * j.dim() as f64
            })
            .sum()
    }

    /// Right convolution in spectral form: `\widehat{f*g} = ĝ·f̂`.
    pub fn convolve(&self, g: &SpectralFunction) -> SpectralFunction {
        let band = self.band.min(g.band);
        let coeffs = band.up_to().map(|j| g.coeff(j) * self.coeff(j)).collect();
        SpectralFunction { band, coeffs }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SpectralJson::from(self)).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<SpectralFunction> {
        let s: SpectralJson = serde_json::from_value(v.clone())?;
        s.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct CoeffJson {
    two_j: u32,
    rows: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct SpectralJson {
    bandlimit_two_j: u32,
    coeffs: Vec<CoeffJson>,
}

impl From<&SpectralFunction> for SpectralJson {
    fn from(f: &SpectralFunction) -> Self {
        let coeffs = f
            .band
            .up_to()
            .map(|j| {
                let c = f.coeff(j);
                let rows = (0..j.dim()).map(|r| (0..j.dim()).map(|s| [c[(r, s)].re, c[(r, s)].im]).collect()).collect();
                CoeffJson { two_j: j.two_j(), rows }
            })
            .collect();
        SpectralJson { bandlimit_two_j: f.band.two_j(), coeffs }
    }
}

impl TryFrom<SpectralJson> for SpectralFunction {
    type Error = Error;
    fn try_from(s: SpectralJson) -> Result<SpectralFunction> {
        let mut f = SpectralFunction::zeros(Spin::from_twice(s.bandlimit_two_j));
        for c in s.coeffs {
            let j = Spin::from_twice(c.two_j);
            if j > f.band || c.rows.len() != j.dim() || c.rows.iter().any(|r| r.len() != j.dim()) {
                return Err(Error::BandMismatch(format!("malformed coefficient block for spin {j}")));
            }
            *f.coeff_mut(j) = CMat::from_fn(j.dim(), j.dim(), |r, k| C64::new(c.rows[r][k][0], c.rows[r][k][1]));
        }
        Ok(f)
    }
}

/// Exponential tables `e^{i·(k/2)·θ}` for `k = −2B..2B`.
fn twiddles(thetas: &[f64], two_b: i32, sign: f64) -> DMatrix<C64> {
    let nk = (2 * two_b + 1) as usize;
    DMatrix::from_fn(nk, thetas.len(), |k, t| C64::from_polar(1.0, sign * 0.5 * (k as i32 - two_b) as f64 * thetas[t]))
}

/// Forward transform: `f̂(j)_{nm} = ∫ f · conj(D^j_{mn})`, for `j ≤ band`.
pub fn forward(f: &GridFunction, band: Spin) -> Result<SpectralFunction> {
    let grid = &f.grid;
    if band > grid.band() {
        return Err(Error::GridTooCoarse { requested: band.to_string(), available: grid.band().to_string() });
    }
    let two_b = band.two_j() as i32;
    let (nb, na, ng) = grid.shape();
    // e^{+imα}, e^{+inγ}
    let ea = twiddles(grid.alphas(), two_b, 1.0);
    let eg = twiddles(grid.gammas(), two_b, 1.0);
    let per = (na * ng) as f64;
    let partial: Vec<Vec<CMat>> = (0..nb)
        .into_par_iter()
        .map(|ib| {
            let slab = DMatrix::from_row_slice(na, ng, &f.values[ib * na * ng..(ib + 1) * na * ng]);
            // F[m][n] = Σ_a Σ_c e^{imα_a} f[a][c] e^{inγ_c}
            let big = &ea * slab * eg.transpose();
            let w = grid_beta_weight(grid, ib) / per;
            let dt = grid.dtable(ib);
            band.up_to()
                .map(|j| {
                    let d = j.dim();
                    let tj = j.two_j() as i32;
                    let off = (two_b - tj) as usize;
                    let dj = &dt[tj as usize];
                    // f̂_{n m} with m = row index r, n = column index c
                    CMat::from_fn(d, d, |c, r| big[(off + 2 * r, off + 2 * c)] * (dj[(r, c)] * w))
                })
                .collect()
        })
        .collect();
    let mut out = SpectralFunction::zeros(band);
    for p in partial {
        for (k, m) in p.into_iter().enumerate() {
            out.coeffs[k] += m;
        }
    }
    Ok(out)
}

fn grid_beta_weight(grid: &QuadratureGrid, ib: usize) -> f64 {
    let (_, na, ng) = grid.shape();
    grid.weight(grid.index(ib, 0, 0)) * (na * ng) as f64
}

/// Inverse transform: pointwise evaluation of `Σ d_j Tr(a(j) D^j(x))` on the grid.
pub fn inverse(a: &SpectralFunction, grid: &Arc<QuadratureGrid>) -> Result<GridFunction> {
    if a.band > grid.band() {
        return Err(Error::GridTooCoarse { requested: a.band.to_string(), available: grid.band().to_string() });
    }
    let band = a.band;
    let two_b = band.two_j() as i32;
    let (nb, na, ng) = grid.shape();
    let ea = twiddles(grid.alphas(), two_b, -1.0);
    let eg = twiddles(grid.gammas(), two_b, -1.0);
    let nk = (2 * two_b + 1) as usize;
    let slabs: Vec<Vec<C64>> = (0..nb)
        .into_par_iter()
        .map(|ib| {
            let dt = grid.dtable(ib);
            let mut h = DMatrix::<C64>::zeros(nk, nk);
            for j in band.up_to() {
                let tj = j.two_j() as i32;
                let off = (two_b - tj) as usize;
                let dj = &dt[tj as usize];
                let c = a.coeff(j);
                let dim = j.dim() as f64;
                for r in 0..j.dim() {
                    for s in 0..j.dim() {
                        h[(off + 2 * r, off + 2 * s)] += c[(s, r)] * (dim * dj[(r, s)]);
                    }
                }
            }
            // f[a][c] = Σ_{m,n} e^{-imα_a} H[m][n] e^{-inγ_c}
            let vals = ea.transpose() * h * &eg;
            let mut flat = Vec::with_capacity(na * ng);
            for ia in 0..na {
                for ig in 0..ng {
                    flat.push(vals[(ia, ig)]);
                }
            }
            flat
        })
        .collect();
    let values = slabs.concat();
    Ok(GridFunction { grid: grid.clone(), values })
}

/// Grid-level right convolution `(f*g)(x) = ∫ f(y) g(y⁻¹x) dy`.
pub fn convolve(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    let band = f.grid.band();
    let fh = forward(f, band)?;
    let gh = forward(g, band)?;
    inverse(&fh.convolve(&gh), &f.grid)
}

/// Pointwise product through the grid (inverse, multiply, forward) on a grid
/// large enough to be exact; the reference for the coupling-coefficient product.
pub fn multiply_on_grid(a: &SpectralFunction, b: &SpectralFunction, out_band: Spin) -> Result<SpectralFunction> {
    let need = a.band.max(b.band).max(out_band);
    let total = a.band.two_j() + b.band.two_j() + out_band.two_j();
    let gb = need.max(Spin::from_twice(total.div_ceil(4))).max(Spin::HALF);
    let grid = shared_grid(gb)?;
    forward(&inverse(a, &grid)?.mul(&inverse(b, &grid)?), out_band)
}

/// Grid-level `L²` inner product.
pub fn grid_inner(f: &GridFunction, g: &GridFunction) -> C64 {
    let prod: Vec<C64> = f.values.iter().zip(&g.values).map(|(a, b)| a * b.conj()).collect();
    f.grid.integrate(&prod)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irreps::wigner_D;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(b: f64) -> Arc<QuadratureGrid> {
        Arc::new(QuadratureGrid::new(Spin::new(b).unwrap()).unwrap())
    }

    #[test]
    fn forward_of_entry_function() {
        let g = grid(3.0);
        let j = Spin::new(1.5).unwrap();
        let f = GridFunction::from_fn(g.clone(), |x| wigner_D(j, x)[(1, 3)]);
        let fh = forward(&f, Spin::new(3.0).unwrap()).unwrap();
        for k in fh.band().up_to() {
            for r in 0..k.dim() {
                for c in 0..k.dim() {
                    let expect = if k == j && r == 3 && c == 1 { 0.25 } else { 0.0 };
                    assert!((fh.coeff(k)[(r, c)] - C64::from(expect)).norm() < 1e-12);
                }
            }
        }
        assert_eq!(fh, fh.clone());
        let e = SpectralFunction::entry(Spin::new(3.0).unwrap(), j, 1, 3);
        assert!(e.sub(&fh).plancherel_norm() < 1e-12);
    }

    #[test]
    fn round_trip_and_plancherel() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = grid(4.0);
        let a = SpectralFunction::random(Spin::new(4.0).unwrap(), &mut rng);
        let f = inverse(&a, &g).unwrap();
        let back = forward(&f, Spin::new(4.0).unwrap()).unwrap();
        assert!(back.sub(&a).plancherel_norm() < 1e-10 * a.plancherel_norm());
        assert!((f.l2_norm() - a.plancherel_norm()).abs() < 1e-10 * a.plancherel_norm());
        // pointwise evaluation agrees with the fast inverse
        for idx in [0, 17, 1234] {
            assert!((a.evaluate(&g.node(idx)) - f.values[idx]).norm() < 1e-10);
        }
    }

    #[test]
    fn conjugation_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = grid(2.0);
        let a = SpectralFunction::random(Spin::new(2.0).unwrap(), &mut rng);
        let f = inverse(&a, &g).unwrap().map(|v| v.conj());
        let direct = forward(&f, Spin::new(2.0).unwrap()).unwrap();
        assert!(direct.sub(&a.conj()).plancherel_norm() < 1e-11);
    }

    #[test]
    fn convolution_double_integral_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = Spin::new(2.0).unwrap();
        let g = grid(2.0);
        let fh = SpectralFunction::random(b, &mut rng);
        let gh = SpectralFunction::random(b, &mut rng);
        let fgrid = inverse(&fh, &g).unwrap();
        // (f*g)(x) = ∫ f(y) g(y⁻¹x) dy by direct quadrature at a few x
        let conv = fh.convolve(&gh);
        for idx in [3usize, 500, 1001] {
            let x = g.node(idx);
            let vals: Vec<C64> = (0..g.len()).map(|i| fgrid.values[i] * gh.evaluate(&g.node(i).inverse().mul(&x))).collect();
            let direct = g.integrate(&vals);
            assert!((direct - conv.evaluate(&x)).norm() < 1e-10);
        }
        // non-commutativity witness with spin 1/2 and spin 1 entries mixed
        let p = SpectralFunction::entry(b, Spin::HALF, 0, 1).add(&SpectralFunction::entry(b, Spin::ONE, 0, 2));
        let q = SpectralFunction::entry(b, Spin::HALF, 1, 1).add(&SpectralFunction::entry(b, Spin::ONE, 2, 0));
        let q2 = SpectralFunction::entry(b, Spin::HALF, 1, 0).add(&q);
        assert!(p.convolve(&q2).sub(&q2.convolve(&p)).plancherel_norm() > 1e-3);
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a = SpectralFunction::random(Spin::new(1.5).unwrap(), &mut rng);
        let text = serde_json::to_string(&a.to_json()).unwrap();
        let back = SpectralFunction::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert!(back.sub(&a).plancherel_norm() <= 1e-15 * a.plancherel_norm());
    }
}
