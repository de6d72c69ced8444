//! Haar-measure quadrature on SU(2) in the Euler chart.
//!
//! Nodes form a tensor product: uniform α on [0,2π), uniform γ on [0,4π) and
//! Gauss–Legendre in `x = cos β` (the `sin β dβ` density is absorbed by the
//! substitution). With `Nα = 4B+2`, `Nγ = 8B+2`, `Nβ = 2B+2` the rule integrates
//! every product of representation entries of total spin ≤ 4B exactly, so a
//! band-`B` grid transforms products of two band-`B` functions without loss.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::group::{EulerAngles, GroupPoint, C64};
use crate::irreps::{little_d_all, RMat};
use crate::spin::Spin;

/// Tolerance of the Schur self-test run at construction.
pub const SCHUR_TOL: f64 = 1e-10;

#[derive(Debug)]
pub struct QuadratureGrid {
    band: Spin,
    alphas: Vec<f64>,
    betas: Vec<f64>,
    gammas: Vec<f64>,
    beta_weights: Vec<f64>,
    dtables: Vec<Vec<RMat>>,
    schur_residual: f64,
}

impl QuadratureGrid {
    /// Grid exact for Schur integrals up to `band` (and entry products of total spin ≤ 4·band).
    pub fn new(band: Spin) -> Result<QuadratureGrid> {
        if band.two_j() == 0 {
            return Err(Error::Config("haar grid needs band ≥ 1/2".into()));
        }
        let b = band.value();
        let na = (4.0 * b) as usize + 2;
        let ng = (8.0 * b) as usize + 2;
        let nb = (2.0 * b) as usize + 2;
        let gl = GaussLegendre::new(nb).map_err(|e| Error::Config(format!("Gauss–Legendre rule: {e}")))?;
        let mut pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
        pairs.sort_by(|p, q| q.0.partial_cmp(&p.0).unwrap());
        let betas: Vec<f64> = pairs.iter().map(|p| p.0.clamp(-1.0, 1.0).acos()).collect();
        let beta_weights: Vec<f64> = pairs.iter().map(|p| p.1 / 2.0).collect();
        let alphas = (0..na).map(|k| 2.0 * PI * k as f64 / na as f64).collect();
        let gammas = (0..ng).map(|k| 4.0 * PI * k as f64 / ng as f64).collect();
        let dtables = betas.iter().map(|&be| little_d_all(band, be)).collect();
        let mut grid = QuadratureGrid { band, alphas, betas, gammas, beta_weights, dtables, schur_residual: f64::NAN };
        let (res, detail) = grid.schur_self_test();
        grid.schur_residual = res;
        if !(res <= SCHUR_TOL) {
            return Err(Error::QuadratureSelfTest { residual: res, detail });
        }
        Ok(grid)
    }

    pub fn band(&self) -> Spin {
        self.band
    }

    pub fn len(&self) -> usize {
        self.alphas.len() * self.betas.len() * self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.betas.len(), self.alphas.len(), self.gammas.len())
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// Little-d tables `d^j(β_b)` for `j ≤ band`.
    pub fn dtable(&self, ib: usize) -> &[RMat] {
        &self.dtables[ib]
    }

    /// Residual of the Schur self-test (an upper bound over all entry pairs up to the band).
    pub fn schur_residual(&self) -> f64 {
        self.schur_residual
    }

    /// Flat node index; layout is β-major, then α, then γ.
    pub fn index(&self, ib: usize, ia: usize, ig: usize) -> usize {
        (ib * self.alphas.len() + ia) * self.gammas.len() + ig
    }

    pub fn euler(&self, idx: usize) -> EulerAngles {
        let ng = self.gammas.len();
        let na = self.alphas.len();
        let ig = idx % ng;
        let ia = (idx / ng) % na;
        let ib = idx / (ng * na);
        EulerAngles::new(self.alphas[ia], self.betas[ib], self.gammas[ig])
    }

    pub fn node(&self, idx: usize) -> GroupPoint {
        GroupPoint::from_euler(self.euler(idx))
    }

    pub fn nodes(&self) -> Vec<GroupPoint> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    pub fn weight(&self, idx: usize) -> f64 {
        let per = self.alphas.len() * self.gammas.len();
        self.beta_weights[idx / per] / per as f64
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    /// Quadrature of sampled values.
    pub fn integrate(&self, values: &[C64]) -> C64 {
        let per = self.alphas.len() * self.gammas.len();
        values
            .chunks(per)
            .zip(&self.beta_weights)
            .map(|(chunk, w)| chunk.iter().sum::<C64>() * (*w / per as f64))
            .sum()
    }

    /// Self-test against Schur orthogonality, exploiting the tensor structure:
    /// the integral of `D^{j1}_{m1n1} conj(D^{j2}_{m2n2})` factors into an α-sum,
    /// a γ-sum and a β-sum, each bounded by one in modulus, so the worst error
    /// over all entry pairs is bounded by the worst error of each factor.
    fn schur_self_test(&self) -> (f64, String) {
        let two_b = self.band.two_j() as i32;
        let mut worst = 0.0f64;
        let mut detail = String::from("none");
        // α factor: (1/Nα) Σ e^{-ikα} = δ_{k0} for integer |k| ≤ 2B
        let na = self.alphas.len() as f64;
        for k in 1..=two_b {
            let s: C64 = self.alphas.iter().map(|&a| C64::from_polar(1.0, -(k as f64) * a)).sum::<C64>() / na;
            if s.norm() > worst {
                worst = s.norm();
                detail = format!("alpha frequency {k}");
            }
        }
        // γ factor: frequencies k/2 for k = 1..4B (half-integer differences allowed)
        let ng = self.gammas.len() as f64;
        for k in 1..=2 * two_b {
            let s: C64 = self.gammas.iter().map(|&g| C64::from_polar(1.0, -(k as f64) * 0.5 * g)).sum::<C64>() / ng;
            if s.norm() > worst {
                worst = s.norm();
                detail = format!("gamma frequency {}/2", k);
            }
        }
        // β factor with matched (m, n): Σ w d^{j1}_{mn} d^{j2}_{mn} = δ_{j1j2}/(2j1+1)
        for tj1 in 0..=two_b as u32 {
            for tj2 in (tj1 % 2..=tj1).step_by(2) {
                let (j1, j2) = (Spin::from_twice(tj1), Spin::from_twice(tj2));
                for r2 in 0..j2.dim() {
                    for c2 in 0..j2.dim() {
                        let r1 = j1.index_of(j2.two_m(r2)).unwrap();
                        let c1 = j1.index_of(j2.two_m(c2)).unwrap();
                        let mut s = 0.0;
                        for (ib, w) in self.beta_weights.iter().enumerate() {
                            s += w * self.dtables[ib][tj1 as usize][(r1, c1)] * self.dtables[ib][tj2 as usize][(r2, c2)];
                        }
                        let expect = if tj1 == tj2 { 1.0 / j1.dim() as f64 } else { 0.0 };
                        let err = (s - expect).abs();
                        if err > worst {
                            worst = err;
                            detail = format!("beta integral j1={j1} j2={j2}");
                        }
                    }
                }
            }
        }
        (worst, detail)
    }
}

/// Convenience wrapper matching the library's naming.
pub fn haar_grid(band: Spin) -> Result<QuadratureGrid> {
    QuadratureGrid::new(band)
}

/// Process-wide grid for `band`, built once and shared.
pub fn shared_grid(band: Spin) -> Result<Arc<QuadratureGrid>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<QuadratureGrid>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(g) = cache.lock().unwrap().get(&band.two_j()) {
        return Ok(g.clone());
    }
    let g = Arc::new(QuadratureGrid::new(band)?);
    Ok(cache.lock().unwrap().entry(band.two_j()).or_insert(g).clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irreps::wigner_D;

    #[test]
    fn weights_sum_to_one() {
        let g = haar_grid(Spin::HALF).unwrap();
        let total: f64 = g.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn brute_force_schur_samples() {
        let g = haar_grid(Spin::new(2.0).unwrap()).unwrap();
        let nodes = g.nodes();
        let w = g.weights();
        let one = Spin::ONE;
        let mut s00 = C64::new(0.0, 0.0);
        let mut half = C64::new(0.0, 0.0);
        for (x, wt) in nodes.iter().zip(&w) {
            let d1 = wigner_D(one, x);
            s00 += d1[(1, 1)] * d1[(1, 1)].conj() * *wt;
            half += wigner_D(Spin::HALF, x)[(0, 0)] * *wt;
        }
        assert!((s00 - C64::from(1.0 / 3.0)).norm() < 1e-13);
        assert!(half.norm() < 1e-13);
    }
}
