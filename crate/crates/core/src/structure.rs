//! Spectral localization of products and Weyl counting.

use serde::Serialize;

use crate::error::Result;
use crate::fourier::{multiply_on_grid, SpectralFunction};
use crate::irreps::size;
use crate::spin::{coupled_spins, Spin};

/// Degrees that can appear in a product of functions living at `j1` and `j2`.
pub fn product_support(j1: Spin, j2: Spin) -> Vec<Spin> {
    coupled_spins(j1, j2).collect()
}

/// Spins carrying relative Plancherel mass above `tol`.
pub fn spectral_support(f: &SpectralFunction, tol: f64) -> Vec<Spin> {
    let total = f.plancherel_norm().powi(2);
    f.band()
        .up_to()
        .filter(|&j| j.dim() as f64 * f.coeff(j).norm_squared() > tol * total)
        .collect()
}

/// Plancherel mass per spin, `d_j ⟦f̂(j)⟧²`.
pub fn mass_profile(f: &SpectralFunction) -> Vec<(Spin, f64)> {
    f.band().up_to().map(|j| (j, j.dim() as f64 * f.coeff(j).norm_squared())).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalizationReport {
    pub j1: Spin,
    pub j2: Spin,
    /// Relative Plancherel mass of the product inside the triangle range.
    pub inside_mass: f64,
    /// Relative mass outside it.
    pub outside_mass: f64,
    /// Spins actually carrying mass (relative threshold 1e-20).
    pub support: Vec<Spin>,
    /// `max |ξ|` over the support divided by `|ξ1| + |ξ2|`; the constant in the
    /// size-unit statement of localization (1 means the top degree is reached).
    pub size_ratio: f64,
}

/// Multiplies `f` and `g` through the grid and measures where the product lives.
pub fn verify_spec_prd(f: &SpectralFunction, g: &SpectralFunction, j1: Spin, j2: Spin) -> Result<LocalizationReport> {
    let out_band = f.band().add(g.band());
    let prod = multiply_on_grid(f, g, out_band)?;
    let allowed = product_support(j1, j2);
    let mut inside = 0.0;
    let mut outside = 0.0;
    for (j, m) in mass_profile(&prod) {
        if allowed.contains(&j) {
            inside += m;
        } else {
            outside += m;
        }
    }
    let total = (inside + outside).max(f64::MIN_POSITIVE);
    let support = spectral_support(&prod, 1e-20);
    let top = support.iter().map(|&j| size(j)).fold(0.0, f64::max);
    let denom = size(j1) + size(j2);
    Ok(LocalizationReport {
        j1,
        j2,
        inside_mass: inside / total,
        outside_mass: outside / total,
        support,
        size_ratio: if denom > 0.0 { top / denom } else { 1.0 },
    })
}

/// `(Σ_{|ξ|≤t} d_ξ², that count / t³)`.
pub fn weyl_count(t: f64) -> (f64, f64) {
    let mut count = 0.0;
    let mut j = Spin::ZERO;
    while size(j) <= t {
        count += (j.dim() * j.dim()) as f64;
        j = Spin::from_twice(j.two_j() + 1);
    }
    (count, count / t.powi(3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::C64;
    use crate::irreps::CMat;
    use rand::SeedableRng;

    fn random_single(j: Spin, rng: &mut rand_chacha::ChaCha8Rng) -> SpectralFunction {
        let r = SpectralFunction::random(j, rng);
        SpectralFunction::single(j, j, r.coeff(j).clone())
    }

    #[test]
    fn triangle_rule() {
        let s = |x: f64| Spin::new(x).unwrap();
        assert_eq!(product_support(s(0.5), s(0.5)), vec![s(0.0), s(1.0)]);
        assert_eq!(product_support(s(3.0), s(1.0)), vec![s(2.0), s(3.0), s(4.0)]);
        assert_eq!(product_support(s(2.5), Spin::ZERO), vec![s(2.5)]);
    }

    #[test]
    fn localization_of_products() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for (t1, t2) in [(1, 1), (4, 6), (3, 8)] {
            let (j1, j2) = (Spin::from_twice(t1), Spin::from_twice(t2));
            let r = verify_spec_prd(&random_single(j1, &mut rng), &random_single(j2, &mut rng), j1, j2).unwrap();
            assert!(r.outside_mass <= 1e-10, "{r:?}");
            assert_eq!(r.support, product_support(j1, j2));
        }
        let j1 = Spin::from_twice(3);
        let c = SpectralFunction::single(Spin::ZERO, Spin::ZERO, CMat::from_element(1, 1, C64::new(1.0, 0.0)));
        let r = verify_spec_prd(&random_single(j1, &mut rng), &c, j1, Spin::ZERO).unwrap();
        assert_eq!(r.support, vec![j1]);
    }

    #[test]
    fn weyl_closed_form() {
        // below the first nonzero size only the trivial representation counts
        assert_eq!(weyl_count(0.5).0, 1.0);
        for t in [1.0, 3.7, 10.0] {
            let dmax = (0..).take_while(|&k| size(Spin::from_twice(k)) <= t).count() as f64;
            assert_eq!(weyl_count(t).0, dmax * (dmax + 1.0) * (2.0 * dmax + 1.0) / 6.0);
        }
    }
}
