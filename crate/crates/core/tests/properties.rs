//! Property tests for the invariants the rest of the crate leans on.

use std::sync::Arc;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use su2_paradiff::cg::multiply;
use su2_paradiff::fourier::{forward, inverse, multiply_on_grid, SpectralFunction};
use su2_paradiff::lp::{dyadic_blocks, WindowPair};
use su2_paradiff::paradiff::{para_decompose, GapWeights};
use su2_paradiff::quadrature::shared_grid;
use su2_paradiff::runner::RunConfig;
use su2_paradiff::symbol::{Field, FundamentalTuple, Symbol};
use su2_paradiff::{GroupPoint, Spin, C64};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn band() -> impl Strategy<Value = Spin> {
    (0u32..=6).prop_map(Spin::from_twice)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn forward_is_linear_and_inverts_synthesis(b in band(), seed in any::<u64>(), re in -2.0..2.0f64, im in -2.0..2.0f64) {
        let mut r = rng(seed);
        let (f, g) = (SpectralFunction::random(b, &mut r), SpectralFunction::random(b, &mut r));
        let c = C64::new(re, im);
        let grid = shared_grid(b.max(Spin::HALF)).unwrap();
        let combo = inverse(&f, &grid).unwrap().add(&inverse(&g, &grid).unwrap().map(|z| z * c));
        let back = forward(&combo, b).unwrap();
        let want = f.add(&g.scale(c));
        prop_assert!(back.sub(&want).plancherel_norm() <= 1e-11 * (1.0 + want.plancherel_norm()));
    }

    #[test]
    fn plancherel_matches_the_grid_l2_norm(b in band(), seed in any::<u64>()) {
        let f = SpectralFunction::random(b, &mut rng(seed));
        let grid = shared_grid(b.max(Spin::HALF)).unwrap();
        let l2 = inverse(&f, &grid).unwrap().l2_norm();
        assert_abs_diff_eq!(l2, f.plancherel_norm(), epsilon = 1e-11 * (1.0 + l2));
    }

    #[test]
    fn clebsch_gordan_product_matches_the_grid_product(b1 in band(), b2 in band(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (f, g) = (SpectralFunction::random(b1, &mut r), SpectralFunction::random(b2, &mut r));
        let out = b1.add(b2);
        let exact = multiply(&f, &g, out);
        let grid = multiply_on_grid(&f, &g, out).unwrap();
        prop_assert!(exact.sub(&grid).plancherel_norm() <= 1e-11 * (1.0 + grid.plancherel_norm()));
    }

    #[test]
    fn fundamental_tuple_obeys_leibniz(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (z, w) = (GroupPoint::random(&mut r), GroupPoint::random(&mut r));
        prop_assert!(FundamentalTuple::leibniz_residual(&z, &w) < 1e-13);
    }

    #[test]
    fn quantization_adjoint_is_the_l2_adjoint(seed in any::<u64>(), xb in 0u32..=2) {
        let mut r = rng(seed);
        let b = Spin::from_twice(4);
        let coeff = SpectralFunction::random(Spin::from_twice(xb), &mut r);
        let kernel = SpectralFunction::random(b, &mut r);
        let a = Symbol::separated(coeff, Field::from_fn(b, |j| kernel.coeff(j).clone()));
        let out = b.add(Spin::from_twice(xb));
        let f = SpectralFunction::random(b, &mut r);
        let g = SpectralFunction::random(out, &mut r);
        let lhs = a.quantize(&f, out).unwrap().inner(&g);
        let rhs = f.inner(&a.quantize_adjoint(&g, b));
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn dyadic_blocks_sum_back_to_the_function(b in (1u32..=12).prop_map(Spin::from_twice), seed in any::<u64>()) {
        let f = SpectralFunction::random(b, &mut rng(seed));
        let w = WindowPair::default();
        let mut sum = SpectralFunction::zeros(b);
        for blk in dyadic_blocks(&w, &f) {
            sum.add_scaled(&blk.with_band(b), C64::from(1.0));
        }
        prop_assert!(sum.sub(&f).plancherel_norm() <= 1e-10 * f.plancherel_norm());
    }

    #[test]
    fn para_decomposition_reconstructs_the_product(seed in any::<u64>(), gap in 2.0..10.0f64) {
        let mut r = rng(seed);
        let b = Spin::from_twice(6);
        let (a, u) = (SpectralFunction::random(b, &mut r), SpectralFunction::random(b, &mut r));
        let weights = GapWeights::new(&WindowPair::default(), gap, b.add(b));
        let d = para_decompose(&weights, &a, &u).unwrap();
        prop_assert!(d.reconstruction_residual < 1e-10);
    }

    #[test]
    fn config_text_round_trips_through_set(seed in any::<u64>(), two in 1u32..40, delta in 0.01..0.49f64, gap in 1.0..16.0f64) {
        let text = format!("# comment\nbandlimit = {}\ndelta = {delta}\n\ngap={gap}\nseed = {seed}\ns = -1, 0.5\n", two as f64 / 2.0);
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text).unwrap();
        cfg.validate().unwrap();
        prop_assert_eq!(cfg.bandlimit, Spin::from_twice(two));
        prop_assert_eq!(cfg.delta, delta);
        prop_assert_eq!(cfg.gap, gap);
        prop_assert_eq!(cfg.seed, seed);
        prop_assert_eq!(cfg.sobolev_s.clone(), vec![-1.0, 0.5]);
    }
}

#[test]
fn config_rejects_unknown_keys_and_bad_values() {
    let mut cfg = RunConfig::default();
    assert!(cfg.apply_text("colour = blue").is_err());
    assert!(cfg.apply_text("delta = fast").is_err());
    assert!(cfg.apply_text("no equals sign").is_err());
    let mut bad = RunConfig::default();
    bad.apply_text("delta = 0.7").unwrap();
    assert!(bad.validate().is_err());
    let mut bad = RunConfig::default();
    bad.apply_text("gap = 0.5").unwrap();
    assert!(bad.validate().is_err());
}

#[test]
fn shared_grids_are_reused() {
    let b = Spin::from_twice(4);
    assert!(Arc::ptr_eq(&shared_grid(b).unwrap(), &shared_grid(b).unwrap()));
}
