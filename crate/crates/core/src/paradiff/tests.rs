use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::calculus::{compose_sharp_with, symbol_operator};
use super::opnorm::{op_norm, power_norm, LanczosOptions};
use super::paraproduct::{para_operator, paraproduct_lattice};
use super::*;
use crate::fourier::SpectralFunction;
use crate::group::{LieVec, C64};
use crate::irreps::{bracket, CMat};
use crate::structure::spectral_support;
use crate::symbol::{symbol_of_operator, taylor_operators, Field, FundamentalTuple};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sp(two: u32) -> Spin {
    Spin::from_twice(two)
}

fn random_field(band: Spin, rng: &mut ChaCha8Rng) -> Field {
    let f = SpectralFunction::random(band, rng);
    Field::from_fn(band, |j| f.coeff(j).clone() * C64::from(j.dim() as f64))
}

#[test]
fn cutoff_plateau_support_and_bounds() {
    let chi = admissible_cutoff(1.0 / 16.0, 8.0, sp(16)).unwrap();
    for xi in sp(16).up_to() {
        let lam = crate::irreps::size(xi);
        assert_eq!(chi.value(0.0, lam), 1.0);
        assert_eq!(chi.value(chi.delta * bracket(xi) * 1.01, lam), 0.0);
    }
    assert!(chi.mu_constant <= chi.mu_bound && chi.lambda_constant <= chi.lambda_bound);
    assert!(admissible_cutoff(0.5, 8.0, sp(4)).is_err());
    assert!(admissible_cutoff(0.1, 0.5, sp(4)).is_err());
}

#[test]
fn regularized_symbols_satisfy_the_spectral_condition() {
    let mut r = rng(1);
    let band = sp(12);
    let a = Symbol::separated(SpectralFunction::random(sp(4), &mut r), random_field(band, &mut r))
        .add(&Symbol::separated(SpectralFunction::random(sp(2), &mut r), random_field(band, &mut r)));
    let raw = spectral_condition_check(&a, 0.25);
    assert!(!raw.pass && !raw.offending.is_empty());
    let chi = admissible_cutoff(0.25, 8.0, band).unwrap();
    let reg = regularize(&a, &chi);
    let rep = spectral_condition_check(&reg, 0.25);
    assert!(rep.pass && rep.offending_mass == 0.0, "{:?}", rep.offending);
    // closure: one difference widens the parameter by the measured factor, a derivative not at all
    let tuple = FundamentalTuple::new();
    let factor = difference_parameter_factor(band);
    for q in tuple.components() {
        assert!(spectral_condition_check(&reg.difference(q), 0.25 * factor).pass);
    }
    assert!(spectral_condition_check(&reg.lie_derivative(&LieVec::basis(1)), 0.25).pass);
    // multipliers pass for any δ
    assert!(spectral_condition_check(&Symbol::multiplier(band, |j| bracket(j)), 1e-3).pass);
}

#[test]
fn planted_frequency_is_reported() {
    let band = sp(6);
    let mut c = SpectralFunction::zeros(sp(4));
    c.coeff_mut(sp(4))[(0, 0)] = C64::from(1.0);
    let a = Symbol::separated(c, Field::identity(band));
    let rep = spectral_condition_check(&a, 0.125);
    assert!(!rep.pass);
    assert!(rep.offending.iter().all(|o| o.0 == 2.0));
    assert_eq!(rep.offending.len(), band.up_to().count());
}

#[test]
fn lanczos_matches_dense_singular_values() {
    let mut r = rng(2);
    let band = sp(5);
    let a = Symbol::separated(SpectralFunction::random(Spin::ONE, &mut r), random_field(band, &mut r));
    let op = symbol_operator(a, band);
    assert!(op.adjoint_consistency(5, 4) < 1e-12);
    for (s_in, s_out) in [(0.0, 0.0), (1.0, 0.0), (-1.0, 1.0)] {
        let dense = OperatorMatrix::build(&op, s_in, s_out).unwrap().op_norm();
        let lz = op_norm(&op, s_in, s_out, None, LanczosOptions::default());
        assert!(lz.converged && (lz.norm - dense).abs() <= 1e-6 * dense, "{} vs {dense}", lz.norm);
        let pw = power_norm(&op, s_in, s_out, 200, 3);
        assert!(pw <= dense * (1.0 + 1e-9) && pw >= 0.9 * dense);
    }
}

#[test]
fn identity_and_multiplier_norms() {
    let band = sp(8);
    let id = LinearOp::identity(band);
    assert!((op_norm(&id, 1.0, 1.0, None, LanczosOptions::default()).norm - 1.0).abs() < 1e-12);
    let m = 1.5;
    let grad = LinearOp::multiplier(band, move |j| crate::irreps::size(j).powf(m));
    let n = OperatorMatrix::build(&grad, 0.5 + m, 0.5).unwrap().op_norm();
    assert!(n <= 1.0 + 1e-12 && n > 0.9);
}

#[test]
fn paraproduct_weights_match_the_lattice_integral() {
    let mut r = rng(3);
    let w = WindowPair::default();
    let a = SpectralFunction::random(Spin::ONE, &mut r);
    let u = SpectralFunction::random(sp(6), &mut r);
    let weights = GapWeights::new(&w, 2.0, sp(6));
    let fast = paraproduct(&weights, &a, &u);
    let slow = paraproduct_lattice(&w, 2.0, &a, &u);
    assert!(fast.sub(&slow).plancherel_norm() <= 1e-12 * slow.plancherel_norm());
    // constant coefficient: mean times the high-frequency part
    let c = SpectralFunction::constant(Spin::ZERO, C64::new(0.7, -0.2));
    let tc = paraproduct(&weights, &c, &u);
    let want = u.map_scalar(|j| 1.0 - w.phi(crate::irreps::size(j))).scale(C64::new(0.7, -0.2));
    assert!(tc.with_band(u.band()).sub(&want).plancherel_norm() < 1e-10 * want.plancherel_norm());
    // single-spin input: output support within j ± band(a)
    let j = sp(5);
    let single = SpectralFunction::entry(j, j, 1, 2);
    let t = paraproduct(&weights, &a, &single);
    for k in spectral_support(&t, 1e-13) {
        assert!(k.two_j() + 2 >= j.two_j() && k.two_j() <= j.two_j() + 2);
    }
    let op = para_operator(&weights, &a, sp(6));
    assert!(op.adjoint_consistency(1, 3) < 1e-12);
}

#[test]
fn decomposition_reconstructs_the_product() {
    let mut r = rng(4);
    let w = WindowPair::default();
    let weights = GapWeights::new(&w, 8.0, sp(6));
    let a = SpectralFunction::random(sp(6), &mut r);
    let u = SpectralFunction::random(sp(6), &mut r);
    let d = para_decompose(&weights, &a, &u).unwrap();
    assert!(d.reconstruction_residual <= 1e-9, "{}", d.reconstruction_residual);
    let c = SpectralFunction::constant(Spin::ZERO, C64::from(2.0));
    let dc = para_decompose(&weights, &c, &u).unwrap();
    assert!(dc.reconstruction_residual <= 1e-9);
}

#[test]
fn bony_identity_on_the_grid() {
    let mut r = rng(5);
    let w = WindowPair::default();
    let u = SpectralFunction::random(sp(4), &mut r).real_part();
    let lin = bony_linearize(&w, &Polynomial::monomial(1), &u).unwrap();
    assert!(lin.identity_residual < 1e-10);
    // F(z) = z gives the partition-of-unity multiplier 1 − φ(|ξ|)
    let x = crate::group::GroupPoint::random(&mut r);
    for xi in sp(4).up_to() {
        let want = 1.0 - w.phi(crate::irreps::size(xi));
        let got = lin.symbol.evaluate(&x, xi);
        assert!((got - CMat::identity(xi.dim(), xi.dim()) * C64::from(want)).norm() < 1e-10);
    }
    for k in [2, 3] {
        let rep = bony_linearize(&w, &Polynomial::monomial(k), &u).unwrap();
        assert!(rep.identity_residual <= 1e-8, "z^{k}: {}", rep.identity_residual);
    }
}

#[test]
fn composition_is_exact_for_vector_fields() {
    let mut r = rng(6);
    let t = taylor_operators(&FundamentalTuple::new(), 2).unwrap();
    let big = sp(7);
    let c = SpectralFunction::random(Spin::HALF, &mut r);
    let a = Symbol::separated(c, Field::vector_field(big, &LieVec::basis(2)));
    let bs = [SpectralFunction::random(Spin::HALF, &mut r), SpectralFunction::random(Spin::HALF, &mut r), SpectralFunction::random(Spin::HALF, &mut r)];
    let b = Symbol::vector_field(big, &bs);
    let small = sp(4);
    let exact = symbol_of_operator(|f| a.quantize_exact(&b.quantize_exact(f).unwrap()).unwrap(), small);
    let sharp = compose_sharp(&a, &b, 1, &t).unwrap().with_xi_band(small);
    let wrong = compose_sharp_with(&a, &b, 1, &t, &t.tuple).unwrap().with_xi_band(small);
    let mut rr = rng(7);
    let mut worst = (0.0f64, 0.0f64);
    for _ in 0..4 {
        let x = crate::group::GroupPoint::random(&mut rr);
        for xi in small.up_to() {
            let e = exact.evaluate(&x, xi);
            worst.0 = worst.0.max((sharp.evaluate(&x, xi) - &e).norm());
            worst.1 = worst.1.max((wrong.evaluate(&x, xi) - &e).norm());
        }
    }
    assert!(worst.0 < 1e-10, "reflected tuple: {}", worst.0);
    assert!(worst.1 > 1e-3, "plain tuple should not reproduce the composition");
}

#[test]
fn adjoint_expansion_is_exact_for_vector_fields() {
    let mut r = rng(8);
    let t = taylor_operators(&FundamentalTuple::new(), 2).unwrap();
    let big = sp(7);
    let c = SpectralFunction::random(Spin::ONE, &mut r);
    let a = Symbol::separated(c, Field::vector_field(big, &LieVec::basis(0)));
    let small = sp(4);
    let exact = symbol_of_operator(|g| a.quantize_adjoint(g, g.band().add(a.x_band())), small);
    let star = adjoint_symbol(&a, 1, &t).unwrap().with_xi_band(small);
    let x = crate::group::GroupPoint::random(&mut r);
    for xi in small.up_to() {
        assert!((star.evaluate(&x, xi) - exact.evaluate(&x, xi)).norm() < 1e-10);
    }
    // real multipliers are self-adjoint with no corrections
    let m = Symbol::multiplier(big, |j| bracket(j));
    let ms = adjoint_symbol(&m, 1, &t).unwrap();
    let x = crate::group::GroupPoint::random(&mut r);
    for xi in small.up_to() {
        assert!((ms.evaluate(&x, xi) - m.evaluate(&x, xi)).norm() < 1e-12);
    }
}
