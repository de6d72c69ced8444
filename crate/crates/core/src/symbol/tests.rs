use super::*;
use crate::irreps::{entry_derivative, laplace_eigenvalue, wigner_D};
use crate::lp::{multiplier_apply, WindowPair};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_field(band: Spin, r: &mut ChaCha8Rng) -> Field {
    let f = SpectralFunction::random(band, r);
    Field::from_fn(band, |j| f.coeff(j).clone())
}

fn random_symbol(xi_band: Spin, x_band: Spin, terms: usize, r: &mut ChaCha8Rng) -> Symbol {
    let ts = (0..terms).map(|_| Term { coeff: SpectralFunction::random(x_band, r), field: random_field(xi_band, r) }).collect();
    Symbol::new(xi_band, ts).unwrap()
}

/// `Σ_ξ d_ξ Tr(a(x,ξ) f̂(ξ) ξ(x))` straight from the definition.
fn direct_quantize(a: &Symbol, f: &SpectralFunction, x: &GroupPoint) -> C64 {
    f.band()
        .up_to()
        .map(|xi| (a.evaluate(x, xi) * f.coeff(xi) * wigner_D(xi, x)).trace() * xi.dim() as f64)
        .sum()
}

#[test]
fn identity_and_multiplier_symbols() {
    let mut r = rng(1);
    let b = Spin::from_twice(6);
    let f = SpectralFunction::random(b, &mut r);
    let id = Symbol::identity(b);
    assert!(id.quantize(&f, b).unwrap().sub(&f).plancherel_norm() < 1e-14);
    let w = WindowPair::default();
    let h = |l: f64| w.phi(l / 2.0);
    let sym = Symbol::multiplier(b, |j| h(crate::irreps::size(j)));
    let want = multiplier_apply(h, 1.0, &f);
    assert!(sym.quantize(&f, b).unwrap().sub(&want).plancherel_norm() < 1e-14);
}

#[test]
fn vector_field_symbol_is_the_lie_derivative() {
    let mut r = rng(2);
    let b = Spin::from_twice(5);
    let x = LieVec([0.2, -1.1, 0.6]);
    let sym = Symbol::from_field(Field::vector_field(b, &x));
    let j = Spin::from_twice(3);
    let g = GroupPoint::random(&mut r);
    let want = entry_derivative(j, &x, &g);
    for (rr, cc) in [(0, 0), (1, 3), (2, 1)] {
        let f = SpectralFunction::entry(b, j, rr, cc);
        let got = sym.quantize(&f, b).unwrap().evaluate(&g);
        assert!((got - want[(rr, cc)]).norm() < 1e-10);
    }
}

#[test]
fn x_dependent_quantization_matches_the_trace_sum() {
    let mut r = rng(3);
    let a = random_symbol(Spin::from_twice(4), Spin::ONE, 3, &mut r);
    let f = SpectralFunction::random(Spin::from_twice(4), &mut r);
    let g = a.quantize_exact(&f).unwrap();
    assert_eq!(g.band(), Spin::from_twice(6));
    for _ in 0..4 {
        let x = GroupPoint::random(&mut r);
        let want = direct_quantize(&a, &f, &x);
        assert!((g.evaluate(&x) - want).norm() < 1e-10 * (1.0 + want.norm()));
    }
    let grid = shared_grid(Spin::from_twice(6)).unwrap();
    let on_grid = a.quantize_on_grid(&f, &grid).unwrap();
    let back = inverse(&g, &grid).unwrap();
    assert!(on_grid.sub(&back).sup_norm() < 1e-10);
}

#[test]
fn silent_truncation_is_refused() {
    let mut r = rng(4);
    let a = random_symbol(Spin::from_twice(4), Spin::ONE, 2, &mut r);
    let f = SpectralFunction::random(Spin::from_twice(4), &mut r);
    assert!(matches!(a.quantize(&f, Spin::from_twice(4)), Err(Error::SilentTruncation { .. })));
    let t = a.quantize_truncated(&f, Spin::from_twice(4)).unwrap();
    let full = a.quantize_exact(&f).unwrap();
    assert!(t.sub(&full.with_band(Spin::from_twice(4))).plancherel_norm() < 1e-14);
}

#[test]
fn adjoint_quantization_is_the_hilbert_adjoint() {
    let mut r = rng(5);
    let b = Spin::from_twice(4);
    let a = random_symbol(b, Spin::ONE, 2, &mut r);
    let u = SpectralFunction::random(b, &mut r);
    let v = SpectralFunction::random(Spin::from_twice(6), &mut r);
    let lhs = a.quantize_exact(&u).unwrap().inner(&v);
    let rhs = u.inner(&a.quantize_adjoint(&v, b));
    assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
}

#[test]
fn operator_symbol_round_trip() {
    let mut r = rng(6);
    let b = Spin::from_twice(3);
    let a = random_symbol(b, Spin::HALF, 2, &mut r);
    let sym = symbol_of_operator(|f| a.quantize_exact(f).unwrap(), b);
    for _ in 0..3 {
        let x = GroupPoint::random(&mut r);
        for xi in b.up_to() {
            assert!((sym.evaluate(&x, xi) - a.evaluate(&x, xi)).norm() < 1e-10);
        }
    }
    let f = SpectralFunction::random(b, &mut r);
    let diff = sym.quantize_exact(&f).unwrap().sub(&a.quantize_exact(&f).unwrap().with_band(sym.x_band().add(b)));
    assert!(diff.plancherel_norm() < 1e-9);
    let lap = symbol_of_operator(|f| f.map_scalar(|j| -laplace_eigenvalue(j)), b);
    let x = GroupPoint::random(&mut r);
    for xi in b.up_to() {
        let want = CMat::identity(xi.dim(), xi.dim()) * C64::from(-laplace_eigenvalue(xi));
        assert!((lap.evaluate(&x, xi) - want).norm() < 1e-12);
    }
}

#[test]
fn kernel_integral_reproduces_quantization() {
    let mut r = rng(7);
    let b = Spin::from_twice(3);
    let a = random_symbol(b, Spin::HALF, 2, &mut r);
    let f = SpectralFunction::random(b, &mut r);
    let g = a.quantize_exact(&f).unwrap();
    for _ in 0..2 {
        let x = GroupPoint::random(&mut r);
        assert!((a.kernel_apply(&f, &x).unwrap() - g.evaluate(&x)).norm() < 1e-8);
    }
    let m = Symbol::multiplier(b, |j| 1.0 / (1.0 + j.value()));
    let (x1, x2) = (GroupPoint::random(&mut r), GroupPoint::random(&mut r));
    assert!(m.kernel_at(&x1).sub(&m.kernel_at(&x2)).plancherel_norm() < 1e-14);
}

#[test]
fn pointwise_sampling_recovers_a_band_limited_symbol() {
    let mut r = rng(8);
    let b = Spin::from_twice(2);
    let a = random_symbol(b, Spin::ONE, 2, &mut r);
    let (s, tail) = Symbol::from_pointwise(b, Spin::ONE, |x, xi| a.evaluate(x, xi)).unwrap();
    assert!(tail < 1e-24, "{tail}");
    let x = GroupPoint::random(&mut r);
    for xi in b.up_to() {
        assert!((s.evaluate(&x, xi) - a.evaluate(&x, xi)).norm() < 1e-11);
    }
}

#[test]
fn canonical_form_and_frequency_filter() {
    let mut r = rng(9);
    let a = random_symbol(Spin::from_twice(3), Spin::ONE, 3, &mut r);
    let c = a.canonical();
    let x = GroupPoint::random(&mut r);
    for xi in a.xi_band().up_to() {
        assert!((c.evaluate(&x, xi) - a.evaluate(&x, xi)).norm() < 1e-12);
    }
    let low = a.filter_x_frequency(|eta, _| if eta == Spin::ZERO { 1.0 } else { 0.0 });
    for (eta, _, mass) in low.partial_fourier_mass() {
        assert!(eta == Spin::ZERO && mass > 0.0);
    }
    // mass is ∫‖a_η(x,ξ)‖²_HS dx; compare against quadrature
    let grid = shared_grid(Spin::from_twice(2)).unwrap();
    let xi = Spin::from_twice(2);
    let vals: Vec<C64> = grid.nodes().iter().map(|x| C64::from(a.evaluate(x, xi).norm_squared())).collect();
    let total: f64 = a.partial_fourier_mass().iter().filter(|t| t.1 == xi).map(|t| t.2).sum();
    assert!((grid.integrate(&vals).re - total).abs() < 1e-10 * total);
}

#[test]
fn serialization_round_trip() {
    let mut r = rng(10);
    let a = random_symbol(Spin::ONE, Spin::HALF, 2, &mut r);
    let back = Symbol::from_json(&a.to_json()).unwrap();
    let x = GroupPoint::random(&mut r);
    for xi in a.xi_band().up_to() {
        assert_eq!(back.evaluate(&x, xi), a.evaluate(&x, xi));
    }
}

/// `(D_q P)(ξ) = ∫ q(y) k(y) ξ(y)* dy` with `k̂ = P`, by quadrature.
fn difference_by_quadrature(p: &Field, q: &SpectralFunction, xi: Spin) -> CMat {
    let k = p.kernel();
    let grid = shared_grid(p.band().add(Spin::ONE)).unwrap();
    let mut acc = CMat::zeros(xi.dim(), xi.dim());
    for i in 0..grid.len() {
        let y = grid.node(i);
        acc += wigner_D(xi, &y).adjoint() * (q.evaluate(&y) * k.evaluate(&y) * grid.weight(i));
    }
    acc
}

#[test]
fn difference_matches_quadrature() {
    let mut r = rng(11);
    let p = random_field(Spin::from_twice(4), &mut r);
    let t = FundamentalTuple::new();
    for i in 0..4 {
        let d = p.difference(t.component(i));
        assert_eq!(d.band(), Spin::from_twice(3));
        for xi in [Spin::ZERO, Spin::ONE, Spin::from_twice(3)] {
            assert!((d.get(xi) - difference_by_quadrature(&p, t.component(i), xi)).norm() < 1e-11);
        }
    }
}

#[test]
fn difference_shifts_support_by_one_half() {
    let j = Spin::from_twice(6);
    let p = Field::from_fn(Spin::from_twice(10), |k| if k == j { CMat::identity(k.dim(), k.dim()) } else { CMat::zeros(k.dim(), k.dim()) });
    let t = FundamentalTuple::new();
    let d = p.difference(t.component(1));
    for (k, n) in d.op_norms() {
        if k.two_j() != 5 && k.two_j() != 7 && k != j {
            assert!(n < 1e-12, "spin {k}: {n}");
        }
    }
}

#[test]
fn difference_of_a_vector_field_is_a_number() {
    let b = Spin::from_twice(8);
    let t = FundamentalTuple::new();
    for k in 0..3 {
        let x = LieVec::basis(k);
        let sigma = Field::vector_field(b, &x);
        for i in 0..4 {
            let d = sigma.difference(t.component(i));
            let xq = DiffOp::word(&[k]).at_identity(t.component(i));
            for xi in d.band().up_to() {
                let want = CMat::identity(xi.dim(), xi.dim()) * (-xq);
                assert!((d.get(xi) - want).norm() < 1e-12, "X{k} q{i} at {xi}");
            }
        }
    }
}

#[test]
fn leibniz_rule_for_differences() {
    // D_i(ab) = D_i a·b + a·D_i b + Σ_{(j,k)} D_k a · D_j b over the product-rule cross terms
    let mut r = rng(12);
    let (a, b) = (random_field(Spin::from_twice(6), &mut r), random_field(Spin::from_twice(6), &mut r));
    let t = FundamentalTuple::new();
    let ab = a.mul(&b);
    for i in 0..4 {
        let q = t.component(i);
        let mut rhs = a.difference(q).mul(&b).add(&a.mul(&b.difference(q)));
        for (j, k) in FundamentalTuple::cross_terms(i) {
            rhs = rhs.add(&a.difference(t.component(k)).mul(&b.difference(t.component(j))));
        }
        let lhs = ab.difference(q);
        for xi in lhs.band().up_to() {
            assert!((lhs.get(xi) - rhs.get(xi)).norm() < 1e-11, "component {i} at {xi}");
        }
    }
}
