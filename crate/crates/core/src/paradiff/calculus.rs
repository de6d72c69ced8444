//! The `#`-composition `a #_{r;q} b = Σ_{|α|≤r} D^α a · X^{(α)} b` and the
//! adjoint expansion `a^• = Σ_{|α|≤r} D^α X^{(α)} a*`.
//!
//! With the quantization `Op(a)f(x) = Σ d_ξ Tr(a(x,ξ) f̂(ξ) ξ(x))` and Taylor
//! operators normalized by `f(xy) ≈ Σ q^α(y) X^{(α)} f(x)`, the differences
//! must be taken against the reflected tuple `q̌ = q ∘ inv`; both expansions are
//! then exact for first-order operators at `r = 1`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fourier::SpectralFunction;
use crate::paradiff::opnorm::LinearOp;
use crate::spin::Spin;
use crate::symbol::{Symbol, TaylorOperators};

fn degree(alpha: &[u8]) -> usize {
    alpha.iter().map(|&x| x as usize).sum()
}

fn check_order(r: usize, t: &TaylorOperators) -> Result<()> {
    if t.order < r + 1 {
        return Err(Error::Config(format!("expansion to order {r} needs Taylor operators of order {} (have {})", r + 1, t.order)));
    }
    Ok(())
}

/// `a #_{r;q} b` with differences over an explicit tuple (the reflected tuple
/// for the composition formula; other choices are for diagnostics).
pub fn compose_sharp_with(a: &Symbol, b: &Symbol, r: usize, t: &TaylorOperators, diffs: &[SpectralFunction]) -> Result<Symbol> {
    check_order(r, t)?;
    let mut acc = a.mul(b);
    for (i, alpha) in t.indices_up_to(r) {
        if degree(alpha) == 0 {
            continue;
        }
        let da = a.difference_multi(alpha, diffs);
        let xb = b.apply_x(&t.ops[i]);
        if da.is_empty() || xb.is_empty() {
            continue;
        }
        acc = acc.add(&da.mul(&xb));
    }
    Ok(acc)
}

/// `a #_{r;q} b`. The `ξ`-band shrinks by `r/2` on the `a` side.
pub fn compose_sharp(a: &Symbol, b: &Symbol, r: usize, t: &TaylorOperators) -> Result<Symbol> {
    compose_sharp_with(a, b, r, t, &t.reflected)
}

/// `a^{•;r,q} = Σ_{|α|≤r} D^α X^{(α)} a*`.
pub fn adjoint_symbol(a: &Symbol, r: usize, t: &TaylorOperators) -> Result<Symbol> {
    check_order(r, t)?;
    let star = a.adjoint_pointwise();
    let mut acc = star.clone();
    for (i, alpha) in t.indices_up_to(r) {
        if degree(alpha) == 0 {
            continue;
        }
        let term = star.apply_x(&t.ops[i]).difference_multi(alpha, &t.reflected);
        if !term.is_empty() {
            acc = acc.add(&term);
        }
    }
    Ok(acc)
}

/// `Op(a)` on inputs of band `in_band`, exact on the output band `in_band + x_band(a)`.
pub fn symbol_operator(a: Symbol, in_band: Spin) -> LinearOp<'static> {
    assert!(in_band <= a.xi_band(), "input band {in_band} exceeds the symbol band {}", a.xi_band());
    let out = in_band.add(a.x_band());
    let a = Arc::new(a);
    let a2 = Arc::clone(&a);
    LinearOp::new(
        in_band,
        out,
        move |f| a.quantize_exact(f).expect("input band checked"),
        move |g| a2.quantize_adjoint(g, in_band),
    )
}
