//! Irreducible representations of SU(2): Wigner-D matrices, Lie-algebra
//! representations, Laplace eigenvalues and exact left-invariant derivatives.
//!
//! `D^j(g)` is built from the defining representation by repeatedly coupling
//! with spin 1/2 through the stretched Clebsch–Gordan coefficients, which works
//! for any group element (no chart singularities) and is numerically stable.

use nalgebra::{DMatrix, Matrix2};

use crate::group::{metric_scale, GroupPoint, LieVec, C64};
use crate::spin::Spin;

pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;

/// Laplace eigenvalue `λ_j = j(j+1)/(2κ_g)` for a given metric scale.
pub fn laplace_eigenvalue_with(j: Spin, kappa: f64) -> f64 {
    let jf = j.value();
    jf * (jf + 1.0) / (2.0 * kappa)
}

/// Laplace eigenvalue under the configured metric.
pub fn laplace_eigenvalue(j: Spin) -> f64 {
    laplace_eigenvalue_with(j, metric_scale())
}

/// `|ξ| = √λ_ξ`.
pub fn size(j: Spin) -> f64 {
    laplace_eigenvalue(j).sqrt()
}

/// `⟨ξ⟩ = (1 + λ_ξ)^{1/2}`.
pub fn bracket(j: Spin) -> f64 {
    (1.0 + laplace_eigenvalue(j)).sqrt()
}

/// Angular momentum matrices `(Jx, Jy, Jz)` of spin `j`, ascending basis.
pub fn spin_matrices(j: Spin) -> [CMat; 3] {
    let d = j.dim();
    let jf = j.value();
    let mut jp = CMat::zeros(d, d);
    for k in 0..d - 1 {
        let m = k as f64 - jf;
        jp[(k + 1, k)] = C64::from((jf * (jf + 1.0) - m * (m + 1.0)).sqrt());
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm) * C64::from(0.5);
    let jy = (&jp - &jm) * C64::new(0.0, -0.5);
    let jz = CMat::from_diagonal(&nalgebra::DVector::from_fn(d, |k, _| C64::from(k as f64 - jf)));
    [jx, jy, jz]
}

/// `dξ(X)` for `X` given in orthonormal-basis coordinates. Anti-Hermitian.
pub fn drep(j: Spin, x: &LieVec) -> CMat {
    let js = spin_matrices(j);
    let c = C64::new(0.0, -1.0 / (2.0 * metric_scale()).sqrt());
    let mut out = CMat::zeros(j.dim(), j.dim());
    for k in 0..3 {
        if x.0[k] != 0.0 {
            out += &js[k] * (c * x.0[k]);
        }
    }
    out
}

/// `dξ(X_k)` for the three basis elements.
pub fn drep_basis(j: Spin) -> [CMat; 3] {
    std::array::from_fn(|k| drep(j, &LieVec::basis(k)))
}

fn couple_half(prev: &CMat, u: &Matrix2<C64>) -> CMat {
    let d1 = prev.nrows();
    let d = d1 + 1;
    let inv = 1.0 / d1 as f64;
    let cp: Vec<f64> = (0..d).map(|k| (k as f64 * inv).sqrt()).collect();
    let cm: Vec<f64> = (0..d).map(|k| ((d1 as f64 - k as f64) * inv).max(0.0).sqrt()).collect();
    CMat::from_fn(d, d, |k, l| {
        let mut s = C64::new(0.0, 0.0);
        if k > 0 && l > 0 {
            s += prev[(k - 1, l - 1)] * u[(1, 1)] * (cp[k] * cp[l]);
        }
        if k > 0 && l < d1 {
            s += prev[(k - 1, l)] * u[(1, 0)] * (cp[k] * cm[l]);
        }
        if k < d1 && l > 0 {
            s += prev[(k, l - 1)] * u[(0, 1)] * (cm[k] * cp[l]);
        }
        if k < d1 && l < d1 {
            s += prev[(k, l)] * u[(0, 0)] * (cm[k] * cm[l]);
        }
        s
    })
}

/// All Wigner-D matrices `D^j(g)` for `j = 0, 1/2, ..., band`.
pub fn wigner_d_all(band: Spin, g: &GroupPoint) -> Vec<CMat> {
    let mut out = Vec::with_capacity(band.dim());
    out.push(CMat::from_element(1, 1, C64::new(1.0, 0.0)));
    for _ in 0..band.two_j() {
        let next = couple_half(out.last().unwrap(), g.matrix());
        out.push(next);
    }
    out
}

/// `D^j(g)`, unitary, with `D^{1/2}(g) = g`.
#[allow(non_snake_case)]
pub fn wigner_D(j: Spin, g: &GroupPoint) -> CMat {
    wigner_d_all(j, g).pop().unwrap()
}

/// Real little-d matrices `d^j(β)` for all `j ≤ band`, so that
/// `D^j_{mn}(α,β,γ) = e^{−imα} d^j_{mn}(β) e^{−inγ}`.
pub fn little_d_all(band: Spin, beta: f64) -> Vec<RMat> {
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let u = Matrix2::new(C64::from(c), C64::from(s), C64::from(-s), C64::from(c));
    let g = GroupPoint::from_pair(u[(0, 0)], u[(0, 1)]);
    wigner_d_all(band, &g).into_iter().map(|m| m.map(|z| z.re)).collect()
}

/// Exact left-invariant derivative `X D^j` at `g`: `D^j(g)·dξ(X)`.
pub fn entry_derivative(j: Spin, x: &LieVec, g: &GroupPoint) -> CMat {
    wigner_D(j, g) * drep(j, x)
}

/// Matrix exponential (delegates to nalgebra's Padé implementation).
pub fn expm(a: &CMat) -> CMat {
    a.clone().exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{EulerAngles, GroupPoint};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn defining_rep_is_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = GroupPoint::random(&mut rng);
        let d = wigner_D(Spin::HALF, &g);
        for r in 0..2 {
            for c in 0..2 {
                assert!((d[(r, c)] - g.matrix()[(r, c)]).norm() < 1e-15);
            }
        }
        let x = LieVec([0.2, -0.7, 1.3]);
        let dx = drep(Spin::HALF, &x);
        let xm = x.to_matrix();
        for r in 0..2 {
            for c in 0..2 {
                assert!((dx[(r, c)] - xm[(r, c)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn euler_factorization() {
        let e = EulerAngles::new(0.4, 1.9, 5.1);
        let g = GroupPoint::from_euler(e);
        let j = Spin::new(2.5).unwrap();
        let dd = &little_d_all(j, e.beta)[j.two_j() as usize];
        let big = wigner_D(j, &g);
        for r in 0..j.dim() {
            for c in 0..j.dim() {
                let (m, n) = (j.two_m(r) as f64 / 2.0, j.two_m(c) as f64 / 2.0);
                let z = C64::from_polar(dd[(r, c)], -m * e.alpha - n * e.gamma);
                assert!((z - big[(r, c)]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn exp_consistency() {
        let x = LieVec([0.3, 0.8, -0.5]);
        for &t in &[0.1, 1.0] {
            for tj in 0..=6 {
                let j = Spin::from_twice(tj);
                let lhs = expm(&(drep(j, &x) * C64::from(t)));
                let rhs = wigner_D(j, &x.scale(t).exp());
                assert!((lhs - rhs).norm() < 1e-10, "j={j} t={t}");
            }
        }
    }

    #[test]
    fn small_d_known_values() {
        // d^1_{00}(β) = cos β ; d^1_{1,0} = −sin β/√2
        let b = 0.83;
        let d = &little_d_all(Spin::ONE, b)[2];
        assert!((d[(1, 1)] - b.cos()).abs() < 1e-15);
        assert!((d[(2, 1)] + b.sin() / 2f64.sqrt()).abs() < 1e-15);
    }
}
