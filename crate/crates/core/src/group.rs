//! SU(2) elements, the Euler chart, the Lie algebra and the bi-invariant metric.
//!
//! Convention: a group element is the 2×2 matrix of the defining representation
//! in the ascending basis `(|-1/2>, |+1/2>)`. The Euler chart is
//! `u(α,β,γ) = exp(-iαJz) exp(-iβJy) exp(-iγJz)` with α ∈ [0,2π), β ∈ [0,π],
//! γ ∈ [0,4π), which covers SU(2) exactly once away from β ∈ {0, π}.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

// Metric scale κ_g: the metric is κ_g·(−Killing). Stored as raw f64 bits.
static KAPPA_BITS: AtomicU64 = AtomicU64::new(0x3FF0_0000_0000_0000);

/// The metric scale κ_g (default 1, giving Laplace eigenvalues j(j+1)/2).
pub fn metric_scale() -> f64 {
    f64::from_bits(KAPPA_BITS.load(Ordering::Relaxed))
}

/// Set κ_g. Meant to be called once, before any computation.
pub fn set_metric_scale(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Config(format!("metric scale must be positive, got {kappa}")));
    }
    KAPPA_BITS.store(kappa.to_bits(), Ordering::Relaxed);
    Ok(())
}

/// Element of SU(2) as a unitary, unit-determinant 2×2 matrix `[[a, b], [-b̄, ā]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupPoint {
    u: Matrix2<C64>,
}

/// Coordinates of the ZYZ Euler chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        EulerAngles { alpha, beta, gamma }
    }
}

const UNITARITY_TOL: f64 = 1e-12;
const DRIFT_TOL: f64 = 1e-10;

impl GroupPoint {
    pub fn identity() -> Self {
        GroupPoint { u: Matrix2::identity() }
    }

    /// Build from the first row `(a, b)`; the pair is normalized.
    pub fn from_pair(a: C64, b: C64) -> Self {
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (a, b) = (a / n, b / n);
        GroupPoint { u: Matrix2::new(a, b, -b.conj(), a.conj()) }
    }

    /// Validate and wrap a matrix.
    pub fn from_matrix(u: Matrix2<C64>) -> Result<Self> {
        let dev = (u * u.adjoint() - Matrix2::identity()).norm();
        let det = u.determinant();
        if dev > UNITARITY_TOL || (det - 1.0).norm() > UNITARITY_TOL {
            return Err(Error::NotSu2(format!("‖uu*−I‖ = {dev:.2e}, det = {det:.6}")));
        }
        Ok(GroupPoint { u })
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.u
    }

    pub fn a(&self) -> C64 {
        self.u[(0, 0)]
    }

    pub fn b(&self) -> C64 {
        self.u[(0, 1)]
    }

    /// Deviation from unitarity and unit determinant.
    pub fn drift(&self) -> f64 {
        let dev = (self.u * self.u.adjoint() - Matrix2::identity()).norm();
        dev.max((self.u.determinant() - 1.0).norm())
    }

    fn check(&self) -> Result<()> {
        let d = self.drift();
        if d > 1e-8 {
            return Err(Error::NotSu2(format!("drift {d:.2e}")));
        }
        Ok(())
    }

    /// Group law. Re-projects onto SU(2) when the product drifts by more than 1e-10.
    pub fn multiply(&self, h: &GroupPoint) -> Result<GroupPoint> {
        self.check()?;
        h.check()?;
        Ok(self.mul(h))
    }

    /// Unchecked group law for inner loops.
    pub fn mul(&self, h: &GroupPoint) -> GroupPoint {
        let p = GroupPoint { u: self.u * h.u };
        if p.drift() > DRIFT_TOL {
            p.reproject()
        } else {
            p
        }
    }

    pub fn inverse(&self) -> GroupPoint {
        GroupPoint { u: self.u.adjoint() }
    }

    /// Polar projection back onto SU(2).
    pub fn reproject(&self) -> GroupPoint {
        let a = 0.5 * (self.u[(0, 0)] + self.u[(1, 1)].conj());
        let b = 0.5 * (self.u[(0, 1)] - self.u[(1, 0)].conj());
        GroupPoint::from_pair(a, b)
    }

    pub fn from_euler(e: EulerAngles) -> GroupPoint {
        let (c, s) = ((e.beta / 2.0).cos(), (e.beta / 2.0).sin());
        let a = C64::from_polar(c, (e.alpha + e.gamma) / 2.0);
        let b = C64::from_polar(s, (e.alpha - e.gamma) / 2.0);
        GroupPoint { u: Matrix2::new(a, b, -b.conj(), a.conj()) }
    }

    /// Chart coordinates. At β = 0 or β = π the chart degenerates; the
    /// canonical representative there has α = 0.
    pub fn to_euler(&self) -> EulerAngles {
        let (a, b) = (self.a(), self.b());
        let beta = 2.0 * b.norm().atan2(a.norm());
        let tol = 1e-14;
        let (alpha, gamma) = if b.norm() < tol {
            (0.0, (2.0 * a.arg()).rem_euclid(4.0 * PI))
        } else if a.norm() < tol {
            (0.0, (-2.0 * b.arg()).rem_euclid(4.0 * PI))
        } else {
            let (pa, pb) = (a.arg(), b.arg());
            let alpha = (pa + pb).rem_euclid(2.0 * PI);
            let gamma = (2.0 * pa - alpha).rem_euclid(4.0 * PI);
            (alpha, gamma)
        };
        EulerAngles { alpha, beta, gamma }
    }

    /// Rotation angle θ ∈ [0, 2π] of the element: Re a = cos(θ/2).
    pub fn angle(&self) -> f64 {
        let a = self.a();
        let s = (a.im * a.im + self.b().norm_sqr()).sqrt();
        2.0 * s.atan2(a.re)
    }

    /// Haar-random element (uniform on the unit 3-sphere).
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> GroupPoint {
        let v: [f64; 4] = std::array::from_fn(|_| sample_standard_normal(rng));
        GroupPoint::from_pair(C64::new(v[0], v[1]), C64::new(v[2], v[3]))
    }

    /// Random element with rotation angle exactly `theta` about a random axis.
    pub fn random_at_angle<R: Rng + ?Sized>(rng: &mut R, theta: f64) -> GroupPoint {
        let v: [f64; 3] = std::array::from_fn(|_| sample_standard_normal(rng));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let scale = theta * (2.0 * metric_scale()).sqrt() / n;
        LieVec([v[0] * scale, v[1] * scale, v[2] * scale]).exp()
    }
}

/// Bi-invariant geodesic distance for the metric κ_g·(−Killing).
pub fn distance(g: &GroupPoint, h: &GroupPoint) -> f64 {
    (2.0 * metric_scale()).sqrt() * g.inverse().mul(h).angle()
}

/// Spin-1/2 angular momentum matrices `(Jx, Jy, Jz)` in the ascending basis.
pub fn spin_half_j() -> [Matrix2<C64>; 3] {
    let h = C64::new(0.5, 0.0);
    let z = C64::new(0.0, 0.0);
    [
        Matrix2::new(z, h, h, z),
        Matrix2::new(z, 0.5 * I, -0.5 * I, z),
        Matrix2::new(-h, z, z, h),
    ]
}

/// Element of su(2) in coordinates of the orthonormal basis `X_k = (2κ_g)^{-1/2}·(−i J_k)`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct LieVec(pub [f64; 3]);

impl LieVec {
    pub fn basis(k: usize) -> LieVec {
        let mut v = [0.0; 3];
        v[k] = 1.0;
        LieVec(v)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scale(&self, t: f64) -> LieVec {
        LieVec(self.0.map(|c| c * t))
    }

    /// The anti-Hermitian 2×2 matrix representing this element.
    pub fn to_matrix(&self) -> Matrix2<C64> {
        let j = spin_half_j();
        let c = -I / (2.0 * metric_scale()).sqrt();
        (j[0] * C64::from(self.0[0]) + j[1] * C64::from(self.0[1]) + j[2] * C64::from(self.0[2])) * c
    }

    /// Coordinates of an anti-Hermitian traceless 2×2 matrix (`c_k = −4κ Tr(X X_k)`).
    pub fn from_matrix(x: &Matrix2<C64>) -> LieVec {
        let k = metric_scale();
        LieVec(std::array::from_fn(|i| (-4.0 * k * (x * LieVec::basis(i).to_matrix()).trace()).re))
    }

    /// Exponential map into SU(2).
    pub fn exp(&self) -> GroupPoint {
        let n = self.norm();
        if n == 0.0 {
            return GroupPoint::identity();
        }
        // X = −i θ (n̂·J) with θ = |c|/√(2κ); exp = cos(θ/2) − 2i sin(θ/2) n̂·J.
        let theta = n / (2.0 * metric_scale()).sqrt();
        let j = spin_half_j();
        let nj = (j[0] * C64::from(self.0[0]) + j[1] * C64::from(self.0[1]) + j[2] * C64::from(self.0[2])) / C64::from(n);
        let u = Matrix2::identity() * C64::from((theta / 2.0).cos()) - nj * (2.0 * I * (theta / 2.0).sin());
        GroupPoint { u }.reproject()
    }
}

/// One standard-normal draw.
pub fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn expm(x: &Matrix2<C64>) -> Matrix2<C64> {
        // Taylor series oracle; the arguments here are small.
        let mut term = Matrix2::identity();
        let mut sum = Matrix2::identity();
        for k in 1..40 {
            term = term * x / C64::from(k as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn double_cover() {
        let g = GroupPoint::from_euler(EulerAngles::new(0.0, 0.0, 2.0 * PI));
        assert!((g.matrix() + Matrix2::identity()).norm() < 1e-15);
        assert!((g.mul(&g).matrix() - Matrix2::identity()).norm() < 1e-15);
        // matrix-exponential oracle: exp(−2πi Jz)
        let jz = spin_half_j()[2];
        assert!((expm(&(jz * (-2.0 * PI * I))) - g.matrix()).norm() < 1e-12);
    }

    #[test]
    fn euler_matches_exponentials() {
        let j = spin_half_j();
        let (a, b, c) = (0.7, 1.1, 2.9);
        let prod = expm(&(j[2] * (-a * I))) * expm(&(j[1] * (-b * I))) * expm(&(j[2] * (-c * I)));
        let g = GroupPoint::from_euler(EulerAngles::new(a, b, c));
        assert!((prod - g.matrix()).norm() < 1e-13);
    }

    #[test]
    fn lie_basis_is_orthonormal_and_exp_is_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let v = LieVec([rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5]);
            let back = LieVec::from_matrix(&v.to_matrix());
            for k in 0..3 {
                assert!((back.0[k] - v.0[k]).abs() < 1e-14);
            }
            assert!((expm(&v.to_matrix()) - v.exp().matrix()).norm() < 1e-13);
        }
    }

    #[test]
    fn distance_along_beta() {
        for &beta in &[1e-3, 0.01, 0.2] {
            let g = GroupPoint::from_euler(EulerAngles::new(0.0, beta, 0.0));
            let d = distance(&GroupPoint::identity(), &g);
            assert!((d - 2f64.sqrt() * beta).abs() < 1e-13);
        }
        // one-parameter subgroup of a unit vector has length |t|
        let x = LieVec([0.3, -0.4, 0.5]).scale(1.0 / LieVec([0.3, -0.4, 0.5]).norm());
        for &t in &[0.01, 0.5, 2.0] {
            assert!((distance(&GroupPoint::identity(), &x.scale(t).exp()) - t).abs() < 1e-12);
        }
    }

    #[test]
    fn chart_degenerate_points() {
        let g = GroupPoint::from_euler(EulerAngles::new(1.0, 0.0, 3.0));
        let e = g.to_euler();
        assert_eq!(e.alpha, 0.0);
        assert!((GroupPoint::from_euler(e).matrix() - g.matrix()).norm() < 1e-14);
        let g = GroupPoint::from_euler(EulerAngles::new(1.0, PI, 3.0));
        let e = g.to_euler();
        assert!((GroupPoint::from_euler(e).matrix() - g.matrix()).norm() < 1e-14);
    }

    #[test]
    fn rejects_non_unitary() {
        let m = Matrix2::new(C64::from(2.0), C64::from(0.0), C64::from(0.0), C64::from(0.5));
        assert!(GroupPoint::from_matrix(m).is_err());
    }
}
