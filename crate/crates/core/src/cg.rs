//! Clebsch–Gordan coefficients and the exact spectral product.
//!
//! Coefficients use Racah's closed form with log-factorials (Condon–Shortley
//! phases, real). With them, products of representation entries expand as
//!
//! `D^{j1}_{m1n1} D^{j2}_{m2n2} = Σ_J C^{J,m1+m2}_{j1m1;j2m2} C^{J,n1+n2}_{j1n1;j2n2} D^J_{m1+m2,n1+n2}`,
//!
//! which gives products of band-limited functions without any grid.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;

use crate::fourier::SpectralFunction;
use crate::group::C64;
use crate::irreps::CMat;
use crate::spin::{coupled_spins, Spin};

fn ln_factorial(n: i64) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let t = TABLE.get_or_init(|| {
        let mut v = vec![0.0f64; 1024];
        for k in 1..v.len() {
            v[k] = v[k - 1] + (k as f64).ln();
        }
        v
    });
    t[n as usize]
}

/// `C^{J M}_{j1 m1; j2 m2}` with all arguments given doubled.
pub fn clebsch_gordan(tj1: i64, tm1: i64, tj2: i64, tm2: i64, tj: i64, tm: i64) -> f64 {
    if tm1 + tm2 != tm || tm1.abs() > tj1 || tm2.abs() > tj2 || tm.abs() > tj {
        return 0.0;
    }
    if (tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tj + tm) % 2 != 0 {
        return 0.0;
    }
    if tj > tj1 + tj2 || tj < (tj1 - tj2).abs() || (tj1 + tj2 + tj) % 2 != 0 {
        return 0.0;
    }
    // integer quantities
    let a = (tj1 + tj2 - tj) / 2; // j1+j2−J
    let b = (tj1 - tm1) / 2; // j1−m1
    let c = (tj2 + tm2) / 2; // j2+m2
    let d = (tj - tj2 + tm1) / 2; // J−j2+m1
    let e = (tj - tj1 - tm2) / 2; // J−j1−m2
    let ln_pre = 0.5
        * (((tj + 1) as f64).ln()
            + ln_factorial((tj + tj1 - tj2) / 2)
            + ln_factorial((tj - tj1 + tj2) / 2)
            + ln_factorial(a)
            - ln_factorial((tj1 + tj2 + tj) / 2 + 1)
            + ln_factorial((tj + tm) / 2)
            + ln_factorial((tj - tm) / 2)
            + ln_factorial((tj1 - tm1) / 2)
            + ln_factorial((tj1 + tm1) / 2)
            + ln_factorial((tj2 - tm2) / 2)
            + ln_factorial((tj2 + tm2) / 2));
    let kmin = 0.max(-d).max(-e);
    let kmax = a.min(b).min(c);
    if kmin > kmax {
        return 0.0;
    }
    // first term from log-factorials, the rest by exact term ratios
    let ln_first = ln_factorial(kmin)
        + ln_factorial(a - kmin)
        + ln_factorial(b - kmin)
        + ln_factorial(c - kmin)
        + ln_factorial(d + kmin)
        + ln_factorial(e + kmin);
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in kmin..kmax {
        term *= -((a - k) * (b - k) * (c - k)) as f64 / ((k + 1) * (d + k + 1) * (e + k + 1)) as f64;
        sum += term;
    }
    let sign = if kmin % 2 == 0 { 1.0 } else { -1.0 };
    sign * sum * (ln_pre - ln_first).exp()
}

/// Coupling coefficients for a fixed triple `(j1, j2, J)`, stored sparsely per
/// output row: `rows[M] = [(m1 index, m2 index, C^{J M}_{j1 m1; j2 m2})]`.
#[derive(Debug)]
pub struct CgBlock {
    pub j1: Spin,
    pub j2: Spin,
    pub j: Spin,
    pub rows: Vec<Vec<(u16, u16, f64)>>,
}

impl CgBlock {
    fn build(j1: Spin, j2: Spin, j: Spin) -> CgBlock {
        let (t1, t2, t) = (j1.two_j() as i64, j2.two_j() as i64, j.two_j() as i64);
        let rows = (0..j.dim())
            .map(|mi| {
                let tm = j.two_m(mi) as i64;
                (0..j1.dim())
                    .filter_map(|k1| {
                        let tm1 = j1.two_m(k1) as i64;
                        let tm2 = tm - tm1;
                        let k2 = j2.index_of(tm2 as i32)?;
                        let c = clebsch_gordan(t1, tm1, t2, tm2, t, tm);
                        (c != 0.0).then_some((k1 as u16, k2 as u16, c))
                    })
                    .collect()
            })
            .collect();
        CgBlock { j1, j2, j, rows }
    }

    /// Dense `(2J+1) × (2j1+1)(2j2+1)` coupling matrix, columns ordered `(m1, m2)` with `m1` major.
    pub fn dense(&self) -> DMatrix<f64> {
        let d2 = self.j2.dim();
        let mut m = DMatrix::zeros(self.j.dim(), self.j1.dim() * d2);
        for (r, row) in self.rows.iter().enumerate() {
            for &(k1, k2, c) in row {
                m[(r, k1 as usize * d2 + k2 as usize)] = c;
            }
        }
        m
    }
}

type CgKey = (u32, u32, u32);

/// Write-once cache of coupling blocks.
pub fn cg_block(j1: Spin, j2: Spin, j: Spin) -> Arc<CgBlock> {
    static CACHE: OnceLock<RwLock<HashMap<CgKey, Arc<CgBlock>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    let key = (j1.two_j(), j2.two_j(), j.two_j());
    if let Some(b) = cache.read().unwrap().get(&key) {
        return b.clone();
    }
    let block = Arc::new(CgBlock::build(j1, j2, j));
    cache.write().unwrap().entry(key).or_insert(block).clone()
}

/// All coupling blocks of `j1 ⊗ j2`; stacked, they form an orthogonal matrix `U`
/// with `D^{j1} ⊗ D^{j2} = Uᵀ (⊕_J D^J) U`.
#[derive(Debug)]
pub struct CgTable {
    pub j1: Spin,
    pub j2: Spin,
    pub blocks: Vec<(Spin, DMatrix<f64>)>,
}

pub fn cg_table(j1: Spin, j2: Spin) -> CgTable {
    let blocks = coupled_spins(j1, j2).map(|j| (j, cg_block(j1, j2, j).dense())).collect();
    CgTable { j1, j2, blocks }
}

impl CgTable {
    /// The stacked change of basis.
    pub fn stacked(&self) -> DMatrix<f64> {
        let n = self.j1.dim() * self.j2.dim();
        let mut u = DMatrix::zeros(n, n);
        let mut row = 0;
        for (_, b) in &self.blocks {
            u.view_mut((row, 0), (b.nrows(), n)).copy_from(b);
            row += b.nrows();
        }
        u
    }
}

/// Exact product of two band-limited functions, truncated to `out_band`
/// (use `a.band() + b.band()` for the full product).
pub fn multiply(a: &SpectralFunction, b: &SpectralFunction, out_band: Spin) -> SpectralFunction {
    let ea: Vec<CMat> = a.band().up_to().map(|j| a.entry_coeffs(j)).collect();
    let eb: Vec<CMat> = b.band().up_to().map(|j| b.entry_coeffs(j)).collect();
    let mut out: Vec<CMat> = out_band.up_to().map(|j| CMat::zeros(j.dim(), j.dim())).collect();
    for j1 in a.band().up_to() {
        let x = &ea[j1.two_j() as usize];
        if x.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            continue;
        }
        for j2 in b.band().up_to() {
            let y = &eb[j2.two_j() as usize];
            if y.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                continue;
            }
            for j in coupled_spins(j1, j2).take_while(|&j| j <= out_band) {
                accumulate_coupled(&cg_block(j1, j2, j), x, y, &mut out[j.two_j() as usize]);
            }
        }
    }
    SpectralFunction::from_entry_coeffs(out)
}

/// `E_out[M][N] += Σ C[M](m1,m2) C[N](n1,n2) x[m1][n1] y[m2][n2]`.
fn accumulate_coupled(block: &CgBlock, x: &CMat, y: &CMat, out: &mut CMat) {
    let d = block.j.dim();
    for mi in 0..d {
        let rm = &block.rows[mi];
        for ni in 0..d {
            let rn = &block.rows[ni];
            let mut acc = C64::new(0.0, 0.0);
            for &(m1, m2, c1) in rm {
                let mut inner = C64::new(0.0, 0.0);
                for &(n1, n2, c2) in rn {
                    inner += x[(m1 as usize, n1 as usize)] * y[(m2 as usize, n2 as usize)] * c2;
                }
                acc += inner * c1;
            }
            out[(mi, ni)] += acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singlet_and_known_values() {
        let s = 1.0 / 2f64.sqrt();
        assert!((clebsch_gordan(1, 1, 1, -1, 0, 0) - s).abs() < 1e-15);
        assert!((clebsch_gordan(1, -1, 1, 1, 0, 0) + s).abs() < 1e-15);
        assert!((clebsch_gordan(1, 1, 1, 1, 2, 2) - 1.0).abs() < 1e-15);
        // ⟨1 0; 1 0 | 2 0⟩ = √(2/3), ⟨1 1; 1 −1 | 1 0⟩ = 1/√2
        assert!((clebsch_gordan(2, 0, 2, 0, 4, 0) - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((clebsch_gordan(2, 2, 2, -2, 2, 0) - s).abs() < 1e-15);
        assert_eq!(clebsch_gordan(2, 0, 2, 0, 2, 0), 0.0);
    }

    #[test]
    fn lowering_recurrence() {
        // J₋|J M⟩ expanded in the product basis, with m1 + m2 = M − 1
        for &(t1, t2, t) in &[(3i64, 2i64, 3i64), (8, 5, 9), (20, 13, 25), (32, 32, 40), (31, 7, 26)] {
            let (j1, j2, jj) = (t1 as f64 / 2.0, t2 as f64 / 2.0, t as f64 / 2.0);
            for tm1 in (-t1..=t1).step_by(2) {
                for tm2 in (-t2..=t2).step_by(2) {
                    let tm = tm1 + tm2 + 2;
                    if tm > t || tm - 2 < -t {
                        continue;
                    }
                    let (m1, m2, mm) = (tm1 as f64 / 2.0, tm2 as f64 / 2.0, tm as f64 / 2.0);
                    let lhs = ((jj + mm) * (jj - mm + 1.0)).sqrt() * clebsch_gordan(t1, tm1, t2, tm2, t, tm - 2);
                    let rhs = ((j1 - m1) * (j1 + m1 + 1.0)).sqrt() * clebsch_gordan(t1, tm1 + 2, t2, tm2, t, tm)
                        + ((j2 - m2) * (j2 + m2 + 1.0)).sqrt() * clebsch_gordan(t1, tm1, t2, tm2 + 2, t, tm);
                    assert!((lhs - rhs).abs() < 1e-12, "{t1} {t2} {t} {tm1} {tm2}: {lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn table_is_orthogonal_and_intertwines() {
        use crate::group::GroupPoint;
        use crate::irreps::wigner_d_all;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let g = GroupPoint::random(&mut rng);
        for (j1, j2) in [(Spin::HALF, Spin::HALF), (Spin::ONE, Spin::from_twice(3)), (Spin::from_twice(4), Spin::from_twice(5))] {
            let u = cg_table(j1, j2).stacked();
            let n = u.nrows();
            assert!((&u * u.transpose() - DMatrix::<f64>::identity(n, n)).norm() < 1e-12);
            let ds = wigner_d_all(j1.max(j2).add(j1.min(j2)), &g);
            let kron = ds[j1.two_j() as usize].kronecker(&ds[j2.two_j() as usize]);
            let mut block = CMat::zeros(n, n);
            let mut off = 0;
            for j in coupled_spins(j1, j2) {
                let d = j.dim();
                block.view_mut((off, off), (d, d)).copy_from(&ds[j.two_j() as usize]);
                off += d;
            }
            let uc = u.map(|x| C64::new(x, 0.0));
            assert!((kron - uc.transpose() * block * uc).norm() < 1e-11);
        }
    }

    #[test]
    fn product_matches_grid_product() {
        use crate::fourier::{forward, inverse};
        use crate::quadrature::haar_grid;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let a = SpectralFunction::random(Spin::from_twice(3), &mut rng);
        let b = SpectralFunction::random(Spin::from_twice(4), &mut rng);
        let out = Spin::from_twice(7);
        let grid = std::sync::Arc::new(haar_grid(out).unwrap());
        let oracle = forward(&inverse(&a, &grid).unwrap().mul(&inverse(&b, &grid).unwrap()), out).unwrap();
        let exact = multiply(&a, &b, out);
        assert!(exact.sub(&oracle).plancherel_norm() < 1e-11 * oracle.plancherel_norm());
    }
}
