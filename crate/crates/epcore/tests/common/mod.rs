#![allow(dead_code)]

use epcore::linalg::{adjoint, inverse, lstsq_min_norm, svd, CMatrix, CVector};
use epcore::C64;
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(r: &mut ChaCha8Rng, n: usize) -> CMatrix<f64> {
    Array2::from_shape_fn((n, n), |_| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
}

pub fn random_vector(r: &mut ChaCha8Rng, n: usize) -> CVector<f64> {
    Array1::from_shape_fn(n, |_| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
}

pub fn mat(rows: &[&[C64]]) -> CMatrix<f64> {
    let n = rows.len();
    let m = rows[0].len();
    Array2::from_shape_fn((n, m), |(i, j)| rows[i][j])
}

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn max_abs_diff(a: &CMatrix<f64>, b: &CMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn vec_diff(a: &CVector<f64>, b: &CVector<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn vnorm(a: &CVector<f64>) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Matches two multisets of complex numbers greedily and returns the worst distance.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .fold((usize::MAX, f64::INFINITY), |acc, it| if it.1 < acc.1 { it } else { acc });
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// The in-scope EP scenarios: both stub hopping profiles at λ = 0 and one point per
/// diamond-ring table.
pub fn closure_scenarios() -> Vec<(String, CMatrix<f64>)> {
    use epcore::models::*;
    let mut out = vec![
        ("stub uniform".to_string(), build_stub(&StubRibbonParams::uniform(4, 1.0, 2.0, 0.0)).unwrap()),
        ("stub sqrt".to_string(), build_stub(&StubRibbonParams::sqrt_profile(4, 1.0, 0.0)).unwrap()),
    ];
    let points = [
        ("diamond eps=2 kappa=1", DiamondRingParams::real(2.0, 1.0)),
        ("diamond eps=0.5i kappa=-1", DiamondRingParams::imaginary(0.5, -1.0)),
        ("diamond eps=i kappa=0.5", DiamondRingParams::imaginary(1.0, 0.5)),
        ("diamond eps=-i kappa=0.5", DiamondRingParams::imaginary(-1.0, 0.5)),
        ("diamond eps=i kappa=1", DiamondRingParams::imaginary(1.0, 1.0)),
        ("diamond eps=i kappa=-1", DiamondRingParams::imaginary(1.0, -1.0)),
        ("diamond eps=-i kappa=1", DiamondRingParams::imaginary(-1.0, 1.0)),
        ("diamond eps=-i kappa=-1", DiamondRingParams::imaginary(-1.0, -1.0)),
    ];
    for (name, p) in points {
        out.push((name.to_string(), build_diamond(&p).unwrap()));
    }
    out
}

/// Projection residual of `v` onto the column span of `basis`.
pub fn outside_span(basis: &[CVector<f64>], v: &CVector<f64>) -> f64 {
    let n = v.len();
    let m = Array2::from_shape_fn((n, basis.len()), |(i, j)| basis[j][i]);
    let (_, res) = lstsq_min_norm(&m, v, 1e-12).unwrap();
    res / vnorm(v)
}

pub const PLANT_VALUES: [(f64, f64); 4] = [(0.0, 0.0), (1.5, 0.5), (-1.0, 1.0), (0.5, -1.5)];

/// Block-diagonal Jordan matrix for `blocks[i] = (eigenvalue slot, length)`.
pub fn jordan_matrix(blocks: &[(usize, usize)]) -> CMatrix<f64> {
    let n: usize = blocks.iter().map(|b| b.1).sum();
    let mut j = Array2::zeros((n, n));
    let mut off = 0;
    for &(slot, len) in blocks {
        let (a, b) = PLANT_VALUES[slot];
        for i in 0..len {
            j[[off + i, off + i]] = c(a, b);
            if i + 1 < len {
                j[[off + i, off + i + 1]] = re(1.0);
            }
        }
        off += len;
    }
    j
}

/// Random similarity with singular values log-spaced in [1, cond].
pub fn similarity(seed: u64, n: usize, cond: f64) -> (CMatrix<f64>, CMatrix<f64>) {
    let mut r = rng(seed);
    let u = svd(&random_matrix(&mut r, n)).unwrap().u;
    let v = svd(&random_matrix(&mut r, n)).unwrap().u;
    let sig: Vec<f64> = (0..n).map(|i| if n == 1 { 1.0 } else { cond.powf(i as f64 / (n - 1) as f64) }).collect();
    let mut s = u.clone();
    for i in 0..n {
        for k in 0..n {
            s[[i, k]] *= sig[k];
        }
    }
    let s = s.dot(&adjoint(&v));
    let inv = inverse(&s).unwrap();
    (s, inv)
}
