//! One-sided (Hestenes) Jacobi singular value decomposition.

use super::{adjoint, ensure_finite, inner, norm2, CMatrix};
use crate::error::{Error, Result};
use crate::scalar::{czero, Real};
use ndarray::{s, Array1, Array2};
use num_complex::Complex;

/// Thin SVD `A = U·diag(σ)·V†` with `k = min(m, n)` columns in `U` and `V`.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: CMatrix<T>,
    /// Singular values, descending.
    pub s: Vec<T>,
    pub v: CMatrix<T>,
}

const MAX_SWEEPS: usize = 80;

pub fn svd<T: Real>(a: &CMatrix<T>) -> Result<Svd<T>> {
    ensure_finite(a, "svd input")?;
    let (m, n) = a.dim();
    if m < n {
        let t = svd_tall(&adjoint(a))?;
        return Ok(Svd { u: t.v, s: t.s, v: t.u });
    }
    svd_tall(a)
}

fn svd_tall<T: Real>(a: &CMatrix<T>) -> Result<Svd<T>> {
    let (m, n) = a.dim();
    let mut g = a.clone();
    let mut v = super::identity::<T>(n);
    let tol = T::epsilon() * T::from_usize_lossy(m.max(1)).sqrt();
    // columns at roundoff level relative to the whole matrix are treated as zero
    let floor = (T::epsilon() * super::frobenius(a)).powi(2);
    let mut converged = n < 2;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                algorithm: "Jacobi SVD",
                iterations: sweeps,
                max_residual: f64::NAN,
            });
        }
        sweeps += 1;
        converged = true;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = norm2(g.column(p)).powi(2);
                let beta = norm2(g.column(q)).powi(2);
                if alpha <= floor || beta <= floor {
                    continue;
                }
                let gamma = inner(g.column(p), g.column(q));
                let gabs = gamma.norm();
                if gabs <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                converged = false;
                let phase = gamma / gabs;
                let zeta = (beta - alpha) / (T::lit(2.0) * gabs);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let sn = c * t;
                rotate(&mut g, p, q, c, sn, phase);
                rotate(&mut v, p, q, c, sn, phase);
            }
        }
    }
    let mut sv: Vec<(T, usize)> = (0..n).map(|j| (norm2(g.column(j)), j)).collect();
    sv.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal).then(x.1.cmp(&y.1)));
    let mut u = Array2::from_elem((m, n), czero::<T>());
    let mut vs = Array2::from_elem((n, n), czero::<T>());
    let mut s = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (k, &(sigma, j)) in sv.iter().enumerate() {
        s.push(sigma);
        vs.column_mut(k).assign(&v.column(j));
        if sigma * sigma > floor {
            u.column_mut(k).assign(&g.column(j).mapv(|z| z / sigma));
        } else {
            missing.push(k);
        }
    }
    complete_orthonormal(&mut u, &missing);
    Ok(Svd { u, s, v: vs })
}

/// `[x_p, x_q] ← [c x_p − s e^{−iφ} x_q, s e^{iφ} x_p + c x_q]`.
fn rotate<T: Real>(x: &mut CMatrix<T>, p: usize, q: usize, c: T, s: T, phase: Complex<T>) {
    for i in 0..x.nrows() {
        let a = x[[i, p]];
        let b = x[[i, q]];
        x[[i, p]] = a * c - phase.conj() * b * s;
        x[[i, q]] = phase * a * s + b * c;
    }
}

/// Fills the listed columns with unit vectors orthogonal to every other column.
fn complete_orthonormal<T: Real>(u: &mut CMatrix<T>, missing: &[usize]) {
    let (m, n) = u.dim();
    let mut filled: Vec<usize> = (0..n).filter(|k| !missing.contains(k)).collect();
    let mut cand = 0;
    for &k in missing {
        while cand < m {
            let mut w = Array1::from_elem(m, czero::<T>());
            w[cand] = Complex::new(T::one(), T::zero());
            cand += 1;
            for _ in 0..2 {
                for &j in &filled {
                    let c = inner(u.column(j), w.view());
                    w = &w - &u.column(j).mapv(|z| z * c);
                }
            }
            let nw = norm2(w.view());
            if nw > T::lit(0.5) {
                u.column_mut(k).assign(&w.mapv(|z| z / nw));
                filled.push(k);
                break;
            }
        }
    }
}

/// Number of singular values above `rank_tol·σ_max`; 0 for the zero matrix.
pub fn rank<T: Real>(a: &CMatrix<T>, rank_tol: T) -> Result<usize> {
    let d = svd(a)?;
    let smax = d.s.first().copied().unwrap_or(T::zero());
    if smax == T::zero() {
        return Ok(0);
    }
    Ok(d.s.iter().filter(|&&x| x > rank_tol * smax).count())
}

pub fn spectral_norm<T: Real>(a: &CMatrix<T>) -> Result<T> {
    if a.is_empty() {
        return Ok(T::zero());
    }
    Ok(svd(a)?.s[0])
}

/// Orthonormal kernel basis (columns): right singular vectors whose singular
/// value is at most `abs_tol`. Wide inputs are padded with zero rows first.
pub fn null_space<T: Real>(a: &CMatrix<T>, abs_tol: T) -> Result<CMatrix<T>> {
    let (m, n) = a.dim();
    let padded;
    let work = if m < n {
        let mut p = Array2::from_elem((n, n), czero::<T>());
        p.slice_mut(s![..m, ..]).assign(a);
        padded = p;
        &padded
    } else {
        a
    };
    let d = svd(work)?;
    let keep: Vec<usize> = (0..n).filter(|&k| d.s[k] <= abs_tol).collect();
    Ok(Array2::from_shape_fn((n, keep.len()), |(i, j)| d.v[[i, keep[j]]]))
}
