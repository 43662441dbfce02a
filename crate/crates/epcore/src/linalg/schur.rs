//! Complex Schur decomposition: Householder reduction to Hessenberg form followed
//! by single-shift QR with Wilkinson shifts, plus reordering of the diagonal.

use super::{ensure_finite, ensure_square, identity, CMatrix};
use crate::error::{Error, Result};
use crate::scalar::{czero, Real};
use num_complex::Complex;

/// `A = Z·T·Z†` with `Z` unitary and `T` upper triangular.
#[derive(Debug, Clone)]
pub struct Schur<T> {
    pub t: CMatrix<T>,
    pub z: CMatrix<T>,
}

impl<T: Real> Schur<T> {
    pub fn eigenvalues(&self) -> Vec<Complex<T>> {
        (0..self.t.nrows()).map(|i| self.t[[i, i]]).collect()
    }
}

fn cabs1<T: Real>(z: Complex<T>) -> T {
    z.re.abs() + z.im.abs()
}

/// Plane rotation `G = [[c, s], [−s̄, c]]` with real `c` such that `G·(f, g)ᵀ = (r, 0)ᵀ`.
fn givens<T: Real>(f: Complex<T>, g: Complex<T>) -> (T, Complex<T>) {
    let fa = f.norm();
    let ga = g.norm();
    if ga == T::zero() {
        return (T::one(), czero());
    }
    if fa == T::zero() {
        return (T::zero(), g.conj() / ga);
    }
    let rho = fa.hypot(ga);
    let c = fa / rho;
    let s = (f / fa) * g.conj() / rho;
    (c, s)
}

/// Applies `G` from the left to rows `k, k+1` over columns `cols`.
fn rot_rows<T: Real>(a: &mut CMatrix<T>, k: usize, c: T, s: Complex<T>, cols: std::ops::Range<usize>) {
    for j in cols {
        let x = a[[k, j]];
        let y = a[[k + 1, j]];
        a[[k, j]] = x * c + s * y;
        a[[k + 1, j]] = y * c - s.conj() * x;
    }
}

/// Applies `G†` from the right to columns `k, k+1` over rows `rows`.
fn rot_cols<T: Real>(a: &mut CMatrix<T>, k: usize, c: T, s: Complex<T>, rows: std::ops::Range<usize>) {
    for i in rows {
        let x = a[[i, k]];
        let y = a[[i, k + 1]];
        a[[i, k]] = x * c + s.conj() * y;
        a[[i, k + 1]] = y * c - s * x;
    }
}

fn hessenberg<T: Real>(a: &mut CMatrix<T>, q: &mut CMatrix<T>) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let alpha_norm = (k + 1..n).map(|i| a[[i, k]].norm_sqr()).sum::<T>().sqrt();
        if alpha_norm == T::zero() {
            continue;
        }
        let x0 = a[[k + 1, k]];
        let phase = if x0.norm() == T::zero() {
            Complex::new(T::one(), T::zero())
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * alpha_norm;
        let mut v: Vec<Complex<T>> = (k + 1..n).map(|i| a[[i, k]]).collect();
        v[0] -= alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if vn == T::zero() {
            continue;
        }
        for z in v.iter_mut() {
            *z = *z / vn;
        }
        let two = T::lit(2.0);
        // A ← (I − 2vv†) A
        for j in 0..n {
            let mut dot = czero::<T>();
            for (idx, i) in (k + 1..n).enumerate() {
                dot += v[idx].conj() * a[[i, j]];
            }
            for (idx, i) in (k + 1..n).enumerate() {
                a[[i, j]] -= v[idx] * dot * two;
            }
        }
        // A ← A (I − 2vv†), Q ← Q (I − 2vv†)
        for m in [&mut *a, &mut *q] {
            for i in 0..n {
                let mut dot = czero::<T>();
                for (idx, j) in (k + 1..n).enumerate() {
                    dot += m[[i, j]] * v[idx];
                }
                for (idx, j) in (k + 1..n).enumerate() {
                    m[[i, j]] -= dot * v[idx].conj() * two;
                }
            }
        }
        for i in k + 2..n {
            a[[i, k]] = czero();
        }
    }
}

/// Complex Schur decomposition of a square matrix.
pub fn schur<T: Real>(a: &CMatrix<T>) -> Result<Schur<T>> {
    let n = ensure_square(a)?;
    ensure_finite(a, "schur input")?;
    let mut h = a.clone();
    let mut z = identity(n);
    if n == 0 {
        return Ok(Schur { t: h, z });
    }
    hessenberg(&mut h, &mut z);

    let ulp = T::epsilon();
    let smlnum = T::min_positive_value() * (T::from_usize_lossy(n) / ulp);
    let itmax = 30 * n.max(10);
    let mut total = 0usize;
    let mut hi = n - 1;
    let mut its = 0usize;

    while hi > 0 {
        // locate the start of the active unreduced block
        let mut lo = hi;
        while lo > 0 {
            let sub = cabs1(h[[lo, lo - 1]]);
            if sub <= smlnum {
                break;
            }
            let mut tst = cabs1(h[[lo - 1, lo - 1]]) + cabs1(h[[lo, lo]]);
            if tst == T::zero() {
                if lo >= 2 {
                    tst += h[[lo - 1, lo - 2]].re.abs();
                }
                if lo + 1 <= hi {
                    tst += h[[lo + 1, lo]].re.abs();
                }
            }
            if h[[lo, lo - 1]].re.abs() <= ulp * tst {
                let ab = sub.max(cabs1(h[[lo - 1, lo]]));
                let ba = sub.min(cabs1(h[[lo - 1, lo]]));
                let d = h[[lo - 1, lo - 1]] - h[[lo, lo]];
                let aa = cabs1(h[[lo, lo]]).max(cabs1(d));
                let bb = cabs1(h[[lo, lo]]).min(cabs1(d));
                let s = aa + ab;
                if ba * (ab / s) <= smlnum.max(ulp * (bb * (aa / s))) {
                    break;
                }
            }
            lo -= 1;
        }
        if lo > 0 {
            h[[lo, lo - 1]] = czero();
        }
        if lo == hi {
            hi -= 1;
            its = 0;
            continue;
        }

        total += 1;
        its += 1;
        if total > itmax {
            let max_sub = (1..n).map(|i| h[[i, i - 1]].norm()).fold(T::zero(), T::max);
            return Err(Error::NoConvergence {
                algorithm: "complex QR",
                iterations: total,
                max_residual: max_sub.to_f64().unwrap_or(f64::NAN),
            });
        }

        let mu = if its == 10 {
            h[[lo, lo]] + Complex::new(T::lit(0.75) * h[[lo + 1, lo]].re.abs(), T::zero())
        } else if its == 20 {
            h[[hi, hi]] + Complex::new(T::lit(0.75) * h[[hi, hi - 1]].re.abs(), T::zero())
        } else {
            wilkinson_shift(&h, hi)
        };

        let mut x = h[[lo, lo]] - mu;
        let mut y = h[[lo + 1, lo]];
        for k in lo..hi {
            let (c, s) = givens(x, y);
            let col_start = if k > lo { k - 1 } else { lo };
            rot_rows(&mut h, k, c, s, col_start..n);
            if k > lo {
                h[[k + 1, k - 1]] = czero();
            }
            let row_end = (k + 3).min(hi + 1);
            rot_cols(&mut h, k, c, s, 0..row_end);
            rot_cols(&mut z, k, c, s, 0..n);
            if k + 1 < hi {
                x = h[[k + 1, k]];
                y = h[[k + 2, k]];
            }
        }
    }
    for i in 1..n {
        for j in 0..i {
            h[[i, j]] = czero();
        }
    }
    Ok(Schur { t: h, z })
}

fn wilkinson_shift<T: Real>(h: &CMatrix<T>, i: usize) -> Complex<T> {
    let half = T::lit(0.5);
    let mut t = h[[i, i]];
    let u = h[[i - 1, i]].sqrt() * h[[i, i - 1]].sqrt();
    let mut s = cabs1(u);
    if s != T::zero() {
        let x = (h[[i - 1, i - 1]] - t) * half;
        let sx = cabs1(x);
        s = s.max(sx);
        let xs = x / s;
        let us = u / s;
        let mut y = (xs * xs + us * us).sqrt() * s;
        if sx > T::zero() {
            let xn = x / sx;
            if xn.re * y.re + xn.im * y.im < T::zero() {
                y = -y;
            }
        }
        t -= u * (u / (x + y));
    }
    t
}

/// Reorders a Schur decomposition in place so that the diagonal entries whose
/// positions are flagged in `select` come first, preserving their relative
/// order. Returns the number of selected entries.
pub fn reorder_schur<T: Real>(s: &mut Schur<T>, select: &[bool]) -> usize {
    let n = s.t.nrows();
    assert_eq!(select.len(), n, "selection length must match dimension");
    let mut flags = select.to_vec();
    let mut target = 0usize;
    for pos in 0..n {
        if !flags[pos] {
            continue;
        }
        let mut k = pos;
        while k > target {
            swap_adjacent(s, k - 1);
            flags.swap(k - 1, k);
            k -= 1;
        }
        target += 1;
    }
    target
}

fn swap_adjacent<T: Real>(s: &mut Schur<T>, k: usize) {
    let n = s.t.nrows();
    let t11 = s.t[[k, k]];
    let t22 = s.t[[k + 1, k + 1]];
    let (c, sn) = givens(s.t[[k, k + 1]], t22 - t11);
    rot_rows(&mut s.t, k, c, sn, k..n);
    rot_cols(&mut s.t, k, c, sn, 0..k + 2);
    rot_cols(&mut s.z, k, c, sn, 0..n);
    s.t[[k + 1, k]] = czero();
    s.t[[k, k]] = t22;
    s.t[[k + 1, k + 1]] = t11;
}
