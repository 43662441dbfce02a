use super::{ensure_square, identity, norm2, svd, CMatrix, CVector};
use crate::error::{Error, Result};
use crate::scalar::{czero, Real};
use ndarray::Array1;

/// Solves `A·X = B` by LU factorization with partial pivoting.
pub fn lu_solve<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = ensure_square(a)?;
    if b.nrows() != n {
        return Err(Error::DimensionMismatch(format!("lu_solve: {}x{} vs {} rows", n, n, b.nrows())));
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let nrhs = x.ncols();
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, lu[[i, k]].norm()))
            .fold((k, T::zero()), |acc, it| if it.1 > acc.1 { it } else { acc });
        if pmax == T::zero() {
            return Err(Error::Singular("lu_solve"));
        }
        if p != k {
            for j in 0..n {
                lu.swap([k, j], [p, j]);
            }
            for j in 0..nrhs {
                x.swap([k, j], [p, j]);
            }
        }
        let piv = lu[[k, k]];
        for i in k + 1..n {
            let f = lu[[i, k]] / piv;
            if f == czero() {
                continue;
            }
            lu[[i, k]] = f;
            for j in k + 1..n {
                let t = lu[[k, j]];
                lu[[i, j]] -= f * t;
            }
            for j in 0..nrhs {
                let t = x[[k, j]];
                x[[i, j]] -= f * t;
            }
        }
    }
    for j in 0..nrhs {
        for i in (0..n).rev() {
            let mut acc = x[[i, j]];
            for k in i + 1..n {
                acc -= lu[[i, k]] * x[[k, j]];
            }
            x[[i, j]] = acc / lu[[i, i]];
        }
    }
    Ok(x)
}

pub fn inverse<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    lu_solve(a, &identity(ensure_square(a)?))
}

/// Minimum-norm least-squares solution through the SVD pseudoinverse, truncated
/// at `rank_tol·σ_max`. Returns `(x, ‖Ax − b‖)`.
pub fn lstsq_min_norm<T: Real>(a: &CMatrix<T>, b: &CVector<T>, rank_tol: T) -> Result<(CVector<T>, T)> {
    let (m, n) = a.dim();
    if b.len() != m {
        return Err(Error::DimensionMismatch(format!("lstsq: {} rows vs rhs {}", m, b.len())));
    }
    let d = svd(a)?;
    let smax = d.s.first().copied().unwrap_or(T::zero());
    let mut x = Array1::from_elem(n, czero::<T>());
    for (k, &sk) in d.s.iter().enumerate() {
        if smax == T::zero() || sk <= rank_tol * smax {
            continue;
        }
        let coef = super::inner(d.u.column(k), b.view()) / sk;
        x = &x + &d.v.column(k).mapv(|z| z * coef);
    }
    let r = &a.dot(&x) - b;
    Ok((x, norm2(r.view())))
}
