use super::{adjoint, ensure_finite, ensure_square, frobenius, norm2, schur, CMatrix};
use crate::error::Result;
use crate::scalar::{cone, czero, Real};
use ndarray::{Array1, Array2};
use num_complex::Complex;
use std::cmp::Ordering;

/// Eigenvalues with right eigenvectors of `H` and left eigenvectors (eigenvectors
/// of `H†`). Both sets are sorted by `(re, im)` of the eigenvalue of `H` they
/// belong to; no left/right pairing or normalization beyond unit 2-norm is implied.
#[derive(Debug, Clone)]
pub struct SpectralData<T> {
    pub eigenvalues: Vec<Complex<T>>,
    /// Columns are unit-norm right eigenvectors.
    pub right_vectors: CMatrix<T>,
    /// Conjugated eigenvalues of `H†`, i.e. the eigenvalue of `H` each left vector belongs to.
    pub left_eigenvalues: Vec<Complex<T>>,
    /// Columns are unit-norm eigenvectors of `H†`.
    pub left_vectors: CMatrix<T>,
    /// `‖Hv − Ev‖` per right mode.
    pub residuals: Vec<T>,
    /// `‖H†l − Ē l‖` per left mode.
    pub left_residuals: Vec<T>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EigOptions {
    /// Diagonal similarity balancing before the QR iteration. Off by default
    /// because it can perturb the degeneracy structure near exceptional points.
    pub balance: bool,
}

pub fn eig_general<T: Real>(h: &CMatrix<T>) -> Result<SpectralData<T>> {
    eig_with_options(h, EigOptions::default())
}

pub fn eig_with_options<T: Real>(h: &CMatrix<T>, opts: EigOptions) -> Result<SpectralData<T>> {
    ensure_square(h)?;
    ensure_finite(h, "eigensolver input")?;
    let (er, vr, rr) = right_eig(h, opts)?;
    let hd = adjoint(h);
    let (el, vl, rl) = right_eig(&hd, opts)?;
    let el: Vec<Complex<T>> = el.into_iter().map(|z| z.conj()).collect();
    let (el, vl, rl) = sorted(el, vl, rl);
    let (er, vr, rr) = sorted(er, vr, rr);
    Ok(SpectralData {
        eigenvalues: er,
        right_vectors: vr,
        left_eigenvalues: el,
        left_vectors: vl,
        residuals: rr,
        left_residuals: rl,
    })
}

pub fn lex_cmp<T: Real>(a: &Complex<T>, b: &Complex<T>) -> Ordering {
    a.re
        .partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

fn sorted<T: Real>(e: Vec<Complex<T>>, v: CMatrix<T>, r: Vec<T>) -> (Vec<Complex<T>>, CMatrix<T>, Vec<T>) {
    let mut idx: Vec<usize> = (0..e.len()).collect();
    idx.sort_by(|&a, &b| lex_cmp(&e[a], &e[b]));
    let n = v.nrows();
    let vs = Array2::from_shape_fn((n, idx.len()), |(i, k)| v[[i, idx[k]]]);
    (idx.iter().map(|&k| e[k]).collect(), vs, idx.iter().map(|&k| r[k]).collect())
}

fn right_eig<T: Real>(h: &CMatrix<T>, opts: EigOptions) -> Result<(Vec<Complex<T>>, CMatrix<T>, Vec<T>)> {
    let n = h.nrows();
    let (work, d) = if opts.balance { balance(h) } else { (h.clone(), vec![T::one(); n]) };
    let s = schur(&work)?;
    let t = &s.t;
    let tnorm = frobenius(t);
    let smin = (T::epsilon() * tnorm).max(T::min_positive_value());
    let big = T::max_value().sqrt();
    let mut vecs = Array2::from_elem((n, n), czero());
    for k in 0..n {
        let lam = t[[k, k]];
        let mut x = vec![czero::<T>(); k + 1];
        x[k] = cone();
        for i in (0..k).rev() {
            let mut acc = czero::<T>();
            for j in i + 1..=k {
                acc += t[[i, j]] * x[j];
            }
            let mut den = t[[i, i]] - lam;
            if den.norm() < smin {
                den = Complex::new(smin, T::zero());
            }
            x[i] = -acc / den;
            if x[i].norm() > big {
                let sc = T::one() / x[i].norm();
                for xv in x.iter_mut() {
                    *xv = *xv * sc;
                }
            }
        }
        // v = D · Z · x
        let mut v = Array1::from_elem(n, czero::<T>());
        for i in 0..n {
            let mut acc = czero();
            for (j, xj) in x.iter().enumerate() {
                acc += s.z[[i, j]] * xj;
            }
            v[i] = acc * d[i];
        }
        let nv = norm2(v.view());
        if nv > T::zero() {
            v.mapv_inplace(|z| z / nv);
        }
        vecs.column_mut(k).assign(&v);
    }
    let vals: Vec<Complex<T>> = (0..n).map(|k| t[[k, k]]).collect();
    let hv = h.dot(&vecs);
    let res = (0..n)
        .map(|k| {
            let r = &hv.column(k) - &vecs.column(k).mapv(|z| z * vals[k]);
            norm2(r.view())
        })
        .collect();
    Ok((vals, vecs, res))
}

/// Diagonal scaling by powers of two that equalizes row and column norms.
/// Returns `B = D⁻¹AD` and the diagonal of `D`.
fn balance<T: Real>(a: &CMatrix<T>) -> (CMatrix<T>, Vec<T>) {
    let n = a.nrows();
    let mut b = a.clone();
    let mut d = vec![T::one(); n];
    let two = T::lit(2.0);
    for _ in 0..64 {
        let mut changed = false;
        for i in 0..n {
            let c: T = (0..n).filter(|&j| j != i).map(|j| b[[j, i]].norm()).sum();
            let r: T = (0..n).filter(|&j| j != i).map(|j| b[[i, j]].norm()).sum();
            if c == T::zero() || r == T::zero() {
                continue;
            }
            let e = (r / c).sqrt().log2().round();
            let f = two.powf(e);
            if f == T::one() || c * f + r / f >= T::lit(0.95) * (c + r) {
                continue;
            }
            for j in 0..n {
                b[[j, i]] = b[[j, i]] * f;
                b[[i, j]] = b[[i, j]] / f;
            }
            d[i] = d[i] * f;
            changed = true;
        }
        if !changed {
            break;
        }
    }
    (b, d)
}
