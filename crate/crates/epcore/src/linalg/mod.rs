//! Dense complex linear algebra sized for matrices up to a few hundred rows.
//!
//! Everything here is generic over the real scalar `T` (f32 or f64) and works on
//! `ndarray` containers of `Complex<T>`.

mod eig;
mod expm;
mod schur;
mod solve;
mod svd;

pub use eig::{eig_general, eig_with_options, lex_cmp, EigOptions, SpectralData};
pub use expm::expm;
pub use schur::{reorder_schur, schur, Schur};
pub use solve::{lstsq_min_norm, lu_solve, inverse};
pub use svd::{null_space, rank, spectral_norm, svd, Svd};

use crate::error::{Error, Result};
use crate::scalar::{czero, Real};
use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex;

/// Dense complex matrix.
pub type CMatrix<T> = Array2<Complex<T>>;
/// Dense complex vector.
pub type CVector<T> = Array1<Complex<T>>;

/// Default rank tolerance `dim·eps·64`.
pub fn default_rank_tol<T: Real>(dim: usize) -> T {
    T::from_usize_lossy(dim.max(1)) * T::epsilon() * T::lit(64.0)
}

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    let mut m = Array2::from_elem((n, n), czero());
    for i in 0..n {
        m[[i, i]] = Complex::new(T::one(), T::zero());
    }
    m
}

/// Conjugate transpose.
pub fn adjoint<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    a.t().mapv(|z| z.conj())
}

/// Sesquilinear inner product `⟨a|b⟩ = Σ conj(a_i) b_i`.
pub fn inner<T: Real>(a: ArrayView1<Complex<T>>, b: ArrayView1<Complex<T>>) -> Complex<T> {
    a.iter().zip(b.iter()).fold(czero(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm2<T: Real>(v: ArrayView1<Complex<T>>) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

pub fn frobenius<T: Real>(a: &CMatrix<T>) -> T {
    a.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Largest absolute column sum.
pub fn norm1<T: Real>(a: &CMatrix<T>) -> T {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<T>())
        .fold(T::zero(), T::max)
}

/// `u v†`.
pub fn outer<T: Real>(u: ArrayView1<Complex<T>>, v: ArrayView1<Complex<T>>) -> CMatrix<T> {
    Array2::from_shape_fn((u.len(), v.len()), |(i, j)| u[i] * v[j].conj())
}

pub fn scale_vec<T: Real>(v: &CVector<T>, s: Complex<T>) -> CVector<T> {
    v.mapv(|z| z * s)
}

pub fn scale_mat<T: Real>(a: &CMatrix<T>, s: Complex<T>) -> CMatrix<T> {
    a.mapv(|z| z * s)
}

/// `H − c·I`.
pub fn shifted<T: Real>(h: &CMatrix<T>, c: Complex<T>) -> CMatrix<T> {
    let mut a = h.clone();
    for i in 0..a.nrows().min(a.ncols()) {
        a[[i, i]] -= c;
    }
    a
}

pub fn is_finite_matrix<T: Real>(a: &CMatrix<T>) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn is_finite_vector<T: Real>(v: &CVector<T>) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub(crate) fn ensure_square<T: Real>(a: &CMatrix<T>) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    Ok(a.nrows())
}

pub(crate) fn ensure_finite<T: Real>(a: &CMatrix<T>, what: &'static str) -> Result<()> {
    if is_finite_matrix(a) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Multiplies the vector by a unit phase so that its first entry whose modulus
/// exceeds `rel·max|v_i|` becomes real and positive.
pub fn fix_phase<T: Real>(v: &mut CVector<T>, rel: T) {
    let vmax = v.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    if vmax == T::zero() {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() > rel * vmax).copied() {
        let phase = z.conj() / z.norm();
        v.mapv_inplace(|x| x * phase);
    }
}

/// Integer power of a square matrix by repeated multiplication.
pub fn matrix_power<T: Real>(a: &CMatrix<T>, k: usize) -> CMatrix<T> {
    let mut p = identity(a.nrows());
    for _ in 0..k {
        p = p.dot(a);
    }
    p
}
