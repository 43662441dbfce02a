//! Matrix exponential by scaling and squaring with the degree-13 Padé approximant.

use super::{ensure_finite, ensure_square, identity, is_finite_matrix, lu_solve, norm1, CMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;
use num_complex::Complex;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

pub fn expm<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = ensure_square(a)?;
    ensure_finite(a, "expm input")?;
    let nrm = norm1(a);
    let s = if nrm > T::lit(THETA13) {
        (nrm / T::lit(THETA13)).log2().ceil().to_i32().unwrap_or(i32::MAX).max(0)
    } else {
        0
    };
    if s > 1000 {
        return Err(Error::Overflow { norm: nrm.to_f64().unwrap_or(f64::INFINITY) });
    }
    let scale = Complex::new(T::lit(2.0).powi(-s), T::zero());
    let a1 = a.mapv(|z| z * scale);
    let b = |k: usize| Complex::new(T::lit(PADE13[k]), T::zero());
    let id = identity::<T>(n);
    let a2 = a1.dot(&a1);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let lin = |c6: usize, c4: usize, c2: usize| -> CMatrix<T> {
        &(&a6.mapv(|z| z * b(c6)) + &a4.mapv(|z| z * b(c4))) + &a2.mapv(|z| z * b(c2))
    };
    let u_inner = &a6.dot(&lin(13, 11, 9)) + &(&lin(7, 5, 3) + &id.mapv(|z| z * b(1)));
    let u = a1.dot(&u_inner);
    let v = &a6.dot(&lin(12, 10, 8)) + &(&lin(6, 4, 2) + &id.mapv(|z| z * b(0)));
    let mut r = lu_solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        r = r.dot(&r);
    }
    if !is_finite_matrix(&r) {
        return Err(Error::Overflow { norm: nrm.to_f64().unwrap_or(f64::INFINITY) });
    }
    Ok(r)
}
