//! Numerical tolerances, resolved against the scale of a concrete matrix.

use crate::linalg::{default_rank_tol, frobenius, CMatrix};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Tolerances used by structure detection, PCR construction and the propagator.
///
/// Absolute values are already multiplied by `scale = max(1, ‖H‖_F)`;
/// `norm_tol` and `coeff_tol` are relative factors (see field docs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances<T> {
    pub scale: T,
    /// Relative rank threshold; powers `(H−c)^k` are judged against `rank_tol·scale^k`.
    pub rank_tol: T,
    /// Single-linkage radius for eigenvalue clustering.
    pub cluster_tol: T,
    /// Radius within which clusters may be merged if the union is numerically nilpotent.
    pub merge_radius: T,
    pub chain_residual_tol: T,
    /// `|C|` must exceed `norm_tol·scale^L` for a chain of length `L`.
    pub norm_tol: T,
    pub closure_tol: T,
    pub orthonormality_tol: T,
    /// Prefactors below `coeff_tol·‖ψ0‖` count as switched off.
    pub coeff_tol: T,
    pub reality_tol: T,
}

/// Maps a double-precision default onto the working precision, keeping the same
/// fraction of available digits (`x` itself for `f64`).
pub fn precision_adjusted<T: Real>(x: f64) -> T {
    let ratio = T::epsilon().to_f64().unwrap_or(f64::EPSILON).ln() / f64::EPSILON.ln();
    if (ratio - 1.0).abs() < 1e-12 {
        T::lit(x)
    } else {
        T::lit(x.powf(ratio))
    }
}

impl<T: Real> Tolerances<T> {
    pub fn for_matrix(h: &CMatrix<T>) -> Self {
        let scale = T::one().max(frobenius(h));
        Self {
            scale,
            rank_tol: default_rank_tol(h.nrows()),
            cluster_tol: precision_adjusted::<T>(1e-7) * scale,
            merge_radius: precision_adjusted::<T>(1e-3) * scale,
            chain_residual_tol: precision_adjusted::<T>(1e-8) * scale,
            norm_tol: precision_adjusted(1e-10),
            closure_tol: precision_adjusted(1e-8),
            orthonormality_tol: precision_adjusted(1e-8),
            coeff_tol: precision_adjusted(1e-10),
            reality_tol: precision_adjusted::<T>(1e-9) * scale,
        }
    }

    pub fn with_rank_tol(mut self, rank_tol: T) -> Self {
        self.rank_tol = rank_tol;
        self
    }

    pub fn with_cluster_tol(mut self, cluster_tol: T) -> Self {
        self.cluster_tol = cluster_tol;
        self
    }

    /// Singular-value threshold for deciding nullity of the k-th power.
    pub fn power_threshold(&self, k: usize) -> T {
        self.rank_tol * self.scale.powi(k as i32)
    }

    /// Converts every field to another precision.
    pub fn cast<U: Real>(&self) -> Tolerances<U> {
        let f = |x: T| U::lit(x.to_f64().unwrap_or(f64::NAN));
        Tolerances {
            scale: f(self.scale),
            rank_tol: f(self.rank_tol),
            cluster_tol: f(self.cluster_tol),
            merge_radius: f(self.merge_radius),
            chain_residual_tol: f(self.chain_residual_tol),
            norm_tol: f(self.norm_tol),
            closure_tol: f(self.closure_tol),
            orthonormality_tol: f(self.orthonormality_tol),
            coeff_tol: f(self.coeff_tol),
            reality_tol: f(self.reality_tol),
        }
    }
}
