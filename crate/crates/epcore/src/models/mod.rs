//! Built-in models: the non-Hermitian stub ribbon and the PT-symmetric diamond ring.
//!
//! Basis orderings are fixed: stub (A₁,B₁,C₁,…,A_N,B_N), diamond (A,B,C,D).

pub mod diamond;
pub mod stub;

pub use diamond::{
    build_diamond, diamond_analytic_basis, diamond_eigenenergies, diamond_pt_operator, DiamondEp, DiamondRingParams,
};
pub use stub::{
    build_stub, stub_dispersion, stub_ep_basis, stub_eta, stub_flat_band_states, stub_gamma,
    stub_hermitian_counterpart, stub_periodic_ring, StubRibbonParams,
};

use crate::error::{Error, Result};
use crate::{ComplexMatrix, ComplexVector, C64};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

/// How the ket of a left partner is obtained from a labeled vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LeftPartner {
    /// The left vector is the listed ket itself: ⟨x|.
    Ket(String),
    /// The left vector is the complex conjugate of the listed ket: ⟨x*|, i.e. the bilinear form xᵀ·.
    Conjugate(String),
}

impl LeftPartner {
    pub fn label(&self) -> &str {
        match self {
            LeftPartner::Ket(s) | LeftPartner::Conjugate(s) => s,
        }
    }
}

/// One closure term |right⟩⟨left| / C of an analytic basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticPair {
    pub right: String,
    pub left: LeftPartner,
    /// Biorthogonal overlap C = ⟨left|right⟩; the tabulated norm is its principal square root.
    pub overlap: C64,
    pub eigenvalue: C64,
    /// Chain index within the basis and 1-based position of the right vector, for chain pairs.
    pub chain: Option<(usize, usize)>,
}

impl AnalyticPair {
    pub fn norm(&self) -> C64 {
        self.overlap.sqrt()
    }
}

/// Exact analytic vectors at an EP together with their left-partner assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticEpBasis {
    pub scenario: String,
    pub vectors: Vec<(String, ComplexVector)>,
    pub pairs: Vec<AnalyticPair>,
}

impl AnalyticEpBasis {
    pub fn vector(&self, label: &str) -> Result<&ComplexVector> {
        self.vectors
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::InvalidParameters(format!("no vector labeled {label}")))
    }

    /// Unnormalized ket whose adjoint is the left partner of `pair`.
    pub fn left_ket(&self, pair: &AnalyticPair) -> Result<ComplexVector> {
        Ok(match &pair.left {
            LeftPartner::Ket(l) => self.vector(l)?.clone(),
            LeftPartner::Conjugate(l) => self.vector(l)?.mapv(|z| z.conj()),
        })
    }

    /// Normalized (right, left ket) pairs: right/√C and left/conj(√C), so that ⟨left|right⟩ = 1.
    pub fn normalized_pairs(&self) -> Result<Vec<(ComplexVector, ComplexVector)>> {
        self.pairs
            .iter()
            .map(|p| {
                let s = p.norm();
                let r = self.vector(&p.right)?.mapv(|z| z / s);
                let l = self.left_ket(p)?.mapv(|z| z / s.conj());
                Ok((r, l))
            })
            .collect()
    }

    /// Σ |right⟩⟨left| over the normalized pairs.
    pub fn projector(&self) -> Result<ComplexMatrix> {
        let pairs = self.normalized_pairs()?;
        let n = pairs.first().map(|(r, _)| r.len()).unwrap_or(0);
        let mut p = Array2::zeros((n, n));
        for (r, l) in &pairs {
            for i in 0..n {
                for j in 0..n {
                    p[[i, j]] += r[i] * l[j].conj();
                }
            }
        }
        Ok(p)
    }
}

pub(crate) fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
