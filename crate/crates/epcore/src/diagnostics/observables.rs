//! Population ratios, symmetry residuals and entanglement-transfer fidelities.

use crate::error::{Error, Result};
use crate::linalg::{adjoint, inner, inverse, norm2, spectral_norm, CMatrix};
use crate::models::{build_diamond, DiamondEp, DiamondRingParams};
use crate::pcr::pcr_for;
use crate::propagator::{asymptotic_direction, evolve_closed_form, plan, Asymptotics};
use crate::ComplexVector;
use serde::{Deserialize, Serialize};

/// Populations at `sites` as percentages of their sum.
pub fn splitting_ratio(populations: &[f64], sites: &[usize]) -> Vec<f64> {
    let total: f64 = sites.iter().map(|&s| populations[s]).sum();
    sites.iter().map(|&s| 100.0 * populations[s] / total).collect()
}

/// Symmetry operators to test; absent ones are skipped.
#[derive(Debug, Clone, Default)]
pub struct SymmetryOperators {
    /// η with η⁻¹Hη = H†.
    pub eta: Option<CMatrix<f64>>,
    /// Γ with ΓHΓ⁻¹ = −H.
    pub gamma: Option<CMatrix<f64>>,
    /// 𝒫 with 𝒫·conj(H)·𝒫⁻¹ = H.
    pub parity: Option<CMatrix<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SymmetryResiduals {
    pub pseudo_hermiticity: Option<f64>,
    pub chiral: Option<f64>,
    pub pt: Option<f64>,
}

impl SymmetryResiduals {
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        [("pseudo_hermiticity", self.pseudo_hermiticity), ("chiral", self.chiral), ("pt", self.pt)]
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k, v)))
            .collect()
    }

    pub fn max(&self) -> f64 {
        self.named().iter().map(|p| p.1).fold(0.0, f64::max)
    }
}

fn check_dim(h: &CMatrix<f64>, op: &CMatrix<f64>, name: &str) -> Result<()> {
    if op.dim() != h.dim() {
        return Err(Error::DimensionMismatch(format!("{name} operator {:?} for matrix {:?}", op.dim(), h.dim())));
    }
    Ok(())
}

/// Spectral-norm residuals ‖η⁻¹Hη − H†‖, ‖ΓHΓ⁻¹ + H‖ and ‖𝒫 conj(H) 𝒫⁻¹ − H‖.
pub fn symmetry_residuals(h: &CMatrix<f64>, ops: &SymmetryOperators) -> Result<SymmetryResiduals> {
    let mut out = SymmetryResiduals::default();
    if let Some(eta) = &ops.eta {
        check_dim(h, eta, "eta")?;
        out.pseudo_hermiticity = Some(spectral_norm(&(&inverse(eta)?.dot(h).dot(eta) - &adjoint(h)))?);
    }
    if let Some(g) = &ops.gamma {
        check_dim(h, g, "gamma")?;
        out.chiral = Some(spectral_norm(&(&g.dot(h).dot(&inverse(g)?) + h))?);
    }
    if let Some(p) = &ops.parity {
        check_dim(h, p, "parity")?;
        let hc = h.mapv(|z| z.conj());
        out.pt = Some(spectral_norm(&(&p.dot(&hc).dot(&inverse(p)?) - h))?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferFidelities {
    pub times: Vec<f64>,
    /// |⟨Ψ′(0)|Ψ′(t)⟩|².
    pub initial_form: Vec<f64>,
    /// |⟨target|Ψ′(t)⟩|² with the long-time direction as target.
    pub target_form: Vec<f64>,
    pub target: ComplexVector,
}

/// Fidelities of the normalized closed-form evolution against the initial state and
/// against its long-time direction. `params` must sit at a tabulated EP.
pub fn entanglement_transfer_fidelities(params: &DiamondRingParams, psi0: &ComplexVector, times: &[f64]) -> Result<TransferFidelities> {
    DiamondEp::classify(params)?;
    let h = build_diamond(params)?;
    let basis = pcr_for(&h)?;
    let pl = plan(&basis, psi0)?;
    let target = match asymptotic_direction(&pl)? {
        Asymptotics::Converges { direction, .. } => direction,
        Asymptotics::Bounded => {
            let n = norm2(psi0.view());
            psi0.mapv(|z| z / n)
        }
        Asymptotics::PerChain { .. } => {
            return Err(Error::ScenarioMismatch("top-degree chains at distinct eigenvalues".into()));
        }
    };
    let n0 = norm2(psi0.view());
    let start = psi0.mapv(|z| z / n0);
    let mut initial_form = Vec::with_capacity(times.len());
    let mut target_form = Vec::with_capacity(times.len());
    for &t in times {
        let psi = evolve_closed_form(&pl, t);
        let n = norm2(psi.view());
        let psi = psi.mapv(|z| z / n);
        initial_form.push(inner(start.view(), psi.view()).norm_sqr());
        target_form.push(inner(target.view(), psi.view()).norm_sqr());
    }
    Ok(TransferFidelities { times: times.to_vec(), initial_form, target_form, target })
}
