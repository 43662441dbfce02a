//! Coupled-mode realizations with lossy auxiliary modes and their adiabatic
//! elimination onto the stub ribbon and the diamond ring.
//!
//! Amplitudes obey ẋ = −iMx with the generator M = H′ − (i/2)·diag(κ). Setting the
//! auxiliary derivatives to zero gives the Schur complement
//! M_eff = M_pp − M_pq M_qq⁻¹ M_qp on the primary modes.

use crate::error::{Error, Result};
use crate::linalg::{expm, inverse, norm2, scale_mat};
use crate::models::stub::{site_a, site_b, site_c};
use crate::models::{DiamondRingParams, StubRibbonParams};
use crate::{ComplexMatrix, ComplexVector, C64};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Stub ribbon whose A_n–B_n hopping is mediated by a lossy cavity D_n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticStubConfig {
    pub n: usize,
    /// B–C hopping.
    pub j: f64,
    pub j_ab: Vec<f64>,
    pub j_ad: Vec<f64>,
    pub j_bd: Vec<f64>,
    /// Phase on the A–D coupling.
    pub theta: f64,
    pub kappa_a: Vec<f64>,
    pub kappa_b: Vec<f64>,
    /// Length n − 1 (the last cell has no C site).
    pub kappa_c: Vec<f64>,
    pub kappa_d: Vec<f64>,
}

impl AdiabaticStubConfig {
    /// Realization of `target` at θ = π/2 with auxiliary decay `kappa_d` in every cell:
    /// J^{ab} ± J̃^{ab} = J^u, J^d and J^{ad} = J^{bd} = √(J̃ κ^d / 2).
    pub fn for_stub(target: &StubRibbonParams, kappa_d: f64) -> Result<Self> {
        target.validate()?;
        if !(kappa_d > 0.0) {
            return Err(Error::InvalidParameters(format!("auxiliary decay must be positive, got {kappa_d}")));
        }
        let down = target.down_hoppings();
        let n = target.n;
        let j_ab: Vec<f64> = (0..n).map(|k| 0.5 * (target.up_hoppings[k] + down[k])).collect();
        let tilde: Vec<f64> = (0..n).map(|k| 0.5 * (target.up_hoppings[k] - down[k])).collect();
        if tilde.iter().any(|&t| t < 0.0) {
            return Err(Error::InvalidParameters("down hopping larger than up hopping needs θ = −π/2".into()));
        }
        let g: Vec<f64> = tilde.iter().map(|&t| (t * kappa_d / 2.0).sqrt()).collect();
        Ok(Self {
            n,
            j: target.j,
            j_ab,
            j_ad: g.clone(),
            j_bd: g,
            theta: FRAC_PI_2,
            kappa_a: vec![0.0; n],
            kappa_b: vec![0.0; n],
            kappa_c: vec![0.0; n - 1],
            kappa_d: vec![kappa_d; n],
        })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n < 2 {
            return Err(Error::InvalidParameters("need at least two cells".into()));
        }
        let lens = [self.j_ab.len(), self.j_ad.len(), self.j_bd.len(), self.kappa_a.len(), self.kappa_b.len(), self.kappa_d.len()];
        if lens.iter().any(|&l| l != n) || self.kappa_c.len() != n - 1 {
            return Err(Error::InvalidParameters("per-cell lists must have length n (kappa_c: n − 1)".into()));
        }
        let all = self.j_ab.iter().chain(&self.j_ad).chain(&self.j_bd).chain(&self.kappa_a).chain(&self.kappa_b).chain(&self.kappa_c).chain(&self.kappa_d);
        if !all.clone().all(|x| x.is_finite()) || !self.j.is_finite() || !self.theta.is_finite() {
            return Err(Error::InvalidParameters("stub realization parameters must be finite".into()));
        }
        if self.kappa_a.iter().chain(&self.kappa_b).chain(&self.kappa_c).chain(&self.kappa_d).any(|&k| k < 0.0) {
            return Err(Error::InvalidParameters("decay rates must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn primary_dim(&self) -> usize {
        3 * self.n - 1
    }

    /// Auxiliary mode D_n sits after all primary modes.
    pub fn site_d(&self, cell: usize) -> usize {
        self.primary_dim() + cell - 1
    }

    pub fn aux_indices(&self) -> Vec<usize> {
        (1..=self.n).map(|k| self.site_d(k)).collect()
    }

    /// J̃_n^{ab} = 2J^{ad}J^{bd}/κ^d per cell.
    pub fn induced_hopping(&self) -> Vec<f64> {
        (0..self.n).map(|k| induced_coupling(self.j_ad[k], self.j_bd[k], self.kappa_d[k])).collect()
    }
}

/// J̃ = 2·g₁·g₂/κ.
pub fn induced_coupling(g1: f64, g2: f64, kappa: f64) -> f64 {
    2.0 * g1 * g2 / kappa
}

/// Diamond ring whose complex couplings are mediated by lossy modes f₁…f₄
/// (f₁: a–b, f₂: b–c, f₃: c–d, f₄: d–a).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticDiamondConfig {
    /// Direct couplings G₁ (a–b), G₂ (b–c), G₃ (c–d), G₄ (d–a).
    pub g: [f64; 4],
    /// G_x^{(1)} for x = a, b, c, d (carries the phase θ_x).
    pub g1: [f64; 4],
    /// G_x^{(2)} for x = a, b, c, d.
    pub g2: [f64; 4],
    pub theta: [f64; 4],
    pub kappa: [f64; 4],
    pub kappa_f: [f64; 4],
}

impl AdiabaticDiamondConfig {
    /// Realization of `target` with every auxiliary decay equal to `kappa_f`.
    /// Induced couplings G̃ are split as G^{(1)} = √(|G̃|κ_f/2), G^{(2)} = sign(G̃)·G^{(1)}.
    pub fn for_diamond(target: &DiamondRingParams, kappa_f: f64) -> Result<Self> {
        if !(kappa_f > 0.0) {
            return Err(Error::InvalidParameters(format!("auxiliary decay must be positive, got {kappa_f}")));
        }
        let k = target.kappa;
        let (g, tilde) = if target.epsilon_imaginary {
            let e = target.epsilon_magnitude;
            ([1.0, -e * k, e * k, 1.0], [k, e, -e, k])
        } else {
            let e = target.epsilon_magnitude;
            ([1.0, e, e, 1.0], [k, e * k, e * k, k])
        };
        // G̃₁ = 2G_a^{(1)}G_b^{(2)}/κ_f1, G̃₂ = 2G_b^{(1)}G_c^{(2)}/κ_f2, G̃₃ = 2G_c^{(1)}G_d^{(2)}/κ_f3, G̃₄ = 2G_d^{(1)}G_a^{(2)}/κ_f4.
        let split = |t: f64| {
            let m = (t.abs() * kappa_f / 2.0).sqrt();
            (m, if t < 0.0 { -m } else { m })
        };
        let mut g1 = [0.0; 4];
        let mut g2 = [0.0; 4];
        for (bond, &t) in tilde.iter().enumerate() {
            let (first, second) = split(t);
            g1[bond] = first;
            g2[(bond + 1) % 4] = second;
        }
        Ok(Self { g, g1, g2, theta: [PI, PI, 0.0, 0.0], kappa: [0.0; 4], kappa_f: [kappa_f; 4] })
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.g.iter().chain(&self.g1).chain(&self.g2).chain(&self.theta).chain(&self.kappa).chain(&self.kappa_f);
        if !all.clone().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameters("diamond realization parameters must be finite".into()));
        }
        if self.kappa.iter().chain(&self.kappa_f).any(|&k| k < 0.0) {
            return Err(Error::InvalidParameters("decay rates must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn aux_indices(&self) -> Vec<usize> {
        vec![4, 5, 6, 7]
    }

    /// G̃ per bond (a–b, b–c, c–d, d–a).
    pub fn induced_couplings(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|bond| induced_coupling(self.g1[bond], self.g2[(bond + 1) % 4], self.kappa_f[bond]))
    }
}

fn add_hermitian(h: &mut ComplexMatrix, i: usize, j: usize, v: C64) {
    h[[i, j]] += v;
    h[[j, i]] += v.conj();
}

/// Coherent part H′ (interaction picture) and per-mode decay rates of the stub realization.
/// Ordering: stub sites (A₁,B₁,C₁,…,A_N,B_N), then D₁…D_N.
pub fn build_full_stub(cfg: &AdiabaticStubConfig) -> Result<(ComplexMatrix, Vec<f64>)> {
    cfg.validate()?;
    let dim = cfg.primary_dim() + cfg.n;
    let mut h = Array2::zeros((dim, dim));
    let mut decay = vec![0.0; dim];
    let phase = C64::from_polar(1.0, cfg.theta);
    for k in 0..cfg.n {
        let (a, b, d) = (site_a(k + 1), site_b(k + 1), cfg.site_d(k + 1));
        add_hermitian(&mut h, a, b, C64::new(cfg.j_ab[k], 0.0));
        add_hermitian(&mut h, a, d, phase * cfg.j_ad[k]);
        add_hermitian(&mut h, b, d, C64::new(cfg.j_bd[k], 0.0));
        decay[a] = cfg.kappa_a[k];
        decay[b] = cfg.kappa_b[k];
        decay[d] = cfg.kappa_d[k];
        if k + 1 < cfg.n {
            let c = site_c(k + 1);
            add_hermitian(&mut h, c, b, C64::new(cfg.j, 0.0));
            add_hermitian(&mut h, c, site_b(k + 2), C64::new(cfg.j, 0.0));
            decay[c] = cfg.kappa_c[k];
        }
    }
    Ok((h, decay))
}

/// Coherent part and decay rates of the diamond realization, ordered (a, b, c, d, f₁…f₄).
pub fn build_full_diamond(cfg: &AdiabaticDiamondConfig) -> Result<(ComplexMatrix, Vec<f64>)> {
    cfg.validate()?;
    let mut h = Array2::zeros((8, 8));
    for bond in 0..4 {
        let (x, y, f) = (bond, (bond + 1) % 4, 4 + bond);
        // Bond a–b reads G₁a†b; bond d–a reads G₄d†a: both are x†y with y = x + 1 mod 4.
        add_hermitian(&mut h, x, y, C64::new(cfg.g[bond], 0.0));
        add_hermitian(&mut h, x, f, C64::from_polar(cfg.g1[x], cfg.theta[x]));
        add_hermitian(&mut h, y, f, C64::new(cfg.g2[y], 0.0));
    }
    let mut decay = cfg.kappa.to_vec();
    decay.extend_from_slice(&cfg.kappa_f);
    Ok((h, decay))
}

/// M = H′ − (i/2)·diag(κ).
pub fn generator(h: &ComplexMatrix, decay: &[f64]) -> Result<ComplexMatrix> {
    if decay.len() != h.nrows() || h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch(format!("{} decay rates for a {:?} matrix", decay.len(), h.dim())));
    }
    let mut m = h.clone();
    for (i, k) in decay.iter().enumerate() {
        m[[i, i]] -= C64::new(0.0, 0.5 * k);
    }
    Ok(m)
}

/// Primary indices in ascending order.
fn primary_indices(dim: usize, aux: &[usize]) -> Vec<usize> {
    (0..dim).filter(|i| !aux.contains(i)).collect()
}

/// Eliminates the modes `aux` from ẋ = −iMx by setting their derivatives to zero.
///
/// Returns the effective generator on the remaining modes (ascending index order),
/// bare primary decay included. With `include_induced_decay = false` the diagonal of
/// the elimination correction (the induced decays κ̃) is dropped, which is how the
/// ideal lattice models are obtained.
pub fn eliminate(h: &ComplexMatrix, decay: &[f64], aux: &[usize], include_induced_decay: bool) -> Result<ComplexMatrix> {
    let m = generator(h, decay)?;
    let dim = m.nrows();
    if let Some(&bad) = aux.iter().find(|&&q| q >= dim || !(decay[q] > 0.0)) {
        return Err(Error::InvalidParameters(format!("auxiliary mode {bad} needs a positive decay rate")));
    }
    let p = primary_indices(dim, aux);
    let sub = |rows: &[usize], cols: &[usize]| Array2::from_shape_fn((rows.len(), cols.len()), |(i, j)| m[[rows[i], cols[j]]]);
    let mqq_inv = inverse(&sub(aux, aux))?;
    let mut correction = sub(&p, aux).dot(&mqq_inv).dot(&sub(aux, &p));
    if !include_induced_decay {
        for i in 0..p.len() {
            correction[[i, i]] = C64::new(0.0, 0.0);
        }
    }
    Ok(&sub(&p, &p) - &correction)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationComparison {
    pub times: Vec<f64>,
    /// ‖P·x_full(t)/‖P·x_full‖ − x_eff(t)/‖x_eff‖‖ per time.
    pub errors: Vec<f64>,
    pub max_error: f64,
}

/// ‖a/‖a‖ − b/‖b‖‖.
fn normalized_distance(a: &ComplexVector, b: &ComplexVector) -> f64 {
    let (na, nb) = (norm2(a.view()), norm2(b.view()));
    a.iter().zip(b.iter()).map(|(x, y)| (x / na - y / nb).norm_sqr()).sum::<f64>().sqrt()
}

/// Evolves the full generator and the eliminated one from the same primary state and
/// reports the per-time distance between the normalized primary components.
pub fn compare_full_vs_effective(
    h: &ComplexMatrix,
    decay: &[f64],
    aux: &[usize],
    psi0_primary: &ComplexVector,
    times: &[f64],
    include_induced_decay: bool,
) -> Result<EliminationComparison> {
    let m = generator(h, decay)?;
    let eff = eliminate(h, decay, aux, include_induced_decay)?;
    let p = primary_indices(m.nrows(), aux);
    if psi0_primary.len() != p.len() {
        return Err(Error::DimensionMismatch(format!("primary state of length {} for {} primary modes", psi0_primary.len(), p.len())));
    }
    let mut full0 = Array1::zeros(m.nrows());
    for (k, &i) in p.iter().enumerate() {
        full0[i] = psi0_primary[k];
    }
    let mut errors = Vec::with_capacity(times.len());
    for &t in times {
        let xf = expm(&scale_mat(&m, C64::new(0.0, -t)))?.dot(&full0);
        let xe = expm(&scale_mat(&eff, C64::new(0.0, -t)))?.dot(psi0_primary);
        let proj: ComplexVector = p.iter().map(|&i| xf[i]).collect();
        errors.push(normalized_distance(&proj, &xe));
    }
    let max_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(EliminationComparison { times: times.to_vec(), errors, max_error })
}

/// Auxiliary-decay values of the convergence ladder, in units of J.
pub const DECAY_LADDER: [f64; 3] = [1e2, 1e3, 1e4];
