//! Non-Hermitian stub ribbon with nonreciprocal A–B hoppings.

use super::{AnalyticEpBasis, AnalyticPair, LeftPartner};
use crate::error::{Error, Result};
use crate::linalg::{eig_general, inverse};
use crate::{ComplexMatrix, ComplexVector, C64};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

/// Stub ribbon parameters. `J_n^d = λ·J_n^u`; λ = 1 is the Hermitian limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StubRibbonParams {
    pub n: usize,
    pub j: f64,
    pub up_hoppings: Vec<f64>,
    pub lambda: f64,
}

impl StubRibbonParams {
    pub fn uniform(n: usize, j: f64, up: f64, lambda: f64) -> Self {
        Self { n, j, up_hoppings: vec![up; n], lambda }
    }

    /// `J_n^u = √n·J`.
    pub fn sqrt_profile(n: usize, j: f64, lambda: f64) -> Self {
        Self { n, j, up_hoppings: (1..=n).map(|k| (k as f64).sqrt() * j).collect(), lambda }
    }

    pub fn dim(&self) -> usize {
        3 * self.n - 1
    }

    pub fn down_hoppings(&self) -> Vec<f64> {
        self.up_hoppings.iter().map(|u| self.lambda * u).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameters(format!("stub ribbon needs N >= 2, got {}", self.n)));
        }
        if self.up_hoppings.len() != self.n {
            return Err(Error::InvalidParameters(format!(
                "expected {} up hoppings, got {}",
                self.n,
                self.up_hoppings.len()
            )));
        }
        if !self.up_hoppings.iter().all(|u| u.is_finite() && *u > 0.0) {
            return Err(Error::InvalidParameters("up hoppings must be finite and positive".into()));
        }
        if !self.j.is_finite() || self.j == 0.0 || !self.lambda.is_finite() {
            return Err(Error::InvalidParameters("J must be finite and nonzero, lambda finite".into()));
        }
        Ok(())
    }
}

pub fn site_a(n: usize) -> usize {
    3 * (n - 1)
}

pub fn site_b(n: usize) -> usize {
    3 * (n - 1) + 1
}

pub fn site_c(n: usize) -> usize {
    3 * (n - 1) + 2
}

/// Site labels in basis order.
pub fn stub_labels(n: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(3 * n - 1);
    for k in 1..=n {
        out.push(format!("A{k}"));
        out.push(format!("B{k}"));
        if k < n {
            out.push(format!("C{k}"));
        }
    }
    out
}

fn assemble(p: &StubRibbonParams, ab: impl Fn(usize) -> (f64, f64)) -> ComplexMatrix {
    let d = p.dim();
    let mut h = Array2::zeros((d, d));
    for k in 1..=p.n {
        let (up, down) = ab(k - 1);
        h[[site_a(k), site_b(k)]] = C64::new(up, 0.0);
        h[[site_b(k), site_a(k)]] = C64::new(down, 0.0);
        if k < p.n {
            let jj = C64::new(p.j, 0.0);
            h[[site_b(k), site_c(k)]] = jj;
            h[[site_c(k), site_b(k)]] = jj;
            h[[site_c(k), site_b(k + 1)]] = jj;
            h[[site_b(k + 1), site_c(k)]] = jj;
        }
    }
    h
}

/// Hamiltonian on (A₁,B₁,C₁,…,A_N,B_N): ⟨A_n|H|B_n⟩ = J_n^u, ⟨B_n|H|A_n⟩ = J_n^d,
/// reciprocal B–C hoppings J inside and between cells.
pub fn build_stub(p: &StubRibbonParams) -> Result<ComplexMatrix> {
    p.validate()?;
    let down = p.down_hoppings();
    Ok(assemble(p, |k| (p.up_hoppings[k], down[k])))
}

fn require_positive_lambda(p: &StubRibbonParams) -> Result<()> {
    p.validate()?;
    if p.lambda <= 0.0 {
        return Err(Error::InvalidParameters(format!(
            "metric and Hermitian counterpart need lambda > 0, got {}",
            p.lambda
        )));
    }
    Ok(())
}

fn diagonal(values: &[f64]) -> ComplexMatrix {
    let mut m = Array2::zeros((values.len(), values.len()));
    for (i, v) in values.iter().enumerate() {
        m[[i, i]] = C64::new(*v, 0.0);
    }
    m
}

fn eta_diagonal(p: &StubRibbonParams) -> Vec<f64> {
    let mut d = vec![1.0; p.dim()];
    for k in 1..=p.n {
        d[site_a(k)] = 1.0 / p.lambda;
    }
    d
}

/// Pseudo-Hermiticity metric η with η⁻¹Hη = H†: J_n^u/J_n^d on A sites, 1 elsewhere.
pub fn stub_eta(p: &StubRibbonParams) -> Result<ComplexMatrix> {
    require_positive_lambda(p)?;
    Ok(diagonal(&eta_diagonal(p)))
}

/// Chiral operator Γ = diag(1, −1, 1, …, 1, −1) with ΓHΓ⁻¹ = −H.
pub fn stub_gamma(p: &StubRibbonParams) -> Result<ComplexMatrix> {
    p.validate()?;
    let d: Vec<f64> = (0..p.dim()).map(|i| if i % 3 == 1 { -1.0 } else { 1.0 }).collect();
    Ok(diagonal(&d))
}

/// Hermitian stub with A–B hoppings √(J_n^u J_n^d); equals S⁻¹HS for S = √η.
pub fn stub_hermitian_counterpart(p: &StubRibbonParams) -> Result<ComplexMatrix> {
    require_positive_lambda(p)?;
    let down = p.down_hoppings();
    Ok(assemble(p, |k| {
        let g = (p.up_hoppings[k] * down[k]).sqrt();
        (g, g)
    }))
}

/// Similarity S = √η mapping H to its Hermitian counterpart.
pub fn stub_similarity(p: &StubRibbonParams) -> Result<ComplexMatrix> {
    require_positive_lambda(p)?;
    let d: Vec<f64> = eta_diagonal(p).iter().map(|x| x.sqrt()).collect();
    Ok(diagonal(&d))
}

/// Zero-energy compact localized states ξ_l = A_l/J_l^d + A_{l+1}/J_{l+1}^d − C_l/J, l = 1..N−1.
pub fn stub_flat_band_states(p: &StubRibbonParams) -> Result<Vec<ComplexVector>> {
    require_positive_lambda(p)?;
    let down = p.down_hoppings();
    Ok(xi_like(p, &down))
}

fn xi_like(p: &StubRibbonParams, hop: &[f64]) -> Vec<ComplexVector> {
    (1..p.n)
        .map(|l| {
            let mut v = Array1::zeros(p.dim());
            v[site_a(l)] = C64::new(1.0 / hop[l - 1], 0.0);
            v[site_a(l + 1)] = C64::new(1.0 / hop[l], 0.0);
            v[site_c(l)] = C64::new(-1.0 / p.j, 0.0);
            v
        })
        .collect()
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Analytic EP basis at λ = 0.
///
/// Labeled vectors: `xi_l`, `xi_tilde_l`, `rho_tilde_l` (l = 1..N−1), `chi`, `chi_a`,
/// `chi_tilde`, `chi_tilde_a`, the normalized `nu`, `nu_a`, `nu_tilde`, `nu_tilde_a`,
/// `mu_l`, `mu_tilde_l`, and bulk pairs `omega_f`, `omega_tilde_f` (f = 1..2N−2)
/// built numerically as the dual basis of the nonzero-energy eigenvectors.
/// Pairs: ν⟨ν̃_a| + ν_a⟨ν̃| + Σ μ_l⟨μ̃_l| + Σ ω_f⟨ω̃_f| = I.
pub fn stub_ep_basis(p: &StubRibbonParams) -> Result<AnalyticEpBasis> {
    p.validate()?;
    if p.lambda != 0.0 {
        return Err(Error::InvalidParameters(format!("EP basis needs lambda = 0, got {}", p.lambda)));
    }
    let n = p.n;
    let dim = p.dim();
    let ju = &p.up_hoppings;
    let re = |x: f64| C64::new(x, 0.0);
    let root_n = (n as f64).sqrt();
    let mut vectors: Vec<(String, ComplexVector)> = Vec::new();

    let xi_tilde = xi_like(p, ju);
    let mut xi = Vec::new();
    for l in 1..n {
        let mut v = Array1::zeros(dim);
        v[site_a(l + 1)] = re(1.0);
        xi.push(v);
    }
    let rho_tilde: Vec<ComplexVector> = (1..n)
        .map(|l| {
            let mut v = Array1::zeros(dim);
            for s in 1..=l {
                v = v + &xi_tilde[s - 1].mapv(|z| z * sign(l + s));
            }
            v
        })
        .collect();

    let mut chi = Array1::zeros(dim);
    let mut chi_a = Array1::zeros(dim);
    for k in 1..=n {
        chi[site_a(k)] = re(sign(k + 1) * ju[k - 1]);
        chi_a[site_b(k)] = re(sign(k + 1));
    }
    let chi_tilde = chi_a.clone();
    let mut chi_tilde_a = Array1::zeros(dim);
    chi_tilde_a[site_a(1)] = re(n as f64 / ju[0]);
    for k in 1..n {
        chi_tilde_a[site_c(k)] = re(sign(k) * (n - k) as f64 / p.j);
    }

    let scale = |v: &ComplexVector, s: f64| v.mapv(|z| z * s);
    let nu = scale(&chi, 1.0 / root_n);
    let nu_a = scale(&chi_a, 1.0 / root_n);
    let nu_tilde = scale(&chi_tilde, 1.0 / root_n);
    let nu_tilde_a = scale(&chi_tilde_a, 1.0 / root_n);
    let mu: Vec<ComplexVector> = (1..n).map(|l| scale(&xi[l - 1], ju[l].sqrt())).collect();
    let mu_tilde: Vec<ComplexVector> = (1..n).map(|l| scale(&rho_tilde[l - 1], ju[l].sqrt())).collect();

    for l in 1..n {
        vectors.push((format!("xi_{l}"), xi[l - 1].clone()));
        vectors.push((format!("xi_tilde_{l}"), xi_tilde[l - 1].clone()));
        vectors.push((format!("rho_tilde_{l}"), rho_tilde[l - 1].clone()));
    }
    vectors.push(("chi".into(), chi));
    vectors.push(("chi_a".into(), chi_a));
    vectors.push(("chi_tilde".into(), chi_tilde));
    vectors.push(("chi_tilde_a".into(), chi_tilde_a));

    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let mut pairs = vec![
        AnalyticPair {
            right: "nu".into(),
            left: LeftPartner::Ket("nu_tilde_a".into()),
            overlap: one,
            eigenvalue: zero,
            chain: Some((0, 1)),
        },
        AnalyticPair {
            right: "nu_a".into(),
            left: LeftPartner::Ket("nu_tilde".into()),
            overlap: one,
            eigenvalue: zero,
            chain: Some((0, 2)),
        },
    ];
    for l in 1..n {
        pairs.push(AnalyticPair {
            right: format!("mu_{l}"),
            left: LeftPartner::Ket(format!("mu_tilde_{l}")),
            overlap: one,
            eigenvalue: zero,
            chain: None,
        });
    }

    // Bulk modes: dual basis of [zero-energy vectors | nonzero-energy eigenvectors].
    let h = build_stub(p)?;
    let spec = eig_general(&h)?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| spec.eigenvalues[b].norm().total_cmp(&spec.eigenvalues[a].norm()).then(a.cmp(&b)));
    let mut bulk: Vec<usize> = order[..dim - (n + 1)].to_vec();
    bulk.sort_unstable();
    let mut frame = Array2::zeros((dim, dim));
    let mut cols: Vec<ComplexVector> = vec![nu.clone(), nu_a.clone()];
    cols.extend(mu.iter().cloned());
    for &k in &bulk {
        cols.push(spec.right_vectors.column(k).to_owned());
    }
    for (j, c) in cols.iter().enumerate() {
        frame.column_mut(j).assign(c);
    }
    let dual = inverse(&frame)?;
    for (f, &k) in bulk.iter().enumerate() {
        let col = n + 1 + f;
        let omega = cols[col].clone();
        let omega_tilde: ComplexVector = dual.row(col).mapv(|z| z.conj());
        vectors.push((format!("omega_{}", f + 1), omega));
        vectors.push((format!("omega_tilde_{}", f + 1), omega_tilde));
        pairs.push(AnalyticPair {
            right: format!("omega_{}", f + 1),
            left: LeftPartner::Ket(format!("omega_tilde_{}", f + 1)),
            overlap: one,
            eigenvalue: spec.eigenvalues[k],
            chain: None,
        });
    }

    vectors.push(("nu".into(), nu));
    vectors.push(("nu_a".into(), nu_a));
    vectors.push(("nu_tilde".into(), nu_tilde));
    vectors.push(("nu_tilde_a".into(), nu_tilde_a));
    for l in 1..n {
        vectors.push((format!("mu_{l}"), mu[l - 1].clone()));
        vectors.push((format!("mu_tilde_{l}"), mu_tilde[l - 1].clone()));
    }
    Ok(AnalyticEpBasis { scenario: format!("stub N={n} lambda=0"), vectors, pairs })
}

/// Bands of the periodic Hermitian stub with A–B hopping Λ: {−E, 0, E}, E = √(Λ² + 2J²(1 + cos k)).
pub fn stub_dispersion(k: f64, lambda_hop: f64, j: f64) -> [f64; 3] {
    let e = (lambda_hop * lambda_hop + 2.0 * j * j * (1.0 + k.cos())).sqrt();
    [-e, 0.0, e]
}

/// Real-space periodic Hermitian stub ring with `cells` unit cells (A,B,C per cell).
pub fn stub_periodic_ring(cells: usize, lambda_hop: f64, j: f64) -> Result<ComplexMatrix> {
    if cells < 2 {
        return Err(Error::InvalidParameters("ring needs at least two cells".into()));
    }
    let d = 3 * cells;
    let mut h = Array2::zeros((d, d));
    let mut link = |a: usize, b: usize, v: f64| {
        h[[a, b]] += C64::new(v, 0.0);
        h[[b, a]] += C64::new(v, 0.0);
    };
    for c in 0..cells {
        let (a, b, cc) = (3 * c, 3 * c + 1, 3 * c + 2);
        let next_b = 3 * ((c + 1) % cells) + 1;
        link(a, b, lambda_hop);
        link(b, cc, j);
        link(cc, next_b, j);
    }
    Ok(h)
}
