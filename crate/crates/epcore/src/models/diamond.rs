//! PT-symmetric diamond ring on (A, B, C, D) with complex couplings G± = 1 ± iκ.

use super::{c64, AnalyticEpBasis, AnalyticPair, LeftPartner};
use crate::error::{Error, Result};
use crate::{ComplexMatrix, ComplexVector, C64};
use ndarray::{arr1, Array2};
use serde::{Deserialize, Serialize};

const EXACT: f64 = 1e-12;

/// Diamond-ring parameters. ε is real (`epsilon_imaginary = false`) or purely
/// imaginary, ε = i·`epsilon_magnitude`; the flag removes the ambiguity at ε = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiamondRingParams {
    pub epsilon_imaginary: bool,
    /// Signed real coefficient of ε (ε = m or ε = i·m).
    pub epsilon_magnitude: f64,
    pub kappa: f64,
}

impl DiamondRingParams {
    pub fn real(epsilon: f64, kappa: f64) -> Self {
        Self { epsilon_imaginary: false, epsilon_magnitude: epsilon, kappa }
    }

    pub fn imaginary(epsilon_im: f64, kappa: f64) -> Self {
        Self { epsilon_imaginary: true, epsilon_magnitude: epsilon_im, kappa }
    }

    /// Accepts a complex ε only if it is real or purely imaginary.
    pub fn from_complex(epsilon: C64, kappa: f64) -> Result<Self> {
        if epsilon.im == 0.0 {
            Ok(Self::real(epsilon.re, kappa))
        } else if epsilon.re == 0.0 {
            Ok(Self::imaginary(epsilon.im, kappa))
        } else {
            Err(Error::InvalidParameters(format!("epsilon must be real or purely imaginary, got {epsilon}")))
        }
    }

    pub fn epsilon(&self) -> C64 {
        if self.epsilon_imaginary {
            c64(0.0, self.epsilon_magnitude)
        } else {
            c64(self.epsilon_magnitude, 0.0)
        }
    }

    /// ϑ = 1 for real ε, −1 for imaginary ε.
    pub fn theta(&self) -> f64 {
        if self.epsilon_imaginary {
            -1.0
        } else {
            1.0
        }
    }

    fn validate(&self) -> Result<()> {
        if self.epsilon_magnitude.is_finite() && self.kappa.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameters("diamond parameters must be finite".into()))
        }
    }
}

pub fn diamond_labels() -> Vec<String> {
    ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect()
}

/// H = [[0, G+, 0, G−], [G+, 0, εG+, 0], [0, εG+, 0, εG−], [G−, 0, εG−, 0]].
pub fn build_diamond(p: &DiamondRingParams) -> Result<ComplexMatrix> {
    p.validate()?;
    let gp = c64(1.0, p.kappa);
    let gm = c64(1.0, -p.kappa);
    let e = p.epsilon();
    let z = c64(0.0, 0.0);
    let rows = [[z, gp, z, gm], [gp, z, e * gp, z], [z, e * gp, z, e * gm], [gm, z, e * gm, z]];
    Ok(Array2::from_shape_fn((4, 4), |(i, j)| rows[i][j]))
}

/// Parity 𝒫 = diag(1, 1, ϑ, 1)·(B ↔ D); PT symmetry reads 𝒫·conj(H)·𝒫⁻¹ = H.
pub fn diamond_pt_operator(p: &DiamondRingParams) -> Result<ComplexMatrix> {
    p.validate()?;
    let mut m = Array2::zeros((4, 4));
    m[[0, 0]] = c64(1.0, 0.0);
    m[[1, 3]] = c64(1.0, 0.0);
    m[[2, 2]] = c64(p.theta(), 0.0);
    m[[3, 1]] = c64(1.0, 0.0);
    Ok(m)
}

/// E₁,₂ = ±i√(2(1+ε²)(κ²−1)) (principal root), E₃ = E₄ = 0.
pub fn diamond_eigenenergies(p: &DiamondRingParams) -> Result<[C64; 4]> {
    p.validate()?;
    let e = p.epsilon();
    // ε² is real for admissible ε, so the radicand is real; take the principal root explicitly.
    let x = 2.0 * (1.0 + (e * e).re) * (p.kappa * p.kappa - 1.0);
    let root = if x >= 0.0 { c64(x.sqrt(), 0.0) } else { c64(0.0, (-x).sqrt()) };
    let i = c64(0.0, 1.0);
    let z = c64(0.0, 0.0);
    Ok([i * root, -i * root, z, z])
}

/// The tabulated EP parameter points of the diamond ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiamondEp {
    /// Third-order EP plus a zero mode, κ = 1 (ε ≠ ±i).
    ThirdOrderKappaOne,
    /// Third-order EP plus a zero mode, κ = −1 (ε ≠ ±i).
    ThirdOrderKappaMinusOne,
    /// Third-order EP plus a zero mode, ε = i (κ ≠ ±1).
    ThirdOrderEpsilonI,
    /// Third-order EP plus a zero mode, ε = −i (κ ≠ ±1).
    ThirdOrderEpsilonMinusI,
    /// Two degenerate second-order EPs, ε = i, κ = 1.
    DoubleEpsilonIKappaOne,
    /// Two degenerate second-order EPs, ε = i, κ = −1.
    DoubleEpsilonIKappaMinusOne,
    /// Two degenerate second-order EPs, ε = −i, κ = 1.
    DoubleEpsilonMinusIKappaOne,
    /// Two degenerate second-order EPs, ε = −i, κ = −1.
    DoubleEpsilonMinusIKappaMinusOne,
}

impl DiamondEp {
    pub fn classify(p: &DiamondRingParams) -> Result<Self> {
        p.validate()?;
        let eps_pm_i = if p.epsilon_imaginary && (p.epsilon_magnitude - 1.0).abs() <= EXACT {
            Some(1)
        } else if p.epsilon_imaginary && (p.epsilon_magnitude + 1.0).abs() <= EXACT {
            Some(-1)
        } else {
            None
        };
        let kappa_pm_one = if (p.kappa - 1.0).abs() <= EXACT {
            Some(1)
        } else if (p.kappa + 1.0).abs() <= EXACT {
            Some(-1)
        } else {
            None
        };
        use DiamondEp::*;
        match (eps_pm_i, kappa_pm_one) {
            (Some(1), Some(1)) => Ok(DoubleEpsilonIKappaOne),
            (Some(1), Some(_)) => Ok(DoubleEpsilonIKappaMinusOne),
            (Some(_), Some(1)) => Ok(DoubleEpsilonMinusIKappaOne),
            (Some(_), Some(_)) => Ok(DoubleEpsilonMinusIKappaMinusOne),
            (Some(1), None) => Ok(ThirdOrderEpsilonI),
            (Some(_), None) => Ok(ThirdOrderEpsilonMinusI),
            (None, Some(1)) => Ok(ThirdOrderKappaOne),
            (None, Some(_)) => Ok(ThirdOrderKappaMinusOne),
            (None, None) => Err(Error::ScenarioMismatch(format!(
                "diamond ring at epsilon={}, kappa={} is not a tabulated EP",
                p.epsilon(),
                p.kappa
            ))),
        }
    }

    pub fn is_double(&self) -> bool {
        matches!(
            self,
            DiamondEp::DoubleEpsilonIKappaOne
                | DiamondEp::DoubleEpsilonIKappaMinusOne
                | DiamondEp::DoubleEpsilonMinusIKappaOne
                | DiamondEp::DoubleEpsilonMinusIKappaMinusOne
        )
    }
}

fn v4(a: C64, b: C64, c: C64, d: C64) -> ComplexVector {
    arr1(&[a, b, c, d])
}

fn pair(right: &str, left: &str, overlap: C64, chain: Option<(usize, usize)>) -> AnalyticPair {
    AnalyticPair {
        right: right.into(),
        left: LeftPartner::Conjugate(left.into()),
        overlap,
        eigenvalue: c64(0.0, 0.0),
        chain,
    }
}

/// Exact eigenstates, generalized eigenstates and left partners at a tabulated EP.
///
/// Since Hᵀ = H, the left partner of a ket x is ⟨x*|, evaluated as the bilinear form xᵀ·.
/// Third-order scenarios use labels `psi1`, `psi2`, `psi3`, `phi3` (the chain top
/// redefined for biorthogonality) and `phi`; double scenarios use `psi1_1`, `psi2_1`,
/// `phi2_1`, `psi1_2`, `psi2_2`, `phi2_2`.
pub fn diamond_analytic_basis(p: &DiamondRingParams) -> Result<AnalyticEpBasis> {
    let scenario = DiamondEp::classify(p)?;
    let z = c64(0.0, 0.0);
    let one = c64(1.0, 0.0);
    let i = c64(0.0, 1.0);
    let e = p.epsilon();
    let k = p.kappa;
    use DiamondEp::*;
    let (vectors, pairs): (Vec<(&str, ComplexVector)>, Vec<AnalyticPair>) = match scenario {
        ThirdOrderKappaOne | ThirdOrderKappaMinusOne => {
            let s = if scenario == ThirdOrderKappaOne { 1.0 } else { -1.0 };
            let q = one + e * e;
            let c = c64(0.0, -2.0 * s) * q;
            let w = c64(1.0, -s);
            let vectors = vec![
                ("psi1", v4(z, q * 2.0, z, c64(0.0, -2.0 * s) * q)),
                ("psi2", v4(w, z, e * w, z)),
                ("psi3", v4(z, z, z, one)),
                ("phi3", v4(z, c64(0.0, -s), z, z)),
                ("phi", v4(-e, z, one, z)),
            ];
            let pairs = vec![
                pair("psi1", "psi3", c, Some((0, 1))),
                pair("psi2", "psi2", c, Some((0, 2))),
                pair("phi3", "psi1", c, Some((0, 3))),
                pair("phi", "phi", q, None),
            ];
            (vectors, pairs)
        }
        ThirdOrderEpsilonI | ThirdOrderEpsilonMinusI => {
            let s = if scenario == ThirdOrderEpsilonI { 1.0 } else { -1.0 };
            let q = k * k - 1.0;
            let c = c64(2.0 * q, 0.0);
            let vectors = vec![
                ("psi1", v4(c64(0.0, -2.0 * q), z, c64(2.0 * s * q, 0.0), z)),
                ("psi2", v4(z, c64(-k, 1.0), z, c64(k, 1.0))),
                ("psi3", v4(z, z, c64(s, 0.0), z)),
                ("phi3", v4(i, z, z, z)),
                ("phi", v4(z, c64(k, 1.0), z, c64(k, -1.0))),
            ];
            let pairs = vec![
                pair("psi1", "psi3", c, Some((0, 1))),
                pair("psi2", "psi2", c, Some((0, 2))),
                pair("phi3", "psi1", c, Some((0, 3))),
                pair("phi", "phi", c, None),
            ];
            (vectors, pairs)
        }
        _ => {
            let r = |x: f64| c64(x, 0.0);
            let im = |x: f64| c64(0.0, x);
            let (vectors, c) = match scenario {
                DoubleEpsilonIKappaOne => (
                    vec![
                        ("psi1_1", v4(z, im(2.0), z, r(2.0))),
                        ("psi2_1", v4(r(1.0), z, r(1.0), z)),
                        ("phi2_1", v4(im(1.0), z, im(-1.0), z)),
                        ("psi1_2", v4(im(-2.0), z, r(2.0), z)),
                        ("psi2_2", v4(z, r(-1.0), z, r(1.0))),
                        ("phi2_2", v4(z, im(-1.0), z, im(-1.0))),
                    ],
                    c64(2.0, -2.0),
                ),
                DoubleEpsilonIKappaMinusOne => (
                    vec![
                        ("psi1_1", v4(z, im(-2.0), z, r(2.0))),
                        ("psi2_1", v4(r(1.0), z, r(-1.0), z)),
                        ("phi2_1", v4(im(-1.0), z, im(-1.0), z)),
                        ("psi1_2", v4(im(-2.0), z, r(2.0), z)),
                        ("psi2_2", v4(z, r(1.0), z, r(-1.0))),
                        ("phi2_2", v4(z, im(-1.0), z, im(-1.0))),
                    ],
                    c64(-2.0, -2.0),
                ),
                DoubleEpsilonMinusIKappaOne => (
                    vec![
                        ("psi1_1", v4(z, im(2.0), z, r(2.0))),
                        ("psi2_1", v4(r(1.0), z, r(-1.0), z)),
                        ("phi2_1", v4(im(1.0), z, im(1.0), z)),
                        ("psi1_2", v4(im(2.0), z, r(2.0), z)),
                        ("psi2_2", v4(z, r(1.0), z, r(-1.0))),
                        ("phi2_2", v4(z, im(1.0), z, im(1.0))),
                    ],
                    c64(-2.0, 2.0),
                ),
                _ => (
                    vec![
                        ("psi1_1", v4(z, im(-2.0), z, r(2.0))),
                        ("psi2_1", v4(r(1.0), z, r(1.0), z)),
                        ("phi2_1", v4(im(-1.0), z, im(1.0), z)),
                        ("psi1_2", v4(im(2.0), z, r(2.0), z)),
                        ("psi2_2", v4(z, r(-1.0), z, r(1.0))),
                        ("phi2_2", v4(z, im(1.0), z, im(1.0))),
                    ],
                    c64(2.0, 2.0),
                ),
            };
            let pairs = vec![
                pair("psi1_1", "psi2_2", c, Some((0, 1))),
                pair("phi2_1", "psi1_2", c, Some((0, 2))),
                pair("psi1_2", "psi2_1", c, Some((1, 1))),
                pair("phi2_2", "psi1_1", c, Some((1, 2))),
            ];
            (vectors, pairs)
        }
    };
    Ok(AnalyticEpBasis {
        scenario: format!("{scenario:?}"),
        vectors: vectors.into_iter().map(|(l, v)| (l.to_string(), v)).collect(),
        pairs,
    })
}
