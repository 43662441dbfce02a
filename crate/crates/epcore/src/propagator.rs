//! Closed-form dynamics from a PCR basis: polynomial-in-t chain terms plus
//! oscillating simple modes. Time is a parameter; nothing is integrated.

use crate::error::{Error, Result};
use crate::linalg::{expm, fix_phase, inner, norm2, scale_mat, CMatrix, CVector};
use crate::pcr::{PairKind, PcrBasis};
use crate::scalar::{ci, cone, czero, Real};
use ndarray::Array1;
use num_complex::Complex;

/// Prefactors of one initial state against a PCR basis.
#[derive(Debug, Clone)]
pub struct PropagatorPlan<'a, T> {
    pub basis: &'a PcrBasis<T>,
    /// ζ^{(s)}_y for y = 1..=L_s, per chain of the basis.
    pub chain_prefactors: Vec<Vec<Complex<T>>>,
    /// (pair index, ι_r) for every simple pair.
    pub simple_prefactors: Vec<(usize, Complex<T>)>,
    pub chain_eigenvalues: Vec<Complex<T>>,
    pub simple_eigenvalues: Vec<Complex<T>>,
    /// Prefactors at or below this modulus count as switched off.
    pub coeff_threshold: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult<T> {
    pub times: Vec<T>,
    pub states: Vec<CVector<T>>,
    pub norms: Vec<T>,
    /// |Ψ_i(t)|² per time, per site.
    pub populations: Vec<Vec<T>>,
}

impl<T: Real> EvolutionResult<T> {
    pub fn from_states(times: Vec<T>, states: Vec<CVector<T>>) -> Self {
        let populations: Vec<Vec<T>> = states.iter().map(|s| s.iter().map(|z| z.norm_sqr()).collect()).collect();
        let norms = populations.iter().map(|p| p.iter().copied().sum::<T>().sqrt()).collect();
        Self { times, states, norms, populations }
    }
}

/// Long-time behaviour of a real-spectrum evolution.
#[derive(Debug, Clone, PartialEq)]
pub enum Asymptotics<T> {
    /// No coefficient grows: the evolution stays bounded.
    Bounded,
    /// Ψ(t)/‖Ψ(t)‖ tends (up to a global phase) to `direction`, with ‖Ψ‖ ~ t^degree.
    Converges { direction: CVector<T>, degree: usize },
    /// Several chains at distinct eigenvalues share the top degree; their leading
    /// components keep relative phases e^{−iEt}, so each is reported separately.
    PerChain { degree: usize, components: Vec<(usize, Complex<T>, CVector<T>)> },
}

/// Computes ζ^{(s)}_y = ⟨ν̃_{L+1−y}|Ψ0⟩ and ι_r = ⟨ω̃_r|Ψ0⟩.
pub fn plan<'a, T: Real>(basis: &'a PcrBasis<T>, psi0: &CVector<T>) -> Result<PropagatorPlan<'a, T>> {
    if psi0.len() != basis.dim {
        return Err(Error::DimensionMismatch(format!("initial state of length {} for dimension {}", psi0.len(), basis.dim)));
    }
    let chain_prefactors = basis
        .chains
        .iter()
        .map(|ch| ch.pairs.iter().map(|&k| inner(basis.pairs[k].left.view(), psi0.view())).collect())
        .collect();
    let chain_eigenvalues = basis.chains.iter().map(|ch| basis.pairs[ch.pairs[0]].eigenvalue).collect();
    let mut simple_prefactors = Vec::new();
    let mut simple_eigenvalues = Vec::new();
    for (k, p) in basis.pairs.iter().enumerate() {
        if p.kind == PairKind::Simple {
            simple_prefactors.push((k, inner(p.left.view(), psi0.view())));
            simple_eigenvalues.push(p.eigenvalue);
        }
    }
    Ok(PropagatorPlan {
        basis,
        chain_prefactors,
        simple_prefactors,
        chain_eigenvalues,
        simple_eigenvalues,
        coeff_threshold: basis.tolerances.coeff_tol * norm2(psi0.view()),
    })
}

/// Ψ(t) = Σ_s Σ_y Σ_{p′} (−i)^{p′} ζ_{y+p′} e^{−iE_s t} t^{p′}/p′! ν_y + Σ_r ι_r e^{−iE_r t} ω_r.
pub fn evolve_closed_form<T: Real>(plan: &PropagatorPlan<'_, T>, t: T) -> CVector<T> {
    let b = plan.basis;
    let mut out: CVector<T> = Array1::from_elem(b.dim, czero());
    let mit = -ci::<T>() * t;
    for (s, ch) in b.chains.iter().enumerate() {
        let zeta = &plan.chain_prefactors[s];
        let phase = (mit * plan.chain_eigenvalues[s]).exp();
        let len = ch.length;
        // (−it)^p/p! for p = 0..len-1.
        let mut powers = Vec::with_capacity(len);
        let mut term = cone::<T>();
        for p in 0..len {
            powers.push(term);
            term = term * mit / T::from_usize_lossy(p + 1);
        }
        for y in 0..len {
            let coef = (0..len - y).fold(czero::<T>(), |acc, p| acc + powers[p] * zeta[y + p]) * phase;
            out.zip_mut_with(&b.pairs[ch.pairs[y]].right, |o, v| *o += coef * v);
        }
    }
    for (r, &(k, iota)) in plan.simple_prefactors.iter().enumerate() {
        let coef = iota * (mit * plan.simple_eigenvalues[r]).exp();
        out.zip_mut_with(&b.pairs[k].right, |o, v| *o += coef * v);
    }
    out
}

/// Ground truth expm(−iHt)·Ψ0.
pub fn evolve_oracle<T: Real>(h: &CMatrix<T>, psi0: &CVector<T>, t: T) -> Result<CVector<T>> {
    if h.nrows() != psi0.len() {
        return Err(Error::DimensionMismatch(format!("initial state of length {} for a {}x{} matrix", psi0.len(), h.nrows(), h.ncols())));
    }
    let u = expm(&scale_mat(h, -ci::<T>() * t))?;
    Ok(u.dot(psi0))
}

fn check_times<T: Real>(times: &[T]) -> Result<()> {
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameters("times must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Closed-form evolution on a time grid.
pub fn evolve_grid<T: Real>(plan: &PropagatorPlan<'_, T>, times: &[T]) -> Result<EvolutionResult<T>> {
    check_times(times)?;
    let states = times.iter().map(|&t| evolve_closed_form(plan, t)).collect();
    Ok(EvolutionResult::from_states(times.to_vec(), states))
}

/// Oracle evolution on a time grid.
pub fn oracle_grid<T: Real>(h: &CMatrix<T>, psi0: &CVector<T>, times: &[T]) -> Result<EvolutionResult<T>> {
    check_times(times)?;
    let states = times.iter().map(|&t| evolve_oracle(h, psi0, t)).collect::<Result<Vec<_>>>()?;
    Ok(EvolutionResult::from_states(times.to_vec(), states))
}

/// Per-pair growth degree, aligned with `basis.pairs`: for chain position y the largest
/// p′ with |ζ_{y+p′}| above threshold; for a simple pair 0 when ι is nonzero.
/// `None` means the pair is absent from the evolution.
pub fn growth_degree<T: Real>(plan: &PropagatorPlan<'_, T>) -> Vec<Option<usize>> {
    let b = plan.basis;
    let mut out = vec![None; b.pairs.len()];
    for (s, ch) in b.chains.iter().enumerate() {
        let zeta = &plan.chain_prefactors[s];
        for y in 0..ch.length {
            out[ch.pairs[y]] = (0..ch.length - y).rev().find(|&p| zeta[y + p].norm() > plan.coeff_threshold);
        }
    }
    for &(k, iota) in &plan.simple_prefactors {
        if iota.norm() > plan.coeff_threshold {
            out[k] = Some(0);
        }
    }
    out
}

/// Largest growth degree over all pairs (`None` for the zero state).
pub fn top_degree<T: Real>(plan: &PropagatorPlan<'_, T>) -> Option<usize> {
    growth_degree(plan).into_iter().flatten().max()
}

/// Classifies the long-time limit; requires a real spectrum.
pub fn asymptotic_direction<T: Real>(plan: &PropagatorPlan<'_, T>) -> Result<Asymptotics<T>> {
    let b = plan.basis;
    let max_imag = b.pairs.iter().map(|p| p.eigenvalue.im.abs()).fold(T::zero(), T::max);
    if max_imag > b.tolerances.reality_tol {
        return Err(Error::ComplexSpectrum { max_imag: max_imag.to_f64().unwrap_or(f64::NAN) });
    }
    let degree = match top_degree(plan) {
        None | Some(0) => return Ok(Asymptotics::Bounded),
        Some(d) => d,
    };
    let mut components: Vec<(usize, Complex<T>, CVector<T>)> = Vec::new();
    let mut fact = T::one();
    for k in 1..=degree {
        fact *= T::from_usize_lossy(k);
    }
    let lead = (-ci::<T>()).powi(degree as i32) / fact;
    for (s, ch) in b.chains.iter().enumerate() {
        if ch.length <= degree {
            continue;
        }
        let z = plan.chain_prefactors[s][degree];
        if z.norm() > plan.coeff_threshold {
            let coef = lead * z;
            components.push((s, plan.chain_eigenvalues[s], b.pairs[ch.pairs[0]].right.mapv(|v| v * coef)));
        }
    }
    let e0 = components[0].1;
    let shared = components.iter().all(|c| (c.1 - e0).norm() <= b.tolerances.cluster_tol);
    if shared {
        let mut sum: CVector<T> = Array1::from_elem(b.dim, czero());
        for c in &components {
            sum = sum + &c.2;
        }
        let n = norm2(sum.view());
        let mut direction = sum.mapv(|v| v / n);
        fix_phase(&mut direction, T::lit(1e-6));
        Ok(Asymptotics::Converges { direction, degree })
    } else {
        Ok(Asymptotics::PerChain { degree, components })
    }
}

/// Relative distance ‖a − b‖/‖b‖ (absolute when b = 0).
pub fn relative_error<T: Real>(a: &CVector<T>, b: &CVector<T>) -> T {
    let d = norm2((a - b).view());
    let n = norm2(b.view());
    if n > T::zero() {
        d / n
    } else {
        d
    }
}
