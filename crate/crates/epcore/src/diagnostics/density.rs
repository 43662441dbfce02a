//! Density-matrix evolution ρ(t) = e^{−iHt}ρ(0)e^{iH†t}, its normalized form, fidelity
//! and purity, plus ensembles of random diagonal mixed states.

use crate::error::{Error, Result};
use crate::linalg::{adjoint, eig_general, expm, inner, norm2, scale_mat, CMatrix};
use crate::{ComplexMatrix, ComplexVector, C64};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution};
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityTrajectory {
    pub times: Vec<f64>,
    /// ρ_nor(t) = ρ(t)/tr ρ(t).
    pub matrices: Vec<ComplexMatrix>,
    /// ⟨target′|ρ_nor|target′⟩ with the target normalized (empty without a target).
    pub fidelity: Vec<f64>,
    /// tr ρ_nor².
    pub purity: Vec<f64>,
    /// Diagonal of the unnormalized ρ(t), per time.
    pub diagonals: Vec<Vec<f64>>,
    /// tr ρ(t).
    pub traces: Vec<f64>,
}

fn check_density(rho: &ComplexMatrix) -> Result<()> {
    let n = rho.nrows();
    if rho.ncols() != n {
        return Err(Error::NotSquare { rows: n, cols: rho.ncols() });
    }
    let herm = rho.iter().zip(adjoint(rho).iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if herm > 1e-12 {
        return Err(Error::NotPsd(format!("not Hermitian (deviation {herm:e})")));
    }
    let tr: f64 = (0..n).map(|i| rho[[i, i]].re).sum();
    if (tr - 1.0).abs() > 1e-10 {
        return Err(Error::NotPsd(format!("trace {tr} differs from 1")));
    }
    let lmin = eig_general(rho)?.eigenvalues.iter().map(|e| e.re).fold(f64::INFINITY, f64::min);
    if lmin < -1e-12 {
        return Err(Error::NotPsd(format!("negative eigenvalue {lmin:e}")));
    }
    Ok(())
}

fn propagators(h: &CMatrix<f64>, times: &[f64]) -> Result<Vec<ComplexMatrix>> {
    times.iter().map(|&t| expm(&scale_mat(h, C64::new(0.0, -t)))).collect()
}

fn snapshot(u: &ComplexMatrix, rho0: &ComplexMatrix, target: Option<&ComplexVector>) -> (ComplexMatrix, f64, f64, Vec<f64>, f64) {
    let rho = u.dot(rho0).dot(&adjoint(u));
    let n = rho.nrows();
    let diag: Vec<f64> = (0..n).map(|i| rho[[i, i]].re).collect();
    let tr: f64 = diag.iter().sum();
    let nor = rho.mapv(|z| z / tr);
    let purity = nor.dot(&nor).diag().iter().map(|z| z.re).sum();
    let fid = target.map_or(f64::NAN, |v| inner(v.view(), nor.dot(v).view()).re);
    (nor, fid, purity, diag, tr)
}

fn normalized(v: &ComplexVector) -> ComplexVector {
    let n = norm2(v.view());
    v.mapv(|z| z / n)
}

/// Evolves `rho0` and records normalized matrices, fidelity to `target`, purity and
/// the unnormalized diagonal at each time.
pub fn density_evolve(h: &CMatrix<f64>, rho0: &ComplexMatrix, times: &[f64], target: Option<&ComplexVector>) -> Result<DensityTrajectory> {
    if rho0.nrows() != h.nrows() {
        return Err(Error::DimensionMismatch(format!("density matrix of size {} for dimension {}", rho0.nrows(), h.nrows())));
    }
    check_density(rho0)?;
    let target = target.map(normalized);
    let us = propagators(h, times)?;
    let mut out = DensityTrajectory {
        times: times.to_vec(),
        matrices: Vec::with_capacity(times.len()),
        fidelity: Vec::new(),
        purity: Vec::with_capacity(times.len()),
        diagonals: Vec::with_capacity(times.len()),
        traces: Vec::with_capacity(times.len()),
    };
    for u in &us {
        let (nor, fid, pur, diag, tr) = snapshot(u, rho0, target.as_ref());
        out.matrices.push(nor);
        if target.is_some() {
            out.fidelity.push(fid);
        }
        out.purity.push(pur);
        out.diagonals.push(diag);
        out.traces.push(tr);
    }
    Ok(out)
}

/// Diagonal density matrix Σ_X w_X |X⟩⟨X|.
pub fn diagonal_density(weights: &[f64]) -> ComplexMatrix {
    let n = weights.len();
    Array2::from_shape_fn((n, n), |(i, j)| if i == j { C64::new(weights[i], 0.0) } else { C64::new(0.0, 0.0) })
}

/// Dirichlet(1,…,1) weights for ensemble member `index`; each member has its own
/// ChaCha8 stream so results do not depend on evaluation order.
pub fn dirichlet_weights(seed: u64, index: u64, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    Dirichlet::new(&vec![1.0; dim]).expect("valid concentration").sample(&mut rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleAverage {
    pub times: Vec<f64>,
    pub mean_fidelity: Vec<f64>,
    pub mean_purity: Vec<f64>,
    /// Mean unnormalized diagonal of ρ(t), per time.
    pub mean_diagonals: Vec<Vec<f64>>,
    pub members: usize,
    pub seed: u64,
}

/// Averages fidelity, purity and the unnormalized diagonal over `members` random
/// diagonal mixed states. Members run in parallel and are merged in index order.
pub fn mixed_state_ensemble(h: &CMatrix<f64>, target: &ComplexVector, members: usize, seed: u64, times: &[f64]) -> Result<EnsembleAverage> {
    let n = h.nrows();
    let target = normalized(target);
    let us = propagators(h, times)?;
    let runs: Vec<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> = (0..members)
        .into_par_iter()
        .map(|k| {
            let rho0 = diagonal_density(&dirichlet_weights(seed, k as u64, n));
            let mut f = Vec::with_capacity(times.len());
            let mut p = Vec::with_capacity(times.len());
            let mut d = Vec::with_capacity(times.len());
            for u in &us {
                let (_, fid, pur, diag, _) = snapshot(u, &rho0, Some(&target));
                f.push(fid);
                p.push(pur);
                d.push(diag);
            }
            (f, p, d)
        })
        .collect();
    let m = members.max(1) as f64;
    let mut mean_fidelity = vec![0.0; times.len()];
    let mut mean_purity = vec![0.0; times.len()];
    let mut mean_diagonals = vec![vec![0.0; n]; times.len()];
    for (f, p, d) in &runs {
        for k in 0..times.len() {
            mean_fidelity[k] += f[k] / m;
            mean_purity[k] += p[k] / m;
            for i in 0..n {
                mean_diagonals[k][i] += d[k][i] / m;
            }
        }
    }
    Ok(EnsembleAverage { times: times.to_vec(), mean_fidelity, mean_purity, mean_diagonals, members, seed })
}

/// The closed-form fidelity for real ε at κ = 1 and a diagonal initial state with
/// weights (𝓒_A, 𝓒_B, 𝓒_C, 𝓒_D).
pub fn analytic_mixed_fidelity(epsilon: f64, weights: [f64; 4], t: f64) -> f64 {
    let [ca, cb, cc, cd] = weights;
    let bd = cb + cd;
    let ac = ca + cc * epsilon * epsilon;
    let g = (1.0 + epsilon * epsilon).powi(2);
    let (t2, t4) = (t * t, t.powi(4));
    let num = bd + 8.0 * ac * t2 + 4.0 * bd * g * t4;
    let den = 2.0 + 4.0 * (2.0 * ac + bd * (1.0 + epsilon * epsilon)) * t2 + 4.0 * bd * g * t4;
    num / den
}

/// Least-squares line through (x, y); returns (slope, intercept).
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
