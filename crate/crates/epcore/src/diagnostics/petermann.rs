//! Petermann factors K_m = ⟨L|L⟩⟨R|R⟩/|⟨L|R⟩|² of paired left/right modes.

use crate::error::{Error, Result};
use crate::linalg::{eig_general, inner, norm2, CMatrix, SpectralData};
use crate::{ComplexVector, C64};
use serde::{Deserialize, Serialize};

/// Values above this are reported as divergent (exact or numerically exact EP).
pub const PETERMANN_CAP: f64 = 1e16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PetermannReport {
    pub per_mode: Vec<f64>,
    pub average: f64,
    pub inverse_average: f64,
    /// Some mode hit `PETERMANN_CAP`.
    pub diverged: bool,
}

fn factor(l: &ComplexVector, r: &ComplexVector) -> f64 {
    let ov = inner(l.view(), r.view()).norm_sqr();
    let k = norm2(l.view()).powi(2) * norm2(r.view()).powi(2) / ov;
    if k.is_finite() {
        k.min(PETERMANN_CAP)
    } else {
        PETERMANN_CAP
    }
}

/// Groups right and left eigenvalues by single linkage within `tol`.
fn joint_clusters(right: &[C64], left: &[C64], tol: f64) -> Vec<(Vec<usize>, Vec<usize>)> {
    let n = right.len();
    let all: Vec<C64> = right.iter().chain(left.iter()).copied().collect();
    let mut parent: Vec<usize> = (0..all.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            if (all[i] - all[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>, Vec<usize>)> = Vec::new();
    for i in 0..all.len() {
        let root = find(&mut parent, i);
        let g = match groups.iter().position(|g| g.0 == root) {
            Some(k) => k,
            None => {
                groups.push((root, vec![], vec![]));
                groups.len() - 1
            }
        };
        if i < n {
            groups[g].1.push(i);
        } else {
            groups[g].2.push(i - n);
        }
    }
    groups.into_iter().map(|g| (g.1, g.2)).collect()
}

/// Petermann factors with left/right modes paired by eigenvalue proximity.
///
/// Right and left eigenvalues are clustered jointly (radius `tol`); a cluster with
/// unequal left/right counts cannot be paired. Inside a degenerate cluster the modes
/// are biorthogonalized with complete pivoting before the factor is taken.
pub fn petermann_with(spec: &SpectralData<f64>, tol: f64) -> Result<PetermannReport> {
    let n = spec.eigenvalues.len();
    let mut per_mode = vec![0.0; n];
    for (ri, li) in joint_clusters(&spec.eigenvalues, &spec.left_eigenvalues, tol) {
        if ri.len() != li.len() {
            return Err(Error::PairingAmbiguity(format!(
                "{} right and {} left eigenvalues near {}",
                ri.len(),
                li.len(),
                spec.eigenvalues.get(ri.first().copied().unwrap_or(0)).copied().unwrap_or_default()
            )));
        }
        let mut rs: Vec<ComplexVector> = ri.iter().map(|&k| spec.right_vectors.column(k).to_owned()).collect();
        let mut ls: Vec<ComplexVector> = li.iter().map(|&k| spec.left_vectors.column(k).to_owned()).collect();
        let mut open_r: Vec<usize> = (0..rs.len()).collect();
        let mut open_l: Vec<usize> = (0..ls.len()).collect();
        while !open_r.is_empty() {
            let mut best = (-1.0, 0, 0);
            for (ia, &a) in open_l.iter().enumerate() {
                for (ib, &b) in open_r.iter().enumerate() {
                    let m = inner(ls[a].view(), rs[b].view()).norm() / (norm2(ls[a].view()) * norm2(rs[b].view()));
                    if m > best.0 {
                        best = (m, ia, ib);
                    }
                }
            }
            let (a, b) = (open_l.remove(best.1), open_r.remove(best.2));
            per_mode[ri[b]] = factor(&ls[a], &rs[b]);
            let c = inner(ls[a].view(), rs[b].view());
            if c.norm() > 0.0 {
                for &k in &open_r {
                    let coef = inner(ls[a].view(), rs[k].view()) / c;
                    let rb = rs[b].clone();
                    rs[k].zip_mut_with(&rb, |x, y| *x -= coef * y);
                }
                for &k in &open_l {
                    let coef = inner(rs[b].view(), ls[k].view()) / c.conj();
                    let la = ls[a].clone();
                    ls[k].zip_mut_with(&la, |x, y| *x -= coef * y);
                }
            }
        }
    }
    let average = per_mode.iter().sum::<f64>() / n.max(1) as f64;
    Ok(PetermannReport {
        diverged: per_mode.iter().any(|&k| k >= PETERMANN_CAP),
        inverse_average: 1.0 / average,
        average,
        per_mode,
    })
}

/// Petermann factors with the default pairing radius 1e-8·max(1, max|E|).
pub fn petermann(spec: &SpectralData<f64>) -> Result<PetermannReport> {
    let scale = spec.eigenvalues.iter().map(|e| e.norm()).fold(1.0, f64::max);
    petermann_with(spec, 1e-8 * scale)
}

/// Eigendecomposition followed by `petermann`.
pub fn petermann_of(h: &CMatrix<f64>) -> Result<PetermannReport> {
    petermann(&eig_general(h)?)
}
