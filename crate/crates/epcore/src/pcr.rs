//! Pseudo-completeness relations: redefined biorthogonal (left, right) pairs.
//!
//! Per cluster, chains are processed longest first. Each chain is first deflated
//! against the pairs already finalized in its cluster (modified Gram–Schmidt), then
//! normalized by `C = ⟨ψ̃_L|ψ₁⟩`. Right position `n` pairs with left position `L+1−n`.
//! Length-one modes are biorthogonalized last, with complete pivoting.

use crate::error::{Error, Result};
use crate::jordan::{JordanChain, JordanStructure};
use crate::linalg::{identity, inner, norm2, shifted, spectral_norm, CMatrix, CVector};
use crate::scalar::{czero, Real};
use crate::tolerances::Tolerances;
use ndarray::Array1;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    Chain,
    Simple,
}

/// One term |right⟩⟨left| of the closure relation, normalized so that ⟨left|right⟩ = 1.
#[derive(Debug, Clone)]
pub struct PcrPair<T> {
    pub left: CVector<T>,
    pub right: CVector<T>,
    pub kind: PairKind,
    pub chain_id: Option<usize>,
    /// 1-based position of the right vector in its chain (1 = coalescing eigenstate);
    /// the left vector sits at position `length + 1 − position`.
    pub position_in_chain: Option<usize>,
    pub eigenvalue: Complex<T>,
}

/// Bookkeeping for one redefined chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcrChain {
    pub cluster: usize,
    pub length: usize,
    /// Pair indices ordered by right position 1..=length.
    pub pairs: Vec<usize>,
    /// Index (within its equal-length group) of the left chain this right chain was paired with.
    pub left_partner: usize,
    /// Member of a group of equal-length chains at one eigenvalue.
    pub advisory: bool,
}

/// Which construction cases occurred while building the basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PcrScenario {
    /// Clusters holding at least one chain of length ≥ 2.
    pub ep_clusters: usize,
    /// Clusters holding two or more chains of length ≥ 2.
    pub degenerate_ep_clusters: usize,
    /// Some cluster mixes chains with extra diagonalizable modes.
    pub extra_degeneracy: bool,
}

impl PcrScenario {
    pub fn is_nondefective(&self) -> bool {
        self.ep_clusters == 0
    }

    pub fn describe(&self) -> String {
        if self.is_nondefective() {
            return "nondefective; standard completeness used".into();
        }
        let mut parts = vec![if self.ep_clusters == 1 {
            "single EP cluster".to_string()
        } else {
            format!("{} EP clusters", self.ep_clusters)
        }];
        if self.degenerate_ep_clusters > 0 {
            parts.push("degenerate EPs".into());
        }
        if self.extra_degeneracy {
            parts.push("extra nondefective degeneracy".into());
        }
        parts.join("; ")
    }
}

#[derive(Debug, Clone)]
pub struct PcrBasis<T> {
    pub dim: usize,
    pub pairs: Vec<PcrPair<T>>,
    pub chains: Vec<PcrChain>,
    /// ‖Σ right·left† − I‖₂.
    pub closure_residual: T,
    /// Largest ‖(H−E)ν_n − ν_{n−1}‖ over non-advisory chains.
    pub chain_residual: T,
    /// Same quantity over advisory chains (equal-length groups), if any.
    pub advisory_chain_residual: Option<T>,
    /// max |⟨left_i|right_j⟩ − δ_ij|.
    pub orthonormality_residual: T,
    /// An equal-length pairing tie was resolved by lexicographic chain order.
    pub pairing_policy_applied: bool,
    pub scenario: PcrScenario,
    /// Tolerances the basis was built with; reused by the propagator.
    pub tolerances: Tolerances<T>,
}

/// Finalized pairs of the cluster currently being processed.
struct Finalized<T> {
    pairs: Vec<(CVector<T>, CVector<T>)>,
}

impl<T: Real> Finalized<T> {
    fn deflate_right(&self, v: &CVector<T>) -> CVector<T> {
        let mut out = v.clone();
        for (l, r) in &self.pairs {
            let c = inner(l.view(), out.view());
            out.zip_mut_with(r, |x, y| *x -= c * y);
        }
        out
    }

    fn deflate_left(&self, v: &CVector<T>) -> CVector<T> {
        let mut out = v.clone();
        for (l, r) in &self.pairs {
            let c = inner(r.view(), out.view());
            out.zip_mut_with(l, |x, y| *x -= c * y);
        }
        out
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

const MAX_EXHAUSTIVE: usize = 6;

/// Pairs right chain `b` with left chain `σ(b)` among chains of equal length at one
/// eigenvalue by maximizing Π_b |⟨ψ̃_L^{σ(b)}|ψ₁^b⟩| over all permutations.
///
/// Returns σ. Fails with `AmbiguousPairing` when the two best assignments agree
/// within `rel_tol` (relative).
pub fn match_left_partners_equal_multiplicity<T: Real>(chains: &[JordanChain<T>], rel_tol: T) -> Result<Vec<usize>> {
    let (best, second) = ranked_pairings(chains)?;
    if let Some((_, s)) = &second {
        if best.1 - *s <= rel_tol * best.1.abs().max(T::min_positive_value()) {
            return Err(Error::AmbiguousPairing {
                best: best.1.to_f64().unwrap_or(f64::NAN),
                second: s.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(best.0)
}

/// Best assignment (lexicographically first among exact optima) and the runner-up score.
/// Scores are products of overlap moduli.
fn ranked_pairings<T: Real>(chains: &[JordanChain<T>]) -> Result<((Vec<usize>, T), Option<(Vec<usize>, T)>)> {
    let g = chains.len();
    if g == 0 {
        return Ok(((vec![], T::one()), None));
    }
    let len = chains[0].length;
    if chains.iter().any(|c| c.length != len || c.right_chain.len() != len || c.left_chain.len() != len) {
        return Err(Error::DimensionMismatch("equal-length pairing needs chains of one common length".into()));
    }
    let m: Vec<Vec<T>> = (0..g)
        .map(|a| (0..g).map(|b| inner(chains[a].left_chain[len - 1].view(), chains[b].right_chain[0].view()).norm()).collect())
        .collect();
    if g > MAX_EXHAUSTIVE {
        // Greedy complete pivoting; no runner-up is reported.
        let mut sigma = vec![usize::MAX; g];
        let mut used_l = vec![false; g];
        let mut score = T::one();
        for _ in 0..g {
            let mut pick = (T::lit(-1.0), 0, 0);
            for b in 0..g {
                if sigma[b] != usize::MAX {
                    continue;
                }
                for a in 0..g {
                    if !used_l[a] && m[a][b] > pick.0 {
                        pick = (m[a][b], a, b);
                    }
                }
            }
            sigma[pick.2] = pick.1;
            used_l[pick.1] = true;
            score *= pick.0;
        }
        return Ok(((sigma, score), None));
    }
    let mut scored: Vec<(Vec<usize>, T)> = permutations(g)
        .into_iter()
        .map(|p| {
            let s = (0..g).fold(T::one(), |acc, b| acc * m[p[b]][b]);
            (p, s)
        })
        .collect();
    scored.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap_or(std::cmp::Ordering::Equal).then(x.0.cmp(&y.0)));
    let mut it = scored.into_iter();
    let best = it.next().expect("at least one permutation");
    Ok((best, it.next()))
}

/// Redefines one (already deflated) chain pairing; returns (right ν_n, left ν̃_n) by position.
fn redefine_chain<T: Real>(
    right: &[CVector<T>],
    left: &[CVector<T>],
    tol: &Tolerances<T>,
) -> Result<(Vec<CVector<T>>, Vec<CVector<T>>)> {
    let l = right.len();
    let c = inner(left[l - 1].view(), right[0].view());
    let thr = tol.norm_tol * tol.scale.powi(l as i32) * norm2(left[l - 1].view()) * norm2(right[l - 1].view());
    if c.norm() <= thr {
        return Err(Error::ZeroBiorthogonalNorm {
            value: c.norm().to_f64().unwrap_or(f64::NAN),
            tol: thr.to_f64().unwrap_or(f64::NAN),
        });
    }
    let root = c.sqrt();
    let lefts: Vec<CVector<T>> = left.iter().map(|v| v.mapv(|z| z / root.conj())).collect();
    let mut rights: Vec<CVector<T>> = Vec::with_capacity(l);
    for n in 0..l {
        let mut v = right[n].mapv(|z| z / root);
        for q in 0..n {
            let coef = inner(lefts[l - 1 - q].view(), v.view());
            v.zip_mut_with(&rights[q], |x, y| *x -= coef * y);
        }
        rights.push(v);
    }
    Ok((rights, lefts))
}

/// Builds the PCR basis for `h` from a detected (or user-supplied) Jordan structure.
pub fn build_pcr<T: Real>(h: &CMatrix<T>, structure: &JordanStructure<T>, tol: &Tolerances<T>) -> Result<PcrBasis<T>> {
    let dim = h.nrows();
    if structure.dim != dim {
        return Err(Error::DimensionMismatch(format!("structure of dimension {} for a {}x{} matrix", structure.dim, dim, dim)));
    }
    let mut pairs: Vec<PcrPair<T>> = Vec::with_capacity(dim);
    let mut chains_out: Vec<PcrChain> = Vec::new();
    let mut scenario = PcrScenario::default();
    let mut policy = false;

    for (ci, cluster) in structure.clusters.iter().enumerate() {
        let chains = &structure.chains[ci];
        let simple = &structure.simple_modes[ci];
        if !chains.is_empty() {
            scenario.ep_clusters += 1;
            if chains.len() > 1 {
                scenario.degenerate_ep_clusters += 1;
            }
            if !simple.is_empty() {
                scenario.extra_degeneracy = true;
            }
        }
        let mut fin = Finalized { pairs: Vec::new() };

        let mut order: Vec<usize> = (0..chains.len()).collect();
        order.sort_by(|&a, &b| chains[b].length.cmp(&chains[a].length).then(a.cmp(&b)));
        let mut start = 0;
        while start < order.len() {
            let len = chains[order[start]].length;
            let mut end = start;
            while end < order.len() && chains[order[end]].length == len {
                end += 1;
            }
            let group: Vec<JordanChain<T>> = order[start..end].iter().map(|&k| chains[k].clone()).collect();
            let sigma = if group.len() == 1 {
                vec![0]
            } else {
                match match_left_partners_equal_multiplicity(&group, tol.orthonormality_tol) {
                    Ok(s) => s,
                    Err(Error::AmbiguousPairing { .. }) => {
                        policy = true;
                        ranked_pairings(&group)?.0 .0
                    }
                    Err(e) => return Err(e),
                }
            };
            for (b, ch) in group.iter().enumerate() {
                let lch = &group[sigma[b]];
                let right: Vec<CVector<T>> = ch.right_chain.iter().map(|v| fin.deflate_right(v)).collect();
                let left: Vec<CVector<T>> = lch.left_chain.iter().map(|v| fin.deflate_left(v)).collect();
                let (rs, ls) = redefine_chain(&right, &left, tol)?;
                let chain_id = chains_out.len();
                let mut idx = Vec::with_capacity(len);
                for n in 0..len {
                    let lv = ls[len - 1 - n].clone();
                    fin.pairs.push((lv.clone(), rs[n].clone()));
                    idx.push(pairs.len());
                    pairs.push(PcrPair {
                        left: lv,
                        right: rs[n].clone(),
                        kind: PairKind::Chain,
                        chain_id: Some(chain_id),
                        position_in_chain: Some(n + 1),
                        eigenvalue: cluster.value,
                    });
                }
                chains_out.push(PcrChain {
                    cluster: ci,
                    length: len,
                    pairs: idx,
                    left_partner: sigma[b],
                    advisory: group.len() > 1,
                });
            }
            start = end;
        }

        // Remaining diagonalizable modes: biorthogonalization with complete pivoting.
        let mut rs: Vec<CVector<T>> = simple.iter().map(|m| fin.deflate_right(&m.right)).collect();
        let mut ls: Vec<CVector<T>> = simple.iter().map(|m| fin.deflate_left(&m.left)).collect();
        let mut open_r: Vec<usize> = (0..rs.len()).collect();
        let mut open_l: Vec<usize> = (0..ls.len()).collect();
        while !open_r.is_empty() {
            let mut best = (T::lit(-1.0), 0, 0, czero::<T>());
            for (ia, &a) in open_l.iter().enumerate() {
                for (ib, &b) in open_r.iter().enumerate() {
                    let c = inner(ls[a].view(), rs[b].view());
                    if c.norm() > best.0 {
                        best = (c.norm(), ia, ib, c);
                    }
                }
            }
            let (_, ia, ib, c) = best;
            let (a, b) = (open_l.remove(ia), open_r.remove(ib));
            let thr = tol.norm_tol * tol.scale * norm2(ls[a].view()) * norm2(rs[b].view());
            if c.norm() <= thr {
                return Err(Error::ZeroBiorthogonalNorm {
                    value: c.norm().to_f64().unwrap_or(f64::NAN),
                    tol: thr.to_f64().unwrap_or(f64::NAN),
                });
            }
            let root = c.sqrt();
            let r = rs[b].mapv(|z| z / root);
            let l = ls[a].mapv(|z| z / root.conj());
            for &k in &open_r {
                let coef = inner(l.view(), rs[k].view());
                rs[k].zip_mut_with(&r, |x, y| *x -= coef * y);
            }
            for &k in &open_l {
                let coef = inner(r.view(), ls[k].view());
                ls[k].zip_mut_with(&l, |x, y| *x -= coef * y);
            }
            fin.pairs.push((l.clone(), r.clone()));
            pairs.push(PcrPair {
                left: l,
                right: r,
                kind: PairKind::Simple,
                chain_id: None,
                position_in_chain: None,
                eigenvalue: cluster.value,
            });
        }
    }

    if pairs.len() != dim {
        return Err(Error::DimensionMismatch(format!("structure yields {} pairs for dimension {}", pairs.len(), dim)));
    }
    let mut basis = PcrBasis {
        dim,
        pairs,
        chains: chains_out,
        closure_residual: T::zero(),
        chain_residual: T::zero(),
        advisory_chain_residual: None,
        orthonormality_residual: T::zero(),
        pairing_policy_applied: policy,
        scenario,
        tolerances: *tol,
    };
    basis.closure_residual = verify_closure(&basis, dim)?;
    let (strict, advisory) = chain_residuals(h, &basis);
    basis.chain_residual = strict;
    basis.advisory_chain_residual = advisory;
    basis.orthonormality_residual = orthonormality_residual(&basis);
    if !(basis.closure_residual <= tol.closure_tol) {
        return Err(Error::ClosureFailure {
            residual: basis.closure_residual.to_f64().unwrap_or(f64::NAN),
            tol: tol.closure_tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(basis)
}

/// Detects the structure of `h` with default tolerances and builds its PCR.
pub fn pcr_for<T: Real>(h: &CMatrix<T>) -> Result<PcrBasis<T>> {
    let tol = Tolerances::for_matrix(h);
    let s = crate::jordan::detect_structure_with(h, &tol)?;
    build_pcr(h, &s, &tol)
}

/// Σ right·left† over the pairs.
pub fn projector<T: Real>(basis: &PcrBasis<T>, dim: usize) -> Result<CMatrix<T>> {
    let mut p = CMatrix::<T>::from_elem((dim, dim), czero());
    for pr in &basis.pairs {
        if pr.right.len() != dim || pr.left.len() != dim {
            return Err(Error::DimensionMismatch(format!("pair vectors of length {} for dimension {}", pr.right.len(), dim)));
        }
        for i in 0..dim {
            let ri = pr.right[i];
            for j in 0..dim {
                p[[i, j]] += ri * pr.left[j].conj();
            }
        }
    }
    Ok(p)
}

/// ‖Σ right·left† − I‖₂.
pub fn verify_closure<T: Real>(basis: &PcrBasis<T>, dim: usize) -> Result<T> {
    let p = projector(basis, dim)?;
    spectral_norm(&(&p - &identity::<T>(dim)))
}

fn chain_residuals<T: Real>(h: &CMatrix<T>, basis: &PcrBasis<T>) -> (T, Option<T>) {
    let mut strict = T::zero();
    let mut advisory: Option<T> = None;
    for ch in &basis.chains {
        let e = basis.pairs[ch.pairs[0]].eigenvalue;
        let a = shifted(h, e);
        let mut worst = T::zero();
        for (k, &pi) in ch.pairs.iter().enumerate() {
            let mut r = a.dot(&basis.pairs[pi].right);
            if k > 0 {
                r = &r - &basis.pairs[ch.pairs[k - 1]].right;
            }
            worst = worst.max(norm2(r.view()));
        }
        if ch.advisory {
            advisory = Some(advisory.map_or(worst, |w: T| w.max(worst)));
        } else {
            strict = strict.max(worst);
        }
    }
    (strict, advisory)
}

/// Largest Jordan-chain defect ‖(H−E)ν_n − ν_{n−1}‖ of the redefined right vectors,
/// together with the value over advisory (equal-length degenerate) chains.
pub fn verify_chain_preservation<T: Real>(h: &CMatrix<T>, basis: &PcrBasis<T>) -> (T, Option<T>) {
    chain_residuals(h, basis)
}

/// max |⟨left_i|right_j⟩ − δ_ij| over all pairs.
pub fn orthonormality_residual<T: Real>(basis: &PcrBasis<T>) -> T {
    let mut worst = T::zero();
    for (i, a) in basis.pairs.iter().enumerate() {
        for (j, b) in basis.pairs.iter().enumerate() {
            let mut g = inner(a.left.view(), b.right.view());
            if i == j {
                g -= Complex::new(T::one(), T::zero());
            }
            worst = worst.max(g.norm());
        }
    }
    worst
}

/// Idempotence defect ‖P² − P‖₂ of P = Σ right·left†.
pub fn idempotence_residual<T: Real>(basis: &PcrBasis<T>) -> Result<T> {
    let p = projector(basis, basis.dim)?;
    spectral_norm(&(&p.dot(&p) - &p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcrPairJson {
    pub kind: PairKind,
    pub chain_id: Option<usize>,
    pub position_in_chain: Option<usize>,
    pub eigenvalue: [f64; 2],
    /// Interleaved re, im.
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

/// JSON form of a basis: vectors as interleaved re/im arrays, metadata verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcrBasisJson {
    pub dim: usize,
    pub closure_residual: f64,
    pub chain_residual: f64,
    pub advisory_chain_residual: Option<f64>,
    pub orthonormality_residual: f64,
    pub pairing_policy_applied: bool,
    pub scenario: PcrScenario,
    pub tolerances: Tolerances<f64>,
    pub chains: Vec<PcrChain>,
    pub pairs: Vec<PcrPairJson>,
}

fn interleave<T: Real>(v: &CVector<T>) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN)]).collect()
}

fn deinterleave<T: Real>(x: &[f64]) -> Result<CVector<T>> {
    if x.len() % 2 != 0 {
        return Err(Error::DimensionMismatch("interleaved vector of odd length".into()));
    }
    Ok(Array1::from_iter(x.chunks(2).map(|p| Complex::new(T::lit(p[0]), T::lit(p[1])))))
}

impl<T: Real> PcrBasis<T> {
    pub fn to_json(&self) -> PcrBasisJson {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        PcrBasisJson {
            dim: self.dim,
            closure_residual: f(self.closure_residual),
            chain_residual: f(self.chain_residual),
            advisory_chain_residual: self.advisory_chain_residual.map(f),
            orthonormality_residual: f(self.orthonormality_residual),
            pairing_policy_applied: self.pairing_policy_applied,
            scenario: self.scenario,
            tolerances: self.tolerances.cast(),
            chains: self.chains.clone(),
            pairs: self
                .pairs
                .iter()
                .map(|p| PcrPairJson {
                    kind: p.kind,
                    chain_id: p.chain_id,
                    position_in_chain: p.position_in_chain,
                    eigenvalue: [f(p.eigenvalue.re), f(p.eigenvalue.im)],
                    left: interleave(&p.left),
                    right: interleave(&p.right),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &PcrBasisJson) -> Result<Self> {
        let pairs = j
            .pairs
            .iter()
            .map(|p| {
                let left = deinterleave(&p.left)?;
                let right = deinterleave(&p.right)?;
                if left.len() != j.dim || right.len() != j.dim {
                    return Err(Error::DimensionMismatch("pair vector length differs from dim".into()));
                }
                Ok(PcrPair {
                    left,
                    right,
                    kind: p.kind,
                    chain_id: p.chain_id,
                    position_in_chain: p.position_in_chain,
                    eigenvalue: Complex::new(T::lit(p.eigenvalue[0]), T::lit(p.eigenvalue[1])),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim: j.dim,
            pairs,
            chains: j.chains.clone(),
            closure_residual: T::lit(j.closure_residual),
            chain_residual: T::lit(j.chain_residual),
            advisory_chain_residual: j.advisory_chain_residual.map(T::lit),
            orthonormality_residual: T::lit(j.orthonormality_residual),
            pairing_policy_applied: j.pairing_policy_applied,
            scenario: j.scenario,
            tolerances: j.tolerances.cast(),
        })
    }
}
