//! Eigenvalue clustering and numerical Jordan chains.
//!
//! The generalized eigenspace of a cluster is taken from a reordered complex Schur
//! form, so all rank decisions happen on the small restricted operator
//! `N = T₁₁ − c·I`. Chain tops are picked top-down from the kernels of `N^k`
//! and the chain is generated downward by multiplying with `H − c` in full space.

use crate::assignment::min_cost_assignment;
use crate::error::{Error, Result};
use crate::linalg::{
    adjoint, eig_general, fix_phase, matrix_power, norm2, null_space, reorder_schur, schur, shifted, svd, CMatrix,
    CVector, Schur, SpectralData,
};
use crate::scalar::{czero, Real};
use crate::tolerances::Tolerances;
use ndarray::{s, Array2, Axis};
use num_complex::Complex;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueCluster<T> {
    /// Centroid of the member eigenvalues.
    pub value: Complex<T>,
    pub algebraic_multiplicity: usize,
    pub geometric_multiplicity: usize,
    /// Indices into `SpectralData::eigenvalues`.
    pub member_indices: Vec<usize>,
}

impl<T> EigenvalueCluster<T> {
    pub fn is_defective(&self) -> bool {
        self.geometric_multiplicity < self.algebraic_multiplicity
    }
}

/// Right chain `ψ₁…ψ_L` of `H` and left chain `ψ̃₁…ψ̃_L` of `H†` at one eigenvalue.
#[derive(Debug, Clone)]
pub struct JordanChain<T> {
    pub eigenvalue: Complex<T>,
    pub right_chain: Vec<CVector<T>>,
    pub left_chain: Vec<CVector<T>>,
    pub length: usize,
    /// Largest defect of the chain relations (right and left, relative to max(1, ‖ψ‖)).
    pub residual: T,
    /// Largest residual of the upward min-norm solves used as a cross-check.
    pub upward_residual: T,
}

/// A diagonalizable mode (chain of length one).
#[derive(Debug, Clone)]
pub struct SimpleMode<T> {
    pub eigenvalue: Complex<T>,
    pub right: CVector<T>,
    pub left: CVector<T>,
}

#[derive(Debug, Clone)]
pub struct JordanStructure<T> {
    pub dim: usize,
    pub clusters: Vec<EigenvalueCluster<T>>,
    /// Chains of length ≥ 2 per cluster, in descending length.
    pub chains: Vec<Vec<JordanChain<T>>>,
    /// Length-one modes per cluster.
    pub simple_modes: Vec<Vec<SimpleMode<T>>>,
    /// `nullity((H − c)^k)` for `k = 1..=index` per cluster.
    pub nullities: Vec<Vec<usize>>,
    pub tolerances: Tolerances<T>,
}

impl<T: Real> JordanStructure<T> {
    pub fn is_defective(&self) -> bool {
        self.chains.iter().any(|c| !c.is_empty())
    }

    /// Chain lengths per cluster, descending, simple modes counted as length 1.
    pub fn segre(&self, cluster: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.chains[cluster].iter().map(|c| c.length).collect();
        v.extend(std::iter::repeat(1).take(self.simple_modes[cluster].len()));
        v
    }
}

/// Longest chain length in the cluster; 1 means nondefective.
pub fn ep_order<T: Real>(structure: &JordanStructure<T>, cluster_index: usize) -> usize {
    structure.chains[cluster_index].iter().map(|c| c.length).max().unwrap_or(1)
}

/// Chain lengths (descending) implied by a nullity sequence `n_k = nullity(A^k)`.
pub fn segre_from_nullities(nullities: &[usize]) -> Vec<usize> {
    let d: Vec<usize> = (0..nullities.len())
        .map(|k| nullities[k] - if k == 0 { 0 } else { nullities[k - 1] })
        .collect();
    let mut lengths = Vec::new();
    for l in (1..=d.len()).rev() {
        let next = if l < d.len() { d[l] } else { 0 };
        for _ in 0..d[l - 1].saturating_sub(next) {
            lengths.push(l);
        }
    }
    lengths
}

/// Nullities of `(H − value)^k` computed on the full matrix, `k = 1..=kmax`,
/// judged against `rank_tol·scale^k`. Independent of the Schur restriction.
pub fn nullity_sequence<T: Real>(h: &CMatrix<T>, value: Complex<T>, kmax: usize, tol: &Tolerances<T>) -> Result<Vec<usize>> {
    let a = shifted(h, value);
    let mut p = a.clone();
    let mut out = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        if k > 1 {
            p = p.dot(&a);
        }
        let thr = tol.power_threshold(k);
        out.push(svd(&p)?.s.iter().filter(|&&x| x <= thr).count());
    }
    Ok(out)
}

struct SchurContext<T> {
    schur: Schur<T>,
    /// Spectral index → diagonal position in the Schur form.
    pos_of: Vec<usize>,
}

impl<T: Real> SchurContext<T> {
    fn new(schur: Schur<T>, eigenvalues: &[Complex<T>], conjugate: bool) -> Self {
        let diag: Vec<Complex<T>> = schur
            .eigenvalues()
            .into_iter()
            .map(|d| if conjugate { d.conj() } else { d })
            .collect();
        let cost: Vec<Vec<f64>> = eigenvalues
            .iter()
            .map(|e| diag.iter().map(|d| (*d - *e).norm().to_f64().unwrap_or(f64::INFINITY)).collect())
            .collect();
        let pos_of = min_cost_assignment(&cost);
        Self { schur, pos_of }
    }

    /// Orthonormal basis of the invariant subspace of `members` and the restricted block.
    fn restriction(&self, members: &[usize]) -> (CMatrix<T>, CMatrix<T>) {
        let n = self.schur.t.nrows();
        let mut s = self.schur.clone();
        let mut sel = vec![false; n];
        for &i in members {
            sel[self.pos_of[i]] = true;
        }
        let m = reorder_schur(&mut s, &sel);
        (s.z.slice(s![.., ..m]).to_owned(), s.t.slice(s![..m, ..m]).to_owned())
    }

    fn is_nilpotent(&self, members: &[usize], tol: &Tolerances<T>) -> Result<bool> {
        let m = members.len();
        if m == 1 {
            return Ok(true);
        }
        let (_, t11) = self.restriction(members);
        let p = matrix_power(&shifted(&t11, trace_centroid(&t11)), m);
        Ok(svd(&p)?.s[0] <= tol.power_threshold(m))
    }
}

/// Mean of the diagonal of a restricted block. Reordering perturbs individual
/// diagonal entries, the trace much less, so shifts use this value.
fn trace_centroid<T: Real>(t: &CMatrix<T>) -> Complex<T> {
    let m = t.nrows();
    (0..m).fold(czero::<T>(), |acc, i| acc + t[[i, i]]) / T::from_usize_lossy(m)
}

fn centroid<T: Real>(spec: &SpectralData<T>, members: &[usize]) -> Complex<T> {
    let sum = members.iter().fold(czero::<T>(), |acc, &i| acc + spec.eigenvalues[i]);
    sum / T::from_usize_lossy(members.len())
}

fn min_distance<T: Real>(spec: &SpectralData<T>, a: &[usize], b: &[usize]) -> T {
    let mut d = T::infinity();
    for &i in a {
        for &j in b {
            d = d.min((spec.eigenvalues[i] - spec.eigenvalues[j]).norm());
        }
    }
    d
}

/// Groups eigenvalues into clusters.
///
/// Single linkage at `cluster_tol` first. Clusters closer than `merge_radius` are
/// then merged by single linkage at increasing distance whenever the merged
/// restricted operator is numerically nilpotent, which is how a roundoff-split
/// exceptional point is recognized. A tight cluster that fails the nilpotency
/// test is split.
pub fn cluster_eigenvalues<T: Real>(h: &CMatrix<T>, spec: &SpectralData<T>, tol: &Tolerances<T>) -> Result<Vec<EigenvalueCluster<T>>> {
    let ctx = SchurContext::new(schur(h)?, &spec.eigenvalues, false);
    clusters_with_context(&ctx, spec, tol)
}

fn clusters_with_context<T: Real>(ctx: &SchurContext<T>, spec: &SpectralData<T>, tol: &Tolerances<T>) -> Result<Vec<EigenvalueCluster<T>>> {
    let n = spec.eigenvalues.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut k = i;
        while p[k] != r {
            let nx = p[k];
            p[k] = r;
            k = nx;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (spec.eigenvalues[i] - spec.eigenvalues[j]).norm() <= tol.cluster_tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_group = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_group[r] == usize::MAX {
            root_group[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_group[r]].push(i);
    }

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for g in groups {
        if g.len() == 1 || ctx.is_nilpotent(&g, tol)? {
            clusters.push(g);
        } else {
            clusters.extend(g.into_iter().map(|i| vec![i]));
        }
    }

    // Stage 2: single linkage over the accepted clusters at every distinct distance up
    // to the merge radius; a component replaces its parts once it is nilpotent as a whole.
    let mut radii: Vec<T> = Vec::new();
    for a in 0..clusters.len() {
        for b in a + 1..clusters.len() {
            let d = min_distance(spec, &clusters[a], &clusters[b]);
            if d <= tol.merge_radius {
                radii.push(d);
            }
        }
    }
    radii.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    radii.dedup();
    let mut tested: Vec<Vec<usize>> = Vec::new();
    for r in radii {
        let k = clusters.len();
        let mut comp: Vec<usize> = (0..k).collect();
        for a in 0..k {
            for b in a + 1..k {
                if min_distance(spec, &clusters[a], &clusters[b]) <= r {
                    let (x, y) = (comp[a], comp[b]);
                    if x != y {
                        let lo = x.min(y);
                        comp.iter_mut().filter(|c| **c == x || **c == y).for_each(|c| *c = lo);
                    }
                }
            }
        }
        let mut next: Vec<Vec<usize>> = Vec::new();
        let mut roots: Vec<usize> = comp.clone();
        roots.sort_unstable();
        roots.dedup();
        for root in roots {
            let parts: Vec<usize> = (0..k).filter(|&i| comp[i] == root).collect();
            if parts.len() == 1 {
                next.push(clusters[parts[0]].clone());
                continue;
            }
            let mut u: Vec<usize> = parts.iter().flat_map(|&i| clusters[i].iter().copied()).collect();
            u.sort_unstable();
            if !tested.contains(&u) {
                tested.push(u.clone());
                if ctx.is_nilpotent(&u, tol)? {
                    next.push(u);
                    continue;
                }
            }
            next.extend(parts.iter().map(|&i| clusters[i].clone()));
        }
        clusters = next;
    }

    let mut out = Vec::with_capacity(clusters.len());
    for members in clusters {
        let value = centroid(spec, &members);
        let geo = if members.len() == 1 {
            1
        } else {
            let (_, t11) = ctx.restriction(&members);
            let thr = tol.power_threshold(1);
            svd(&shifted(&t11, trace_centroid(&t11)))?.s.iter().filter(|&&x| x <= thr).count().max(1)
        };
        out.push(EigenvalueCluster {
            value,
            algebraic_multiplicity: members.len(),
            geometric_multiplicity: geo,
            member_indices: members,
        });
    }
    out.sort_by(|a, b| {
        crate::linalg::lex_cmp(&a.value, &b.value).then(a.member_indices[0].cmp(&b.member_indices[0]))
    });
    Ok(out)
}

/// Chain tops in restricted coordinates, top-down, with the nullity sequence.
fn extract_tops<T: Real>(nmat: &CMatrix<T>, tol: &Tolerances<T>) -> Result<(Vec<(usize, CVector<T>)>, Vec<usize>)> {
    let m = nmat.nrows();
    let mut powers = vec![crate::linalg::identity::<T>(m)];
    let mut nullities = vec![0usize];
    let mut kernels: Vec<CMatrix<T>> = vec![Array2::from_elem((m, 0), czero())];
    for k in 1..=m {
        let p = powers[k - 1].dot(nmat);
        let thr = tol.power_threshold(k);
        let kern = null_space(&p, thr)?;
        nullities.push(kern.ncols());
        kernels.push(kern);
        powers.push(p);
        if nullities[k] == m {
            break;
        }
    }
    let index = nullities.len() - 1;
    if nullities[index] != m {
        return Err(Error::ChainInconsistent(format!(
            "restricted operator is not nilpotent: nullities {:?} of {}",
            &nullities[1..],
            m
        )));
    }
    let d: Vec<usize> = (1..=index).map(|k| nullities[k].saturating_sub(nullities[k - 1])).collect();
    if d.iter().any(|&x| x == 0) || d.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::ChainInconsistent(format!("nullity sequence {:?} is not a Weyr characteristic", &nullities[1..])));
    }

    let mut tops: Vec<(usize, CVector<T>)> = Vec::new();
    for l in (1..=index).rev() {
        let count = d[l - 1] - if l < index { d[l] } else { 0 };
        if count == 0 {
            continue;
        }
        let mut cols: Vec<CVector<T>> = kernels[l - 1].columns().into_iter().map(|c| c.to_owned()).collect();
        for (len, x) in &tops {
            let mut y = matrix_power(nmat, len - l).dot(x);
            let ny = norm2(y.view());
            y.mapv_inplace(|z| z / ny);
            cols.push(y);
        }
        let kl = &kernels[l];
        let proj = if cols.is_empty() {
            kl.clone()
        } else {
            let smat = ndarray::stack(Axis(1), &cols.iter().map(|c| c.view()).collect::<Vec<_>>()).expect("equal lengths");
            let r = cols.len();
            let b = svd(&smat)?.u.slice(s![.., ..r]).to_owned();
            kl - &b.dot(&adjoint(&b).dot(kl))
        };
        let dp = svd(&proj)?;
        if dp.s.len() < count || dp.s[count - 1] <= T::lit(1e-6) {
            return Err(Error::ChainInconsistent(format!("cannot complete {} chain tops of length {}", count, l)));
        }
        for i in 0..count {
            tops.push((l, kl.dot(&dp.v.column(i))));
        }
    }
    Ok((tops, nullities[1..].to_vec()))
}

fn full_chains<T: Real>(h: &CMatrix<T>, c: Complex<T>, q: &CMatrix<T>, tops: &[(usize, CVector<T>)]) -> Vec<Vec<CVector<T>>> {
    let a = shifted(h, c);
    let gauge = T::lit(1e-8);
    tops.iter()
        .map(|(len, x)| {
            let mut top = q.dot(x);
            fix_phase(&mut top, gauge);
            let mut chain = vec![top];
            for _ in 1..*len {
                let next = a.dot(chain.last().expect("non-empty"));
                chain.push(next);
            }
            chain.reverse();
            chain
        })
        .collect()
}

fn chain_defect<T: Real>(a: &CMatrix<T>, chain: &[CVector<T>]) -> T {
    let mut worst = T::zero();
    for k in 0..chain.len() {
        let mut r = a.dot(&chain[k]);
        if k > 0 {
            r = &r - &chain[k - 1];
        }
        worst = worst.max(norm2(r.view()) / T::one().max(norm2(chain[k].view())));
    }
    worst
}

fn upward_check<T: Real>(a: &CMatrix<T>, chain: &[CVector<T>], rank_tol: T) -> Result<T> {
    if chain.len() < 2 {
        return Ok(T::zero());
    }
    let d = svd(a)?;
    let smax = d.s[0];
    let mut worst = T::zero();
    for k in 1..chain.len() {
        let b = &chain[k - 1];
        let mut x = CVector::<T>::from_elem(a.ncols(), czero());
        for (j, &sj) in d.s.iter().enumerate() {
            if sj > rank_tol * smax {
                let coef = crate::linalg::inner(d.u.column(j), b.view()) / sj;
                x = &x + &d.v.column(j).mapv(|z| z * coef);
            }
        }
        let r = &a.dot(&x) - b;
        worst = worst.max(norm2(r.view()) / T::one().max(norm2(b.view())));
    }
    Ok(worst)
}

struct Contexts<T> {
    right: SchurContext<T>,
    left: SchurContext<T>,
}

impl<T: Real> Contexts<T> {
    fn new(h: &CMatrix<T>, spec: &SpectralData<T>) -> Result<Self> {
        Ok(Self {
            right: SchurContext::new(schur(h)?, &spec.eigenvalues, false),
            left: SchurContext::new(schur(&adjoint(h))?, &spec.eigenvalues, true),
        })
    }
}

/// Builds the right and left Jordan chains of one cluster, longest first.
/// Length-one entries are the diagonalizable modes of the cluster.
pub fn build_jordan_chains<T: Real>(h: &CMatrix<T>, cluster: &EigenvalueCluster<T>, tol: &Tolerances<T>) -> Result<Vec<JordanChain<T>>> {
    let spec = eig_general(h)?;
    let ctx = Contexts::new(h, &spec)?;
    Ok(chains_with_context(h, &ctx, cluster, tol)?.0)
}

fn chains_with_context<T: Real>(
    h: &CMatrix<T>,
    ctx: &Contexts<T>,
    cluster: &EigenvalueCluster<T>,
    tol: &Tolerances<T>,
) -> Result<(Vec<JordanChain<T>>, Vec<usize>)> {
    let c = cluster.value;
    let (qr, tr) = ctx.right.restriction(&cluster.member_indices);
    let (tops_r, nullities) = extract_tops(&shifted(&tr, trace_centroid(&tr)), tol)?;
    let (ql, tl) = ctx.left.restriction(&cluster.member_indices);
    let (tops_l, nullities_l) = extract_tops(&shifted(&tl, trace_centroid(&tl)), tol)?;
    if nullities != nullities_l {
        return Err(Error::ChainInconsistent(format!(
            "right nullities {:?} differ from left nullities {:?}",
            nullities, nullities_l
        )));
    }
    let right = full_chains(h, c, &qr, &tops_r);
    let hd = adjoint(h);
    let left = full_chains(&hd, c.conj(), &ql, &tops_l);
    let a = shifted(h, c);
    let ad = shifted(&hd, c.conj());
    let nontrivial = right.iter().any(|ch| ch.len() > 1);
    let mut out = Vec::with_capacity(right.len());
    for (r, l) in right.into_iter().zip(left) {
        let residual = chain_defect(&a, &r).max(chain_defect(&ad, &l));
        if residual > tol.chain_residual_tol {
            return Err(Error::ChainInconsistent(format!("chain residual {:e} above tolerance", residual.to_f64().unwrap_or(f64::NAN))));
        }
        let upward = if nontrivial && r.len() > 1 {
            upward_check(&a, &r, tol.rank_tol)?.max(upward_check(&ad, &l, tol.rank_tol)?)
        } else {
            T::zero()
        };
        if upward > tol.chain_residual_tol {
            return Err(Error::ChainInconsistent(format!("upward solve residual {:e} above tolerance", upward.to_f64().unwrap_or(f64::NAN))));
        }
        out.push(JordanChain {
            eigenvalue: c,
            length: r.len(),
            right_chain: r,
            left_chain: l,
            residual,
            upward_residual: upward,
        });
    }
    Ok((out, nullities))
}

/// Full structure detection with default tolerances for `h`.
pub fn detect_structure<T: Real>(h: &CMatrix<T>) -> Result<JordanStructure<T>> {
    detect_structure_with(h, &Tolerances::for_matrix(h))
}

pub fn detect_structure_with<T: Real>(h: &CMatrix<T>, tol: &Tolerances<T>) -> Result<JordanStructure<T>> {
    let spec = eig_general(h)?;
    let ctx = Contexts::new(h, &spec)?;
    let clusters = clusters_with_context(&ctx.right, &spec, tol)?;
    let mut chains = Vec::with_capacity(clusters.len());
    let mut simple = Vec::with_capacity(clusters.len());
    let mut nullities = Vec::with_capacity(clusters.len());
    for cl in &clusters {
        let (all, nul) = chains_with_context(h, &ctx, cl, tol)?;
        let lengths: Vec<usize> = all.iter().map(|c| c.length).collect();
        if lengths != segre_from_nullities(&nul) {
            return Err(Error::ChainInconsistent(format!("chain lengths {:?} disagree with nullities {:?}", lengths, nul)));
        }
        let (long, short): (Vec<_>, Vec<_>) = all.into_iter().partition(|c| c.length > 1);
        simple.push(
            short
                .into_iter()
                .map(|c| SimpleMode {
                    eigenvalue: c.eigenvalue,
                    right: c.right_chain.into_iter().next().expect("length one"),
                    left: c.left_chain.into_iter().next().expect("length one"),
                })
                .collect(),
        );
        chains.push(long);
        nullities.push(nul);
    }
    Ok(JordanStructure { dim: h.nrows(), clusters, chains, simple_modes: simple, nullities, tolerances: *tol })
}
