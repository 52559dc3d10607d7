//! Topology-aware sparsification of QUBO matrices.
//!
//! Four families: magnitude threshold, per-node top-k (intersection
//! symmetrized), boolean domain templates (k-NN correlation graph or the
//! betting settlement graph), and template-plus-residual-edges. Every
//! sparsifier preserves the diagonal and the offset; only off-diagonal
//! entries are zeroed.

use ndarray::Array2;

use crate::betting::BettingSlate;
use crate::error::{Error, Result};
use crate::qubo::{Convention, QuboMatrix, EDGE_EPS};

/// A symmetric boolean edge template with a true diagonal.
#[derive(Debug, Clone)]
pub struct Mask {
    m: Array2<bool>,
}

impl Mask {
    pub fn new(m: Array2<bool>) -> Result<Self> {
        let (r, c) = m.dim();
        if r != c {
            return Err(Error::Dimension(format!("mask is {r}x{c}, not square")));
        }
        for i in 0..r {
            if !m[[i, i]] {
                return Err(Error::InvalidData(format!(
                    "mask diagonal must be true (index {i})"
                )));
            }
            for j in (i + 1)..r {
                if m[[i, j]] != m[[j, i]] {
                    return Err(Error::InvalidData(format!(
                        "mask asymmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { m })
    }

    /// Complete template on n nodes.
    pub fn complete(n: usize) -> Self {
        Self {
            m: Array2::from_elem((n, n), true),
        }
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn allows(&self, i: usize, j: usize) -> bool {
        self.m[[i, j]]
    }

    /// Number of permitted unordered off-diagonal pairs.
    pub fn edge_count(&self) -> usize {
        let n = self.n();
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.m[[i, j]])
            .count()
    }
}

/// A sparsifier family with its parameters, ready to apply to a matrix.
#[derive(Debug, Clone)]
pub enum SparsifierSpec {
    Threshold { tau: f64 },
    TopK { k: usize },
    Mask { mask: Mask },
    /// Template plus the top `r` off-template pairs ranked by the absolute
    /// value of the supplied correlation matrix.
    MaskResidual { mask: Mask, r: usize, corr: Array2<f64> },
}

impl SparsifierSpec {
    pub fn apply(&self, q: &QuboMatrix) -> Result<QuboMatrix> {
        match self {
            SparsifierSpec::Threshold { tau } => sparsify_threshold(q, *tau),
            SparsifierSpec::TopK { k } => sparsify_topk(q, *k),
            SparsifierSpec::Mask { mask } => sparsify_mask(q, mask),
            SparsifierSpec::MaskResidual { mask, r, corr } => {
                sparsify_mask_residual(q, mask, *r, corr)
            }
        }
    }
}

/// Edge removal accounting: how much penalty weight a sparsification erased.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DilutionReport {
    pub removed_edges: usize,
    /// penalty_a × removed_edges, the constraint weight lost per the
    /// rank-one penalty expansion.
    pub removed_penalty_weight: f64,
    pub retained_edges: usize,
    pub edge_retention_ratio: f64,
}

fn require_symmetric(q: &QuboMatrix, op: &str) -> Result<()> {
    if q.convention() != Convention::Symmetric {
        return Err(Error::InvalidArgument(format!(
            "{op} expects the symmetric convention"
        )));
    }
    Ok(())
}

fn rebuild(q: &QuboMatrix, keep: impl Fn(usize, usize) -> bool) -> Result<QuboMatrix> {
    let n = q.n();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        out[[i, i]] = q.q()[[i, i]];
        for j in (i + 1)..n {
            if keep(i, j) {
                out[[i, j]] = q.q()[[i, j]];
                out[[j, i]] = q.q()[[j, i]];
            }
        }
    }
    QuboMatrix::new_symmetric(out, q.offset())
}

/// Zero off-diagonal entries with |q[i][j]| < τ; the diagonal and offset are
/// preserved.
pub fn sparsify_threshold(q: &QuboMatrix, tau: f64) -> Result<QuboMatrix> {
    require_symmetric(q, "sparsify_threshold")?;
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold tau must be > 0, got {tau}"
        )));
    }
    rebuild(q, |i, j| q.q()[[i, j]].abs() >= tau)
}

/// The τ that retains exactly `target` edges under [`sparsify_threshold`],
/// assuming distinct off-diagonal magnitudes: the target-th largest magnitude.
pub fn tau_for_edge_count(q: &QuboMatrix, target: usize) -> Result<f64> {
    require_symmetric(q, "tau_for_edge_count")?;
    let n = q.n();
    let mut mags: Vec<f64> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| q.q()[[i, j]].abs()))
        .filter(|m| *m > EDGE_EPS)
        .collect();
    if target == 0 || target > mags.len() {
        return Err(Error::InvalidArgument(format!(
            "target {target} outside 1..={} present edges",
            mags.len()
        )));
    }
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(mags[target - 1])
}

/// Per-node magnitude ranking of node `i`'s off-diagonal entries:
/// (|value| descending, index ascending), truncated to k.
fn topk_neighbors(q: &QuboMatrix, i: usize, k: usize) -> Vec<usize> {
    let n = q.n();
    let mut nb: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    nb.sort_by(|&a, &b| {
        let ma = q.q()[[i, a]].abs();
        let mb = q.q()[[i, b]].abs();
        mb.partial_cmp(&ma).unwrap().then(a.cmp(&b))
    });
    nb.truncate(k);
    nb
}

/// Retain edge {i,j} iff each endpoint ranks the other among its k
/// largest-magnitude neighbors (intersection symmetrization).
pub fn sparsify_topk(q: &QuboMatrix, k: usize) -> Result<QuboMatrix> {
    require_symmetric(q, "sparsify_topk")?;
    let n = q.n();
    if k < 1 {
        return Err(Error::InvalidArgument("top-k requires k >= 1".into()));
    }
    if k >= n {
        return Err(Error::InvalidArgument(format!(
            "top-k requires k < N, got k={k}, N={n}"
        )));
    }
    let tops: Vec<Vec<usize>> = (0..n).map(|i| topk_neighbors(q, i, k)).collect();
    rebuild(q, |i, j| tops[i].contains(&j) && tops[j].contains(&i))
}

/// Pearson correlation matrix of a covariance matrix. Errors on a
/// zero-variance asset, naming its index.
pub fn correlation_matrix(sigma: &Array2<f64>) -> Result<Array2<f64>> {
    let n = sigma.nrows();
    if sigma.ncols() != n {
        return Err(Error::Dimension("covariance matrix not square".into()));
    }
    for i in 0..n {
        if sigma[[i, i]] <= 0.0 {
            return Err(Error::InvalidData(format!(
                "asset {i} has zero variance; correlation undefined"
            )));
        }
    }
    let mut corr = Array2::zeros((n, n));
    for i in 0..n {
        corr[[i, i]] = 1.0;
        for j in (i + 1)..n {
            let v = sigma[[i, j]] / (sigma[[i, i]] * sigma[[j, j]]).sqrt();
            corr[[i, j]] = v;
            corr[[j, i]] = v;
        }
    }
    Ok(corr)
}

/// k-nearest-neighbor correlation template: edge {i,j} is permitted iff j is
/// among i's k largest-|correlation| neighbors OR i is among j's (union
/// symmetrization — templates encode permissions, not selections).
pub fn knn_correlation_mask(sigma: &Array2<f64>, k: usize) -> Result<Mask> {
    if k < 1 {
        return Err(Error::InvalidArgument("k-NN mask requires k >= 1".into()));
    }
    let corr = correlation_matrix(sigma)?;
    let n = corr.nrows();
    let kk = k.min(n.saturating_sub(1));
    let mut m = Array2::from_elem((n, n), false);
    for i in 0..n {
        m[[i, i]] = true;
        let mut nb: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        nb.sort_by(|&a, &b| {
            let ma = corr[[i, a]].abs();
            let mb = corr[[i, b]].abs();
            mb.partial_cmp(&ma).unwrap().then(a.cmp(&b))
        });
        for &j in nb.iter().take(kk) {
            m[[i, j]] = true;
            m[[j, i]] = true;
        }
    }
    Mask::new(m)
}

/// Settlement template for a betting slate: M disjoint 3-cliques, one per
/// match, 3M permitted pairs in total.
pub fn settlement_mask(slate: &BettingSlate) -> Mask {
    let n = slate.n();
    let mut m = Array2::from_elem((n, n), false);
    for i in 0..n {
        m[[i, i]] = true;
        for j in (i + 1)..n {
            if slate.match_of(i) == slate.match_of(j) {
                m[[i, j]] = true;
                m[[j, i]] = true;
            }
        }
    }
    Mask { m }
}

/// Zero off-diagonal entries outside the template.
pub fn sparsify_mask(q: &QuboMatrix, mask: &Mask) -> Result<QuboMatrix> {
    require_symmetric(q, "sparsify_mask")?;
    if mask.n() != q.n() {
        return Err(Error::Dimension(format!(
            "mask size {} vs model size {}",
            mask.n(),
            q.n()
        )));
    }
    rebuild(q, |i, j| mask.allows(i, j))
}

/// Template edges plus the `r` off-template unordered pairs of largest
/// absolute correlation; ties broken by (i,j) lexicographic order.
pub fn sparsify_mask_residual(
    q: &QuboMatrix,
    mask: &Mask,
    r: usize,
    corr: &Array2<f64>,
) -> Result<QuboMatrix> {
    require_symmetric(q, "sparsify_mask_residual")?;
    if mask.n() != q.n() || corr.nrows() != q.n() || corr.ncols() != q.n() {
        return Err(Error::Dimension(
            "mask/correlation size does not match the model".into(),
        ));
    }
    let n = q.n();
    let mut off_mask: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !mask.allows(i, j))
        .collect();
    if r > off_mask.len() {
        return Err(Error::InvalidArgument(format!(
            "r={r} exceeds the {} off-template pairs",
            off_mask.len()
        )));
    }
    off_mask.sort_by(|&(ai, aj), &(bi, bj)| {
        let ma = corr[[ai, aj]].abs();
        let mb = corr[[bi, bj]].abs();
        mb.partial_cmp(&ma).unwrap().then((ai, aj).cmp(&(bi, bj)))
    });
    let residual: std::collections::HashSet<(usize, usize)> =
        off_mask.into_iter().take(r).collect();
    rebuild(q, |i, j| mask.allows(i, j) || residual.contains(&(i, j)))
}

/// Edge accounting between a matrix and a sparsified version of it. Errors
/// if the sparse matrix carries an edge the original does not.
pub fn dilution_report(
    original: &QuboMatrix,
    sparse: &QuboMatrix,
    penalty_a: f64,
) -> Result<DilutionReport> {
    if original.n() != sparse.n() {
        return Err(Error::Dimension(format!(
            "original is {}, sparse is {}",
            original.n(),
            sparse.n()
        )));
    }
    let orig: std::collections::HashSet<(usize, usize)> =
        original.edges().into_iter().collect();
    let kept = sparse.edges();
    for &(i, j) in &kept {
        if !orig.contains(&(i, j)) {
            return Err(Error::InvalidData(format!(
                "sparse matrix has edge ({i},{j}) absent from the original"
            )));
        }
    }
    let retained_edges = kept.len();
    let removed_edges = orig.len() - retained_edges;
    Ok(DilutionReport {
        removed_edges,
        removed_penalty_weight: penalty_a * removed_edges as f64,
        retained_edges,
        edge_retention_ratio: if orig.is_empty() {
            1.0
        } else {
            retained_edges as f64 / orig.len() as f64
        },
    })
}
