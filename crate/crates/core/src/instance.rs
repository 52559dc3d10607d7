//! Problem instances and the two QUBO builders.
//!
//! The penalized builder folds the exact-K constraint into the matrix as
//! A(1ᵀx − K)², which adds the constant A to every off-diagonal entry. The
//! objective-only builder carries just the return and risk terms.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::qubo::QuboMatrix;

/// Which case study an instance belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum InstanceKind {
    Equity,
    Betting,
}

impl std::fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InstanceKind::Equity => write!(f, "equity"),
            InstanceKind::Betting => write!(f, "betting"),
        }
    }
}

/// A cardinality-constrained selection instance: expected returns, covariance,
/// risk aversion, penalty weight, and the target cardinality.
#[derive(Debug, Clone)]
pub struct PortfolioInstance {
    mu: Vec<f64>,
    sigma: Array2<f64>,
    lambda: f64,
    penalty_a: f64,
    k: usize,
    labels: Vec<String>,
    kind: InstanceKind,
}

const SYMMETRY_RTOL: f64 = 1e-12;

impl PortfolioInstance {
    /// Validate and construct. The covariance is symmetrized as (Σ + Σᵀ)/2 on
    /// the way in; inputs whose asymmetry exceeds 1e-12 relative are rejected.
    pub fn new(
        mu: Vec<f64>,
        sigma: Array2<f64>,
        lambda: f64,
        penalty_a: f64,
        k: usize,
        labels: Vec<String>,
        kind: InstanceKind,
    ) -> Result<Self> {
        let n = mu.len();
        if sigma.nrows() != n || sigma.ncols() != n {
            return Err(Error::Dimension(format!(
                "mu has length {n} but sigma is {}x{}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if labels.len() != n {
            return Err(Error::Dimension(format!(
                "{} labels for {n} assets",
                labels.len()
            )));
        }
        if !(lambda > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be > 0, got {lambda}"
            )));
        }
        if !(penalty_a >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "penalty_a must be >= 0, got {penalty_a}"
            )));
        }
        if k < 1 || k > n {
            return Err(Error::InvalidArgument(format!(
                "k must satisfy 1 <= k <= {n}, got {k}"
            )));
        }
        let scale = sigma.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let mut sym = Array2::zeros((n, n));
        for i in 0..n {
            if sigma[[i, i]] < 0.0 {
                return Err(Error::InvalidData(format!(
                    "negative variance {} for asset {i}",
                    sigma[[i, i]]
                )));
            }
            for j in 0..n {
                let a = sigma[[i, j]];
                let b = sigma[[j, i]];
                if (a - b).abs() > SYMMETRY_RTOL * scale {
                    return Err(Error::InvalidData(format!(
                        "sigma asymmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
                sym[[i, j]] = 0.5 * (a + b);
            }
        }
        Ok(Self {
            mu,
            sigma: sym,
            lambda,
            penalty_a,
            k,
            labels,
            kind,
        })
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &Array2<f64> {
        &self.sigma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn penalty_a(&self) -> f64 {
        self.penalty_a
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn kind(&self) -> InstanceKind {
        self.kind
    }
}

/// Penalty-encoded QUBO: Q = −diag(μ) + λΣ + A·11ᵀ − 2AK·I, offset AK².
///
/// Every off-diagonal entry is λΣ[i][j] + A, so the interaction graph is
/// complete whenever λΣ[i][j] ≠ −A for all pairs.
pub fn build_penalized_qubo(inst: &PortfolioInstance) -> Result<QuboMatrix> {
    if inst.penalty_a() == 0.0 {
        return Err(Error::InvalidArgument(
            "penalty_a is 0; use build_objective_qubo for the penalty-free model".into(),
        ));
    }
    let n = inst.n();
    let a = inst.penalty_a();
    let k = inst.k() as f64;
    let mut q = Array2::zeros((n, n));
    for i in 0..n {
        q[[i, i]] = -inst.mu()[i] + inst.lambda() * inst.sigma()[[i, i]] + a - 2.0 * a * k;
        for j in (i + 1)..n {
            let v = inst.lambda() * inst.sigma()[[i, j]] + a;
            q[[i, j]] = v;
            q[[j, i]] = v;
        }
    }
    QuboMatrix::new_symmetric(q, a * k * k)
}

/// Objective-only QUBO: Q = −diag(μ) + λΣ, offset 0. The off-diagonal
/// sparsity pattern is exactly that of Σ.
pub fn build_objective_qubo(inst: &PortfolioInstance) -> Result<QuboMatrix> {
    let n = inst.n();
    let mut q = Array2::zeros((n, n));
    for i in 0..n {
        q[[i, i]] = -inst.mu()[i] + inst.lambda() * inst.sigma()[[i, i]];
        for j in (i + 1)..n {
            let v = inst.lambda() * inst.sigma()[[i, j]];
            q[[i, j]] = v;
            q[[j, i]] = v;
        }
    }
    QuboMatrix::new_symmetric(q, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::Selection;
    use ndarray::arr2;

    fn inst(mu: Vec<f64>, sigma: Array2<f64>, lambda: f64, a: f64, k: usize) -> PortfolioInstance {
        let n = mu.len();
        let labels = (0..n).map(|i| format!("A{i}")).collect();
        PortfolioInstance::new(mu, sigma, lambda, a, k, labels, InstanceKind::Equity).unwrap()
    }

    #[test]
    fn penalty_only_two_asset_case() {
        // mu = 0, sigma = 0, A = 1, K = 1, N = 2
        let p = inst(vec![0.0, 0.0], Array2::zeros((2, 2)), 1.0, 1.0, 1);
        let q = build_penalized_qubo(&p).unwrap();
        assert_eq!(q.diagonal(0), -1.0);
        assert_eq!(q.diagonal(1), -1.0);
        assert_eq!(q.q()[[0, 1]], 1.0);
        assert_eq!(q.offset(), 1.0);
        // energies equal (sum x - K)^2 directly
        let e10 = q.energy(&Selection::from_support(2, &[0]).unwrap()).unwrap();
        let e11 = q.energy(&Selection::ones(2)).unwrap();
        let e00 = q.energy(&Selection::zeros(2)).unwrap();
        assert_eq!(e10, 0.0);
        assert_eq!(e11, 1.0);
        assert_eq!(e00, 1.0);
    }

    #[test]
    fn penalized_offdiag_is_lambda_sigma_plus_a() {
        let sigma = arr2(&[[0.2, -0.05], [-0.05, 0.3]]);
        let p = inst(vec![0.01, 0.02], sigma, 2.0, 4.0, 1);
        let q = build_penalized_qubo(&p).unwrap();
        assert!((q.q()[[0, 1]] - (2.0 * -0.05 + 4.0)).abs() < 1e-15);
    }

    #[test]
    fn objective_zero_covariance_is_pure_diagonal() {
        let p = inst(vec![0.01, 0.02, 0.03], Array2::zeros((3, 3)), 1.0, 0.0, 1);
        let q = build_objective_qubo(&p).unwrap();
        assert_eq!(q.edge_count(), 0);
        assert_eq!(q.diagonal(0), -0.01);
        assert_eq!(q.offset(), 0.0);
    }

    #[test]
    fn penalized_requires_positive_a() {
        let p = inst(vec![0.0, 0.0], Array2::zeros((2, 2)), 1.0, 0.0, 1);
        assert!(build_penalized_qubo(&p).is_err());
    }

    #[test]
    fn construction_validates_shapes_and_ranges() {
        let sigma = Array2::zeros((2, 2));
        assert!(PortfolioInstance::new(
            vec![0.0; 3],
            sigma.clone(),
            1.0,
            0.0,
            1,
            vec!["a".into(), "b".into(), "c".into()],
            InstanceKind::Equity,
        )
        .is_err());
        assert!(PortfolioInstance::new(
            vec![0.0; 2],
            sigma.clone(),
            0.0,
            0.0,
            1,
            vec!["a".into(), "b".into()],
            InstanceKind::Equity,
        )
        .is_err());
        assert!(PortfolioInstance::new(
            vec![0.0; 2],
            sigma,
            1.0,
            0.0,
            3,
            vec!["a".into(), "b".into()],
            InstanceKind::Equity,
        )
        .is_err());
    }

    #[test]
    fn one_ulp_asymmetry_is_symmetrized() {
        let mut sigma = arr2(&[[1.0, 0.25], [0.25, 1.0]]);
        sigma[[1, 0]] = 0.25 + f64::EPSILON * 0.25;
        let p = inst(vec![0.0, 0.0], sigma, 1.0, 0.0, 1);
        assert_eq!(p.sigma()[[0, 1]], p.sigma()[[1, 0]]);
    }
}
