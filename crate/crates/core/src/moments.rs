//! Return moments: sample moments for equity windows and analytic moments
//! for betting slates.

use ndarray::{Array2, ArrayView2};

use crate::betting::BettingSlate;
use crate::error::{Error, Result};

/// Column means and sample covariance (divisor rows − 1) of a returns window.
/// Two-pass computation; the window must have at least 2 rows and no missing
/// values.
pub fn equity_moments(window: ArrayView2<'_, f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let (t, n) = window.dim();
    if t < 2 {
        return Err(Error::InvalidArgument(format!(
            "window has {t} rows; need at least 2 for a sample covariance"
        )));
    }
    if n < 1 {
        return Err(Error::InvalidArgument("window has no columns".into()));
    }
    if window.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData(
            "window contains missing or non-finite values".into(),
        ));
    }
    let mut mu = vec![0.0; n];
    for j in 0..n {
        mu[j] = window.column(j).sum() / t as f64;
    }
    let mut sigma = Array2::zeros((n, n));
    let denom = (t - 1) as f64;
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for r in 0..t {
                acc += (window[[r, i]] - mu[i]) * (window[[r, j]] - mu[j]);
            }
            let v = acc / denom;
            sigma[[i, j]] = v;
            sigma[[j, i]] = v;
        }
    }
    Ok((mu, sigma))
}

/// Analytic moments for a slate of simultaneous unit bets:
/// μᵢ = dᵢpᵢ − 1, Σᵢᵢ = dᵢ²pᵢ(1−pᵢ), Σᵢⱼ = −dᵢpᵢdⱼpⱼ within a match
/// (the outcomes are mutually exclusive) and 0 across matches, giving Σ a
/// block-diagonal structure of one 3×3 block per match.
pub fn betting_moments(slate: &BettingSlate) -> (Vec<f64>, Array2<f64>) {
    let n = slate.n();
    let mut mu = vec![0.0; n];
    let mut sigma = Array2::zeros((n, n));
    for i in 0..n {
        let (d, p) = (slate.odds(i), slate.prob(i));
        mu[i] = d * p - 1.0;
        sigma[[i, i]] = d * d * p * (1.0 - p);
        for j in (i + 1)..n {
            if slate.match_of(i) == slate.match_of(j) {
                let v = -d * p * slate.odds(j) * slate.prob(j);
                sigma[[i, j]] = v;
                sigma[[j, i]] = v;
            }
        }
    }
    (mu, sigma)
}
