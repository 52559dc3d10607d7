//! Structural and financial evaluation metrics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::betting::{BettingSlate, MatchResult};
use crate::error::{Error, Result};
use crate::qubo::QuboMatrix;
use crate::sampler::SampleSet;
use crate::selection::Selection;

/// Structural metrics for one instance/sparsifier/sampler combination.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MetricsReport {
    /// Signed relative gap to the reference; negative means the candidate
    /// found a lower energy.
    pub regret: f64,
    pub jaccard: f64,
    pub feasibility_rate: f64,
    pub mean_hamming_weight: f64,
    pub edge_count: usize,
    pub density: f64,
    pub max_offdiag: f64,
    /// Penalized max |off-diagonal| over penalty-free max |off-diagonal|.
    pub dynamic_range_ratio: f64,
}

/// Financial metrics. Equity windows fill the Sharpe block; betting slates
/// fill ROI/Brier/log-loss; the other half stays None.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FinancialReport {
    pub sharpe: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub psr: Option<f64>,
    pub min_trl: Option<f64>,
    pub t_obs: usize,
    pub skew: Option<f64>,
    pub kurtosis: Option<f64>,
    pub roi: Option<f64>,
    pub brier: Option<f64>,
    pub log_loss: Option<f64>,
}

const REGRET_DENOM_FLOOR: f64 = 1e-12;

/// (candidate − reference) / |reference|, falling back to the absolute
/// difference when the reference is within 1e-12 of zero.
pub fn regret(candidate_energy: f64, reference_energy: f64) -> Result<f64> {
    if !candidate_energy.is_finite() || !reference_energy.is_finite() {
        return Err(Error::InvalidArgument("non-finite energy".into()));
    }
    let diff = candidate_energy - reference_energy;
    if reference_energy.abs() > REGRET_DENOM_FLOOR {
        Ok(diff / reference_energy.abs())
    } else {
        Ok(diff)
    }
}

/// Support Jaccard overlap |A∩B| / |A∪B|; 1 when both supports are empty.
pub fn jaccard(a: &Selection, b: &Selection) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "selection lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let sa: std::collections::HashSet<usize> = a.support().iter().copied().collect();
    let sb: std::collections::HashSet<usize> = b.support().iter().copied().collect();
    let union = sa.union(&sb).count();
    if union == 0 {
        return Ok(1.0);
    }
    Ok(sa.intersection(&sb).count() as f64 / union as f64)
}

/// Occurrence-weighted exact-K feasibility rate and mean Hamming weight of
/// raw samples.
pub fn feasibility_and_weight(samples: &SampleSet, k: usize) -> (f64, f64) {
    let mut feasible: u64 = 0;
    let mut weight_sum: f64 = 0.0;
    let mut total: u64 = 0;
    for rec in &samples.records {
        let occ = rec.occurrences as u64;
        total += occ;
        weight_sum += rec.selection.weight() as f64 * occ as f64;
        if rec.selection.weight() == k {
            feasible += occ;
        }
    }
    if total == 0 {
        return (0.0, 0.0);
    }
    (feasible as f64 / total as f64, weight_sum / total as f64)
}

/// Edge statistics of a model.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EdgeStats {
    pub edge_count: usize,
    pub density: f64,
    pub max_offdiag: f64,
}

pub fn edge_stats(q: &QuboMatrix) -> EdgeStats {
    let n = q.n();
    let pairs = n * (n - 1) / 2;
    let edge_count = q.edge_count();
    EdgeStats {
        edge_count,
        density: if pairs == 0 {
            0.0
        } else {
            edge_count as f64 / pairs as f64
        },
        max_offdiag: q.max_offdiag(),
    }
}

/// Ratio of the largest off-diagonal magnitudes, penalized over objective.
pub fn dynamic_range_ratio(penalized: &QuboMatrix, objective: &QuboMatrix) -> Result<f64> {
    if penalized.n() != objective.n() {
        return Err(Error::Dimension("model sizes differ".into()));
    }
    let denom = objective.max_offdiag();
    if denom <= 0.0 {
        return Err(Error::InvalidArgument(
            "objective model has an all-zero off-diagonal".into(),
        ));
    }
    Ok(penalized.max_offdiag() / denom)
}

/// Daily Sharpe ratio: mean over sample standard deviation (divisor T−1),
/// with no annualization.
pub fn sharpe(returns: &[f64]) -> Result<f64> {
    if returns.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 observations, got {}",
            returns.len()
        )));
    }
    let t = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / t;
    let var = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (t - 1.0);
    if var <= 0.0 {
        return Err(Error::InvalidData("zero-variance return series".into()));
    }
    Ok(mean / var.sqrt())
}

/// Percentile bootstrap interval for the Sharpe ratio. Zero-variance
/// resamples are redrawn up to 10 times and then discarded; the run errors
/// when more than half the draws degenerate.
pub fn bootstrap_ci(
    returns: &[f64],
    draws: u32,
    level: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    if returns.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 observations".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "level must be in (0,1), got {level}"
        )));
    }
    let t = returns.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = Vec::with_capacity(draws as usize);
    for _ in 0..draws {
        let mut sr = None;
        for _attempt in 0..10 {
            let resample: Vec<f64> = (0..t).map(|_| returns[rng.gen_range(0..t)]).collect();
            if let Ok(s) = sharpe(&resample) {
                sr = Some(s);
                break;
            }
        }
        if let Some(s) = sr {
            stats.push(s);
        }
    }
    if stats.len() * 2 < draws as usize {
        return Err(Error::InvalidData(
            "more than half the bootstrap draws degenerated".into(),
        ));
    }
    stats.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = (1.0 - level) / 2.0;
    Ok((percentile(&stats, alpha), percentile(&stats, 1.0 - alpha)))
}

/// Linear-interpolation percentile over a sorted slice.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Population skewness and non-excess kurtosis (a normal series has
/// kurtosis 3), as the PSR denominator expects.
pub fn moments_skew_kurtosis(returns: &[f64]) -> Result<(f64, f64)> {
    if returns.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 observations".into()));
    }
    let t = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / t;
    let m2 = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / t;
    if m2 <= 0.0 {
        return Err(Error::InvalidData("zero-variance return series".into()));
    }
    let m3 = returns.iter().map(|r| (r - mean).powi(3)).sum::<f64>() / t;
    let m4 = returns.iter().map(|r| (r - mean).powi(4)).sum::<f64>() / t;
    Ok((m3 / m2.powf(1.5), m4 / (m2 * m2)))
}

/// Confidence level used for the minimum track record length.
pub const MINTRL_CONFIDENCE: f64 = 0.95;

/// Probabilistic Sharpe Ratio and minimum track record length.
///
/// psr = Φ((SR − SR*)·√(T−1) / √(1 − γ₃SR + ((γ₄−1)/4)SR²)), with γ₄ the
/// non-excess kurtosis; min_trl = 1 + (1 − γ₃SR + ((γ₄−1)/4)SR²)·(z/(SR−SR*))²
/// in the same period units as T, at the 0.95 confidence level. SR = SR*
/// yields psr exactly 0.5 and an infinite min_trl.
pub fn psr_mintrl(
    sharpe: f64,
    t_obs: usize,
    skew: f64,
    kurtosis: f64,
    benchmark_sr: f64,
) -> Result<(f64, f64)> {
    if t_obs < 2 {
        return Err(Error::InvalidArgument(format!(
            "t_obs must be >= 2, got {t_obs}"
        )));
    }
    let variance_adj = 1.0 - skew * sharpe + (kurtosis - 1.0) / 4.0 * sharpe * sharpe;
    if variance_adj <= 0.0 {
        return Err(Error::InvalidData(format!(
            "non-positive Sharpe variance adjustment {variance_adj}"
        )));
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let z_stat = (sharpe - benchmark_sr) * ((t_obs - 1) as f64).sqrt() / variance_adj.sqrt();
    let psr = normal.cdf(z_stat);
    let min_trl = if sharpe == benchmark_sr {
        f64::INFINITY
    } else {
        let z_level = normal.inverse_cdf(MINTRL_CONFIDENCE);
        1.0 + variance_adj * (z_level / (sharpe - benchmark_sr)).powi(2)
    };
    Ok((psr, min_trl))
}

/// Realized return on investment for equal unit stakes: each pick returns
/// d − 1 when its outcome won and −1 otherwise, averaged over the picks.
pub fn roi(slate: &BettingSlate, picks: &Selection, results: &[MatchResult]) -> Result<f64> {
    if picks.len() != slate.n() {
        return Err(Error::Dimension(format!(
            "picks length {} vs slate size {}",
            picks.len(),
            slate.n()
        )));
    }
    if results.len() != slate.match_count() {
        return Err(Error::Dimension(format!(
            "{} results for {} matches",
            results.len(),
            slate.match_count()
        )));
    }
    if picks.weight() == 0 {
        return Err(Error::InvalidArgument("no picks selected".into()));
    }
    let mut total = 0.0;
    for &i in picks.support() {
        let won = results[slate.match_of(i)].outcome_index() == i % 3;
        total += if won { slate.odds(i) - 1.0 } else { -1.0 };
    }
    Ok(total / picks.weight() as f64)
}

const PROB_CLAMP: f64 = 1e-12;

/// Brier score and log-loss over selected picks' probabilities and binary
/// outcomes. Probabilities must lie strictly inside (0,1); interior values
/// are clamped to [1e-12, 1−1e-12] before the log.
pub fn brier_logloss(probabilities: &[f64], outcomes: &[bool]) -> Result<(f64, f64)> {
    if probabilities.len() != outcomes.len() {
        return Err(Error::Dimension(format!(
            "{} probabilities for {} outcomes",
            probabilities.len(),
            outcomes.len()
        )));
    }
    if probabilities.is_empty() {
        return Err(Error::InvalidArgument("no picks to score".into()));
    }
    let mut brier = 0.0;
    let mut ll = 0.0;
    for (&p, &y) in probabilities.iter().zip(outcomes) {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "probability {p} outside (0,1)"
            )));
        }
        let yv = if y { 1.0 } else { 0.0 };
        brier += (p - yv).powi(2);
        let pc = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        ll -= yv * pc.ln() + (1.0 - yv) * (1.0 - pc).ln();
    }
    let n = probabilities.len() as f64;
    Ok((brier / n, ll / n))
}
