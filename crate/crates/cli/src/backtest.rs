//! Out-of-sample evaluation: monthly-rebalanced equity windows and settled
//! betting slates.

use serde::{Deserialize, Serialize};

use folio_core::metrics::{
    bootstrap_ci, brier_logloss, moments_skew_kurtosis, psr_mintrl, roi, sharpe, FinancialReport,
};
use folio_core::{
    build_objective_qubo, equity_moments,
    ingest::{load_ff49, select_universe, ReturnsPanel},
    project_to_k, sample, InstanceKind, PortfolioInstance, QuboMatrix, Selection,
};

use crate::config::{BacktestMethod, DataSource, PipelineConfig};
use crate::error::{CliError, Result};
use crate::pipeline::{build_cases, fmt_f64, sampler_spec_for};
use crate::synth::synth_equity_panel;

/// One scored evaluation window or slate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BacktestRow {
    pub index: usize,
    pub label: String,
    pub n: usize,
    pub k: usize,
    pub picks: usize,
    pub t_obs: usize,
    pub sharpe: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub psr: Option<f64>,
    pub min_trl: Option<f64>,
    pub skew: Option<f64>,
    pub kurtosis: Option<f64>,
    pub roi: Option<f64>,
    pub brier: Option<f64>,
    pub log_loss: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BacktestOutput {
    pub case: String,
    pub method: String,
    pub rows: Vec<BacktestRow>,
    /// Full-series metrics: concatenated daily returns for equities, pooled
    /// picks for betting.
    pub overall: BacktestRow,
}

/// Window seeds derive from the first config seed and the window index.
fn window_seed(base: u64, index: usize) -> u64 {
    base ^ ((index as u64 + 1) << 32)
}

fn select_weight_k(
    cfg: &PipelineConfig,
    objective: &QuboMatrix,
    k: usize,
    seed: u64,
) -> Result<Selection> {
    match cfg.backtest_method {
        BacktestMethod::Greedy => {
            Ok(folio_core::greedy_construct(objective, k, cfg.sampler.restarts, seed)?)
        }
        BacktestMethod::PenaltyFree => {
            let spec = sampler_spec_for(cfg, objective, k);
            let set = sample(&spec, objective, seed)?;
            let mut best: Option<(f64, Selection)> = None;
            for rec in &set.records {
                let trace = project_to_k(objective, &rec.selection, k)?;
                let e = objective.energy(&trace.end)?;
                let better = match &best {
                    None => true,
                    Some((be, bsel)) => {
                        e < *be
                            || (e == *be
                                && trace.end.support_lex_cmp(bsel) == std::cmp::Ordering::Less)
                    }
                };
                if better {
                    best = Some((e, trace.end));
                }
            }
            Ok(best.expect("non-empty sample set").1)
        }
    }
}

fn financial_from_returns(cfg: &PipelineConfig, returns: &[f64], seed: u64) -> FinancialReport {
    let t_obs = returns.len();
    let mut report = FinancialReport {
        sharpe: None,
        ci_low: None,
        ci_high: None,
        psr: None,
        min_trl: None,
        t_obs,
        skew: None,
        kurtosis: None,
        roi: None,
        brier: None,
        log_loss: None,
    };
    if let Ok(sr) = sharpe(returns) {
        report.sharpe = Some(sr);
        if let Ok((lo, hi)) = bootstrap_ci(returns, cfg.bootstrap_draws, 0.95, seed) {
            report.ci_low = Some(lo);
            report.ci_high = Some(hi);
        }
        if let Ok((skew, kurt)) = moments_skew_kurtosis(returns) {
            report.skew = Some(skew);
            report.kurtosis = Some(kurt);
            if let Ok((psr, min_trl)) = psr_mintrl(sr, t_obs, skew, kurt, 0.0) {
                report.psr = Some(psr);
                report.min_trl = Some(min_trl);
            }
        }
    }
    report
}

fn row_from_report(
    index: usize,
    label: String,
    n: usize,
    k: usize,
    picks: usize,
    rep: &FinancialReport,
) -> BacktestRow {
    BacktestRow {
        index,
        label,
        n,
        k,
        picks,
        t_obs: rep.t_obs,
        sharpe: rep.sharpe,
        ci_low: rep.ci_low,
        ci_high: rep.ci_high,
        psr: rep.psr,
        min_trl: rep.min_trl,
        skew: rep.skew,
        kurtosis: rep.kurtosis,
        roi: rep.roi,
        brier: rep.brier,
        log_loss: rep.log_loss,
    }
}

fn equity_backtest(cfg: &PipelineConfig) -> Result<BacktestOutput> {
    let panel: ReturnsPanel = match &cfg.source {
        DataSource::Synth => synth_equity_panel(&cfg.synth)?,
        DataSource::Files(paths) => load_ff49(&paths[0])?,
    };
    let (n, k) = cfg.pairs[0];
    let window_days = cfg.window_days;
    // month starts with a full estimation window before them
    let rebalances: Vec<usize> = (1..panel.days())
        .filter(|&t| {
            use chrono::Datelike;
            let (a, b) = (panel.dates()[t - 1], panel.dates()[t]);
            (a.month() != b.month() || a.year() != b.year()) && t >= window_days
        })
        .collect();
    if rebalances.is_empty() {
        return Err(CliError::Data(format!(
            "insufficient history: no month start after {window_days} trading days"
        )));
    }

    let mut rows = Vec::new();
    let mut all_returns = Vec::new();
    for (w, &t) in rebalances.iter().enumerate() {
        let eval_end = rebalances.get(w + 1).copied().unwrap_or(panel.days());
        // the universe is re-ranked on each window's own estimation rows
        let ranking = (panel.dates()[t - window_days], panel.dates()[t - 1]);
        let universe = select_universe(&panel, n, ranking)?;
        let est = universe
            .returns()
            .slice(ndarray::s![t - window_days..t, ..]);
        let (mu, sigma) = equity_moments(est)?;
        let instance = PortfolioInstance::new(
            mu,
            sigma,
            cfg.lambda,
            cfg.penalty_a.max(0.0),
            k,
            universe.assets().to_vec(),
            InstanceKind::Equity,
        )?;
        let objective = build_objective_qubo(&instance)?;
        let seed = window_seed(cfg.seeds[0], w);
        let picks = select_weight_k(cfg, &objective, k, seed)?;
        // equal-weight daily portfolio returns over the evaluation window
        let daily: Vec<f64> = (t..eval_end)
            .map(|r| {
                picks
                    .support()
                    .iter()
                    .map(|&c| universe.returns()[[r, c]])
                    .sum::<f64>()
                    / picks.weight() as f64
            })
            .collect();
        let report = financial_from_returns(cfg, &daily, seed);
        rows.push(row_from_report(
            w,
            panel.dates()[t].format("%Y-%m-%d").to_string(),
            n,
            k,
            picks.weight(),
            &report,
        ));
        all_returns.extend(daily);
    }
    let overall_report = financial_from_returns(cfg, &all_returns, cfg.seeds[0]);
    let overall = row_from_report(
        rows.len(),
        "overall".into(),
        n,
        k,
        k,
        &overall_report,
    );
    Ok(BacktestOutput {
        case: "equity".into(),
        method: method_name(cfg),
        rows,
        overall,
    })
}

fn betting_backtest(cfg: &PipelineConfig) -> Result<BacktestOutput> {
    let cases = build_cases(cfg, cfg.slates_per_size)?;
    let mut rows = Vec::new();
    let mut pooled_probs = Vec::new();
    let mut pooled_outcomes = Vec::new();
    let mut roi_sum = 0.0;
    let mut roi_count = 0usize;
    for (idx, case) in cases.iter().enumerate() {
        let slate = case.slate.as_ref().expect("betting cases carry slates");
        let results: Option<Vec<folio_core::MatchResult>> =
            slate.matches().iter().map(|m| m.result).collect();
        let Some(results) = results else {
            continue; // unsettled slate: nothing to score
        };
        let objective = build_objective_qubo(&case.instance)?;
        let seed = window_seed(cfg.seeds[0], idx);
        let picks = select_weight_k(cfg, &objective, case.k, seed)?;
        let r = roi(slate, &picks, &results)?;
        let probs: Vec<f64> = picks.support().iter().map(|&i| slate.prob(i)).collect();
        let outcomes: Vec<bool> = picks
            .support()
            .iter()
            .map(|&i| results[slate.match_of(i)].outcome_index() == i % 3)
            .collect();
        let (brier, log_loss) = brier_logloss(&probs, &outcomes)?;
        rows.push(BacktestRow {
            index: idx,
            label: format!("slate{}_{}", case.n, case.slate_index),
            n: case.n,
            k: case.k,
            picks: picks.weight(),
            t_obs: picks.weight(),
            sharpe: None,
            ci_low: None,
            ci_high: None,
            psr: None,
            min_trl: None,
            skew: None,
            kurtosis: None,
            roi: Some(r),
            brier: Some(brier),
            log_loss: Some(log_loss),
        });
        roi_sum += r;
        roi_count += 1;
        pooled_probs.extend(probs);
        pooled_outcomes.extend(outcomes);
    }
    if roi_count == 0 {
        return Err(CliError::Data(
            "no settled slates available for the betting backtest".into(),
        ));
    }
    let (brier, log_loss) = brier_logloss(&pooled_probs, &pooled_outcomes)?;
    let overall = BacktestRow {
        index: rows.len(),
        label: "overall".into(),
        n: 0,
        k: 0,
        picks: pooled_probs.len(),
        t_obs: pooled_probs.len(),
        sharpe: None,
        ci_low: None,
        ci_high: None,
        psr: None,
        min_trl: None,
        skew: None,
        kurtosis: None,
        roi: Some(roi_sum / roi_count as f64),
        brier: Some(brier),
        log_loss: Some(log_loss),
    };
    Ok(BacktestOutput {
        case: "betting".into(),
        method: method_name(cfg),
        rows,
        overall,
    })
}

fn method_name(cfg: &PipelineConfig) -> String {
    match cfg.backtest_method {
        BacktestMethod::PenaltyFree => "penalty_free".into(),
        BacktestMethod::Greedy => "greedy".into(),
    }
}

/// Run the configured backtest.
pub fn backtest(cfg: &PipelineConfig) -> Result<BacktestOutput> {
    match cfg.case {
        InstanceKind::Equity => equity_backtest(cfg),
        InstanceKind::Betting => betting_backtest(cfg),
    }
}

pub const BACKTEST_HEADER: &str =
    "index,label,n,k,picks,t_obs,sharpe,ci_low,ci_high,psr,min_trl,skew,kurtosis,roi,brier,log_loss";

pub fn backtest_csv(out: &BacktestOutput) -> String {
    let mut s = String::from(BACKTEST_HEADER);
    s.push('\n');
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for r in out.rows.iter().chain(std::iter::once(&out.overall)) {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.index,
            r.label,
            r.n,
            r.k,
            r.picks,
            r.t_obs,
            opt(r.sharpe),
            opt(r.ci_low),
            opt(r.ci_high),
            opt(r.psr),
            opt(r.min_trl),
            opt(r.skew),
            opt(r.kurtosis),
            opt(r.roi),
            opt(r.brier),
            opt(r.log_loss),
        ));
    }
    s
}
