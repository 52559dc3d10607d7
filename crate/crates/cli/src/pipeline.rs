//! Grid orchestration: build instances, sparsify, sample, project, score.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use folio_core::metrics::{dynamic_range_ratio, feasibility_and_weight, regret};
use folio_core::sparsify::correlation_matrix;
use folio_core::{
    betting_moments, build_objective_qubo, build_penalized_qubo, equity_moments,
    ingest::{build_slates, load_ff49, load_football_odds, select_universe},
    knn_correlation_mask, project_to_k, sample, settlement_mask, sparsify_mask,
    sparsify_mask_residual, sparsify_threshold, sparsify_topk, tau_for_edge_count,
    AnnealSchedule, BettingSlate, InstanceKind, PortfolioInstance, QuboMatrix, SampleSet,
    SamplerSpec, Selection,
};

use crate::config::{DataSource, PipelineConfig, ReferencePolicy, SparsifierToken};
use crate::error::{CliError, Result};
use crate::synth::{synth_equity_panel, synth_match_records};

/// One grid cell with its data: a problem instance, plus the slate behind it
/// for betting cases.
#[derive(Debug, Clone)]
pub struct CaseData {
    pub kind: InstanceKind,
    pub n: usize,
    pub k: usize,
    pub instance: PortfolioInstance,
    pub slate: Option<BettingSlate>,
    /// Which slate of this size fed the instance (betting only).
    pub slate_index: usize,
}

/// Build instance data for every (N, K) grid pair. For betting, up to
/// `slates_per_size` slates are materialized per pair.
pub fn build_cases(cfg: &PipelineConfig, slates_per_size: usize) -> Result<Vec<CaseData>> {
    match cfg.case {
        InstanceKind::Equity => equity_cases(cfg),
        InstanceKind::Betting => betting_cases(cfg, slates_per_size),
    }
}

fn equity_cases(cfg: &PipelineConfig) -> Result<Vec<CaseData>> {
    let panel = match &cfg.source {
        DataSource::Synth => synth_equity_panel(&cfg.synth)?,
        DataSource::Files(paths) => load_ff49(&paths[0])?,
    };
    let est_days = cfg.window_days.min(panel.days());
    if est_days < 2 {
        return Err(CliError::Data("panel too short for an estimation window".into()));
    }
    let est_start = panel.days() - est_days;
    let ranking_window = (panel.dates()[est_start], *panel.dates().last().expect("nonempty"));

    let mut out = Vec::new();
    for &(n, k) in &cfg.pairs {
        let universe = select_universe(&panel, n, ranking_window)?;
        let window = universe
            .returns()
            .slice(ndarray::s![est_start..universe.days(), ..]);
        let (mu, sigma) = equity_moments(window)?;
        let instance = PortfolioInstance::new(
            mu,
            sigma,
            cfg.lambda,
            cfg.penalty_a,
            k,
            universe.assets().to_vec(),
            InstanceKind::Equity,
        )?;
        out.push(CaseData {
            kind: InstanceKind::Equity,
            n,
            k,
            instance,
            slate: None,
            slate_index: 0,
        });
    }
    Ok(out)
}

fn betting_cases(cfg: &PipelineConfig, slates_per_size: usize) -> Result<Vec<CaseData>> {
    let records = match &cfg.source {
        DataSource::Synth => synth_match_records(&cfg.synth)?,
        DataSource::Files(paths) => {
            let mut all = Vec::new();
            for p in paths {
                all.extend(load_football_odds(p)?);
            }
            all
        }
    };
    let sizes: Vec<usize> = cfg.pairs.iter().map(|&(n, _)| n / 3).collect();
    let slates = build_slates(&records, 3, &sizes)?;

    let mut out = Vec::new();
    for &(n, k) in &cfg.pairs {
        let of_size: Vec<&BettingSlate> = slates.iter().filter(|s| s.n() == n).collect();
        if of_size.is_empty() {
            return Err(CliError::Data(format!(
                "no slate of {} matches available for N={n}",
                n / 3
            )));
        }
        for (slate_index, slate) in of_size.into_iter().take(slates_per_size).enumerate() {
            let (mu, sigma) = betting_moments(slate);
            let labels = (0..slate.n())
                .map(|i| {
                    let m = &slate.matches()[i / 3];
                    let tag = ["H", "D", "A"][i % 3];
                    format!("{}v{}:{tag}", m.home, m.away)
                })
                .collect();
            let instance = PortfolioInstance::new(
                mu,
                sigma,
                cfg.lambda,
                cfg.penalty_a,
                k,
                labels,
                InstanceKind::Betting,
            )?;
            out.push(CaseData {
                kind: InstanceKind::Betting,
                n,
                k,
                instance,
                slate: Some(slate.clone()),
                slate_index,
            });
        }
    }
    Ok(out)
}

/// Apply a sparsifier token to the penalized/objective pair of a case,
/// returning the matrix the sampler will see.
pub fn sampled_matrix(
    token: &SparsifierToken,
    case: &CaseData,
    penalized: &QuboMatrix,
    objective: &QuboMatrix,
) -> Result<QuboMatrix> {
    let q = match token {
        SparsifierToken::Dense => penalized.clone(),
        SparsifierToken::Objective => objective.clone(),
        SparsifierToken::Threshold(tau) => sparsify_threshold(penalized, *tau)?,
        SparsifierToken::ThresholdEdges(edges) => {
            let tau = tau_for_edge_count(penalized, *edges)?;
            sparsify_threshold(penalized, tau)?
        }
        SparsifierToken::TopK(k) => sparsify_topk(penalized, *k)?,
        SparsifierToken::Knn(k) => {
            let mask = knn_correlation_mask(case.instance.sigma(), *k)?;
            sparsify_mask(penalized, &mask)?
        }
        SparsifierToken::Settlement => {
            let slate = require_slate(case)?;
            sparsify_mask(penalized, &settlement_mask(slate))?
        }
        SparsifierToken::KnnResidual(k, r) => {
            let mask = knn_correlation_mask(case.instance.sigma(), *k)?;
            let corr = correlation_matrix(case.instance.sigma())?;
            sparsify_mask_residual(penalized, &mask, *r, &corr)?
        }
        SparsifierToken::SettlementResidual(r) => {
            let slate = require_slate(case)?;
            let corr = correlation_matrix(case.instance.sigma())?;
            sparsify_mask_residual(penalized, &settlement_mask(slate), *r, &corr)?
        }
    };
    Ok(q)
}

fn require_slate(case: &CaseData) -> Result<&BettingSlate> {
    case.slate
        .as_ref()
        .ok_or_else(|| CliError::Config("settlement sparsifier needs a betting case".into()))
}

/// The offline reference for one case: the constrained optimum when the
/// subset count fits the budget, greedy-128 otherwise.
#[derive(Debug, Clone)]
pub struct Reference {
    pub selection: Selection,
    pub energy: f64,
    pub kind: &'static str,
    pub exact_fallback: bool,
}

pub fn reference_for(
    cfg: &PipelineConfig,
    q: &QuboMatrix,
    k: usize,
) -> Result<Reference> {
    let greedy = |fallback: bool| -> Result<Reference> {
        let sel = folio_core::greedy_construct(q, k, cfg.sampler.restarts, cfg.seeds[0])?;
        let energy = q.energy(&sel)?;
        Ok(Reference {
            selection: sel,
            energy,
            kind: "greedy128",
            exact_fallback: fallback,
        })
    };
    let exact = || -> Result<Reference> {
        let (sel, energy, _) = folio_core::brute_force_k_subsets(q, k, cfg.budget)?;
        Ok(Reference {
            selection: sel,
            energy,
            kind: "exact",
            exact_fallback: false,
        })
    };
    match cfg.reference {
        ReferencePolicy::Greedy => greedy(false),
        ReferencePolicy::Exact => match exact() {
            Ok(r) => Ok(r),
            Err(CliError::Budget(_)) => greedy(true),
            Err(e) => Err(e),
        },
        ReferencePolicy::Auto => {
            if folio_core::sampler::binomial(q.n(), k) <= cfg.budget as u128 {
                exact()
            } else {
                greedy(false)
            }
        }
    }
}

/// Build the sampler spec for a matrix, applying β auto-scaling for SA.
pub fn sampler_spec_for(cfg: &PipelineConfig, q: &QuboMatrix, k: usize) -> SamplerSpec {
    match cfg.sampler.kind.as_str() {
        "greedy" => SamplerSpec::Greedy {
            k,
            restarts: cfg.sampler.restarts,
        },
        "brute_force" => SamplerSpec::BruteForce {
            limit: cfg.unconstrained_limit,
        },
        "brute_force_k" => SamplerSpec::BruteForceK {
            k,
            budget: cfg.budget,
        },
        _ => {
            let schedule = AnnealSchedule {
                sweeps: cfg.sampler.sweeps,
                beta_start: cfg.sampler.beta_start,
                beta_end: cfg.sampler.beta_end,
                reads: cfg.sampler.reads,
            };
            let schedule = if cfg.sampler.auto_beta {
                schedule.rescaled_for(q)
            } else {
                schedule
            };
            SamplerSpec::Sa { schedule }
        }
    }
}

/// One row of the scaling table, kept in full in the run record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingRow {
    pub case: String,
    pub n: usize,
    pub k: usize,
    pub lambda: f64,
    pub sparsifier: String,
    pub edges_penalized: usize,
    pub edges_used: usize,
    pub dynamic_range_ratio: f64,
    pub prefeas_rate: f64,
    pub mean_weight: f64,
    pub regret_best: f64,
    pub regret_mean: f64,
    pub jaccard_best: f64,
    pub reference_kind: String,
    pub exact_fallback: bool,
    pub seeds: Vec<u64>,
    pub reads_per_seed: u32,
}

/// Project every record of a sample set and fold energies measured on
/// `scoring` into best/mean aggregates.
pub struct ProjectedStats {
    pub best_energy: f64,
    pub best_selection: Selection,
    pub mean_energy: f64,
}

pub fn project_and_score(
    samples: &SampleSet,
    eval_matrix: &QuboMatrix,
    scoring: &QuboMatrix,
    k: usize,
) -> Result<ProjectedStats> {
    let mut best: Option<(f64, Selection)> = None;
    let mut sum = 0.0;
    let mut total: u64 = 0;
    for rec in &samples.records {
        let trace = project_to_k(eval_matrix, &rec.selection, k)?;
        let e = scoring.energy(&trace.end)?;
        let occ = rec.occurrences as u64;
        sum += e * occ as f64;
        total += occ;
        let better = match &best {
            None => true,
            Some((be, bsel)) => {
                e < *be
                    || (e == *be && trace.end.support_lex_cmp(bsel) == std::cmp::Ordering::Less)
            }
        };
        if better {
            best = Some((e, trace.end));
        }
    }
    let (best_energy, best_selection) = best.expect("sample sets are non-empty");
    Ok(ProjectedStats {
        best_energy,
        best_selection,
        mean_energy: sum / total as f64,
    })
}

fn evaluate(cfg: &PipelineConfig, case: &CaseData, token: &SparsifierToken) -> Result<ScalingRow> {
    let penalized = if cfg.penalty_a > 0.0 {
        build_penalized_qubo(&case.instance)?
    } else {
        // objective-only grids never touch the penalized matrix
        build_objective_qubo(&case.instance)?
    };
    let objective = build_objective_qubo(&case.instance)?;
    let sampled = sampled_matrix(token, case, &penalized, &objective)?;
    // marginals are always evaluated on a dense model of record, never the
    // sparsified matrix: the penalized one on the penalized path, the
    // objective-only one on the penalty-free path
    let eval_matrix = match token {
        SparsifierToken::Objective => &objective,
        _ => &penalized,
    };
    let reference = reference_for(cfg, &objective, case.k)?;

    let mut feasible_reads: u64 = 0;
    let mut weight_sum = 0.0;
    let mut total_reads: u64 = 0;
    let mut best: Option<(f64, Selection)> = None;
    let mut mean_acc = 0.0;

    for &seed in &cfg.seeds {
        let spec = sampler_spec_for(cfg, &sampled, case.k);
        let set = sample(&spec, &sampled, seed)?;
        let (feas, mean_w) = feasibility_and_weight(&set, case.k);
        let reads = set.reads as u64;
        feasible_reads += (feas * reads as f64).round() as u64;
        weight_sum += mean_w * reads as f64;
        total_reads += reads;
        let stats = project_and_score(&set, eval_matrix, &objective, case.k)?;
        mean_acc += stats.mean_energy * reads as f64;
        let better = match &best {
            None => true,
            Some((be, bsel)) => {
                stats.best_energy < *be
                    || (stats.best_energy == *be
                        && stats.best_selection.support_lex_cmp(bsel)
                            == std::cmp::Ordering::Less)
            }
        };
        if better {
            best = Some((stats.best_energy, stats.best_selection));
        }
    }
    let (best_energy, best_selection) = best.expect("at least one seed");

    Ok(ScalingRow {
        case: case.kind.to_string(),
        n: case.n,
        k: case.k,
        lambda: cfg.lambda,
        sparsifier: token.to_string(),
        edges_penalized: penalized.edge_count(),
        edges_used: sampled.edge_count(),
        dynamic_range_ratio: dynamic_range_ratio(&penalized, &objective)?,
        prefeas_rate: feasible_reads as f64 / total_reads as f64,
        mean_weight: weight_sum / total_reads as f64,
        regret_best: regret(best_energy, reference.energy)?,
        regret_mean: regret(mean_acc / total_reads as f64, reference.energy)?,
        jaccard_best: folio_core::metrics::jaccard(&best_selection, &reference.selection)?,
        reference_kind: reference.kind.to_string(),
        exact_fallback: reference.exact_fallback,
        seeds: cfg.seeds.clone(),
        reads_per_seed: cfg.sampler.reads,
    })
}

/// Explicitly absent hardware quantities: they exist only on annealing hardware, so
/// every field stays null in every record this harness writes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HardwareColumns {
    pub chain_break_fraction: Option<f64>,
    pub mean_chain_length: Option<f64>,
    pub max_chain_length: Option<f64>,
    pub qubit_overhead: Option<f64>,
    pub note: String,
}

impl Default for HardwareColumns {
    fn default() -> Self {
        Self {
            chain_break_fraction: None,
            mean_chain_length: None,
            max_chain_length: None,
            qubit_overhead: None,
            note: "requires annealing hardware; not measured by this harness".into(),
        }
    }
}

/// Everything a run produced, re-derivable from config + data + seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub version: String,
    pub config_digest: String,
    /// Wall-clock stamp; lives only in the record, never in CSV outputs.
    pub created_unix_ms: u128,
    pub case: String,
    pub scaling_rows: Vec<ScalingRow>,
    pub ablation_rows: Vec<crate::ablation::AblationRow>,
    pub hardware: HardwareColumns,
}

impl RunRecord {
    pub fn new(cfg: &PipelineConfig) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_digest: cfg.digest(),
            created_unix_ms: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or(0),
            case: format!("{}", cfg.case),
            scaling_rows: Vec::new(),
            ablation_rows: Vec::new(),
            hardware: HardwareColumns::default(),
        }
    }
}

/// Run the full grid: every case × sparsifier, sampled, projected, scored.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunRecord> {
    let cases = build_cases(cfg, 1)?;
    let tasks: Vec<(usize, usize)> = (0..cases.len())
        .flat_map(|c| (0..cfg.sparsifiers.len()).map(move |s| (c, s)))
        .collect();
    let rows: Vec<Result<ScalingRow>> = tasks
        .par_iter()
        .map(|&(c, s)| evaluate(cfg, &cases[c], &cfg.sparsifiers[s]))
        .collect();
    let mut record = RunRecord::new(cfg);
    for row in rows {
        record.scaling_rows.push(row?);
    }
    Ok(record)
}

/// The fixed scaling CSV header.
pub const SCALING_HEADER: &str = "case,n,k,lambda,sparsifier,edges_penalized,edges_used,dynamic_range_ratio,prefeas_rate,mean_weight,regret_best,regret_mean,jaccard_best,reference_kind";

/// Render the scaling rows as CSV with the fixed header.
pub fn scaling_csv(rows: &[ScalingRow]) -> String {
    let mut out = String::from(SCALING_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.case,
            r.n,
            r.k,
            fmt_f64(r.lambda),
            r.sparsifier,
            r.edges_penalized,
            r.edges_used,
            fmt_f64(r.dynamic_range_ratio),
            fmt_f64(r.prefeas_rate),
            fmt_f64(r.mean_weight),
            fmt_f64(r.regret_best),
            fmt_f64(r.regret_mean),
            fmt_f64(r.jaccard_best),
            r.reference_kind,
        ));
    }
    out
}

/// Scaling table entry point: the CSV string plus the full record.
pub fn scaling_table(cfg: &PipelineConfig) -> Result<(String, RunRecord)> {
    let record = run_pipeline(cfg)?;
    Ok((scaling_csv(&record.scaling_rows), record))
}

/// Shortest-round-trip float rendering; deterministic across runs.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}
