//! Sampler-versus-projector ablation on betting slates.
//!
//! Each row fixes a QUBO (the settlement-sparsified penalized matrix or the
//! dense penalized matrix) and scores one method against the best offline
//! reference *of that same matrix*: the point of the ablation is what each
//! method does with the landscape it is given, so marginals, references, and
//! regret are all evaluated on the row's matrix.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use folio_core::metrics::{jaccard, regret};
use folio_core::{
    all_ones_projection, build_penalized_qubo, random_projection, sample, settlement_mask,
    sparsify_mask, InstanceKind, QuboMatrix,
};

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::pipeline::{
    build_cases, fmt_f64, project_and_score, reference_for, sampler_spec_for, CaseData,
};

pub const METHODS: [&str; 4] = ["sampler_proj", "all_ones_proj", "random_proj", "greedy"];
pub const QUBOS: [&str; 2] = ["settlement", "dense"];

/// One ablation measurement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationRow {
    pub case: String,
    pub n: usize,
    pub k: usize,
    /// Index of the slate within its size class.
    pub slate: usize,
    pub qubo: String,
    pub method: String,
    /// Regret of the method's best selection vs the row reference.
    pub regret: f64,
    /// Mean-outcome regret (equals `regret` for single-outcome methods).
    pub regret_mean: f64,
    pub jaccard: f64,
    pub reference_kind: String,
}

fn row_matrix(case: &CaseData, qubo: &str) -> Result<QuboMatrix> {
    let penalized = build_penalized_qubo(&case.instance)?;
    match qubo {
        "dense" => Ok(penalized),
        "settlement" => {
            let slate = case
                .slate
                .as_ref()
                .ok_or_else(|| CliError::Config("ablation needs betting slates".into()))?;
            Ok(sparsify_mask(&penalized, &settlement_mask(slate))?)
        }
        other => Err(CliError::Config(format!("unknown ablation qubo '{other}'"))),
    }
}

fn evaluate_slate(cfg: &PipelineConfig, case: &CaseData, qubo: &str) -> Result<Vec<AblationRow>> {
    let q = row_matrix(case, qubo)?;
    let reference = reference_for(cfg, &q, case.k)?;
    let seed = cfg.seeds[0];
    let mut rows = Vec::with_capacity(METHODS.len());
    for method in METHODS {
        let (best_energy, best_selection, mean_energy) = match method {
            "sampler_proj" => {
                let spec = sampler_spec_for(cfg, &q, case.k);
                let set = sample(&spec, &q, seed)?;
                let stats = project_and_score(&set, &q, &q, case.k)?;
                (stats.best_energy, stats.best_selection, stats.mean_energy)
            }
            "all_ones_proj" => {
                let trace = all_ones_projection(&q, case.k)?;
                let e = q.energy(&trace.end)?;
                (e, trace.end, e)
            }
            "random_proj" => {
                let out = random_projection(&q, case.k, cfg.random_trials, seed)?;
                let best = out
                    .traces
                    .iter()
                    .map(|t| t.end.clone())
                    .min_by(|a, b| {
                        let ea = q.energy(a).expect("sized");
                        let eb = q.energy(b).expect("sized");
                        ea.partial_cmp(&eb)
                            .unwrap()
                            .then_with(|| a.support_lex_cmp(b))
                    })
                    .expect("trials >= 1");
                (out.best_energy, best, out.mean_energy)
            }
            "greedy" => {
                let sel =
                    folio_core::greedy_construct(&q, case.k, cfg.sampler.restarts, seed)?;
                let e = q.energy(&sel)?;
                (e, sel, e)
            }
            _ => unreachable!(),
        };
        rows.push(AblationRow {
            case: case.kind.to_string(),
            n: case.n,
            k: case.k,
            slate: case.slate_index,
            qubo: qubo.to_string(),
            method: method.to_string(),
            regret: regret(best_energy, reference.energy)?,
            regret_mean: regret(mean_energy, reference.energy)?,
            jaccard: jaccard(&best_selection, &reference.selection)?,
            reference_kind: reference.kind.to_string(),
        });
    }
    Ok(rows)
}

/// Run the ablation grid: per slate, per QUBO, per method.
pub fn ablation_rows(cfg: &PipelineConfig) -> Result<Vec<AblationRow>> {
    if cfg.case != InstanceKind::Betting {
        return Err(CliError::Config(
            "the ablation runs on betting data or synthetic slates".into(),
        ));
    }
    let cases = build_cases(cfg, cfg.slates_per_size)?;
    let tasks: Vec<(usize, usize)> = (0..cases.len())
        .flat_map(|c| (0..QUBOS.len()).map(move |q| (c, q)))
        .collect();
    let nested: Vec<Result<Vec<AblationRow>>> = tasks
        .par_iter()
        .map(|&(c, q)| evaluate_slate(cfg, &cases[c], QUBOS[q]))
        .collect();
    let mut rows = Vec::new();
    for group in nested {
        rows.extend(group?);
    }
    Ok(rows)
}

pub const ABLATION_HEADER: &str =
    "case,n,k,slate,qubo,method,regret,regret_mean,jaccard,reference_kind";

pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut out = String::from(ABLATION_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.case,
            r.n,
            r.k,
            r.slate,
            r.qubo,
            r.method,
            fmt_f64(r.regret),
            fmt_f64(r.regret_mean),
            fmt_f64(r.jaccard),
            r.reference_kind,
        ));
    }
    out
}

/// Ablation table entry point.
pub fn ablation_table(cfg: &PipelineConfig) -> Result<(String, Vec<AblationRow>)> {
    let rows = ablation_rows(cfg)?;
    Ok((ablation_csv(&rows), rows))
}
