//! The sampling layer: exact oracles, the greedy classical reference, and a
//! seeded simulated-annealing stand-in, all behind one dispatch contract.

mod brute;
mod greedy;
mod sa;

pub use brute::{binomial, brute_force_k_subsets, brute_force_unconstrained, DEFAULT_SUBSET_BUDGET, DEFAULT_UNCONSTRAINED_LIMIT};
pub use greedy::greedy_construct;
pub use sa::{simulated_annealing_sample, AnnealSchedule};

use crate::error::{Error, Result};
use crate::qubo::QuboMatrix;
use crate::selection::Selection;

/// One distinct sampled state with its energy and occurrence count.
#[derive(Debug, Clone)]
pub struct SampleRecord {
    pub selection: Selection,
    pub energy: f64,
    pub occurrences: u32,
}

/// A multiset of sampled states. Occurrences sum to `reads`; records keep
/// first-seen order so aggregation is independent of execution order.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub records: Vec<SampleRecord>,
    pub reads: u32,
    pub seed: u64,
    pub origin: &'static str,
}

impl SampleSet {
    /// Aggregate per-read states (in read order) into a histogram.
    pub fn from_reads(reads: Vec<(Selection, f64)>, seed: u64, origin: &'static str) -> Self {
        let total = reads.len() as u32;
        let mut index: std::collections::HashMap<Vec<bool>, usize> = std::collections::HashMap::new();
        let mut records: Vec<SampleRecord> = Vec::new();
        for (sel, energy) in reads {
            match index.get(sel.bits()) {
                Some(&at) => records[at].occurrences += 1,
                None => {
                    index.insert(sel.bits().to_vec(), records.len());
                    records.push(SampleRecord {
                        selection: sel,
                        energy,
                        occurrences: 1,
                    });
                }
            }
        }
        Self {
            records,
            reads: total,
            seed,
            origin,
        }
    }

    /// Lowest-energy record; equal energies resolve to the lexicographically
    /// smallest support.
    pub fn best(&self) -> &SampleRecord {
        self.records
            .iter()
            .min_by(|a, b| {
                a.energy
                    .partial_cmp(&b.energy)
                    .unwrap()
                    .then_with(|| a.selection.support_lex_cmp(&b.selection))
            })
            .expect("sample set is never empty")
    }
}

/// Uniform sampler description, dispatchable by [`sample`].
#[derive(Debug, Clone)]
pub enum SamplerSpec {
    /// Exact minimum over all 2^N states (N capped by `limit`).
    BruteForce { limit: usize },
    /// Exact minimum over all weight-k states, guarded by a subset budget.
    BruteForceK { k: usize, budget: u64 },
    /// Greedy forward construction with random restarts.
    Greedy { k: usize, restarts: u32 },
    /// Seeded Metropolis annealing.
    Sa { schedule: AnnealSchedule },
}

impl SamplerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SamplerSpec::BruteForce { .. } => "brute_force",
            SamplerSpec::BruteForceK { .. } => "brute_force_k",
            SamplerSpec::Greedy { .. } => "greedy",
            SamplerSpec::Sa { .. } => "sa",
        }
    }
}

/// Dispatch a sampler over a model. The oracle and greedy backends wrap
/// their single answer as a 1-read sample set.
pub fn sample(spec: &SamplerSpec, q: &QuboMatrix, seed: u64) -> Result<SampleSet> {
    match spec {
        SamplerSpec::BruteForce { limit } => {
            let (sel, energy) = brute_force_unconstrained(q, *limit)?;
            Ok(SampleSet::from_reads(vec![(sel, energy)], seed, "brute_force"))
        }
        SamplerSpec::BruteForceK { k, budget } => {
            let (sel, energy, _) = brute_force_k_subsets(q, *k, *budget)?;
            Ok(SampleSet::from_reads(vec![(sel, energy)], seed, "brute_force_k"))
        }
        SamplerSpec::Greedy { k, restarts } => {
            let sel = greedy_construct(q, *k, *restarts, seed)?;
            let energy = q.energy(&sel)?;
            Ok(SampleSet::from_reads(vec![(sel, energy)], seed, "greedy"))
        }
        SamplerSpec::Sa { schedule } => simulated_annealing_sample(q, schedule, seed),
    }
}

/// Parse the harness sampler grammar: `sa`, `greedy`, `brute_force`,
/// `brute_force_k`, with numeric parameters supplied separately.
pub fn sampler_kind_from_name(name: &str) -> Result<&'static str> {
    match name {
        "sa" => Ok("sa"),
        "greedy" => Ok("greedy"),
        "brute_force" => Ok("brute_force"),
        "brute_force_k" => Ok("brute_force_k"),
        other => Err(Error::InvalidArgument(format!(
            "unknown sampler name '{other}' (expected sa|greedy|brute_force|brute_force_k)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn diag_model(values: &[f64]) -> QuboMatrix {
        let n = values.len();
        let mut m = Array2::zeros((n, n));
        for (i, v) in values.iter().enumerate() {
            m[[i, i]] = *v;
        }
        QuboMatrix::new_symmetric(m, 0.0).unwrap()
    }

    #[test]
    fn brute_force_k_wrapper_is_one_read() {
        let q = diag_model(&[3.0, -1.0, 2.0, -2.0]);
        let set = sample(&SamplerSpec::BruteForceK { k: 2, budget: 1000 }, &q, 0).unwrap();
        assert_eq!(set.reads, 1);
        assert_eq!(set.records[0].selection.support(), &[1, 3]);
        assert_eq!(set.records[0].energy, -3.0);
    }

    #[test]
    fn sa_dispatch_is_deterministic() {
        let q = diag_model(&[0.5, -0.5, 0.25, -0.25, 0.1]);
        let spec = SamplerSpec::Sa {
            schedule: AnnealSchedule {
                sweeps: 50,
                beta_start: 0.1,
                beta_end: 10.0,
                reads: 64,
            },
        };
        let a = sample(&spec, &q, 99).unwrap();
        let b = sample(&spec, &q, 99).unwrap();
        assert_eq!(a.records.len(), b.records.len());
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.selection, rb.selection);
            assert_eq!(ra.energy, rb.energy);
            assert_eq!(ra.occurrences, rb.occurrences);
        }
    }

    #[test]
    fn greedy_dispatch_matches_direct_call() {
        let q = diag_model(&[3.0, -1.0, 2.0, -2.0]);
        let set = sample(&SamplerSpec::Greedy { k: 2, restarts: 128 }, &q, 7).unwrap();
        let direct = greedy_construct(&q, 2, 128, 7).unwrap();
        assert_eq!(set.records[0].selection, direct);
        assert_eq!(set.reads, 1);
    }

    #[test]
    fn occurrences_sum_to_reads() {
        let q = diag_model(&[-5.0, 4.0]);
        let spec = SamplerSpec::Sa {
            schedule: AnnealSchedule {
                sweeps: 20,
                beta_start: 0.5,
                beta_end: 20.0,
                reads: 100,
            },
        };
        let set = sample(&spec, &q, 3).unwrap();
        let total: u32 = set.records.iter().map(|r| r.occurrences).sum();
        assert_eq!(total, set.reads);
    }

    #[test]
    fn unknown_sampler_name_rejected() {
        assert!(sampler_kind_from_name("tabu").is_err());
        assert!(sampler_kind_from_name("sa").is_ok());
    }
}
