//! Cardinality-constrained portfolio selection as QUBO: model builders,
//! graph sparsification with dilution accounting, pluggable classical
//! samplers, deterministic feasibility projection, and evaluation metrics
//! for equity and betting-slate case studies.

pub mod betting;
pub mod error;
mod fields;
pub mod ingest;
pub mod instance;
pub mod metrics;
pub mod moments;
pub mod project;
pub mod qubo;
pub mod sampler;
pub mod selection;
pub mod sparsify;

pub use betting::{BettingSlate, MatchResult, SlateMatch, SlateOutcome};
pub use error::{Error, Result};
pub use instance::{build_objective_qubo, build_penalized_qubo, InstanceKind, PortfolioInstance};
pub use moments::{betting_moments, equity_moments};
pub use project::{all_ones_projection, marginal_contribution, project_to_k, random_projection, ProjectionTrace};
pub use qubo::{qubo_energy, to_upper_triangular, Convention, QuboMatrix};
pub use sampler::{
    brute_force_k_subsets, brute_force_unconstrained, greedy_construct, sample,
    simulated_annealing_sample, AnnealSchedule, SampleRecord, SampleSet, SamplerSpec,
};
pub use selection::Selection;
pub use sparsify::{
    dilution_report, knn_correlation_mask, settlement_mask, sparsify_mask,
    sparsify_mask_residual, sparsify_threshold, sparsify_topk, tau_for_edge_count,
    DilutionReport, Mask, SparsifierSpec,
};
