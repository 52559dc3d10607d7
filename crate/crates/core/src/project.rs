//! Deterministic feasibility projection: greedy bit flips until the
//! selection has exactly K ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::{Couplings, LocalState};
use crate::qubo::QuboMatrix;
use crate::selection::Selection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum FlipDirection {
    Add,
    Remove,
}

/// One projection step: which bit flipped, in which direction, and the
/// energy of the state after the flip.
#[derive(Debug, Clone)]
pub struct Flip {
    pub index: usize,
    pub direction: FlipDirection,
    pub energy_after: f64,
}

/// The full projection record from a starting vector to a weight-K vector.
#[derive(Debug, Clone)]
pub struct ProjectionTrace {
    pub start: Selection,
    pub end: Selection,
    pub flips: Vec<Flip>,
}

/// Energy delta of flipping bit i of x, computed in O(N) from the model's
/// linear terms and couplings.
pub fn marginal_contribution(q: &QuboMatrix, x: &Selection, i: usize) -> Result<f64> {
    let n = q.n();
    if x.len() != n {
        return Err(Error::Dimension(format!(
            "selection length {} vs model size {n}",
            x.len()
        )));
    }
    if i >= n {
        return Err(Error::Dimension(format!("index {i} out of range for n={n}")));
    }
    let mut f = q.diagonal(i);
    for &j in x.support() {
        if j != i {
            f += q.coupling(i, j);
        }
    }
    Ok(if x.is_set(i) { -f } else { f })
}

/// Project x to Hamming weight k against the evaluation model `q_eval`:
/// while over weight, remove the selected index whose removal yields the
/// lowest resulting energy; while under weight, add the unselected index
/// whose addition yields the lowest resulting energy. Ties break to the
/// lowest index. Terminates in exactly |weight − k| flips and is idempotent
/// on feasible input.
pub fn project_to_k(q_eval: &QuboMatrix, x: &Selection, k: usize) -> Result<ProjectionTrace> {
    let n = q_eval.n();
    if x.len() != n {
        return Err(Error::Dimension(format!(
            "selection length {} vs model size {n}",
            x.len()
        )));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "k={k} exceeds the universe size {n}"
        )));
    }
    let coup = Couplings::from_qubo(q_eval);
    let mut state = LocalState::new(&coup, x.bits().to_vec());
    let mut energy = q_eval.energy(x)?;
    let mut flips = Vec::with_capacity(state.weight().abs_diff(k));

    while state.weight() != k {
        let removing = state.weight() > k;
        let mut pick = usize::MAX;
        let mut pick_delta = f64::INFINITY;
        for i in 0..n {
            if state.is_set(i) == removing {
                let d = state.flip_delta(i);
                if d < pick_delta {
                    pick_delta = d;
                    pick = i;
                }
            }
        }
        state.flip(pick);
        energy += pick_delta;
        flips.push(Flip {
            index: pick,
            direction: if removing {
                FlipDirection::Remove
            } else {
                FlipDirection::Add
            },
            energy_after: energy,
        });
    }
    Ok(ProjectionTrace {
        start: x.clone(),
        end: Selection::from_bits(state.into_bits()),
        flips,
    })
}

/// Backward elimination from the all-ones vector.
pub fn all_ones_projection(q: &QuboMatrix, k: usize) -> Result<ProjectionTrace> {
    project_to_k(q, &Selection::ones(q.n()), k)
}

/// Summary of repeated projections from random starting vectors.
#[derive(Debug, Clone)]
pub struct RandomProjectionOutcome {
    pub mean_energy: f64,
    pub best_energy: f64,
    pub traces: Vec<ProjectionTrace>,
}

/// Project `trials` uniformly random weight-⌊N/2⌋ starting vectors to
/// weight k. Trial t draws from a stream seeded with seed ⊕ t. Energies are
/// re-evaluated exactly on the final states.
pub fn random_projection(
    q: &QuboMatrix,
    k: usize,
    trials: u32,
    seed: u64,
) -> Result<RandomProjectionOutcome> {
    if trials < 1 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let n = q.n();
    let start_weight = n / 2;
    let mut traces = Vec::with_capacity(trials as usize);
    let mut sum = 0.0;
    let mut best = f64::INFINITY;
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ t as u64);
        let picked = rand::seq::index::sample(&mut rng, n, start_weight);
        let mut bits = vec![false; n];
        for i in picked {
            bits[i] = true;
        }
        let trace = project_to_k(q, &Selection::from_bits(bits), k)?;
        let e = q.energy(&trace.end)?;
        sum += e;
        best = best.min(e);
        traces.push(trace);
    }
    Ok(RandomProjectionOutcome {
        mean_energy: sum / trials as f64,
        best_energy: best,
        traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::brute_force_k_subsets;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};

    fn random_model(n: usize, seed: u64) -> QuboMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            m[[i, i]] = rng.gen_range(-1.0..1.0);
            for j in (i + 1)..n {
                let v = rng.gen_range(-0.5..0.5);
                m[[i, j]] = v;
                m[[j, i]] = v;
            }
        }
        QuboMatrix::new_symmetric(m, 0.0).unwrap()
    }

    #[test]
    fn marginal_on_diagonal_model_from_zero() {
        let mut m = Array2::zeros((3, 3));
        m[[1, 1]] = 0.75;
        let q = QuboMatrix::new_symmetric(m, 0.0).unwrap();
        let x = Selection::zeros(3);
        assert_eq!(marginal_contribution(&q, &x, 1).unwrap(), 0.75);
        assert!(marginal_contribution(&q, &x, 3).is_err());
    }

    #[test]
    fn marginal_is_an_involution() {
        let q = random_model(8, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bits: Vec<bool> = (0..8).map(|_| rng.gen()).collect();
        let x = Selection::from_bits(bits);
        for i in 0..8 {
            let d1 = marginal_contribution(&q, &x, i).unwrap();
            let flipped = x.flipped(i).unwrap();
            let d2 = marginal_contribution(&q, &flipped, i).unwrap();
            assert!((d1 + d2).abs() < 1e-12);
        }
    }

    #[test]
    fn marginal_matches_full_reevaluation() {
        let q = random_model(10, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let bits: Vec<bool> = (0..10).map(|_| rng.gen()).collect();
            let x = Selection::from_bits(bits);
            let i = rng.gen_range(0..10);
            let d = marginal_contribution(&q, &x, i).unwrap();
            let full =
                q.energy(&x.flipped(i).unwrap()).unwrap() - q.energy(&x).unwrap();
            assert!((d - full).abs() < 1e-10);
        }
    }

    #[test]
    fn feasible_input_is_untouched() {
        let q = random_model(7, 8);
        let x = Selection::from_support(7, &[1, 4, 6]).unwrap();
        let trace = project_to_k(&q, &x, 3).unwrap();
        assert!(trace.flips.is_empty());
        assert_eq!(trace.end, x);
        let all = Selection::ones(7);
        let trace = project_to_k(&q, &all, 7).unwrap();
        assert!(trace.flips.is_empty());
    }

    #[test]
    fn elimination_matches_per_step_marginal_oracle() {
        let q = random_model(6, 9);
        let trace = project_to_k(&q, &Selection::ones(6), 2).unwrap();
        assert_eq!(trace.flips.len(), 4);
        // replay: at each step the flipped index must minimize the
        // recomputed resulting energy over all selected candidates
        let mut x = Selection::ones(6);
        for flip in &trace.flips {
            let mut best_i = usize::MAX;
            let mut best_e = f64::INFINITY;
            for &i in x.support() {
                let e = q.energy(&x.flipped(i).unwrap()).unwrap();
                if e < best_e {
                    best_e = e;
                    best_i = i;
                }
            }
            assert_eq!(flip.index, best_i);
            assert_eq!(flip.direction, FlipDirection::Remove);
            x = x.flipped(flip.index).unwrap();
            assert!((q.energy(&x).unwrap() - flip.energy_after).abs() < 1e-10);
        }
        assert_eq!(x, trace.end);
        assert_eq!(x.weight(), 2);
    }

    #[test]
    fn projection_adds_when_under_weight() {
        let q = random_model(8, 10);
        let trace = project_to_k(&q, &Selection::zeros(8), 3).unwrap();
        assert_eq!(trace.end.weight(), 3);
        assert_eq!(trace.flips.len(), 3);
        assert!(trace
            .flips
            .iter()
            .all(|f| f.direction == FlipDirection::Add));
    }

    #[test]
    fn all_ones_projection_is_definitionally_project_from_ones() {
        let q = random_model(10, 11);
        let a = all_ones_projection(&q, 3).unwrap();
        let b = project_to_k(&q, &Selection::ones(10), 3).unwrap();
        assert_eq!(a.end, b.end);
    }

    #[test]
    fn random_projection_reproducible_and_bounded_by_oracle() {
        let q = random_model(12, 12);
        let out1 = random_projection(&q, 4, 100, 77).unwrap();
        let out2 = random_projection(&q, 4, 100, 77).unwrap();
        assert_eq!(out1.best_energy, out2.best_energy);
        assert_eq!(out1.mean_energy, out2.mean_energy);
        assert!(out1.mean_energy >= out1.best_energy);
        for (ta, tb) in out1.traces.iter().zip(&out2.traces) {
            assert_eq!(ta.start, tb.start);
            assert_eq!(ta.end, tb.end);
        }
        let (_, e_opt, _) = brute_force_k_subsets(&q, 4, 1_000_000).unwrap();
        assert!(out1.best_energy >= e_opt - 1e-12);
        for t in &out1.traces {
            assert_eq!(t.start.weight(), 6);
            assert_eq!(t.end.weight(), 4);
        }
    }
}
