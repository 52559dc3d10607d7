//! Greedy forward construction with random restarts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::{Couplings, LocalState};
use crate::qubo::QuboMatrix;
use crate::selection::Selection;

/// Per restart: seed one uniformly random index, then repeatedly add the
/// unselected index whose addition yields the lowest resulting energy (ties
/// to the lowest index) until weight k. Returns the best result across
/// restarts; restart r draws from a stream seeded with seed ⊕ r, so the
/// outcome is independent of execution order.
pub fn greedy_construct(q: &QuboMatrix, k: usize, restarts: u32, seed: u64) -> Result<Selection> {
    let n = q.n();
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "k={k} exceeds the universe size {n}"
        )));
    }
    if restarts < 1 {
        return Err(Error::InvalidArgument("restarts must be >= 1".into()));
    }
    if k == 0 {
        return Ok(Selection::zeros(n));
    }
    let coup = Couplings::from_qubo(q);
    let mut best: Option<(f64, Selection)> = None;
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ r as u64);
        let start = rng.gen_range(0..n);
        let mut state = LocalState::new(&coup, vec![false; n]);
        state.flip(start);
        while state.weight() < k {
            let mut pick = usize::MAX;
            let mut pick_delta = f64::INFINITY;
            for i in 0..n {
                if !state.is_set(i) {
                    let d = state.flip_delta(i);
                    if d < pick_delta {
                        pick_delta = d;
                        pick = i;
                    }
                }
            }
            state.flip(pick);
        }
        let sel = Selection::from_bits(state.into_bits());
        let e = q.energy(&sel)?;
        let better = match &best {
            None => true,
            Some((be, bsel)) => {
                e < *be
                    || (e == *be && sel.support_lex_cmp(bsel) == std::cmp::Ordering::Less)
            }
        };
        if better {
            best = Some((e, sel));
        }
    }
    Ok(best.expect("at least one restart").1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::brute::brute_force_k_subsets;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

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
    fn k_equals_n_gives_all_ones() {
        let q = random_model(6, 1);
        let sel = greedy_construct(&q, 6, 4, 0).unwrap();
        assert_eq!(sel.weight(), 6);
    }

    #[test]
    fn k1_small_universe_finds_global_best_single() {
        // at N=3 with 128 restarts every start index occurs
        let mut m = Array2::zeros((3, 3));
        m[[0, 0]] = 2.0;
        m[[1, 1]] = -5.0;
        m[[2, 2]] = 1.0;
        let q = QuboMatrix::new_symmetric(m, 0.0).unwrap();
        let sel = greedy_construct(&q, 1, 128, 0).unwrap();
        assert_eq!(sel.support(), &[1]);
    }

    #[test]
    fn deterministic_given_seed() {
        let q = random_model(12, 3);
        let a = greedy_construct(&q, 4, 128, 42).unwrap();
        let b = greedy_construct(&q, 4, 128, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn never_beats_exact_oracle_and_usually_matches_it() {
        let mut exact_hits = 0;
        for seed in 0..100u64 {
            let q = random_model(12, 1000 + seed);
            let (_, e_opt, _) = brute_force_k_subsets(&q, 4, 1_000_000).unwrap();
            let sel = greedy_construct(&q, 4, 128, seed).unwrap();
            let e = q.energy(&sel).unwrap();
            assert!(e >= e_opt - 1e-12, "greedy beat the exact oracle");
            if (e - e_opt).abs() < 1e-12 {
                exact_hits += 1;
            }
        }
        assert!(exact_hits >= 95, "only {exact_hits}/100 exact hits");
    }
}
