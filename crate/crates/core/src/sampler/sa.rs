//! Seeded single-spin-flip Metropolis annealing over binary states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{Couplings, LocalState};
use crate::qubo::QuboMatrix;
use crate::sampler::SampleSet;
use crate::selection::Selection;

/// Annealing protocol: geometric inverse-temperature ramp over `sweeps`
/// full passes, repeated independently for `reads` reads.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AnnealSchedule {
    pub sweeps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub reads: u32,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            sweeps: 1000,
            beta_start: 0.1,
            beta_end: 10.0,
            reads: 1000,
        }
    }
}

impl AnnealSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps < 1 {
            return Err(Error::InvalidArgument("sweeps must be >= 1".into()));
        }
        if !(self.beta_start > 0.0 && self.beta_end > 0.0) {
            return Err(Error::InvalidArgument(
                "inverse temperatures must be positive".into(),
            ));
        }
        if self.beta_start >= self.beta_end {
            return Err(Error::InvalidArgument(format!(
                "beta_start {} must be below beta_end {}",
                self.beta_start, self.beta_end
            )));
        }
        if self.reads < 1 {
            return Err(Error::InvalidArgument("reads must be >= 1".into()));
        }
        Ok(())
    }

    /// Rescale the β range so β·|coupling| spans the same acceptance regime
    /// regardless of the model's coefficient magnitude, mirroring hardware
    /// auto-scaling. An objective-only equity model has couplings near 1e-3
    /// and would otherwise anneal as a pure random walk. The scale is the
    /// largest off-diagonal magnitude (the interaction strength), falling
    /// back to the diagonal for interaction-free models.
    pub fn rescaled_for(&self, q: &QuboMatrix) -> AnnealSchedule {
        let mut scale = q.max_offdiag();
        if scale <= 0.0 {
            scale = (0..q.n()).fold(0.0f64, |m, i| m.max(q.diagonal(i).abs()));
        }
        if scale <= 0.0 {
            return self.clone();
        }
        AnnealSchedule {
            sweeps: self.sweeps,
            beta_start: self.beta_start / scale,
            beta_end: self.beta_end / scale,
            reads: self.reads,
        }
    }

    fn beta_at(&self, sweep: usize) -> f64 {
        if self.sweeps == 1 {
            return self.beta_start;
        }
        let t = sweep as f64 / (self.sweeps - 1) as f64;
        self.beta_start * (self.beta_end / self.beta_start).powf(t)
    }
}

/// Run `reads` independent anneals. Read i draws from a stream seeded with
/// seed ⊕ i, so results are bit-identical across thread counts. Each read
/// starts from a uniformly random state, performs sequential single-flip
/// Metropolis sweeps under the geometric β ramp, and reports its final state
/// with an exactly re-evaluated energy.
pub fn simulated_annealing_sample(
    q: &QuboMatrix,
    schedule: &AnnealSchedule,
    seed: u64,
) -> Result<SampleSet> {
    schedule.validate()?;
    let n = q.n();
    let coup = Couplings::from_qubo(q);
    let betas: Vec<f64> = (0..schedule.sweeps).map(|s| schedule.beta_at(s)).collect();

    let reads: Vec<(Selection, f64)> = (0..schedule.reads)
        .into_par_iter()
        .map(|read| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ read as u64);
            let bits: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
            let mut state = LocalState::new(&coup, bits);
            for &beta in &betas {
                for i in 0..n {
                    let delta = state.flip_delta(i);
                    let accept = delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp();
                    if accept {
                        state.flip(i);
                    }
                }
            }
            let sel = Selection::from_bits(state.into_bits());
            let energy = q.energy(&sel).expect("length verified");
            (sel, energy)
        })
        .collect();

    Ok(SampleSet::from_reads(reads, seed, "sa"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::brute::brute_force_unconstrained;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_matrix_reads_report_offset() {
        let q = QuboMatrix::new_symmetric(Array2::zeros((6, 6)), 2.5).unwrap();
        let set = simulated_annealing_sample(
            &q,
            &AnnealSchedule {
                sweeps: 10,
                beta_start: 0.1,
                beta_end: 1.0,
                reads: 32,
            },
            1,
        )
        .unwrap();
        for rec in &set.records {
            assert_eq!(rec.energy, 2.5);
        }
    }

    #[test]
    fn strongly_negative_single_bit_dominates_reads() {
        let mut m = Array2::zeros((8, 8));
        for i in 0..8 {
            m[[i, i]] = 1.0;
        }
        m[[3, 3]] = -50.0;
        let q = QuboMatrix::new_symmetric(m, 0.0).unwrap();
        let set = simulated_annealing_sample(&q, &AnnealSchedule::default(), 11).unwrap();
        let exact_hits: u32 = set
            .records
            .iter()
            .filter(|r| r.selection.support() == [3])
            .map(|r| r.occurrences)
            .sum();
        assert!(
            exact_hits >= 990,
            "{exact_hits}/1000 reads found the dominant bit"
        );
    }

    #[test]
    fn invalid_schedules_rejected() {
        let ok = AnnealSchedule::default();
        assert!(ok.validate().is_ok());
        for bad in [
            AnnealSchedule { sweeps: 0, ..ok.clone() },
            AnnealSchedule { beta_start: -0.1, ..ok.clone() },
            AnnealSchedule { beta_start: 10.0, beta_end: 1.0, ..ok.clone() },
            AnnealSchedule { reads: 0, ..ok.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn finds_unconstrained_optimum_on_small_penalty_free_models() {
        let mut hits = 0;
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(3000 + seed);
            let n = 12;
            let mut m = Array2::zeros((n, n));
            for i in 0..n {
                m[[i, i]] = rng.gen_range(-1.0..1.0);
                for j in (i + 1)..n {
                    let v = rng.gen_range(-0.5..0.5);
                    m[[i, j]] = v;
                    m[[j, i]] = v;
                }
            }
            let q = QuboMatrix::new_symmetric(m, 0.0).unwrap();
            let (_, e_opt) = brute_force_unconstrained(&q, 22).unwrap();
            let set = simulated_annealing_sample(
                &q,
                &AnnealSchedule {
                    sweeps: 2000,
                    beta_start: 0.1,
                    beta_end: 10.0,
                    reads: 1000,
                },
                seed,
            )
            .unwrap();
            if (set.best().energy - e_opt).abs() < 1e-9 {
                hits += 1;
            }
        }
        assert!(hits >= 95, "only {hits}/100 seeds reached the optimum");
    }

    #[test]
    fn rescaling_tracks_coupling_magnitude() {
        let mut m = Array2::zeros((4, 4));
        m[[0, 0]] = 1e-3;
        m[[1, 2]] = 5e-4;
        m[[2, 1]] = 5e-4;
        let q = QuboMatrix::new_symmetric(m, 0.0).unwrap();
        let s = AnnealSchedule::default().rescaled_for(&q);
        assert!((s.beta_end - 10.0 / 5e-4).abs() < 1e-9);
        // diagonal-only model falls back to the diagonal scale
        let mut d = Array2::zeros((3, 3));
        d[[1, 1]] = -2.0;
        let q = QuboMatrix::new_symmetric(d, 0.0).unwrap();
        let s = AnnealSchedule::default().rescaled_for(&q);
        assert!((s.beta_end - 5.0).abs() < 1e-12);
        let zero = QuboMatrix::new_symmetric(Array2::zeros((4, 4)), 0.0).unwrap();
        assert_eq!(AnnealSchedule::default().rescaled_for(&zero), AnnealSchedule::default());
    }
}
