//! Exact enumeration oracles.

use crate::error::{Error, Result};
use crate::fields::{Couplings, LocalState};
use crate::qubo::QuboMatrix;
use crate::selection::Selection;

/// Default cap on C(N,K) for the constrained oracle.
pub const DEFAULT_SUBSET_BUDGET: u64 = 10_000_000;

/// Default cap on N for the unconstrained oracle.
pub const DEFAULT_UNCONSTRAINED_LIMIT: usize = 22;

/// C(n, k) without overflow for the sizes this crate handles.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Exact constrained optimum over all weight-k vectors by lexicographic
/// combination enumeration. Equal energies resolve to the lexicographically
/// smallest support (the first one visited). Errors when C(N,k) exceeds the
/// budget.
pub fn brute_force_k_subsets(
    q: &QuboMatrix,
    k: usize,
    budget: u64,
) -> Result<(Selection, f64, u64)> {
    let n = q.n();
    if k < 1 || k > n {
        return Err(Error::InvalidArgument(format!(
            "k must satisfy 1 <= k <= {n}, got {k}"
        )));
    }
    let count = binomial(n, k);
    if count > budget as u128 {
        return Err(Error::BudgetExceeded {
            required: count,
            budget: budget as u128,
        });
    }
    let coup = Couplings::from_qubo(q);
    let energy_of = |support: &[usize]| -> f64 {
        let mut e = q.offset();
        for (a, &i) in support.iter().enumerate() {
            e += coup.h[i];
            for &j in &support[a + 1..] {
                e += coup.j[[i, j]];
            }
        }
        e
    };

    let mut comb: Vec<usize> = (0..k).collect();
    let mut best_support = comb.clone();
    let mut best_energy = energy_of(&comb);
    let mut enumerated: u64 = 1;
    loop {
        // lexicographic successor
        let mut i = k;
        loop {
            if i == 0 {
                let sel = Selection::from_support(n, &best_support)?;
                return Ok((sel, best_energy, enumerated));
            }
            i -= 1;
            if comb[i] != i + n - k {
                break;
            }
        }
        comb[i] += 1;
        for j in (i + 1)..k {
            comb[j] = comb[j - 1] + 1;
        }
        enumerated += 1;
        let e = energy_of(&comb);
        if e < best_energy {
            best_energy = e;
            best_support.copy_from_slice(&comb);
        }
    }
}

/// Exact minimum over all 2^N vectors via Gray-code single-flip enumeration.
/// Equal energies resolve to the lexicographically smallest support. N is
/// capped by `limit`.
pub fn brute_force_unconstrained(q: &QuboMatrix, limit: usize) -> Result<(Selection, f64)> {
    let n = q.n();
    if n > limit {
        return Err(Error::InvalidArgument(format!(
            "N={n} exceeds the unconstrained enumeration limit {limit}"
        )));
    }
    if n >= 63 {
        return Err(Error::InvalidArgument(format!("N={n} is too large")));
    }
    let coup = Couplings::from_qubo(q);
    let mut state = LocalState::new(&coup, vec![false; n]);
    let mut energy = q.offset();
    let mut best_energy = energy;
    let mut best_bits = state.bits().to_vec();

    let total: u64 = 1 << n;
    for step in 1..total {
        let flip = step.trailing_zeros() as usize;
        energy += state.flip_delta(flip);
        state.flip(flip);
        if energy < best_energy {
            best_energy = energy;
            best_bits.copy_from_slice(state.bits());
        } else if energy == best_energy {
            let cand = Selection::from_bits(state.bits().to_vec());
            let incumbent = Selection::from_bits(best_bits.clone());
            if cand.support_lex_cmp(&incumbent) == std::cmp::Ordering::Less {
                best_bits.copy_from_slice(state.bits());
            }
        }
    }
    let sel = Selection::from_bits(best_bits);
    // re-evaluate exactly; the scan energy carries incremental round-off
    let exact = q.energy(&sel)?;
    Ok((sel, exact))
}
