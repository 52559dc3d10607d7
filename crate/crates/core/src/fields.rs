//! Local-field bookkeeping shared by the samplers and the projector.
//!
//! For a model with linear terms h_i (diagonal) and pair couplings
//! J_ij = q[i][j] + q[j][i], the energy delta of flipping bit i is
//! ±(h_i + Σ_j J_ij x_j). Maintaining the per-bit fields makes a flip O(N)
//! and a flip *proposal* O(1).

use ndarray::Array2;

use crate::qubo::QuboMatrix;

/// Convention-independent linear terms and doubled pair couplings.
pub(crate) struct Couplings {
    pub n: usize,
    pub h: Vec<f64>,
    pub j: Array2<f64>,
}

impl Couplings {
    pub fn from_qubo(q: &QuboMatrix) -> Self {
        let n = q.n();
        let h = (0..n).map(|i| q.diagonal(i)).collect();
        let mut j = Array2::zeros((n, n));
        for a in 0..n {
            for b in (a + 1)..n {
                let v = q.coupling(a, b);
                j[[a, b]] = v;
                j[[b, a]] = v;
            }
        }
        Self { n, h, j }
    }
}

/// A binary state with cached per-bit fields.
pub(crate) struct LocalState<'a> {
    coup: &'a Couplings,
    bits: Vec<bool>,
    field: Vec<f64>,
    weight: usize,
}

impl<'a> LocalState<'a> {
    pub fn new(coup: &'a Couplings, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), coup.n);
        let mut field = coup.h.clone();
        for (j, &on) in bits.iter().enumerate() {
            if on {
                for i in 0..coup.n {
                    field[i] += coup.j[[i, j]];
                }
            }
        }
        let weight = bits.iter().filter(|&&b| b).count();
        Self {
            coup,
            bits,
            field,
            weight,
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn is_set(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    /// Energy delta of flipping bit i in the current state. O(1).
    pub fn flip_delta(&self, i: usize) -> f64 {
        if self.bits[i] {
            -self.field[i]
        } else {
            self.field[i]
        }
    }

    /// Flip bit i and update all fields. O(N).
    pub fn flip(&mut self, i: usize) {
        let delta_x = if self.bits[i] { -1.0 } else { 1.0 };
        self.bits[i] = !self.bits[i];
        if delta_x > 0.0 {
            self.weight += 1;
        } else {
            self.weight -= 1;
        }
        for j in 0..self.coup.n {
            if j != i {
                self.field[j] += self.coup.j[[j, i]] * delta_x;
            }
        }
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }
}
