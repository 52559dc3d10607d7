//! QUBO coefficient matrices: minimize xᵀQx + c over binary x.
//!
//! The canonical in-memory form is symmetric; the upper-triangular form is an
//! export view in which each unordered pair's coefficient is folded into the
//! entry above the diagonal. Energies are identical under both conventions.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::selection::Selection;

/// Entries with absolute value at or below this are treated as structural
/// zeros when counting logical edges.
pub const EDGE_EPS: f64 = 1e-15;

/// Coefficient storage convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Convention {
    /// q[i][j] == q[j][i]; the pair {i,j} contributes q[i][j] + q[j][i].
    Symmetric,
    /// q[i][j] == 0 for i > j; the pair {i,j} contributes q[i][j] once.
    UpperTriangular,
}

/// A QUBO model: coefficient matrix, constant offset, and storage convention.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboMatrix {
    q: Array2<f64>,
    offset: f64,
    convention: Convention,
}

impl QuboMatrix {
    /// Wrap a symmetric coefficient matrix. Symmetry must hold exactly:
    /// builders construct both halves from the same expression.
    pub fn new_symmetric(q: Array2<f64>, offset: f64) -> Result<Self> {
        let n = Self::check_square(&q)?;
        for i in 0..n {
            for j in (i + 1)..n {
                if q[[i, j]].to_bits() != q[[j, i]].to_bits() {
                    return Err(Error::InvalidData(format!(
                        "matrix not exactly symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self {
            q,
            offset,
            convention: Convention::Symmetric,
        })
    }

    /// Wrap an upper-triangular coefficient matrix (entries below the
    /// diagonal must be exactly zero).
    pub fn new_upper_triangular(q: Array2<f64>, offset: f64) -> Result<Self> {
        let n = Self::check_square(&q)?;
        for i in 0..n {
            for j in 0..i {
                if q[[i, j]] != 0.0 {
                    return Err(Error::InvalidData(format!(
                        "entry ({i},{j}) below the diagonal is non-zero"
                    )));
                }
            }
        }
        Ok(Self {
            q,
            offset,
            convention: Convention::UpperTriangular,
        })
    }

    fn check_square(q: &Array2<f64>) -> Result<usize> {
        let (r, c) = q.dim();
        if r != c {
            return Err(Error::Dimension(format!("matrix is {r}x{c}, not square")));
        }
        Ok(r)
    }

    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    pub fn q(&self) -> &Array2<f64> {
        &self.q
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Effective coefficient of the product x_i·x_j for i ≠ j, independent of
    /// convention: q[i][j] + q[j][i].
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        debug_assert_ne!(i, j);
        self.q[[i, j]] + self.q[[j, i]]
    }

    /// Linear coefficient of x_i (diagonal entry).
    pub fn diagonal(&self, i: usize) -> f64 {
        self.q[[i, i]]
    }

    /// Energy xᵀQx + c of a selection.
    pub fn energy(&self, x: &Selection) -> Result<f64> {
        if x.len() != self.n() {
            return Err(Error::Dimension(format!(
                "selection length {} vs model size {}",
                x.len(),
                self.n()
            )));
        }
        let support = x.support();
        let mut e = self.offset;
        for &i in support {
            e += self.q[[i, i]];
            for &j in support {
                if j != i {
                    e += self.q[[i, j]];
                }
            }
        }
        Ok(e)
    }

    /// Fold the symmetric form into the upper-triangular export view:
    /// out[i][j] = q[i][j] + q[j][i] for i < j, diagonal and offset unchanged.
    pub fn to_upper_triangular(&self) -> Result<QuboMatrix> {
        if self.convention == Convention::UpperTriangular {
            return Err(Error::InvalidArgument(
                "matrix is already in the upper-triangular convention".into(),
            ));
        }
        let n = self.n();
        let mut out = Array2::zeros((n, n));
        for i in 0..n {
            out[[i, i]] = self.q[[i, i]];
            for j in (i + 1)..n {
                out[[i, j]] = self.q[[i, j]] + self.q[[j, i]];
            }
        }
        Ok(QuboMatrix {
            q: out,
            offset: self.offset,
            convention: Convention::UpperTriangular,
        })
    }

    /// Unordered pairs {i,j} with a non-zero coefficient, i < j.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.pair_magnitude(i, j) > EDGE_EPS {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Number of non-zero unordered off-diagonal pairs.
    pub fn edge_count(&self) -> usize {
        let n = self.n();
        let mut count = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if self.pair_magnitude(i, j) > EDGE_EPS {
                    count += 1;
                }
            }
        }
        count
    }

    /// Magnitude used for edge presence: |stored entry| above the diagonal
    /// (both halves are equal under the symmetric convention).
    fn pair_magnitude(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < j);
        match self.convention {
            Convention::Symmetric => self.q[[i, j]].abs(),
            Convention::UpperTriangular => self.q[[i, j]].abs(),
        }
    }

    /// Largest absolute stored off-diagonal entry (0.0 for a diagonal matrix).
    pub fn max_offdiag(&self) -> f64 {
        let n = self.n();
        let mut m = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m = m.max(self.q[[i, j]].abs());
                }
            }
        }
        m
    }
}

/// Free-function form of [`QuboMatrix::energy`].
pub fn qubo_energy(q: &QuboMatrix, x: &Selection) -> Result<f64> {
    q.energy(x)
}

/// Free-function form of [`QuboMatrix::to_upper_triangular`].
pub fn to_upper_triangular(q: &QuboMatrix) -> Result<QuboMatrix> {
    q.to_upper_triangular()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    fn two_by_two() -> QuboMatrix {
        // diag (-1,-1), off-diag 0.5 each half
        QuboMatrix::new_symmetric(arr2(&[[-1.0, 0.5], [0.5, -1.0]]), 1.0).unwrap()
    }

    #[test]
    fn energy_all_zeros_is_offset() {
        let q = two_by_two();
        assert_eq!(q.energy(&Selection::zeros(2)).unwrap(), 1.0);
    }

    #[test]
    fn energy_counts_both_halves() {
        let q = two_by_two();
        let x = Selection::ones(2);
        // -1 -1 + 0.5 + 0.5 + offset 1
        assert_eq!(q.energy(&x).unwrap(), 0.0);
    }

    #[test]
    fn upper_triangular_doubles_offdiag() {
        let q = two_by_two();
        let u = q.to_upper_triangular().unwrap();
        assert_eq!(u.q()[[0, 1]], 1.0);
        assert_eq!(u.q()[[1, 0]], 0.0);
        assert_eq!(u.offset(), q.offset());
        assert!(u.to_upper_triangular().is_err());
        for bits in [[false, false], [true, false], [false, true], [true, true]] {
            let x = Selection::from_bits(bits.to_vec());
            assert!((q.energy(&x).unwrap() - u.energy(&x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_matrix_unchanged_by_conversion() {
        let q = QuboMatrix::new_symmetric(arr2(&[[2.0, 0.0], [0.0, 3.0]]), 0.0).unwrap();
        let u = q.to_upper_triangular().unwrap();
        assert_eq!(u.q(), q.q());
        assert_eq!(u.edge_count(), 0);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let m = arr2(&[[0.0, 1.0], [0.9, 0.0]]);
        assert!(QuboMatrix::new_symmetric(m, 0.0).is_err());
    }

    #[test]
    fn length_mismatch_rejected() {
        let q = two_by_two();
        assert!(q.energy(&Selection::zeros(3)).is_err());
    }
}
