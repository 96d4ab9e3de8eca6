//! Frame-by-label probability matrices.

use std::sync::Arc;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};

/// Tolerated deviation of a row sum from 1 before a file or matrix is
/// rejected as corrupt.
pub const ROW_SUM_TOLERANCE: f64 = 1e-4;

/// Row sums within this bound of 1 are treated as exact and left untouched,
/// so renormalization is idempotent and round trips are byte-stable.
const ROW_SUM_EXACT: f64 = 1e-12;

/// A T x K row-stochastic matrix of per-frame label posteriors, bound to an
/// alphabet. Column k holds the probability of label k; column 0 is blank.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMatrix {
    alphabet: Arc<Alphabet>,
    data: Vec<f64>,
    frames: usize,
    frame_shift_ms: Option<f64>,
}

impl PosteriorMatrix {
    /// Build a matrix, validating shape and row stochasticity.
    ///
    /// Rows must sum to 1 within [`ROW_SUM_TOLERANCE`]; rows that deviate by
    /// more than machine precision are renormalized so sums are exactly 1 to
    /// machine precision.
    pub fn new(alphabet: Arc<Alphabet>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let mut m = Self::from_raw_rows(alphabet, rows)?;
        let cols = m.alphabet.len();
        for t in 0..m.frames {
            let row = &mut m.data[t * cols..(t + 1) * cols];
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::RowSumOutOfTolerance {
                    row: t,
                    sum,
                    tolerance: ROW_SUM_TOLERANCE,
                });
            }
            if (sum - 1.0).abs() > ROW_SUM_EXACT {
                for v in row.iter_mut() {
                    *v /= sum;
                }
            }
        }
        Ok(m)
    }

    /// Build a matrix validating only shape, finiteness and non-negativity.
    ///
    /// Skips the row-sum check and renormalization; intended for numerical
    /// experiments such as finite-difference perturbations where rows are
    /// deliberately off the simplex.
    pub fn from_raw_rows(alphabet: Arc<Alphabet>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let cols = alphabet.len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (t, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::RowLength {
                    row: t,
                    expected: cols,
                    found: row.len(),
                });
            }
            for (k, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteEntry { row: t, col: k });
                }
                if v < 0.0 {
                    return Err(Error::NegativeEntry {
                        row: t,
                        col: k,
                        value: v,
                    });
                }
            }
            data.extend_from_slice(row);
        }
        Ok(PosteriorMatrix {
            alphabet,
            frames: rows.len(),
            data,
            frame_shift_ms: None,
        })
    }

    /// Number of frames T.
    pub fn frames(&self) -> usize {
        self.frames
    }

    /// Number of labels K.
    pub fn num_labels(&self) -> usize {
        self.alphabet.len()
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn row(&self, t: usize) -> &[f64] {
        let cols = self.alphabet.len();
        &self.data[t * cols..(t + 1) * cols]
    }

    pub fn get(&self, t: usize, k: usize) -> f64 {
        self.data[t * self.alphabet.len() + k]
    }

    pub fn frame_shift_ms(&self) -> Option<f64> {
        self.frame_shift_ms
    }

    pub fn set_frame_shift_ms(&mut self, shift: Option<f64>) {
        self.frame_shift_ms = shift;
    }

    /// Copy out the rows, e.g. to derive a perturbed matrix.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.frames).map(|t| self.row(t).to_vec()).collect()
    }

    /// Index of the most probable label at frame `t`; ties break to the
    /// lowest index.
    pub fn argmax(&self, t: usize) -> usize {
        let row = self.row(t);
        let mut best = 0;
        for (k, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = k;
            }
        }
        best
    }

    /// The frame-wise argmax path.
    pub fn argmax_path(&self) -> Vec<usize> {
        (0..self.frames).map(|t| self.argmax(t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_alphabet() -> Arc<Alphabet> {
        Arc::new(Alphabet::from_tokens(["<", "A", "B"]).unwrap())
    }

    #[test]
    fn rows_are_renormalized() {
        let a = tiny_alphabet();
        let m = PosteriorMatrix::new(a, vec![vec![0.2, 0.8, 0.00001]]).unwrap();
        let sum: f64 = m.row(0).iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_rows() {
        let a = tiny_alphabet();
        assert!(matches!(
            PosteriorMatrix::new(Arc::clone(&a), vec![vec![0.5, 0.4, 0.0]]),
            Err(Error::RowSumOutOfTolerance { .. })
        ));
        assert!(matches!(
            PosteriorMatrix::new(Arc::clone(&a), vec![vec![0.5, 0.5]]),
            Err(Error::RowLength { .. })
        ));
        assert!(matches!(
            PosteriorMatrix::new(Arc::clone(&a), vec![vec![1.2, -0.2, 0.0]]),
            Err(Error::NegativeEntry { .. })
        ));
        assert!(matches!(
            PosteriorMatrix::new(Arc::clone(&a), vec![]),
            Err(Error::EmptyMatrix)
        ));
        assert!(matches!(
            PosteriorMatrix::new(a, vec![vec![f64::NAN, 0.5, 0.5]]),
            Err(Error::NonFiniteEntry { .. })
        ));
    }

    #[test]
    fn renormalization_is_idempotent() {
        let a = tiny_alphabet();
        let m = PosteriorMatrix::new(Arc::clone(&a), vec![vec![0.30001, 0.3, 0.4]]).unwrap();
        let again = PosteriorMatrix::new(a, m.to_rows()).unwrap();
        assert_eq!(m.row(0), again.row(0));
    }

    #[test]
    fn argmax_breaks_ties_low() {
        let a = tiny_alphabet();
        let m = PosteriorMatrix::new(a, vec![vec![0.2, 0.4, 0.4], vec![0.5, 0.25, 0.25]]).unwrap();
        assert_eq!(m.argmax(0), 1);
        assert_eq!(m.argmax(1), 0);
        assert_eq!(m.argmax_path(), vec![1, 0]);
    }
}
