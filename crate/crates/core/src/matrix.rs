//! Stack-allocated matrices for chart-sized linear algebra.
//!
//! Every chart in this crate has at most three extended coordinate pairs, so
//! dimensions are capped at 8 and nothing here touches the heap.

use std::fmt;
use std::ops::{Index, IndexMut};

pub const MAX_DIM: usize = 8;

#[derive(Clone, Copy, PartialEq)]
pub struct SmallMatrix {
    rows: usize,
    cols: usize,
    a: [[f64; MAX_DIM]; MAX_DIM],
}

impl SmallMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(
            rows <= MAX_DIM && cols <= MAX_DIM,
            "matrix dimensions capped at {MAX_DIM}"
        );
        SmallMatrix {
            rows,
            cols,
            a: [[0.0; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SmallMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Canonical symplectic matrix Ω = [[0, I], [−I, 0]] for `pairs`
    /// conjugate pairs, in the ordering (coordinates, momenta).
    pub fn canonical_symplectic(pairs: usize) -> Self {
        let mut m = SmallMatrix::zeros(2 * pairs, 2 * pairs);
        for i in 0..pairs {
            m[(i, pairs + i)] = 1.0;
            m[(pairs + i, i)] = -1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = SmallMatrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut m = SmallMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)];
            }
        }
        m
    }

    pub fn matmul(&self, rhs: &SmallMatrix) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut m = SmallMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut s = 0.0;
                for k in 0..self.cols {
                    s += self[(i, k)] * rhs[(k, j)];
                }
                m[(i, j)] = s;
            }
        }
        m
    }

    pub fn sub(&self, rhs: &SmallMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut m = *self;
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] -= rhs[(i, j)];
            }
        }
        m
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut m = *self;
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] *= k;
            }
        }
        m
    }

    /// Entrywise max-norm, the residual measure used by every matrix check.
    pub fn max_abs(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max(self[(i, j)].abs());
            }
        }
        worst
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for SmallMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.a[i][j]
    }
}

impl IndexMut<(usize, usize)> for SmallMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &mut self.a[i][j]
    }
}

impl fmt::Debug for SmallMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SmallMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:>12.6} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_symplectic_matrix_squares_to_minus_identity() {
        for pairs in 1..=4 {
            let omega = SmallMatrix::canonical_symplectic(pairs);
            let n = 2 * pairs;
            // Antisymmetry: Ωᵀ = −Ω.
            assert_eq!(omega.transpose(), omega.scale(-1.0));
            // Ω² = −I.
            let sq = omega.matmul(&omega);
            assert_eq!(sq, SmallMatrix::identity(n).scale(-1.0));
        }
    }

    #[test]
    fn block_layout_pairs_coordinates_with_momenta() {
        let omega = SmallMatrix::canonical_symplectic(2);
        assert_eq!(omega[(0, 2)], 1.0);
        assert_eq!(omega[(1, 3)], 1.0);
        assert_eq!(omega[(2, 0)], -1.0);
        assert_eq!(omega[(0, 1)], 0.0);
    }

    #[test]
    fn matmul_and_norm() {
        let a = SmallMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let b = a.matmul(&SmallMatrix::identity(2));
        assert_eq!(a, b);
        assert_eq!(a.max_abs(), 4.0);
        assert_eq!(a.mul_vec(&[1.0, 1.0]), vec![3.0, 7.0]);
    }
}
