//! Global Darboux charts. Coordinates are ordered (q¹..qⁿ, p₁..pₙ), so the
//! symplectic form ω = −dθ = Σ dqⁱ∧dpᵢ has the block matrix
//! [[0, I], [−I, 0]].

use crate::matrix::{SmallMatrix, MAX_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CanonicalChart {
    pairs: usize,
}

impl CanonicalChart {
    pub fn new(pairs: usize) -> Self {
        assert!(
            pairs >= 1 && 2 * pairs <= MAX_DIM,
            "chart supports 1..={} conjugate pairs",
            MAX_DIM / 2
        );
        CanonicalChart { pairs }
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn dim(&self) -> usize {
        2 * self.pairs
    }

    pub fn q_index(&self, i: usize) -> usize {
        assert!(i < self.pairs);
        i
    }

    pub fn p_index(&self, i: usize) -> usize {
        assert!(i < self.pairs);
        self.pairs + i
    }

    pub fn omega(&self) -> SmallMatrix {
        SmallMatrix::canonical_symplectic(self.pairs)
    }

    /// Assemble a phase-space point from base coordinates and momenta.
    pub fn lift(&self, q: &[f64], p: &[f64]) -> Vec<f64> {
        assert_eq!(q.len(), self.pairs);
        assert_eq!(p.len(), self.pairs);
        let mut x = Vec::with_capacity(self.dim());
        x.extend_from_slice(q);
        x.extend_from_slice(p);
        x
    }

    pub fn split<'a>(&self, x: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        assert_eq!(x.len(), self.dim());
        x.split_at(self.pairs)
    }
}
