//! Axis-aligned sample boxes and deterministic grids.

use crate::error::{Error, Result};
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Invalid(format!(
                "box bounds must be nonempty and of equal length (got {} and {})",
                lo.len(),
                hi.len()
            )));
        }
        for (i, (a, b)) in lo.iter().zip(&hi).enumerate() {
            if !a.is_finite() || !b.is_finite() || a >= b {
                return Err(Error::Invalid(format!(
                    "box axis {i} needs finite min < max, got [{a}, {b}]"
                )));
            }
        }
        Ok(DomainBox { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    /// Concatenate axes, e.g. a base box with a momentum box.
    pub fn product(&self, other: &DomainBox) -> DomainBox {
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        lo.extend_from_slice(&other.lo);
        hi.extend_from_slice(&other.hi);
        DomainBox { lo, hi }
    }

    /// Uniform grid with `per_axis` points per axis, endpoints included
    /// (`per_axis = 1` degenerates to the midpoint). Deterministic row-major
    /// order, last axis fastest.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        assert!(per_axis >= 1);
        self.grid_impl(per_axis, false)
    }

    /// Like [`grid`](Self::grid) but strictly inside the box: axis values are
    /// lo + (k+1)(hi−lo)/(per_axis+1).
    pub fn interior_grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        assert!(per_axis >= 1);
        self.grid_impl(per_axis, true)
    }

    fn grid_impl(&self, per_axis: usize, interior: bool) -> Vec<Vec<f64>> {
        let n = self.dim();
        let axis_value = |axis: usize, k: usize| -> f64 {
            let (a, b) = (self.lo[axis], self.hi[axis]);
            if interior {
                a + (b - a) * (k + 1) as f64 / (per_axis + 1) as f64
            } else if per_axis == 1 {
                0.5 * (a + b)
            } else {
                a + (b - a) * k as f64 / (per_axis - 1) as f64
            }
        };
        let total = per_axis.pow(n as u32);
        let mut out = Vec::with_capacity(total);
        for mut flat in 0..total {
            let mut point = vec![0.0; n];
            for axis in (0..n).rev() {
                point[axis] = axis_value(axis, flat % per_axis);
                flat /= per_axis;
            }
            out.push(point);
        }
        out
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&a, &b)| rng.gen_range(a..b))
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| v >= a && v <= b)
    }
}
