//! Scaling weight assignments for homogeneous thermodynamic systems.

use crate::error::{Error, Result};

/// Weights (r₁, …, rₙ; r; ρ) for a scaling action that sends
/// qⁱ ↦ λ^{rᵢ} qⁱ, the potential u ↦ λ^r u, and therefore
/// pᵢ ↦ λ^{r−rᵢ} pᵢ. ρ > 0 is the weight of the symplectization fiber.
///
/// The classical extensive case is all weights equal to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingWeights {
    coords: Vec<f64>,
    r: f64,
    rho: f64,
}

impl ScalingWeights {
    pub fn new(coords: Vec<f64>, r: f64, rho: f64) -> Result<Self> {
        if coords.is_empty() || coords.len() > 3 {
            return Err(Error::Invalid(format!(
                "expected between 1 and 3 coordinate weights, got {}",
                coords.len()
            )));
        }
        if !coords.iter().all(|w| w.is_finite()) || !r.is_finite() || !rho.is_finite() {
            return Err(Error::Invalid("scaling weights must be finite".into()));
        }
        if rho <= 0.0 {
            return Err(Error::Invalid(format!(
                "fiber weight must be positive, got {rho}"
            )));
        }
        Ok(ScalingWeights { coords, r, rho })
    }

    /// All coordinate weights and the potential degree equal to one: the
    /// homogeneity of classical extensive thermodynamics.
    pub fn extensive(n: usize) -> Self {
        ScalingWeights::new(vec![1.0; n], 1.0, 1.0).expect("unit weights are valid")
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.coords[i]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Weight of the conjugate momentum pᵢ.
    pub fn momentum(&self, i: usize) -> f64 {
        self.r - self.coords[i]
    }

    /// Weight of the fiber momentum μ.
    pub fn mu(&self) -> f64 {
        self.r - self.rho
    }
}
