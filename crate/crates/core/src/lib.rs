//! Geometric checks for thermodynamic systems on symplectic phase space.
//!
//! Equations of state enter as primary constraints p_i = f_i(q) on T*Q with
//! tautological form θ = Σ p_i dq^i and symplectic form ω = −dθ. The crate
//! verifies the structure such a description must carry: constraints in
//! involution, isotropic state surfaces, canonical changes of state
//! variables, a contact description with fiber coordinate u, and a scaling
//! extension on which homogeneity becomes a Hamiltonian symmetry with a
//! conserved charge. Equilibrium relations for power-law black hole entropy
//! models come out of the same machinery.
//!
//! All derivatives are exact, computed with dual numbers that carry two
//! directions and the mixed second derivative ([`HyperDual`]); nothing in the
//! crate differentiates by finite differences.

pub mod blackhole;
pub mod chart;
pub mod contact;
pub mod eos;
pub mod error;
pub mod field;
pub mod hyperdual;
pub mod integrate;
pub mod matrix;
pub mod report;
pub mod sample;
pub mod scaling;
pub mod symplectic;
pub mod weights;

pub use blackhole::{BlackHoleModel, BlackHoleState};
pub use chart::CanonicalChart;
pub use contact::{ContactChart, ContactPoint, LegendreSubmanifold, RestrictedFlow};
pub use eos::{ConstraintSystem, IdealGasParams, LegendreTransform, VdwParams};
pub use error::{Error, Result};
pub use field::{grad, hessian, second_directional, ScalarField, SmoothMap};
pub use hyperdual::HyperDual;
pub use matrix::SmallMatrix;
pub use report::CheckReport;
pub use sample::DomainBox;
pub use scaling::{ExtendedEnergy, ExtendedState, GaugeFixed};
pub use symplectic::{
    hamiltonian_field, lie_bracket, lie_derivative_closed_two_form, poisson_bracket,
    SignConvention, TwoForm, VectorField, VectorFieldValue,
};
pub use weights::ScalingWeights;
