//! Poisson brackets, Hamiltonian fields, symplectomorphism and Lie-derivative
//! checks on canonical charts.
//!
//! Both interior-product sign conventions are first-class: constraint fields
//! are conventionally built from i_Xω = df, scaling-charge fields from
//! i_Xω = −df, and the two differ by an overall sign. Every operation takes
//! the convention at the call site so a sign never hides inside a module.

use crate::chart::CanonicalChart;
use crate::error::{Error, Result};
use crate::field::{grad, hessian, ScalarField, SmoothMap};
use crate::hyperdual::HyperDual;
use crate::matrix::SmallMatrix;
use crate::report::CheckReport;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignConvention {
    /// X solves i_Xω = df: components (−∂f/∂p, +∂f/∂q).
    IXOmegaEqualsDf,
    /// X solves i_Xω = −df: components (+∂f/∂p, −∂f/∂q).
    IXOmegaEqualsMinusDf,
}

impl SignConvention {
    /// Sign applied to (∂f/∂p, −∂f/∂q) to get the field components.
    fn factor(self) -> f64 {
        match self {
            SignConvention::IXOmegaEqualsDf => -1.0,
            SignConvention::IXOmegaEqualsMinusDf => 1.0,
        }
    }
}

impl fmt::Display for SignConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignConvention::IXOmegaEqualsDf => write!(f, "iXw=df"),
            SignConvention::IXOmegaEqualsMinusDf => write!(f, "iXw=-df"),
        }
    }
}

/// A tangent vector attached to a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldValue {
    pub base: Vec<f64>,
    pub components: Vec<f64>,
}

/// Canonical Poisson bracket {f, g} = Σᵢ ∂f/∂qⁱ ∂g/∂pᵢ − ∂g/∂qⁱ ∂f/∂pᵢ.
pub fn poisson_bracket(
    f: &ScalarField,
    g: &ScalarField,
    chart: CanonicalChart,
    x: &[f64],
) -> Result<f64> {
    let df = grad(f, x)?;
    let dg = grad(g, x)?;
    let m = chart.pairs();
    let mut acc = 0.0;
    for i in 0..m {
        acc += df[chart.q_index(i)] * dg[chart.p_index(i)]
            - dg[chart.q_index(i)] * df[chart.p_index(i)];
    }
    Ok(acc)
}

/// The bracket {f, g} as a scalar field, assembled from the closed-form
/// partials of both arguments so the result itself admits dual evaluation
/// (needed for iterated brackets).
pub fn poisson_bracket_field(
    f: &ScalarField,
    g: &ScalarField,
    chart: CanonicalChart,
) -> Result<ScalarField> {
    let dim = chart.dim();
    if f.arity() != dim || g.arity() != dim {
        return Err(Error::Arity {
            expected: dim,
            got: f.arity().max(g.arity()),
        });
    }
    let m = chart.pairs();
    let mut fq = Vec::with_capacity(m);
    let mut fp = Vec::with_capacity(m);
    let mut gq = Vec::with_capacity(m);
    let mut gp = Vec::with_capacity(m);
    for i in 0..m {
        fq.push(f.partial(chart.q_index(i))?);
        fp.push(f.partial(chart.p_index(i))?);
        gq.push(g.partial(chart.q_index(i))?);
        gp.push(g.partial(chart.p_index(i))?);
    }
    Ok(ScalarField::new(dim, move |x| {
        let mut acc = HyperDual::ZERO;
        for i in 0..m {
            acc = acc + fq[i].eval_dual(x)? * gp[i].eval_dual(x)?
                - gq[i].eval_dual(x)? * fp[i].eval_dual(x)?;
        }
        Ok(acc)
    }))
}

/// Rearrange a gradient into Hamiltonian field components for the chart and
/// convention.
fn field_components_from_grad(
    df: &[f64],
    chart: CanonicalChart,
    convention: SignConvention,
) -> Vec<f64> {
    let m = chart.pairs();
    let s = convention.factor();
    let mut out = vec![0.0; chart.dim()];
    for i in 0..m {
        out[chart.q_index(i)] = s * df[chart.p_index(i)];
        out[chart.p_index(i)] = -s * df[chart.q_index(i)];
    }
    out
}

/// The Hamiltonian vector field of `f` at `x` under the chosen convention.
pub fn hamiltonian_field(
    f: &ScalarField,
    chart: CanonicalChart,
    x: &[f64],
    convention: SignConvention,
) -> Result<VectorFieldValue> {
    let df = grad(f, x)?;
    Ok(VectorFieldValue {
        base: x.to_vec(),
        components: field_components_from_grad(&df, chart, convention),
    })
}

/// A vector field presented either by explicit component fields or as the
/// Hamiltonian field of a generator. The latter needs only dual evaluation
/// of the generator: values come from its gradient, the Jacobian from its
/// Hessian.
#[derive(Clone)]
pub enum VectorField {
    Components(Vec<ScalarField>),
    HamiltonianOf {
        generator: ScalarField,
        chart: CanonicalChart,
        convention: SignConvention,
    },
}

impl VectorField {
    pub fn dim(&self) -> usize {
        match self {
            VectorField::Components(c) => c.len(),
            VectorField::HamiltonianOf { chart, .. } => chart.dim(),
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            VectorField::Components(c) => c.iter().map(|f| f.value(x)).collect(),
            VectorField::HamiltonianOf {
                generator,
                chart,
                convention,
            } => {
                let df = grad(generator, x)?;
                Ok(field_components_from_grad(&df, *chart, *convention))
            }
        }
    }

    /// Components at a dual point. For a generator presentation this needs
    /// the generator's closed-form partials.
    pub fn value_dual(&self, x: &[HyperDual]) -> Result<Vec<HyperDual>> {
        match self {
            VectorField::Components(c) => c.iter().map(|f| f.eval_dual(x)).collect(),
            VectorField::HamiltonianOf {
                generator,
                chart,
                convention,
            } => {
                let m = chart.pairs();
                let s = convention.factor();
                let mut out = vec![HyperDual::ZERO; chart.dim()];
                for i in 0..m {
                    let dq = generator.partial(chart.q_index(i))?.eval_dual(x)?;
                    let dp = generator.partial(chart.p_index(i))?.eval_dual(x)?;
                    out[chart.q_index(i)] = dp.scale(s);
                    out[chart.p_index(i)] = dq.scale(-s);
                }
                Ok(out)
            }
        }
    }

    /// Jacobian J[k][a] = ∂X_k/∂x_a.
    pub fn jacobian(&self, x: &[f64]) -> Result<SmallMatrix> {
        match self {
            VectorField::Components(c) => {
                let mut j = SmallMatrix::zeros(c.len(), x.len());
                for (k, comp) in c.iter().enumerate() {
                    let g = grad(comp, x)?;
                    for (a, v) in g.iter().enumerate() {
                        j[(k, a)] = *v;
                    }
                }
                Ok(j)
            }
            VectorField::HamiltonianOf {
                generator,
                chart,
                convention,
            } => {
                let h = hessian(generator, x)?;
                let m = chart.pairs();
                let s = convention.factor();
                let dim = chart.dim();
                let mut j = SmallMatrix::zeros(dim, dim);
                for i in 0..m {
                    for a in 0..dim {
                        j[(chart.q_index(i), a)] = s * h[(chart.p_index(i), a)];
                        j[(chart.p_index(i), a)] = -s * h[(chart.q_index(i), a)];
                    }
                }
                Ok(j)
            }
        }
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorField::Components(c) => write!(f, "VectorField::Components(dim {})", c.len()),
            VectorField::HamiltonianOf {
                chart, convention, ..
            } => write!(
                f,
                "VectorField::HamiltonianOf(dim {}, {convention})",
                chart.dim()
            ),
        }
    }
}

/// Commutator [X, Y] = (X·∇)Y − (Y·∇)X evaluated exactly through the
/// component Jacobians.
pub fn lie_bracket(x_field: &VectorField, y_field: &VectorField, at: &[f64]) -> Result<Vec<f64>> {
    let xv = x_field.value(at)?;
    let yv = y_field.value(at)?;
    let jx = x_field.jacobian(at)?;
    let jy = y_field.jacobian(at)?;
    let a = jy.mul_vec(&xv);
    let b = jx.mul_vec(&yv);
    Ok(a.iter().zip(&b).map(|(u, v)| u - v).collect())
}

/// A two-form given by its antisymmetric coefficient matrix, constant or
/// varying over the chart.
#[derive(Clone)]
pub enum TwoForm {
    Constant(SmallMatrix),
    Entries(Vec<Vec<ScalarField>>),
}

impl TwoForm {
    pub fn dim(&self) -> usize {
        match self {
            TwoForm::Constant(m) => m.rows(),
            TwoForm::Entries(e) => e.len(),
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<SmallMatrix> {
        match self {
            TwoForm::Constant(m) => Ok(*m),
            TwoForm::Entries(e) => {
                let n = e.len();
                let mut m = SmallMatrix::zeros(n, n);
                for (i, row) in e.iter().enumerate() {
                    for (j, f) in row.iter().enumerate() {
                        m[(i, j)] = f.value(x)?;
                    }
                }
                Ok(m)
            }
        }
    }

    fn entry_dual(&self, i: usize, j: usize, x: &[HyperDual]) -> Result<HyperDual> {
        match self {
            TwoForm::Constant(m) => Ok(HyperDual::constant(m[(i, j)])),
            TwoForm::Entries(e) => e[i][j].eval_dual(x),
        }
    }
}

/// Exterior derivative of a one-form given by coefficient fields:
/// (dλ)_{ab} = ∂_a λ_b − ∂_b λ_a.
pub fn exterior_derivative_one_form(coeffs: &[ScalarField], x: &[f64]) -> Result<SmallMatrix> {
    let n = coeffs.len();
    let mut partials = SmallMatrix::zeros(n, n);
    for (b, coeff) in coeffs.iter().enumerate() {
        let g = grad(coeff, x)?;
        for a in 0..n {
            partials[(a, b)] = g[a];
        }
    }
    let mut out = SmallMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            out[(a, b)] = partials[(a, b)] - partials[(b, a)];
        }
    }
    Ok(out)
}

/// Lie derivative of a closed two-form along a field, via Cartan's formula
/// ℒ_X ω = d(i_X ω). The caller asserts closedness (true for every constant
/// form, in particular ω and its extension).
pub fn lie_derivative_closed_two_form(
    field: &VectorField,
    form: &TwoForm,
    x: &[f64],
) -> Result<SmallMatrix> {
    let n = x.len();
    assert_eq!(field.dim(), n);
    assert_eq!(form.dim(), n);
    // ∂_a (i_Xω)_b in one dual pass per direction a.
    let mut partials = SmallMatrix::zeros(n, n);
    let mut seeds: Vec<HyperDual> = x.iter().map(|&v| HyperDual::constant(v)).collect();
    for a in 0..n {
        seeds[a].d1 = 1.0;
        let xv = field.value_dual(&seeds)?;
        for b in 0..n {
            let mut acc = HyperDual::ZERO;
            for (c, xc) in xv.iter().enumerate() {
                acc = acc + *xc * form.entry_dual(c, b, &seeds)?;
            }
            partials[(a, b)] = acc.d1;
        }
        seeds[a].d1 = 0.0;
    }
    let mut out = SmallMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            out[(a, b)] = partials[(a, b)] - partials[(b, a)];
        }
    }
    Ok(out)
}

/// Max-norm residual ‖JᵀΩJ − Ω‖∞ of a phase-space map over the samples.
/// Zero within tolerance certifies a symplectomorphism on the sampled box.
pub fn check_symplectomorphism(
    map: &SmoothMap,
    samples: &[Vec<f64>],
    tolerance: f64,
) -> CheckReport {
    let dim = map.in_dim();
    if map.out_dim() != dim || dim % 2 != 0 {
        return CheckReport::failure(
            "symplectomorphism",
            tolerance,
            samples.len(),
            format!(
                "map must be square with even dimension, got {} -> {}",
                dim,
                map.out_dim()
            ),
        );
    }
    let omega = SmallMatrix::canonical_symplectic(dim / 2);
    CheckReport::over_samples("symplectomorphism", tolerance, samples, |x| {
        let j = map.jacobian(x)?;
        let pulled = j.transpose().matmul(&omega).matmul(&j);
        Ok(pulled.sub(&omega).max_abs())
    })
}
