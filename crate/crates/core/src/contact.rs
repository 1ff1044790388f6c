//! Contact charts over canonical phase space and Legendre submanifolds.
//!
//! The contact chart adjoins the potential coordinate u to a canonical chart,
//! with coordinates ordered (q¹..qⁿ, p₁..pₙ, u) and contact form
//! α = du − Σ pᵢdqⁱ. A generating function u(q) cuts out the Legendre
//! submanifold {u = u(q), pᵢ = ∂u/∂qⁱ}, whose projection along u is a
//! Lagrangian graph. For scale-invariant generating functions the
//! equilibrium flow u̇ = 0, q̇ⁱ = −C rᵢ qⁱ, ṗᵢ = C rᵢ pᵢ stays on the
//! submanifold.

use crate::chart::CanonicalChart;
use crate::error::{Error, Result};
use crate::field::{grad, second_directional, ScalarField};
use crate::integrate::rk4_flow;
use crate::matrix::SmallMatrix;
use crate::report::CheckReport;
use crate::sample::DomainBox;
use crate::symplectic::exterior_derivative_one_form;
use crate::weights::ScalingWeights;

/// Tolerance on the degree-zero Euler identity at the initial point of a
/// restricted flow.
const HOMOGENEITY_TOL: f64 = 1e-9;

/// A canonical chart with the potential fiber attached. Coordinates are
/// (q¹..qⁿ, p₁..pₙ, u) with u in the last slot.
#[derive(Debug, Clone, Copy)]
pub struct ContactChart {
    base: CanonicalChart,
}

impl ContactChart {
    pub fn new(base: CanonicalChart) -> Self {
        ContactChart { base }
    }

    pub fn base(&self) -> CanonicalChart {
        self.base
    }

    pub fn n(&self) -> usize {
        self.base.pairs()
    }

    pub fn dim(&self) -> usize {
        self.base.dim() + 1
    }

    pub fn u_index(&self) -> usize {
        self.base.dim()
    }

    /// Coefficient fields of α = du − Σ pᵢdqⁱ in chart order.
    pub fn alpha_coefficients(&self) -> Vec<ScalarField> {
        let n = self.n();
        let dim = self.dim();
        let mut coeffs = Vec::with_capacity(dim);
        for i in 0..n {
            let pi = n + i;
            coeffs.push(ScalarField::new(dim, move |x| Ok(-x[pi])));
        }
        for _ in 0..n {
            coeffs.push(ScalarField::constant(dim, 0.0));
        }
        coeffs.push(ScalarField::constant(dim, 1.0));
        coeffs
    }

    /// α evaluated on a tangent vector at x.
    pub fn alpha_value(&self, x: &[f64], v: &[f64]) -> f64 {
        let n = self.n();
        let mut acc = v[self.u_index()];
        for i in 0..n {
            acc -= x[n + i] * v[i];
        }
        acc
    }

    /// The Reeb field ∂/∂u, constant in this chart.
    pub fn reeb_components(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.dim()];
        r[self.u_index()] = 1.0;
        r
    }

    /// Verifies at each point that dα equals the lift of ω (entrywise), that
    /// α(R) = 1, and that i_R dα = 0.
    pub fn contactization_report(&self, points: &[Vec<f64>], tolerance: f64) -> CheckReport {
        let n = self.n();
        let dim = self.dim();
        let coeffs = self.alpha_coefficients();
        let mut omega_lift = SmallMatrix::zeros(dim, dim);
        for i in 0..n {
            omega_lift[(i, n + i)] = 1.0;
            omega_lift[(n + i, i)] = -1.0;
        }
        let u_idx = self.u_index();
        CheckReport::over_samples("contactization", tolerance, points, |x| {
            let da = exterior_derivative_one_form(&coeffs, x)?;
            let mut worst = da.sub(&omega_lift).max_abs();
            let alpha_r = coeffs[u_idx].value(x)?;
            worst = worst.max((alpha_r - 1.0).abs());
            for b in 0..dim {
                worst = worst.max(da[(u_idx, b)].abs());
            }
            Ok(worst)
        })
    }
}

/// A point of the contact chart, kept in named parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactPoint {
    pub u: f64,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl ContactPoint {
    /// Chart-ordered coordinates (q, p, u).
    pub fn to_vec(&self) -> Vec<f64> {
        let mut x = self.q.clone();
        x.extend_from_slice(&self.p);
        x.push(self.u);
        x
    }

    pub fn from_vec(x: &[f64]) -> Result<Self> {
        if x.len() % 2 != 1 {
            return Err(Error::Invalid(format!(
                "contact point needs odd dimension, got {}",
                x.len()
            )));
        }
        let n = x.len() / 2;
        Ok(ContactPoint {
            u: x[2 * n],
            q: x[..n].to_vec(),
            p: x[n..2 * n].to_vec(),
        })
    }
}

/// The submanifold {u = u(q), p = ∇u(q)} of a contact chart, presented by
/// its generating function.
#[derive(Debug, Clone)]
pub struct LegendreSubmanifold {
    generating: ScalarField,
}

impl LegendreSubmanifold {
    pub fn from_generating(generating: ScalarField) -> Self {
        LegendreSubmanifold { generating }
    }

    pub fn generating(&self) -> &ScalarField {
        &self.generating
    }

    pub fn n(&self) -> usize {
        self.generating.arity()
    }

    pub fn chart(&self) -> ContactChart {
        ContactChart::new(CanonicalChart::new(self.n()))
    }

    /// Momenta on the surface, from closed-form partials when the generating
    /// function carries them and from dual seeds otherwise.
    pub fn surface_momenta(&self, q: &[f64]) -> Result<Vec<f64>> {
        if self.generating.has_partials() {
            (0..self.n())
                .map(|i| self.generating.partial(i)?.value(q))
                .collect()
        } else {
            grad(&self.generating, q)
        }
    }

    /// The immersion i_Λ(q) = (u(q), q, ∇u(q)).
    pub fn immerse(&self, q: &[f64]) -> Result<ContactPoint> {
        if q.len() != self.n() {
            return Err(Error::Arity {
                expected: self.n(),
                got: q.len(),
            });
        }
        Ok(ContactPoint {
            u: self.generating.value(q)?,
            q: q.to_vec(),
            p: self.surface_momenta(q)?,
        })
    }

    /// Drop the fiber: the Lagrangian graph point (q, ∇u(q)).
    pub fn project(&self, point: &ContactPoint) -> (Vec<f64>, Vec<f64>) {
        (point.q.clone(), point.p.clone())
    }

    /// Recover the fiber from the base point: (q, p) ↦ (q, p, u(q)). With
    /// (q, p) on the graph this inverts `project` exactly.
    pub fn unproject(&self, q: &[f64], p: &[f64]) -> Result<ContactPoint> {
        Ok(ContactPoint {
            u: self.generating.value(q)?,
            q: q.to_vec(),
            p: p.to_vec(),
        })
    }

    /// Max residual of the pulled-back contact form (i_Λ)*α over the grid.
    /// The u-derivative is taken through the chart coefficients and the
    /// immersion tangent, so closed-form momenta are genuinely compared
    /// against dual-seeded derivatives.
    pub fn legendre_report(
        &self,
        region: &DomainBox,
        per_axis: usize,
        tolerance: f64,
    ) -> CheckReport {
        let n = self.n();
        if region.dim() != n {
            return CheckReport::failure(
                "legendre-contact",
                tolerance,
                0,
                format!("region dimension {} does not match n = {n}", region.dim()),
            );
        }
        let grid = region.grid(per_axis);
        CheckReport::over_samples("legendre-contact", tolerance, &grid, |q| {
            let du = grad(&self.generating, q)?;
            let p = self.surface_momenta(q)?;
            // (i_Λ)*α (∂qⁱ) = ∂u/∂qⁱ − pᵢ.
            let mut worst = 0.0f64;
            for i in 0..n {
                worst = worst.max((du[i] - p[i]).abs());
            }
            Ok(worst)
        })
    }

    /// Isotropy of the projected graph: max |∂pᵢ/∂qʲ − ∂pⱼ/∂qⁱ| over the
    /// grid, with each side differentiated independently.
    pub fn projection_report(
        &self,
        region: &DomainBox,
        per_axis: usize,
        tolerance: f64,
    ) -> CheckReport {
        let n = self.n();
        if region.dim() != n {
            return CheckReport::failure(
                "projection-isotropy",
                tolerance,
                0,
                format!("region dimension {} does not match n = {n}", region.dim()),
            );
        }
        let grid = region.grid(per_axis);
        CheckReport::over_samples("projection-isotropy", tolerance, &grid, |q| {
            let mut worst = 0.0f64;
            if self.generating.has_partials() {
                let mut rows = Vec::with_capacity(n);
                for i in 0..n {
                    rows.push(grad(&self.generating.partial(i)?, q)?);
                }
                for i in 0..n {
                    for j in (i + 1)..n {
                        worst = worst.max((rows[i][j] - rows[j][i]).abs());
                    }
                }
            } else {
                let e = |k: usize| {
                    let mut v = vec![0.0; n];
                    v[k] = 1.0;
                    v
                };
                for i in 0..n {
                    for j in (i + 1)..n {
                        let hij = second_directional(&self.generating, q, &e(i), &e(j))?;
                        let hji = second_directional(&self.generating, q, &e(j), &e(i))?;
                        worst = worst.max((hij - hji).abs());
                    }
                }
            }
            Ok(worst)
        })
    }

    /// Integrate the equilibrium flow u̇ = 0, q̇ⁱ = −C rᵢ qⁱ, ṗᵢ = C rᵢ pᵢ
    /// from the surface point over q0. Requires the generating function to
    /// be scale-invariant (degree-zero) at q0: Σ rᵢ qⁱ ∂u/∂qⁱ must vanish,
    /// otherwise the flow would leave the submanifold.
    pub fn restricted_flow(
        &self,
        weights: &ScalingWeights,
        q0: &[f64],
        c: f64,
        t_end: f64,
        dt: f64,
    ) -> Result<RestrictedFlow> {
        let n = self.n();
        if weights.n() != n || q0.len() != n {
            return Err(Error::Arity {
                expected: n,
                got: weights.n().max(q0.len()),
            });
        }
        let du = self.surface_momenta(q0)?;
        let euler: f64 = (0..n).map(|i| weights.coord(i) * q0[i] * du[i]).sum();
        if euler.abs() > HOMOGENEITY_TOL {
            return Err(Error::Precondition(format!(
                "generating function is not degree-zero at the initial point: \
                 Σ rᵢqⁱ∂ᵢu = {euler:.3e}"
            )));
        }

        let start = self.immerse(q0)?;
        let y0 = start.to_vec();
        let r: Vec<f64> = weights.coords().to_vec();
        let rows = rk4_flow(
            |y| {
                let mut dy = vec![0.0; 2 * n + 1];
                for i in 0..n {
                    dy[i] = -c * r[i] * y[i];
                    dy[n + i] = c * r[i] * y[n + i];
                }
                Ok(dy)
            },
            &y0,
            dt,
            t_end,
        )?;
        let rows = rows
            .into_iter()
            .map(|(t, y)| Ok((t, ContactPoint::from_vec(&y)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(RestrictedFlow { rows })
    }

    /// Max over the trajectory of |u(q(t)) − u(q(0))|: the generating
    /// function re-evaluated along the integrated base curve.
    pub fn energy_drift(&self, flow: &RestrictedFlow) -> Result<f64> {
        let rows = flow.rows();
        let Some((_, first)) = rows.first() else {
            return Ok(0.0);
        };
        let u0 = self.generating.value(&first.q)?;
        let mut worst = 0.0f64;
        for (_, point) in rows {
            worst = worst.max((self.generating.value(&point.q)? - u0).abs());
        }
        Ok(worst)
    }

    /// Max over the trajectory of |pᵢ(t) − ∂u/∂qⁱ(q(t))|: preservation of
    /// the surface relations along the flow.
    pub fn legendre_drift(&self, flow: &RestrictedFlow) -> Result<f64> {
        let mut worst = 0.0f64;
        for (_, point) in flow.rows() {
            let du = self.surface_momenta(&point.q)?;
            for (pi, di) in point.p.iter().zip(&du) {
                worst = worst.max((pi - di).abs());
            }
        }
        Ok(worst)
    }
}

/// A restricted-flow trajectory: (t, point) per step, initial state first.
#[derive(Debug, Clone)]
pub struct RestrictedFlow {
    rows: Vec<(f64, ContactPoint)>,
}

impl RestrictedFlow {
    pub fn rows(&self) -> &[(f64, ContactPoint)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn final_row(&self) -> &(f64, ContactPoint) {
        self.rows.last().expect("flow always records the start")
    }

    /// Max over the trajectory of |u_k − u_0| for the fiber column itself.
    pub fn fiber_drift(&self) -> f64 {
        let u0 = self.rows[0].1.u;
        self.rows
            .iter()
            .map(|(_, pt)| (pt.u - u0).abs())
            .fold(0.0, f64::max)
    }
}
