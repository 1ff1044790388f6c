//! Equations of state as primary constraints φᵢ = pᵢ − fᵢ(q) on phase space.
//!
//! A system is a list of state functions fᵢ(q) together with an optional
//! closed-form potential u(q). Checks verify that the constraints are in
//! involution, that the state surface is isotropic (the Maxwell relations),
//! that the potential reconstructed by integrating θ = Σ pᵢdqⁱ along the
//! surface is path-independent and consistent with the fᵢ, and that the
//! canonical exchange of a state pair behaves as a Legendre transform.

use crate::chart::CanonicalChart;
use crate::error::{Error, Result};
use crate::field::{grad, ScalarField, SmoothMap};
use crate::hyperdual::HyperDual;
use crate::integrate::integrate_adaptive;
use crate::report::CheckReport;
use crate::sample::DomainBox;
use crate::symplectic::poisson_bracket;

const SEGMENT_TOL: f64 = 1e-10;

/// Entropy-scale constant of the reference monoatomic gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealGasParams {
    a: f64,
}

impl IdealGasParams {
    pub fn new(a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Invalid(format!(
                "entropy-scale constant must be positive, got {a}"
            )));
        }
        Ok(IdealGasParams { a })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
}

/// Parameters of the shifted-volume gas: the same entropy-scale constant
/// plus an excluded volume b > 0. The domain is restricted to q² > b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VdwParams {
    a: f64,
    b: f64,
}

impl VdwParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Invalid(format!(
                "entropy-scale constant must be positive, got {a}"
            )));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::Invalid(format!(
                "excluded volume must be positive, got {b}"
            )));
        }
        Ok(VdwParams { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// An equation of state presented as the graph {pᵢ = fᵢ(q)} in a canonical
/// chart of n conjugate pairs.
#[derive(Clone)]
pub struct ConstraintSystem {
    name: String,
    chart: CanonicalChart,
    state_functions: Vec<ScalarField>,
    potential: Option<ScalarField>,
    default_box: DomainBox,
}

impl ConstraintSystem {
    pub fn new(
        name: impl Into<String>,
        state_functions: Vec<ScalarField>,
        potential: Option<ScalarField>,
        default_box: DomainBox,
    ) -> Result<Self> {
        let n = state_functions.len();
        if n == 0 || n > 4 {
            return Err(Error::Invalid(format!(
                "expected between 1 and 4 state functions, got {n}"
            )));
        }
        for f in &state_functions {
            if f.arity() != n {
                return Err(Error::Arity {
                    expected: n,
                    got: f.arity(),
                });
            }
        }
        if let Some(u) = &potential {
            if u.arity() != n {
                return Err(Error::Arity {
                    expected: n,
                    got: u.arity(),
                });
            }
        }
        if default_box.dim() != n {
            return Err(Error::Arity {
                expected: n,
                got: default_box.dim(),
            });
        }
        Ok(ConstraintSystem {
            name: name.into(),
            chart: CanonicalChart::new(n),
            state_functions,
            potential,
            default_box,
        })
    }

    /// Monoatomic reference gas: T = A e^{2s/3} v^{−2/3}, P = −∂u/∂v, with
    /// u = (3/2) A e^{2s/3} v^{−2/3} and chart coordinates q = (s, v).
    pub fn ideal_gas(params: &IdealGasParams) -> Self {
        let a = params.a();
        let f1 = ScalarField::new(2, move |x| {
            Ok((x[0] * (2.0 / 3.0)).exp() * x[1].powf(-2.0 / 3.0)? * a)
        })
        .with_partials(vec![
            ScalarField::new(2, move |x| {
                Ok((x[0] * (2.0 / 3.0)).exp() * x[1].powf(-2.0 / 3.0)? * (a * 2.0 / 3.0))
            }),
            ScalarField::new(2, move |x| {
                Ok((x[0] * (2.0 / 3.0)).exp() * x[1].powf(-5.0 / 3.0)? * (-a * 2.0 / 3.0))
            }),
        ]);
        let f2 = ScalarField::new(2, move |x| {
            Ok((x[0] * (2.0 / 3.0)).exp() * x[1].powf(-5.0 / 3.0)? * (-a))
        })
        .with_partials(vec![
            ScalarField::new(2, move |x| {
                Ok((x[0] * (2.0 / 3.0)).exp() * x[1].powf(-5.0 / 3.0)? * (-a * 2.0 / 3.0))
            }),
            ScalarField::new(2, move |x| {
                Ok((x[0] * (2.0 / 3.0)).exp() * x[1].powf(-8.0 / 3.0)? * (a * 5.0 / 3.0))
            }),
        ]);
        let u = ScalarField::new(2, move |x| {
            Ok((x[0] * (2.0 / 3.0)).exp() * x[1].powf(-2.0 / 3.0)? * (1.5 * a))
        })
        .with_partials(vec![f1.clone(), f2.clone()]);
        let default_box = DomainBox::new(vec![-1.0, 0.5], vec![1.0, 4.0]).expect("static box");
        ConstraintSystem::new("ideal-gas", vec![f1, f2], Some(u), default_box)
            .expect("reference system is well-formed")
    }

    /// Excluded-volume gas obtained by pulling the reference constraints back
    /// through the shift map: f′₁ = A e^{2s/3}(v−b)^{−2/3},
    /// f′₂ = v^{−2} − A e^{2s/3}(v−b)^{−5/3}.
    ///
    /// The stored potential is u′ = (3/2) A e^{2s/3} (v−b)^{−2/3}. Its volume
    /// partial is f′₂ − v^{−2}, not f′₂: the full potential of this system
    /// carries an extra −1/v. Energy reconstruction recovers the full one.
    pub fn paper_vdw(params: &VdwParams) -> Self {
        let a = params.a();
        let b = params.b();
        let f1 = ScalarField::new(2, move |x| {
            Ok((x[0] * (2.0 / 3.0)).exp() * (x[1] - b).powf(-2.0 / 3.0)? * a)
        });
        let f2 = ScalarField::new(2, move |x| {
            Ok(x[1].powi(-2)? - (x[0] * (2.0 / 3.0)).exp() * (x[1] - b).powf(-5.0 / 3.0)? * a)
        });
        let u = ScalarField::new(2, move |x| {
            Ok((x[0] * (2.0 / 3.0)).exp() * (x[1] - b).powf(-2.0 / 3.0)? * (1.5 * a))
        })
        .with_partials(vec![
            f1.clone(),
            ScalarField::new(2, move |x| {
                Ok((x[0] * (2.0 / 3.0)).exp() * (x[1] - b).powf(-5.0 / 3.0)? * (-a))
            }),
        ]);
        let default_box =
            DomainBox::new(vec![-1.0, b + 0.5], vec![1.0, b + 3.0]).expect("static box");
        ConstraintSystem::new("paper-vdw", vec![f1, f2], Some(u), default_box)
            .expect("reference system is well-formed")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn chart(&self) -> CanonicalChart {
        self.chart
    }

    pub fn n(&self) -> usize {
        self.state_functions.len()
    }

    pub fn state_function(&self, i: usize) -> &ScalarField {
        &self.state_functions[i]
    }

    pub fn state_functions(&self) -> &[ScalarField] {
        &self.state_functions
    }

    pub fn potential(&self) -> Option<&ScalarField> {
        self.potential.as_ref()
    }

    pub fn default_box(&self) -> &DomainBox {
        &self.default_box
    }

    /// The i-th constraint φᵢ(q, p) = pᵢ − fᵢ(q) on the full chart.
    pub fn constraint(&self, i: usize) -> ScalarField {
        let n = self.n();
        let f = self.state_functions[i].clone();
        let slot = n + i;
        ScalarField::new(2 * n, move |x| Ok(x[slot] - f.eval_dual(&x[..x.len() / 2])?))
    }

    /// Lift a base point onto the constraint surface: (q, f(q)).
    pub fn lift(&self, q: &[f64]) -> Result<Vec<f64>> {
        if q.len() != self.n() {
            return Err(Error::Arity {
                expected: self.n(),
                got: q.len(),
            });
        }
        let mut x = q.to_vec();
        for f in &self.state_functions {
            x.push(f.value(q)?);
        }
        Ok(x)
    }

    /// Max over the grid of |{φᵢ, φⱼ}| for i < j, evaluated on the surface
    /// p = f(q). Vanishing brackets make the surface Lagrangian.
    pub fn involutivity_report(
        &self,
        region: &DomainBox,
        per_axis: usize,
        tolerance: f64,
    ) -> CheckReport {
        let n = self.n();
        if region.dim() != n {
            return CheckReport::failure(
                "involutivity",
                tolerance,
                0,
                format!("region dimension {} does not match n = {n}", region.dim()),
            );
        }
        let constraints: Vec<ScalarField> = (0..n).map(|i| self.constraint(i)).collect();
        let chart = self.chart;
        let grid = region.grid(per_axis);
        CheckReport::over_samples("involutivity", tolerance, &grid, |q| {
            let x = self.lift(q)?;
            let mut worst = 0.0f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    let pb = poisson_bracket(&constraints[i], &constraints[j], chart, &x)?;
                    worst = worst.max(pb.abs());
                }
            }
            Ok(worst)
        })
    }

    /// Max over the grid of |∂fᵢ/∂qʲ − ∂fⱼ/∂qⁱ| for i < j: the coefficients
    /// of ω restricted to the surface, which must vanish. For p-independent
    /// constraints this is the same quantity as the involutivity residual,
    /// computed directly from the state functions instead of through
    /// brackets.
    pub fn maxwell_isotropy_report(
        &self,
        region: &DomainBox,
        per_axis: usize,
        tolerance: f64,
    ) -> CheckReport {
        let n = self.n();
        if region.dim() != n {
            return CheckReport::failure(
                "maxwell-isotropy",
                tolerance,
                0,
                format!("region dimension {} does not match n = {n}", region.dim()),
            );
        }
        let grid = region.grid(per_axis);
        CheckReport::over_samples("maxwell-isotropy", tolerance, &grid, |q| {
            let mut jac = Vec::with_capacity(n);
            for f in &self.state_functions {
                jac.push(grad(f, q)?);
            }
            let mut worst = 0.0f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    worst = worst.max((jac[i][j] - jac[j][i]).abs());
                }
            }
            Ok(worst)
        })
    }

    /// ∫ Σᵢ fᵢ(q) dqⁱ along the polyline. For an exact (isotropic) system
    /// this is u(end) − u(start) independently of the path.
    pub fn reconstruct_energy(&self, path: &[Vec<f64>]) -> Result<f64> {
        if path.is_empty() {
            return Err(Error::Invalid("empty path".into()));
        }
        for q in path {
            if q.len() != self.n() {
                return Err(Error::Arity {
                    expected: self.n(),
                    got: q.len(),
                });
            }
        }
        let mut total = 0.0;
        for pair in path.windows(2) {
            let y0: Vec<HyperDual> = pair[0].iter().map(|&v| HyperDual::constant(v)).collect();
            let y1: Vec<HyperDual> = pair[1].iter().map(|&v| HyperDual::constant(v)).collect();
            total += segment_integral(&self.state_functions, &y0, &y1)?.val;
        }
        Ok(total)
    }

    /// The potential as a field, defined by u(q) = u_ref + ∫_{q_ref}^{q} θ|_C
    /// along the straight segment. Built on dual arithmetic throughout, so
    /// its gradient is a genuine derivative of the quadrature and must
    /// reproduce f(q).
    pub fn reconstructed_potential(&self, q_ref: &[f64], u_ref: f64) -> Result<ScalarField> {
        if q_ref.len() != self.n() {
            return Err(Error::Arity {
                expected: self.n(),
                got: q_ref.len(),
            });
        }
        let fs = self.state_functions.clone();
        let base: Vec<HyperDual> = q_ref.iter().map(|&v| HyperDual::constant(v)).collect();
        Ok(ScalarField::new(self.n(), move |x| {
            Ok(segment_integral(&fs, &base, x)? + u_ref)
        }))
    }
}

impl std::fmt::Debug for ConstraintSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ConstraintSystem({}, n = {})", self.name, self.n())
    }
}

/// ∫₀¹ Σᵢ fᵢ(y0 + s·(y1−y0)) (y1ᵢ−y0ᵢ) ds by adaptive quadrature. The
/// endpoints may carry dual seeds; differentiation passes through the
/// quadrature weights untouched.
fn segment_integral(
    fs: &[ScalarField],
    y0: &[HyperDual],
    y1: &[HyperDual],
) -> Result<HyperDual> {
    let d: Vec<HyperDual> = y1.iter().zip(y0).map(|(a, b)| *a - *b).collect();
    let mut gamma = vec![HyperDual::ZERO; y0.len()];
    integrate_adaptive(
        &mut |s| {
            for (g, (start, step)) in gamma.iter_mut().zip(y0.iter().zip(&d)) {
                *g = *start + *step * s;
            }
            let mut acc = HyperDual::ZERO;
            for (f, step) in fs.iter().zip(&d) {
                acc = acc + f.eval_dual(&gamma)? * *step;
            }
            Ok(acc)
        },
        0.0,
        1.0,
        SEGMENT_TOL,
    )
}

/// The canonical exchange of one conjugate pair,
/// (qⁱ, pᵢ) ↦ (−pᵢ, qⁱ), which swaps a state variable with its conjugate
/// while preserving ω. Applied to the surface of an exact system it realizes
/// the Legendre transform u ↦ u − pᵢqⁱ.
#[derive(Debug, Clone, Copy)]
pub struct LegendreTransform {
    chart: CanonicalChart,
    index: usize,
}

impl LegendreTransform {
    pub fn new(chart: CanonicalChart, index: usize) -> Result<Self> {
        if index >= chart.pairs() {
            return Err(Error::Invalid(format!(
                "pair index {index} out of range for {} pairs",
                chart.pairs()
            )));
        }
        Ok(LegendreTransform { chart, index })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// The exchange as a phase-space map.
    pub fn map(&self) -> SmoothMap {
        let dim = self.chart.dim();
        let qi = self.chart.q_index(self.index);
        let pi = self.chart.p_index(self.index);
        let mut components = Vec::with_capacity(dim);
        for slot in 0..dim {
            if slot == qi {
                components.push(ScalarField::new(dim, move |x| Ok(-x[pi])));
            } else if slot == pi {
                components.push(ScalarField::coordinate(dim, qi));
            } else {
                components.push(ScalarField::coordinate(dim, slot));
            }
        }
        SmoothMap::new(components)
    }

    /// Values of the transformed potential u − pᵢqⁱ (no sum) at base points
    /// on the surface of `sys`, with pᵢ = fᵢ(q).
    pub fn transformed_potential(
        &self,
        sys: &ConstraintSystem,
        samples: &[Vec<f64>],
    ) -> Result<Vec<f64>> {
        let u = sys.potential().ok_or_else(|| {
            Error::Precondition(format!(
                "system {} has no closed-form potential to transform",
                sys.name()
            ))
        })?;
        let f = sys.state_function(self.index);
        samples
            .iter()
            .map(|q| Ok(u.value(q)? - q[self.index] * f.value(q)?))
            .collect()
    }

    /// |∫(θ − θ′) − Δ(qⁱpᵢ)| along the straight segment from q0 to q1 on the
    /// surface, where θ′ is the tautological form of the exchanged pair
    /// written in the original base coordinates. Zero certifies that the two
    /// potentials differ by exactly pᵢqⁱ.
    pub fn exchange_residual(
        &self,
        sys: &ConstraintSystem,
        q0: &[f64],
        q1: &[f64],
    ) -> Result<f64> {
        let n = sys.n();
        if q0.len() != n || q1.len() != n {
            return Err(Error::Arity {
                expected: n,
                got: q0.len().max(q1.len()),
            });
        }
        let i = self.index;
        let fi = sys.state_function(i);

        let y0: Vec<HyperDual> = q0.iter().map(|&v| HyperDual::constant(v)).collect();
        let y1: Vec<HyperDual> = q1.iter().map(|&v| HyperDual::constant(v)).collect();
        let theta = segment_integral(sys.state_functions(), &y0, &y1)?.val;

        // θ′|_C = Σ_{j≠i} fⱼ dqʲ + qⁱ d(−fᵢ); the second term needs dfᵢ/ds
        // along the segment, taken from a directional seed.
        let d: Vec<f64> = q1.iter().zip(q0).map(|(a, b)| a - b).collect();
        let theta_prime = integrate_adaptive(
            &mut |s| {
                let gamma: Vec<HyperDual> = q0
                    .iter()
                    .zip(&d)
                    .map(|(&start, &step)| HyperDual::new(start + step * s, step, 0.0, 0.0))
                    .collect();
                let mut acc = 0.0;
                for (j, f) in sys.state_functions().iter().enumerate() {
                    if j != i {
                        acc += f.eval_dual(&gamma)?.val * d[j];
                    }
                }
                let dfi_ds = fi.eval_dual(&gamma)?.d1;
                acc -= gamma[i].val * dfi_ds;
                Ok(HyperDual::constant(acc))
            },
            0.0,
            1.0,
            SEGMENT_TOL,
        )?
        .val;

        let boundary = q1[i] * fi.value(q1)? - q0[i] * fi.value(q0)?;
        Ok((theta - theta_prime - boundary).abs())
    }
}

/// The base-shift map ψ from the excluded-volume chart to the reference
/// chart, plus the system whose constraints are the pullbacks ψ*φᵢ in
/// closed form.
#[derive(Debug, Clone)]
pub struct VdwPullback {
    pub map: SmoothMap,
    pub system: ConstraintSystem,
}

/// ψ(s, v, p₁, p₂) = (s, v − b, p₁, p₂ − v^{−2}): identity on (s, p₁),
/// volume shifted by the excluded volume, pressure slot shifted by the
/// closed one-form v^{−2} dv's potential. A fiberwise shift by a closed
/// form preserves ω, so ψ is a symplectomorphism wherever v ≠ 0.
pub fn map_ideal_to_vdw(params: &VdwParams) -> VdwPullback {
    let b = params.b();
    let map = SmoothMap::new(vec![
        ScalarField::coordinate(4, 0),
        ScalarField::new(4, move |x| Ok(x[1] - b)),
        ScalarField::coordinate(4, 2),
        ScalarField::new(4, |x| Ok(x[3] - x[1].powi(-2)?)),
    ]);
    VdwPullback {
        map,
        system: ConstraintSystem::paper_vdw(params),
    }
}

/// Pullback of a scalar along a map: f ∘ ψ as a field on the source chart.
pub fn pullback_scalar(map: &SmoothMap, f: &ScalarField) -> ScalarField {
    assert_eq!(map.out_dim(), f.arity(), "pullback arity mismatch");
    let map = map.clone();
    let f = f.clone();
    ScalarField::new(map.in_dim(), move |x| f.eval_dual(&map.apply_dual(x)?))
}

/// Verifies that dψ, restricted to the excluded-volume surface and written
/// in the graph-tangent bases e′ᵢ = ∂qⁱ + Σⱼ (∂f′ⱼ/∂qⁱ) ∂pⱼ of the source
/// and eᵢ of the target, is the identity matrix at every grid point. The
/// residual also includes the defect of dψ·e′ᵢ against the target tangent
/// space, so a map that failed to send surface to surface would be caught.
pub fn tangent_map_identity_check(
    params: &VdwParams,
    grid: &[Vec<f64>],
    tolerance: f64,
) -> CheckReport {
    let ideal_params = IdealGasParams::new(params.a()).expect("validated with VdwParams");
    let ideal = ConstraintSystem::ideal_gas(&ideal_params);
    let pullback = map_ideal_to_vdw(params);
    let vdw = &pullback.system;
    let psi = &pullback.map;
    let n = 2usize;
    CheckReport::over_samples("tangent-map-identity", tolerance, grid, |qp| {
        let xp = vdw.lift(qp)?;
        let j_psi = psi.jacobian(&xp)?;
        let target = psi.apply(&xp)?;
        let q = &target[..n];

        let mut jf_src = Vec::with_capacity(n);
        for f in vdw.state_functions() {
            jf_src.push(grad(f, qp)?);
        }
        let mut jf_dst = Vec::with_capacity(n);
        for f in ideal.state_functions() {
            jf_dst.push(grad(f, q)?);
        }

        let mut worst = 0.0f64;
        for i in 0..n {
            let mut basis = vec![0.0; 2 * n];
            basis[i] = 1.0;
            for j in 0..n {
                basis[n + j] = jf_src[j][i];
            }
            let v = j_psi.mul_vec(&basis);
            // Coefficients in the target basis are the base components.
            for (k, vk) in v[..n].iter().enumerate() {
                let expected = if k == i { 1.0 } else { 0.0 };
                worst = worst.max((vk - expected).abs());
            }
            // Tangency defect of the pushed vector.
            for j in 0..n {
                let predicted: f64 = (0..n).map(|k| jf_dst[j][k] * v[k]).sum();
                worst = worst.max((v[n + j] - predicted).abs());
            }
        }
        Ok(worst)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::check_symplectomorphism;

    fn ideal() -> ConstraintSystem {
        ConstraintSystem::ideal_gas(&IdealGasParams::new(1.0).unwrap())
    }

    #[test]
    fn reference_gas_closed_forms() {
        let sys = ideal();
        let u = sys.potential().unwrap();
        assert!((u.value(&[0.0, 1.0]).unwrap() - 1.5).abs() < 1e-15);
        let g = grad(u, &[0.0, 1.0]).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-14);
        assert!((g[1] + 1.0).abs() < 1e-14);
        let e2 = std::f64::consts::E.powi(2);
        assert!((u.value(&[3.0, 1.0]).unwrap() - 1.5 * e2).abs() < 1e-12);
    }

    #[test]
    fn reference_constraints_are_involutive_on_their_box() {
        let sys = ideal();
        let report = sys.involutivity_report(sys.default_box(), 3, 1e-12);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn non_exact_pair_fails_involutivity_with_unit_residual() {
        // f₁ = q¹q², f₂ = 0: {φ₁, φ₂} = ∂f₂/∂q¹ − ∂f₁/∂q² = −q¹.
        let f1 = ScalarField::new(2, |x| Ok(x[0] * x[1]));
        let f2 = ScalarField::constant(2, 0.0);
        let bx = DomainBox::new(vec![1.0, 1.0], vec![1.0 + 1e-12, 1.0 + 1e-12]).unwrap();
        let sys = ConstraintSystem::new("broken", vec![f1, f2], None, bx.clone()).unwrap();
        let report = sys.involutivity_report(&bx, 1, 1e-9);
        assert!(!report.pass);
        assert!((report.max_residual.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn asymmetric_state_functions_fail_maxwell_with_unit_residual() {
        let f1 = ScalarField::new(2, |x| Ok(x[1]));
        let f2 = ScalarField::new(2, |x| Ok(x[0] * 2.0));
        let bx = DomainBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let sys = ConstraintSystem::new("asym", vec![f1, f2], None, bx.clone()).unwrap();
        let report = sys.maxwell_isotropy_report(&bx, 2, 1e-9);
        assert!(!report.pass);
        assert_eq!(report.max_residual, Some(1.0));
    }

    #[test]
    fn single_pair_systems_are_trivially_isotropic() {
        let f1 = ScalarField::new(1, |x| Ok(x[0] * x[0]));
        let bx = DomainBox::new(vec![-1.0], vec![1.0]).unwrap();
        let sys = ConstraintSystem::new("one", vec![f1], None, bx.clone()).unwrap();
        let report = sys.maxwell_isotropy_report(&bx, 3, 1e-15);
        assert!(report.pass);
        assert_eq!(report.max_residual, Some(0.0));
    }

    #[test]
    fn energy_reconstruction_is_path_independent() {
        let sys = ideal();
        let q0 = vec![0.0, 1.0];
        let q1 = vec![0.0, 8.0];
        let straight = sys.reconstruct_energy(&[q0.clone(), q1.clone()]).unwrap();
        assert!((straight + 1.125).abs() < 1e-9, "straight: {straight}");
        let bent = sys
            .reconstruct_energy(&[q0.clone(), vec![2.0, 2.0], q1.clone()])
            .unwrap();
        assert!((bent + 1.125).abs() < 1e-9, "bent: {bent}");
        let loop_val = sys.reconstruct_energy(&[q0.clone(), q0.clone()]).unwrap();
        assert_eq!(loop_val, 0.0);
        let single = sys.reconstruct_energy(&[q0]).unwrap();
        assert_eq!(single, 0.0);
    }

    #[test]
    fn reconstructed_potential_gradient_returns_the_state_functions() {
        let sys = ideal();
        let q_ref = [0.0, 1.0];
        let u_ref = sys.potential().unwrap().value(&q_ref).unwrap();
        let rebuilt = sys.reconstructed_potential(&q_ref, u_ref).unwrap();
        let q = [0.4, 2.5];
        let direct = sys.potential().unwrap().value(&q).unwrap();
        assert!((rebuilt.value(&q).unwrap() - direct).abs() < 1e-9);
        let g = grad(&rebuilt, &q).unwrap();
        for i in 0..2 {
            let f = sys.state_function(i).value(&q).unwrap();
            assert!((g[i] - f).abs() < 1e-8, "component {i}: {} vs {f}", g[i]);
        }
    }

    #[test]
    fn legendre_exchange_realizes_the_transformed_potential() {
        let sys = ideal();
        let lt = LegendreTransform::new(sys.chart(), 0).unwrap();
        let vals = lt
            .transformed_potential(&sys, &[vec![0.0, 1.0], vec![3.0, 1.0]])
            .unwrap();
        assert!((vals[0] - 1.5).abs() < 1e-12);
        let e2 = std::f64::consts::E.powi(2);
        assert!((vals[1] + 1.5 * e2).abs() < 1e-11);

        let residual = lt
            .exchange_residual(&sys, &[0.0, 1.0], &[3.0, 2.0])
            .unwrap();
        assert!(residual < 1e-9, "residual {residual}");
    }

    #[test]
    fn legendre_exchange_map_is_symplectic() {
        let sys = ideal();
        let lt = LegendreTransform::new(sys.chart(), 1).unwrap();
        let pts = vec![vec![0.1, 1.0, 0.3, -0.2], vec![-0.5, 2.0, 1.0, 0.7]];
        let report = check_symplectomorphism(&lt.map(), &pts, 1e-12);
        assert!(report.pass);
        // (q², p₂) ↦ (−p₂, q²) with the rest fixed.
        let out = lt.map().apply(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(out, vec![1.0, -4.0, 3.0, 2.0]);
    }

    #[test]
    fn constant_potential_is_a_fixed_point_of_the_exchange() {
        let f1 = ScalarField::constant(1, 0.0);
        let u = ScalarField::constant(1, 7.0);
        let bx = DomainBox::new(vec![-1.0], vec![1.0]).unwrap();
        let sys = ConstraintSystem::new("flat", vec![f1], Some(u), bx).unwrap();
        let lt = LegendreTransform::new(sys.chart(), 0).unwrap();
        let vals = lt.transformed_potential(&sys, &[vec![0.3]]).unwrap();
        assert_eq!(vals, vec![7.0]);
    }

    #[test]
    fn shifted_volume_system_matches_hand_values() {
        let params = VdwParams::new(1.0, 1.0).unwrap();
        let sys = ConstraintSystem::paper_vdw(&params);
        let p2 = sys.state_function(1).value(&[0.0, 2.0]).unwrap();
        assert!((p2 + 0.75).abs() < 1e-15);
        let u = sys.potential().unwrap().value(&[0.0, 2.0]).unwrap();
        assert!((u - 1.5).abs() < 1e-15);
    }

    #[test]
    fn excluded_volume_vanishes_in_the_small_b_limit() {
        let tiny = VdwParams::new(1.0, 1e-9).unwrap();
        let sys = ConstraintSystem::paper_vdw(&tiny);
        let u = sys.potential().unwrap().value(&[0.0, 2.0]).unwrap();
        let u_ref = ideal().potential().unwrap().value(&[0.0, 2.0]).unwrap();
        assert!((u - u_ref).abs() < 1e-8);
    }

    #[test]
    fn shift_map_is_symplectic_with_the_expected_jacobian() {
        let params = VdwParams::new(1.0, 1.0).unwrap();
        let pb = map_ideal_to_vdw(&params);
        let j = pb.map.jacobian(&[0.0, 2.0, 0.3, 0.4]).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let expected = if r == c {
                    1.0
                } else if (r, c) == (3, 1) {
                    // ∂p₂/∂v = 2 v^{−3} at v = 2.
                    0.25
                } else {
                    0.0
                };
                assert!((j[(r, c)] - expected).abs() < 1e-14, "entry ({r},{c})");
            }
        }
        let pts = vec![vec![0.0, 2.0, 0.3, 0.4], vec![0.5, 1.7, -1.0, 2.0]];
        let report = check_symplectomorphism(&pb.map, &pts, 1e-11);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn pulled_back_constraints_equal_the_printed_closed_forms() {
        let params = VdwParams::new(1.0, 1.0).unwrap();
        let pb = map_ideal_to_vdw(&params);
        let reference = ideal();
        for qp in [[0.2, 1.8], [-0.7, 2.5], [0.0, 2.0]] {
            let xp = pb.system.lift(&qp).unwrap();
            for i in 0..2 {
                let composed = pullback_scalar(&pb.map, &reference.constraint(i));
                let printed = pb.system.constraint(i);
                let a = composed.value(&xp).unwrap();
                let b = printed.value(&xp).unwrap();
                assert!((a - b).abs() < 1e-13, "constraint {i} at {qp:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn tangent_map_is_the_identity_on_the_surface() {
        let params = VdwParams::new(1.0, 1.0).unwrap();
        let report = tangent_map_identity_check(&params, &[vec![0.0, 2.0]], 1e-12);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn tangent_map_check_reports_domain_error_at_the_singular_volume() {
        let params = VdwParams::new(1.0, 1.0).unwrap();
        let report = tangent_map_identity_check(&params, &[vec![0.0, 1.0]], 1e-9);
        assert!(!report.pass);
        assert!(report.error.is_some());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(IdealGasParams::new(0.0).is_err());
        assert!(IdealGasParams::new(-1.0).is_err());
        assert!(VdwParams::new(1.0, 0.0).is_err());
        assert!(VdwParams::new(f64::NAN, 1.0).is_err());
    }
}
