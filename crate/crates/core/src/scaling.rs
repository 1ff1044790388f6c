//! Symplectization of the contact chart and the machinery of scaling
//! symmetry: dilations, the conserved charge they generate, the extended
//! energy and its Euler identity, the process Hamiltonian whose flow moves
//! along equilibrium at fixed charge, and gauge fixing back down to the
//! contact description.
//!
//! The extended chart has n + 1 conjugate pairs ordered
//! (Q¹..Qⁿ, Z, P₁..Pₙ, μ): the scale coordinate Z sits in the last base
//! slot, its conjugate μ in the last momentum slot.

use crate::chart::CanonicalChart;
use crate::contact::ContactPoint;
use crate::error::{Error, Result};
use crate::field::{ScalarField, SmoothMap};
use crate::hyperdual::HyperDual;
use crate::integrate::rk4_flow;
use crate::matrix::SmallMatrix;
use crate::report::CheckReport;
use crate::symplectic::{SignConvention, VectorField, VectorFieldValue};
use crate::weights::ScalingWeights;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A point of the extended chart. `coords` are the scaled base coordinates
/// Qⁱ, `momenta` their conjugates Pᵢ; Z must stay positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedState {
    pub z: f64,
    pub mu: f64,
    pub coords: Vec<f64>,
    pub momenta: Vec<f64>,
}

impl ExtendedState {
    pub fn new(z: f64, mu: f64, coords: Vec<f64>, momenta: Vec<f64>) -> Result<Self> {
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::Invalid(format!(
                "scale coordinate must be positive, got {z}"
            )));
        }
        if coords.len() != momenta.len() || coords.is_empty() {
            return Err(Error::Invalid(format!(
                "coordinate/momentum lengths must match and be nonempty: {} vs {}",
                coords.len(),
                momenta.len()
            )));
        }
        Ok(ExtendedState {
            z,
            mu,
            coords,
            momenta,
        })
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// Chart-ordered coordinates (Q¹..Qⁿ, Z, P₁..Pₙ, μ).
    pub fn to_vec(&self) -> Vec<f64> {
        let mut x = self.coords.clone();
        x.push(self.z);
        x.extend_from_slice(&self.momenta);
        x.push(self.mu);
        x
    }

    pub fn from_vec(x: &[f64]) -> Result<Self> {
        if x.len() < 4 || x.len() % 2 != 0 {
            return Err(Error::Invalid(format!(
                "extended state needs even dimension ≥ 4, got {}",
                x.len()
            )));
        }
        let n = x.len() / 2 - 1;
        ExtendedState::new(
            x[n],
            x[2 * n + 1],
            x[..n].to_vec(),
            x[n + 1..2 * n + 1].to_vec(),
        )
    }
}

/// The canonical chart of the extended space for n base pairs.
pub fn extended_chart(n: usize) -> CanonicalChart {
    CanonicalChart::new(n + 1)
}

/// Embed a contact point at fiber time t:
/// Z = e^{ρt}, Qⁱ = e^{rᵢt} qⁱ, Pᵢ = e^{(r−rᵢ)t} pᵢ,
/// μ = ρ⁻¹ e^{(r−ρ)t} (r u − Σ rᵢ pᵢ qⁱ).
pub fn symplectize_point(
    point: &ContactPoint,
    t: f64,
    weights: &ScalingWeights,
) -> Result<ExtendedState> {
    let n = weights.n();
    if point.q.len() != n {
        return Err(Error::Arity {
            expected: n,
            got: point.q.len(),
        });
    }
    let r = weights.r();
    let rho = weights.rho();
    let z = (rho * t).exp();
    let coords: Vec<f64> = (0..n)
        .map(|i| (weights.coord(i) * t).exp() * point.q[i])
        .collect();
    let momenta: Vec<f64> = (0..n)
        .map(|i| ((r - weights.coord(i)) * t).exp() * point.p[i])
        .collect();
    let action: f64 = (0..n)
        .map(|i| weights.coord(i) * point.p[i] * point.q[i])
        .sum();
    let mu = ((r - rho) * t).exp() * (r * point.u - action) / rho;
    ExtendedState::new(z, mu, coords, momenta)
}

/// The symplectization as a map (t, u, q¹..qⁿ, p₁..pₙ) → (Q, Z, P, μ),
/// suitable for Jacobian checks.
pub fn symplectize_map(weights: &ScalingWeights) -> SmoothMap {
    let n = weights.n();
    let dim = 2 * n + 2;
    let r = weights.r();
    let rho = weights.rho();
    let mut components = Vec::with_capacity(dim);
    for i in 0..n {
        let ri = weights.coord(i);
        components.push(ScalarField::new(dim, move |x| {
            Ok((x[0] * ri).exp() * x[2 + i])
        }));
    }
    components.push(ScalarField::new(dim, move |x| Ok((x[0] * rho).exp())));
    for i in 0..n {
        let ri = weights.coord(i);
        components.push(ScalarField::new(dim, move |x| {
            Ok((x[0] * (r - ri)).exp() * x[2 + n + i])
        }));
    }
    let coords: Vec<f64> = weights.coords().to_vec();
    components.push(ScalarField::new(dim, move |x| {
        let mut action = HyperDual::ZERO;
        for (i, ri) in coords.iter().enumerate() {
            action = action + x[2 + n + i] * x[2 + i] * *ri;
        }
        Ok((x[0] * (r - rho)).exp() * (x[1] * r - action).scale(1.0 / rho))
    }));
    SmoothMap::new(components)
}

/// Residual of the symplectization against the scaled contact structure:
/// ‖Jᵀ Ω′ J − B(x)‖∞ where B is the coefficient matrix of d(e^{rt}α) in the
/// source coordinates (t, u, q, p). Samples are source points.
pub fn symplectization_pullback_report(
    weights: &ScalingWeights,
    samples: &[Vec<f64>],
    tolerance: f64,
) -> CheckReport {
    let n = weights.n();
    let map = symplectize_map(weights);
    let omega = SmallMatrix::canonical_symplectic(n + 1);
    let r = weights.r();
    CheckReport::over_samples("symplectomorphism", tolerance, samples, |x| {
        let j = map.jacobian(x)?;
        let pulled = j.transpose().matmul(&omega).matmul(&j);
        // d(e^{rt}α) = r e^{rt} dt∧du − r e^{rt} pᵢ dt∧dqⁱ + e^{rt} dqⁱ∧dpᵢ.
        let dim = 2 * n + 2;
        let mut b = SmallMatrix::zeros(dim, dim);
        let ert = (r * x[0]).exp();
        b[(0, 1)] = r * ert;
        b[(1, 0)] = -r * ert;
        for i in 0..n {
            b[(0, 2 + i)] = -r * ert * x[2 + n + i];
            b[(2 + i, 0)] = r * ert * x[2 + n + i];
            b[(2 + i, 2 + n + i)] = ert;
            b[(2 + n + i, 2 + i)] = -ert;
        }
        Ok(pulled.sub(&b).max_abs())
    })
}

/// The conserved charge G = ρμZ + Σ rᵢPᵢQⁱ of the scaling symmetry.
pub fn noether_charge(x: &ExtendedState, weights: &ScalingWeights) -> f64 {
    let mut g = weights.rho() * x.mu * x.z;
    for i in 0..x.n() {
        g += weights.coord(i) * x.momenta[i] * x.coords[i];
    }
    g
}

/// The charge as a field on the extended chart, with closed-form partials.
pub fn charge_field(weights: &ScalingWeights) -> ScalarField {
    let n = weights.n();
    let dim = 2 * n + 2;
    let rho = weights.rho();
    let coords: Vec<f64> = weights.coords().to_vec();
    let eval = {
        let coords = coords.clone();
        move |x: &[HyperDual]| {
            let mut g = x[n] * x[2 * n + 1] * rho;
            for (i, ri) in coords.iter().enumerate() {
                g = g + x[i] * x[n + 1 + i] * *ri;
            }
            Ok(g)
        }
    };
    let mut partials = Vec::with_capacity(dim);
    for (i, ri) in coords.iter().enumerate() {
        let ri = *ri;
        partials.push(ScalarField::new(dim, move |x| Ok(x[n + 1 + i].scale(ri))));
    }
    partials.push(ScalarField::new(dim, move |x| Ok(x[2 * n + 1].scale(rho))));
    for (i, ri) in coords.iter().enumerate() {
        let ri = *ri;
        partials.push(ScalarField::new(dim, move |x| Ok(x[i].scale(ri))));
    }
    partials.push(ScalarField::new(dim, move |x| Ok(x[n].scale(rho))));
    ScalarField::new(dim, eval).with_partials(partials)
}

/// The dilation generator X_r with components
/// (rᵢQⁱ, ρZ, (r−rᵢ)Pᵢ, (r−ρ)μ); conformal: ℒ_{X_r}ω′ = rω′.
pub fn dilation_field_components(weights: &ScalingWeights) -> VectorField {
    let n = weights.n();
    let dim = 2 * n + 2;
    let mut comps = Vec::with_capacity(dim);
    for i in 0..n {
        let ri = weights.coord(i);
        comps.push(ScalarField::new(dim, move |x| Ok(x[i].scale(ri))));
    }
    let rho = weights.rho();
    comps.push(ScalarField::new(dim, move |x| Ok(x[n].scale(rho))));
    let r = weights.r();
    for i in 0..n {
        let wi = r - weights.coord(i);
        comps.push(ScalarField::new(dim, move |x| Ok(x[n + 1 + i].scale(wi))));
    }
    let wmu = r - rho;
    comps.push(ScalarField::new(dim, move |x| {
        Ok(x[2 * n + 1].scale(wmu))
    }));
    VectorField::Components(comps)
}

/// X_r evaluated at a state.
pub fn dilation_field(x: &ExtendedState, weights: &ScalingWeights) -> VectorFieldValue {
    let base = x.to_vec();
    let components = dilation_field_components(weights)
        .value(&base)
        .expect("dilation components are polynomial");
    VectorFieldValue { base, components }
}

/// The Hamiltonian field of the charge under i_Xω = −dG:
/// X_G = (rᵢQⁱ, ρZ, −rᵢPᵢ, −ρμ). Its flow scales base and fiber slots in
/// opposite directions and preserves ω.
pub fn charge_hamiltonian_field(weights: &ScalingWeights) -> VectorField {
    let n = weights.n();
    let dim = 2 * n + 2;
    let mut comps = Vec::with_capacity(dim);
    for i in 0..n {
        let ri = weights.coord(i);
        comps.push(ScalarField::new(dim, move |x| Ok(x[i].scale(ri))));
    }
    let rho = weights.rho();
    comps.push(ScalarField::new(dim, move |x| Ok(x[n].scale(rho))));
    for i in 0..n {
        let ri = weights.coord(i);
        comps.push(ScalarField::new(dim, move |x| {
            Ok(x[n + 1 + i].scale(-ri))
        }));
    }
    comps.push(ScalarField::new(dim, move |x| {
        Ok(x[2 * n + 1].scale(-rho))
    }));
    VectorField::Components(comps)
}

/// Finite dilation: Qⁱ ↦ λ^{rᵢ}Qⁱ, Z ↦ λ^{ρ}Z, Pᵢ ↦ λ^{r−rᵢ}Pᵢ,
/// μ ↦ λ^{r−ρ}μ. Equals the time-ln λ flow of X_r.
pub fn apply_dilation(
    x: &ExtendedState,
    lambda: f64,
    weights: &ScalingWeights,
) -> Result<ExtendedState> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Invalid(format!(
            "dilation parameter must be positive, got {lambda}"
        )));
    }
    let r = weights.r();
    let coords = (0..x.n())
        .map(|i| lambda.powf(weights.coord(i)) * x.coords[i])
        .collect();
    let momenta = (0..x.n())
        .map(|i| lambda.powf(r - weights.coord(i)) * x.momenta[i])
        .collect();
    ExtendedState::new(
        lambda.powf(weights.rho()) * x.z,
        lambda.powf(r - weights.rho()) * x.mu,
        coords,
        momenta,
    )
}

/// Scale-invariant coordinates of the dilation orbit:
/// q̃ⁱ = Z^{−rᵢ/ρ} Qⁱ, p̃ᵢ = Z^{(rᵢ−r)/ρ} Pᵢ.
pub fn quotient_invariants(x: &ExtendedState, weights: &ScalingWeights) -> (Vec<f64>, Vec<f64>) {
    let rho = weights.rho();
    let r = weights.r();
    let q = (0..x.n())
        .map(|i| x.z.powf(-weights.coord(i) / rho) * x.coords[i])
        .collect();
    let p = (0..x.n())
        .map(|i| x.z.powf((weights.coord(i) - r) / rho) * x.momenta[i])
        .collect();
    (q, p)
}

/// The invariants as fields on the extended chart, for bracket checks.
/// Both are constant along dilation orbits; the coordinates additionally
/// commute with the charge, while {p̃ᵢ, G} = −r p̃ᵢ (the charge flow carries
/// degree −r on the invariant momenta).
pub fn invariant_fields(weights: &ScalingWeights) -> (Vec<ScalarField>, Vec<ScalarField>) {
    let n = weights.n();
    let dim = 2 * n + 2;
    let rho = weights.rho();
    let r = weights.r();
    let mut qs = Vec::with_capacity(n);
    let mut ps = Vec::with_capacity(n);
    for i in 0..n {
        let ei = -weights.coord(i) / rho;
        qs.push(ScalarField::new(dim, move |x| Ok(x[n].powf(ei)? * x[i])));
        let fi = (weights.coord(i) - r) / rho;
        ps.push(ScalarField::new(dim, move |x| {
            Ok(x[n].powf(fi)? * x[n + 1 + i])
        }));
    }
    (qs, ps)
}

/// The momenta that do Poisson-commute with the charge: Z^{rᵢ/ρ} Pᵢ,
/// i.e. Z^{r/ρ} times the dilation-invariant momenta.
pub fn charge_commuting_momentum_fields(weights: &ScalingWeights) -> Vec<ScalarField> {
    let n = weights.n();
    let dim = 2 * n + 2;
    let rho = weights.rho();
    (0..n)
        .map(|i| {
            let ei = weights.coord(i) / rho;
            ScalarField::new(dim, move |x| Ok(x[n].powf(ei)? * x[n + 1 + i]))
        })
        .collect()
}

/// The homogeneous extension U(Q, Z) = Z^{r/ρ} u(Qⁱ Z^{−rᵢ/ρ}) of a base
/// energy, together with its scaling weights. The base function must carry
/// closed-form partials: they feed ∂U/∂Z and the process Hamiltonian.
#[derive(Debug, Clone)]
pub struct ExtendedEnergy {
    base: ScalarField,
    weights: ScalingWeights,
}

impl ExtendedEnergy {
    pub fn new(base: ScalarField, weights: ScalingWeights) -> Result<Self> {
        if base.arity() != weights.n() {
            return Err(Error::Arity {
                expected: weights.n(),
                got: base.arity(),
            });
        }
        if !base.has_partials() {
            return Err(Error::MissingPartials {
                op: "extended energy base function",
            });
        }
        Ok(ExtendedEnergy { base, weights })
    }

    pub fn base(&self) -> &ScalarField {
        &self.base
    }

    pub fn weights(&self) -> &ScalingWeights {
        &self.weights
    }

    pub fn n(&self) -> usize {
        self.weights.n()
    }

    fn invariants_dual(&self, coords: &[HyperDual], z: HyperDual) -> Result<Vec<HyperDual>> {
        let rho = self.weights.rho();
        (0..self.n())
            .map(|i| Ok(z.powf(-self.weights.coord(i) / rho)? * coords[i]))
            .collect()
    }

    pub fn value_dual(&self, coords: &[HyperDual], z: HyperDual) -> Result<HyperDual> {
        let s = self.weights.r() / self.weights.rho();
        let tilde = self.invariants_dual(coords, z)?;
        Ok(z.powf(s)? * self.base.eval_dual(&tilde)?)
    }

    pub fn value(&self, coords: &[f64], z: f64) -> Result<f64> {
        let coords: Vec<HyperDual> = coords.iter().map(|&v| HyperDual::constant(v)).collect();
        Ok(self.value_dual(&coords, HyperDual::constant(z))?.val)
    }

    /// ∂U/∂Z = Z^{r/ρ−1} [ (r/ρ) u(q̃) − Σᵢ (rᵢ/ρ) q̃ⁱ uᵢ(q̃) ].
    pub fn z_partial_dual(&self, coords: &[HyperDual], z: HyperDual) -> Result<HyperDual> {
        let rho = self.weights.rho();
        let s = self.weights.r() / rho;
        let tilde = self.invariants_dual(coords, z)?;
        let mut bracket = self.base.eval_dual(&tilde)?.scale(s);
        for i in 0..self.n() {
            let ui = self.base.partial(i)?.eval_dual(&tilde)?;
            bracket = bracket - ui * tilde[i] * (self.weights.coord(i) / rho);
        }
        Ok(z.powf(s - 1.0)? * bracket)
    }

    /// ∂U/∂Qⁱ = Z^{(r−rᵢ)/ρ} uᵢ(q̃).
    pub fn q_partial_dual(
        &self,
        i: usize,
        coords: &[HyperDual],
        z: HyperDual,
    ) -> Result<HyperDual> {
        let rho = self.weights.rho();
        let e = (self.weights.r() - self.weights.coord(i)) / rho;
        let tilde = self.invariants_dual(coords, z)?;
        Ok(z.powf(e)? * self.base.partial(i)?.eval_dual(&tilde)?)
    }

    /// The state over (Q, Z) on the equilibrium graph: Pᵢ = ∂U/∂Qⁱ,
    /// μ = ∂U/∂Z.
    pub fn graph_state(&self, coords: &[f64], z: f64) -> Result<ExtendedState> {
        let cd: Vec<HyperDual> = coords.iter().map(|&v| HyperDual::constant(v)).collect();
        let zd = HyperDual::constant(z);
        let momenta = (0..self.n())
            .map(|i| Ok(self.q_partial_dual(i, &cd, zd)?.val))
            .collect::<Result<Vec<f64>>>()?;
        let mu = self.z_partial_dual(&cd, zd)?.val;
        ExtendedState::new(z, mu, coords.to_vec(), momenta)
    }

    /// |rU − ρμZ − Σ rᵢPᵢQⁱ|: the Euler identity, exact on the graph.
    pub fn euler_residual(&self, x: &ExtendedState) -> Result<f64> {
        let u = self.value(&x.coords, x.z)?;
        Ok((self.weights.r() * u - noether_charge(x, &self.weights)).abs())
    }

    /// |U(λ^{rᵢ}Q, λ^{ρ}Z) − λ^{r} U(Q, Z)|.
    pub fn homogeneity_residual(&self, x: &ExtendedState, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Invalid(format!(
                "homogeneity parameter must be positive, got {lambda}"
            )));
        }
        let scaled = apply_dilation(x, lambda, &self.weights)?;
        let lhs = self.value(&scaled.coords, scaled.z)?;
        let rhs = lambda.powf(self.weights.r()) * self.value(&x.coords, x.z)?;
        Ok((lhs - rhs).abs())
    }

    /// H = ρ Z^{1−r/ρ} ( μ·rU(Q,Z) − ∂U/∂Z·G ): vanishes on the graph,
    /// commutes with G, and is homogeneous of degree r.
    pub fn process_hamiltonian_field(&self) -> ScalarField {
        let n = self.n();
        let dim = 2 * n + 2;
        let energy = self.clone();
        let r = self.weights.r();
        let rho = self.weights.rho();
        let coords: Vec<f64> = self.weights.coords().to_vec();
        ScalarField::new(dim, move |x| {
            let q = &x[..n];
            let z = x[n];
            let mu = x[2 * n + 1];
            let mut g = mu * z * rho;
            for (i, ri) in coords.iter().enumerate() {
                g = g + x[n + 1 + i] * x[i] * *ri;
            }
            let u = energy.value_dual(q, z)?;
            let uz = energy.z_partial_dual(q, z)?;
            Ok(z.powf(1.0 - r / rho)? * (mu * u.scale(r) - uz * g) * rho)
        })
    }

    pub fn process_hamiltonian(&self, x: &ExtendedState) -> Result<f64> {
        let h = self.process_hamiltonian_field();
        h.value(&x.to_vec())
    }

    /// X_H under i_Xω = −dH, presented through the generator so that values
    /// come from the gradient and the Jacobian from the Hessian.
    pub fn process_field(&self) -> VectorField {
        VectorField::HamiltonianOf {
            generator: self.process_hamiltonian_field(),
            chart: extended_chart(self.n()),
            convention: SignConvention::IXOmegaEqualsMinusDf,
        }
    }
}

/// Which extended flow to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtendedGenerator {
    /// The charge flow X_G: scales (Q, Z) up and (P, μ) down.
    Charge,
    /// The process flow X_H: moves along equilibrium at constant G.
    Process,
}

/// One recorded step of an extended flow.
#[derive(Debug, Clone)]
pub struct ExtendedFlowRow {
    pub t: f64,
    pub state: ExtendedState,
    pub charge: f64,
    pub hamiltonian: f64,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct ExtendedFlow {
    rows: Vec<ExtendedFlowRow>,
}

impl ExtendedFlow {
    pub fn rows(&self) -> &[ExtendedFlowRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn final_row(&self) -> &ExtendedFlowRow {
        self.rows.last().expect("flow always records the start")
    }

    /// Max over the trajectory of |G(t) − G(0)|.
    pub fn charge_drift(&self) -> f64 {
        let g0 = self.rows[0].charge;
        self.rows
            .iter()
            .map(|row| (row.charge - g0).abs())
            .fold(0.0, f64::max)
    }
}

/// Integrate the named generator from x0, recording state, G, H and U at
/// every step.
pub fn hamiltonian_flow(
    energy: &ExtendedEnergy,
    x0: &ExtendedState,
    generator: ExtendedGenerator,
    t_end: f64,
    dt: f64,
) -> Result<ExtendedFlow> {
    if x0.n() != energy.n() {
        return Err(Error::Arity {
            expected: energy.n(),
            got: x0.n(),
        });
    }
    let field = match generator {
        ExtendedGenerator::Charge => charge_hamiltonian_field(energy.weights()),
        ExtendedGenerator::Process => energy.process_field(),
    };
    let raw = rk4_flow(|y| field.value(y), &x0.to_vec(), dt, t_end)?;
    let h_field = energy.process_hamiltonian_field();
    let mut rows = Vec::with_capacity(raw.len());
    for (t, y) in raw {
        let state = ExtendedState::from_vec(&y)?;
        let charge = noether_charge(&state, energy.weights());
        let hamiltonian = h_field.value(&y)?;
        let u = energy.value(&state.coords, state.z)?;
        rows.push(ExtendedFlowRow {
            t,
            state,
            charge,
            hamiltonian,
            energy: u,
        });
    }
    Ok(ExtendedFlow { rows })
}

/// The contact representative of a dilation orbit on the slice Z = Z₀,
/// with the factor by which i_{X_r}ω′ restricted to the slice rescales α.
#[derive(Debug, Clone)]
pub struct GaugeFixed {
    pub point: ContactPoint,
    pub factor: f64,
    pub lambda: f64,
}

/// Gauge fix to Z = Z₀: dilate by λ = (Z₀/Z)^{1/ρ}, read off the invariant
/// (q, p) and the fiber value u = Z^{−r/ρ} G / r, and report the pullback
/// factor r Z₀^{r/ρ}. Needs r ≠ 0 to solve G = rU for the fiber.
pub fn gauge_fix(x: &ExtendedState, z0: f64, weights: &ScalingWeights) -> Result<GaugeFixed> {
    if !(z0 > 0.0 && z0.is_finite()) {
        return Err(Error::Invalid(format!(
            "gauge slice must sit at positive Z, got {z0}"
        )));
    }
    let r = weights.r();
    if r == 0.0 {
        return Err(Error::Precondition(
            "gauge fixing needs a nonzero energy degree r".into(),
        ));
    }
    let lambda = (z0 / x.z).powf(1.0 / weights.rho());
    let (q, p) = quotient_invariants(x, weights);
    let u = x.z.powf(-r / weights.rho()) * noether_charge(x, weights) / r;
    Ok(GaugeFixed {
        point: ContactPoint { u, q, p },
        factor: r * z0.powf(r / weights.rho()),
        lambda,
    })
}

/// Embed a contact point into the slice Z = Z₀ of the extended chart.
pub fn section_embedding(
    point: &ContactPoint,
    z0: f64,
    weights: &ScalingWeights,
) -> Result<ExtendedState> {
    if !(z0 > 0.0 && z0.is_finite()) {
        return Err(Error::Invalid(format!(
            "section must sit at positive Z, got {z0}"
        )));
    }
    symplectize_point(point, z0.ln() / weights.rho(), weights)
}

/// Seeded random states for property suites: Z log-uniform in [0.5, 4],
/// everything else uniform in [−2, 2], with |Qⁱ| ≥ 0.1 and optionally
/// Qⁱ > 0 for base functions that need positive arguments.
pub fn random_extended_states(
    count: usize,
    n: usize,
    seed: u64,
    positive_coords: bool,
) -> Vec<ExtendedState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = Vec::with_capacity(count);
    for _ in 0..count {
        let z = rng.gen_range(0.5f64.ln()..=4.0f64.ln()).exp();
        let mut coords = Vec::with_capacity(n);
        for _ in 0..n {
            let mut v: f64 = rng.gen_range(-2.0..=2.0);
            while v.abs() < 0.1 {
                v = rng.gen_range(-2.0..=2.0);
            }
            coords.push(if positive_coords { v.abs() } else { v });
        }
        let momenta = (0..n).map(|_| rng.gen_range(-2.0..=2.0)).collect();
        let mu = rng.gen_range(-2.0..=2.0);
        states.push(
            ExtendedState::new(z, mu, coords, momenta).expect("sampled states are in range"),
        );
    }
    states
}

/// Random states on the equilibrium graph of an extended energy: (Q, Z)
/// sampled as in [`random_extended_states`], momenta and μ set from ∂U.
pub fn random_graph_states(
    energy: &ExtendedEnergy,
    count: usize,
    seed: u64,
    positive_coords: bool,
) -> Result<Vec<ExtendedState>> {
    random_extended_states(count, energy.n(), seed, positive_coords)
        .into_iter()
        .map(|x| energy.graph_state(&x.coords, x.z))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::grad;
    use crate::symplectic::{lie_bracket, lie_derivative_closed_two_form, poisson_bracket, TwoForm};

    /// u = q¹/q² with closed-form partials: degree zero under unit weights.
    fn demo_energy() -> ExtendedEnergy {
        let base = ScalarField::new(2, |x: &[HyperDual]| x[0].div(x[1])).with_partials(vec![
            ScalarField::new(2, |x| HyperDual::ONE.div(x[1])),
            ScalarField::new(2, |x| Ok(-(x[0].div(x[1] * x[1])?))),
        ]);
        ExtendedEnergy::new(base, ScalingWeights::extensive(2)).unwrap()
    }

    fn demo_state() -> ExtendedState {
        ExtendedState::new(2.0, 0.5, vec![2.0, 4.0], vec![0.5, -0.25]).unwrap()
    }

    /// Constant base energy with r = 1, ρ = 2: U = C√Z.
    fn sqrt_energy(c: f64) -> ExtendedEnergy {
        let weights = ScalingWeights::new(vec![1.0], 1.0, 2.0).unwrap();
        ExtendedEnergy::new(ScalarField::constant(1, c), weights).unwrap()
    }

    #[test]
    fn symplectization_of_a_constant_slice() {
        let weights = ScalingWeights::new(vec![1.0], 1.0, 2.0).unwrap();
        let point = ContactPoint {
            u: 1.0,
            q: vec![3.0],
            p: vec![0.0],
        };
        let t = std::f64::consts::LN_2;
        let x = symplectize_point(&point, t, &weights).unwrap();
        assert!((x.z - 4.0).abs() < 1e-14);
        assert!((x.mu - 0.25).abs() < 1e-15);
        assert!((x.coords[0] - 6.0).abs() < 1e-14);
        assert_eq!(x.momenta[0], 0.0);
    }

    #[test]
    fn symplectization_at_time_zero_is_the_section_at_one() {
        let weights = ScalingWeights::extensive(2);
        let point = ContactPoint {
            u: 0.5,
            q: vec![1.0, 2.0],
            p: vec![0.5, -0.25],
        };
        let x = symplectize_point(&point, 0.0, &weights).unwrap();
        assert_eq!(x.z, 1.0);
        assert_eq!(x.coords, point.q);
        assert_eq!(x.momenta, point.p);
        // μ = ρ⁻¹ (ru − Σ rᵢpᵢqⁱ) = 0.5 − 0.
        assert!((x.mu - 0.5).abs() < 1e-15);
    }

    #[test]
    fn demo_state_sits_on_the_graph_with_unit_charge() {
        let weights = ScalingWeights::extensive(2);
        let point = ContactPoint {
            u: 0.5,
            q: vec![1.0, 2.0],
            p: vec![0.5, -0.25],
        };
        let x = symplectize_point(&point, std::f64::consts::LN_2, &weights).unwrap();
        assert!((x.z - 2.0).abs() < 1e-15);
        assert_eq!(x.coords, vec![2.0, 4.0]);
        assert_eq!(x.momenta, vec![0.5, -0.25]);
        assert!((x.mu - 0.5).abs() < 1e-15);

        let g = noether_charge(&x, &weights);
        assert!((g - 1.0).abs() < 1e-15);

        let energy = demo_energy();
        assert!((energy.value(&x.coords, x.z).unwrap() - 1.0).abs() < 1e-15);
        assert!(energy.euler_residual(&x).unwrap() < 1e-15);
    }

    #[test]
    fn euler_residual_is_linear_in_the_fiber_momentum() {
        let energy = demo_energy();
        let mut x = demo_state();
        x.mu += 0.1;
        let res = energy.euler_residual(&x).unwrap();
        assert!((res - 0.2).abs() < 1e-14, "residual {res}");
    }

    #[test]
    fn extended_energy_is_homogeneous() {
        let energy = demo_energy();
        let x = demo_state();
        for lambda in [0.5, 1.0, 2.0, 3.0] {
            let res = energy.homogeneity_residual(&x, lambda).unwrap();
            assert!(res < 1e-13, "λ = {lambda}: {res}");
        }
        let sqrt = sqrt_energy(1.0);
        let s = ExtendedState::new(1.0, 0.5, vec![1.0], vec![0.0]).unwrap();
        assert!(sqrt.homogeneity_residual(&s, 4.0).unwrap() < 1e-13);
    }

    #[test]
    fn schwarzschild_style_energy_satisfies_euler() {
        let energy = sqrt_energy(1.0);
        let x = energy.graph_state(&[0.7], 4.0).unwrap();
        assert!((x.mu - 0.25).abs() < 1e-15);
        assert_eq!(x.momenta[0], 0.0);
        assert!((energy.value(&x.coords, x.z).unwrap() - 2.0).abs() < 1e-15);
        assert!(energy.euler_residual(&x).unwrap() < 1e-14);
        let g = noether_charge(&x, energy.weights());
        assert!((g - 2.0).abs() < 1e-14);
    }

    #[test]
    fn dilation_field_components_match_the_weights() {
        let weights = ScalingWeights::new(vec![1.0], 2.0, 1.0).unwrap();
        let x = ExtendedState::new(1.0, 1.0, vec![1.0], vec![1.0]).unwrap();
        let v = dilation_field(&x, &weights);
        assert_eq!(v.components, vec![1.0, 1.0, 1.0, 1.0]);

        // Transversality at the gauge slice: X_r(Z − Z₀) = ρZ₀.
        let weights = ScalingWeights::new(vec![1.0], 1.0, 2.0).unwrap();
        let on_slice = ExtendedState::new(4.0, 0.3, vec![1.0], vec![0.2]).unwrap();
        let v = dilation_field(&on_slice, &weights);
        assert!((v.components[1] - 8.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_degrees_freeze_momenta_under_dilation() {
        let weights = ScalingWeights::extensive(1);
        let x = ExtendedState::new(1.5, 0.7, vec![2.0], vec![3.0]).unwrap();
        let v = dilation_field(&x, &weights);
        assert_eq!(v.components[2], 0.0);
        assert_eq!(v.components[3], 0.0);
        let scaled = apply_dilation(&x, 2.0, &weights).unwrap();
        assert_eq!(scaled.coords, vec![4.0]);
        assert_eq!(scaled.z, 3.0);
        assert_eq!(scaled.momenta, vec![3.0]);
        assert_eq!(scaled.mu, 0.7);
    }

    #[test]
    fn conformal_and_invariance_properties_of_the_forms() {
        let weights = ScalingWeights::new(vec![1.0], 2.0, 1.0).unwrap();
        let omega = TwoForm::Constant(SmallMatrix::canonical_symplectic(2));
        let x = vec![0.4, 1.3, -0.8, 0.6];

        let xr = dilation_field_components(&weights);
        let ld = lie_derivative_closed_two_form(&xr, &omega, &x).unwrap();
        let expected = SmallMatrix::canonical_symplectic(2).scale(2.0);
        assert!(ld.sub(&expected).max_abs() < 1e-13);

        let xg = charge_hamiltonian_field(&weights);
        let ld = lie_derivative_closed_two_form(&xg, &omega, &x).unwrap();
        assert!(ld.max_abs() < 1e-13);
    }

    #[test]
    fn charge_action_on_the_invariants() {
        let weights = ScalingWeights::new(vec![1.0, 2.0], 3.0, 2.0).unwrap();
        let chart = extended_chart(2);
        let g = charge_field(&weights);
        let (qs, ps) = invariant_fields(&weights);
        let x = ExtendedState::new(1.7, -0.4, vec![0.9, -1.1], vec![0.3, 2.0])
            .unwrap()
            .to_vec();
        for f in &qs {
            let pb = poisson_bracket(f, &g, chart, &x).unwrap();
            assert!(pb.abs() < 1e-13, "bracket {pb}");
        }
        // The invariant momenta carry charge degree −r: {p̃, G} = −r p̃.
        for f in &ps {
            let pb = poisson_bracket(f, &g, chart, &x).unwrap();
            let expected = -weights.r() * f.value(&x).unwrap();
            assert!((pb - expected).abs() < 1e-13, "bracket {pb} vs {expected}");
        }
        for f in charge_commuting_momentum_fields(&weights) {
            let pb = poisson_bracket(&f, &g, chart, &x).unwrap();
            assert!(pb.abs() < 1e-13, "bracket {pb}");
        }
    }

    #[test]
    fn quotient_collapses_dilation_orbits() {
        let weights = ScalingWeights::extensive(2);
        let x = demo_state();
        let (q, p) = quotient_invariants(&x, &weights);
        assert_eq!(q, vec![1.0, 2.0]);
        assert_eq!(p, vec![0.5, -0.25]);
        let scaled = apply_dilation(&x, 5.0, &weights).unwrap();
        let (q2, p2) = quotient_invariants(&scaled, &weights);
        for i in 0..2 {
            assert!((q[i] - q2[i]).abs() < 1e-12);
            assert!((p[i] - p2[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn process_hamiltonian_vanishes_on_the_graph_and_detects_departure() {
        let energy = demo_energy();
        let on = demo_state();
        assert!(energy.process_hamiltonian(&on).unwrap().abs() < 1e-14);

        // Fiber-momentum perturbations stay on the zero set of H.
        let mut mu_off = on.clone();
        mu_off.mu = 0.6;
        assert!(energy.process_hamiltonian(&mu_off).unwrap().abs() < 1e-14);

        let mut p_off = on.clone();
        p_off.momenta[0] = 1.0;
        let h = energy.process_hamiltonian(&p_off).unwrap();
        assert!((h + 0.5).abs() < 1e-14, "H = {h}");
    }

    #[test]
    fn process_flow_conserves_the_charge() {
        let energy = demo_energy();
        let x0 = demo_state();
        let flow =
            hamiltonian_flow(&energy, &x0, ExtendedGenerator::Process, 0.25, 1e-3).unwrap();
        assert!(flow.charge_drift() < 1e-10, "drift {}", flow.charge_drift());
        for row in flow.rows() {
            assert!(row.hamiltonian.abs() < 1e-10);
        }
    }

    #[test]
    fn charge_flow_scales_the_two_halves_oppositely() {
        let weights = ScalingWeights::extensive(1);
        let energy = ExtendedEnergy::new(
            ScalarField::new(1, |x: &[HyperDual]| Ok(x[0]))
                .with_partials(vec![ScalarField::constant(1, 1.0)]),
            weights,
        )
        .unwrap();
        let x0 = ExtendedState::new(1.0, 1.0, vec![1.0], vec![1.0]).unwrap();
        let flow = hamiltonian_flow(
            &energy,
            &x0,
            ExtendedGenerator::Charge,
            std::f64::consts::LN_2,
            1e-3,
        )
        .unwrap();
        let last = &flow.final_row().state;
        assert!((last.coords[0] - 2.0).abs() < 1e-8);
        assert!((last.z - 2.0).abs() < 1e-8);
        assert!((last.momenta[0] - 0.5).abs() < 1e-8);
        assert!((last.mu - 0.5).abs() < 1e-8);
        assert!(flow.charge_drift() < 1e-10);
    }

    #[test]
    fn zero_horizon_flow_returns_the_start() {
        let energy = demo_energy();
        let x0 = demo_state();
        let flow = hamiltonian_flow(&energy, &x0, ExtendedGenerator::Charge, 0.0, 1e-3).unwrap();
        assert_eq!(flow.len(), 1);
        assert_eq!(flow.rows()[0].state, x0);
    }

    #[test]
    fn gauge_fixing_is_orbit_independent_with_the_printed_factor() {
        let weights = ScalingWeights::new(vec![1.0], 1.0, 2.0).unwrap();
        let x = ExtendedState::new(1.0, 0.5, vec![1.0], vec![0.0]).unwrap();
        let fixed = gauge_fix(&x, 4.0, &weights).unwrap();
        assert!((fixed.factor - 2.0).abs() < 1e-15);

        let moved = apply_dilation(&x, 3.0, &weights).unwrap();
        let fixed2 = gauge_fix(&moved, 4.0, &weights).unwrap();
        assert!((fixed.point.u - fixed2.point.u).abs() < 1e-12);
        for i in 0..1 {
            assert!((fixed.point.q[i] - fixed2.point.q[i]).abs() < 1e-12);
            assert!((fixed.point.p[i] - fixed2.point.p[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn gauge_fix_recovers_the_invariant_energy_on_the_graph() {
        let energy = demo_energy();
        let x = demo_state();
        let fixed = gauge_fix(&x, 2.0, &energy.weights().clone()).unwrap();
        // On the graph G = rU, so the fiber is the invariant energy u(q̃).
        assert!((fixed.point.u - 0.5).abs() < 1e-14);
        assert_eq!(fixed.point.q, vec![1.0, 2.0]);

        let embedded = section_embedding(&fixed.point, 2.0, energy.weights()).unwrap();
        assert!((embedded.z - 2.0).abs() < 1e-14);
        let (q, p) = quotient_invariants(&embedded, energy.weights());
        for i in 0..2 {
            assert!((q[i] - fixed.point.q[i]).abs() < 1e-13);
            assert!((p[i] - fixed.point.p[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn symplectization_respects_the_scaled_contact_structure() {
        let weights = ScalingWeights::new(vec![1.0, 2.0], 3.0, 2.0).unwrap();
        let samples = vec![
            vec![0.0, 0.5, 1.0, 2.0, 0.3, -0.4],
            vec![0.2, -1.0, 0.7, 1.1, 0.0, 0.9],
            vec![-0.3, 2.0, -1.5, 0.4, 1.2, 0.1],
        ];
        let report = symplectization_pullback_report(&weights, &samples, 1e-9);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn process_field_commutes_with_the_dilation_generator() {
        let energy = demo_energy();
        let weights = energy.weights().clone();
        let xr = dilation_field_components(&weights);
        let xh = energy.process_field();
        for x in random_extended_states(10, 2, 7, false) {
            let v = x.to_vec();
            let br = lie_bracket(&xr, &xh, &v).unwrap();
            for c in &br {
                assert!(c.abs() < 1e-9, "bracket component {c} at {v:?}");
            }
            // Homogeneity: X_r(H) = rH.
            let h = energy.process_hamiltonian_field();
            let dh = grad(&h, &v).unwrap();
            let xr_v = xr.value(&v).unwrap();
            let along: f64 = dh.iter().zip(&xr_v).map(|(a, b)| a * b).sum();
            let hv = h.value(&v).unwrap();
            assert!(
                (along - weights.r() * hv).abs() < 1e-9,
                "X_r(H) = {along}, rH = {}",
                weights.r() * hv
            );
        }
    }

    #[test]
    fn random_states_respect_the_documented_ranges() {
        let states = random_extended_states(50, 2, 42, true);
        assert_eq!(states.len(), 50);
        for x in &states {
            assert!(x.z >= 0.5 && x.z <= 4.0);
            for q in &x.coords {
                assert!(*q >= 0.1 && *q <= 2.0);
            }
            for p in &x.momenta {
                assert!(p.abs() <= 2.0);
            }
        }
        // Same seed, same states.
        let again = random_extended_states(50, 2, 42, true);
        assert_eq!(states, again);
    }

    #[test]
    fn graph_states_satisfy_euler_to_machine_precision() {
        let energy = demo_energy();
        for x in random_graph_states(&energy, 25, 42, true).unwrap() {
            assert!(energy.euler_residual(&x).unwrap() < 1e-13);
            assert!(energy.process_hamiltonian(&x).unwrap().abs() < 1e-12);
        }
    }
}
