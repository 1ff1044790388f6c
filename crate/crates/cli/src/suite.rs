//! The check suite: each config kind has a fixed list of named structural
//! checks, each producing a CheckReport. The suite is deterministic for a
//! given seed and grid, so serialized reports are byte-identical across runs.

use crate::config::{LoadedConfig, SystemModel};
use darboux::contact::LegendreSubmanifold;
use darboux::eos::{map_ideal_to_vdw, pullback_scalar, tangent_map_identity_check};
use darboux::field::directional;
use darboux::scaling::{
    self, charge_commuting_momentum_fields, charge_field, charge_hamiltonian_field,
    dilation_field_components, extended_chart, gauge_fix, invariant_fields,
    random_extended_states, random_graph_states, symplectize_map, ExtendedGenerator,
};
use darboux::symplectic::{
    check_symplectomorphism, lie_bracket, lie_derivative_closed_two_form, poisson_bracket,
    TwoForm,
};
use darboux::{
    grad, BlackHoleModel, CheckReport, ConstraintSystem, DomainBox, ExtendedEnergy,
    IdealGasParams, ScalarField, ScalingWeights, SmallMatrix, SmoothMap, VdwParams,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Knobs shared by every suite run. `tolerance` overrides the per-check
/// geometric tolerances; drift and convergence-order checks keep their
/// built-in bounds regardless.
#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub tolerance: Option<f64>,
    pub seed: u64,
    pub grid: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            tolerance: None,
            seed: 42,
            grid: 5,
        }
    }
}

// Built-in bounds that a tolerance override does not touch.
const ENERGY_DRIFT_TOL: f64 = 1e-8;
const CHARGE_DRIFT_TOL: f64 = 1e-8;
const LEGENDRE_DRIFT_TOL: f64 = 1e-6;
const GRADIENT_TOL: f64 = 1e-7;
const ORDER_TOL: f64 = 1.0;
const RANDOM_STATES: usize = 100;

#[derive(Debug, Clone, Copy)]
struct Tols {
    /// Grid-sampled geometric identities.
    base: f64,
    /// Identities that hold on sampled graph states.
    graph: f64,
    /// Pointwise structural identities (forms, brackets, gauge).
    strict: f64,
}

impl Tols {
    fn resolve(cfg: &LoadedConfig, opts: &SuiteOptions) -> Tols {
        match opts.tolerance.or(cfg.tolerance) {
            Some(t) => Tols {
                base: t,
                graph: t,
                strict: t,
            },
            None => Tols {
                base: 1e-9,
                graph: 1e-10,
                strict: 1e-12,
            },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub version: String,
    pub system: String,
    pub checks: Vec<CheckReport>,
    pub pass: bool,
}

impl Report {
    fn new(system: &str, checks: Vec<CheckReport>) -> Report {
        let pass = checks.iter().all(|c| c.pass);
        Report {
            version: env!("CARGO_PKG_VERSION").to_string(),
            system: system.to_string(),
            checks,
            pass,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn run_check_suite(cfg: &LoadedConfig, opts: &SuiteOptions) -> Report {
    let tols = Tols::resolve(cfg, opts);
    let checks = match &cfg.model {
        SystemModel::Constraint { system, vdw } => {
            constraint_checks(system, vdw.as_ref(), tols, opts.grid)
        }
        SystemModel::Generating {
            u,
            weights,
            region,
            positive,
        } => generating_checks(cfg, u, weights, region, *positive, tols, opts),
        SystemModel::BlackHole { model } => blackhole_checks(cfg, model, tols, opts.seed),
    };
    Report::new(&cfg.name, checks)
}

/// Human one-liner for a check, for the stderr side of `check`.
pub fn describe(check: &CheckReport) -> String {
    let verdict = if check.pass { "pass" } else { "FAIL" };
    match (&check.max_residual, &check.error) {
        (Some(r), _) => format!(
            "[{verdict}] {:<24} max residual {:.3e} (tolerance {:.1e}, {} samples)",
            check.name, r, check.tolerance, check.samples
        ),
        (None, Some(e)) => format!("[{verdict}] {:<24} {e}", check.name),
        (None, None) => format!("[{verdict}] {:<24}", check.name),
    }
}

fn unit_box(n: usize) -> DomainBox {
    DomainBox::new(vec![-1.0; n], vec![1.0; n]).expect("static box")
}

// ---------------------------------------------------------------- constraint

fn constraint_checks(
    system: &ConstraintSystem,
    vdw: Option<&VdwParams>,
    tols: Tols,
    grid_n: usize,
) -> Vec<CheckReport> {
    let n = system.n();
    let chart = system.chart();
    let qbox = system.default_box().clone();
    let phase_box = qbox.product(&unit_box(n));
    let phase_grid = phase_box.grid(grid_n);
    let mut checks = Vec::new();

    let constraints: Vec<ScalarField> = (0..n).map(|i| system.constraint(i)).collect();
    checks.push(CheckReport::over_samples(
        "involutivity",
        tols.base,
        &phase_grid,
        |x| {
            let mut worst = 0.0f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    let pb = poisson_bracket(&constraints[i], &constraints[j], chart, x)?;
                    worst = worst.max(pb.abs());
                }
            }
            Ok(worst)
        },
    ));

    checks.push(system.maxwell_isotropy_report(&qbox, grid_n, tols.base));

    checks.push(path_independence(system, &qbox, tols.base));
    checks.push(gradient_consistency(system, &qbox));

    if let Some(params) = vdw {
        let pull = map_ideal_to_vdw(params);
        checks.push(check_symplectomorphism(&pull.map, &phase_grid, tols.base));
        checks.push(tangent_map_identity_check(
            params,
            &qbox.grid(grid_n),
            tols.base,
        ));
        checks.push(pullback_involutivity(params, chart, &phase_grid, tols.base));
    }

    checks
}

/// Reconstructed energy differences agree between a straight segment and a
/// bent two-segment path with the same endpoints.
fn path_independence(system: &ConstraintSystem, qbox: &DomainBox, tol: f64) -> CheckReport {
    let lo = qbox.lo().to_vec();
    let hi = qbox.hi().to_vec();
    let mut corner = lo.clone();
    corner[0] = hi[0];
    let straight = system.reconstruct_energy(&[lo.clone(), hi.clone()]);
    let bent = system.reconstruct_energy(&[lo.clone(), corner, hi]);
    match (straight, bent) {
        (Ok(s), Ok(b)) => {
            CheckReport::from_residuals("path-independence", tol, [((s - b).abs(), lo)])
        }
        (Err(e), _) | (_, Err(e)) => CheckReport::failure("path-independence", tol, 0, e),
    }
}

/// The gradient of the line-integral reconstruction returns the declared
/// state functions. Bounded by quadrature accuracy, not the base tolerance.
fn gradient_consistency(system: &ConstraintSystem, qbox: &DomainBox) -> CheckReport {
    let name = "gradient-consistency";
    let q_ref = qbox.midpoint();
    let u_ref = match system.potential() {
        Some(u) => match u.value(&q_ref) {
            Ok(v) => v,
            Err(e) => return CheckReport::failure(name, GRADIENT_TOL, 0, e),
        },
        None => 0.0,
    };
    let rebuilt = match system.reconstructed_potential(&q_ref, u_ref) {
        Ok(f) => f,
        Err(e) => return CheckReport::failure(name, GRADIENT_TOL, 0, e),
    };
    let pts = qbox.interior_grid(3);
    CheckReport::over_samples(name, GRADIENT_TOL, &pts, |q| {
        let g = grad(&rebuilt, q)?;
        let mut worst = 0.0f64;
        for i in 0..system.n() {
            let fi = system.state_function(i).value(q)?;
            worst = worst.max((g[i] - fi).abs());
        }
        Ok(worst)
    })
}

/// Constraints of the non-interacting system, pulled back through the
/// coordinate shift, stay in involution on the target chart.
fn pullback_involutivity(
    params: &VdwParams,
    chart: darboux::CanonicalChart,
    phase_grid: &[Vec<f64>],
    tol: f64,
) -> CheckReport {
    let name = "pullback-involutivity";
    let ideal = match IdealGasParams::new(params.a()) {
        Ok(p) => ConstraintSystem::ideal_gas(&p),
        Err(e) => return CheckReport::failure(name, tol, 0, e),
    };
    let pull = map_ideal_to_vdw(params);
    let n = ideal.n();
    let pulled: Vec<ScalarField> = (0..n)
        .map(|i| pullback_scalar(&pull.map, &ideal.constraint(i)))
        .collect();
    CheckReport::over_samples(name, tol, phase_grid, |x| {
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let pb = poisson_bracket(&pulled[i], &pulled[j], chart, x)?;
                worst = worst.max(pb.abs());
            }
        }
        Ok(worst)
    })
}

// ---------------------------------------------------------------- generating

#[allow(clippy::too_many_arguments)]
fn generating_checks(
    cfg: &LoadedConfig,
    u: &ScalarField,
    weights: &ScalingWeights,
    region: &DomainBox,
    positive: bool,
    tols: Tols,
    opts: &SuiteOptions,
) -> Vec<CheckReport> {
    let n = weights.n();
    let seed = opts.seed;
    let grid_n = opts.grid;
    let sub = LegendreSubmanifold::from_generating(u.clone());
    let mut checks = Vec::new();

    // Degree-zero precondition for the restricted flow, reported over the box.
    checks.push(CheckReport::over_samples(
        "scale-invariance",
        tols.base,
        &region.grid(grid_n),
        |q| {
            let g = grad(u, q)?;
            let mut acc = 0.0;
            for i in 0..n {
                acc += weights.coord(i) * q[i] * g[i];
            }
            Ok(acc.abs())
        },
    ));

    // Contact structure of the fibered chart: points in (q, p, u) order.
    let contact_box = region.product(&unit_box(n)).product(&unit_box(1));
    checks.push(
        sub.chart()
            .contactization_report(&contact_box.grid(3), tols.strict),
    );
    checks.push(sub.legendre_report(region, grid_n, tols.strict));
    checks.push(sub.projection_report(region, grid_n, tols.strict));

    // Fiber embedding as a symplectomorphism onto its image; inputs ordered
    // (t, u, q, p).
    let fiber_box = DomainBox::new(vec![-0.3], vec![0.3])
        .expect("static box")
        .product(&unit_box(1))
        .product(region)
        .product(&unit_box(n));
    checks.push(scaling::symplectization_pullback_report(
        weights,
        &fiber_box.grid(3),
        tols.base,
    ));

    let energy = match ExtendedEnergy::new(u.clone(), weights.clone()) {
        Ok(e) => e,
        Err(e) => {
            checks.push(CheckReport::failure("euler-on-graph", tols.graph, 0, e));
            return checks;
        }
    };

    checks.push(graph_residual_check(
        "euler-on-graph",
        tols.graph,
        &energy,
        seed + 1,
        positive,
        |energy, x| energy.euler_residual(x),
    ));

    checks.push(graph_residual_check(
        "extended-homogeneity",
        tols.graph,
        &energy,
        seed + 2,
        positive,
        |energy, x| {
            let mut worst = 0.0f64;
            for lambda in [0.5, 2.0, 3.0] {
                worst = worst.max(energy.homogeneity_residual(x, lambda)?);
            }
            Ok(worst)
        },
    ));

    checks.push(charge_commutation(weights, seed + 3, positive, tols.strict));
    checks.push(conformal_scaling(weights, seed + 4, positive, tols.strict));
    checks.push(charge_invariance(weights, seed + 5, positive, tols.strict));

    checks.push(graph_residual_check(
        "hamiltonian-on-graph",
        tols.graph,
        &energy,
        seed + 6,
        positive,
        |energy, x| Ok(energy.process_hamiltonian(x)?.abs()),
    ));

    checks.push(hamiltonian_homogeneity(&energy, seed + 7, positive, tols.base));
    checks.push(dilation_commutator(&energy, seed + 8, positive, tols.base));

    let q0 = cfg
        .flow
        .as_ref()
        .map(|f| f.q0.clone())
        .unwrap_or_else(|| region.midpoint());
    let c = cfg.flow.as_ref().and_then(|f| f.c).unwrap_or(1.0);

    checks.push(charge_conservation(&energy, &q0));
    // A degree-zero potential has no gauge section (the orbit factor r Z0^{r/rho}
    // vanishes), so the representative comparison only applies when r != 0.
    if weights.r() != 0.0 {
        checks.push(gauge_consistency(weights, seed + 9, positive, tols.strict));
    }
    checks.push(gauge_pullback(weights, region, seed + 10, tols.strict));

    let (energy_check, legendre_check) = restricted_flow_drift(&sub, weights, &q0, c);
    checks.push(energy_check);
    checks.push(legendre_check);
    checks.push(flow_order(&sub, weights, &q0));

    checks
}

fn graph_residual_check(
    name: &str,
    tol: f64,
    energy: &ExtendedEnergy,
    seed: u64,
    positive: bool,
    mut residual: impl FnMut(&ExtendedEnergy, &scaling::ExtendedState) -> darboux::Result<f64>,
) -> CheckReport {
    let states = match random_graph_states(energy, RANDOM_STATES, seed, positive) {
        Ok(s) => s,
        Err(e) => return CheckReport::failure(name, tol, 0, e),
    };
    let samples: Vec<Vec<f64>> = states.iter().map(|x| x.to_vec()).collect();
    let mut it = states.iter();
    CheckReport::over_samples(name, tol, &samples, |_| {
        let x = it.next().expect("one state per sample");
        residual(energy, x)
    })
}

/// The quotient coordinates commute with the charge; the quotient momenta
/// satisfy {p̃ᵢ, G} + r p̃ᵢ = 0; rescaling them by Z^{rᵢ/ρ} gives momenta
/// that commute outright.
fn charge_commutation(
    weights: &ScalingWeights,
    seed: u64,
    positive: bool,
    tol: f64,
) -> CheckReport {
    let n = weights.n();
    let chart = extended_chart(n);
    let g = charge_field(weights);
    let (qs, ps) = invariant_fields(weights);
    let ms = charge_commuting_momentum_fields(weights);
    let r = weights.r();
    let states = random_extended_states(RANDOM_STATES, n, seed, positive);
    let samples: Vec<Vec<f64>> = states.iter().map(|x| x.to_vec()).collect();
    CheckReport::over_samples("charge-commutation", tol, &samples, |x| {
        let mut worst = 0.0f64;
        for i in 0..n {
            worst = worst.max(poisson_bracket(&qs[i], &g, chart, x)?.abs());
            let pb = poisson_bracket(&ps[i], &g, chart, x)?;
            worst = worst.max((pb + r * ps[i].value(x)?).abs());
            worst = worst.max(poisson_bracket(&ms[i], &g, chart, x)?.abs());
        }
        Ok(worst)
    })
}

/// ℒ along the dilation field rescales the two-form by the total degree.
fn conformal_scaling(
    weights: &ScalingWeights,
    seed: u64,
    positive: bool,
    tol: f64,
) -> CheckReport {
    let n = weights.n();
    let xr = dilation_field_components(weights);
    let omega = TwoForm::Constant(SmallMatrix::canonical_symplectic(n + 1));
    let scaled = SmallMatrix::canonical_symplectic(n + 1).scale(weights.r());
    let states = random_extended_states(RANDOM_STATES, n, seed, positive);
    let samples: Vec<Vec<f64>> = states.iter().map(|x| x.to_vec()).collect();
    CheckReport::over_samples("conformal-scaling", tol, &samples, |x| {
        let ld = lie_derivative_closed_two_form(&xr, &omega, x)?;
        Ok(ld.sub(&scaled).max_abs())
    })
}

/// The charge flow preserves the two-form exactly.
fn charge_invariance(
    weights: &ScalingWeights,
    seed: u64,
    positive: bool,
    tol: f64,
) -> CheckReport {
    let n = weights.n();
    let xg = charge_hamiltonian_field(weights);
    let omega = TwoForm::Constant(SmallMatrix::canonical_symplectic(n + 1));
    let states = random_extended_states(RANDOM_STATES, n, seed, positive);
    let samples: Vec<Vec<f64>> = states.iter().map(|x| x.to_vec()).collect();
    CheckReport::over_samples("charge-invariance", tol, &samples, |x| {
        Ok(lie_derivative_closed_two_form(&xg, &omega, x)?.max_abs())
    })
}

/// The process generator is homogeneous of the total degree: X_r(H) = r H.
fn hamiltonian_homogeneity(
    energy: &ExtendedEnergy,
    seed: u64,
    positive: bool,
    tol: f64,
) -> CheckReport {
    let n = energy.n();
    let h = energy.process_hamiltonian_field();
    let weights = energy.weights().clone();
    let xr = dilation_field_components(&weights);
    let r = weights.r();
    let states = random_extended_states(RANDOM_STATES, n, seed, positive);
    let samples: Vec<Vec<f64>> = states.iter().map(|x| x.to_vec()).collect();
    CheckReport::over_samples("hamiltonian-homogeneity", tol, &samples, |x| {
        let v = xr.value(x)?;
        let xrh = directional(&h, x, &v)?;
        Ok((xrh - r * h.value(x)?).abs())
    })
}

/// [X_r, X_H] vanishes off the graph as well as on it.
fn dilation_commutator(
    energy: &ExtendedEnergy,
    seed: u64,
    positive: bool,
    tol: f64,
) -> CheckReport {
    let n = energy.n();
    let weights = energy.weights().clone();
    let xr = dilation_field_components(&weights);
    let xh = energy.process_field();
    let states = random_extended_states(RANDOM_STATES, n, seed, positive);
    let samples: Vec<Vec<f64>> = states.iter().map(|x| x.to_vec()).collect();
    CheckReport::over_samples("dilation-commutator", tol, &samples, |x| {
        let br = lie_bracket(&xr, &xh, x)?;
        Ok(br.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    })
}

/// The charge is constant along the process flow started on the graph.
fn charge_conservation(energy: &ExtendedEnergy, q0: &[f64]) -> CheckReport {
    let name = "charge-conservation";
    let start = match energy.graph_state(q0, 1.0) {
        Ok(x) => x,
        Err(e) => return CheckReport::failure(name, CHARGE_DRIFT_TOL, 0, e),
    };
    match scaling::hamiltonian_flow(energy, &start, ExtendedGenerator::Process, 1.0, 1e-3) {
        Ok(flow) => CheckReport::from_residuals(
            name,
            CHARGE_DRIFT_TOL,
            [(flow.charge_drift(), start.to_vec())],
        ),
        Err(e) => CheckReport::failure(name, CHARGE_DRIFT_TOL, 0, e),
    }
}

/// Representatives of one dilation orbit land on the same gauge-fixed point.
fn gauge_consistency(
    weights: &ScalingWeights,
    seed: u64,
    positive: bool,
    tol: f64,
) -> CheckReport {
    let name = "gauge-consistency";
    let n = weights.n();
    let z0 = 2.0;
    let states = random_extended_states(RANDOM_STATES, n, seed, positive);
    let samples: Vec<Vec<f64>> = states.iter().map(|x| x.to_vec()).collect();
    let mut it = states.iter();
    CheckReport::over_samples(name, tol, &samples, |_| {
        let x = it.next().expect("one state per sample");
        let fixed = gauge_fix(x, z0, weights)?;
        let mut worst = 0.0f64;
        for lambda in [0.5, 2.0] {
            let moved = scaling::apply_dilation(x, lambda, weights)?;
            let refixed = gauge_fix(&moved, z0, weights)?;
            worst = worst.max((fixed.point.u - refixed.point.u).abs());
            for i in 0..n {
                worst = worst.max((fixed.point.q[i] - refixed.point.q[i]).abs());
                worst = worst.max((fixed.point.p[i] - refixed.point.p[i]).abs());
            }
        }
        Ok(worst)
    })
}

/// Pull the tautological form back through the fixed-scale section: the
/// result is Z0^{r/ρ} Σ pᵢ dqⁱ, and the charge restricts to r Z0^{r/ρ} u.
fn gauge_pullback(
    weights: &ScalingWeights,
    region: &DomainBox,
    seed: u64,
    tol: f64,
) -> CheckReport {
    let name = "gauge-pullback";
    let n = weights.n();
    let dim = 2 * n + 1;
    let z0 = 2.0f64;
    let r = weights.r();
    let rho = weights.rho();
    let t0 = z0.ln() / rho;
    let zfac = z0.powf(r / rho);

    // Contact chart order (q, p, u) into fiber order (t, u, q, p).
    let mut inject = Vec::with_capacity(dim + 1);
    inject.push(ScalarField::constant(dim, t0));
    inject.push(ScalarField::coordinate(dim, 2 * n));
    for i in 0..n {
        inject.push(ScalarField::coordinate(dim, i));
    }
    for i in 0..n {
        inject.push(ScalarField::coordinate(dim, n + i));
    }
    let section = SmoothMap::new(inject).then(&symplectize_map(weights));
    let g = charge_field(weights);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(25);
    for _ in 0..25 {
        let mut y = region.sample(&mut rng);
        for _ in 0..n {
            y.push(rng.gen_range(-1.0..=1.0));
        }
        y.push(rng.gen_range(-1.0..=1.0));
        samples.push(y);
    }

    CheckReport::over_samples(name, tol, &samples, |y| {
        let image = section.apply(y)?;
        let jac = section.jacobian(y)?;
        // Tautological coefficients at the image: Pᵢ on dQⁱ, μ on dZ.
        let mut coeff = vec![0.0; 2 * n + 2];
        for i in 0..n {
            coeff[i] = image[n + 1 + i];
        }
        coeff[n] = image[2 * n + 1];
        let mut worst = 0.0f64;
        for k in 0..dim {
            let mut pulled = 0.0;
            for a in 0..2 * n + 2 {
                pulled += coeff[a] * jac[(a, k)];
            }
            let expected = if k < n { zfac * y[n + k] } else { 0.0 };
            worst = worst.max((pulled - expected).abs());
        }
        let u = y[2 * n];
        worst = worst.max((g.value(&image)? - r * zfac * u).abs());
        Ok(worst)
    })
}

fn restricted_flow_drift(
    sub: &LegendreSubmanifold,
    weights: &ScalingWeights,
    q0: &[f64],
    c: f64,
) -> (CheckReport, CheckReport) {
    match sub.restricted_flow(weights, q0, c, 1.0, 1e-3) {
        Ok(flow) => {
            let start = flow.rows()[0].1.to_vec();
            let energy = match sub.energy_drift(&flow) {
                Ok(d) => CheckReport::from_residuals(
                    "restricted-flow-energy",
                    ENERGY_DRIFT_TOL,
                    [(d, start.clone())],
                ),
                Err(e) => {
                    CheckReport::failure("restricted-flow-energy", ENERGY_DRIFT_TOL, 0, e)
                }
            };
            let legendre = match sub.legendre_drift(&flow) {
                Ok(d) => CheckReport::from_residuals(
                    "restricted-flow-legendre",
                    LEGENDRE_DRIFT_TOL,
                    [(d, start)],
                ),
                Err(e) => {
                    CheckReport::failure("restricted-flow-legendre", LEGENDRE_DRIFT_TOL, 0, e)
                }
            };
            (energy, legendre)
        }
        Err(e) => (
            CheckReport::failure("restricted-flow-energy", ENERGY_DRIFT_TOL, 0, e.to_string()),
            CheckReport::failure("restricted-flow-legendre", LEGENDRE_DRIFT_TOL, 0, e),
        ),
    }
}

/// Halving the step divides the endpoint error against the closed-form
/// exponential trajectory by about 2⁴; the residual is the distance of
/// log2(error ratio) from 4.
fn flow_order(
    sub: &LegendreSubmanifold,
    weights: &ScalingWeights,
    q0: &[f64],
) -> CheckReport {
    let name = "flow-order";
    let c = 0.8;
    let t_end = 1.0;
    let n = weights.n();
    let endpoint_error = |dt: f64| -> darboux::Result<f64> {
        let flow = sub.restricted_flow(weights, q0, c, t_end, dt)?;
        let (_, last) = flow.final_row();
        let p0 = sub.surface_momenta(q0)?;
        let mut err = 0.0f64;
        for i in 0..n {
            let decay = (-c * weights.coord(i) * t_end).exp();
            err = err.max((last.q[i] - q0[i] * decay).abs());
            err = err.max((last.p[i] - p0[i] / decay).abs());
        }
        Ok(err)
    };
    match (endpoint_error(0.05), endpoint_error(0.025)) {
        (Ok(coarse), Ok(fine)) => {
            let residual = ((coarse / fine).log2() - 4.0).abs();
            CheckReport::from_residuals(name, ORDER_TOL, [(residual, q0.to_vec())])
        }
        (Err(e), _) | (_, Err(e)) => CheckReport::failure(name, ORDER_TOL, 0, e),
    }
}

// ----------------------------------------------------------------- blackhole

const PROBE_ENTROPIES: [f64; 4] = [1.0, 4.0, 9.0, 100.0];

fn blackhole_checks(
    cfg: &LoadedConfig,
    model: &BlackHoleModel,
    tols: Tols,
    seed: u64,
) -> Vec<CheckReport> {
    let mut checks = Vec::new();

    let smarr_name = if model.deformation() == 0.0 {
        "smarr"
    } else {
        "generalized-smarr"
    };
    let residuals: Result<Vec<(f64, Vec<f64>)>, darboux::Error> = PROBE_ENTROPIES
        .iter()
        .map(|&s| Ok((model.state(s)?.smarr_residual, vec![s])))
        .collect();
    checks.push(match residuals {
        Ok(rs) => CheckReport::from_residuals(smarr_name, tols.strict, rs),
        Err(e) => CheckReport::failure(smarr_name, tols.strict, 0, e),
    });

    let energy = model.extended_energy();
    checks.push(graph_residual_check(
        "energy-homogeneity",
        tols.graph,
        &energy,
        seed + 1,
        true,
        |energy, x| {
            let mut worst = 0.0f64;
            for lambda in [0.5, 2.0, 3.0] {
                worst = worst.max(energy.homogeneity_residual(x, lambda)?);
            }
            Ok(worst)
        },
    ));
    checks.push(graph_residual_check(
        "euler-on-graph",
        tols.graph,
        &energy,
        seed + 2,
        true,
        |energy, x| energy.euler_residual(x),
    ));

    // The scale structure of the equilibrium manifold is the same extended
    // chart as any homogeneous potential, so the full identity battery
    // applies with the model's degrees.
    let weights = energy.weights().clone();
    checks.push(charge_commutation(&weights, seed + 3, true, tols.strict));
    checks.push(conformal_scaling(&weights, seed + 4, true, tols.strict));
    checks.push(charge_invariance(&weights, seed + 5, true, tols.strict));
    checks.push(graph_residual_check(
        "hamiltonian-on-graph",
        tols.graph,
        &energy,
        seed + 6,
        true,
        |energy, x| Ok(energy.process_hamiltonian(x)?.abs()),
    ));
    checks.push(hamiltonian_homogeneity(&energy, seed + 7, true, tols.base));
    checks.push(dilation_commutator(&energy, seed + 8, true, tols.base));

    let q0 = cfg
        .flow
        .as_ref()
        .map(|f| f.q0.clone())
        .unwrap_or_else(|| vec![1.0]);
    checks.push(charge_conservation(&energy, &q0));
    checks.push(gauge_consistency(&weights, seed + 9, true, tols.strict));
    let region = DomainBox::new(vec![0.5], vec![4.0]).expect("static bounds");
    checks.push(gauge_pullback(&weights, &region, seed + 10, tols.strict));

    // The flag must agree with the degree coincidence r = ρ, and the numeric
    // temperature slope must corroborate whichever verdict it gives.
    let (obstructed, slope) = model.isothermal_obstruction();
    let expected = (model.deformation() - 1.0).abs() <= 1e-12;
    let corroborated = if obstructed { slope <= 1e-12 } else { slope > 1e-6 };
    let residual = if obstructed == expected && corroborated {
        0.0
    } else {
        1.0
    };
    checks.push(CheckReport::from_residuals(
        "isothermal-obstruction",
        tols.strict,
        [(residual, vec![slope])],
    ));

    checks
}
