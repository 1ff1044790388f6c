//! Flow execution and CSV serialization.
//!
//! Three generators are available on a generating-function or blackhole
//! config: the restricted equilibrium flow on the contact graph, the charge
//! flow (simultaneous rescaling of coordinates and scale variable), and the
//! process flow generated by the extended Hamiltonian. Integration runs one
//! RK4 step at a time so a domain exit still leaves the rows already
//! computed, which are written as a partial CSV alongside the failing step
//! index.

use crate::config::{ConfigError, FlowConfig, LoadedConfig, SystemModel};
use darboux::contact::LegendreSubmanifold;
use darboux::integrate::rk4_flow;
use darboux::scaling::{charge_hamiltonian_field, ExtendedState};
use darboux::{ExtendedEnergy, ScalarField, ScalingWeights};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Restricted,
    Charge,
    Process,
}

#[derive(Debug)]
pub struct FlowOutput {
    pub csv: String,
    pub summary: String,
    /// Step index and cause when integration left the domain early; the CSV
    /// then holds only the rows completed before that step.
    pub abort: Option<(usize, String)>,
}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// The generating data a flow needs: fiber function and weights.
fn flow_system(cfg: &LoadedConfig) -> Result<(ScalarField, ScalingWeights), ConfigError> {
    match &cfg.model {
        SystemModel::Generating { u, weights, .. } => Ok((u.clone(), weights.clone())),
        SystemModel::BlackHole { model } => {
            let energy = model.extended_energy();
            Ok((energy.base().clone(), energy.weights().clone()))
        }
        SystemModel::Constraint { .. } => Err(bad(format!(
            "system '{}' is a constraint-system; flows need a generating-function \
             or blackhole config",
            cfg.name
        ))),
    }
}

fn flow_params<'a>(cfg: &'a LoadedConfig, n: usize) -> Result<&'a FlowConfig, ConfigError> {
    let flow = cfg
        .flow
        .as_ref()
        .ok_or_else(|| bad(format!("system '{}' declares no flow parameters", cfg.name)))?;
    if flow.q0.len() != n {
        return Err(bad(format!(
            "flow start q0 has {} entries for {n} coordinate(s)",
            flow.q0.len()
        )));
    }
    Ok(flow)
}

pub fn run_flow(cfg: &LoadedConfig, kind: GeneratorKind) -> Result<FlowOutput, ConfigError> {
    let (u, weights) = flow_system(cfg)?;
    let flow = flow_params(cfg, weights.n())?;
    match kind {
        GeneratorKind::Restricted => restricted(&u, &weights, flow),
        GeneratorKind::Charge | GeneratorKind::Process => extended(&u, &weights, flow, kind),
    }
}

/// One RK4 step at a time on the library's time grid: full steps of `dt`,
/// then a shortened final step landing exactly on `t_end`.
fn integrate_stepwise(
    mut rhs: impl FnMut(&[f64]) -> darboux::Result<Vec<f64>>,
    y0: Vec<f64>,
    dt: f64,
    t_end: f64,
) -> (Vec<(f64, Vec<f64>)>, Option<(usize, String)>) {
    let mut rows = vec![(0.0, y0.clone())];
    if t_end == 0.0 {
        return (rows, None);
    }
    let full_steps = (t_end / dt + 1e-9).floor() as usize;
    let remainder = (t_end - full_steps as f64 * dt).max(0.0);
    let mut y = y0;
    for step in 0..full_steps {
        match rk4_flow(&mut rhs, &y, dt, dt) {
            Ok(pair) => {
                y = pair.last().expect("rk4 records the endpoint").1.clone();
                rows.push(((step + 1) as f64 * dt, y.clone()));
            }
            Err(e) => return (rows, Some((step, e.to_string()))),
        }
    }
    if remainder > 1e-12 * t_end.max(1.0) {
        match rk4_flow(&mut rhs, &y, remainder, remainder) {
            Ok(pair) => rows.push((t_end, pair.last().expect("endpoint").1.clone())),
            Err(e) => return (rows, Some((full_steps, e.to_string()))),
        }
    } else if let Some(last) = rows.last_mut() {
        last.0 = t_end;
    }
    (rows, None)
}

fn push_value(line: &mut String, v: f64) {
    write!(line, ",{v:.16e}").expect("string write");
}

fn restricted(
    u: &ScalarField,
    weights: &ScalingWeights,
    flow: &FlowConfig,
) -> Result<FlowOutput, ConfigError> {
    let n = weights.n();
    let sub = LegendreSubmanifold::from_generating(u.clone());
    let c = flow.c.unwrap_or(1.0);

    let mut header = String::from("step,t,u");
    for i in 1..=n {
        write!(header, ",q{i}").expect("string write");
    }
    for i in 1..=n {
        write!(header, ",p{i}").expect("string write");
    }
    header.push('\n');

    // Start on the surface; this also enforces the degree-zero precondition.
    let start = match sub.restricted_flow(weights, &flow.q0, c, 0.0, flow.dt) {
        Ok(f) => f.rows()[0].1.clone(),
        Err(e) => {
            return Ok(FlowOutput {
                csv: header,
                summary: format!("flow not started: {e}"),
                abort: Some((0, e.to_string())),
            })
        }
    };

    let coords: Vec<f64> = weights.coords().to_vec();
    let rhs = move |y: &[f64]| {
        let mut dy = vec![0.0; 2 * n + 1];
        for i in 0..n {
            dy[i] = -c * coords[i] * y[i];
            dy[n + i] = c * coords[i] * y[n + i];
        }
        Ok(dy)
    };
    // State vector order (q.., p.., u), matching the contact chart.
    let (rows, abort) = integrate_stepwise(rhs, start.to_vec(), flow.dt, flow.t_end);

    let mut csv = header;
    let mut drift = 0.0f64;
    let u0 = start.u;
    for (step, (t, y)) in rows.iter().enumerate() {
        let mut line = format!("{step}");
        push_value(&mut line, *t);
        push_value(&mut line, y[2 * n]);
        for v in &y[..2 * n] {
            push_value(&mut line, *v);
        }
        line.push('\n');
        csv.push_str(&line);
        if let Ok(current) = u.value(&y[..n]) {
            drift = drift.max((current - u0).abs());
        }
    }
    let summary = format!("u-drift {:.3e} across {} rows", drift, rows.len());
    Ok(FlowOutput {
        csv,
        summary,
        abort,
    })
}

fn extended(
    u: &ScalarField,
    weights: &ScalingWeights,
    flow: &FlowConfig,
    kind: GeneratorKind,
) -> Result<FlowOutput, ConfigError> {
    let n = weights.n();
    let energy = ExtendedEnergy::new(u.clone(), weights.clone())?;

    let mut header = String::from("step,t,Z,mu");
    for i in 1..=n {
        write!(header, ",Q{i}").expect("string write");
    }
    for i in 1..=n {
        write!(header, ",P{i}").expect("string write");
    }
    header.push_str(",G,H,U\n");

    // Start on the graph of the extended potential at unit scale.
    let start = match energy.graph_state(&flow.q0, 1.0) {
        Ok(x) => x,
        Err(e) => {
            return Ok(FlowOutput {
                csv: header,
                summary: format!("flow not started: {e}"),
                abort: Some((0, e.to_string())),
            })
        }
    };

    let field = match kind {
        GeneratorKind::Charge => charge_hamiltonian_field(weights),
        GeneratorKind::Process => energy.process_field(),
        GeneratorKind::Restricted => unreachable!("handled by the restricted runner"),
    };
    let (rows, mut abort) =
        integrate_stepwise(|y| field.value(y), start.to_vec(), flow.dt, flow.t_end);

    let hfield = energy.process_hamiltonian_field();
    let mut csv = header;
    let mut g0 = None;
    let mut drift = 0.0f64;
    let mut written = 0usize;
    for (step, (t, y)) in rows.iter().enumerate() {
        // Chart order (Q.., Z, P.., μ); observables recomputed per row.
        let observables = (|| -> darboux::Result<(f64, f64, f64)> {
            let state = ExtendedState::from_vec(y)?;
            let g = darboux::scaling::noether_charge(&state, weights);
            let h = hfield.value(y)?;
            let uval = energy.value(&state.coords, state.z)?;
            Ok((g, h, uval))
        })();
        let (g, h, uval) = match observables {
            Ok(v) => v,
            Err(e) => {
                if abort.is_none() {
                    abort = Some((step, e.to_string()));
                }
                break;
            }
        };
        let mut line = format!("{step}");
        push_value(&mut line, *t);
        push_value(&mut line, y[n]);
        push_value(&mut line, y[2 * n + 1]);
        for v in &y[..n] {
            push_value(&mut line, *v);
        }
        for v in &y[n + 1..2 * n + 1] {
            push_value(&mut line, *v);
        }
        push_value(&mut line, g);
        push_value(&mut line, h);
        push_value(&mut line, uval);
        line.push('\n');
        csv.push_str(&line);
        written += 1;

        let base = *g0.get_or_insert(g);
        drift = drift.max((g - base).abs());
    }
    let summary = format!("G-drift {:.3e} across {written} rows", drift);
    Ok(FlowOutput {
        csv,
        summary,
        abort,
    })
}
