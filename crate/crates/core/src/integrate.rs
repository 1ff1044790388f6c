//! Quadrature and the fixed-step RK4 integrator.
//!
//! Line integrals use 16-point Gauss-Legendre panels with panel halving
//! until two refinements agree to 1e-10. The integrand returns dual numbers,
//! so the same quadrature differentiates cleanly when its endpoints are
//! seeded; plain integrals just read the value slot.

use crate::error::{Error, Result};
use crate::hyperdual::HyperDual;

// 16-point Gauss-Legendre rule on [-1, 1]: positive abscissas and weights,
// mirrored for the negative half. Exact through polynomial degree 31.
const GL16_X: [f64; 8] = [
    0.095012509837637440185,
    0.281603550779258913230,
    0.458016777657227386342,
    0.617876244402643748447,
    0.755404408355003033895,
    0.865631202387831743880,
    0.944575023073232576078,
    0.989400934991649932596,
];
const GL16_W: [f64; 8] = [
    0.189450610455068496285,
    0.182603415044923588867,
    0.169156519395002538189,
    0.149595988816576732081,
    0.124628971255533872052,
    0.095158511682492784810,
    0.062253523938647892863,
    0.027152459411754094852,
];

/// Single 16-point panel over [a, b].
pub fn gauss_legendre_16(
    f: &mut impl FnMut(f64) -> Result<HyperDual>,
    a: f64,
    b: f64,
) -> Result<HyperDual> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = HyperDual::ZERO;
    for k in 0..8 {
        let dx = half * GL16_X[k];
        acc = acc + (f(mid - dx)? + f(mid + dx)?).scale(GL16_W[k]);
    }
    Ok(acc.scale(half))
}

/// Panel-halving refinement: 1, 2, 4, ... panels until two successive
/// estimates differ by less than `tol` in value.
pub fn integrate_adaptive(
    mut f: impl FnMut(f64) -> Result<HyperDual>,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<HyperDual> {
    const MAX_HALVINGS: u32 = 14;
    let mut panels = 1usize;
    let mut previous = gauss_legendre_16(&mut f, a, b)?;
    for _ in 0..MAX_HALVINGS {
        panels *= 2;
        let width = (b - a) / panels as f64;
        let mut acc = HyperDual::ZERO;
        for k in 0..panels {
            let left = a + width * k as f64;
            acc = acc + gauss_legendre_16(&mut f, left, left + width)?;
        }
        let delta = (acc.val - previous.val).abs();
        if delta < tol {
            return Ok(acc);
        }
        previous = acc;
    }
    Err(Error::QuadratureDivergence {
        halvings: MAX_HALVINGS,
        last_delta: f64::NAN,
    })
}

fn rk4_step(
    rhs: &mut impl FnMut(&[f64]) -> Result<Vec<f64>>,
    y: &[f64],
    dt: f64,
) -> Result<Vec<f64>> {
    let n = y.len();
    let k1 = rhs(y)?;
    let mut stage = vec![0.0; n];
    for i in 0..n {
        stage[i] = y[i] + 0.5 * dt * k1[i];
    }
    let k2 = rhs(&stage)?;
    for i in 0..n {
        stage[i] = y[i] + 0.5 * dt * k2[i];
    }
    let k3 = rhs(&stage)?;
    for i in 0..n {
        stage[i] = y[i] + dt * k3[i];
    }
    let k4 = rhs(&stage)?;
    let mut out = y.to_vec();
    for i in 0..n {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Classical fixed-step RK4 over an autonomous system, recording every step
/// including the initial state. The final step is shortened so the last row
/// lands exactly on `t_end`.
pub fn rk4_flow(
    mut rhs: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    y0: &[f64],
    dt: f64,
    t_end: f64,
) -> Result<Vec<(f64, Vec<f64>)>> {
    if !(dt > 0.0) || t_end < 0.0 {
        return Err(Error::Invalid(format!(
            "flow needs dt > 0 and t_end >= 0, got dt = {dt}, t_end = {t_end}"
        )));
    }
    let mut rows = vec![(0.0, y0.to_vec())];
    if t_end == 0.0 {
        return Ok(rows);
    }
    let full_steps = (t_end / dt + 1e-9).floor() as usize;
    let remainder = (t_end - full_steps as f64 * dt).max(0.0);
    let mut y = y0.to_vec();
    for step in 0..full_steps {
        let t = step as f64 * dt;
        y = rk4_step(&mut rhs, &y, dt).map_err(|e| Error::FlowAbort {
            step,
            t,
            source: Box::new(e),
        })?;
        rows.push(((step + 1) as f64 * dt, y.clone()));
    }
    if remainder > 1e-12 * t_end.max(1.0) {
        y = rk4_step(&mut rhs, &y, remainder).map_err(|e| Error::FlowAbort {
            step: full_steps,
            t: full_steps as f64 * dt,
            source: Box::new(e),
        })?;
        rows.push((t_end, y));
    } else {
        // Snap accumulated rounding so the caller sees the requested horizon.
        rows.last_mut().unwrap().0 = t_end;
    }
    Ok(rows)
}
