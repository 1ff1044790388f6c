//! JSON system configurations: schema, validation, built-in systems, and
//! construction of the runnable model.
//!
//! A config declares a named system of one of three kinds:
//!   "constraint-system"    state functions fᵢ(q) defining pᵢ = fᵢ(q)
//!   "generating-function"  a single function u(q) generating a contact graph
//!   "blackhole"            a power-law equilibrium model S ↦ C S^(r/ρ)
//! Expressions may reference declared variables and constants only; constants
//! are substituted numerically before any differentiation happens.

use crate::expr::{self, Expr};
use darboux::{
    BlackHoleModel, ConstraintSystem, DomainBox, IdealGasParams, ScalarField, ScalingWeights,
    VdwParams,
};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

impl From<darboux::Error> for ConfigError {
    fn from(e: darboux::Error) -> Self {
        ConfigError(e.to_string())
    }
}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Kind {
    #[serde(rename = "constraint-system")]
    ConstraintSystem,
    #[serde(rename = "generating-function")]
    GeneratingFunction,
    #[serde(rename = "blackhole")]
    BlackHole,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::ConstraintSystem => "constraint-system",
            Kind::GeneratingFunction => "generating-function",
            Kind::BlackHole => "blackhole",
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variable {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    pub coords: Vec<f64>,
    pub r: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    /// Rate constant for the restricted flow; unused by the extended flows.
    #[serde(default)]
    pub c: Option<f64>,
    pub dt: f64,
    pub t_end: f64,
    pub q0: Vec<f64>,
}

/// The on-disk schema. Unknown fields are rejected so typos surface as
/// config errors instead of silently ignored knobs.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub name: String,
    pub kind: Kind,
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub variables: Vec<Variable>,
    #[serde(default)]
    pub expressions: Vec<String>,
    #[serde(default)]
    pub potential: Option<String>,
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
    #[serde(default)]
    pub weights: Option<WeightsConfig>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub flow: Option<FlowConfig>,
}

/// A validated, runnable system.
pub enum SystemModel {
    Constraint {
        system: ConstraintSystem,
        /// Set when the system is the built-in interacting gas, enabling the
        /// checks that compare it against the non-interacting one through
        /// the shift map.
        vdw: Option<VdwParams>,
    },
    Generating {
        u: ScalarField,
        weights: ScalingWeights,
        region: DomainBox,
        /// True when every variable's box sits strictly above zero; sampled
        /// states then keep coordinates positive.
        positive: bool,
    },
    BlackHole { model: BlackHoleModel },
}

pub struct LoadedConfig {
    pub name: String,
    pub tolerance: Option<f64>,
    pub flow: Option<FlowConfig>,
    pub model: SystemModel,
}

impl fmt::Debug for SystemModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SystemModel::Constraint { .. } => "Constraint",
            SystemModel::Generating { .. } => "Generating",
            SystemModel::BlackHole { .. } => "BlackHole",
        })
    }
}

impl fmt::Debug for LoadedConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LoadedConfig")
            .field("name", &self.name)
            .field("model", &self.model)
            .finish_non_exhaustive()
    }
}

pub const BUILTIN_IDS: [&str; 4] = ["ideal-gas", "paper-vdw", "schwarzschild", "barrow"];

pub fn builtin_summary(id: &str) -> &'static str {
    match id {
        "ideal-gas" => "constraint-system: monatomic gas state functions over (q1, q2)",
        "paper-vdw" => "constraint-system: interacting gas with excluded volume b",
        "schwarzschild" => "blackhole: D = 4 equilibrium with U = C sqrt(S)",
        "barrow" => "blackhole: D = 5 deformed-horizon equilibrium with Delta = 0.5",
        _ => "",
    }
}

fn builtin_raw(id: &str) -> Option<RawConfig> {
    let (kind, constants): (Kind, &[(&str, f64)]) = match id {
        "ideal-gas" => (Kind::ConstraintSystem, &[("A", 1.0)]),
        "paper-vdw" => (Kind::ConstraintSystem, &[("A", 1.0), ("b", 0.5)]),
        "schwarzschild" => (Kind::BlackHole, &[("C", 1.0), ("D", 4.0), ("Delta", 0.0)]),
        "barrow" => (Kind::BlackHole, &[("C", 1.0), ("D", 5.0), ("Delta", 0.5)]),
        _ => return None,
    };
    Some(RawConfig {
        name: id.to_string(),
        kind,
        builtin: Some(id.to_string()),
        variables: Vec::new(),
        expressions: Vec::new(),
        potential: None,
        constants: constants.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        weights: None,
        tolerance: None,
        flow: None,
    })
}

/// Load a config from a file path, or from a built-in id when no such file
/// exists.
pub fn load(path_or_id: &str) -> Result<LoadedConfig, ConfigError> {
    let path = Path::new(path_or_id);
    let raw = if path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str::<RawConfig>(&text)
            .map_err(|e| bad(format!("{}: {e}", path.display())))?
    } else if let Some(raw) = builtin_raw(path_or_id) {
        raw
    } else {
        return Err(bad(format!(
            "'{path_or_id}' is neither a config file nor a built-in system \
             (built-ins: {})",
            BUILTIN_IDS.join(", ")
        )));
    };
    validate(raw)
}

fn parse_named(src: &str, what: &str) -> Result<Expr, ConfigError> {
    expr::parse_expr(src).map_err(|e| bad(format!("{what} '{src}': {e}")))
}

/// Parse, reject undeclared identifiers by name, substitute constants, and
/// compile with closed-form partials over the declared variables.
fn compile_expression(
    src: &str,
    what: &str,
    vars: &[String],
    consts: &BTreeMap<String, f64>,
) -> Result<ScalarField, ConfigError> {
    let parsed = parse_named(src, what)?;
    for ident in expr::identifiers(&parsed) {
        if !vars.iter().any(|v| *v == ident) && !consts.contains_key(&ident) {
            return Err(bad(format!(
                "unknown identifier '{ident}' in {what} '{src}': not a declared \
                 variable or constant"
            )));
        }
    }
    let substituted = expr::substitute(&parsed, &|name| consts.get(name).copied());
    expr::compile_with_partials(&substituted, vars)
        .map_err(|name| bad(format!("unknown identifier '{name}' in {what} '{src}'")))
}

fn variable_names(variables: &[Variable]) -> Result<Vec<String>, ConfigError> {
    let mut names = Vec::with_capacity(variables.len());
    for v in variables {
        if v.name.is_empty() {
            return Err(bad("variable with empty name"));
        }
        if names.contains(&v.name) {
            return Err(bad(format!("variable '{}' declared twice", v.name)));
        }
        if !(v.min.is_finite() && v.max.is_finite() && v.min < v.max) {
            return Err(bad(format!(
                "variable '{}' needs a finite box with min < max, got [{}, {}]",
                v.name, v.min, v.max
            )));
        }
        names.push(v.name.clone());
    }
    Ok(names)
}

fn variable_box(variables: &[Variable]) -> DomainBox {
    let lo = variables.iter().map(|v| v.min).collect();
    let hi = variables.iter().map(|v| v.max).collect();
    DomainBox::new(lo, hi).expect("validated bounds")
}

fn constant(consts: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    consts.get(key).copied().unwrap_or(default)
}

fn validate(raw: RawConfig) -> Result<LoadedConfig, ConfigError> {
    if raw.name.is_empty() {
        return Err(bad("system name must not be empty"));
    }
    if let Some(tol) = raw.tolerance {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(bad(format!("tolerance must be positive, got {tol}")));
        }
    }
    for (k, v) in &raw.constants {
        if !v.is_finite() {
            return Err(bad(format!("constant '{k}' must be finite, got {v}")));
        }
    }
    if let Some(flow) = &raw.flow {
        if !(flow.dt.is_finite() && flow.dt > 0.0) {
            return Err(bad(format!("flow dt must be positive, got {}", flow.dt)));
        }
        if !(flow.t_end.is_finite() && flow.t_end >= 0.0) {
            return Err(bad(format!(
                "flow t_end must be nonnegative, got {}",
                flow.t_end
            )));
        }
    }

    if let Some(id) = raw.builtin.clone() {
        if !raw.expressions.is_empty() || raw.potential.is_some() {
            return Err(bad(format!(
                "built-in system '{id}' does not take expressions"
            )));
        }
        if !raw.variables.is_empty() {
            return Err(bad(format!(
                "built-in system '{id}' fixes its own variable box"
            )));
        }
        return validate_builtin(raw, id);
    }

    match raw.kind {
        Kind::ConstraintSystem => validate_constraint(raw),
        Kind::GeneratingFunction => validate_generating(raw),
        Kind::BlackHole => validate_blackhole(raw),
    }
}

fn validate_builtin(raw: RawConfig, id: String) -> Result<LoadedConfig, ConfigError> {
    let model = match id.as_str() {
        "ideal-gas" => {
            if raw.kind != Kind::ConstraintSystem {
                return Err(bad(format!(
                    "built-in '{id}' is a constraint-system, not a {}",
                    raw.kind
                )));
            }
            let a = constant(&raw.constants, "A", 1.0);
            let params = IdealGasParams::new(a)?;
            SystemModel::Constraint {
                system: ConstraintSystem::ideal_gas(&params),
                vdw: None,
            }
        }
        "paper-vdw" => {
            if raw.kind != Kind::ConstraintSystem {
                return Err(bad(format!(
                    "built-in '{id}' is a constraint-system, not a {}",
                    raw.kind
                )));
            }
            let a = constant(&raw.constants, "A", 1.0);
            let b = constant(&raw.constants, "b", 0.5);
            let params = VdwParams::new(a, b)?;
            SystemModel::Constraint {
                system: ConstraintSystem::paper_vdw(&params),
                vdw: Some(params),
            }
        }
        "schwarzschild" | "barrow" => {
            if raw.kind != Kind::BlackHole {
                return Err(bad(format!(
                    "built-in '{id}' is a blackhole system, not a {}",
                    raw.kind
                )));
            }
            let defaults = builtin_raw(&id).expect("known id");
            let pick = |key: &str| {
                constant(
                    &raw.constants,
                    key,
                    *defaults.constants.get(key).expect("default present"),
                )
            };
            SystemModel::BlackHole {
                model: blackhole_model(pick("C"), pick("D"), pick("Delta"))?,
            }
        }
        other => {
            return Err(bad(format!(
                "unknown built-in system '{other}' (built-ins: {})",
                BUILTIN_IDS.join(", ")
            )))
        }
    };
    Ok(LoadedConfig {
        name: raw.name,
        tolerance: raw.tolerance,
        flow: raw.flow,
        model,
    })
}

fn validate_constraint(raw: RawConfig) -> Result<LoadedConfig, ConfigError> {
    let names = variable_names(&raw.variables)?;
    let n = names.len();
    if n == 0 {
        return Err(bad("a constraint-system needs at least one variable"));
    }
    if raw.expressions.len() != n {
        return Err(bad(format!(
            "a constraint-system needs one state-function expression per \
             variable: {n} variable(s) but {} expression(s)",
            raw.expressions.len()
        )));
    }
    let mut fields = Vec::with_capacity(n);
    for (i, src) in raw.expressions.iter().enumerate() {
        fields.push(compile_expression(
            src,
            &format!("state function {}", i + 1),
            &names,
            &raw.constants,
        )?);
    }
    let potential = raw
        .potential
        .as_ref()
        .map(|src| compile_expression(src, "potential", &names, &raw.constants))
        .transpose()?;
    let system = ConstraintSystem::new(raw.name.clone(), fields, potential, variable_box(&raw.variables))?;
    Ok(LoadedConfig {
        name: raw.name,
        tolerance: raw.tolerance,
        flow: raw.flow,
        model: SystemModel::Constraint { system, vdw: None },
    })
}

fn validate_generating(raw: RawConfig) -> Result<LoadedConfig, ConfigError> {
    let names = variable_names(&raw.variables)?;
    let n = names.len();
    if n == 0 {
        return Err(bad("a generating-function system needs at least one variable"));
    }
    if raw.expressions.len() != 1 {
        return Err(bad(format!(
            "a generating-function system needs exactly one expression, got {}",
            raw.expressions.len()
        )));
    }
    if raw.potential.is_some() {
        return Err(bad(
            "a generating-function system declares its function in 'expressions'",
        ));
    }
    let u = compile_expression(
        &raw.expressions[0],
        "generating function",
        &names,
        &raw.constants,
    )?;
    let weights = match &raw.weights {
        Some(w) => {
            if w.coords.len() != n {
                return Err(bad(format!(
                    "weights declare {} coordinate weight(s) for {n} variable(s)",
                    w.coords.len()
                )));
            }
            ScalingWeights::new(w.coords.clone(), w.r, w.rho)?
        }
        None => ScalingWeights::extensive(n),
    };
    if let Some(flow) = &raw.flow {
        if flow.q0.len() != n {
            return Err(bad(format!(
                "flow start q0 has {} entries for {n} variable(s)",
                flow.q0.len()
            )));
        }
    }
    let region = variable_box(&raw.variables);
    let positive = raw.variables.iter().all(|v| v.min > 0.0);
    Ok(LoadedConfig {
        name: raw.name,
        tolerance: raw.tolerance,
        flow: raw.flow,
        model: SystemModel::Generating {
            u,
            weights,
            region,
            positive,
        },
    })
}

fn blackhole_model(c: f64, d: f64, delta: f64) -> Result<BlackHoleModel, ConfigError> {
    if d.fract() != 0.0 || !(4.0..=64.0).contains(&d) {
        return Err(bad(format!(
            "constant 'D' must be an integer dimension of at least 4, got {d}"
        )));
    }
    Ok(BlackHoleModel::new(c, d as u32, delta)?)
}

fn validate_blackhole(raw: RawConfig) -> Result<LoadedConfig, ConfigError> {
    if !raw.variables.is_empty() || !raw.expressions.is_empty() || raw.potential.is_some() {
        return Err(bad(
            "a blackhole system is fixed by constants C, D and Delta; it takes \
             no variables or expressions",
        ));
    }
    let c = constant(&raw.constants, "C", 1.0);
    let d = constant(&raw.constants, "D", 4.0);
    let delta = constant(&raw.constants, "Delta", 0.0);
    Ok(LoadedConfig {
        name: raw.name,
        tolerance: raw.tolerance,
        flow: raw.flow,
        model: SystemModel::BlackHole {
            model: blackhole_model(c, d, delta)?,
        },
    })
}
