//! Registry of worked circuits, each with closed-form expectations that are
//! evaluated at runtime from the scenario parameters and model settings.

mod scenarios;

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::analysis;
use crate::circuit::Circuit;
use crate::engine::{self, Coupling, CtcModel, Simulator};
use crate::error::{CtcError, Result};
use crate::state::{Amplitude, PureState};

pub use scenarios::REGISTRY;

pub type Params = BTreeMap<String, f64>;

/// Tolerance for closed-form comparisons.
pub const CLOSED_FORM_TOL: f64 = 1e-9;
/// Tolerance for comparisons against quadrature results.
pub const QUADRATURE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub min: f64,
    pub max: f64,
    pub doc: &'static str,
}

/// How an expectation is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Model(CtcModel),
    /// Every CTC is prepared and projected with this `(ref, loop)` pair.
    ReferencePair(Vec<Amplitude>),
    Conditional {
        power: String,
        model: CtcModel,
        mode: Coupling,
    },
    InputBias {
        channel: String,
        model: CtcModel,
        nodes: usize,
    },
    /// Input bias over the computational basis states of `channel`.
    ClassicalInputBias { channel: String, model: CtcModel },
}

impl ModelSpec {
    pub fn lambda(&self) -> f64 {
        match self.model() {
            Some(CtcModel::NoisyBell { lambda }) => *lambda,
            _ => 0.0,
        }
    }

    pub fn k(&self) -> f64 {
        match self.model() {
            Some(CtcModel::Classical { k, .. }) => *k,
            _ => 0.0,
        }
    }

    pub fn model(&self) -> Option<&CtcModel> {
        match self {
            ModelSpec::Model(m)
            | ModelSpec::Conditional { model: m, .. }
            | ModelSpec::InputBias { model: m, .. }
            | ModelSpec::ClassicalInputBias { model: m, .. } => Some(m),
            ModelSpec::ReferencePair(_) => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ModelSpec::Model(m) => model_tag(m),
            ModelSpec::ReferencePair(_) => "reference_pair".into(),
            ModelSpec::Conditional { model, mode, .. } => {
                format!("conditional[{:?}]:{}", mode, model_tag(model))
            }
            ModelSpec::InputBias { model, .. } => format!("input_bias:{}", model_tag(model)),
            ModelSpec::ClassicalInputBias { model, .. } => {
                format!("input_bias_bits:{}", model_tag(model))
            }
        }
    }
}

fn model_tag(m: &CtcModel) -> String {
    match m {
        CtcModel::ExactBell => "exact_bell".into(),
        CtcModel::NoisyBell { lambda } => format!("noisy_bell({lambda})"),
        CtcModel::Classical { k, floor } => {
            format!("{}({k})", if *floor { "classical_floor" } else { "classical" })
        }
        CtcModel::WeightMatrix(_) => "weight_matrix".into(),
        CtcModel::DeltaQuadrature {
            theta_nodes,
            xi_nodes,
        } => format!("delta({theta_nodes}x{xi_nodes})"),
    }
}

/// Whether `a` and `b` are the same model family (parameters may differ).
fn same_family(a: &CtcModel, b: &CtcModel) -> bool {
    match (a, b) {
        (CtcModel::Classical { floor: f1, .. }, CtcModel::Classical { floor: f2, .. }) => f1 == f2,
        (CtcModel::WeightMatrix(x), CtcModel::WeightMatrix(y)) => x == y,
        _ => std::mem::discriminant(a) == std::mem::discriminant(b),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Quantity {
    /// The model must raise a paradox.
    Paradox,
    N,
    Z,
    /// Trace-one density operator over all external channels.
    Rho,
    /// Reduced operator on the listed channels.
    RhoReduced(Vec<String>),
    RhoLoop,
    /// `‖ψ̄‖²` of the labelled projection.
    ProjectionNorm(String),
    /// Unnormalized state of the labelled projection.
    ProjectedState(String),
    Flip(String, String),
    /// Probability that the listed channels read the given bits.
    Probability(Vec<(String, u8)>),
    Bias,
}

impl Quantity {
    pub fn describe(&self) -> String {
        match self {
            Quantity::Paradox => "paradox".into(),
            Quantity::N => "N".into(),
            Quantity::Z => "Z".into(),
            Quantity::Rho => "rho".into(),
            Quantity::RhoReduced(k) => format!("rho[{}]", k.join(",")),
            Quantity::RhoLoop => "rho_loop".into(),
            Quantity::ProjectionNorm(l) => format!("|psi_{l}|^2"),
            Quantity::ProjectedState(l) => format!("psi_{l}"),
            Quantity::Flip(a, b) => format!("flip({a},{b})"),
            Quantity::Probability(bits) => {
                let s: Vec<String> = bits.iter().map(|(l, b)| format!("{l}={b}")).collect();
                format!("P({})", s.join(","))
            }
            Quantity::Bias => "input_bias".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Paradox,
    Scalar(f64),
    Matrix(DMatrix<Amplitude>),
    State(Vec<Amplitude>),
}

impl Value {
    /// Distance to `other`, infinite when the kinds differ.
    pub fn distance(&self, other: &Value) -> f64 {
        match (self, other) {
            (Value::Paradox, Value::Paradox) => 0.0,
            (Value::Scalar(a), Value::Scalar(b)) => (a - b).abs(),
            (Value::Matrix(a), Value::Matrix(b)) if a.shape() == b.shape() => {
                (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
            }
            (Value::State(a), Value::State(b)) if a.len() == b.len() => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max),
            _ => f64::INFINITY,
        }
    }
}

pub type ExpectFn = Arc<dyn Fn(&Params, &ModelSpec) -> Value + Send + Sync>;

#[derive(Clone)]
pub struct Expectation {
    pub model: ModelSpec,
    pub quantity: Quantity,
    pub value: ExpectFn,
    /// What the expectation encodes, and any correction to a printed form.
    pub note: &'static str,
}

impl std::fmt::Debug for Expectation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Expectation")
            .field("model", &self.model)
            .field("quantity", &self.quantity)
            .field("note", &self.note)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    /// Gate order and target lists.
    pub wiring: &'static str,
    pub params: Params,
    pub circuit: Circuit,
    pub expectations: Vec<Expectation>,
    /// Power channel and renormalization mode for conditionally selected circuits.
    pub conditional: Option<(String, Coupling)>,
}

pub struct Built {
    pub circuit: Circuit,
    pub expectations: Vec<Expectation>,
    pub conditional: Option<(String, Coupling)>,
}

pub type BuildFn = fn(&Params) -> Result<Built>;

pub struct Entry {
    pub name: &'static str,
    pub summary: &'static str,
    pub wiring: &'static str,
    pub params: fn() -> Vec<ParamSpec>,
    pub build: BuildFn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub wiring: &'static str,
    pub params: Vec<ParamSpec>,
}

pub fn list_scenarios() -> Vec<ScenarioInfo> {
    REGISTRY
        .iter()
        .map(|e| ScenarioInfo {
            name: e.name,
            summary: e.summary,
            wiring: e.wiring,
            params: (e.params)(),
        })
        .collect()
}

const ALIASES: &[(&str, &str)] = &[("secondary_loop", "amnesia_secondary_loop")];

fn entry(name: &str) -> Result<&'static Entry> {
    let name = ALIASES
        .iter()
        .find(|(a, _)| *a == name)
        .map_or(name, |(_, n)| *n);
    REGISTRY
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| CtcError::NotFound(name.to_string()))
}

/// Fills defaults and checks ranges.
pub fn resolve_params(name: &str, overrides: &Params) -> Result<Params> {
    let e = entry(name)?;
    let name = e.name;
    let specs = (e.params)();
    let mut out = Params::new();
    for s in &specs {
        out.insert(s.name.to_string(), s.default);
    }
    for (k, v) in overrides {
        let s = specs.iter().find(|s| s.name == k).ok_or_else(|| {
            CtcError::Config(format!("scenario {name} has no parameter {k}"))
        })?;
        if !(v.is_finite() && *v >= s.min && *v <= s.max) {
            return Err(CtcError::Config(format!(
                "{name}.{k} = {v} outside [{}, {}]",
                s.min, s.max
            )));
        }
        out.insert(k.clone(), *v);
    }
    Ok(out)
}

pub fn build_scenario(name: &str, overrides: &Params) -> Result<Scenario> {
    let e = entry(name)?;
    let params = resolve_params(name, overrides)?;
    let b = (e.build)(&params)?;
    Ok(Scenario {
        name: e.name,
        summary: e.summary,
        wiring: e.wiring,
        params,
        circuit: b.circuit,
        expectations: b.expectations,
        conditional: b.conditional,
    })
}

#[derive(Debug, Clone)]
pub struct Check {
    pub model: String,
    pub quantity: String,
    pub expected: Value,
    pub actual: std::result::Result<Value, String>,
    pub delta: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub note: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyStatus {
    Passed,
    Failed,
    /// No expectation exists for the requested model.
    Skipped,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub scenario: String,
    pub status: VerifyStatus,
    pub checks: Vec<Check>,
}

fn tolerance_for(spec: &ModelSpec) -> f64 {
    match spec {
        ModelSpec::Model(CtcModel::DeltaQuadrature { .. }) | ModelSpec::InputBias { .. } => {
            QUADRATURE_TOL
        }
        _ => CLOSED_FORM_TOL,
    }
}

/// Checks every expectation whose model family matches `model`, evaluated
/// with `model`'s own settings.
pub fn verify_scenario(name: &str, params: &Params, model: &CtcModel) -> Result<VerifyReport> {
    let sc = build_scenario(name, params)?;
    let sim = Simulator::default();
    let mut checks = Vec::new();
    for ex in &sc.expectations {
        if let ModelSpec::Model(m) = &ex.model {
            if same_family(m, model) {
                checks.push(run_check(&sim, &sc, ex, &ModelSpec::Model(model.clone()))?);
            }
        }
    }
    Ok(report(name, checks))
}

/// Checks every expectation of the scenario with its stored settings.
pub fn verify_all(name: &str, params: &Params) -> Result<VerifyReport> {
    let sc = build_scenario(name, params)?;
    let sim = Simulator::default();
    let checks = sc
        .expectations
        .iter()
        .map(|ex| run_check(&sim, &sc, ex, &ex.model))
        .collect::<Result<Vec<_>>>()?;
    Ok(report(name, checks))
}

fn report(name: &str, checks: Vec<Check>) -> VerifyReport {
    let status = if checks.is_empty() {
        VerifyStatus::Skipped
    } else if checks.iter().all(|c| c.pass) {
        VerifyStatus::Passed
    } else {
        VerifyStatus::Failed
    };
    VerifyReport {
        scenario: name.to_string(),
        status,
        checks,
    }
}

fn run_check(sim: &Simulator, sc: &Scenario, ex: &Expectation, spec: &ModelSpec) -> Result<Check> {
    let expected = (ex.value)(&sc.params, spec);
    let actual = evaluate(sim, &sc.circuit, spec, &ex.quantity);
    let tolerance = tolerance_for(spec);
    let (actual, delta) = match actual {
        Ok(v) => {
            let d = expected.distance(&v);
            (Ok(v), d)
        }
        Err(e) => (Err(e.to_string()), f64::INFINITY),
    };
    Ok(Check {
        model: spec.describe(),
        quantity: ex.quantity.describe(),
        expected,
        pass: delta <= tolerance,
        actual,
        delta,
        tolerance,
        note: ex.note,
    })
}

fn matrix_of(rho: &crate::state::DensityOperator) -> Value {
    Value::Matrix(rho.matrix().clone())
}

/// Computes `q` for `circuit` under `spec`. Paradoxes become [`Value::Paradox`].
pub fn evaluate(sim: &Simulator, circuit: &Circuit, spec: &ModelSpec, q: &Quantity) -> Result<Value> {
    let labels_state = |label: &str, set: &engine::ProjectionSet| -> Result<Value> {
        let e = set
            .get(label)
            .ok_or_else(|| CtcError::Label(format!("projection {label}")))?;
        Ok(match q {
            Quantity::ProjectionNorm(_) => Value::Scalar(e.norm_sqr),
            _ => Value::State(e.state.amplitudes().to_vec()),
        })
    };
    let result = match spec {
        ModelSpec::ReferencePair(pair) => {
            let s = engine::project_with_pair(circuit, pair)?;
            return Ok(match q {
                Quantity::N => Value::Scalar(s.norm()),
                _ => Value::State(s.amplitudes().to_vec()),
            });
        }
        ModelSpec::InputBias {
            channel,
            model,
            nodes,
        } => {
            let r = analysis::input_bias(sim, circuit, channel, model, *nodes)?;
            return Ok(matrix_of(&r.rho_bar));
        }
        ModelSpec::ClassicalInputBias { channel, model } => {
            let bits = analysis::classical_bits(channel);
            let r = analysis::input_bias_discrete(sim, circuit, channel, model, &bits)?;
            return Ok(matrix_of(&r.rho_bar));
        }
        ModelSpec::Model(m) => {
            if let (Quantity::ProjectionNorm(l) | Quantity::ProjectedState(l), CtcModel::ExactBell | CtcModel::NoisyBell { .. }) = (q, m) {
                return labels_state(l, &engine::bell_projections(circuit)?);
            }
            sim.run(circuit, m)
        }
        ModelSpec::Conditional { power, model, mode } => sim.run_conditional(circuit, power, model, *mode),
    };
    let r = match result {
        Ok(r) => r,
        Err(CtcError::Paradox { .. }) => return Ok(Value::Paradox),
        Err(e) => return Err(e),
    };
    Ok(match q {
        Quantity::Paradox => Value::Scalar(r.z),
        Quantity::N => Value::Scalar(r.n.unwrap_or(f64::NAN)),
        Quantity::Z => Value::Scalar(r.z),
        Quantity::Rho => matrix_of(&r.rho),
        Quantity::RhoReduced(keep) => {
            let keep: Vec<&str> = keep.iter().map(String::as_str).collect();
            matrix_of(&r.rho.partial_trace(&keep)?)
        }
        Quantity::RhoLoop => match &r.rho_loop {
            Some(rl) => matrix_of(rl),
            None => return Err(CtcError::Unsupported("model has no loop density".into())),
        },
        Quantity::ProjectionNorm(l) | Quantity::ProjectedState(l) => labels_state(l, &r.projections)?,
        Quantity::Flip(a, b) => Value::Scalar(analysis::flip_probability(&r, a, b)?),
        Quantity::Probability(bits) => {
            let fixed: Vec<(&str, u8)> = bits.iter().map(|(l, b)| (l.as_str(), *b)).collect();
            Value::Scalar(r.rho.probability(&fixed)?)
        }
        Quantity::Bias => return Err(CtcError::Config("input bias needs an input-bias model".into())),
    })
}

/// Initial state helper shared by scenario builders.
pub(crate) fn qubit(label: &str, p: &Params, prefix: &str) -> Result<PureState> {
    PureState::qubit_angles(label, p[&format!("{prefix}_theta")], p[&format!("{prefix}_phase")])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_census() {
        let names: Vec<_> = list_scenarios().iter().map(|s| s.name).collect();
        assert!(names.len() >= 20);
        assert!(names.contains(&"grandfather_not"));
        for (i, n) in names.iter().enumerate() {
            assert!(!names[..i].contains(n), "duplicate {n}");
        }
    }

    #[test]
    fn every_scenario_builds_and_validates() {
        for s in list_scenarios() {
            let sc = build_scenario(s.name, &Params::new()).unwrap();
            assert!(sc.circuit.validate().is_empty(), "{}", s.name);
            assert!(!sc.expectations.is_empty(), "{}", s.name);
        }
    }

    #[test]
    fn unknown_scenario() {
        assert!(matches!(
            build_scenario("nope", &Params::new()),
            Err(CtcError::NotFound(_))
        ));
    }

    #[test]
    fn out_of_range_param() {
        let mut p = Params::new();
        p.insert("zeta".into(), 100.0);
        assert!(matches!(build_scenario("faulty_gun", &p), Err(CtcError::Config(_))));
    }
}
