//! Circuit description documents (JSON).

use std::collections::BTreeMap;

use ctc_core::engine::{Coupling, DEFAULT_NODES};
use ctc_core::state::MAX_QUBITS;
use ctc_core::{
    build_circuit, make_gate, Amplitude, Channel, Circuit, CtcError, CtcModel, EntangledInit, GateKind,
    PureState, Role, WeightMatrix,
};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Default resolution of the input-bias quadrature.
pub const DEFAULT_BIAS_NODES: usize = 16;
const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitDoc {
    pub channels: Vec<ChannelDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub entangled_inits: Vec<EntangledDoc>,
    #[serde(default)]
    pub gates: Vec<GateDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditional: Option<ConditionalDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDoc {
    pub name: String,
    pub role: RoleDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<InitDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoleDoc {
    Ctc,
    External,
}

/// Named state (`"0"`, `"1"`, `"+"`, `"-"`) or `[re, im, re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitDoc {
    Named(String),
    Amplitudes(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntangledDoc {
    pub channels: Vec<String>,
    /// Interleaved `[re, im, ...]`.
    pub amplitudes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateDoc {
    pub kind: String,
    pub targets: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    /// Rows of interleaved `[re, im, ...]`, for `custom` gates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub perturbation: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes_theta: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes_xi: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias_nodes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionalDoc {
    pub power: String,
    pub mode: ModeDoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeDoc {
    Coupled,
    Insulated,
}

impl From<ModeDoc> for Coupling {
    fn from(m: ModeDoc) -> Self {
        match m {
            ModeDoc::Coupled => Coupling::Coupled,
            ModeDoc::Insulated => Coupling::Insulated,
        }
    }
}

impl From<Coupling> for ModeDoc {
    fn from(m: Coupling) -> Self {
        match m {
            Coupling::Coupled => ModeDoc::Coupled,
            Coupling::Insulated => ModeDoc::Insulated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Output {
    Z,
    N,
    Rho,
    RhoLoop,
    Projections,
    Flip(String, String),
    InputBias(String),
}

impl Output {
    pub fn parse(s: &str) -> Option<Output> {
        Some(match s {
            "Z" => Output::Z,
            "N" => Output::N,
            "rho" => Output::Rho,
            "rho_loop" => Output::RhoLoop,
            "projections" => Output::Projections,
            _ => {
                if let Some(rest) = s.strip_prefix("flip:") {
                    let (a, b) = rest.split_once(',')?;
                    Output::Flip(a.trim().into(), b.trim().into())
                } else {
                    Output::InputBias(s.strip_prefix("input_bias:")?.trim().into())
                }
            }
        })
    }

    pub fn key(&self) -> String {
        match self {
            Output::Z => "Z".into(),
            Output::N => "N".into(),
            Output::Rho => "rho".into(),
            Output::RhoLoop => "rho_loop".into(),
            Output::Projections => "projections".into(),
            Output::Flip(a, b) => format!("flip:{a},{b}"),
            Output::InputBias(c) => format!("input_bias:{c}"),
        }
    }
}

pub fn default_outputs() -> Vec<Output> {
    vec![Output::Z, Output::N, Output::Rho, Output::Projections]
}

/// Everything needed to execute a document.
#[derive(Debug, Clone)]
pub struct Job {
    pub circuit: Circuit,
    pub model: CtcModel,
    pub conditional: Option<(String, Coupling)>,
    pub outputs: Vec<Output>,
    pub bias_nodes: usize,
}

/// Parses JSON text into a raw value; syntax errors carry the line number.
pub fn parse_value(text: &str) -> Result<Value, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn parse_circuit_doc(text: &str) -> Result<Job, CliError> {
    let v = parse_value(text)?;
    job_from_value(v)
}

pub fn doc_from_value(v: Value) -> Result<CircuitDoc, CliError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        CliError::Core(CtcError::Config(format!("{path}: {}", e.inner())))
    })
}

pub fn job_from_value(v: Value) -> Result<Job, CliError> {
    let doc = doc_from_value(v)?;
    Ok(doc.to_job()?)
}

fn config(path: &str, msg: impl std::fmt::Display) -> CtcError {
    CtcError::Config(format!("{path}: {msg}"))
}

fn complex_list(path: &str, v: &[f64]) -> Result<Vec<Amplitude>, CtcError> {
    if !v.len().is_multiple_of(2) {
        return Err(config(path, "expected interleaved [re, im] pairs"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(config(path, "non-finite amplitude"));
    }
    Ok(v.chunks(2).map(|p| Amplitude::new(p[0], p[1])).collect())
}

fn interleave(v: &[Amplitude]) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn named_state(label: &str, name: &str) -> Option<PureState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (a, b) = match name {
        "0" => (1.0, 0.0),
        "1" => (0.0, 1.0),
        "+" => (h, h),
        "-" => (h, -h),
        _ => return None,
    };
    PureState::qubit(label, Amplitude::new(a, 0.0), Amplitude::new(b, 0.0)).ok()
}

fn gate_kind(path: &str, g: &GateDoc) -> Result<GateKind, CtcError> {
    let name = g.kind.to_ascii_uppercase();
    let angle_key = match name.as_str() {
        "ROT" | "CROT" | "CCROT" | "CCCROT" => Some("theta"),
        "PHASE" | "CPHASE" => Some("xi"),
        _ => None,
    };
    for k in g.params.keys() {
        if Some(k.as_str()) != angle_key {
            return Err(config(&format!("{path}.params.{k}"), format!("not a parameter of {name}")));
        }
    }
    let angle = || {
        let key = angle_key.expect("angle gate");
        g.params
            .get(key)
            .copied()
            .ok_or_else(|| config(&format!("{path}.params"), format!("{name} needs {key}")))
    };
    if name != "CUSTOM" && (g.matrix.is_some() || g.perturbation) {
        return Err(config(path, "matrix and perturbation apply to custom gates only"));
    }
    Ok(match name.as_str() {
        "X" | "NOT" => GateKind::X,
        "Z" | "PF" => GateKind::Z,
        "ROT" => GateKind::Rot(angle()?),
        "PHASE" => GateKind::Phase(angle()?),
        "SWAP" => GateKind::Swap,
        "CX" | "CNOT" => GateKind::Cx,
        "CZ" | "CPF" => GateKind::Cz,
        "CROT" => GateKind::Crot(angle()?),
        "CPHASE" => GateKind::Cphase(angle()?),
        "CCROT" => GateKind::Ccrot(angle()?),
        "CCCROT" => GateKind::Cccrot(angle()?),
        "TOFFOLI" | "CCX" => GateKind::Toffoli,
        "CUSTOM" => {
            let rows = g
                .matrix
                .as_ref()
                .ok_or_else(|| config(path, "custom gate needs a matrix"))?;
            let d = rows.len();
            let mut m = DMatrix::zeros(d, d);
            for (i, row) in rows.iter().enumerate() {
                let row = complex_list(&format!("{path}.matrix[{i}]"), row)?;
                if row.len() != d {
                    return Err(config(&format!("{path}.matrix[{i}]"), "matrix must be square"));
                }
                for (j, z) in row.into_iter().enumerate() {
                    m[(i, j)] = z;
                }
            }
            GateKind::Custom {
                matrix: m,
                perturbation: g.perturbation,
            }
        }
        other => return Err(config(&format!("{path}.kind"), format!("unknown gate {other}"))),
    })
}

fn gate_doc(g: &ctc_core::Gate) -> GateDoc {
    let mut params = BTreeMap::new();
    let mut matrix = None;
    let mut perturbation = false;
    match &g.kind {
        GateKind::Rot(t) | GateKind::Crot(t) | GateKind::Ccrot(t) | GateKind::Cccrot(t) => {
            params.insert("theta".to_string(), *t);
        }
        GateKind::Phase(x) | GateKind::Cphase(x) => {
            params.insert("xi".to_string(), *x);
        }
        GateKind::Custom {
            matrix: m,
            perturbation: p,
        } => {
            matrix = Some(
                m.row_iter()
                    .map(|r| interleave(&r.iter().copied().collect::<Vec<_>>()))
                    .collect(),
            );
            perturbation = *p;
        }
        _ => {}
    }
    GateDoc {
        kind: g.kind.name().to_string(),
        targets: g.targets.clone(),
        params,
        matrix,
        perturbation,
    }
}

impl ModelDoc {
    pub fn from_model(m: &CtcModel) -> ModelDoc {
        let mut d = ModelDoc::default();
        match m {
            CtcModel::ExactBell => d.kind = "exact_bell".into(),
            CtcModel::NoisyBell { lambda } => {
                d.kind = "noisy_bell".into();
                d.lambda = Some(*lambda);
            }
            CtcModel::Classical { k, floor } => {
                d.kind = "classical".into();
                d.k = Some(*k);
                d.floor = Some(*floor);
            }
            CtcModel::WeightMatrix(w) => {
                d.kind = "weight_matrix".into();
                d.omega = Some(
                    (0..w.dim())
                        .map(|i| (0..w.dim()).map(|j| w.get(i, j)).collect())
                        .collect(),
                );
            }
            CtcModel::DeltaQuadrature {
                theta_nodes,
                xi_nodes,
            } => {
                d.kind = "delta".into();
                d.nodes_theta = Some(*theta_nodes);
                d.nodes_xi = Some(*xi_nodes);
            }
        }
        d
    }

    pub fn to_model(&self) -> Result<CtcModel, CtcError> {
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| config("model", format!("{} needs {key}", self.kind)))
        };
        let unused = |present: bool, key: &str| {
            if present {
                Err(config(&format!("model.{key}"), format!("not used by {}", self.kind)))
            } else {
                Ok(())
            }
        };
        Ok(match self.kind.as_str() {
            "exact_bell" => {
                unused(self.lambda.is_some(), "lambda")?;
                unused(self.k.is_some(), "k")?;
                CtcModel::ExactBell
            }
            "noisy_bell" => {
                unused(self.k.is_some(), "k")?;
                CtcModel::NoisyBell {
                    lambda: need(self.lambda, "lambda")?,
                }
            }
            "classical" => {
                unused(self.lambda.is_some(), "lambda")?;
                CtcModel::Classical {
                    k: need(self.k, "k")?,
                    floor: self.floor.unwrap_or(false),
                }
            }
            "weight_matrix" => {
                let rows = self
                    .omega
                    .as_ref()
                    .ok_or_else(|| config("model", "weight_matrix needs omega"))?;
                let d = rows.len();
                if rows.iter().any(|r| r.len() != d) {
                    return Err(config("model.omega", "matrix must be square"));
                }
                CtcModel::WeightMatrix(WeightMatrix::new(d, rows.concat())?)
            }
            "delta" => CtcModel::DeltaQuadrature {
                theta_nodes: self.nodes_theta.unwrap_or(DEFAULT_NODES),
                xi_nodes: self.nodes_xi.unwrap_or(DEFAULT_NODES),
            },
            other => return Err(config("model.type", format!("unknown model {other}"))),
        })
    }
}

impl CircuitDoc {
    pub fn from_circuit(
        circuit: &Circuit,
        model: &CtcModel,
        conditional: Option<(&str, Coupling)>,
    ) -> CircuitDoc {
        let channels = circuit
            .channels()
            .iter()
            .map(|c| ChannelDoc {
                name: c.label.clone(),
                role: match c.role {
                    Role::Ctc => RoleDoc::Ctc,
                    Role::External => RoleDoc::External,
                },
                init: c.init.as_ref().map(|s| InitDoc::Amplitudes(interleave(s.amplitudes()))),
            })
            .collect();
        let entangled_inits = circuit
            .entangled_inits()
            .iter()
            .map(|e| EntangledDoc {
                channels: e.state.labels().to_vec(),
                amplitudes: interleave(e.state.amplitudes()),
            })
            .collect();
        CircuitDoc {
            channels,
            entangled_inits,
            gates: circuit.gates().iter().map(gate_doc).collect(),
            model: Some(ModelDoc::from_model(model)),
            conditional: conditional.map(|(p, m)| ConditionalDoc {
                power: p.to_string(),
                mode: m.into(),
            }),
            outputs: None,
        }
    }

    pub fn to_job(&self) -> Result<Job, CtcError> {
        let mut channels = Vec::new();
        for (i, c) in self.channels.iter().enumerate() {
            let path = format!("channels[{i}]");
            let ch = match (c.role, &c.init) {
                (RoleDoc::Ctc, None) => Channel::ctc(&c.name),
                (RoleDoc::Ctc, Some(_)) => {
                    return Err(config(&format!("{path}.init"), "CTC channels take no initial state"))
                }
                (RoleDoc::External, None) => Channel::external_entangled(&c.name),
                (RoleDoc::External, Some(InitDoc::Named(n))) => Channel::external(
                    &c.name,
                    named_state(&c.name, n).ok_or_else(|| {
                        config(&format!("{path}.init"), format!("unknown named state {n:?}"))
                    })?,
                ),
                (RoleDoc::External, Some(InitDoc::Amplitudes(v))) => {
                    let amps = complex_list(&format!("{path}.init"), v)?;
                    if amps.len() != 2 {
                        return Err(config(&format!("{path}.init"), "a qubit needs two amplitudes"));
                    }
                    let s = PureState::qubit(&c.name, amps[0], amps[1])?;
                    if (s.norm_sqr() - 1.0).abs() > NORM_TOL {
                        return Err(config(&format!("{path}.init"), "state is not normalized"));
                    }
                    Channel::external(&c.name, s)
                }
            };
            channels.push(ch);
        }
        let mut entangled = Vec::new();
        for (i, e) in self.entangled_inits.iter().enumerate() {
            let path = format!("entangled_inits[{i}]");
            if e.channels.len() > MAX_QUBITS {
                return Err(CtcError::TooManyQubits(e.channels.len()));
            }
            let amps = complex_list(&format!("{path}.amplitudes"), &e.amplitudes)?;
            if amps.len() != 1 << e.channels.len() {
                return Err(config(
                    &format!("{path}.amplitudes"),
                    format!("{} channels need {} amplitudes", e.channels.len(), 1 << e.channels.len()),
                ));
            }
            entangled.push(EntangledInit {
                state: PureState::new(e.channels.clone(), amps)?,
            });
        }
        let mut gates = Vec::new();
        for (i, g) in self.gates.iter().enumerate() {
            let path = format!("gates[{i}]");
            gates.push(make_gate(gate_kind(&path, g)?, &g.targets).map_err(|e| match e {
                CtcError::Config(m) => config(&path, m),
                other => other,
            })?);
        }
        let circuit = build_circuit(channels, entangled, gates)?;
        let model_doc = self.model.clone().unwrap_or(ModelDoc {
            kind: "exact_bell".into(),
            ..ModelDoc::default()
        });
        let model = model_doc.to_model()?;
        if matches!(model, CtcModel::DeltaQuadrature { .. }) && circuit.ctc_labels().len() != 1 {
            return Err(CtcError::Unsupported(format!(
                "the delta model integrates over a single CTC qubit but this circuit has {}; \
                 use noisy_bell, classical or weight_matrix for several CTCs",
                circuit.ctc_labels().len()
            )));
        }
        let outputs = match &self.outputs {
            None => default_outputs(),
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    Output::parse(s).ok_or_else(|| config(&format!("outputs[{i}]"), format!("unknown output {s:?}")))
                })
                .collect::<Result<_, _>>()?,
        };
        Ok(Job {
            circuit,
            model,
            conditional: self.conditional.as_ref().map(|c| (c.power.clone(), c.mode.into())),
            outputs,
            bias_nodes: model_doc.bias_nodes.unwrap_or(DEFAULT_BIAS_NODES),
        })
    }
}

/// Sets the number at a dotted path (`model.lambda`, `gates.0.params.theta`).
/// Fails when the path does not already hold a number.
pub fn set_param(v: &mut Value, path: &str, x: f64) -> Result<(), CtcError> {
    let mut cur = v;
    for part in path.split('.') {
        cur = match cur {
            Value::Object(m) => m.get_mut(part),
            Value::Array(a) => part.parse::<usize>().ok().and_then(move |i| a.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| CtcError::Config(format!("parameter {path} not found in document")))?;
    }
    if !cur.is_number() {
        return Err(CtcError::Config(format!("parameter {path} is not a number")));
    }
    *cur = serde_json::Number::from_f64(x)
        .map(Value::Number)
        .ok_or_else(|| CtcError::Config(format!("{path} = {x} is not finite")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIMPLE: &str = r#"{
        "channels": [
            {"name": "phi", "role": "ctc"},
            {"name": "psi", "role": "external", "init": "+"}
        ],
        "gates": [{"kind": "SWAP", "targets": ["phi", "psi"]}],
        "model": {"type": "exact_bell"}
    }"#;

    #[test]
    fn minimal_simple_loop() {
        let job = parse_circuit_doc(SIMPLE).unwrap();
        assert_eq!(job.circuit.ctc_labels(), vec!["phi"]);
        assert_eq!(job.circuit.external_labels(), vec!["psi"]);
        assert_eq!(job.model, CtcModel::ExactBell);
        assert_eq!(job.outputs, default_outputs());
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = parse_circuit_doc("{\n\"channels\": [\n}").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn unknown_keys_rejected_with_path() {
        let text = SIMPLE.replace("\"role\": \"ctc\"", "\"role\": \"ctc\", \"colour\": 1");
        match parse_circuit_doc(&text).unwrap_err() {
            CliError::Core(CtcError::Config(m)) => assert!(m.starts_with("channels[0]"), "{m}"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn gate_on_reference_rejected() {
        let text = SIMPLE.replace("[\"phi\", \"psi\"]", "[\"phi.ref\", \"psi\"]");
        assert!(matches!(
            parse_circuit_doc(&text).unwrap_err(),
            CliError::Core(CtcError::Config(_))
        ));
    }

    #[test]
    fn delta_with_two_ctcs_is_unsupported() {
        let text = r#"{
            "channels": [
                {"name": "a", "role": "ctc"}, {"name": "b", "role": "ctc"},
                {"name": "psi", "role": "external", "init": "0"}
            ],
            "gates": [{"kind": "CX", "targets": ["a", "b"]}],
            "model": {"type": "delta"}
        }"#;
        match parse_circuit_doc(text).unwrap_err() {
            CliError::Core(CtcError::Unsupported(m)) => assert!(m.contains("noisy_bell")),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn missing_angle_and_stray_param() {
        let text = SIMPLE.replace(
            r#"{"kind": "SWAP", "targets": ["phi", "psi"]}"#,
            r#"{"kind": "ROT", "targets": ["phi"]}"#,
        );
        assert!(parse_circuit_doc(&text).is_err());
        let text = SIMPLE.replace(
            r#"{"kind": "SWAP", "targets": ["phi", "psi"]}"#,
            r#"{"kind": "X", "targets": ["phi"], "params": {"theta": 1}}"#,
        );
        assert!(parse_circuit_doc(&text).is_err());
    }

    #[test]
    fn round_trip_through_document() {
        let job = parse_circuit_doc(SIMPLE).unwrap();
        let doc = CircuitDoc::from_circuit(&job.circuit, &job.model, None);
        let text = serde_json::to_string(&doc).unwrap();
        let again = parse_circuit_doc(&text).unwrap();
        assert_eq!(again.circuit, job.circuit);
    }

    #[test]
    fn set_param_requires_existing_number() {
        let mut v = parse_value(SIMPLE).unwrap();
        assert!(set_param(&mut v, "model.lambda", 0.1).is_err());
        let mut v = parse_value(&SIMPLE.replace("exact_bell\"", "noisy_bell\", \"lambda\": 0.5")).unwrap();
        set_param(&mut v, "model.lambda", 0.1).unwrap();
        assert_eq!(v["model"]["lambda"], 0.1);
    }

    #[test]
    fn outputs_parse() {
        assert_eq!(Output::parse("flip:a, b"), Some(Output::Flip("a".into(), "b".into())));
        assert_eq!(Output::parse("input_bias:psi"), Some(Output::InputBias("psi".into())));
        assert_eq!(Output::parse("energy"), None);
    }
}
