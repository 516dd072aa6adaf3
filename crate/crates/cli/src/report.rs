//! Structured run reports.

use std::collections::BTreeMap;

use ctc_core::catalog::{ScenarioInfo, Value as Expected, VerifyReport, VerifyStatus};
use ctc_core::{Amplitude, CtcModel, DensityOperator, PostSelectionResult, ProjectionSet};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::Output;

pub const MEASURE: &str = "flat-theta-xi";
pub const CONVENTIONS: &str = "big-endian kets; each CTC channel c has a reference qubit c.ref; \
     qubit order [c1.ref, c1, ..., externals]; Bell labels B, -, N, -N over (ref, loop), \
     comma-joined across CTCs; rho is trace one, Z reported separately";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoReport {
    pub dim: usize,
    pub labels: Vec<String>,
    /// Row-major `[re, im]` pairs.
    pub entries: Vec<[f64; 2]>,
}

impl RhoReport {
    pub fn from_density(rho: &DensityOperator) -> RhoReport {
        let d = rho.dim();
        let entries = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| {
                let z = rho.entry(i, j);
                [z.re, z.im]
            })
            .collect();
        RhoReport {
            dim: d,
            labels: rho.labels().to_vec(),
            entries,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Amplitude {
        let [re, im] = self.entries[i * self.dim + j];
        Amplitude::new(re, im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub label: String,
    /// `‖ψ̄_L‖²`.
    pub weight: f64,
    pub model_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub measure: String,
    pub normalization: String,
    pub conventions: String,
    pub tolerance: f64,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub status: String,
    pub model: String,
    #[serde(rename = "Z")]
    pub z: f64,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<RhoReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_loop: Option<RhoReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub projections: Vec<ProjectionReport>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub derived: BTreeMap<String, f64>,
    pub metadata: Metadata,
}

fn metadata(model: &CtcModel, tolerance: f64) -> Metadata {
    Metadata {
        measure: MEASURE.into(),
        normalization: model.measure(),
        conventions: CONVENTIONS.into(),
        tolerance,
        tool_version: env!("CARGO_PKG_VERSION").into(),
    }
}

fn projections(set: &ProjectionSet) -> Vec<ProjectionReport> {
    set.iter()
        .map(|e| ProjectionReport {
            label: e.label.clone(),
            weight: e.norm_sqr,
            model_weight: e.weight,
        })
        .collect()
}

impl RunReport {
    pub fn from_result(
        r: &PostSelectionResult,
        outputs: &[Output],
        derived: BTreeMap<String, f64>,
        tolerance: f64,
    ) -> RunReport {
        let want = |o: Output| outputs.contains(&o);
        RunReport {
            status: "ok".into(),
            model: r.model.name().into(),
            z: r.z,
            n: r.n.filter(|_| want(Output::N)),
            rho: want(Output::Rho).then(|| RhoReport::from_density(&r.rho)),
            rho_loop: r
                .rho_loop
                .as_ref()
                .filter(|_| want(Output::RhoLoop))
                .map(RhoReport::from_density),
            projections: if want(Output::Projections) {
                projections(&r.projections)
            } else {
                Vec::new()
            },
            derived,
            metadata: metadata(&r.model, tolerance),
        }
    }

    /// Report for a paradoxical circuit; the projections are always included.
    pub fn paradox(model: &CtcModel, norm: f64, set: Option<&ProjectionSet>, tolerance: f64) -> RunReport {
        RunReport {
            status: "paradox".into(),
            model: model.name().into(),
            z: norm * norm,
            n: Some(norm),
            rho: None,
            rho_loop: None,
            projections: set.map(projections).unwrap_or_default(),
            derived: BTreeMap::new(),
            metadata: metadata(model, tolerance),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_text<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn expected_value(v: &Expected) -> Value {
    let pairs = |it: &mut dyn Iterator<Item = &Amplitude>| -> Vec<[f64; 2]> { it.map(|z| [z.re, z.im]).collect() };
    match v {
        Expected::Paradox => json!("paradox"),
        Expected::Scalar(x) => json!(x),
        Expected::Matrix(m) => {
            let rows: Vec<Vec<[f64; 2]>> = m
                .row_iter()
                .map(|r| pairs(&mut r.iter()))
                .collect();
            json!(rows)
        }
        Expected::State(s) => json!(pairs(&mut s.iter())),
    }
}

pub fn verify_value(r: &VerifyReport) -> Value {
    let status = match r.status {
        VerifyStatus::Passed => "passed",
        VerifyStatus::Failed => "failed",
        VerifyStatus::Skipped => "skipped",
    };
    let checks: Vec<Value> = r
        .checks
        .iter()
        .map(|c| {
            json!({
                "model": c.model,
                "quantity": c.quantity,
                "pass": c.pass,
                "delta": if c.delta.is_finite() { json!(c.delta) } else { json!(null) },
                "tolerance": c.tolerance,
                "expected": expected_value(&c.expected),
                "actual": match &c.actual {
                    Ok(v) => expected_value(v),
                    Err(e) => json!({ "error": e }),
                },
                "note": c.note,
            })
        })
        .collect();
    json!({ "scenario": r.scenario, "status": status, "checks": checks })
}

pub fn scenarios_value(list: &[ScenarioInfo]) -> Value {
    let items: Vec<Value> = list
        .iter()
        .map(|s| {
            let params: Vec<Value> = s
                .params
                .iter()
                .map(|p| json!({ "name": p.name, "default": p.default, "min": p.min, "max": p.max, "doc": p.doc }))
                .collect();
            json!({ "name": s.name, "summary": s.summary, "wiring": s.wiring, "params": params })
        })
        .collect();
    Value::Array(items)
}
