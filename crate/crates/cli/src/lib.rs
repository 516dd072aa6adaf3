//! Document- and scenario-driven front end for the CTC simulator.

pub mod doc;
pub mod report;

use std::collections::BTreeMap;

use ctc_core::analysis::{flip_probability, input_bias};
use ctc_core::catalog::{build_scenario, list_scenarios, verify_scenario, Params, VerifyReport};
use ctc_core::engine::DEFAULT_NODES;
use ctc_core::{CtcError, CtcModel, PostSelectionResult, Simulator};
use serde_json::Value;
use thiserror::Error;

pub use doc::{parse_circuit_doc, CircuitDoc, Job, Output};
pub use report::{ProjectionReport, RhoReport, RunReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_PARADOX: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Core(#[from] CtcError),
    #[error("{0}")]
    Io(String),
}

/// A finished run: the report plus whether the circuit was paradoxical.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: RunReport,
    pub paradox: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.paradox {
            EXIT_PARADOX
        } else {
            EXIT_OK
        }
    }
}

fn run_model(sim: &Simulator, job: &Job) -> Result<PostSelectionResult, CtcError> {
    match &job.conditional {
        Some((power, mode)) => sim.run_conditional(&job.circuit, power, &job.model, *mode),
        None => sim.run(&job.circuit, &job.model),
    }
}

fn derived(sim: &Simulator, job: &Job, r: &PostSelectionResult) -> Result<BTreeMap<String, f64>, CtcError> {
    let mut out = BTreeMap::new();
    for o in &job.outputs {
        match o {
            Output::Flip(a, b) => {
                out.insert(o.key(), flip_probability(r, a, b)?);
            }
            Output::InputBias(ch) => {
                let b = input_bias(sim, &job.circuit, ch, &job.model, job.bias_nodes)?;
                let key = o.key();
                let e = |i, j| b.rho_bar.entry(i, j);
                out.insert(format!("{key}.rho00"), e(0, 0).re);
                out.insert(format!("{key}.rho11"), e(1, 1).re);
                out.insert(format!("{key}.rho01.re"), e(0, 1).re);
                out.insert(format!("{key}.rho01.im"), e(0, 1).im);
                out.insert(format!("{key}.z"), b.z_rho);
            }
            _ => {}
        }
    }
    Ok(out)
}

/// Runs a prepared job. Paradoxes are outcomes, not errors.
pub fn execute(sim: &Simulator, job: &Job) -> Result<Outcome, CliError> {
    match run_model(sim, job) {
        Ok(r) => {
            let d = derived(sim, job, &r)?;
            Ok(Outcome {
                report: RunReport::from_result(&r, &job.outputs, d, sim.tolerance),
                paradox: false,
            })
        }
        Err(CtcError::Paradox { norm, projections }) => Ok(Outcome {
            report: RunReport::paradox(&job.model, norm, projections.as_deref(), sim.tolerance),
            paradox: true,
        }),
        Err(e) => Err(e.into()),
    }
}

/// Parses `--set`/`--param` style `key=value` pairs.
pub fn parse_assignment(s: &str) -> Result<(String, f64), CliError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CtcError::Config(format!("expected key=value, got {s:?}")))?;
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| CtcError::Config(format!("{k}: {v:?} is not a number")))?;
    Ok((k.trim().to_string(), x))
}

/// Loads a document and applies numeric overrides at dotted paths.
pub fn load_doc(text: &str, overrides: &[(String, f64)]) -> Result<Value, CliError> {
    let mut v = doc::parse_value(text)?;
    for (path, x) in overrides {
        doc::set_param(&mut v, path, *x)?;
    }
    Ok(v)
}

pub fn run_text(sim: &Simulator, text: &str, overrides: &[(String, f64)]) -> Result<Outcome, CliError> {
    let v = load_doc(text, overrides)?;
    execute(sim, &doc::job_from_value(v)?)
}

/// Model selection for the `scenario` verb.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelChoice {
    pub name: String,
    pub lambda: f64,
    pub k: f64,
    pub nodes: usize,
}

impl Default for ModelChoice {
    fn default() -> Self {
        ModelChoice {
            name: "exact_bell".into(),
            lambda: 0.2,
            k: 0.1,
            nodes: DEFAULT_NODES,
        }
    }
}

impl ModelChoice {
    pub fn to_model(&self) -> Result<CtcModel, CtcError> {
        Ok(match self.name.as_str() {
            "exact_bell" => CtcModel::ExactBell,
            "noisy_bell" => CtcModel::NoisyBell { lambda: self.lambda },
            "classical" => CtcModel::Classical { k: self.k, floor: false },
            "classical_floor" => CtcModel::Classical { k: self.k, floor: true },
            "delta" => CtcModel::DeltaQuadrature {
                theta_nodes: self.nodes,
                xi_nodes: self.nodes,
            },
            other => {
                return Err(CtcError::Config(format!(
                    "unknown model {other}; expected exact_bell, noisy_bell, classical, classical_floor or delta"
                )))
            }
        })
    }
}

pub fn scenario_job(name: &str, params: &Params, model: &CtcModel, extra: &[Output]) -> Result<Job, CliError> {
    let sc = build_scenario(name, params)?;
    let mut outputs = doc::default_outputs();
    outputs.extend(extra.iter().cloned());
    Ok(Job {
        circuit: sc.circuit,
        model: model.clone(),
        conditional: sc.conditional,
        outputs,
        bias_nodes: doc::DEFAULT_BIAS_NODES,
    })
}

/// The scenario's circuit as a standalone document.
pub fn scenario_doc(name: &str, params: &Params, model: &CtcModel) -> Result<CircuitDoc, CliError> {
    let sc = build_scenario(name, params)?;
    let cond = sc.conditional.as_ref().map(|(p, m)| (p.as_str(), *m));
    Ok(CircuitDoc::from_circuit(&sc.circuit, model, cond))
}

pub fn verify_json(r: &VerifyReport) -> Value {
    report::verify_value(r)
}

pub fn verify(name: &str, params: &Params, model: &CtcModel) -> Result<VerifyReport, CliError> {
    Ok(verify_scenario(name, params, model)?)
}

pub fn scenarios_json() -> Value {
    report::scenarios_value(&list_scenarios())
}

/// Grid of `steps` points from `from` to `to` inclusive.
pub fn grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps == 0 {
        return Err(CtcError::Config("sweep needs at least one step".into()).into());
    }
    if !(from.is_finite() && to.is_finite()) {
        return Err(CtcError::Config("sweep bounds must be finite".into()).into());
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    let h = (to - from) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i == steps - 1 { to } else { from + h * i as f64 })
        .collect())
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub report: RunReport,
}

pub fn sweep(
    sim: &Simulator,
    text: &str,
    overrides: &[(String, f64)],
    param: &str,
    points: &[f64],
) -> Result<Vec<SweepRow>, CliError> {
    let base = load_doc(text, overrides)?;
    let mut probe = base.clone();
    doc::set_param(&mut probe, param, points.first().copied().unwrap_or(0.0))?;
    points
        .iter()
        .map(|&x| {
            let mut v = base.clone();
            doc::set_param(&mut v, param, x)?;
            let out = execute(sim, &doc::job_from_value(v)?)?;
            Ok(SweepRow {
                value: x,
                report: out.report,
            })
        })
        .collect()
}

/// Delimited table: one row per grid point, derived values as extra columns.
pub fn sweep_csv(param: &str, rows: &[SweepRow]) -> String {
    let mut keys: Vec<&String> = rows.iter().flat_map(|r| r.report.derived.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut s = format!("{param},status,Z,N");
    for k in &keys {
        s.push(',');
        s.push_str(k);
    }
    s.push('\n');
    let num = |x: Option<f64>| x.map(|v| serde_json::to_string(&v).unwrap_or_default()).unwrap_or_default();
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{}",
            num(Some(r.value)),
            r.report.status,
            num(Some(r.report.z)),
            num(r.report.n)
        ));
        for k in &keys {
            s.push(',');
            s.push_str(&num(r.report.derived.get(*k).copied()));
        }
        s.push('\n');
    }
    s
}
