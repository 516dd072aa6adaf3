//! Channels, gates and circuits.
//!
//! Gate conventions (controls always come first in the target list):
//!
//! * `Rot(θ) = [[cos θ, −sin θ], [sin θ, cos θ]]`
//! * `Phase(ξ) = diag(1, e^{iξ})`, `Z = diag(1, −1)`
//! * controlled gates act on the last target when every control reads 1.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{CtcError, Result};
use crate::state::{re, Amplitude, Operator, PureState, MAX_QUBITS, ONE, ZERO};

/// Tolerance used when checking that a gate matrix is unitary.
pub const UNITARY_TOL: f64 = 1e-10;

/// Suffix of the reference qubit paired with each CTC channel.
pub const REF_SUFFIX: &str = ".ref";

pub fn reference_label(ctc: &str) -> String {
    format!("{ctc}{REF_SUFFIX}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Ctc,
    External,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub label: String,
    pub role: Role,
    /// Single-qubit initial state; CTC channels carry none.
    pub init: Option<PureState>,
}

impl Channel {
    pub fn ctc(label: &str) -> Self {
        Channel {
            label: label.into(),
            role: Role::Ctc,
            init: None,
        }
    }

    pub fn external(label: &str, init: PureState) -> Self {
        Channel {
            label: label.into(),
            role: Role::External,
            init: Some(init),
        }
    }

    /// External channel whose state comes from an entangled initializer.
    pub fn external_entangled(label: &str) -> Self {
        Channel {
            label: label.into(),
            role: Role::External,
            init: None,
        }
    }
}

/// Joint initial state over several external channels.
#[derive(Debug, Clone, PartialEq)]
pub struct EntangledInit {
    pub state: PureState,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    X,
    Z,
    Rot(f64),
    Phase(f64),
    Swap,
    Cx,
    Cz,
    Crot(f64),
    Cphase(f64),
    Ccrot(f64),
    Cccrot(f64),
    Toffoli,
    /// Arbitrary matrix; non-unitary matrices are allowed only when
    /// `perturbation` is set.
    Custom {
        matrix: DMatrix<Amplitude>,
        perturbation: bool,
    },
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::X | GateKind::Z | GateKind::Rot(_) | GateKind::Phase(_) => 1,
            GateKind::Swap | GateKind::Cx | GateKind::Cz | GateKind::Crot(_) | GateKind::Cphase(_) => 2,
            GateKind::Ccrot(_) | GateKind::Toffoli => 3,
            GateKind::Cccrot(_) => 4,
            GateKind::Custom { matrix, .. } => matrix.nrows().trailing_zeros() as usize,
        }
    }

    /// Number of leading targets that act purely as controls.
    pub fn num_controls(&self) -> usize {
        match self {
            GateKind::Cx | GateKind::Cz | GateKind::Crot(_) | GateKind::Cphase(_) => 1,
            GateKind::Ccrot(_) | GateKind::Toffoli => 2,
            GateKind::Cccrot(_) => 3,
            _ => 0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::Rot(_) => "ROT",
            GateKind::Phase(_) => "PHASE",
            GateKind::Swap => "SWAP",
            GateKind::Cx => "CX",
            GateKind::Cz => "CZ",
            GateKind::Crot(_) => "CROT",
            GateKind::Cphase(_) => "CPHASE",
            GateKind::Ccrot(_) => "CCROT",
            GateKind::Cccrot(_) => "CCCROT",
            GateKind::Toffoli => "TOFFOLI",
            GateKind::Custom { .. } => "CUSTOM",
        }
    }

    fn angle(&self) -> Option<f64> {
        match self {
            GateKind::Rot(t)
            | GateKind::Phase(t)
            | GateKind::Crot(t)
            | GateKind::Cphase(t)
            | GateKind::Ccrot(t)
            | GateKind::Cccrot(t) => Some(*t),
            _ => None,
        }
    }

    /// The operator on all targets, controls included.
    pub fn operator(&self) -> Result<Operator> {
        let nc = self.num_controls();
        match self {
            GateKind::Custom { matrix, .. } => Operator::new(matrix.clone()),
            GateKind::Swap => Operator::from_rows(&[
                &[ONE, ZERO, ZERO, ZERO],
                &[ZERO, ZERO, ONE, ZERO],
                &[ZERO, ONE, ZERO, ZERO],
                &[ZERO, ZERO, ZERO, ONE],
            ]),
            _ => controlled(&self.target_block(), nc),
        }
    }

    /// 2x2 block applied to the last target.
    fn target_block(&self) -> [[Amplitude; 2]; 2] {
        match self {
            GateKind::X | GateKind::Cx | GateKind::Toffoli => [[ZERO, ONE], [ONE, ZERO]],
            GateKind::Z | GateKind::Cz => [[ONE, ZERO], [ZERO, re(-1.0)]],
            GateKind::Phase(x) | GateKind::Cphase(x) => {
                [[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, *x)]]
            }
            GateKind::Rot(t) | GateKind::Crot(t) | GateKind::Ccrot(t) | GateKind::Cccrot(t) => {
                let (s, c) = t.sin_cos();
                [[re(c), re(-s)], [re(s), re(c)]]
            }
            GateKind::Swap | GateKind::Custom { .. } => unreachable!("no single-qubit block"),
        }
    }
}

fn controlled(block: &[[Amplitude; 2]; 2], controls: usize) -> Result<Operator> {
    let d = 1 << (controls + 1);
    let mut m = DMatrix::<Amplitude>::identity(d, d);
    let top = d - 2;
    for i in 0..2 {
        for j in 0..2 {
            m[(top + i, top + j)] = block[i][j];
        }
    }
    Operator::new(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<String>,
}

impl Gate {
    pub fn targets(&self) -> Vec<&str> {
        self.targets.iter().map(String::as_str).collect()
    }

    pub fn operator(&self) -> Result<Operator> {
        self.kind.operator()
    }

    pub fn controls(&self) -> &[String] {
        &self.targets[..self.kind.num_controls()]
    }

    pub fn acted_on(&self) -> &[String] {
        &self.targets[self.kind.num_controls()..]
    }
}

/// Validates arity, angles and (for custom gates) unitarity.
pub fn make_gate<S: AsRef<str>>(kind: GateKind, targets: &[S]) -> Result<Gate> {
    let targets: Vec<String> = targets.iter().map(|s| s.as_ref().to_string()).collect();
    if let GateKind::Custom {
        matrix,
        perturbation,
    } = &kind
    {
        let op = Operator::new(matrix.clone())?;
        if !perturbation && !op.is_unitary(UNITARY_TOL) {
            return Err(CtcError::Config(format!(
                "custom gate is not unitary (defect {:e}); flag it as a perturbation",
                op.unitarity_defect()
            )));
        }
    }
    if let Some(t) = kind.angle() {
        if !t.is_finite() {
            return Err(CtcError::Config(format!("{} angle is not finite", kind.name())));
        }
    }
    if targets.len() != kind.arity() {
        return Err(CtcError::Arity {
            expected: kind.arity(),
            got: targets.len(),
        });
    }
    for (i, t) in targets.iter().enumerate() {
        if targets[..i].contains(t) {
            return Err(CtcError::Config(format!(
                "{} repeats target {t}",
                kind.name()
            )));
        }
    }
    Ok(Gate { kind, targets })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    channels: Vec<Channel>,
    entangled: Vec<EntangledInit>,
    gates: Vec<Gate>,
}

/// Builds and validates a circuit, reporting the first violation.
pub fn build_circuit(
    channels: Vec<Channel>,
    entangled: Vec<EntangledInit>,
    gates: Vec<Gate>,
) -> Result<Circuit> {
    let c = Circuit {
        channels,
        entangled,
        gates,
    };
    c.check()?;
    Ok(c)
}

impl Circuit {
    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn entangled_inits(&self) -> &[EntangledInit] {
        &self.entangled
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn labels(&self) -> Vec<&str> {
        self.channels.iter().map(|c| c.label.as_str()).collect()
    }

    pub fn ctc_labels(&self) -> Vec<&str> {
        self.channels
            .iter()
            .filter(|c| c.role == Role::Ctc)
            .map(|c| c.label.as_str())
            .collect()
    }

    pub fn external_labels(&self) -> Vec<&str> {
        self.channels
            .iter()
            .filter(|c| c.role == Role::External)
            .map(|c| c.label.as_str())
            .collect()
    }

    pub fn role(&self, label: &str) -> Option<Role> {
        self.channels.iter().find(|c| c.label == label).map(|c| c.role)
    }

    /// Replaces the single-qubit initial state of an external channel.
    pub fn with_external_init(&self, label: &str, init: PureState) -> Result<Circuit> {
        let mut c = self.clone();
        let ch = c
            .channels
            .iter_mut()
            .find(|ch| ch.label == label)
            .ok_or_else(|| CtcError::Label(label.into()))?;
        if ch.role != Role::External || ch.init.is_none() {
            return Err(CtcError::Config(format!(
                "{label} is not an external channel with its own initial state"
            )));
        }
        ch.init = Some(init.relabeled(&[label])?);
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            None => Ok(()),
            Some(v) => Err(v),
        }
    }

    /// All violations as messages; empty when the circuit is well formed.
    pub fn validate(&self) -> Vec<String> {
        self.violations().into_iter().map(|e| e.to_string()).collect()
    }

    fn violations(&self) -> Vec<CtcError> {
        let mut out = Vec::new();
        let labels = self.labels();
        let refs: Vec<String> = self.ctc_labels().iter().map(|l| reference_label(l)).collect();
        for (i, ch) in self.channels.iter().enumerate() {
            if labels[..i].contains(&ch.label.as_str()) {
                out.push(CtcError::Config(format!("duplicate channel label {}", ch.label)));
            }
            if refs.contains(&ch.label) {
                out.push(CtcError::LabelCollision(ch.label.clone()));
            }
            match (ch.role, &ch.init) {
                (Role::Ctc, Some(_)) => out.push(CtcError::Config(format!(
                    "CTC channel {} must not carry an initial state",
                    ch.label
                ))),
                (Role::External, Some(s)) => {
                    if s.num_qubits() != 1 {
                        out.push(CtcError::Config(format!(
                            "initial state of {} must be a single qubit",
                            ch.label
                        )));
                    }
                }
                _ => {}
            }
        }
        let total = 2 * self.ctc_labels().len() + self.external_labels().len();
        if total > MAX_QUBITS {
            out.push(CtcError::TooManyQubits(total));
        }
        // Each external channel initialized exactly once.
        for ch in self.channels.iter().filter(|c| c.role == Role::External) {
            let own = ch.init.is_some() as usize;
            let shared = self
                .entangled
                .iter()
                .filter(|e| e.state.labels().contains(&ch.label))
                .count();
            if own + shared != 1 {
                out.push(CtcError::Config(format!(
                    "external channel {} initialized {} times",
                    ch.label,
                    own + shared
                )));
            }
        }
        for e in &self.entangled {
            for l in e.state.labels() {
                match self.role(l) {
                    None => out.push(CtcError::Label(l.clone())),
                    Some(Role::Ctc) => out.push(CtcError::Config(format!(
                        "CTC channel {l} must not carry an initial state"
                    ))),
                    Some(Role::External) => {}
                }
            }
            if (e.state.norm_sqr() - 1.0).abs() > 1e-9 {
                out.push(CtcError::InvalidState(format!(
                    "entangled initializer over {:?} is not normalized",
                    e.state.labels()
                )));
            }
        }
        for g in &self.gates {
            for t in &g.targets {
                if refs.contains(t) {
                    out.push(CtcError::Config(format!(
                        "gate {} targets reference qubit {t}",
                        g.kind.name()
                    )));
                } else if !labels.contains(&t.as_str()) {
                    out.push(CtcError::Label(t.clone()));
                }
            }
        }
        out
    }

    /// Joint initial state of the external channels, in declaration order.
    pub fn external_state(&self) -> Result<PureState> {
        let mut s = PureState::scalar(ONE);
        for ch in self.channels.iter().filter(|c| c.role == Role::External) {
            if let Some(init) = &ch.init {
                s = s.tensor(&init.relabeled(&[&ch.label])?)?;
            }
        }
        for e in &self.entangled {
            s = s.tensor(&e.state)?;
        }
        s.permuted(&self.external_labels())
    }

    /// Applies every gate, in order, to `state`.
    pub fn evolve(&self, state: &PureState) -> Result<PureState> {
        let mut s = state.clone();
        for g in &self.gates {
            s.apply_in_place(&g.operator()?, &g.targets())?;
        }
        Ok(s)
    }
}

/// Full unitary over the declared channels (declaration order), built by
/// embedding each gate matrix explicitly and multiplying.
pub fn compile_unitary(circuit: &Circuit) -> Result<Operator> {
    let labels = circuit.labels();
    let n = labels.len();
    let d = 1usize << n;
    let mut total = DMatrix::<Amplitude>::identity(d, d);
    for g in circuit.gates() {
        let op = g.operator()?;
        let pos: Vec<usize> = g
            .targets
            .iter()
            .map(|t| {
                labels
                    .iter()
                    .position(|l| l == t)
                    .ok_or_else(|| CtcError::Label(t.clone()))
            })
            .collect::<Result<_>>()?;
        let bit = |i: usize, p: usize| (i >> (n - 1 - p)) & 1;
        let sub = |i: usize| pos.iter().fold(0, |acc, &p| (acc << 1) | bit(i, p));
        let others: usize = (0..n)
            .filter(|p| !pos.contains(p))
            .map(|p| 1 << (n - 1 - p))
            .sum();
        let embedded = DMatrix::from_fn(d, d, |i, j| {
            if i & others == j & others {
                op.matrix()[(sub(i), sub(j))]
            } else {
                ZERO
            }
        });
        total = embedded * total;
    }
    Operator::new(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::c;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn zero(label: &str) -> PureState {
        PureState::basis(vec![label], 0).unwrap()
    }

    #[test]
    fn arity_checked() {
        assert!(matches!(
            make_gate(GateKind::Cx, &["a"]),
            Err(CtcError::Arity { expected: 2, got: 1 })
        ));
        assert!(make_gate(GateKind::Cccrot(1.0), &["a", "b", "c", "d"]).is_ok());
    }

    #[test]
    fn custom_must_be_unitary_unless_flagged() {
        let eps = 0.1;
        let m = DMatrix::from_row_slice(2, 2, &[re(eps), re(1.0 - eps), re(1.0 - eps), re(eps)]);
        assert!(matches!(
            make_gate(
                GateKind::Custom {
                    matrix: m.clone(),
                    perturbation: false
                },
                &["a"]
            ),
            Err(CtcError::Config(_))
        ));
        assert!(make_gate(
            GateKind::Custom {
                matrix: m,
                perturbation: true
            },
            &["a"]
        )
        .is_ok());
    }

    #[test]
    fn ccrot_half_pi_flips_target_when_controls_set() {
        let op = GateKind::Ccrot(PI / 2.0).operator().unwrap();
        let s = PureState::basis(vec!["a", "b", "t"], 0b110).unwrap();
        let out = s.apply_gate(&op, &["a", "b", "t"]).unwrap();
        assert_abs_diff_eq!((out.amplitudes()[0b111] - ONE).norm(), 0.0, epsilon = 1e-15);
        let s = PureState::basis(vec!["a", "b", "t"], 0b100).unwrap();
        let out = s.apply_gate(&op, &["a", "b", "t"]).unwrap();
        assert_eq!(out.amplitudes()[0b100], ONE);
    }

    #[test]
    fn cccrot_matches_explicit_form() {
        let t = 0.7_f64;
        let op = GateKind::Cccrot(t).operator().unwrap();
        let m = op.matrix();
        let (s, co) = t.sin_cos();
        for i in 0..16 {
            for j in 0..16 {
                let mut want = if i == j { ONE } else { ZERO };
                if i == j && (i == 0b1111 || i == 0b1110) {
                    want -= re(1.0 - co);
                }
                if i == 0b1111 && j == 0b1110 {
                    want += re(s);
                }
                if i == 0b1110 && j == 0b1111 {
                    want -= re(s);
                }
                assert_abs_diff_eq!((m[(i, j)] - want).norm(), 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn ctc_with_init_rejected() {
        let mut ch = Channel::ctc("phi");
        ch.init = Some(zero("phi"));
        assert!(matches!(
            build_circuit(vec![ch], vec![], vec![]),
            Err(CtcError::Config(_))
        ));
    }

    #[test]
    fn undeclared_target_rejected() {
        let g = make_gate(GateKind::X, &["nope"]).unwrap();
        assert!(matches!(
            build_circuit(vec![Channel::ctc("phi")], vec![], vec![g]),
            Err(CtcError::Label(_))
        ));
    }

    #[test]
    fn reference_target_rejected() {
        let g = make_gate(GateKind::X, &["phi.ref"]).unwrap();
        assert!(matches!(
            build_circuit(vec![Channel::ctc("phi")], vec![], vec![g]),
            Err(CtcError::Config(_))
        ));
    }

    #[test]
    fn double_initialization_rejected() {
        let pair = PureState::basis(vec!["a", "b"], 0).unwrap();
        let r = build_circuit(
            vec![
                Channel::external("a", zero("a")),
                Channel::external_entangled("b"),
            ],
            vec![EntangledInit { state: pair }],
            vec![],
        );
        assert!(matches!(r, Err(CtcError::Config(_))));
    }

    #[test]
    fn compiled_unitary_matches_gatewise() {
        let psi = PureState::qubit("a", re(0.6), c(0.0, 0.8)).unwrap();
        let circ = build_circuit(
            vec![
                Channel::external("a", psi),
                Channel::external("b", zero("b")),
                Channel::external("c", zero("c")),
            ],
            vec![],
            vec![
                make_gate(GateKind::Rot(0.3), &["b"]).unwrap(),
                make_gate(GateKind::Cx, &["a", "c"]).unwrap(),
                make_gate(GateKind::Ccrot(1.1), &["c", "b", "a"]).unwrap(),
                make_gate(GateKind::Swap, &["a", "b"]).unwrap(),
                make_gate(GateKind::Cphase(0.4), &["b", "c"]).unwrap(),
            ],
        )
        .unwrap();
        let init = circ.external_state().unwrap();
        let by_gate = circ.evolve(&init).unwrap();
        let u = compile_unitary(&circ).unwrap();
        let v = nalgebra::DVector::from_column_slice(init.amplitudes());
        let w = u.matrix() * v;
        for (x, y) in w.iter().zip(by_gate.amplitudes()) {
            assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = 1e-14);
        }
        assert!(u.is_unitary(1e-12));
    }
}
