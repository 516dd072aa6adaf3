use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::Arc;

use nalgebra::DMatrix;

use super::{qubit, Built, Entry, Expectation, ModelSpec, ParamSpec, Params, Quantity, Value};
use crate::circuit::{build_circuit, make_gate, Channel, Circuit, EntangledInit, Gate, GateKind};
use crate::engine::{Coupling, CtcModel, WeightMatrix};
use crate::error::Result;
use crate::state::{Amplitude as C, PureState};

const LAMBDA: f64 = 0.2;
const K: f64 = 0.1;
const DELTA_NODES: usize = 32;
const BIAS_NODES: usize = 16;
const PARADOX_NORM: f64 = 1e-12;

pub static REGISTRY: &[Entry] = &[
    Entry { name: "simple_loop", summary: "loop qubit swapped with one external qubit", wiring: "channels [phi: ctc, psi]; SWAP(phi, psi)", params: p_psi, build: simple_loop },
    Entry { name: "simple_loop_2q", summary: "two loop qubits swapped with an entangled external pair", wiring: "channels [phi1, phi2: ctc, psi1, psi2 (entangled g)]; SWAP(phi1, psi1), SWAP(phi2, psi2)", params: p_gamma, build: simple_loop_2q },
    Entry { name: "twist_pair", summary: "simple loop with non-maximally entangled reference pairs", wiring: "channels [phi: ctc, psi]; SWAP(phi, psi); reference pair replaced", params: p_twist, build: twist_pair },
    Entry { name: "grandfather_not", summary: "loop qubit negated", wiring: "channels [phi: ctc, psi]; X(phi)", params: p_psi, build: grandfather_not },
    Entry { name: "grandfather_perturbed", summary: "negation perturbed towards identity, (1-eps)X + eps I", wiring: "channels [phi: ctc, psi]; CUSTOM((1-eps)X + eps I)(phi)", params: p_eps, build: grandfather_perturbed },
    Entry { name: "grandfather_pf", summary: "loop qubit phase flipped", wiring: "channels [phi: ctc, psi]; Z(phi)", params: p_psi, build: grandfather_pf },
    Entry { name: "grandfather_rot", summary: "loop qubit rotated by pi/2", wiring: "channels [phi: ctc, psi]; ROT(pi/2)(phi)", params: p_psi, build: grandfather_rot },
    Entry { name: "cpf_delta", summary: "controlled phase flip from an external qubit onto the loop", wiring: "channels [phi: ctc, psi]; CZ(psi, phi)", params: p_psi, build: cpf_delta },
    Entry { name: "faulty_gun", summary: "loop qubit rotated by zeta", wiring: "channels [phi: ctc, psi]; ROT(zeta)(phi)", params: p_zeta, build: faulty_gun },
    Entry { name: "cnot_gun", summary: "external qubit controls a NOT on the loop", wiring: "channels [phi: ctc, psi]; CX(psi -> phi)", params: p_psi, build: cnot_gun },
    Entry { name: "cpf_gun", summary: "external qubit controls a phase flip on the loop", wiring: "channels [phi: ctc, psi]; CZ(psi, phi)", params: p_psi, build: cpf_gun },
    Entry { name: "crot_gun", summary: "external qubit controls a rotation of the loop", wiring: "channels [phi: ctc, psi]; CROT(zeta)(psi -> phi)", params: p_psi_zeta, build: crot_gun },
    Entry { name: "phase_gun", summary: "external qubit controls a phase on the loop", wiring: "channels [phi: ctc, psi]; CPHASE(xi)(psi, phi)", params: p_psi_xi, build: phase_gun },
    Entry { name: "unproven_proof_cx", summary: "loop qubit controls a NOT on an external qubit", wiring: "channels [phi: ctc, psi]; CX(phi -> psi)", params: p_psi, build: unproven_proof_cx },
    Entry { name: "unproven_proof_crot", summary: "loop qubit controls a pi/2 rotation of an external qubit", wiring: "channels [phi: ctc, psi]; CROT(pi/2)(phi -> psi)", params: p_psi, build: unproven_proof_crot },
    Entry { name: "unproven_proof_cpf", summary: "loop qubit controls a phase flip of an external qubit", wiring: "channels [phi: ctc, psi]; CZ(phi, psi)", params: p_psi, build: unproven_proof_cpf },
    Entry { name: "twice_watched_pot_product", summary: "loop copied onto two product probes", wiring: "channels [phi: ctc, p1, p2]; CX(phi -> p1), CX(phi -> p2)", params: p_probes, build: twice_watched_pot_product },
    Entry { name: "twice_watched_pot_entangled", summary: "loop copied onto an entangled probe pair", wiring: "channels [phi: ctc, p1, p2 (entangled g)]; CX(phi -> p1), CX(phi -> p2)", params: p_gamma, build: twice_watched_pot_entangled },
    Entry { name: "two_ctc_cx", summary: "one loop qubit drives a second loop and an external qubit", wiring: "channels [phi1, phi2: ctc, psi]; CX(phi1 -> phi2), CX(phi1 -> psi)", params: p_psi, build: two_ctc_cx },
    Entry { name: "mutual_paradox", summary: "two loops fed from one rotated external qubit", wiring: "channels [phi1, phi2: ctc, psi]; CX(psi -> phi1), ROT(zeta)(psi), CX(psi -> phi2)", params: p_mutual, build: mutual_paradox },
    Entry { name: "third_party", summary: "two external qubits jointly drive the loop", wiring: "channels [phi: ctc, psi1, psi2]; CX(psi1 -> phi), CX(psi2 -> phi)", params: p_two_psi, build: third_party },
    Entry { name: "stubborn_spin", summary: "loop measured three times with rotations in between", wiring: "channels [phi: ctc, p1, p2, p3]; CX(phi -> p1), ROT(theta1)(phi), CX(phi -> p2), ROT(theta2)(phi), CX(phi -> p3)", params: p_stubborn, build: stubborn_spin },
    Entry { name: "amnesia_plain", summary: "external bit XORed into the loop and swapped out", wiring: "channels [phi: ctc, psi]; CX(psi -> phi), SWAP(phi, psi)", params: p_psi, build: amnesia_plain },
    Entry { name: "amnesia_entangled", summary: "amnesia circuit on half of an entangled pair", wiring: "channels [phi: ctc, psi, partner (entangled a|00> + b|11>)]; CX(psi -> phi), SWAP(phi, psi)", params: p_psi, build: amnesia_entangled },
    Entry { name: "amnesia_secondary_loop", summary: "amnesia circuit with a second, open loop built from a Bell pair", wiring: "channels [phi: ctc, pair_a, pair_b (Bell), ctl]; ROT(-pi/4)(pair_b), CZ(ctl, pair_a), CX(phi -> pair_a), CX(pair_a -> phi)", params: p_ctl, build: amnesia_secondary_loop },
    Entry { name: "backprop_single", summary: "weakly measured control rotates the loop", wiring: "channels [phi: ctc, ctl, probe]; ROT(theta_s)(ctl), CX(ctl -> probe), ROT(-theta_s)(ctl), CROT(theta_g)(ctl -> phi)", params: p_backprop, build: backprop_single },
    Entry { name: "backprop_chain", summary: "back-propagation through a two-gate chain", wiring: "channels [phi: ctc, c2, c1, probe]; ROT(theta_s)(c1), CX(c1 -> probe), ROT(-theta_s)(c1), CROT(theta_g1)(c1 -> c2), CROT(theta_g2)(c2 -> phi)", params: p_chain, build: backprop_chain },
    Entry { name: "n_controlled_not", summary: "four external qubits each flip the loop", wiring: "channels [phi: ctc, c0, c1, c2, c3]; CX(c0 -> phi), CX(c1 -> phi), CX(c2 -> phi), CX(c3 -> phi)", params: p_alphas, build: n_controlled_not },
    Entry { name: "ccrot_selector", summary: "doubly controlled rotation selecting |11>", wiring: "channels [phi: ctc, psi1, psi2]; CCROT(theta1)(psi1, psi2 -> phi), ROT(theta2)(phi)", params: p_selector2, build: ccrot_selector },
    Entry { name: "cccrot_selector", summary: "triply controlled rotation selecting |111>", wiring: "channels [phi: ctc, psi1, psi2, psi3]; CCCROT(theta1)(psi1, psi2, psi3 -> phi), ROT(theta2)(phi)", params: p_selector3, build: cccrot_selector },
    Entry { name: "parity_ec", summary: "parity of a noisy entangled pair selected by the loop", wiring: "channels [phi: ctc, c1, c2 (entangled noisy pair)]; CX(c1 -> phi), CX(c2 -> phi)", params: p_parity, build: parity_ec },
    Entry { name: "tourist_trap", summary: "loop post-selected only when a power qubit is on", wiring: "channels [phi: ctc, m1, m2, m3, r1, r2, r3, power]; Bell pairs (m_i, r_i); X(m1), X(m2), TOFFOLI(m1, m2 -> power), X(m1), X(m2), CX(m3 -> phi), X(phi)", params: p_tourist, build: tourist_trap },
];

// ---- parameter schemas ----

fn ps(name: &'static str, default: f64, min: f64, max: f64, doc: &'static str) -> ParamSpec {
    ParamSpec { name, default, min, max, doc }
}

macro_rules! qubit_params {
    ($t:literal, $f:literal, $dt:expr, $df:expr) => {
        [
            ps($t, $dt, 0.0, PI, "polar angle: cos(theta)|0> + e^{i phase} sin(theta)|1>"),
            ps($f, $df, -PI, PI, "relative phase"),
        ]
    };
}

fn p_psi() -> Vec<ParamSpec> {
    qubit_params!("psi_theta", "psi_phase", 0.6, 0.4).to_vec()
}

fn p_ctl() -> Vec<ParamSpec> {
    qubit_params!("ctl_theta", "ctl_phase", 0.927295218001612, 0.0).to_vec()
}

fn p_gamma() -> Vec<ParamSpec> {
    vec![
        ps("g00", 0.5, -1.0, 1.0, "amplitude of |00> before normalization"),
        ps("g01", 0.3, -1.0, 1.0, "amplitude of |01> before normalization"),
        ps("g10", -0.2, -1.0, 1.0, "amplitude of |10> before normalization"),
        ps("g11", 0.6, -1.0, 1.0, "amplitude of |11> before normalization"),
    ]
}

fn p_twist() -> Vec<ParamSpec> {
    let mut v = p_psi();
    v.push(ps("chi", 0.7, -PI, PI, "phase of the Bell-like reference pair"));
    v
}

fn p_eps() -> Vec<ParamSpec> {
    let mut v = p_psi();
    v.push(ps("eps", 0.1, 0.0, 1.0, "weight of the identity in the perturbed gate"));
    v
}

fn p_zeta() -> Vec<ParamSpec> {
    let mut v = p_psi();
    v.push(ps("zeta", PI / 3.0, -PI, PI, "rotation angle"));
    v
}

fn p_psi_zeta() -> Vec<ParamSpec> {
    p_zeta()
}

fn p_psi_xi() -> Vec<ParamSpec> {
    let mut v = p_psi();
    v.push(ps("xi", 1.1, -PI, PI, "controlled phase"));
    v
}

fn p_probes() -> Vec<ParamSpec> {
    let mut v = qubit_params!("p1_theta", "p1_phase", 0.0, 0.0).to_vec();
    v.extend(qubit_params!("p2_theta", "p2_phase", 0.0, 0.0));
    v
}

fn p_mutual() -> Vec<ParamSpec> {
    let mut v = p_psi();
    v.push(ps("zeta", FRAC_PI_2, -PI, PI, "rotation between the two copies"));
    v
}

fn p_two_psi() -> Vec<ParamSpec> {
    let mut v = qubit_params!("psi1_theta", "psi1_phase", 0.6, 0.4).to_vec();
    v.extend(qubit_params!("psi2_theta", "psi2_phase", 1.1, -0.3));
    v
}

fn p_stubborn() -> Vec<ParamSpec> {
    vec![
        ps("theta1", 0.5, -PI, PI, "first rotation"),
        ps("theta2", 0.3, -PI, PI, "second rotation"),
    ]
}

fn p_backprop() -> Vec<ParamSpec> {
    vec![
        ps("theta_s", 0.4, -PI, PI, "strength of the probe measurement"),
        ps("theta_g", 1.0, -PI, PI, "loop rotation controlled by the probe"),
    ]
}

fn p_chain() -> Vec<ParamSpec> {
    vec![
        ps("theta_s", 0.4, -PI, PI, "strength of the probe measurement"),
        ps("theta_g1", 1.0, -PI, PI, "rotation of c2 controlled by c1"),
        ps("theta_g2", 0.7, -PI, PI, "loop rotation controlled by c2"),
    ]
}

fn p_alphas() -> Vec<ParamSpec> {
    vec![
        ps("alpha0", 0.9, 0.0, 1.0, "real amplitude of |0> on c0"),
        ps("alpha1", 0.8, 0.0, 1.0, "real amplitude of |0> on c1"),
        ps("alpha2", 0.7, 0.0, 1.0, "real amplitude of |0> on c2"),
        ps("alpha3", 0.6, 0.0, 1.0, "real amplitude of |0> on c3"),
    ]
}

fn p_selector2() -> Vec<ParamSpec> {
    let mut v = qubit_params!("psi1_theta", "psi1_phase", 0.6, 0.4).to_vec();
    v.extend(qubit_params!("psi2_theta", "psi2_phase", 1.1, -0.3));
    v.push(ps("theta1", FRAC_PI_2, -PI, PI, "controlled rotation"));
    v.push(ps("theta2", FRAC_PI_2, -PI, PI, "unconditional rotation"));
    v
}

fn p_selector3() -> Vec<ParamSpec> {
    let mut v = p_selector2();
    let at = v.len() - 2;
    v.splice(at..at, qubit_params!("psi3_theta", "psi3_phase", 0.9, 0.2));
    v
}

fn p_parity() -> Vec<ParamSpec> {
    vec![
        ps("psi_theta", 0.6, 0.0, PI, "encoded state cos(theta)|00> + sin(theta)|11>"),
        ps("eps", 0.1, 0.0, 1.0, "bit-flip probability of the channel"),
    ]
}

fn p_tourist() -> Vec<ParamSpec> {
    vec![ps("mode", 0.0, 0.0, 1.0, "renormalization: 0 coupled, 1 insulated")]
}

// ---- value helpers ----

fn amp(p: &Params, prefix: &str) -> (C, C) {
    let t = p[&format!("{prefix}_theta")];
    let f = p[&format!("{prefix}_phase")];
    (C::new(t.cos(), 0.0), C::from_polar(t.sin(), f))
}

fn r(x: f64) -> C {
    C::new(x, 0.0)
}

fn n2(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn kron(a: &[C], b: &[C]) -> Vec<C> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

fn scaled(v: &[C], w: C) -> Vec<C> {
    v.iter().map(|z| z * w).collect()
}

fn outer(v: &[C]) -> DMatrix<C> {
    DMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
}

/// Trace-one mixture `Σ w |v⟩⟨v|`.
fn mix(terms: &[(f64, Vec<C>)]) -> Value {
    let d = terms[0].1.len();
    let mut m = DMatrix::zeros(d, d);
    for (w, v) in terms {
        m += outer(v) * r(*w);
    }
    let t: f64 = (0..d).map(|i| m[(i, i)].re).sum();
    Value::Matrix(m / r(t))
}

fn diag(v: &[f64]) -> Value {
    Value::Matrix(DMatrix::from_fn(v.len(), v.len(), |i, j| if i == j { r(v[i]) } else { r(0.0) }))
}

fn matrix(m: DMatrix<C>) -> Value {
    Value::Matrix(m)
}

fn sc(x: f64) -> Value {
    Value::Scalar(x)
}

fn state(v: Vec<C>) -> Value {
    Value::State(v)
}

fn bell_wb(l: f64) -> f64 {
    1.0 - 0.75 * l
}

fn bell_wo(l: f64) -> f64 {
    l / 4.0
}

// ---- model shorthands ----

fn bell() -> ModelSpec {
    ModelSpec::Model(CtcModel::ExactBell)
}

fn noisy() -> ModelSpec {
    ModelSpec::Model(CtcModel::NoisyBell { lambda: LAMBDA })
}

fn classical() -> ModelSpec {
    ModelSpec::Model(CtcModel::Classical { k: K, floor: false })
}

fn floor() -> ModelSpec {
    ModelSpec::Model(CtcModel::Classical { k: K, floor: true })
}

fn delta() -> ModelSpec {
    ModelSpec::Model(CtcModel::DeltaQuadrature {
        theta_nodes: DELTA_NODES,
        xi_nodes: DELTA_NODES,
    })
}

fn ex<F>(model: ModelSpec, quantity: Quantity, note: &'static str, f: F) -> Expectation
where
    F: Fn(&Params, &ModelSpec) -> Value + Send + Sync + 'static,
{
    Expectation {
        model,
        quantity,
        value: Arc::new(f),
        note,
    }
}

fn proj(l: &str) -> Quantity {
    Quantity::ProjectedState(l.into())
}

fn pnorm(l: &str) -> Quantity {
    Quantity::ProjectionNorm(l.into())
}

// ---- circuit helpers ----

fn gate(kind: GateKind, targets: &[&str]) -> Result<Gate> {
    make_gate(kind, targets)
}

fn ext(label: &str, p: &Params, prefix: &str) -> Result<Channel> {
    Ok(Channel::external(label, qubit(label, p, prefix)?))
}

fn zero(label: &str) -> Result<Channel> {
    Ok(Channel::external(label, PureState::qubit_angles(label, 0.0, 0.0)?))
}

fn entangled(labels: &[&str], amps: Vec<C>) -> Result<EntangledInit> {
    let n = n2(&amps).sqrt();
    Ok(EntangledInit {
        state: PureState::new(labels.to_vec(), amps.into_iter().map(|a| a / n).collect())?,
    })
}

fn built(circuit: Circuit, expectations: Vec<Expectation>) -> Result<Built> {
    Ok(Built {
        circuit,
        expectations,
        conditional: None,
    })
}

fn one_loop(p: &Params, gates: Vec<Result<Gate>>) -> Result<Circuit> {
    build_circuit(
        vec![Channel::ctc("phi"), ext("psi", p, "psi")?],
        vec![],
        gates.into_iter().collect::<Result<_>>()?,
    )
}

fn gamma(p: &Params) -> Vec<C> {
    let g: Vec<C> = ["g00", "g01", "g10", "g11"].iter().map(|k| r(p[*k])).collect();
    let n = n2(&g).sqrt();
    g.into_iter().map(|z| z / n).collect()
}

/// For one CTC the four Bell projections exhaust the output, so
/// `Z = (1-3λ/4)N² + (λ/4)(1-N²)`.
fn noisy_z_one_loop(nb2: f64, l: f64) -> f64 {
    (1.0 - l) * nb2 + l / 4.0
}

// ---- scenarios ----

fn simple_loop(p: &Params) -> Result<Built> {
    let c = one_loop(p, vec![gate(GateKind::Swap, &["phi", "psi"])])?;
    let e = vec![
        ex(bell(), Quantity::N, "N = 1/2", |_, _| sc(0.5)),
        ex(bell(), proj("B"), "psi_B = psi/2", |p, _| {
            let (a, b) = amp(p, "psi");
            state(vec![a / 2.0, b / 2.0])
        }),
        ex(bell(), Quantity::Rho, "output equals the input", |p, _| {
            let (a, b) = amp(p, "psi");
            mix(&[(1.0, vec![a, b])])
        }),
        ex(noisy(), Quantity::Z, "Z = 1/4 for every lambda", |_, _| sc(0.25)),
        ex(noisy(), Quantity::Rho, "depolarized: (1-l)|psi><psi| + (l/2)I", |p, s| {
            let (a, b) = amp(p, "psi");
            let l = s.lambda();
            let m = outer(&[a, b]) * r(1.0 - l) + DMatrix::identity(2, 2) * r(l / 2.0);
            matrix(m)
        }),
        ex(classical(), Quantity::Z, "Z = 1", |_, _| sc(1.0)),
        ex(classical(), Quantity::Rho, "diag((1-k)|a|^2 + k|b|^2, (1-k)|b|^2 + k|a|^2)", |p, s| {
            let (a, b) = amp(p, "psi");
            let k = s.k();
            let (a2, b2) = (a.norm_sqr(), b.norm_sqr());
            diag(&[(1.0 - k) * a2 + k * b2, (1.0 - k) * b2 + k * a2])
        }),
        ex(delta(), Quantity::Z, "Z = pi^2", |_, _| sc(PI * PI)),
        ex(
            delta(),
            Quantity::Rho,
            "entrywise rho00 = |a|^2/2 + 1/4, rho01 = a b*/4, i.e. (|psi><psi| + diag(|a|^2,|b|^2) + I)/4; the compact form |psi><psi|/2 + I/4 only matches the diagonal",
            delta_simple_rho,
        ),
        ex(delta(), Quantity::RhoLoop, "loop distribution equals the output", delta_simple_rho),
    ];
    built(c, e)
}

fn delta_simple_rho(p: &Params, _: &ModelSpec) -> Value {
    let (a, b) = amp(p, "psi");
    let m = outer(&[a, b]) + DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![r(a.norm_sqr()), r(b.norm_sqr())]))
        + DMatrix::identity(2, 2);
    matrix(m / r(4.0))
}

fn simple_loop_2q(p: &Params) -> Result<Built> {
    let c = build_circuit(
        vec![
            Channel::ctc("phi1"),
            Channel::ctc("phi2"),
            Channel::external_entangled("psi1"),
            Channel::external_entangled("psi2"),
        ],
        vec![entangled(&["psi1", "psi2"], gamma(p))?],
        vec![
            gate(GateKind::Swap, &["phi1", "psi1"])?,
            gate(GateKind::Swap, &["phi2", "psi2"])?,
        ],
    )?;
    let e = vec![
        ex(bell(), Quantity::N, "N = 1/4", |_, _| sc(0.25)),
        ex(bell(), proj("B,B"), "psi_BB = g/4", |p, _| state(scaled(&gamma(p), r(0.25)))),
        ex(noisy(), Quantity::Z, "Z = 1/16", |_, _| sc(1.0 / 16.0)),
        ex(noisy(), Quantity::Rho, "independent depolarizing on each qubit", |p, s| {
            let g = gamma(p);
            let l = s.lambda();
            let paulis = pauli_2x2();
            let w = [bell_wb(l), bell_wo(l), bell_wo(l), bell_wo(l)];
            let mut terms = Vec::new();
            for (i, s1) in paulis.iter().enumerate() {
                for (j, s2) in paulis.iter().enumerate() {
                    let op = s1.kronecker(s2);
                    let v = &op * nalgebra::DVector::from_vec(g.clone());
                    terms.push((w[i] * w[j], v.iter().copied().collect()));
                }
            }
            mix(&terms)
        }),
        ex(floor(), Quantity::Z, "Z = 1", |_, _| sc(1.0)),
        ex(floor(), Quantity::Rho, "(k/4)I + (1-k)diag|g|^2", |p, s| {
            let g = gamma(p);
            let k = s.k();
            diag(&g.iter().map(|z| k / 4.0 + (1.0 - k) * z.norm_sqr()).collect::<Vec<_>>())
        }),
    ];
    built(c, e)
}

fn pauli_2x2() -> [DMatrix<C>; 4] {
    let o = r(0.0);
    let i1 = r(1.0);
    [
        DMatrix::from_row_slice(2, 2, &[i1, o, o, i1]),
        DMatrix::from_row_slice(2, 2, &[i1, o, o, -i1]),
        DMatrix::from_row_slice(2, 2, &[o, i1, i1, o]),
        DMatrix::from_row_slice(2, 2, &[o, C::new(0.0, -1.0), C::new(0.0, 1.0), o]),
    ]
}

fn twist_pair(p: &Params) -> Result<Built> {
    let c = one_loop(p, vec![gate(GateKind::Swap, &["phi", "psi"])])?;
    let h = 0.5;
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let e = vec![
        ex(
            ModelSpec::ReferencePair(vec![r(s2), r(h), r(0.0), r(h)]),
            proj("pair"),
            "distorted signal psi/2 + (b|0> + a|1>)/sqrt(8)",
            |p, _| {
                let (a, b) = amp(p, "psi");
                let q = 8f64.sqrt();
                state(vec![a / 2.0 + b / q, b / 2.0 + a / q])
            },
        ),
        ex(
            ModelSpec::ReferencePair(vec![r(h), r(h), r(h), r(-h)]),
            proj("pair"),
            "maximally entangled pair in another basis: psi/2",
            |p, _| {
                let (a, b) = amp(p, "psi");
                state(vec![a / 2.0, b / 2.0])
            },
        ),
        ex(
            ModelSpec::ReferencePair(vec![r(s2), r(0.0), r(0.0), C::from_polar(s2, p["chi"])]),
            proj("pair"),
            "relative phase on the pair cancels: psi/2",
            |p, _| {
                let (a, b) = amp(p, "psi");
                state(vec![a / 2.0, b / 2.0])
            },
        ),
    ];
    built(c, e)
}

fn grandfather(p: &Params, kind: GateKind, label: &'static str) -> Result<(Circuit, Vec<Expectation>)> {
    let c = one_loop(p, vec![gate(kind, &["phi"])])?;
    let e = vec![
        ex(bell(), Quantity::Paradox, "the selection criterion is never met", |_, _| Value::Paradox),
        ex(bell(), pnorm(label), "all weight on one orthogonal Bell state", |_, _| sc(1.0)),
        ex(bell(), pnorm("B"), "no weight on B", |_, _| sc(0.0)),
        ex(noisy(), Quantity::Z, "Z = lambda/4", |_, s| sc(s.lambda() / 4.0)),
        ex(noisy(), Quantity::Rho, "external qubit untouched", |p, _| {
            let (a, b) = amp(p, "psi");
            mix(&[(1.0, vec![a, b])])
        }),
        ex(delta(), Quantity::RhoLoop, "loop distribution I/2", |_, _| diag(&[0.5, 0.5])),
    ];
    Ok((c, e))
}

fn grandfather_not(p: &Params) -> Result<Built> {
    let (c, mut e) = grandfather(p, GateKind::X, "N")?;
    e.push(ex(classical(), Quantity::Z, "Z = 2k", |_, s| sc(2.0 * s.k())));
    e.push(ex(delta(), Quantity::Z, "Z = pi^2/2", |_, _| sc(PI * PI / 2.0)));
    e.push(ex(delta(), Quantity::Rho, "external qubit untouched", |p, _| {
        let (a, b) = amp(p, "psi");
        mix(&[(1.0, vec![a, b])])
    }));
    built(c, e)
}

fn grandfather_pf(p: &Params) -> Result<Built> {
    let (c, mut e) = grandfather(p, GateKind::Z, "-")?;
    e.push(ex(classical(), Quantity::Z, "Z = 2(1-k)", |_, s| sc(2.0 * (1.0 - s.k()))));
    e.push(ex(delta(), Quantity::Z, "Z = pi^2", |_, _| sc(PI * PI)));
    built(c, e)
}

fn grandfather_rot(p: &Params) -> Result<Built> {
    let (c, mut e) = grandfather(p, GateKind::Rot(FRAC_PI_2), "-N")?;
    e.push(ex(classical(), Quantity::Z, "Z = 2k", |_, s| sc(2.0 * s.k())));
    e.push(ex(delta(), Quantity::Z, "Z = pi^2/2", |_, _| sc(PI * PI / 2.0)));
    built(c, e)
}

fn grandfather_perturbed(p: &Params) -> Result<Built> {
    let eps = p["eps"];
    let m = DMatrix::from_row_slice(2, 2, &[r(eps), r(1.0 - eps), r(1.0 - eps), r(eps)]);
    let c = one_loop(
        p,
        vec![gate(
            GateKind::Custom {
                matrix: m,
                perturbation: true,
            },
            &["phi"],
        )],
    )?;
    let e = vec![
        ex(bell(), Quantity::N, "N = eps", |p, _| sc(p["eps"])),
        ex(bell(), pnorm("N"), "|psi_N|^2 = (1-eps)^2", |p, _| sc((1.0 - p["eps"]).powi(2))),
        ex(noisy(), Quantity::Z, "Z = (1-3l/4)eps^2 + (l/4)(1-eps)^2", |p, s| {
            let l = s.lambda();
            let eps = p["eps"];
            sc(bell_wb(l) * eps * eps + bell_wo(l) * (1.0 - eps).powi(2))
        }),
    ];
    built(c, e)
}

fn cpf_delta(p: &Params) -> Result<Built> {
    let c = one_loop(p, vec![gate(GateKind::Cz, &["psi", "phi"])])?;
    let e = vec![
        ex(bell(), Quantity::N, "N = |a|", |p, _| sc(amp(p, "psi").0.norm())),
        ex(delta(), Quantity::Z, "Z = 2pi^2(1 - |b|^2/2)", |p, _| {
            sc(2.0 * PI * PI * (1.0 - amp(p, "psi").1.norm_sqr() / 2.0))
        }),
        ex(delta(), Quantity::Rho, "diag(2|a|^2, |b|^2)/(|a|^2 + 1)", |p, _| {
            let (a, b) = amp(p, "psi");
            let d = a.norm_sqr() + 1.0;
            diag(&[2.0 * a.norm_sqr() / d, b.norm_sqr() / d])
        }),
        ex(delta(), Quantity::RhoLoop, "loop distribution I/2", |_, _| diag(&[0.5, 0.5])),
        ex(floor(), Quantity::Z, "Z = 2 - k", |_, s| sc(2.0 - s.k())),
        ex(floor(), Quantity::Rho, "dephased input diag(|a|^2, |b|^2)", |p, _| {
            let (a, b) = amp(p, "psi");
            diag(&[a.norm_sqr(), b.norm_sqr()])
        }),
        ex(classical(), Quantity::Z, "Z = 2(1-k)", |_, s| sc(2.0 * (1.0 - s.k()))),
    ];
    built(c, e)
}

fn cpf_gun(p: &Params) -> Result<Built> {
    let c = one_loop(p, vec![gate(GateKind::Cz, &["psi", "phi"])])?;
    let e = vec![
        ex(bell(), proj("B"), "psi_B = a|0>", |p, _| state(vec![amp(p, "psi").0, r(0.0)])),
        ex(bell(), proj("-"), "psi_- = b|1>", |p, _| state(vec![r(0.0), amp(p, "psi").1])),
        ex(noisy(), Quantity::Z, "Z = (1-l)|a|^2 + l/4", |p, s| {
            sc(noisy_z_one_loop(amp(p, "psi").0.norm_sqr(), s.lambda()))
        }),
        ex(noisy(), Quantity::Rho, "diag((1-3l/4)|a|^2, (l/4)|b|^2)/Z", |p, s| {
            let (a, b) = amp(p, "psi");
            let l = s.lambda();
            mix(&[(bell_wb(l), vec![a, r(0.0)]), (bell_wo(l), vec![r(0.0), b])])
        }),
    ];
    built(c, e)
}

fn faulty_gun(p: &Params) -> Result<Built> {
    let c = one_loop(p, vec![gate(GateKind::Rot(p["zeta"]), &["phi"])])?;
    let e = vec![
        ex(bell(), Quantity::N, "N = |cos zeta|", |p, _| sc(p["zeta"].cos().abs())),
        ex(bell(), pnorm("-N"), "|psi_-N|^2 = sin^2 zeta", |p, _| sc(p["zeta"].sin().powi(2))),
        ex(noisy(), Quantity::Z, "Z = (1-l)cos^2 zeta + l/4", |p, s| {
            sc(noisy_z_one_loop(p["zeta"].cos().powi(2), s.lambda()))
        }),
        ex(floor(), Quantity::Z, "Z = k + 2(1-k)cos^2 zeta", |p, s| {
            let k = s.k();
            sc(k + 2.0 * (1.0 - k) * p["zeta"].cos().powi(2))
        }),
        ex(classical(), Quantity::Z, "Z = 2(1-k)cos^2 + 2k sin^2", |p, s| {
            let k = s.k();
            let (sn, cs) = p["zeta"].sin_cos();
            sc(2.0 * (1.0 - k) * cs * cs + 2.0 * k * sn * sn)
        }),
        ex(delta(), Quantity::Z, "Z = (pi^2/2)(3cos^2 zeta + 1)", |p, _| {
            sc(PI * PI / 2.0 * (3.0 * p["zeta"].cos().powi(2) + 1.0))
        }),
        ex(delta(), Quantity::RhoLoop, "loop distribution I/2", |_, _| diag(&[0.5, 0.5])),
    ];
    built(c, e)
}

fn cnot_gun(p: &Params) -> Result<Built> {
    let c = one_loop(p, vec![gate(GateKind::Cx, &["psi", "phi"])])?;
    let e = vec![
        ex(bell(), Quantity::N, "N = |a|", |p, _| sc(amp(p, "psi").0.norm())),
        ex(bell(), proj("N"), "psi_N = b|1>", |p, _| state(vec![r(0.0), amp(p, "psi").1])),
        ex(noisy(), Quantity::Z, "Z = (1-l)|a|^2 + l/4", |p, s| {
            sc(noisy_z_one_loop(amp(p, "psi").0.norm_sqr(), s.lambda()))
        }),
        ex(noisy(), Quantity::Rho, "diag((1-3l/4)|a|^2, (l/4)|b|^2)/Z", |p, s| {
            let (a, b) = amp(p, "psi");
            let l = s.lambda();
            diag_norm(&[bell_wb(l) * a.norm_sqr(), bell_wo(l) * b.norm_sqr()])
        }),
        ex(classical(), Quantity::Z, "Z = 2(1-k)|a|^2 + 2k|b|^2", |p, s| {
            let (a, b) = amp(p, "psi");
            let k = s.k();
            sc(2.0 * (1.0 - k) * a.norm_sqr() + 2.0 * k * b.norm_sqr())
        }),
        ex(classical(), Quantity::Rho, "diag((1-k)|a|^2, k|b|^2)/Z", |p, s| {
            let (a, b) = amp(p, "psi");
            let k = s.k();
            diag_norm(&[(1.0 - k) * a.norm_sqr(), k * b.norm_sqr()])
        }),
        ex(delta(), Quantity::Z, "Z = (pi^2/2)(3|a|^2 + 1)", |p, _| {
            sc(PI * PI / 2.0 * (3.0 * amp(p, "psi").0.norm_sqr() + 1.0))
        }),
        ex(delta(), Quantity::Rho, "diag(4|a|^2, |b|^2)/(3|a|^2 + 1)", |p, _| {
            let (a, b) = amp(p, "psi");
            diag_norm(&[4.0 * a.norm_sqr(), b.norm_sqr()])
        }),
        ex(
            ModelSpec::InputBias {
                channel: "psi".into(),
                model: CtcModel::DeltaQuadrature {
                    theta_nodes: DELTA_NODES,
                    xi_nodes: DELTA_NODES,
                },
                nodes: BIAS_NODES,
            },
            Quantity::Bias,
            "control marginal diag(13/20, 7/20) instead of I/2",
            |_, _| diag(&[13.0 / 20.0, 7.0 / 20.0]),
        ),
        ex(
            ModelSpec::InputBias {
                channel: "psi".into(),
                model: CtcModel::Classical { k: K, floor: false },
                nodes: BIAS_NODES,
            },
            Quantity::Bias,
            "diag((3-2k)/4, (1+2k)/4)",
            |_, s| {
                let k = s.k();
                diag(&[(3.0 - 2.0 * k) / 4.0, (1.0 + 2.0 * k) / 4.0])
            },
        ),
        ex(
            ModelSpec::InputBias {
                channel: "psi".into(),
                model: CtcModel::NoisyBell { lambda: LAMBDA },
                nodes: BIAS_NODES,
            },
            Quantity::Bias,
            "rho00 = (3-2l)/(2(2-l))",
            |_, s| {
                let l = s.lambda();
                let a = (3.0 - 2.0 * l) / (2.0 * (2.0 - l));
                diag(&[a, 1.0 - a])
            },
        ),
        ex(
            ModelSpec::ClassicalInputBias {
                channel: "psi".into(),
                model: CtcModel::Classical { k: K, floor: true },
            },
            Quantity::Bias,
            "bit inputs: diag((2-k)/2, k/2)",
            |_, s| {
                let k = s.k();
                diag(&[(2.0 - k) / 2.0, k / 2.0])
            },
        ),
    ];
    built(c, e)
}

fn diag_norm(v: &[f64]) -> Value {
    let t: f64 = v.iter().sum();
    diag(&v.iter().map(|x| x / t).collect::<Vec<_>>())
}

fn crot_gun(p: &Params) -> Result<Built> {
    let c = one_loop(p, vec![gate(GateKind::Crot(p["zeta"]), &["psi", "phi"])])?;
    fn vb(p: &Params) -> Vec<C> {
        let (a, b) = amp(p, "psi");
        vec![a, b * p["zeta"].cos()]
    }
    fn vm(p: &Params) -> Vec<C> {
        vec![r(0.0), amp(p, "psi").1 * p["zeta"].sin()]
    }
    let e = vec![
        ex(bell(), proj("B"), "psi_B = a|0> + b cos zeta |1>", |p, _| state(vb(p))),
        ex(bell(), proj("-N"), "psi_-N = b sin zeta |1>", |p, _| state(vm(p))),
        ex(bell(), Quantity::N, "N^2 = |a|^2 + |b|^2 cos^2 zeta", |p, _| sc(n2(&vb(p)).sqrt())),
        ex(noisy(), Quantity::Z, "Z = 1 - 3l/4 - (1-l)|b|^2 sin^2 zeta", |p, s| {
            let l = s.lambda();
            sc(1.0 - 0.75 * l - (1.0 - l) * amp(p, "psi").1.norm_sqr() * p["zeta"].sin().powi(2))
        }),
        ex(noisy(), Quantity::Rho, "(1-3l/4)psi_B psi_B^† + (l/4)|b|^2 sin^2 zeta |1><1|, normalized", |p, s| {
            let l = s.lambda();
            mix(&[(bell_wb(l), vb(p)), (bell_wo(l), vm(p))])
        }),
        ex(classical(), Quantity::Z, "Z = 2(1-k)(|a|^2 + |b|^2 cos^2) + 2k|b|^2 sin^2", |p, s| {
            let k = s.k();
            sc(2.0 * (1.0 - k) * n2(&vb(p)) + 2.0 * k * n2(&vm(p)))
        }),
        ex(classical(), Quantity::Rho, "same mixture as the noisy model with weights 1-k, k", |p, s| {
            let k = s.k();
            mix(&[(1.0 - k, vb(p)), (k, vm(p))])
        }),
    ];
    built(c, e)
}

fn phase_gun(p: &Params) -> Result<Built> {
    let c = one_loop(p, vec![gate(GateKind::Cphase(p["xi"]), &["psi", "phi"])])?;
    fn vb(p: &Params) -> Vec<C> {
        let (a, b) = amp(p, "psi");
        vec![a, b * (r(1.0) + C::from_polar(1.0, p["xi"])) / 2.0]
    }
    fn vm(p: &Params) -> Vec<C> {
        vec![r(0.0), amp(p, "psi").1 * (r(1.0) - C::from_polar(1.0, p["xi"])) / 2.0]
    }
    let e = vec![
        ex(bell(), proj("B"), "psi_B = a|0> + b(1+e^{i xi})/2 |1>", |p, _| state(vb(p))),
        ex(bell(), proj("-"), "psi_- = b(1-e^{i xi})/2 |1>", |p, _| state(vm(p))),
        ex(bell(), Quantity::N, "N^2 = |a|^2 + |b|^2(1 + cos xi)/2", |p, _| {
            let (a, b) = amp(p, "psi");
            sc((a.norm_sqr() + b.norm_sqr() * (1.0 + p["xi"].cos()) / 2.0).sqrt())
        }),
        ex(noisy(), Quantity::Z, "Z = (1-l)N^2 + l/4", |p, s| sc(noisy_z_one_loop(n2(&vb(p)), s.lambda()))),
        ex(noisy(), Quantity::Rho, "weighted B and - projections", |p, s| {
            let l = s.lambda();
            mix(&[(bell_wb(l), vb(p)), (bell_wo(l), vm(p))])
        }),
    ];
    built(c, e)
}

fn unproven_proof_cx(p: &Params) -> Result<Built> {
    let c = one_loop(p, vec![gate(GateKind::Cx, &["phi", "psi"])])?;
    fn vb(p: &Params) -> Vec<C> {
        let (a, b) = amp(p, "psi");
        let s = (a + b) / 2.0;
        vec![s, s]
    }
    fn vm(p: &Params) -> Vec<C> {
        let (a, b) = amp(p, "psi");
        let d = (a - b) / 2.0;
        vec![d, -d]
    }
    let e = vec![
        ex(bell(), proj("B"), "psi_B = ((a+b)/2)(|0> + |1>)", |p, _| state(vb(p))),
        ex(bell(), proj("-"), "psi_- = ((a-b)/2)(|0> - |1>)", |p, _| state(vm(p))),
        ex(bell(), Quantity::N, "N^2 = |a+b|^2/2", |p, _| {
            let (a, b) = amp(p, "psi");
            sc(((a + b).norm_sqr() / 2.0).sqrt())
        }),
        ex(noisy(), Quantity::Z, "Z = (1-3l/4)|a+b|^2/2 + (l/4)|a-b|^2/2", |p, s| {
            let (a, b) = amp(p, "psi");
            let l = s.lambda();
            sc(bell_wb(l) * (a + b).norm_sqr() / 2.0 + bell_wo(l) * (a - b).norm_sqr() / 2.0)
        }),
        ex(noisy(), Quantity::Rho, "weighted B and - projections", |p, s| {
            let l = s.lambda();
            mix(&[(bell_wb(l), vb(p)), (bell_wo(l), vm(p))])
        }),
        ex(classical(), Quantity::Z, "Z = 2(1-k)", |_, s| sc(2.0 * (1.0 - s.k()))),
        ex(
            classical(),
            Quantity::Rho,
            "(|psi><psi| + X|psi><psi|X)/2; its off-diagonal is Re(a b*), half of the printed a b",
            |p, _| {
                let (a, b) = amp(p, "psi");
                mix(&[(0.5, vec![a, b]), (0.5, vec![b, a])])
            },
        ),
    ];
    built(c, e)
}

fn unproven_proof_crot(p: &Params) -> Result<Built> {
    let c = one_loop(p, vec![gate(GateKind::Crot(FRAC_PI_2), &["phi", "psi"])])?;
    fn rpsi(p: &Params) -> Vec<C> {
        let (a, b) = amp(p, "psi");
        vec![-b, a]
    }
    let e = vec![
        ex(bell(), Quantity::N, "N^2 = 1/2", |_, _| sc(0.5f64.sqrt())),
        ex(bell(), proj("B"), "psi_B = ((a-b)/2)|0> + ((a+b)/2)|1>", |p, _| {
            let (a, b) = amp(p, "psi");
            state(vec![(a - b) / 2.0, (a + b) / 2.0])
        }),
        ex(noisy(), Quantity::Z, "Z = (1 - l/2)/2", |_, s| sc((1.0 - s.lambda() / 2.0) / 2.0)),
        ex(classical(), Quantity::Z, "Z = 2(1-k)", |_, s| sc(2.0 * (1.0 - s.k()))),
        ex(classical(), Quantity::Rho, "(|psi><psi| + R|psi><psi|R^†)/2", |p, _| {
            let (a, b) = amp(p, "psi");
            mix(&[(0.5, vec![a, b]), (0.5, rpsi(p))])
        }),
        ex(delta(), Quantity::Z, "Z = 3pi^2/2", |_, _| sc(1.5 * PI * PI)),
        ex(delta(), Quantity::RhoLoop, "loop distribution I/2", |_, _| diag(&[0.5, 0.5])),
        ex(
            delta(),
            Quantity::Rho,
            "[3(|psi><psi| + R|psi><psi|R^†) + |psi><psi|R^† + R|psi><psi|]/6; for real amplitudes rho00 = 1/2 - ab/3, rho01 = (a^2 - b^2)/6",
            |p, _| {
                let (a, b) = amp(p, "psi");
                let v = nalgebra::DVector::from_vec(vec![a, b]);
                let w = nalgebra::DVector::from_vec(rpsi(p));
                let m = (&v * v.adjoint() + &w * w.adjoint()) * r(3.0) + &v * w.adjoint() + &w * v.adjoint();
                matrix(m / r(6.0))
            },
        ),
    ];
    built(c, e)
}

fn unproven_proof_cpf(p: &Params) -> Result<Built> {
    let c = one_loop(p, vec![gate(GateKind::Cz, &["phi", "psi"])])?;
    let e = vec![
        ex(bell(), Quantity::N, "N = |a|", |p, _| sc(amp(p, "psi").0.norm())),
        ex(bell(), proj("B"), "psi_B = a|0>", |p, _| state(vec![amp(p, "psi").0, r(0.0)])),
        ex(bell(), proj("-"), "psi_- = b|1>", |p, _| state(vec![r(0.0), amp(p, "psi").1])),
        ex(classical(), Quantity::Rho, "dephased input", |p, _| {
            let (a, b) = amp(p, "psi");
            diag(&[a.norm_sqr(), b.norm_sqr()])
        }),
    ];
    built(c, e)
}

fn xx(v: &[C]) -> Vec<C> {
    vec![v[3], v[2], v[1], v[0]]
}

fn even_odd_xx(v: &[C], sign: f64) -> Vec<C> {
    v.iter().zip(xx(v)).map(|(a, b)| (a + b * sign) / 2.0).collect()
}

fn pot_expectations(vec_of: fn(&Params) -> Vec<C>) -> Vec<Expectation> {
    vec![
        ex(bell(), proj("B"), "psi_B = (psi + XX psi)/2", move |p, _| state(even_odd_xx(&vec_of(p), 1.0))),
        ex(bell(), proj("-"), "psi_- = (psi - XX psi)/2", move |p, _| state(even_odd_xx(&vec_of(p), -1.0))),
        ex(noisy(), Quantity::Z, "Z = (1-l)N^2 + l/4", move |p, s| {
            sc(noisy_z_one_loop(n2(&even_odd_xx(&vec_of(p), 1.0)), s.lambda()))
        }),
        ex(noisy(), Quantity::Rho, "weighted B and - projections", move |p, s| {
            let l = s.lambda();
            let v = vec_of(p);
            mix(&[(bell_wb(l), even_odd_xx(&v, 1.0)), (bell_wo(l), even_odd_xx(&v, -1.0))])
        }),
        ex(classical(), Quantity::Z, "Z = 2(1-k)", |_, s| sc(2.0 * (1.0 - s.k()))),
        ex(classical(), Quantity::Rho, "(|psi><psi| + XX|psi><psi|XX)/2", move |p, _| {
            let v = vec_of(p);
            mix(&[(0.5, v.clone()), (0.5, xx(&v))])
        }),
    ]
}

fn probes(p: &Params) -> Vec<C> {
    let (a1, b1) = amp(p, "p1");
    let (a2, b2) = amp(p, "p2");
    kron(&[a1, b1], &[a2, b2])
}

fn twice_watched_pot_product(p: &Params) -> Result<Built> {
    let c = build_circuit(
        vec![Channel::ctc("phi"), ext("p1", p, "p1")?, ext("p2", p, "p2")?],
        vec![],
        vec![gate(GateKind::Cx, &["phi", "p1"])?, gate(GateKind::Cx, &["phi", "p2"])?],
    )?;
    let mut e = pot_expectations(probes);
    e.push(ex(
        bell(),
        Quantity::RhoReduced(vec!["p1".into()]),
        "each probe alone reads a fair coin when both start in |0>",
        |p, _| {
            let v = even_odd_xx(&probes(p), 1.0);
            let t = n2(&v);
            let p0 = (v[0].norm_sqr() + v[1].norm_sqr()) / t;
            let off = (v[0] * v[2].conj() + v[1] * v[3].conj()) / t;
            matrix(DMatrix::from_row_slice(2, 2, &[r(p0), off, off.conj(), r(1.0 - p0)]))
        },
    ));
    built(c, e)
}

fn twice_watched_pot_entangled(p: &Params) -> Result<Built> {
    let c = build_circuit(
        vec![
            Channel::ctc("phi"),
            Channel::external_entangled("p1"),
            Channel::external_entangled("p2"),
        ],
        vec![entangled(&["p1", "p2"], gamma(p))?],
        vec![gate(GateKind::Cx, &["phi", "p1"])?, gate(GateKind::Cx, &["phi", "p2"])?],
    )?;
    let mut e = pot_expectations(gamma);
    e.push(ex(
        bell(),
        Quantity::N,
        "N^2 = |g00 + g11|^2/2 + |g01 + g10|^2/2 (without the extra factor 2 in the printed Z)",
        |p, _| {
            let g = gamma(p);
            sc(((g[0] + g[3]).norm_sqr() / 2.0 + (g[1] + g[2]).norm_sqr() / 2.0).sqrt())
        },
    ));
    built(c, e)
}

fn two_ctc_cx(p: &Params) -> Result<Built> {
    let c = build_circuit(
        vec![Channel::ctc("phi1"), Channel::ctc("phi2"), ext("psi", p, "psi")?],
        vec![],
        vec![gate(GateKind::Cx, &["phi1", "phi2"])?, gate(GateKind::Cx, &["phi1", "psi"])?],
    )?;
    let e = vec![
        ex(bell(), Quantity::N, "N = 1/2", |_, _| sc(0.5)),
        ex(bell(), proj("B,B"), "psi_BB = psi/2", |p, _| {
            let (a, b) = amp(p, "psi");
            state(vec![a / 2.0, b / 2.0])
        }),
        ex(noisy(), Quantity::Z, "Z = (1 - l/2)^2/4", |_, s| sc((1.0 - s.lambda() / 2.0).powi(2) / 4.0)),
        ex(noisy(), Quantity::Rho, "((4-3l)/(4-2l))|psi><psi| + (l/(4-2l))X|psi><psi|X", |p, s| {
            let (a, b) = amp(p, "psi");
            let l = s.lambda();
            let d = 4.0 - 2.0 * l;
            matrix(outer(&[a, b]) * r((4.0 - 3.0 * l) / d) + outer(&[b, a]) * r(l / d))
        }),
    ];
    built(c, e)
}

fn mutual_paradox(p: &Params) -> Result<Built> {
    let c = build_circuit(
        vec![Channel::ctc("phi1"), Channel::ctc("phi2"), ext("psi", p, "psi")?],
        vec![],
        vec![
            gate(GateKind::Cx, &["psi", "phi1"])?,
            gate(GateKind::Rot(p["zeta"]), &["psi"])?,
            gate(GateKind::Cx, &["psi", "phi2"])?,
        ],
    )?;
    // Z(psi) = A|a|^2 + B + C|b|^2 with the weights of (B,B), (B,N)/(N,B), (N,N).
    fn abc(p: &Params, l: f64) -> (f64, f64, f64) {
        let (sn, cs) = p["zeta"].sin_cos();
        let wb = bell_wb(l);
        let wo = bell_wo(l);
        (wb * wb * cs * cs, wb * wo * sn * sn, wo * wo * cs * cs)
    }
    let e = vec![
        ex(bell(), Quantity::N, "N = |a cos zeta|; orthogonal (paradox) at zeta = pi/2", |p, _| {
            let n = (amp(p, "psi").0 * p["zeta"].cos()).norm();
            if n < PARADOX_NORM {
                Value::Paradox
            } else {
                sc(n)
            }
        }),
        ex(bell(), pnorm("B,N"), "|psi_BN|^2 = |a|^2 sin^2 zeta", |p, _| {
            sc(amp(p, "psi").0.norm_sqr() * p["zeta"].sin().powi(2))
        }),
        ex(noisy(), Quantity::Z, "(1-3l/4)^2|a|^2c^2 + (l/4)(1-3l/4)s^2 + (l^2/16)|b|^2c^2", |p, s| {
            let (a, b) = amp(p, "psi");
            let (x, y, z) = abc(p, s.lambda());
            sc(x * a.norm_sqr() + y + z * b.norm_sqr())
        }),
        ex(noisy(), Quantity::Rho, "diagonal output", |p, s| {
            let (a, b) = amp(p, "psi");
            let (x, y, z) = abc(p, s.lambda());
            diag_norm(&[x * a.norm_sqr() + y * b.norm_sqr(), y * a.norm_sqr() + z * b.norm_sqr()])
        }),
        ex(
            ModelSpec::Model(CtcModel::WeightMatrix(WeightMatrix::independent_flips(2, K).expect("valid k"))),
            Quantity::Z,
            "Z = 4[(1-k)^2|a|^2c^2 + k(1-k)s^2 + k^2|b|^2c^2]",
            |p, _| {
                let (a, b) = amp(p, "psi");
                let (sn, cs) = p["zeta"].sin_cos();
                let k = K;
                sc(4.0
                    * ((1.0 - k).powi(2) * a.norm_sqr() * cs * cs
                        + k * (1.0 - k) * sn * sn
                        + k * k * b.norm_sqr() * cs * cs))
            },
        ),
        ex(
            ModelSpec::InputBias {
                channel: "psi".into(),
                model: CtcModel::NoisyBell { lambda: LAMBDA },
                nodes: BIAS_NODES,
            },
            Quantity::Bias,
            "rho00 = (3A/8 + B/2 + C/8)/(A/2 + B + C/2)",
            |p, s| {
                let (x, y, z) = abc(p, s.lambda());
                let r00 = (3.0 * x / 8.0 + y / 2.0 + z / 8.0) / (x / 2.0 + y + z / 2.0);
                diag(&[r00, 1.0 - r00])
            },
        ),
    ];
    built(c, e)
}

fn third_party_parts(p: &Params) -> (Vec<C>, Vec<C>) {
    let (a1, b1) = amp(p, "psi1");
    let (a2, b2) = amp(p, "psi2");
    let z = r(0.0);
    (vec![a1 * a2, z, z, b1 * b2], vec![z, a1 * b2, b1 * a2, z])
}

fn third_party(p: &Params) -> Result<Built> {
    let c = build_circuit(
        vec![Channel::ctc("phi"), ext("psi1", p, "psi1")?, ext("psi2", p, "psi2")?],
        vec![],
        vec![gate(GateKind::Cx, &["psi1", "phi"])?, gate(GateKind::Cx, &["psi2", "phi"])?],
    )?;
    let e = vec![
        ex(bell(), proj("B"), "psi_B = a1a2|00> + b1b2|11>", |p, _| state(third_party_parts(p).0)),
        ex(bell(), proj("N"), "psi_N = a1b2|01> + b1a2|10>", |p, _| state(third_party_parts(p).1)),
        ex(bell(), Quantity::N, "N = |psi_B|", |p, _| {
            let n = n2(&third_party_parts(p).0).sqrt();
            if n < PARADOX_NORM {
                Value::Paradox
            } else {
                sc(n)
            }
        }),
        ex(noisy(), Quantity::Z, "(1-3l/4)|psi_B|^2 + (l/4)|psi_N|^2", |p, s| {
            let (b, n) = third_party_parts(p);
            let l = s.lambda();
            sc(bell_wb(l) * n2(&b) + bell_wo(l) * n2(&n))
        }),
        ex(noisy(), Quantity::Rho, "weighted B and N projections", |p, s| {
            let (b, n) = third_party_parts(p);
            let l = s.lambda();
            mix(&[(bell_wb(l), b), (bell_wo(l), n)])
        }),
        ex(classical(), Quantity::Z, "2(1-k)|psi_B|^2 + 2k|psi_N|^2", |p, s| {
            let (b, n) = third_party_parts(p);
            let k = s.k();
            sc(2.0 * (1.0 - k) * n2(&b) + 2.0 * k * n2(&n))
        }),
        ex(classical(), Quantity::Rho, "weights 1-k on even, k on odd", |p, s| {
            let (b, n) = third_party_parts(p);
            let k = s.k();
            mix(&[(1.0 - k, b), (k, n)])
        }),
    ];
    built(c, e)
}

/// Flip probability between the first two readings when histories whose
/// loop returns to its entering value weigh `1-q` and the others `q`.
fn stubborn_flip(t1: f64, t2: f64, q: f64) -> f64 {
    let (s1, c1) = t1.sin_cos();
    let (s2, c2) = t2.sin_cos();
    let (s1, c1, s2, c2) = (s1 * s1, c1 * c1, s2 * s2, c2 * c2);
    ((1.0 - q) * s1 * s2 + q * s1 * c2) / ((1.0 - q) * (c1 * c2 + s1 * s2) + q * (s1 * c2 + c1 * s2))
}

fn stubborn_spin(p: &Params) -> Result<Built> {
    let c = build_circuit(
        vec![Channel::ctc("phi"), zero("p1")?, zero("p2")?, zero("p3")?],
        vec![],
        vec![
            gate(GateKind::Cx, &["phi", "p1"])?,
            gate(GateKind::Rot(p["theta1"]), &["phi"])?,
            gate(GateKind::Cx, &["phi", "p2"])?,
            gate(GateKind::Rot(p["theta2"]), &["phi"])?,
            gate(GateKind::Cx, &["phi", "p3"])?,
        ],
    )?;
    let flip = || Quantity::Flip("p1".into(), "p2".into());
    let e = vec![
        ex(bell(), Quantity::N, "N^2 = (cos^2 t1 cos^2 t2 + sin^2 t1 sin^2 t2)/2", |p, _| {
            let (c1, c2) = (p["theta1"].cos().powi(2), p["theta2"].cos().powi(2));
            sc(((c1 * c2 + (1.0 - c1) * (1.0 - c2)) / 2.0).sqrt())
        }),
        ex(bell(), flip(), "p_flip = 1/(cot^2 t1 cot^2 t2 + 1)", |p, _| {
            let ct = |t: f64| (t.cos() / t.sin()).powi(2);
            sc(1.0 / (ct(p["theta1"]) * ct(p["theta2"]) + 1.0))
        }),
        ex(noisy(), flip(), "classical form with k = l/2", |p, s| {
            sc(stubborn_flip(p["theta1"], p["theta2"], s.lambda() / 2.0))
        }),
        ex(
            classical(),
            flip(),
            "[(1-k)s1^2s2^2 + k s1^2c2^2]/[(1-k)(c1^2c2^2 + s1^2s2^2) + k(s1^2c2^2 + c1^2s2^2)]",
            |p, s| sc(stubborn_flip(p["theta1"], p["theta2"], s.k())),
        ),
    ];
    built(c, e)
}

fn amnesia_plain(p: &Params) -> Result<Built> {
    let c = one_loop(
        p,
        vec![gate(GateKind::Cx, &["psi", "phi"]), gate(GateKind::Swap, &["phi", "psi"])],
    )?;
    let e = vec![
        ex(bell(), proj("B"), "psi_B = ((a+b)/2)|0>; paradox when a = -b", |p, _| {
            let (a, b) = amp(p, "psi");
            let v = (a + b) / 2.0;
            if v.norm() < PARADOX_NORM {
                Value::Paradox
            } else {
                state(vec![v, r(0.0)])
            }
        }),
        ex(noisy(), Quantity::Z, "Z = (l + (1-l)|a+b|^2)/4", |p, s| {
            let (a, b) = amp(p, "psi");
            let l = s.lambda();
            sc((l + (1.0 - l) * (a + b).norm_sqr()) / 4.0)
        }),
        ex(noisy(), Quantity::Rho, "diag((1-3l/4)u + (l/4)v, (l/4)(u+v)), u = |a+b|^2, v = |a-b|^2", |p, s| {
            let (a, b) = amp(p, "psi");
            let l = s.lambda();
            let (u, v) = ((a + b).norm_sqr(), (a - b).norm_sqr());
            diag_norm(&[bell_wb(l) * u + bell_wo(l) * v, bell_wo(l) * (u + v)])
        }),
        ex(classical(), Quantity::Z, "Z = 1", |_, _| sc(1.0)),
        ex(classical(), Quantity::Rho, "diag(1-k, k)", |_, s| diag(&[1.0 - s.k(), s.k()])),
        ex(
            ModelSpec::InputBias {
                channel: "psi".into(),
                model: CtcModel::Classical { k: K, floor: false },
                nodes: BIAS_NODES,
            },
            Quantity::Bias,
            "no input bias: I/2",
            |_, _| diag(&[0.5, 0.5]),
        ),
    ];
    built(c, e)
}

fn amnesia_entangled(p: &Params) -> Result<Built> {
    let (a, b) = amp(p, "psi");
    let c = build_circuit(
        vec![
            Channel::ctc("phi"),
            Channel::external_entangled("psi"),
            Channel::external_entangled("partner"),
        ],
        vec![entangled(&["psi", "partner"], vec![a, r(0.0), r(0.0), b])?],
        vec![gate(GateKind::Cx, &["psi", "phi"])?, gate(GateKind::Swap, &["phi", "psi"])?],
    )?;
    fn parts(p: &Params) -> [Vec<C>; 4] {
        let (a, b) = amp(p, "psi");
        let z = r(0.0);
        [
            vec![a / 2.0, b / 2.0, z, z],
            vec![a / 2.0, -b / 2.0, z, z],
            vec![z, z, a / 2.0, b / 2.0],
            vec![z, z, -a / 2.0, b / 2.0],
        ]
    }
    let e = vec![
        ex(bell(), Quantity::N, "N^2 = 1/4", |_, _| sc(0.5)),
        ex(bell(), proj("B"), "psi_B = (a|00> + b|01>)/2", |p, _| state(parts(p)[0].clone())),
        ex(noisy(), Quantity::Z, "Z = 1/4", |_, _| sc(0.25)),
        ex(noisy(), Quantity::Rho, "weighted Bell projections", |p, s| {
            let l = s.lambda();
            let [b, m, n, mn] = parts(p);
            mix(&[(bell_wb(l), b), (bell_wo(l), m), (bell_wo(l), n), (bell_wo(l), mn)])
        }),
        ex(classical(), Quantity::Rho, "diag((1-k)|a|^2, (1-k)|b|^2, k|a|^2, k|b|^2)", |p, s| {
            let (a, b) = amp(p, "psi");
            let k = s.k();
            diag(&[(1.0 - k) * a.norm_sqr(), (1.0 - k) * b.norm_sqr(), k * a.norm_sqr(), k * b.norm_sqr()])
        }),
    ];
    built(c, e)
}

fn amnesia_secondary_loop(p: &Params) -> Result<Built> {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let c = build_circuit(
        vec![
            Channel::ctc("phi"),
            Channel::external_entangled("pair_a"),
            Channel::external_entangled("pair_b"),
            ext("ctl", p, "ctl")?,
        ],
        vec![entangled(&["pair_a", "pair_b"], vec![r(s2), r(0.0), r(0.0), r(s2)])?],
        vec![
            gate(GateKind::Rot(-FRAC_PI_4), &["pair_b"])?,
            gate(GateKind::Cz, &["ctl", "pair_a"])?,
            gate(GateKind::Cx, &["phi", "pair_a"])?,
            gate(GateKind::Cx, &["pair_a", "phi"])?,
        ],
    )?;
    let e = vec![
        ex(bell(), proj("B"), "psi_B = (a|000> - b|011>)/2", |p, _| {
            let (a, b) = amp(p, "ctl");
            let mut v = vec![r(0.0); 8];
            v[0] = a / 2.0;
            v[3] = -b / 2.0;
            state(v)
        }),
        ex(bell(), Quantity::N, "N = 1/2", |_, _| sc(0.5)),
        ex(noisy(), proj("B"), "B projection independent of the noise", |p, _| {
            let (a, b) = amp(p, "ctl");
            let mut v = vec![r(0.0); 8];
            v[0] = a / 2.0;
            v[3] = -b / 2.0;
            state(v)
        }),
        ex(noisy(), Quantity::Z, "Z = 1/4", |_, _| sc(0.25)),
    ];
    built(c, e)
}

/// Flip probability for the back-propagation circuits; `x1` is `sin^2 θ_g`
/// (or the product of the chain's `sin^2`), `q` the weight of mismatched histories.
fn backprop_flip(ts: f64, x1: f64, q: f64) -> f64 {
    let (s, c) = ts.sin_cos();
    let (s2, c2) = (s * s, c * c);
    let x = x1 * s2 * c2;
    ((1.0 - q) * s2 * (1.0 - c2 * x1) + q * x) / ((1.0 - q) * (1.0 - 2.0 * x) + 2.0 * q * x)
}

fn backprop_n(ts: f64, x1: f64) -> f64 {
    let (s, c) = ts.sin_cos();
    (1.0 - 2.0 * x1 * s * s * c * c).sqrt()
}

fn backprop_expectations(x1: fn(&Params) -> f64, ctl: &'static str) -> Vec<Expectation> {
    let flip = move || Quantity::Flip(ctl.into(), "probe".into());
    vec![
        ex(bell(), Quantity::N, "N^2 = 1 - 2 sin^2(g) sin^2(s) cos^2(s)", move |p, _| sc(backprop_n(p["theta_s"], x1(p)))),
        ex(bell(), flip(), "s^2(1 - c^2 X')/(1 - 2X)", move |p, _| sc(backprop_flip(p["theta_s"], x1(p), 0.0))),
        ex(
            noisy(),
            flip(),
            "s^2[(4-3l) - (4-4l)c^2 X']/(4 - 3l - 8(1-l)X); the printed (4-2l) in the numerator does not reduce to the exact case",
            move |p, s| {
                let l = s.lambda();
                let (sn, cs) = p["theta_s"].sin_cos();
                let (s2, c2) = (sn * sn, cs * cs);
                let xp = x1(p);
                let x = xp * s2 * c2;
                sc(s2 * ((4.0 - 3.0 * l) - (4.0 - 4.0 * l) * c2 * xp) / (4.0 - 3.0 * l - 8.0 * (1.0 - l) * x))
            },
        ),
        ex(classical(), flip(), "s^2(1 - k - (1-2k)X'c^2)/(1 - k - 2(1-2k)X)", move |p, s| {
            let k = s.k();
            let (sn, cs) = p["theta_s"].sin_cos();
            let (s2, c2) = (sn * sn, cs * cs);
            let xp = x1(p);
            sc(s2 * (1.0 - k - (1.0 - 2.0 * k) * xp * c2) / (1.0 - k - 2.0 * (1.0 - 2.0 * k) * xp * s2 * c2))
        }),
        ex(classical(), Quantity::Z, "2(1-k)N^2 + 4kX", move |p, s| {
            let k = s.k();
            let (sn, cs) = p["theta_s"].sin_cos();
            let x = x1(p) * sn * sn * cs * cs;
            sc(2.0 * (1.0 - k) * (1.0 - 2.0 * x) + 4.0 * k * x)
        }),
    ]
}

fn backprop_single(p: &Params) -> Result<Built> {
    let ts = p["theta_s"];
    let c = build_circuit(
        vec![Channel::ctc("phi"), zero("ctl")?, zero("probe")?],
        vec![],
        vec![
            gate(GateKind::Rot(ts), &["ctl"])?,
            gate(GateKind::Cx, &["ctl", "probe"])?,
            gate(GateKind::Rot(-ts), &["ctl"])?,
            gate(GateKind::Crot(p["theta_g"]), &["ctl", "phi"])?,
        ],
    )?;
    built(c, backprop_expectations(|p| p["theta_g"].sin().powi(2), "ctl"))
}

fn backprop_chain(p: &Params) -> Result<Built> {
    let ts = p["theta_s"];
    let c = build_circuit(
        vec![Channel::ctc("phi"), zero("c2")?, zero("c1")?, zero("probe")?],
        vec![],
        vec![
            gate(GateKind::Rot(ts), &["c1"])?,
            gate(GateKind::Cx, &["c1", "probe"])?,
            gate(GateKind::Rot(-ts), &["c1"])?,
            gate(GateKind::Crot(p["theta_g1"]), &["c1", "c2"])?,
            gate(GateKind::Crot(p["theta_g2"]), &["c2", "phi"])?,
        ],
    )?;
    built(
        c,
        backprop_expectations(|p| (p["theta_g1"].sin() * p["theta_g2"].sin()).powi(2), "c1"),
    )
}

fn n_controlled_not(p: &Params) -> Result<Built> {
    let names = ["c0", "c1", "c2", "c3"];
    let mut channels = vec![Channel::ctc("phi")];
    let mut gates = Vec::new();
    for (i, n) in names.iter().enumerate() {
        let a = p[&format!("alpha{i}")];
        channels.push(Channel::external(n, PureState::qubit(n, r(a), r((1.0 - a * a).sqrt()))?));
        gates.push(gate(GateKind::Cx, &[n, "phi"])?);
    }
    let c = build_circuit(channels, vec![], gates)?;
    // E^2 - D^2 is the product of a^2 - b^2 over the controls.
    fn even_odd(p: &Params) -> (f64, f64) {
        let prod: f64 = (1..4).map(|i| 2.0 * p[&format!("alpha{i}")].powi(2) - 1.0).product();
        ((1.0 + prod) / 2.0, (1.0 - prod) / 2.0)
    }
    let e = vec![
        ex(bell(), Quantity::N, "N^2 = E^2 a0^2 + D^2 b0^2", |p, _| {
            let (e2, d2) = even_odd(p);
            let a0 = p["alpha0"].powi(2);
            sc((e2 * a0 + d2 * (1.0 - a0)).sqrt())
        }),
        ex(bell(), pnorm("N"), "|psi_N|^2 = D^2 a0^2 + E^2 b0^2", |p, _| {
            let (e2, d2) = even_odd(p);
            let a0 = p["alpha0"].powi(2);
            sc(d2 * a0 + e2 * (1.0 - a0))
        }),
        ex(noisy(), Quantity::Z, "Z = (1-l)N^2 + l/4", |p, s| {
            let (e2, d2) = even_odd(p);
            let a0 = p["alpha0"].powi(2);
            sc(noisy_z_one_loop(e2 * a0 + d2 * (1.0 - a0), s.lambda()))
        }),
    ];
    built(c, e)
}

fn selector_parts(p: &Params, n: usize) -> (Vec<C>, Vec<C>) {
    let mut v = vec![r(1.0)];
    for i in 1..=n {
        let (a, b) = amp(p, &format!("psi{i}"));
        v = kron(&v, &[a, b]);
    }
    let (t1, t2) = (p["theta1"], p["theta2"]);
    let last = v.len() - 1;
    let mut b = scaled(&v, r(t2.cos()));
    let mut m = scaled(&v, r(t2.sin()));
    b[last] = v[last] * (t1 + t2).cos();
    m[last] = v[last] * (t1 + t2).sin();
    (b, m)
}

fn selector_expectations(n: usize) -> Vec<Expectation> {
    vec![
        ex(bell(), proj("B"), "cos(t2) on unselected states, cos(t1+t2) on the all-ones state", move |p, _| {
            state(selector_parts(p, n).0)
        }),
        ex(bell(), proj("-N"), "sine counterpart of psi_B", move |p, _| state(selector_parts(p, n).1)),
        ex(bell(), Quantity::Rho, "selects the all-ones state at t1 = t2 = pi/2", move |p, _| {
            mix(&[(1.0, selector_parts(p, n).0)])
        }),
        ex(noisy(), Quantity::Z, "Z = (1-l)N^2 + l/4", move |p, s| {
            sc(noisy_z_one_loop(n2(&selector_parts(p, n).0), s.lambda()))
        }),
    ]
}

fn ccrot_selector(p: &Params) -> Result<Built> {
    let c = build_circuit(
        vec![Channel::ctc("phi"), ext("psi1", p, "psi1")?, ext("psi2", p, "psi2")?],
        vec![],
        vec![
            gate(GateKind::Ccrot(p["theta1"]), &["psi1", "psi2", "phi"])?,
            gate(GateKind::Rot(p["theta2"]), &["phi"])?,
        ],
    )?;
    built(c, selector_expectations(2))
}

fn cccrot_selector(p: &Params) -> Result<Built> {
    let c = build_circuit(
        vec![
            Channel::ctc("phi"),
            ext("psi1", p, "psi1")?,
            ext("psi2", p, "psi2")?,
            ext("psi3", p, "psi3")?,
        ],
        vec![],
        vec![
            gate(GateKind::Cccrot(p["theta1"]), &["psi1", "psi2", "psi3", "phi"])?,
            gate(GateKind::Rot(p["theta2"]), &["phi"])?,
        ],
    )?;
    built(c, selector_expectations(3))
}

fn parity_pair(p: &Params) -> Vec<C> {
    let (a, b) = (p["psi_theta"].cos(), p["psi_theta"].sin());
    let eps = p["eps"];
    let mid = (eps * (1.0 - eps)).sqrt() * (a + b);
    let v = vec![
        (1.0 - eps) * a + eps * b,
        mid,
        mid,
        (1.0 - eps) * b + eps * a,
    ];
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| r(x / n)).collect()
}

fn parity_ec(p: &Params) -> Result<Built> {
    let c = build_circuit(
        vec![
            Channel::ctc("phi"),
            Channel::external_entangled("c1"),
            Channel::external_entangled("c2"),
        ],
        vec![entangled(&["c1", "c2"], parity_pair(p))?],
        vec![gate(GateKind::Cx, &["c1", "phi"])?, gate(GateKind::Cx, &["c2", "phi"])?],
    )?;
    fn parts(p: &Params) -> (Vec<C>, Vec<C>) {
        let v = parity_pair(p);
        let z = r(0.0);
        (vec![v[0], z, z, v[3]], vec![z, v[1], v[2], z])
    }
    let e = vec![
        ex(bell(), proj("B"), "even-parity part", |p, _| state(parts(p).0)),
        ex(bell(), proj("N"), "odd-parity part", |p, _| state(parts(p).1)),
        ex(noisy(), Quantity::Z, "Z = (1-l)|even|^2 + l/4", |p, s| {
            sc(noisy_z_one_loop(n2(&parts(p).0), s.lambda()))
        }),
        ex(noisy(), Quantity::Rho, "odd states suppressed by the skew factor", |p, s| {
            let (e, o) = parts(p);
            let l = s.lambda();
            mix(&[(bell_wb(l), e), (bell_wo(l), o)])
        }),
    ];
    built(c, e)
}

fn tourist_trap(p: &Params) -> Result<Built> {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let bell_amps = || vec![r(s2), r(0.0), r(0.0), r(s2)];
    let mut channels = vec![Channel::ctc("phi")];
    for l in ["m1", "m2", "m3", "r1", "r2", "r3"] {
        channels.push(Channel::external_entangled(l));
    }
    channels.push(zero("power")?);
    let c = build_circuit(
        channels,
        vec![
            entangled(&["m1", "r1"], bell_amps())?,
            entangled(&["m2", "r2"], bell_amps())?,
            entangled(&["m3", "r3"], bell_amps())?,
        ],
        vec![
            gate(GateKind::X, &["m1"])?,
            gate(GateKind::X, &["m2"])?,
            gate(GateKind::Toffoli, &["m1", "m2", "power"])?,
            gate(GateKind::X, &["m1"])?,
            gate(GateKind::X, &["m2"])?,
            gate(GateKind::Cx, &["m3", "phi"])?,
            gate(GateKind::X, &["phi"])?,
        ],
    )?;
    let cond = |model: CtcModel, mode: Coupling| ModelSpec::Conditional {
        power: "power".into(),
        model,
        mode,
    };
    let q = || Quantity::Probability(vec![("m1".into(), 0), ("m2".into(), 0)]);
    let e = vec![
        ex(cond(CtcModel::ExactBell, Coupling::Coupled), q(), "coupled renormalization: 1/7", |_, _| sc(1.0 / 7.0)),
        ex(cond(CtcModel::ExactBell, Coupling::Insulated), q(), "insulated renormalization: 1/4", |_, _| sc(0.25)),
        ex(
            cond(CtcModel::NoisyBell { lambda: LAMBDA }, Coupling::Coupled),
            q(),
            "coupled, noisy: (2-l)/(14-l)",
            |_, s| {
                let l = s.lambda();
                sc((2.0 - l) / (14.0 - l))
            },
        ),
        ex(
            cond(CtcModel::NoisyBell { lambda: LAMBDA }, Coupling::Insulated),
            q(),
            "insulated, noisy: 1/4",
            |_, _| sc(0.25),
        ),
    ];
    let mode = if p["mode"] >= 0.5 {
        Coupling::Insulated
    } else {
        Coupling::Coupled
    };
    Ok(Built {
        circuit: c,
        expectations: e,
        conditional: Some(("power".into(), mode)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_params_match_state_constructor() {
        let mut p = Params::new();
        p.insert("psi_theta".into(), 0.6);
        p.insert("psi_phase".into(), 0.4);
        let (a, b) = amp(&p, "psi");
        let s = qubit("psi", &p, "psi").unwrap();
        assert_eq!(s.amplitudes(), &[a, b]);
    }

    #[test]
    fn parity_pair_is_normalized() {
        let mut p = Params::new();
        p.insert("psi_theta".into(), 0.3);
        p.insert("eps".into(), 0.2);
        assert!((n2(&parity_pair(&p)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn stubborn_flip_reduces_to_cotangent_law() {
        let (t1, t2): (f64, f64) = (0.7, 1.2);
        let cot2 = |t: f64| (t.cos() / t.sin()).powi(2);
        assert!((stubborn_flip(t1, t2, 0.0) - 1.0 / (cot2(t1) * cot2(t2) + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn backprop_flip_matches_noisy_form_at_zero_noise() {
        let (s, c) = 0.4f64.sin_cos();
        let x1 = 0.3;
        let exact = s * s * (1.0 - c * c * x1) / (1.0 - 2.0 * x1 * s * s * c * c);
        assert!((backprop_flip(0.4, x1, 0.0) - exact).abs() < 1e-14);
    }

    #[test]
    fn complex_helper_sanity() {
        let v = vec![C::new(0.0, 1.0), r(0.0)];
        assert_eq!(n2(&v), 1.0);
    }
}
