#![allow(dead_code)]

use ctc_core::{build_circuit, make_gate, Channel, Circuit, GateKind, PureState};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_qubit<R: Rng>(rng: &mut R, label: &str) -> PureState {
    PureState::qubit_angles(label, rng.gen_range(0.0..std::f64::consts::PI), rng.gen_range(-3.0..3.0)).unwrap()
}

/// Random circuit with `ctc` loop qubits, `ext` external qubits and up to
/// `max_gates` gates drawn from the standard set.
pub fn random_circuit<R: Rng>(rng: &mut R, ctc: usize, ext: usize, max_gates: usize) -> Circuit {
    let mut channels = Vec::new();
    let mut labels = Vec::new();
    for i in 0..ctc {
        let l = format!("t{i}");
        channels.push(Channel::ctc(&l));
        labels.push(l);
    }
    for i in 0..ext {
        let l = format!("e{i}");
        channels.push(Channel::external(&l, random_qubit(rng, &l)));
        labels.push(l);
    }
    let n = rng.gen_range(1..=max_gates);
    let mut gates = Vec::new();
    while gates.len() < n {
        let angle = rng.gen_range(-3.2..3.2);
        let kind = match rng.gen_range(0..11) {
            0 => GateKind::X,
            1 => GateKind::Z,
            2 => GateKind::Rot(angle),
            3 => GateKind::Phase(angle),
            4 => GateKind::Swap,
            5 => GateKind::Cx,
            6 => GateKind::Cz,
            7 => GateKind::Crot(angle),
            8 => GateKind::Cphase(angle),
            9 => GateKind::Toffoli,
            _ => GateKind::Ccrot(angle),
        };
        if kind.arity() > labels.len() {
            continue;
        }
        let targets: Vec<&String> = labels.choose_multiple(rng, kind.arity()).collect();
        gates.push(make_gate(kind, &targets).unwrap());
    }
    build_circuit(channels, vec![], gates).unwrap()
}

pub fn random_sized_circuit(seed: u64, max_ctc: usize, max_ext: usize, max_gates: usize) -> Circuit {
    let mut r = rng(seed);
    let ctc = r.gen_range(1..=max_ctc);
    let ext = r.gen_range(1..=max_ext);
    random_circuit(&mut r, ctc, ext, max_gates)
}
