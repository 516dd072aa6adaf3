//! Closed-form derived quantities: skew factors, input bias, entropy and work,
//! discrimination and error-correction rates.

use std::f64::consts::{LN_2, PI};

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use crate::circuit::Circuit;
use crate::engine::{CtcModel, PostSelectionResult, Simulator, MIN_NODES};
use crate::error::{CtcError, Result};
use crate::state::{re, Amplitude, DensityOperator, PureState};

/// Agreement required between two quadrature resolutions in [`input_bias`].
pub const BIAS_CONVERGENCE_TOL: f64 = 1e-6;

/// Odds multiplier applied to the selected outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewFactor {
    pub omega: f64,
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CtcError::Config(format!("{name} = {p} outside [0, 1]")));
    }
    Ok(())
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega >= 0.0) || omega.is_infinite() {
        return Err(CtcError::Config(format!("skew factor {omega} must be finite and >= 0")));
    }
    Ok(())
}

/// `Ω = 4/λ − 3`.
pub fn skew_noisy(lambda: f64) -> Result<SkewFactor> {
    check_prob("lambda", lambda)?;
    if lambda == 0.0 {
        return Err(CtcError::InfiniteSkew("noiseless Bell channel".into()));
    }
    Ok(SkewFactor {
        omega: 4.0 / lambda - 3.0,
    })
}

/// `Ω = 1/k − 1`.
pub fn skew_classical(k: f64) -> Result<SkewFactor> {
    check_prob("k", k)?;
    if k == 0.0 {
        return Err(CtcError::InfiniteSkew("noiseless classical channel".into()));
    }
    Ok(SkewFactor { omega: 1.0 / k - 1.0 })
}

pub fn skew_factor(model: &CtcModel) -> Result<SkewFactor> {
    match model {
        CtcModel::NoisyBell { lambda } => skew_noisy(*lambda),
        CtcModel::Classical { k, .. } => skew_classical(*k),
        CtcModel::ExactBell => Err(CtcError::InfiniteSkew("exact Bell projection".into())),
        m => Err(CtcError::Unsupported(format!("no skew factor for the {} model", m.name()))),
    }
}

/// Skew of independent selections in series.
pub fn compose_skew(omegas: &[f64]) -> Result<f64> {
    for &o in omegas {
        check_omega(o)?;
    }
    Ok(omegas.iter().product())
}

/// `P̄ = ΩP / (ΩP + 1 − P)`.
pub fn boosted_success(p: f64, omega: f64) -> Result<f64> {
    check_prob("P_s", p)?;
    check_omega(omega)?;
    if p == 1.0 {
        return Ok(1.0);
    }
    Ok(omega * p / (omega * p + 1.0 - p))
}

/// Inconclusive rate of unambiguous discrimination after skewing:
/// `P̄_n = P_n / (P_n + Ω − Ω P_n)`.
pub fn povm_inconclusive(overlap: f64, omega: f64) -> Result<f64> {
    check_prob("overlap", overlap)?;
    check_omega(omega)?;
    if overlap == 0.0 {
        return Ok(0.0);
    }
    Ok(overlap / (overlap + omega - omega * overlap))
}

/// Ambient inconclusive rate for the mixture at angle θ:
/// `P_n(θ) = 4 P_n cos²θ / (2 + 2 Re⟨a|b⟩)`.
pub fn povm_ambient(overlap: f64, theta: f64, re_ab: f64) -> Result<f64> {
    check_prob("overlap", overlap)?;
    let den = 2.0 + 2.0 * re_ab;
    if !(den > 0.0) {
        return Err(CtcError::Config("states are antiparallel".into()));
    }
    Ok(4.0 * overlap * theta.cos().powi(2) / den)
}

/// Mixture weight `w(θ) = 1 − P_n(θ) + P̄_n(θ)`.
pub fn povm_mixture_weight(overlap: f64, theta: f64, re_ab: f64, omega: f64) -> Result<f64> {
    let pn = povm_ambient(overlap, theta, re_ab)?;
    let pbar = povm_inconclusive(pn.min(1.0), omega)?;
    Ok(1.0 - pn + pbar)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    /// Entropy change in nats.
    pub delta_s: f64,
    pub a_max: f64,
    pub z_max: f64,
    pub delta_s_max: f64,
}

/// Entropy change when one state of prior probability `a` (in an ensemble of
/// entropy `s0`) has its odds multiplied by `omega`.
pub fn entropy_skew(a: f64, s0: f64, omega: f64) -> Result<EntropyReport> {
    if !(a > 0.0 && a < 1.0) {
        return Err(CtcError::Config(format!("a = {a} outside (0, 1)")));
    }
    check_omega(omega)?;
    let max = entropy_skew_max(omega)?;
    if omega == 1.0 {
        return Ok(EntropyReport {
            delta_s: 0.0,
            ..max
        });
    }
    let zp = (omega - 1.0) * a + 1.0;
    let olno = if omega == 0.0 { 0.0 } else { omega * omega.ln() };
    let delta_s = (1.0 / zp - 1.0) * (s0 + a.ln()) + zp.ln() - (a / zp) * olno;
    Ok(EntropyReport { delta_s, ..max })
}

/// Selection probability maximizing the entropy drop, with its `Z′` and `ΔS`.
pub fn entropy_skew_max(omega: f64) -> Result<EntropyReport> {
    check_omega(omega)?;
    if omega == 1.0 {
        return Ok(EntropyReport {
            delta_s: 0.0,
            a_max: 0.5,
            z_max: 1.0,
            delta_s_max: 0.0,
        });
    }
    if omega == 0.0 {
        return Ok(EntropyReport {
            delta_s: 0.0,
            a_max: 1.0,
            z_max: 0.0,
            delta_s_max: f64::NEG_INFINITY,
        });
    }
    let l = omega.ln();
    let a_max = (1.0 - omega + omega * l) / (omega - 1.0).powi(2);
    let z_max = omega * l / (omega - 1.0);
    Ok(EntropyReport {
        delta_s: 0.0,
        a_max,
        z_max,
        delta_s_max: z_max.ln() - z_max + 1.0,
    })
}

/// Work (nats, unit temperature) from a Szilard engine whose partition sits
/// at `x` and whose left-hand outcome is selected with skew `omega`.
pub fn szilard_work(x: f64, omega: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(CtcError::Config(format!("x = {x} outside (0, 1)")));
    }
    check_omega(omega)?;
    let pl = omega * x / ((omega - 1.0) * x + 1.0);
    Ok(-pl * x.ln() - (1.0 - pl) * (1.0 - x).ln() - LN_2)
}

/// `W_TM = ln Ω`.
pub fn tm_entropy_potential(omega: f64) -> Result<f64> {
    check_omega(omega)?;
    Ok(omega.ln())
}

/// Fidelity of parity-selected repetition coding over `n` channels with bit
/// error probability `eps`: `(1−ε)^{n+1} / ((1−ε)^{n+1} + εⁿ)`.
pub fn ec_fidelity(eps: f64, n: u32) -> Result<f64> {
    check_prob("eps", eps)?;
    if n == 0 {
        return Err(CtcError::Config("n must be at least 1".into()));
    }
    let good = (1.0 - eps).powi(n as i32 + 1);
    Ok(good / (good + eps.powi(n as i32)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParityReport {
    /// Probability that the extra controls have even parity.
    pub e2: f64,
    pub d2: f64,
    /// Effective classical noise seen by the loop, `D²`.
    pub k_eff: f64,
    /// `|E²_m − ½|` after each step.
    pub epsilons: Vec<f64>,
}

/// Parity statistics of several control bits with `|0⟩` amplitudes `alphas`.
pub fn parity_recursion(alphas: &[f64]) -> Result<ParityReport> {
    let mut e2 = 1.0;
    let mut d2 = 0.0;
    let mut epsilons = Vec::with_capacity(alphas.len());
    for &a in alphas {
        if !(0.0..=1.0).contains(&a.abs()) {
            return Err(CtcError::Config(format!("alpha = {a} outside [-1, 1]")));
        }
        let a2 = a * a;
        let (ne, nd) = (e2 * a2 + d2 * (1.0 - a2), d2 * a2 + e2 * (1.0 - a2));
        e2 = ne;
        d2 = nd;
        epsilons.push((e2 - 0.5).abs());
    }
    Ok(ParityReport {
        e2,
        d2,
        k_eff: d2,
        epsilons,
    })
}

/// Error rates of a search after time `t`: noisy post-selection at projection
/// rate `alpha_rate` versus a Chernoff-bounded repetition with per-test time
/// `gamma` and single-attempt success `p`.
pub fn search_error_rates(p0: f64, alpha_rate: f64, t: f64, gamma: f64, p: f64) -> Result<(f64, f64)> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(CtcError::Config(format!("P0 = {p0} outside (0, 1)")));
    }
    check_prob("p", p)?;
    if !(t >= 0.0) {
        return Err(CtcError::Config("t must be >= 0".into()));
    }
    let eps_omega = 0.5 / ((alpha_rate * t).exp() * p0 / (1.0 - p0) + 1.0);
    let eps_chernoff = (-2.0 * (p - 0.5).powi(2) * gamma * t).exp();
    Ok((eps_omega, eps_chernoff))
}

/// `P(a ≠ b)` from the diagonal of the output density operator.
pub fn flip_probability(result: &PostSelectionResult, a: &str, b: &str) -> Result<f64> {
    let rho = &result.rho;
    Ok(rho.probability(&[(a, 0), (b, 1)])? + rho.probability(&[(a, 1), (b, 0)])?)
}

/// Weak-measurement mixture value
/// `(⟨f⊥|A|ψ⟩ + Ω⟨f|A|ψ⟩) / (⟨f⊥|ψ⟩ + Ω⟨f|ψ⟩)`, where `ψ = U₁|φ⟩` and the
/// final states are already pulled back through `U₂`.
pub fn weak_mixture_value(
    psi: &PureState,
    a_psi: &PureState,
    selected: &PureState,
    rejected: &PureState,
    omega: f64,
) -> Result<Amplitude> {
    check_omega(omega)?;
    let num = rejected.inner(a_psi)? + selected.inner(a_psi)? * omega;
    let den = rejected.inner(psi)? + selected.inner(psi)? * omega;
    if den.norm() == 0.0 {
        return Err(CtcError::Numerics("vanishing weak-value denominator".into()));
    }
    Ok(num / den)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    pub rho_bar: DensityOperator,
    /// `∫ Z(ψ) dψ` over the flat `(ϑ, χ)` measure.
    pub z_rho: f64,
}

fn acceptance(sim: &Simulator, circuit: &Circuit, model: &CtcModel) -> Result<f64> {
    match sim.run(circuit, model) {
        Ok(r) => Ok(r.z),
        Err(CtcError::Paradox { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

fn bias_at(
    sim: &Simulator,
    circuit: &Circuit,
    channel: &str,
    model: &CtcModel,
    nodes: usize,
) -> Result<BiasReport> {
    let gl = GaussLegendre::new(nodes).map_err(|e| CtcError::Numerics(format!("{e}")))?;
    let half = PI / 2.0;
    let dchi = 2.0 * PI / nodes as f64;
    let mut z_rho = 0.0;
    let mut rho = DensityOperator::zeros(vec![channel])?;
    for &(x, wx) in gl.as_node_weight_pairs() {
        let theta = half * (x + 1.0);
        for b in 0..nodes {
            let chi = dchi * b as f64;
            let psi = PureState::qubit_angles(channel, theta, chi)?;
            let z = acceptance(sim, &circuit.with_external_init(channel, psi.clone())?, model)?;
            let w = half * wx * dchi * z;
            z_rho += w;
            rho.add_outer(&psi, w)?;
        }
    }
    if !(z_rho > 0.0) {
        return Err(CtcError::Paradox {
            norm: z_rho,
            projections: None,
        });
    }
    Ok(BiasReport {
        rho_bar: rho.scaled(1.0 / z_rho),
        z_rho,
    })
}

/// Input statistics of `channel` skewed by the acceptance `Z(ψ)`:
/// `ρ̄ = ∫ Z(ψ)|ψ⟩⟨ψ| / ∫ Z` over `ψ = cos ϑ|0⟩ + e^{iχ} sin ϑ|1⟩`.
pub fn input_bias(
    sim: &Simulator,
    circuit: &Circuit,
    channel: &str,
    model: &CtcModel,
    nodes: usize,
) -> Result<BiasReport> {
    if nodes < MIN_NODES {
        return Err(CtcError::Config(format!("input bias needs at least {MIN_NODES} nodes")));
    }
    let fine = bias_at(sim, circuit, channel, model, nodes)?;
    let coarse_nodes = if nodes / 2 >= MIN_NODES { nodes / 2 } else { nodes + 4 };
    let coarse = bias_at(sim, circuit, channel, model, coarse_nodes)?;
    let gap = fine.rho_bar.max_abs_diff(&coarse.rho_bar);
    if gap > BIAS_CONVERGENCE_TOL {
        return Err(CtcError::Numerics(format!(
            "input bias not converged: {nodes} and {coarse_nodes} nodes differ by {gap:e}"
        )));
    }
    Ok(fine)
}

/// Input bias over a finite set of equally likely inputs (e.g. classical bits).
pub fn input_bias_discrete(
    sim: &Simulator,
    circuit: &Circuit,
    channel: &str,
    model: &CtcModel,
    inputs: &[PureState],
) -> Result<BiasReport> {
    let mut z_rho = 0.0;
    let mut rho = DensityOperator::zeros(vec![channel])?;
    for psi in inputs {
        let psi = psi.relabeled(&[channel])?;
        let z = acceptance(sim, &circuit.with_external_init(channel, psi.clone())?, model)?;
        z_rho += z;
        rho.add_outer(&psi, z)?;
    }
    if !(z_rho > 0.0) {
        return Err(CtcError::Paradox {
            norm: z_rho,
            projections: None,
        });
    }
    Ok(BiasReport {
        rho_bar: rho.scaled(1.0 / z_rho),
        z_rho,
    })
}

/// Computational basis states of one qubit.
pub fn classical_bits(label: &str) -> Vec<PureState> {
    vec![
        PureState::qubit(label, re(1.0), Complex64::new(0.0, 0.0)).expect("qubit"),
        PureState::qubit(label, Complex64::new(0.0, 0.0), re(1.0)).expect("qubit"),
    ]
}
