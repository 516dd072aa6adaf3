//! Post-selection models for CTC channels.
//!
//! Every CTC channel `c` is paired with a reference qubit `c.ref`. The joint
//! state handed to the circuit is laid out as
//! `[c1.ref, c1, c2.ref, c2, …, externals…]`; gates never touch a reference
//! qubit. Projecting the output onto a two-qubit state `|χ⟩` of `(c.ref, c)`
//! means contracting with `⟨χ|`, which leaves an unnormalized external state.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use crate::circuit::{reference_label, Circuit, Role};
use crate::error::{CtcError, Result};
use crate::state::{re, Amplitude, DensityOperator, PureState, ONE, ZERO};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Environment variable overriding the paradox tolerance.
pub const TOLERANCE_ENV: &str = "CTC_SIM_TOLERANCE";

pub const DEFAULT_NODES: usize = 64;
pub const MIN_NODES: usize = 8;

/// Total volume of the flat `(θ, ξ) ∈ [0, π] × [0, 2π]` measure.
pub const DELTA_MEASURE_VOLUME: f64 = 2.0 * PI * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellLabel {
    /// `(|00⟩ + |11⟩)/√2`
    B,
    /// `(|00⟩ − |11⟩)/√2`
    Minus,
    /// `(|01⟩ + |10⟩)/√2`
    N,
    /// `(|01⟩ − |10⟩)/√2`
    MinusN,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [BellLabel::B, BellLabel::Minus, BellLabel::N, BellLabel::MinusN];

    pub fn symbol(self) -> &'static str {
        match self {
            BellLabel::B => "B",
            BellLabel::Minus => "-",
            BellLabel::N => "N",
            BellLabel::MinusN => "-N",
        }
    }

    /// Amplitudes over `(ref, loop)`.
    pub fn amplitudes(self) -> [Amplitude; 4] {
        let h = re(FRAC_1_SQRT_2);
        match self {
            BellLabel::B => [h, ZERO, ZERO, h],
            BellLabel::Minus => [h, ZERO, ZERO, -h],
            BellLabel::N => [ZERO, h, h, ZERO],
            BellLabel::MinusN => [ZERO, h, -h, ZERO],
        }
    }

    pub fn state(self, ctc: &str) -> PureState {
        PureState::new(vec![reference_label(ctc), ctc.to_string()], self.amplitudes().to_vec())
            .expect("two-qubit Bell state")
    }
}

/// Label of a multi-CTC Bell projection, one symbol per CTC channel.
pub fn bell_label_string(labels: &[BellLabel]) -> String {
    labels.iter().map(|l| l.symbol()).collect::<Vec<_>>().join(",")
}

/// Non-negative weights `ω[(i, j)]` over classical CTC histories: `i` is the
/// basis state emerging into the circuit, `j` the one entering the CTC.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    dim: usize,
    w: Vec<f64>,
}

impl WeightMatrix {
    pub fn new(dim: usize, w: Vec<f64>) -> Result<Self> {
        if dim < 2 || !dim.is_power_of_two() || w.len() != dim * dim {
            return Err(CtcError::Config(format!(
                "weight matrix needs a power-of-two dimension and {0}x{0} entries",
                dim
            )));
        }
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(CtcError::Config("weights must be finite and non-negative".into()));
        }
        if w.iter().all(|x| *x == 0.0) {
            return Err(CtcError::Config("weight matrix is identically zero".into()));
        }
        Ok(WeightMatrix { dim, w })
    }

    fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let w = (0..dim * dim).map(|x| f(x / dim, x % dim)).collect();
        WeightMatrix::new(dim, w)
    }

    /// `ω = 1/d`: every history accepted equally.
    pub fn flat(dim: usize) -> Result<Self> {
        WeightMatrix::from_fn(dim, |_, _| 1.0 / dim as f64)
    }

    /// `ω ∝ 2δ_ij + 1`, normalized so that `Σ_ij ω_ij = d`.
    pub fn quad(dim: usize) -> Result<Self> {
        let d = dim as f64;
        let s = d / (2.0 * d + d * d);
        WeightMatrix::from_fn(dim, |i, j| s * (if i == j { 3.0 } else { 1.0 }))
    }

    /// `ω = δ_ij`.
    pub fn delta(dim: usize) -> Result<Self> {
        WeightMatrix::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// Weights of the classical-noise model.
    pub fn classical(dim: usize, k: f64, floor: bool) -> Result<Self> {
        check_unit("k", k)?;
        let d = dim as f64;
        if floor {
            WeightMatrix::from_fn(dim, |i, j| if i == j { 1.0 - k + k / d } else { k / d })
        } else {
            WeightMatrix::from_fn(dim, |i, j| if i == j { 1.0 - k } else { k / (d - 1.0) })
        }
    }

    /// Each of `m` CTC bits independently arrives flipped with probability `k`.
    pub fn independent_flips(m: usize, k: f64) -> Result<Self> {
        check_unit("k", k)?;
        WeightMatrix::from_fn(1 << m, |i, j| {
            let flips = (i ^ j).count_ones() as i32;
            k.powi(flips) * (1.0 - k).powi(m as i32 - flips)
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.dim + j]
    }

    pub fn sum(&self) -> f64 {
        self.w.iter().sum()
    }
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(CtcError::Config(format!("{name} = {x} outside [0, 1]")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum CtcModel {
    ExactBell,
    NoisyBell { lambda: f64 },
    Classical { k: f64, floor: bool },
    WeightMatrix(WeightMatrix),
    DeltaQuadrature { theta_nodes: usize, xi_nodes: usize },
}

impl CtcModel {
    pub fn delta_default() -> Self {
        CtcModel::DeltaQuadrature {
            theta_nodes: DEFAULT_NODES,
            xi_nodes: DEFAULT_NODES,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CtcModel::ExactBell => "exact_bell",
            CtcModel::NoisyBell { .. } => "noisy_bell",
            CtcModel::Classical { floor: false, .. } => "classical",
            CtcModel::Classical { floor: true, .. } => "classical_floor",
            CtcModel::WeightMatrix(_) => "weight_matrix",
            CtcModel::DeltaQuadrature { .. } => "delta",
        }
    }

    /// Short description of the normalization convention behind `Z`.
    pub fn measure(&self) -> String {
        match self {
            CtcModel::ExactBell => "Z = N^2, N = |<B|psi_out>|".into(),
            CtcModel::NoisyBell { lambda } => format!(
                "Bell weights (1-3l/4) on B, l/4 on each orthogonal state, product over CTCs; l = {lambda}"
            ),
            CtcModel::Classical { k, floor: false } => {
                format!("classical histories: 1-k on matching, k/(d-1) per mismatch; k = {k}")
            }
            CtcModel::Classical { k, floor: true } => {
                format!("classical histories: (1-k)delta_ij + k/d; k = {k}")
            }
            CtcModel::WeightMatrix(w) => {
                format!("sum_ij w_ij |<e_j|U|e_i psi>|^2, d = {}, sum w = {}", w.dim(), w.sum())
            }
            CtcModel::DeltaQuadrature {
                theta_nodes,
                xi_nodes,
            } => format!(
                "flat measure dtheta dxi on [0,pi]x[0,2pi] (volume 2pi^2); {theta_nodes}x{xi_nodes} nodes"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionEntry {
    pub label: String,
    /// Unnormalized external state left after the projection.
    pub state: PureState,
    pub norm_sqr: f64,
    /// Model weight attached to this projection.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProjectionSet {
    pub entries: Vec<ProjectionEntry>,
}

impl ProjectionSet {
    pub fn get(&self, label: &str) -> Option<&ProjectionEntry> {
        self.entries.iter().find(|e| e.label == label)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ProjectionEntry> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Σ weight · ‖ψ̄‖²`.
    pub fn weighted_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.weight * e.norm_sqr).sum()
    }

    /// `Σ weight |ψ̄⟩⟨ψ̄|`, unnormalized.
    pub fn weighted_density(&self, labels: &[&str]) -> Result<DensityOperator> {
        let mut rho = DensityOperator::zeros(labels.to_vec())?;
        for e in &self.entries {
            if e.weight != 0.0 {
                rho.add_outer(&e.state, e.weight)?;
            }
        }
        Ok(rho)
    }
}

#[derive(Debug, Clone)]
pub struct PostSelectionResult {
    pub model: CtcModel,
    /// Acceptance normalization of the model.
    pub z: f64,
    /// `‖ψ̄_B‖` for Bell-type models.
    pub n: Option<f64>,
    /// Trace-one density operator over the external channels.
    pub rho: DensityOperator,
    /// Distribution of the state emerging from the CTC, when the model defines one.
    pub rho_loop: Option<DensityOperator>,
    pub projections: ProjectionSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// On- and off-branch weights share one normalization.
    Coupled,
    /// The on-branch is renormalized on its own and keeps its prior weight.
    Insulated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simulator {
    pub tolerance: f64,
}

impl Default for Simulator {
    fn default() -> Self {
        Simulator {
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

/// Paradox tolerance from `CTC_SIM_TOLERANCE`, else the default.
pub fn tolerance_from_env() -> Result<f64> {
    match std::env::var(TOLERANCE_ENV) {
        Err(_) => Ok(DEFAULT_TOLERANCE),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(t) if t.is_finite() && t >= 0.0 => Ok(t),
            _ => Err(CtcError::Config(format!("bad {TOLERANCE_ENV} value {s:?}"))),
        },
    }
}

/// Initial joint state: a Bell pair per CTC channel, then the externals.
pub fn bell_out_state(circuit: &Circuit) -> Result<PureState> {
    pair_out_state(circuit, &BellLabel::B.amplitudes())
}

fn pair_out_state(circuit: &Circuit, pair: &[Amplitude]) -> Result<PureState> {
    let ctcs = circuit.ctc_labels();
    if ctcs.is_empty() {
        return Err(CtcError::NoCtc);
    }
    let mut s = PureState::scalar(ONE);
    for c in &ctcs {
        let p = PureState::new(vec![reference_label(c), c.to_string()], pair.to_vec())?;
        s = s.tensor(&p)?;
    }
    s.tensor(&circuit.external_state()?)
}

fn all_bell_labels(m: usize) -> Vec<Vec<BellLabel>> {
    (0..1usize << (2 * m))
        .map(|x| {
            (0..m)
                .map(|q| BellLabel::ALL[(x >> (2 * (m - 1 - q))) & 3])
                .collect()
        })
        .collect()
}

/// All `4^m` Bell-basis projections of the evolved output, with unit weights.
pub fn bell_projections(circuit: &Circuit) -> Result<ProjectionSet> {
    let out = circuit.evolve(&bell_out_state(circuit)?)?;
    project_bell_basis(circuit, &out)
}

fn project_bell_basis(circuit: &Circuit, out: &PureState) -> Result<ProjectionSet> {
    let ctcs = circuit.ctc_labels();
    let mut entries = Vec::new();
    for combo in all_bell_labels(ctcs.len()) {
        let mut bra = PureState::scalar(ONE);
        for (c, l) in ctcs.iter().zip(&combo) {
            bra = bra.tensor(&l.state(c))?;
        }
        let state = out.project(&bra)?;
        entries.push(ProjectionEntry {
            label: bell_label_string(&combo),
            norm_sqr: state.norm_sqr(),
            state,
            weight: 1.0,
        });
    }
    Ok(ProjectionSet { entries })
}

/// Projects every CTC onto the same two-qubit reference `pair` (over
/// `(ref, loop)`), starting from that pair; returns the unnormalized external state.
pub fn project_with_pair(circuit: &Circuit, pair: &[Amplitude]) -> Result<PureState> {
    if pair.len() != 4 {
        return Err(CtcError::InvalidState("reference pair needs 4 amplitudes".into()));
    }
    let out = circuit.evolve(&pair_out_state(circuit, pair)?)?;
    let mut bra = PureState::scalar(ONE);
    for c in circuit.ctc_labels() {
        bra = bra.tensor(&PureState::new(
            vec![reference_label(c), c.to_string()],
            pair.to_vec(),
        )?)?;
    }
    out.project(&bra)
}

/// `A[i][j] = ⟨e_j|_ctc U |e_i⟩_ctc |ψ⟩`: history emerging as `e_i`, entering as `e_j`.
pub fn history_projections(circuit: &Circuit) -> Result<Vec<Vec<PureState>>> {
    let ctcs = circuit.ctc_labels();
    if ctcs.is_empty() {
        return Err(CtcError::NoCtc);
    }
    let ext = circuit.external_state()?;
    let labels = circuit.labels();
    let d = 1usize << ctcs.len();
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let input = PureState::basis(ctcs.clone(), i)?
            .tensor(&ext)?
            .permuted(&labels)?;
        let evolved = circuit.evolve(&input)?;
        let row = (0..d)
            .map(|j| evolved.project(&PureState::basis(ctcs.clone(), j)?))
            .collect::<Result<Vec<_>>>()?;
        out.push(row);
    }
    Ok(out)
}

impl Simulator {
    pub fn new(tolerance: f64) -> Self {
        Simulator { tolerance }
    }

    pub fn from_env() -> Result<Self> {
        Ok(Simulator::new(tolerance_from_env()?))
    }

    pub fn run(&self, circuit: &Circuit, model: &CtcModel) -> Result<PostSelectionResult> {
        match model {
            CtcModel::ExactBell => self.run_exact_bell(circuit),
            CtcModel::NoisyBell { lambda } => self.run_noisy_bell(circuit, *lambda),
            CtcModel::Classical { k, floor } => self.run_classical(circuit, *k, *floor),
            CtcModel::WeightMatrix(w) => self.run_weight_matrix(circuit, w),
            CtcModel::DeltaQuadrature {
                theta_nodes,
                xi_nodes,
            } => self.run_delta_quadrature(circuit, *theta_nodes, *xi_nodes),
        }
    }

    pub fn run_exact_bell(&self, circuit: &Circuit) -> Result<PostSelectionResult> {
        let mut set = bell_projections(circuit)?;
        let b = bell_label_string(&vec![BellLabel::B; circuit.ctc_labels().len()]);
        for e in &mut set.entries {
            e.weight = if e.label == b { 1.0 } else { 0.0 };
        }
        let psi_b = set.get(&b).expect("B projection").state.clone();
        let n = psi_b.norm();
        if !(n >= self.tolerance) {
            return Err(CtcError::Paradox {
                norm: n,
                projections: Some(Box::new(set)),
            });
        }
        let (unit, _) = psi_b.normalize(self.tolerance)?;
        Ok(PostSelectionResult {
            model: CtcModel::ExactBell,
            z: n * n,
            n: Some(n),
            rho: unit.to_density(),
            rho_loop: None,
            projections: set,
        })
    }

    pub fn run_noisy_bell(&self, circuit: &Circuit, lambda: f64) -> Result<PostSelectionResult> {
        check_unit("lambda", lambda)?;
        let mut set = bell_projections(circuit)?;
        let m = circuit.ctc_labels().len();
        let combos = all_bell_labels(m);
        for (e, combo) in set.entries.iter_mut().zip(&combos) {
            e.weight = noisy_weight(combo, lambda);
        }
        let n = set.entries[0].norm_sqr.sqrt();
        let (z, rho) = self.weighted_result(circuit, &set)?;
        Ok(PostSelectionResult {
            model: CtcModel::NoisyBell { lambda },
            z,
            n: Some(n),
            rho,
            rho_loop: None,
            projections: set,
        })
    }

    pub fn run_classical(&self, circuit: &Circuit, k: f64, floor: bool) -> Result<PostSelectionResult> {
        check_unit("k", k)?;
        let d = 1usize << circuit.ctc_labels().len().max(1);
        let w = WeightMatrix::classical(d, k, floor)?;
        let mut r = self.run_weight_matrix(circuit, &w)?;
        r.model = CtcModel::Classical { k, floor };
        Ok(r)
    }

    pub fn run_weight_matrix(&self, circuit: &Circuit, w: &WeightMatrix) -> Result<PostSelectionResult> {
        let a = history_projections(circuit)?;
        let d = a.len();
        if w.dim() != d {
            return Err(CtcError::Config(format!(
                "weight matrix is {0}x{0} but the CTC register has dimension {d}",
                w.dim()
            )));
        }
        let mut entries = Vec::with_capacity(d * d);
        let mut loop_w = vec![0.0; d];
        for (i, row) in a.into_iter().enumerate() {
            for (j, state) in row.into_iter().enumerate() {
                let norm_sqr = state.norm_sqr();
                loop_w[i] += w.get(i, j) * norm_sqr;
                entries.push(ProjectionEntry {
                    label: format!("({i},{j})"),
                    state,
                    norm_sqr,
                    weight: w.get(i, j),
                });
            }
        }
        let set = ProjectionSet { entries };
        let (z, rho) = self.weighted_result(circuit, &set)?;
        let ctcs = circuit.ctc_labels();
        let mut rho_loop = DensityOperator::zeros(ctcs)?;
        for (i, x) in loop_w.iter().enumerate() {
            let e = PureState::basis(rho_loop.labels().to_vec(), i)?;
            rho_loop.add_outer(&e, x / z)?;
        }
        Ok(PostSelectionResult {
            model: CtcModel::WeightMatrix(w.clone()),
            z,
            n: None,
            rho,
            rho_loop: Some(rho_loop),
            projections: set,
        })
    }

    fn weighted_result(&self, circuit: &Circuit, set: &ProjectionSet) -> Result<(f64, DensityOperator)> {
        let z = set.weighted_norm();
        if !(z >= self.tolerance) {
            return Err(CtcError::Paradox {
                norm: z,
                projections: Some(Box::new(set.clone())),
            });
        }
        let rho = set.weighted_density(&circuit.external_labels())?.scaled(1.0 / z);
        Ok((z, rho))
    }

    /// Integrates over loop states `φ = cos θ|0⟩ + e^{iξ} sin θ|1⟩` with the
    /// flat measure `dθ dξ`: Gauss–Legendre in θ, trapezoid in ξ.
    pub fn run_delta_quadrature(
        &self,
        circuit: &Circuit,
        theta_nodes: usize,
        xi_nodes: usize,
    ) -> Result<PostSelectionResult> {
        let ctcs = circuit.ctc_labels();
        if ctcs.is_empty() {
            return Err(CtcError::NoCtc);
        }
        if ctcs.len() != 1 {
            return Err(CtcError::Unsupported(format!(
                "delta quadrature handles one CTC qubit, circuit has {}",
                ctcs.len()
            )));
        }
        if theta_nodes < MIN_NODES || xi_nodes < MIN_NODES {
            return Err(CtcError::Config(format!(
                "quadrature needs at least {MIN_NODES} nodes per axis"
            )));
        }
        let a = history_projections(circuit)?;
        let ext = circuit.external_labels();
        let gl = GaussLegendre::new(theta_nodes)
            .map_err(|e| CtcError::Numerics(format!("Gauss-Legendre rule: {e}")))?;
        let half = PI / 2.0;
        let dxi = 2.0 * PI / xi_nodes as f64;

        let mut z = 0.0;
        let mut rho = DensityOperator::zeros(ext.clone())?;
        let mut rho_loop = DensityOperator::zeros(ctcs.clone())?;
        for &(x, wx) in gl.as_node_weight_pairs() {
            let theta = half * (x + 1.0);
            let wt = half * wx;
            for b in 0..xi_nodes {
                let xi = dxi * b as f64;
                let w = wt * dxi;
                let phi = [re(theta.cos()), Complex64::from_polar(theta.sin(), xi)];
                let psi_bar = delta_projection(&a, &phi)?;
                let omega = psi_bar.norm_sqr();
                z += w * omega;
                rho.add_outer(&psi_bar, w)?;
                let loop_state = PureState::new(ctcs.clone(), phi.to_vec())?;
                rho_loop.add_outer(&loop_state, w * omega)?;
            }
        }
        if !(z >= self.tolerance) {
            return Err(CtcError::Paradox {
                norm: z,
                projections: None,
            });
        }
        Ok(PostSelectionResult {
            model: CtcModel::DeltaQuadrature {
                theta_nodes,
                xi_nodes,
            },
            z,
            n: None,
            rho: rho.scaled(1.0 / z),
            rho_loop: Some(rho_loop.scaled(1.0 / z)),
            projections: ProjectionSet::default(),
        })
    }

    /// Post-selects only on the branch where `power` reads 1.
    pub fn run_conditional(
        &self,
        circuit: &Circuit,
        power: &str,
        model: &CtcModel,
        mode: Coupling,
    ) -> Result<PostSelectionResult> {
        match circuit.role(power) {
            None => return Err(CtcError::Label(power.into())),
            Some(Role::Ctc) => {
                return Err(CtcError::Config(format!("power channel {power} is a CTC channel")))
            }
            Some(Role::External) => {}
        }
        for g in circuit.gates() {
            let touches_ctc = g.targets.iter().any(|t| circuit.role(t) == Some(Role::Ctc));
            if touches_ctc && g.acted_on().iter().any(|t| t == power) {
                return Err(CtcError::Config(format!(
                    "power channel {power} is entangled with a CTC by gate {}",
                    g.kind.name()
                )));
            }
        }
        let lambda = match model {
            CtcModel::ExactBell => 0.0,
            CtcModel::NoisyBell { lambda } => {
                check_unit("lambda", *lambda)?;
                *lambda
            }
            _ => {
                return Err(CtcError::Unsupported(format!(
                    "conditional post-selection with the {} model",
                    model.name()
                )))
            }
        };
        let out = circuit.evolve(&bell_out_state(circuit)?)?;
        let pos = out.position(power)?;
        let bit = 1usize << (out.num_qubits() - 1 - pos);
        let branch = |on: bool| -> Result<PureState> {
            let amps = out
                .amplitudes()
                .iter()
                .enumerate()
                .map(|(i, z)| if (i & bit != 0) == on { *z } else { ZERO })
                .collect();
            PureState::new(out.labels().to_vec(), amps)
        };
        let on = branch(true)?;
        let off = branch(false)?;
        let ext = circuit.external_labels();
        let w_on = on.norm_sqr();
        let rho_off = off.to_density().partial_trace(&ext)?;

        let mut set = project_bell_basis(circuit, &on)?;
        let combos = all_bell_labels(circuit.ctc_labels().len());
        for (e, combo) in set.entries.iter_mut().zip(&combos) {
            e.weight = noisy_weight(combo, lambda);
        }
        let z_on = set.weighted_norm();
        let rho_on = set.weighted_density(&ext)?;
        let n = if w_on > 0.0 {
            Some((set.entries[0].norm_sqr / w_on).sqrt())
        } else {
            None
        };
        let (z, mut rho) = match mode {
            Coupling::Coupled => {
                let z = z_on + rho_off.trace();
                let mut rho = rho_on;
                rho.add_scaled(&rho_off, 1.0)?;
                (z, rho)
            }
            Coupling::Insulated => {
                let mut rho = rho_off.clone();
                if w_on > 0.0 {
                    if !(z_on >= self.tolerance) {
                        return Err(CtcError::Paradox {
                            norm: z_on,
                            projections: Some(Box::new(set)),
                        });
                    }
                    rho.add_scaled(&rho_on, w_on / z_on)?;
                }
                (w_on + rho_off.trace(), rho)
            }
        };
        if !(z >= self.tolerance) {
            return Err(CtcError::Paradox {
                norm: z,
                projections: Some(Box::new(set)),
            });
        }
        let tr = rho.trace();
        rho = rho.scaled(1.0 / tr);
        Ok(PostSelectionResult {
            model: model.clone(),
            z,
            n,
            rho,
            rho_loop: None,
            projections: set,
        })
    }
}

fn noisy_weight(combo: &[BellLabel], lambda: f64) -> f64 {
    combo
        .iter()
        .map(|l| {
            if *l == BellLabel::B {
                1.0 - 0.75 * lambda
            } else {
                0.25 * lambda
            }
        })
        .product()
}

/// `ψ̄(φ) = Σ_ij φ_i φ_j* A[i][j]` for a single CTC qubit.
fn delta_projection(a: &[Vec<PureState>], phi: &[Amplitude; 2]) -> Result<PureState> {
    let mut acc = a[0][0].scaled(ZERO);
    for (i, row) in a.iter().enumerate() {
        for (j, s) in row.iter().enumerate() {
            acc = acc.add(&s.scaled(phi[i] * phi[j].conj()))?;
        }
    }
    Ok(acc)
}

/// Integrand of the δ model at loop state `φ`: `ω = ‖⟨φ|U|φ, ψ⟩‖²`.
pub fn delta_weight(circuit: &Circuit, theta: f64, xi: f64) -> Result<f64> {
    let a = history_projections(circuit)?;
    if a.len() != 2 {
        return Err(CtcError::Unsupported("delta weight needs one CTC qubit".into()));
    }
    let phi = [re(theta.cos()), Complex64::from_polar(theta.sin(), xi)];
    Ok(delta_projection(&a, &phi)?.norm_sqr())
}
