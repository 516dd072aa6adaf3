//! Labelled pure states and density operators.
//!
//! Kets are stored big-endian: the first label is the most significant bit of
//! the basis index, so `|01⟩` over `[a, b]` has `a = 0`, `b = 1`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{CtcError, Result};

pub type Amplitude = Complex64;

/// Hard cap on the number of qubits in a dense state.
pub const MAX_QUBITS: usize = 14;

pub const ZERO: Amplitude = Complex64::new(0.0, 0.0);
pub const ONE: Amplitude = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Amplitude {
    Complex64::new(re, im)
}

pub fn re(x: f64) -> Amplitude {
    Complex64::new(x, 0.0)
}

fn check_labels(labels: &[String]) -> Result<()> {
    if labels.len() > MAX_QUBITS {
        return Err(CtcError::TooManyQubits(labels.len()));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(CtcError::LabelCollision(l.clone()));
        }
    }
    Ok(())
}

fn position(labels: &[String], label: &str) -> Result<usize> {
    labels
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| CtcError::Label(label.to_string()))
}

/// Bit mask of the qubit at `pos` in an `n`-qubit big-endian index.
fn mask(n: usize, pos: usize) -> usize {
    1 << (n - 1 - pos)
}

/// Dense square matrix acting on a fixed number of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: DMatrix<Amplitude>,
    arity: usize,
}

impl Operator {
    pub fn new(matrix: DMatrix<Amplitude>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim != matrix.ncols() || !dim.is_power_of_two() || dim < 2 {
            return Err(CtcError::Config(format!(
                "operator must be square with power-of-two dimension, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CtcError::Config("operator has non-finite entries".into()));
        }
        Ok(Operator {
            arity: dim.trailing_zeros() as usize,
            matrix,
        })
    }

    pub fn from_rows(rows: &[&[Amplitude]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(CtcError::Config("operator rows are ragged".into()));
        }
        Operator::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(arity: usize) -> Self {
        Operator {
            matrix: DMatrix::identity(1 << arity, 1 << arity),
            arity,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn matrix(&self) -> &DMatrix<Amplitude> {
        &self.matrix
    }

    /// Largest entry of `|U†U − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.matrix.nrows();
        let prod = self.matrix.adjoint() * &self.matrix - DMatrix::<Amplitude>::identity(d, d);
        prod.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// `self · other` (apply `other` first).
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        if self.arity != other.arity {
            return Err(CtcError::Arity {
                expected: self.arity,
                got: other.arity,
            });
        }
        Operator::new(&self.matrix * &other.matrix)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    labels: Vec<String>,
    amps: Vec<Amplitude>,
}

impl PureState {
    pub fn new<S: Into<String>>(labels: Vec<S>, amps: Vec<Amplitude>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        check_labels(&labels)?;
        if amps.len() != 1 << labels.len() {
            return Err(CtcError::InvalidState(format!(
                "{} amplitudes for {} qubits",
                amps.len(),
                labels.len()
            )));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CtcError::InvalidState("non-finite amplitude".into()));
        }
        Ok(PureState { labels, amps })
    }

    /// The zero-qubit state with amplitude `z`.
    pub fn scalar(z: Amplitude) -> Self {
        PureState {
            labels: Vec::new(),
            amps: vec![z],
        }
    }

    pub fn qubit(label: &str, a: Amplitude, b: Amplitude) -> Result<Self> {
        PureState::new(vec![label], vec![a, b])
    }

    /// `cos θ |0⟩ + e^{iχ} sin θ |1⟩`.
    pub fn qubit_angles(label: &str, theta: f64, chi: f64) -> Result<Self> {
        PureState::qubit(
            label,
            re(theta.cos()),
            Complex64::from_polar(theta.sin(), chi),
        )
    }

    pub fn basis<S: Into<String>>(labels: Vec<S>, index: usize) -> Result<Self> {
        let n = labels.len();
        let mut amps = vec![ZERO; 1 << n.min(MAX_QUBITS + 1)];
        if index >= amps.len() {
            return Err(CtcError::InvalidState(format!(
                "basis index {index} out of range"
            )));
        }
        amps[index] = ONE;
        PureState::new(labels, amps)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        position(&self.labels, label)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`; both states must carry the same labels in the same order.
    pub fn inner(&self, other: &PureState) -> Result<Amplitude> {
        if self.labels != other.labels {
            return Err(CtcError::Label(format!(
                "inner product over mismatched labels {:?} vs {:?}",
                self.labels, other.labels
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scaled(&self, z: Amplitude) -> PureState {
        PureState {
            labels: self.labels.clone(),
            amps: self.amps.iter().map(|a| a * z).collect(),
        }
    }

    /// Elementwise sum; labels must agree.
    pub fn add(&self, other: &PureState) -> Result<PureState> {
        if self.labels != other.labels {
            return Err(CtcError::Label(format!(
                "sum over mismatched labels {:?} vs {:?}",
                self.labels, other.labels
            )));
        }
        Ok(PureState {
            labels: self.labels.clone(),
            amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect(),
        })
    }

    /// `self ⊗ other`, with `self`'s labels first.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        if let Some(l) = other.labels.iter().find(|l| self.labels.contains(l)) {
            return Err(CtcError::LabelCollision(l.clone()));
        }
        let n = self.labels.len() + other.labels.len();
        if n > MAX_QUBITS {
            return Err(CtcError::TooManyQubits(n));
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(PureState { labels, amps })
    }

    /// Applies `op` to the qubits named by `targets`; the first target is the
    /// most significant bit of the operator's index.
    pub fn apply_gate(&self, op: &Operator, targets: &[&str]) -> Result<PureState> {
        let mut out = self.clone();
        out.apply_in_place(op, targets)?;
        Ok(out)
    }

    pub fn apply_in_place(&mut self, op: &Operator, targets: &[&str]) -> Result<()> {
        if targets.len() != op.arity() {
            return Err(CtcError::Arity {
                expected: op.arity(),
                got: targets.len(),
            });
        }
        let n = self.labels.len();
        let mut masks = Vec::with_capacity(targets.len());
        for (i, t) in targets.iter().enumerate() {
            if targets[..i].contains(t) {
                return Err(CtcError::Config(format!("repeated gate target {t}")));
            }
            masks.push(mask(n, position(&self.labels, t)?));
        }
        let all: usize = masks.iter().sum();
        let k = masks.len();
        let sub = 1usize << k;
        // Offsets of each operator basis index within the full index.
        let offsets: Vec<usize> = (0..sub)
            .map(|s| {
                (0..k)
                    .filter(|&j| s & (1 << (k - 1 - j)) != 0)
                    .map(|j| masks[j])
                    .sum()
            })
            .collect();
        let m = op.matrix();
        let mut local = vec![ZERO; sub];
        for base in 0..self.amps.len() {
            if base & all != 0 {
                continue;
            }
            for s in 0..sub {
                local[s] = self.amps[base + offsets[s]];
            }
            for r in 0..sub {
                let mut acc = ZERO;
                for s in 0..sub {
                    acc += m[(r, s)] * local[s];
                }
                self.amps[base + offsets[r]] = acc;
            }
        }
        Ok(())
    }

    /// Contracts the qubits named by `bra`'s labels with `⟨bra|`.
    /// The remaining qubits keep their relative order; the result is unnormalized.
    pub fn project(&self, bra: &PureState) -> Result<PureState> {
        let n = self.labels.len();
        let bmasks: Vec<usize> = bra
            .labels
            .iter()
            .map(|l| position(&self.labels, l).map(|p| mask(n, p)))
            .collect::<Result<_>>()?;
        let rest_labels: Vec<String> = self
            .labels
            .iter()
            .filter(|l| !bra.labels.contains(l))
            .cloned()
            .collect();
        let rest_masks: Vec<usize> = rest_labels
            .iter()
            .map(|l| mask(n, position(&self.labels, l).unwrap()))
            .collect();
        let kb = bmasks.len();
        let kr = rest_masks.len();
        let bra_off: Vec<usize> = (0..1usize << kb)
            .map(|s| spread(s, &bmasks))
            .collect();
        let mut amps = vec![ZERO; 1 << kr];
        for (r, out) in amps.iter_mut().enumerate() {
            let base = spread(r, &rest_masks);
            let mut acc = ZERO;
            for (s, off) in bra_off.iter().enumerate() {
                let b = bra.amps[s];
                if b != ZERO {
                    acc += b.conj() * self.amps[base + off];
                }
            }
            *out = acc;
        }
        Ok(PureState {
            labels: rest_labels,
            amps,
        })
    }

    /// Reorders qubits so the labels appear as in `order`.
    pub fn permuted(&self, order: &[&str]) -> Result<PureState> {
        if order.len() != self.labels.len() {
            return Err(CtcError::Label(format!(
                "permutation {:?} does not cover {:?}",
                order, self.labels
            )));
        }
        let n = self.labels.len();
        let masks: Vec<usize> = order
            .iter()
            .map(|l| position(&self.labels, l).map(|p| mask(n, p)))
            .collect::<Result<_>>()?;
        let labels: Vec<String> = order.iter().map(|s| s.to_string()).collect();
        check_labels(&labels)?;
        let amps = (0..self.amps.len())
            .map(|i| self.amps[spread(i, &masks)])
            .collect();
        Ok(PureState { labels, amps })
    }

    pub fn relabeled(&self, labels: &[&str]) -> Result<PureState> {
        PureState::new(labels.to_vec(), self.amps.clone())
    }

    /// Returns the normalized state and the original norm.
    pub fn normalize(&self, tol: f64) -> Result<(PureState, f64)> {
        let norm = self.norm();
        if !(norm >= tol) {
            return Err(CtcError::Paradox {
                norm,
                projections: None,
            });
        }
        Ok((self.scaled(re(1.0 / norm)), norm))
    }

    pub fn to_density(&self) -> DensityOperator {
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        DensityOperator {
            labels: self.labels.clone(),
            matrix: &v * v.adjoint(),
        }
    }
}

/// Scatters the bits of `s` (most significant first) onto `masks`.
fn spread(s: usize, masks: &[usize]) -> usize {
    let k = masks.len();
    masks
        .iter()
        .enumerate()
        .filter(|(j, _)| s & (1 << (k - 1 - j)) != 0)
        .map(|(_, m)| m)
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    labels: Vec<String>,
    matrix: DMatrix<Amplitude>,
}

impl DensityOperator {
    pub fn new<S: Into<String>>(labels: Vec<S>, matrix: DMatrix<Amplitude>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        check_labels(&labels)?;
        let d = 1 << labels.len();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(CtcError::InvalidState(format!(
                "{}x{} density matrix for {} qubits",
                matrix.nrows(),
                matrix.ncols(),
                labels.len()
            )));
        }
        Ok(DensityOperator { labels, matrix })
    }

    pub fn zeros<S: Into<String>>(labels: Vec<S>) -> Result<Self> {
        let n = labels.len();
        DensityOperator::new(labels, DMatrix::zeros(1 << n, 1 << n))
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &DMatrix<Amplitude> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> Amplitude {
        self.matrix[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// `self += w |ψ⟩⟨ψ|`.
    pub fn add_outer(&mut self, psi: &PureState, w: f64) -> Result<()> {
        if psi.labels != self.labels {
            return Err(CtcError::Label(format!(
                "outer product over {:?} added to operator over {:?}",
                psi.labels, self.labels
            )));
        }
        let d = self.dim();
        for i in 0..d {
            let a = psi.amps[i] * w;
            if a == ZERO {
                continue;
            }
            for j in 0..d {
                self.matrix[(i, j)] += a * psi.amps[j].conj();
            }
        }
        Ok(())
    }

    pub fn add_scaled(&mut self, other: &DensityOperator, w: f64) -> Result<()> {
        if other.labels != self.labels {
            return Err(CtcError::Label(format!(
                "sum over mismatched labels {:?} vs {:?}",
                other.labels, self.labels
            )));
        }
        self.matrix += other.matrix.map(|z| z * w);
        Ok(())
    }

    pub fn scaled(&self, w: f64) -> DensityOperator {
        DensityOperator {
            labels: self.labels.clone(),
            matrix: self.matrix.map(|z| z * w),
        }
    }

    /// Trace-one copy; fails if the trace vanishes.
    pub fn normalized(&self, tol: f64) -> Result<DensityOperator> {
        let t = self.trace();
        if !(t.abs() >= tol) {
            return Err(CtcError::Paradox {
                norm: t,
                projections: None,
            });
        }
        Ok(self.scaled(1.0 / t))
    }

    /// Reduced operator on `keep`, in the order given.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityOperator> {
        let n = self.labels.len();
        let keep_masks: Vec<usize> = keep
            .iter()
            .map(|l| position(&self.labels, l).map(|p| mask(n, p)))
            .collect::<Result<_>>()?;
        let keep_labels: Vec<String> = keep.iter().map(|s| s.to_string()).collect();
        check_labels(&keep_labels)?;
        let rest_masks: Vec<usize> = self
            .labels
            .iter()
            .filter(|l| !keep.contains(&l.as_str()))
            .map(|l| mask(n, position(&self.labels, l).unwrap()))
            .collect();
        let dk = 1 << keep_masks.len();
        let rest: Vec<usize> = (0..1usize << rest_masks.len())
            .map(|r| spread(r, &rest_masks))
            .collect();
        let kidx: Vec<usize> = (0..dk).map(|a| spread(a, &keep_masks)).collect();
        let matrix = DMatrix::from_fn(dk, dk, |a, b| {
            rest.iter()
                .map(|r| self.matrix[(kidx[a] + r, kidx[b] + r)])
                .sum()
        });
        Ok(DensityOperator {
            labels: keep_labels,
            matrix,
        })
    }

    /// Probability (relative to the trace) that the named qubits read `bits`.
    pub fn probability(&self, fixed: &[(&str, u8)]) -> Result<f64> {
        let n = self.labels.len();
        let mut want = 0usize;
        let mut care = 0usize;
        for (l, b) in fixed {
            let m = mask(n, position(&self.labels, l)?);
            care |= m;
            if *b != 0 {
                want |= m;
            }
        }
        let hit: f64 = (0..self.dim())
            .filter(|i| i & care == want)
            .map(|i| self.matrix[(i, i)].re)
            .sum();
        Ok(hit / self.trace())
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()).map(|z| z * 0.5);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &DensityOperator) -> f64 {
        if self.matrix.shape() != other.matrix.shape() {
            return f64::INFINITY;
        }
        (&self.matrix - &other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn x_op() -> Operator {
        Operator::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]]).unwrap()
    }

    fn cx_op() -> Operator {
        let mut m = DMatrix::identity(4, 4);
        m[(2, 2)] = ZERO;
        m[(3, 3)] = ZERO;
        m[(2, 3)] = ONE;
        m[(3, 2)] = ONE;
        Operator::new(m).unwrap()
    }

    #[test]
    fn tensor_is_big_endian() {
        let a = PureState::basis(vec!["a"], 0).unwrap();
        let b = PureState::basis(vec!["b"], 1).unwrap();
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.amplitudes()[1], ONE);
        assert_eq!(ab.labels(), ["a", "b"]);
    }

    #[test]
    fn tensor_collision() {
        let a = PureState::basis(vec!["a"], 0).unwrap();
        assert!(matches!(a.tensor(&a), Err(CtcError::LabelCollision(_))));
    }

    #[test]
    fn cx_control_order() {
        let s = PureState::basis(vec!["a", "b"], 0b10).unwrap();
        let t = s.apply_gate(&cx_op(), &["a", "b"]).unwrap();
        assert_eq!(t.amplitudes()[0b11], ONE);
        let u = s.apply_gate(&cx_op(), &["b", "a"]).unwrap();
        assert_eq!(u.amplitudes()[0b10], ONE);
    }

    #[test]
    fn apply_errors() {
        let s = PureState::basis(vec!["a", "b"], 0).unwrap();
        assert!(matches!(
            s.apply_gate(&x_op(), &["a", "b"]),
            Err(CtcError::Arity { expected: 1, got: 2 })
        ));
        assert!(matches!(
            s.apply_gate(&x_op(), &["z"]),
            Err(CtcError::Label(_))
        ));
    }

    #[test]
    fn bell_projection_teleports() {
        // ⟨B|_{r,l} (|B⟩_{r,l} ⊗ ψ) with loop and ext swapped gives ψ/2.
        let h = FRAC_1_SQRT_2;
        let bell = PureState::new(vec!["r", "l"], vec![re(h), ZERO, ZERO, re(h)]).unwrap();
        let psi = PureState::qubit("x", re(0.6), c(0.0, 0.8)).unwrap();
        let swap = Operator::from_rows(&[
            &[ONE, ZERO, ZERO, ZERO],
            &[ZERO, ZERO, ONE, ZERO],
            &[ZERO, ONE, ZERO, ZERO],
            &[ZERO, ZERO, ZERO, ONE],
        ])
        .unwrap();
        let full = bell.tensor(&psi).unwrap().apply_gate(&swap, &["l", "x"]).unwrap();
        let out = full.project(&bell).unwrap();
        assert_eq!(out.labels(), ["x"]);
        assert_abs_diff_eq!(out.norm(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!((out.amplitudes()[1] - c(0.0, 0.4)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn partial_trace_of_bell_is_mixed() {
        let h = FRAC_1_SQRT_2;
        let bell = PureState::new(vec!["a", "b"], vec![re(h), ZERO, ZERO, re(h)]).unwrap();
        let red = bell.to_density().partial_trace(&["b"]).unwrap();
        assert_abs_diff_eq!(red.entry(0, 0).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(red.entry(0, 1).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(red.trace(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn partial_trace_reorders() {
        let s = PureState::basis(vec!["a", "b", "c"], 0b100).unwrap();
        let red = s.to_density().partial_trace(&["c", "a"]).unwrap();
        assert_eq!(red.entry(0b01, 0b01), ONE);
    }

    #[test]
    fn permute_roundtrip() {
        let s = PureState::new(
            vec!["a", "b"],
            vec![re(0.1), re(0.2), re(0.3), re(0.4)],
        )
        .unwrap();
        let p = s.permuted(&["b", "a"]).unwrap();
        assert_eq!(p.amplitudes()[0b01], re(0.3));
        assert_eq!(p.permuted(&["a", "b"]).unwrap(), s);
    }

    #[test]
    fn normalize_paradox() {
        let s = PureState::qubit("a", re(1e-13), ZERO).unwrap();
        assert!(s.normalize(1e-12).unwrap_err().is_paradox());
        let (t, n) = PureState::qubit("a", re(3.0), re(4.0)).unwrap().normalize(1e-12).unwrap();
        assert_abs_diff_eq!(n, 5.0);
        assert_abs_diff_eq!(t.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn qubit_cap() {
        let labels: Vec<String> = (0..15).map(|i| format!("q{i}")).collect();
        assert!(matches!(
            PureState::basis(labels, 0),
            Err(CtcError::TooManyQubits(15))
        ));
    }

    #[test]
    fn eigenvalues_of_mixed_state() {
        let rho = DensityOperator::new(
            vec!["a"],
            DMatrix::from_row_slice(2, 2, &[re(0.75), c(0.0, 0.25), c(0.0, -0.25), re(0.25)]),
        )
        .unwrap();
        let ev = rho.eigenvalues();
        let s = 0.25 * 2f64.sqrt();
        assert_abs_diff_eq!(ev[0], 0.5 - s, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[1], 0.5 + s, epsilon = 1e-12);
    }
}
