//! Simulation of post-selected closed timelike curves (P-CTCs) on dense
//! state vectors, with Bell, noisy, classical and continuous-measure models.

pub mod analysis;
pub mod catalog;
pub mod circuit;
pub mod engine;
pub mod error;
pub mod state;

pub use circuit::{build_circuit, compile_unitary, make_gate, Channel, Circuit, EntangledInit, Gate, GateKind, Role};
pub use engine::{Coupling, CtcModel, PostSelectionResult, ProjectionSet, Simulator, WeightMatrix};
pub use error::{CtcError, Result};
pub use state::{Amplitude, DensityOperator, Operator, PureState};
