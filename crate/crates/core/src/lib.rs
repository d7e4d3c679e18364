//! Simulation of two bosonic field modes that start in thermal states, couple
//! to a two-level atom through the two-mode two-photon Jaynes-Cummings
//! interaction under phase decoherence, and become entangled after a
//! projective quantum-erasure measurement of the atom.
//!
//! The excitation structure of the interaction confines the dynamics to 2x2
//! invariant blocks labelled by Fock pairs `(n1, n2)`, so every quantity here
//! is assembled from closed-form block solutions:
//!
//! * [`model`] — physical parameters and the per-block Hamiltonian data
//!   (Rabi frequency, dressed energies).
//! * [`dynamics`] — block time evolution: the closed form as the fast path
//!   and a term-by-term decoherence-series oracle for validation.
//! * [`erasure`] — projective measurement of the atom in a tilted basis and
//!   the residual (unnormalized) two-mode field block.
//! * [`thermal`] — thermal averaging of field blocks with adaptive Fock
//!   truncation, producing a sparse two-mode [`FieldState`].
//! * [`entanglement`] — log-negativity via the band structure of the partial
//!   transpose, the stationary closed form, and a dense eigensolver oracle.
//! * [`sweep`] — parameter sweeps, single-point queries, figure presets, and
//!   deterministic CSV output backing the command-line front end.

pub mod dynamics;
pub mod entanglement;
pub mod erasure;
mod error;
pub mod linalg;
pub mod model;
pub mod sweep;
pub mod thermal;

pub use dynamics::AtomFieldBlockState;
pub use entanglement::{log_negativity, oracle_log_negativity, stationary_block_logneg};
pub use erasure::{FieldBlock, MeasurementOutcome, Outcome};
pub use error::{Error, Result};
pub use model::{BlockHamiltonian, ModelParams};
pub use sweep::{SweepMode, SweepResult, SweepSpec};
pub use thermal::{FieldState, ThermalSpec, TimeSpec, TruncationConfig};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
