//! Shared fixtures for the pipeline benchmarks.

use qerase_core::erasure::Outcome;
use qerase_core::thermal::{ThermalSpec, TimeSpec, TruncationConfig};
use qerase_core::{FieldState, ModelParams};

pub fn reference_params() -> ModelParams {
    ModelParams::with_detuning(1.0, 1.0, 1.0, 0.5, 0.5, std::f64::consts::FRAC_PI_2, 0.0)
        .expect("reference parameters are valid")
}

/// A stationary thermal state warm enough to exercise long chains.
pub fn warm_state(mbar: f64) -> FieldState {
    qerase_core::thermal::mix_thermal(
        TimeSpec::Stationary,
        &reference_params(),
        &ThermalSpec::new(mbar, mbar).expect("valid spec"),
        &TruncationConfig::default(),
        Outcome::Plus,
    )
    .expect("mixing succeeds")
}
