//! Physical parameters and the analytic block decomposition of the
//! Hamiltonian.
//!
//! The interaction `g (a1 a2 sigma+ + a1' a2' sigma-)` conserves the two
//! excitation numbers `K_i = n_i + (1 + sigma_z)/2`, so the Hamiltonian is
//! block diagonal over pairs `{|n1, n2, e>, |n1+1, n2+1, g>}`. Everything a
//! block needs at runtime is its Rabi frequency and the two dressed energies;
//! [`BlockHamiltonian`] carries exactly that.

use crate::error::{Error, Result};

/// Physical constants of the model, hbar = 1.
///
/// All frequencies and rates are plain reals in mutually consistent units.
/// The detuning is always derived, never stored: `delta = omega - omega1 -
/// omega2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Mode-1 frequency (inverse time).
    pub omega1: f64,
    /// Mode-2 frequency (inverse time).
    pub omega2: f64,
    /// Atomic transition frequency (inverse time).
    pub omega: f64,
    /// Atom-field coupling constant (inverse time), strictly positive.
    pub g: f64,
    /// Phase decoherence coefficient (time), nonnegative.
    pub gamma: f64,
    /// Measurement polar angle, in [0, pi].
    pub theta: f64,
    /// Measurement azimuthal angle, in [0, 2 pi).
    pub phi: f64,
}

impl ModelParams {
    pub fn new(
        omega1: f64,
        omega2: f64,
        omega: f64,
        g: f64,
        gamma: f64,
        theta: f64,
        phi: f64,
    ) -> Result<Self> {
        let params = ModelParams {
            omega1,
            omega2,
            omega,
            g,
            gamma,
            theta,
            phi,
        };
        params.validate()?;
        Ok(params)
    }

    /// Builds parameters from the detuning instead of the atomic frequency:
    /// `omega = omega1 + omega2 + delta`.
    pub fn with_detuning(
        omega1: f64,
        omega2: f64,
        delta: f64,
        g: f64,
        gamma: f64,
        theta: f64,
        phi: f64,
    ) -> Result<Self> {
        Self::new(
            omega1,
            omega2,
            omega1 + omega2 + delta,
            g,
            gamma,
            theta,
            phi,
        )
    }

    /// Detuning between the atomic transition and the two-photon resonance.
    pub fn detuning(&self) -> f64 {
        self.omega - self.omega1 - self.omega2
    }

    fn validate(&self) -> Result<()> {
        let fields = [
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("omega", self.omega),
            ("g", self.g),
            ("gamma", self.gamma),
            ("theta", self.theta),
            ("phi", self.phi),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        if self.omega1 <= 0.0 || self.omega2 <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "mode frequencies must be positive (omega1 = {}, omega2 = {})",
                self.omega1, self.omega2
            )));
        }
        // g = 0 means no coupling at all: every formula stays finite but the
        // simulation is vacuous, so fail loudly instead.
        if self.g <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "coupling g must be strictly positive, got {}",
                self.g
            )));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidParams(format!(
                "decoherence coefficient gamma must be nonnegative, got {}",
                self.gamma
            )));
        }
        if !(0.0..=std::f64::consts::PI).contains(&self.theta) {
            return Err(Error::InvalidParams(format!(
                "measurement angle theta must lie in [0, pi], got {}",
                self.theta
            )));
        }
        if !(0.0..std::f64::consts::TAU).contains(&self.phi) {
            return Err(Error::InvalidParams(format!(
                "measurement angle phi must lie in [0, 2 pi), got {}",
                self.phi
            )));
        }
        Ok(())
    }
}

/// The 2x2 invariant-subspace decomposition for the Fock pair `(n1, n2)`.
///
/// `n1`, `n2` label the excited-atom component `|n1, n2> ⊗ |e>`; the partner
/// state is `|n1+1, n2+1> ⊗ |g>`. The dressed energies satisfy
/// `f_plus - f_minus = 2 omega_rabi` and `(f_plus + f_minus)/2 = base_energy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockHamiltonian {
    pub n1: u32,
    pub n2: u32,
    /// Rabi frequency `sqrt(delta^2/4 + g^2 (n1+1)(n2+1))`.
    pub omega_rabi: f64,
    pub f_plus: f64,
    pub f_minus: f64,
    /// `omega1 (n1 + 1/2) + omega2 (n2 + 1/2)`.
    pub base_energy: f64,
}

/// Rabi frequency of block `(n1, n2)`: `sqrt(delta^2/4 + g^2 (n1+1)(n2+1))`.
pub fn rabi_frequency(n1: u32, n2: u32, params: &ModelParams) -> f64 {
    let delta = params.detuning();
    let k = f64::from(n1 + 1) * f64::from(n2 + 1);
    (delta * delta / 4.0 + params.g * params.g * k).sqrt()
}

/// Dressed-state data of block `(n1, n2)`.
pub fn block_hamiltonian(n1: u32, n2: u32, params: &ModelParams) -> BlockHamiltonian {
    let omega_rabi = rabi_frequency(n1, n2, params);
    let base_energy = params.omega1 * (f64::from(n1) + 0.5) + params.omega2 * (f64::from(n2) + 0.5);
    BlockHamiltonian {
        n1,
        n2,
        omega_rabi,
        f_plus: base_energy + omega_rabi,
        f_minus: base_energy - omega_rabi,
        base_energy,
    }
}
