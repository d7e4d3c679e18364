//! Thermal averaging of erased field blocks with adaptive Fock truncation.
//!
//! The two-mode output state is a thermally weighted sum of unnormalized
//! field blocks, normalized once at the end. The only subtle point is the
//! accumulation rule: the population at `(m1, m2)` receives `w_low` from
//! block `(m1, m2)` *and* `w_high` from block `(m1-1, m2-1)`, whenever both
//! blocks exist.

use std::collections::BTreeMap;

use crate::dynamics::{evolve_block, stationary_block, AtomFieldBlockState};
use crate::erasure::{erase, trace_out_atom, FieldBlock, Outcome};
use crate::error::{Error, Result};
use crate::linalg::hermitian_tridiagonal_eigenvalues;
use crate::model::ModelParams;
use crate::C64;

/// Mean photon numbers of the two initial thermal fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalSpec {
    pub mbar1: f64,
    pub mbar2: f64,
}

impl ThermalSpec {
    pub fn new(mbar1: f64, mbar2: f64) -> Result<Self> {
        for (name, value) in [("mbar1", mbar1), ("mbar2", mbar2)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "mean photon number {name} must be finite and nonnegative, got {value}"
                )));
            }
        }
        Ok(ThermalSpec { mbar1, mbar2 })
    }

    /// `beta omega` for the given mean photon number: `ln(1 + 1/mbar)`.
    pub fn beta_omega(mbar: f64) -> f64 {
        (1.0 + 1.0 / mbar).ln()
    }

    /// Mean photon number at inverse temperature `beta omega = x`:
    /// `1/(e^x - 1)`.
    pub fn mbar_from_beta_omega(x: f64) -> f64 {
        1.0 / (x.exp() - 1.0)
    }
}

/// Adaptive per-mode Fock cutoff derived from the geometric tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationConfig {
    /// Maximum total thermal probability mass discarded, split evenly
    /// between the two modes.
    pub tail_mass: f64,
    /// Absolute per-mode cutoff; exceeding it is an error, not a clamp.
    pub hard_cap: usize,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig {
            tail_mass: 1e-10,
            hard_cap: 512,
        }
    }
}

impl TruncationConfig {
    pub fn new(tail_mass: f64, hard_cap: usize) -> Result<Self> {
        if !(tail_mass > 0.0 && tail_mass < 1.0) {
            return Err(Error::InvalidParams(format!(
                "tail mass must lie in (0, 1), got {tail_mass}"
            )));
        }
        Ok(TruncationConfig {
            tail_mass,
            hard_cap,
        })
    }

    /// Smallest cutoff `N` with `sum_{n > N} mbar^n/(1+mbar)^{n+1} <=
    /// tail_mass / 2`, i.e. the geometric tail `(mbar/(1+mbar))^{N+1}` is
    /// below the per-mode budget.
    pub fn cutoff(&self, mbar: f64) -> Result<usize> {
        if mbar == 0.0 {
            return Ok(0);
        }
        let ratio = mbar / (1.0 + mbar);
        let required = ((self.tail_mass / 2.0).ln() / ratio.ln()).ceil() - 1.0;
        let required = required.max(0.0) as usize;
        if required > self.hard_cap {
            return Err(Error::TruncationOverflow {
                mbar,
                required,
                cap: self.hard_cap,
            });
        }
        Ok(required)
    }
}

/// Product geometric weight of the Fock pair `(n1, n2)` in the two-mode
/// thermal ensemble. Sums to 1 over all pairs.
pub fn thermal_weight(n1: u32, n2: u32, spec: &ThermalSpec) -> f64 {
    fn mode_weight(n: u32, mbar: f64) -> f64 {
        mbar.powi(n as i32) / (1.0 + mbar).powi(n as i32 + 1)
    }
    mode_weight(n1, spec.mbar1) * mode_weight(n2, spec.mbar2)
}

/// Evolution time fed to the thermal mixer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeSpec {
    At(f64),
    Stationary,
}

/// Sparse two-mode field density matrix: diagonal populations plus
/// coherences along the `(+1, +1)` displacement only. The map key `(n1, n2)`
/// of a coherence denotes the coefficient of `|n1, n2><n1+1, n2+1|`, so
/// off-band coherences are unrepresentable by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    populations: BTreeMap<(u32, u32), f64>,
    coherences: BTreeMap<(u32, u32), C64>,
    /// Normalization constant actually applied (1 / pre-normalization trace).
    normalization: f64,
}

impl FieldState {
    pub fn population(&self, m1: u32, m2: u32) -> f64 {
        self.populations.get(&(m1, m2)).copied().unwrap_or(0.0)
    }

    pub fn coherence(&self, n1: u32, n2: u32) -> C64 {
        self.coherences
            .get(&(n1, n2))
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn populations(&self) -> impl Iterator<Item = (&(u32, u32), &f64)> {
        self.populations.iter()
    }

    pub fn coherences(&self) -> impl Iterator<Item = (&(u32, u32), &C64)> {
        self.coherences.iter()
    }

    pub fn trace(&self) -> f64 {
        self.populations.values().sum()
    }

    /// The normalization constant applied when the state was assembled.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Largest Fock labels carrying weight, per mode.
    pub fn max_labels(&self) -> (u32, u32) {
        let mut max1 = 0;
        let mut max2 = 0;
        for &(m1, m2) in self.populations.keys() {
            max1 = max1.max(m1);
            max2 = max2.max(m2);
        }
        (max1, max2)
    }

    /// Builds a state from raw parts, normalizing and validating.
    pub fn from_parts(
        populations: BTreeMap<(u32, u32), f64>,
        coherences: BTreeMap<(u32, u32), C64>,
    ) -> Result<Self> {
        let mut acc = FieldStateAccumulator::new();
        for (&(m1, m2), &p) in &populations {
            acc.add_population(m1, m2, p);
        }
        for (&(n1, n2), &c) in &coherences {
            acc.add_coherence(n1, n2, c);
        }
        acc.finish()
    }

    /// Smallest eigenvalue of the full state.
    ///
    /// Coherences couple labels along `(+1, +1)` diagonals, so the state
    /// splits into Hermitian tridiagonal chains plus isolated populations.
    pub fn min_eigenvalue(&self) -> f64 {
        let mut min = f64::INFINITY;
        let mut chained = std::collections::BTreeSet::new();
        for &(n1, n2) in self.coherences.keys() {
            chained.insert((n1, n2));
            chained.insert((n1 + 1, n2 + 1));
        }
        // Walk each chain from its start ((n1-1, n2-1) not coupled).
        for &(n1, n2) in self.coherences.keys() {
            let starts_here =
                n1 == 0 || n2 == 0 || !self.coherences.contains_key(&(n1 - 1, n2 - 1));
            if !starts_here {
                continue;
            }
            let mut diag = vec![self.population(n1, n2)];
            let mut off = Vec::new();
            let (mut a, mut b) = (n1, n2);
            while let Some(&c) = self.coherences.get(&(a, b)) {
                off.push(c);
                a += 1;
                b += 1;
                diag.push(self.population(a, b));
            }
            let eigs =
                hermitian_tridiagonal_eigenvalues(&diag, &off).expect("chain eigensolver failed");
            min = min.min(eigs[0]);
        }
        for (&label, &p) in &self.populations {
            if !chained.contains(&label) {
                min = min.min(p);
            }
        }
        if min == f64::INFINITY {
            0.0
        } else {
            min
        }
    }

    fn validate(&self) -> Result<()> {
        let trace = self.trace();
        if (trace - 1.0).abs() > 1e-10 {
            return Err(Error::Unnormalized(trace));
        }
        for (&(n1, n2), c) in &self.coherences {
            let bound = self.population(n1, n2) * self.population(n1 + 1, n2 + 1);
            if c.norm_sqr() > bound + 1e-12 {
                return Err(Error::InvalidParams(format!(
                    "coherence at ({n1}, {n2}) violates positivity: |c|^2 = {} > {bound}",
                    c.norm_sqr()
                )));
            }
        }
        Ok(())
    }
}

/// Accumulates weighted field blocks into an unnormalized state; `finish`
/// normalizes once, matching the global normalization constant.
#[derive(Debug, Default)]
pub struct FieldStateAccumulator {
    populations: BTreeMap<(u32, u32), f64>,
    coherences: BTreeMap<(u32, u32), C64>,
}

impl FieldStateAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_population(&mut self, m1: u32, m2: u32, weight: f64) {
        if weight != 0.0 {
            *self.populations.entry((m1, m2)).or_insert(0.0) += weight;
        }
    }

    pub fn add_coherence(&mut self, n1: u32, n2: u32, c: C64) {
        if c != C64::new(0.0, 0.0) {
            *self
                .coherences
                .entry((n1, n2))
                .or_insert(C64::new(0.0, 0.0)) += c;
        }
    }

    /// The accumulation rule: `w_low` lands on `(n1, n2)`, `w_high` on
    /// `(n1+1, n2+1)`, and the coherence stays keyed by `(n1, n2)`.
    pub fn add_block(&mut self, block: &FieldBlock, weight: f64) {
        self.add_population(block.n1, block.n2, weight * block.w_low);
        self.add_population(block.n1 + 1, block.n2 + 1, weight * block.w_high);
        self.add_coherence(block.n1, block.n2, weight * block.c);
    }

    pub fn finish(self) -> Result<FieldState> {
        let total: f64 = self.populations.values().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidParams(
                "accumulated state has zero trace (outcome has zero probability)".into(),
            ));
        }
        let normalization = 1.0 / total;
        let populations = self
            .populations
            .into_iter()
            .map(|(k, v)| (k, v * normalization))
            .collect();
        let coherences = self
            .coherences
            .into_iter()
            .map(|(k, v)| (k, v * normalization))
            .collect();
        let state = FieldState {
            populations,
            coherences,
            normalization,
        };
        state.validate()?;
        Ok(state)
    }
}

/// Thermally averaged post-measurement field state.
pub fn mix_thermal(
    time: TimeSpec,
    params: &ModelParams,
    spec: &ThermalSpec,
    trunc: &TruncationConfig,
    outcome: Outcome,
) -> Result<FieldState> {
    mix_with(time, params, spec, trunc, |block| {
        erase(block, params.theta, params.phi, outcome)
    })
}

/// Thermally averaged field state when the atom is traced out instead of
/// measured; always diagonal.
pub fn mix_thermal_traced(
    time: TimeSpec,
    params: &ModelParams,
    spec: &ThermalSpec,
    trunc: &TruncationConfig,
) -> Result<FieldState> {
    mix_with(time, params, spec, trunc, trace_out_atom)
}

/// Single-Fock-input pathway: the erased block `(n1, n2)` alone, normalized.
pub fn single_block_state(
    time: TimeSpec,
    params: &ModelParams,
    n1: u32,
    n2: u32,
    outcome: Outcome,
) -> Result<FieldState> {
    let block = block_at(time, params, n1, n2)?;
    let mut acc = FieldStateAccumulator::new();
    acc.add_block(&erase(&block, params.theta, params.phi, outcome), 1.0);
    acc.finish()
}

fn block_at(time: TimeSpec, params: &ModelParams, n1: u32, n2: u32) -> Result<AtomFieldBlockState> {
    match time {
        TimeSpec::At(t) => evolve_block(n1, n2, t, params),
        TimeSpec::Stationary => stationary_block(n1, n2, params),
    }
}

fn mix_with(
    time: TimeSpec,
    params: &ModelParams,
    spec: &ThermalSpec,
    trunc: &TruncationConfig,
    channel: impl Fn(&AtomFieldBlockState) -> FieldBlock,
) -> Result<FieldState> {
    let n1_max = trunc.cutoff(spec.mbar1)? as u32;
    let n2_max = trunc.cutoff(spec.mbar2)? as u32;
    let mut acc = FieldStateAccumulator::new();
    for n1 in 0..=n1_max {
        for n2 in 0..=n2_max {
            let weight = thermal_weight(n1, n2, spec);
            if weight == 0.0 {
                continue;
            }
            let block = block_at(time, params, n1, n2)?;
            acc.add_block(&channel(&block), weight);
        }
    }
    acc.finish()
}

/// Cutoffs that `mix_thermal` would use, for reporting.
pub fn cutoffs(spec: &ThermalSpec, trunc: &TruncationConfig) -> Result<(usize, usize)> {
    Ok((trunc.cutoff(spec.mbar1)?, trunc.cutoff(spec.mbar2)?))
}
