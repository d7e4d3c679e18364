//! Projective measurement of the atom in a tilted basis and the residual
//! two-mode field block.
//!
//! The measurement basis is `{cos(theta/2)|e> + e^{i phi} sin(theta/2)|g>,
//! cos(theta/2)|g> - e^{-i phi} sin(theta/2)|e>}`. Projecting the atom out of
//! an [`AtomFieldBlockState`] leaves an unnormalized field block whose trace
//! is the outcome probability; normalization is deferred to the thermal
//! mixer, which averages unnormalized blocks before dividing once.

use crate::dynamics::AtomFieldBlockState;
use crate::C64;

/// The two projection outcomes. `Plus` projects onto
/// `cos(theta/2)|e> + e^{i phi} sin(theta/2)|g>`, `Minus` onto the orthogonal
/// state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Plus => "plus",
            Outcome::Minus => "minus",
        }
    }
}

/// A measurement outcome together with its probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementOutcome {
    pub label: Outcome,
    pub probability: f64,
}

/// Unnormalized two-mode field block left after projecting the atom.
///
/// Weight `w_low` sits on `|n1, n2><n1, n2|`, `w_high` on
/// `|n1+1, n2+1><n1+1, n2+1|`, and `c` multiplies `|n1, n2><n1+1, n2+1|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldBlock {
    pub n1: u32,
    pub n2: u32,
    pub w_low: f64,
    pub w_high: f64,
    pub c: C64,
    /// Whether the block has been scaled to unit trace.
    pub normalized: bool,
}

impl FieldBlock {
    pub fn trace(&self) -> f64 {
        self.w_low + self.w_high
    }

    /// Scales the block to unit trace.
    pub fn normalize(&self) -> FieldBlock {
        let tr = self.trace();
        FieldBlock {
            n1: self.n1,
            n2: self.n2,
            w_low: self.w_low / tr,
            w_high: self.w_high / tr,
            c: self.c / tr,
            normalized: true,
        }
    }
}

/// Projects the atom out of `block` and returns the unnormalized residual
/// field block for the requested outcome. The trace of the result is the
/// outcome probability.
pub fn erase(block: &AtomFieldBlockState, theta: f64, phi: f64, outcome: Outcome) -> FieldBlock {
    let half = theta / 2.0;
    let cos_sq = half.cos().powi(2);
    let sin_sq = half.sin().powi(2);
    let half_sin = 0.5 * theta.sin();
    let phase = C64::from_polar(1.0, phi);

    let (w_low, w_high, c) = match outcome {
        Outcome::Plus => (
            cos_sq * block.p_ee,
            sin_sq * block.p_gg,
            half_sin * phase * block.c_eg,
        ),
        Outcome::Minus => (
            sin_sq * block.p_ee,
            cos_sq * block.p_gg,
            -half_sin * phase * block.c_eg,
        ),
    };

    FieldBlock {
        n1: block.n1,
        n2: block.n2,
        w_low,
        w_high,
        c,
        normalized: false,
    }
}

/// Probability of the requested outcome, i.e. the trace of the erased block.
pub fn outcome_probability(
    block: &AtomFieldBlockState,
    theta: f64,
    phi: f64,
    outcome: Outcome,
) -> f64 {
    erase(block, theta, phi, outcome).trace()
}

/// The no-measurement channel: tracing out the atom instead of erasing
/// leaves a diagonal (hence separable) field block.
pub fn trace_out_atom(block: &AtomFieldBlockState) -> FieldBlock {
    FieldBlock {
        n1: block.n1,
        n2: block.n2,
        w_low: block.p_ee,
        w_high: block.p_gg,
        c: C64::new(0.0, 0.0),
        normalized: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve_block, stationary_block};
    use crate::model::ModelParams;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn params(g: f64, delta: f64, gamma: f64) -> ModelParams {
        ModelParams::with_detuning(1.0, 1.0, delta, g, gamma, PI / 2.0, 0.0).unwrap()
    }

    #[test]
    fn theta_zero_projects_onto_excited_state() {
        let block = evolve_block(1, 0, 2.0, &params(0.5, 1.0, 0.3)).unwrap();
        let plus = erase(&block, 0.0, 0.4, Outcome::Plus);
        assert_eq!(plus.w_low, block.p_ee);
        assert_eq!(plus.w_high, 0.0);
        assert_eq!(plus.c, C64::new(0.0, 0.0));
        assert!((outcome_probability(&block, 0.0, 0.4, Outcome::Plus) - block.p_ee).abs() < 1e-15);
    }

    #[test]
    fn theta_pi_projects_onto_ground_state() {
        let block = evolve_block(1, 0, 2.0, &params(0.5, 1.0, 0.3)).unwrap();
        let p = outcome_probability(&block, PI, 0.0, Outcome::Plus);
        assert!((p - block.p_gg).abs() < 1e-15);
    }

    #[test]
    fn balanced_measurement_has_equal_probabilities() {
        let p = params(0.5, 1.0, 0.5);
        for t in [0.0, 0.7, 3.0, 11.0] {
            let block = evolve_block(0, 0, t, &p).unwrap();
            for outcome in [Outcome::Plus, Outcome::Minus] {
                let prob = outcome_probability(&block, PI / 2.0, 0.0, outcome);
                assert!((prob - 0.5).abs() < 1e-14, "t = {t}");
            }
        }
    }

    #[test]
    fn stationary_detuned_block_values() {
        let block = stationary_block(0, 0, &params(0.5, 1.0, 0.5)).unwrap();
        let plus = erase(&block, PI / 2.0, 0.0, Outcome::Plus);
        assert!((plus.w_low - 0.375).abs() < 1e-15);
        assert!((plus.w_high - 0.125).abs() < 1e-15);
        assert!((plus.c.re - 0.125).abs() < 1e-15);
        assert!(plus.c.im.abs() < 1e-15);
        assert!((plus.trace() - 0.5).abs() < 1e-15);
        assert!(!plus.normalized);
        let normalized = plus.normalize();
        assert!(normalized.normalized);
        assert!((normalized.trace() - 1.0).abs() < 1e-15);
    }

    /// The erased block must reproduce the explicit residual-state
    /// coefficients, written out here independently, term by term.
    #[test]
    fn erased_block_matches_explicit_coefficients() {
        let p = params(0.5, 1.0, 0.5);
        let theta: f64 = 1.1;
        let phi = 2.3;
        for (n1, n2, t) in [(0u32, 0u32, 0.9), (2, 1, 4.2), (1, 3, 17.0)] {
            let omega = crate::model::rabi_frequency(n1, n2, &p);
            let k = f64::from(n1 + 1) * f64::from(n2 + 1);
            let delta = p.detuning();
            let env = (-2.0 * p.gamma * t * omega * omega).exp();
            let cos2 = (2.0 * omega * t).cos();
            let sin2 = (2.0 * omega * t).sin();
            let d2 = delta * delta / (2.0 * omega * omega);

            let w_low = 0.25 * (theta / 2.0).cos().powi(2) * (2.0 + d2 + (2.0 - d2) * env * cos2);
            let w_high = 0.25
                * (theta / 2.0).sin().powi(2)
                * (p.g * p.g * k / (omega * omega))
                * (2.0 - 2.0 * env * cos2);
            let c = 0.125
                * theta.sin()
                * C64::from_polar(1.0, phi)
                * (p.g * k.sqrt() / omega)
                * C64::new(delta / omega * (1.0 - env * cos2), 2.0 * env * sin2);

            let block = evolve_block(n1, n2, t, &p).unwrap();
            let erased = erase(&block, theta, phi, Outcome::Plus);
            assert!((erased.w_low - w_low).abs() <= 1e-14, "block ({n1},{n2})");
            assert!((erased.w_high - w_high).abs() <= 1e-14);
            assert!((erased.c - c).norm() <= 1e-14);
        }
    }

    #[test]
    fn traced_block_is_diagonal() {
        let block = evolve_block(0, 0, 1.3, &params(0.5, 1.0, 0.2)).unwrap();
        let traced = trace_out_atom(&block);
        assert_eq!(traced.c, C64::new(0.0, 0.0));
        assert!((traced.trace() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn probabilities_sum_to_one(
            n1 in 0u32..6,
            n2 in 0u32..6,
            t in 0.0f64..20.0,
            theta in 0.0f64..PI,
            phi in 0.0f64..std::f64::consts::TAU,
            delta in -2.0f64..2.0,
            gamma in 0.0f64..1.0,
        ) {
            let p = params(0.5, delta, gamma);
            let block = evolve_block(n1, n2, t, &p).unwrap();
            let total = outcome_probability(&block, theta, phi, Outcome::Plus)
                + outcome_probability(&block, theta, phi, Outcome::Minus);
            prop_assert!((total - 1.0).abs() <= 1e-14);
        }

        #[test]
        fn balanced_outcomes_mirror_each_other(
            n1 in 0u32..6,
            n2 in 0u32..6,
            t in 0.0f64..20.0,
            phi in 0.0f64..std::f64::consts::TAU,
            delta in -2.0f64..2.0,
        ) {
            let p = params(0.5, delta, 0.5);
            let block = evolve_block(n1, n2, t, &p).unwrap();
            let plus = erase(&block, PI / 2.0, phi, Outcome::Plus);
            let minus = erase(&block, PI / 2.0, phi, Outcome::Minus);
            // Same coherence magnitude, same weights: both projectors weigh
            // the populations by 1/2 at the balanced angle.
            prop_assert!((plus.c.norm() - minus.c.norm()).abs() <= 1e-14);
            prop_assert!((plus.w_low - minus.w_low).abs() <= 1e-14);
            prop_assert!((plus.w_high - minus.w_high).abs() <= 1e-14);
        }

        #[test]
        fn erased_blocks_stay_positive(
            n1 in 0u32..6,
            n2 in 0u32..6,
            t in 0.0f64..20.0,
            theta in 0.0f64..PI,
            delta in -2.0f64..2.0,
            gamma in 0.0f64..1.0,
        ) {
            let p = params(0.5, delta, gamma);
            let block = evolve_block(n1, n2, t, &p).unwrap();
            for outcome in [Outcome::Plus, Outcome::Minus] {
                let erased = erase(&block, theta, 0.0, outcome);
                prop_assert!(erased.w_low >= -1e-12);
                prop_assert!(erased.w_high >= -1e-12);
                prop_assert!(
                    erased.c.norm_sqr() <= erased.w_low * erased.w_high + 1e-12
                );
            }
        }
    }
}
