//! Log-negativity of the two-mode field state.
//!
//! Because coherences connect only `|n1, n2>` and `|n1+1, n2+1>`, the
//! mode-2 partial transpose moves every coherence to couple `(n1, n2+1)`
//! with `(n1+1, n2)`. Couplings sharing a label link up, so the partial
//! transpose splits into independent Hermitian tridiagonal chains running
//! along anti-diagonals, plus untouched diagonal entries. A single isolated
//! coherence gives the familiar 2x2 block; a thermal mixture populates whole
//! chains. The trace norm is then `1 + 2 sum max(0, -lambda)` over the chain
//! eigenvalues.
//!
//! The dense oracle materializes the full matrix, transposes mode 2
//! entrywise, and diagonalizes with an unrelated (Jacobi) eigensolver.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermitian_tridiagonal_eigenvalues};
use crate::model::{rabi_frequency, ModelParams};
use crate::thermal::FieldState;
use crate::C64;

/// Eigenvalues with magnitude below this are treated as exact zeros, so that
/// sweeps report 0 rather than `log2(1 + epsilon)` noise.
pub const EIGENVALUE_CLAMP: f64 = 1e-13;

/// Dense-oracle dimension cap.
pub const DENSE_DIM_CAP: usize = 4096;

/// A single coherence-induced 2x2 coupling of the partial transpose, pairing
/// `(a1, a2)` with `(a1 + 1, a2 - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialTransposeBlock {
    pub pair: ((u32, u32), (u32, u32)),
    pub d1: f64,
    pub d2: f64,
    pub c: C64,
}

impl PartialTransposeBlock {
    /// `(d1 + d2)/2 +- sqrt((d1 - d2)^2/4 + |c|^2)`; at most the lower one
    /// can be negative, and only if `|c|^2 > d1 d2`.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mid = 0.5 * (self.d1 + self.d2);
        let radius = (0.5 * (self.d1 - self.d2)).hypot(self.c.norm());
        [mid - radius, mid + radius]
    }
}

/// A maximal run of couplings along one anti-diagonal: a Hermitian
/// tridiagonal chain. Two labels and one coupling form the plain 2x2 case.
#[derive(Debug, Clone, PartialEq)]
pub struct PtChain {
    /// Basis labels in order; consecutive labels differ by `(+1, -1)`.
    pub labels: Vec<(u32, u32)>,
    /// Populations at those labels (the PT leaves the diagonal alone).
    pub diag: Vec<f64>,
    /// Couplings between consecutive labels.
    pub couplings: Vec<C64>,
}

impl PtChain {
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if self.labels.len() == 2 {
            return Ok(self
                .as_pair_block()
                .expect("two-label chain")
                .eigenvalues()
                .to_vec());
        }
        hermitian_tridiagonal_eigenvalues(&self.diag, &self.couplings)
    }

    /// The chain as a plain 2x2 block, when it has exactly one coupling.
    pub fn as_pair_block(&self) -> Option<PartialTransposeBlock> {
        if self.labels.len() != 2 {
            return None;
        }
        Some(PartialTransposeBlock {
            pair: (self.labels[0], self.labels[1]),
            d1: self.diag[0],
            d2: self.diag[1],
            c: self.couplings[0],
        })
    }
}

/// The mode-2 partial transpose, decomposed into coupled chains and
/// untouched diagonal entries. The two parts exactly partition the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialTranspose {
    pub chains: Vec<PtChain>,
    pub uncoupled: Vec<((u32, u32), f64)>,
}

/// Decomposes the partial transpose of `state` (transpose taken on mode 2).
///
/// Off-band coherences cannot occur: the state's storage only represents the
/// `(+1, +1)` band.
pub fn partial_transpose_blocks(state: &FieldState) -> PartialTranspose {
    let mut chains = Vec::new();
    let mut chained: BTreeSet<(u32, u32)> = BTreeSet::new();

    // The coherence at (n1, n2) couples u = (n1, n2+1) to v = (n1+1, n2).
    // A label (a, b) has an incoming coupling iff the coherence (a-1, b)
    // exists, an outgoing one iff (a, b-1) does; chains start where there is
    // no incoming coupling and follow (+1, -1) steps.
    for (&(n1, n2), _) in state.coherences() {
        let start = (n1, n2 + 1);
        let has_incoming = n1 > 0 && state.coherence(n1 - 1, n2 + 1) != C64::new(0.0, 0.0);
        if has_incoming {
            continue;
        }
        let mut labels = vec![start];
        let mut diag = vec![state.population(start.0, start.1)];
        let mut couplings = Vec::new();
        let (mut a, mut b) = start;
        while b >= 1 {
            let c = state.coherence(a, b - 1);
            if c == C64::new(0.0, 0.0) {
                break;
            }
            couplings.push(c);
            a += 1;
            b -= 1;
            labels.push((a, b));
            diag.push(state.population(a, b));
        }
        for &label in &labels {
            chained.insert(label);
        }
        chains.push(PtChain {
            labels,
            diag,
            couplings,
        });
    }

    let uncoupled = state
        .populations()
        .filter(|(label, _)| !chained.contains(label))
        .map(|(&label, &p)| (label, p))
        .collect();

    PartialTranspose { chains, uncoupled }
}

/// Log-negativity `log2 ||rho^Gamma||` via the chain decomposition.
///
/// Since the trace is 1, the trace norm is `1 + 2 sum max(0, -lambda)` over
/// all partial-transpose eigenvalues; a diagonal state gives exactly 0.
pub fn log_negativity(state: &FieldState) -> Result<f64> {
    check_normalized(state)?;
    let pt = partial_transpose_blocks(state);
    let mut negative_mass = 0.0;
    for chain in &pt.chains {
        for eig in chain.eigenvalues()? {
            if eig < -EIGENVALUE_CLAMP {
                negative_mass -= eig;
            }
        }
    }
    for &(_, p) in &pt.uncoupled {
        if p < -EIGENVALUE_CLAMP {
            negative_mass -= p;
        }
    }
    if negative_mass == 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 + 2.0 * negative_mass).log2())
}

/// Closed-form stationary log-negativity of the single normalized block
/// `(n1, n2)`:
/// `log2[1 + 2 |sin(theta) g delta sqrt((n1+1)(n2+1)) / (4 Omega^2 +
/// delta^2 cos(theta))|]`.
pub fn stationary_block_logneg(n1: u32, n2: u32, params: &ModelParams) -> Result<f64> {
    if params.gamma <= 0.0 {
        return Err(Error::NoStationaryState);
    }
    let omega = rabi_frequency(n1, n2, params);
    let delta = params.detuning();
    let denominator = 4.0 * omega * omega + delta * delta * params.theta.cos();
    if denominator == 0.0 {
        return Err(Error::InvalidParams(
            "stationary log-negativity denominator vanishes".into(),
        ));
    }
    let k_sqrt = (f64::from(n1 + 1) * f64::from(n2 + 1)).sqrt();
    let ratio = (params.theta.sin() * params.g * delta * k_sqrt / denominator).abs();
    if ratio <= EIGENVALUE_CLAMP {
        return Ok(0.0);
    }
    Ok((1.0 + 2.0 * ratio).log2())
}

/// Dense validation oracle: materializes the full two-mode matrix, applies
/// the mode-2 transpose entrywise, and sums `|lambda|` from a Jacobi
/// eigensolve.
pub fn oracle_log_negativity(state: &FieldState) -> Result<f64> {
    check_normalized(state)?;
    let (max1, max2) = state.max_labels();
    let d1 = max1 as usize + 1;
    let d2 = max2 as usize + 1;
    let dim = d1 * d2;
    if dim > DENSE_DIM_CAP {
        return Err(Error::DimensionCap {
            dim,
            cap: DENSE_DIM_CAP,
        });
    }
    let idx = |m1: u32, m2: u32| m1 as usize * d2 + m2 as usize;

    let mut dense = vec![C64::new(0.0, 0.0); dim * dim];
    for (&(m1, m2), &p) in state.populations() {
        dense[idx(m1, m2) * dim + idx(m1, m2)] = C64::new(p, 0.0);
    }
    for (&(n1, n2), &c) in state.coherences() {
        dense[idx(n1, n2) * dim + idx(n1 + 1, n2 + 1)] = c;
        dense[idx(n1 + 1, n2 + 1) * dim + idx(n1, n2)] = c.conj();
    }

    // Mode-2 transpose: B[(m1,m2),(m1',m2')] = A[(m1,m2'),(m1',m2)].
    let mut pt = vec![C64::new(0.0, 0.0); dim * dim];
    for m1 in 0..d1 {
        for m2 in 0..d2 {
            for p1 in 0..d1 {
                for p2 in 0..d2 {
                    pt[(m1 * d2 + m2) * dim + (p1 * d2 + p2)] =
                        dense[(m1 * d2 + p2) * dim + (p1 * d2 + m2)];
                }
            }
        }
    }

    let eigs = hermitian_eigenvalues(&mut pt, dim)?;
    let trace_norm: f64 = eigs.iter().map(|x| x.abs()).sum();
    Ok(trace_norm.log2())
}

fn check_normalized(state: &FieldState) -> Result<()> {
    let trace = state.trace();
    if (trace - 1.0).abs() > 1e-9 {
        return Err(Error::Unnormalized(trace));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::erasure::Outcome;
    use crate::thermal::{
        mix_thermal, mix_thermal_traced, single_block_state, FieldState, ThermalSpec, TimeSpec,
        TruncationConfig,
    };
    use std::collections::BTreeMap;
    use std::f64::consts::PI;

    const LOG2_THREE_HALVES: f64 = 0.5849625007211562;

    fn params_with(g: f64, delta: f64, gamma: f64, theta: f64, phi: f64) -> ModelParams {
        ModelParams::with_detuning(1.0, 1.0, delta, g, gamma, theta, phi).unwrap()
    }

    fn params(g: f64, delta: f64, gamma: f64) -> ModelParams {
        params_with(g, delta, gamma, PI / 2.0, 0.0)
    }

    fn diagonal_state() -> FieldState {
        let mut pops = BTreeMap::new();
        pops.insert((0, 0), 0.5);
        pops.insert((1, 2), 0.3);
        pops.insert((2, 1), 0.2);
        FieldState::from_parts(pops, BTreeMap::new()).unwrap()
    }

    #[test]
    fn diagonal_state_has_no_blocks_and_zero_negativity() {
        let state = diagonal_state();
        let pt = partial_transpose_blocks(&state);
        assert!(pt.chains.is_empty());
        assert_eq!(pt.uncoupled.len(), 3);
        assert_eq!(log_negativity(&state).unwrap(), 0.0);
        assert!(oracle_log_negativity(&state).unwrap().abs() < 1e-12);
    }

    #[test]
    fn pure_offdiagonal_pair_block() {
        // Single coherence with empty paired populations: eigenvalues +-|c|.
        let mut pops = BTreeMap::new();
        pops.insert((0, 0), 0.75);
        pops.insert((1, 1), 0.25);
        let mut cohs = BTreeMap::new();
        cohs.insert((0, 0), C64::new(0.25, 0.0));
        let state = FieldState::from_parts(pops, cohs).unwrap();

        let pt = partial_transpose_blocks(&state);
        assert_eq!(pt.chains.len(), 1);
        let block = pt.chains[0].as_pair_block().unwrap();
        assert_eq!(block.pair, ((0, 1), (1, 0)));
        assert_eq!(block.d1, 0.0);
        assert_eq!(block.d2, 0.0);
        let eigs = block.eigenvalues();
        assert!((eigs[0] + 0.25).abs() < 1e-15);
        assert!((eigs[1] - 0.25).abs() < 1e-15);
        assert_eq!(pt.uncoupled.len(), 2);

        let ln = log_negativity(&state).unwrap();
        assert!((ln - LOG2_THREE_HALVES).abs() < 1e-14);
        assert!((oracle_log_negativity(&state).unwrap() - ln).abs() < 1e-12);
    }

    #[test]
    fn vacuum_stationary_pipeline_hits_closed_form() {
        let p = params(0.5, 1.0, 0.5);
        let state = mix_thermal(
            TimeSpec::Stationary,
            &p,
            &ThermalSpec::new(0.0, 0.0).unwrap(),
            &TruncationConfig::default(),
            Outcome::Plus,
        )
        .unwrap();
        let ln = log_negativity(&state).unwrap();
        assert!((ln - LOG2_THREE_HALVES).abs() < 1e-12);
        assert!((stationary_block_logneg(0, 0, &p).unwrap() - ln).abs() < 1e-12);
    }

    #[test]
    fn stationary_formula_trivial_zeros() {
        let resonant = params(0.5, 0.0, 0.5);
        assert_eq!(stationary_block_logneg(0, 0, &resonant).unwrap(), 0.0);
        assert_eq!(stationary_block_logneg(2, 1, &resonant).unwrap(), 0.0);

        let pole = params_with(0.5, 1.0, 0.5, 0.0, 0.0);
        assert_eq!(stationary_block_logneg(0, 0, &pole).unwrap(), 0.0);
        let pole = params_with(0.5, 1.0, 0.5, PI, 0.0);
        assert_eq!(stationary_block_logneg(0, 0, &pole).unwrap(), 0.0);
    }

    #[test]
    fn stationary_formula_requires_decoherence() {
        assert!(matches!(
            stationary_block_logneg(0, 0, &params(0.5, 1.0, 0.0)),
            Err(Error::NoStationaryState)
        ));
    }

    #[test]
    fn stationary_formula_matches_single_block_pipeline() {
        for (n1, n2) in [(0u32, 0u32), (1, 0), (2, 2)] {
            for theta in [PI / 6.0, PI / 2.0, 2.0 * PI / 3.0] {
                let p = params_with(0.5, 1.0, 0.5, theta, 0.7);
                let state =
                    single_block_state(TimeSpec::Stationary, &p, n1, n2, Outcome::Plus).unwrap();
                let pipeline = log_negativity(&state).unwrap();
                let formula = stationary_block_logneg(n1, n2, &p).unwrap();
                assert!(
                    (pipeline - formula).abs() <= 1e-12,
                    "({n1},{n2}) theta = {theta}: {pipeline} vs {formula}"
                );
            }
        }
    }

    #[test]
    fn thermal_chains_link_up() {
        // A warm state has couplings on every anti-diagonal; check the chain
        // partition covers each populated label exactly once.
        let p = params(0.5, 1.0, 0.5);
        let state = mix_thermal(
            TimeSpec::Stationary,
            &p,
            &ThermalSpec::new(0.8, 0.8).unwrap(),
            &TruncationConfig {
                tail_mass: 1e-6,
                hard_cap: 512,
            },
            Outcome::Plus,
        )
        .unwrap();
        let pt = partial_transpose_blocks(&state);
        assert!(pt.chains.iter().any(|ch| ch.labels.len() > 2));
        let mut seen = BTreeSet::new();
        for chain in &pt.chains {
            assert_eq!(chain.labels.len(), chain.diag.len());
            assert_eq!(chain.labels.len(), chain.couplings.len() + 1);
            for pair in chain.labels.windows(2) {
                assert_eq!(pair[1].0, pair[0].0 + 1);
                assert_eq!(pair[1].1 + 1, pair[0].1);
            }
            for &label in &chain.labels {
                assert!(seen.insert(label), "label {label:?} in two chains");
            }
        }
        for (label, _) in &pt.uncoupled {
            assert!(
                seen.insert(*label),
                "label {label:?} both chained and uncoupled"
            );
        }
        // Every populated label is accounted for.
        for (label, _) in state.populations() {
            assert!(seen.contains(label));
        }
    }

    #[test]
    fn block_path_matches_dense_oracle_on_thermal_states() {
        let trunc = TruncationConfig {
            tail_mass: 1e-6,
            hard_cap: 512,
        };
        for (mbar, delta, time) in [
            (0.4, 1.0, TimeSpec::Stationary),
            (0.8, 0.5, TimeSpec::At(2.5)),
            (0.2, 0.0, TimeSpec::At(1.0)),
        ] {
            let p = params(0.5, delta, 0.5);
            let spec = ThermalSpec::new(mbar, mbar).unwrap();
            let state = mix_thermal(time, &p, &spec, &trunc, Outcome::Plus).unwrap();
            let fast = log_negativity(&state).unwrap();
            let dense = oracle_log_negativity(&state).unwrap();
            assert!(
                (fast - dense).abs() <= 1e-10,
                "mbar = {mbar}, delta = {delta}: {fast} vs {dense}"
            );
        }
    }

    #[test]
    fn phi_invariance() {
        let spec = ThermalSpec::new(0.3, 0.6).unwrap();
        let trunc = TruncationConfig::default();
        let baseline = log_negativity(
            &mix_thermal(
                TimeSpec::At(3.0),
                &params_with(0.5, 1.0, 0.5, PI / 2.0, 0.0),
                &spec,
                &trunc,
                Outcome::Plus,
            )
            .unwrap(),
        )
        .unwrap();
        for phi in [0.9, 2.4, 5.5] {
            let shifted = log_negativity(
                &mix_thermal(
                    TimeSpec::At(3.0),
                    &params_with(0.5, 1.0, 0.5, PI / 2.0, phi),
                    &spec,
                    &trunc,
                    Outcome::Plus,
                )
                .unwrap(),
            )
            .unwrap();
            assert!((shifted - baseline).abs() <= 1e-14, "phi = {phi}");
        }
    }

    #[test]
    fn outcomes_agree_at_balanced_angle() {
        let p = params(0.5, 1.0, 0.5);
        let spec = ThermalSpec::new(0.5, 0.2).unwrap();
        let trunc = TruncationConfig::default();
        for time in [TimeSpec::At(1.5), TimeSpec::Stationary] {
            let plus =
                log_negativity(&mix_thermal(time, &p, &spec, &trunc, Outcome::Plus).unwrap())
                    .unwrap();
            let minus =
                log_negativity(&mix_thermal(time, &p, &spec, &trunc, Outcome::Minus).unwrap())
                    .unwrap();
            assert!((plus - minus).abs() <= 1e-12);
        }
    }

    #[test]
    fn traced_state_is_never_entangled() {
        let p = params(0.5, 1.0, 0.5);
        let spec = ThermalSpec::new(0.5, 0.5).unwrap();
        let state =
            mix_thermal_traced(TimeSpec::At(2.0), &p, &spec, &TruncationConfig::default()).unwrap();
        assert_eq!(log_negativity(&state).unwrap(), 0.0);
    }

    #[test]
    fn entanglement_decreases_with_temperature() {
        let p = params(0.5, 1.0, 0.5);
        let trunc = TruncationConfig::default();
        let at = |alpha: f64| {
            log_negativity(
                &mix_thermal(
                    TimeSpec::Stationary,
                    &p,
                    &ThermalSpec::new(alpha, alpha).unwrap(),
                    &trunc,
                    Outcome::Plus,
                )
                .unwrap(),
            )
            .unwrap()
        };
        let cold = at(0.0);
        let warm = at(0.5);
        assert!(cold > warm, "{cold} vs {warm}");
    }

    /// Doubling the per-mode cutoffs must not move any swept log-negativity
    /// by more than ten times the coarser tail mass. The cutoff grows like
    /// `ln(tail)`, so squaring the tail mass (nearly) doubles it.
    #[test]
    fn doubling_the_cutoff_changes_nothing_material() {
        let tail = 1e-5;
        let coarse = TruncationConfig {
            tail_mass: tail,
            hard_cap: 512,
        };
        let fine = TruncationConfig {
            tail_mass: tail * tail / 2.0,
            hard_cap: 512,
        };
        for mbar in [0.3, 0.8, 1.5] {
            assert!(fine.cutoff(mbar).unwrap() >= 2 * coarse.cutoff(mbar).unwrap());
        }
        for (mbar, delta, time) in [
            (0.3, 1.0, TimeSpec::Stationary),
            (0.8, 0.5, TimeSpec::At(3.0)),
            (1.5, 2.0, TimeSpec::Stationary),
        ] {
            let p = params(0.5, delta, 0.5);
            let spec = ThermalSpec::new(mbar, mbar).unwrap();
            let v_coarse =
                log_negativity(&mix_thermal(time, &p, &spec, &coarse, Outcome::Plus).unwrap())
                    .unwrap();
            let v_fine =
                log_negativity(&mix_thermal(time, &p, &spec, &fine, Outcome::Plus).unwrap())
                    .unwrap();
            assert!(
                (v_coarse - v_fine).abs() <= 10.0 * tail,
                "mbar = {mbar}: {v_coarse} vs {v_fine}"
            );
        }
    }

    #[test]
    fn mode_choice_does_not_change_trace_norm() {
        // Transposing mode 1 instead of mode 2 gives the same trace norm;
        // checked once on a dense matrix.
        let p = params(0.5, 1.0, 0.5);
        let state = mix_thermal(
            TimeSpec::Stationary,
            &p,
            &ThermalSpec::new(0.5, 0.3).unwrap(),
            &TruncationConfig {
                tail_mass: 1e-6,
                hard_cap: 512,
            },
            Outcome::Plus,
        )
        .unwrap();
        let (max1, max2) = state.max_labels();
        let (d1, d2) = (max1 as usize + 1, max2 as usize + 1);
        let dim = d1 * d2;
        let idx = |m1: usize, m2: usize| m1 * d2 + m2;
        let mut dense = vec![C64::new(0.0, 0.0); dim * dim];
        for (&(m1, m2), &pop) in state.populations() {
            dense[idx(m1 as usize, m2 as usize) * (dim + 1)] = C64::new(pop, 0.0);
        }
        for (&(n1, n2), &c) in state.coherences() {
            dense[idx(n1 as usize, n2 as usize) * dim + idx(n1 as usize + 1, n2 as usize + 1)] = c;
            dense[idx(n1 as usize + 1, n2 as usize + 1) * dim + idx(n1 as usize, n2 as usize)] =
                c.conj();
        }
        let mut pt1 = vec![C64::new(0.0, 0.0); dim * dim];
        let mut pt2 = vec![C64::new(0.0, 0.0); dim * dim];
        for m1 in 0..d1 {
            for m2 in 0..d2 {
                for p1 in 0..d1 {
                    for p2 in 0..d2 {
                        // mode 1: swap the first indices
                        pt1[idx(m1, m2) * dim + idx(p1, p2)] =
                            dense[idx(p1, m2) * dim + idx(m1, p2)];
                        pt2[idx(m1, m2) * dim + idx(p1, p2)] =
                            dense[idx(m1, p2) * dim + idx(p1, m2)];
                    }
                }
            }
        }
        let norm = |eigs: Vec<f64>| eigs.iter().map(|x| x.abs()).sum::<f64>();
        let n1 = norm(hermitian_eigenvalues(&mut pt1, dim).unwrap());
        let n2 = norm(hermitian_eigenvalues(&mut pt2, dim).unwrap());
        assert!((n1 - n2).abs() <= 1e-12, "{n1} vs {n2}");
    }

    #[test]
    fn dense_oracle_dimension_cap() {
        let mut pops = BTreeMap::new();
        pops.insert((0, 0), 0.5);
        pops.insert((70, 70), 0.5);
        let state = FieldState::from_parts(pops, BTreeMap::new()).unwrap();
        assert!(matches!(
            oracle_log_negativity(&state),
            Err(Error::DimensionCap { .. })
        ));
    }
}
