//! Parameter sweeps, single-point queries, oracle cross-checks, and figure
//! presets, with deterministic CSV output.
//!
//! Grid points are pure, independent evaluations of the full pipeline
//! (evolve or stationary block, erase, thermally mix, log-negativity), so
//! they run in parallel; rows are gathered back into axis-major order before
//! anything is written, which makes the CSV byte-reproducible.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{evolve_block, oracle_evolve_block, rk4_evolve_block};
use crate::entanglement::{log_negativity, oracle_log_negativity};
use crate::erasure::{FieldBlock, MeasurementOutcome, Outcome};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::thermal::{
    cutoffs, mix_thermal, single_block_state, FieldState, FieldStateAccumulator, ThermalSpec,
    TimeSpec, TruncationConfig,
};
use crate::C64;

/// Tolerance for the dynamics oracle cross-check.
pub const DYNAMICS_TOLERANCE: f64 = 1e-8;
/// Tolerance for the negativity oracle cross-check.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-10;
/// Tolerance for the optional integrator cross-check.
pub const RK4_TOLERANCE: f64 = 1e-6;

/// Parameters a sweep axis can range over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisParam {
    /// Sets both mean photon numbers at once.
    MbarAlpha,
    Mbar1,
    Mbar2,
    Delta,
    T,
    /// Mean photon number difference under a fixed sum:
    /// `mbar1 = (sum + d)/2`, `mbar2 = (sum - d)/2`.
    MbarDiff,
}

impl AxisParam {
    pub fn name(&self) -> &'static str {
        match self {
            AxisParam::MbarAlpha => "mbar_alpha",
            AxisParam::Mbar1 => "mbar1",
            AxisParam::Mbar2 => "mbar2",
            AxisParam::Delta => "delta",
            AxisParam::T => "t",
            AxisParam::MbarDiff => "mbar_diff",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "mbar_alpha" => Ok(AxisParam::MbarAlpha),
            "mbar1" => Ok(AxisParam::Mbar1),
            "mbar2" => Ok(AxisParam::Mbar2),
            "delta" => Ok(AxisParam::Delta),
            "t" => Ok(AxisParam::T),
            "mbar_diff" => Ok(AxisParam::MbarDiff),
            other => Err(Error::InvalidSweep(format!(
                "unknown sweep parameter {other:?} \
                 (expected mbar_alpha, mbar1, mbar2, delta, t, or mbar_diff)"
            ))),
        }
    }
}

/// One sweep axis: an inclusive grid `start, start + step, ..., <= stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub param: AxisParam,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.step.is_nan() || self.step <= 0.0 || !self.step.is_finite() {
            return Err(Error::InvalidSweep(format!(
                "axis {}: step must be positive, got {}",
                self.param.name(),
                self.step
            )));
        }
        if !self.start.is_finite() || !self.stop.is_finite() || self.start > self.stop {
            return Err(Error::InvalidSweep(format!(
                "axis {}: need finite start <= stop, got {}..{}",
                self.param.name(),
                self.start,
                self.stop
            )));
        }
        let nonnegative = matches!(
            self.param,
            AxisParam::MbarAlpha
                | AxisParam::Mbar1
                | AxisParam::Mbar2
                | AxisParam::T
                | AxisParam::MbarDiff
        );
        if nonnegative && self.start < 0.0 {
            return Err(Error::InvalidSweep(format!(
                "axis {}: values must be nonnegative",
                self.param.name()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Stationary,
    TimePoint,
}

/// Grid definition: one or two axes plus the evaluation mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
    pub mode: SweepMode,
    /// Fixed `mbar1 + mbar2`, required by an `mbar_diff` axis.
    pub mbar_sum: Option<f64>,
}

/// Everything held fixed during a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepBase {
    pub params: ModelParams,
    pub thermal: ThermalSpec,
    /// Fixed evaluation time for `TimePoint` sweeps without a `t` axis.
    pub t: Option<f64>,
    pub outcome: Outcome,
    pub trunc: TruncationConfig,
}

impl SweepSpec {
    fn validate(&self, base: &SweepBase) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::InvalidSweep(format!(
                "need one or two axes, got {}",
                self.axes.len()
            )));
        }
        if self.axes.len() == 2 && self.axes[0].param == self.axes[1].param {
            return Err(Error::InvalidSweep(format!(
                "axis names must be distinct, both are {}",
                self.axes[0].param.name()
            )));
        }
        for axis in &self.axes {
            axis.validate()?;
            match axis.param {
                AxisParam::T => {
                    if self.mode == SweepMode::Stationary {
                        return Err(Error::InvalidSweep(
                            "a t axis is meaningless in stationary mode".into(),
                        ));
                    }
                }
                AxisParam::MbarDiff => {
                    let sum = self.mbar_sum.ok_or_else(|| {
                        Error::InvalidSweep("mbar_diff axis requires a fixed mbar_sum".into())
                    })?;
                    if sum.is_nan() || sum < 0.0 || axis.stop > sum + 1e-12 {
                        return Err(Error::InvalidSweep(format!(
                            "mbar_diff must stay within mbar_sum = {sum}"
                        )));
                    }
                }
                _ => {}
            }
        }
        match self.mode {
            SweepMode::Stationary => {
                if base.params.gamma <= 0.0 {
                    return Err(Error::InvalidSweep(
                        "stationary sweeps require gamma > 0".into(),
                    ));
                }
            }
            SweepMode::TimePoint => {
                let has_t_axis = self.axes.iter().any(|a| a.param == AxisParam::T);
                if !has_t_axis && base.t.is_none() {
                    return Err(Error::InvalidSweep(
                        "time-point sweeps need a fixed t or a t axis".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub axis1: f64,
    pub axis2: Option<f64>,
    pub log_negativity: f64,
}

/// Sweep output: ordered rows (axis1-major) plus a parameter echo.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub header: Vec<String>,
    pub rows: Vec<SweepRow>,
    pub metadata: Vec<(String, String)>,
}

/// Evaluates the full pipeline over the grid. Points run in parallel but the
/// output ordering is deterministic.
pub fn run_sweep(spec: &SweepSpec, base: &SweepBase) -> Result<SweepResult> {
    spec.validate(base)?;
    let values1 = spec.axes[0].values();
    let values2 = spec.axes.get(1).map(|a| a.values());

    let grid: Vec<(f64, Option<f64>)> = match &values2 {
        Some(v2) => values1
            .iter()
            .flat_map(|&a| v2.iter().map(move |&b| (a, Some(b))))
            .collect(),
        None => values1.iter().map(|&a| (a, None)).collect(),
    };

    let evaluated: Result<Vec<(SweepRow, (usize, usize))>> = grid
        .par_iter()
        .map(|&(a1, a2)| {
            let (value, cuts) =
                eval_grid_point(spec, base, a1, a2).map_err(|e| Error::AtGridPoint {
                    axis1: a1,
                    axis2: a2,
                    source: Box::new(e),
                })?;
            Ok((
                SweepRow {
                    axis1: a1,
                    axis2: a2,
                    log_negativity: value,
                },
                cuts,
            ))
        })
        .collect();
    let evaluated = evaluated?;

    let max_cutoffs = evaluated.iter().fold((0usize, 0usize), |acc, (_, c)| {
        (acc.0.max(c.0), acc.1.max(c.1))
    });
    let rows = evaluated.into_iter().map(|(row, _)| row).collect();

    let header = if spec.axes.len() == 2 {
        vec!["axis1".into(), "axis2".into(), "log_negativity".into()]
    } else {
        vec!["axis1".into(), "log_negativity".into()]
    };

    Ok(SweepResult {
        header,
        rows,
        metadata: sweep_metadata(spec, base, max_cutoffs),
    })
}

fn eval_grid_point(
    spec: &SweepSpec,
    base: &SweepBase,
    a1: f64,
    a2: Option<f64>,
) -> Result<(f64, (usize, usize))> {
    let mut params = base.params;
    let mut thermal = base.thermal;
    let mut t = base.t;

    let assignments = spec
        .axes
        .iter()
        .zip([Some(a1), a2])
        .filter_map(|(axis, value)| value.map(|v| (axis.param, v)));
    for (param, value) in assignments {
        match param {
            AxisParam::MbarAlpha => thermal = ThermalSpec::new(value, value)?,
            AxisParam::Mbar1 => thermal = ThermalSpec::new(value, thermal.mbar2)?,
            AxisParam::Mbar2 => thermal = ThermalSpec::new(thermal.mbar1, value)?,
            AxisParam::Delta => {
                params = ModelParams::with_detuning(
                    params.omega1,
                    params.omega2,
                    value,
                    params.g,
                    params.gamma,
                    params.theta,
                    params.phi,
                )?
            }
            AxisParam::T => t = Some(value),
            AxisParam::MbarDiff => {
                let sum = self_sum(spec)?;
                thermal = ThermalSpec::new((sum + value) / 2.0, (sum - value).max(0.0) / 2.0)?;
            }
        }
    }

    let time =
        match spec.mode {
            SweepMode::Stationary => TimeSpec::Stationary,
            SweepMode::TimePoint => TimeSpec::At(t.ok_or_else(|| {
                Error::InvalidSweep("time-point evaluation without a time".into())
            })?),
        };
    let state = mix_thermal(time, &params, &thermal, &base.trunc, base.outcome)?;
    let value = log_negativity(&state)?;
    Ok((value, cutoffs(&thermal, &base.trunc)?))
}

fn self_sum(spec: &SweepSpec) -> Result<f64> {
    spec.mbar_sum
        .ok_or_else(|| Error::InvalidSweep("mbar_diff axis requires a fixed mbar_sum".into()))
}

fn sweep_metadata(
    spec: &SweepSpec,
    base: &SweepBase,
    max_cutoffs: (usize, usize),
) -> Vec<(String, String)> {
    let mut meta: Vec<(String, String)> = Vec::new();
    meta.push(("version".into(), env!("CARGO_PKG_VERSION").into()));
    meta.push((
        "mode".into(),
        match spec.mode {
            SweepMode::Stationary => "stationary".into(),
            SweepMode::TimePoint => "time_point".into(),
        },
    ));
    for (i, axis) in spec.axes.iter().enumerate() {
        meta.push((
            format!("axis{}", i + 1),
            format!(
                "{} start={} stop={} step={}",
                axis.param.name(),
                fmt_float(axis.start),
                fmt_float(axis.stop),
                fmt_float(axis.step)
            ),
        ));
    }
    let p = &base.params;
    for (key, value) in [
        ("g", p.g),
        ("delta", p.detuning()),
        ("gamma", p.gamma),
        ("theta", p.theta),
        ("phi", p.phi),
        ("omega1", p.omega1),
        ("omega2", p.omega2),
        ("mbar1", base.thermal.mbar1),
        ("mbar2", base.thermal.mbar2),
    ] {
        meta.push((key.into(), fmt_float(value)));
    }
    if let Some(sum) = spec.mbar_sum {
        meta.push(("mbar_sum".into(), fmt_float(sum)));
    }
    if let Some(t) = base.t {
        meta.push(("t".into(), fmt_float(t)));
    }
    meta.push(("outcome".into(), base.outcome.label().into()));
    meta.push(("tail_mass".into(), format!("{:e}", base.trunc.tail_mass)));
    meta.push(("hard_cap".into(), base.trunc.hard_cap.to_string()));
    meta.push((
        "max_cutoffs".into(),
        format!("{} {}", max_cutoffs.0, max_cutoffs.1),
    ));
    meta
}

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the sweep as UTF-8 CSV: `#`-prefixed metadata comments, a header
/// row, then one row per grid point.
pub fn write_csv<W: Write>(result: &SweepResult, out: &mut W) -> std::io::Result<()> {
    for (key, value) in &result.metadata {
        writeln!(out, "# {key} = {value}")?;
    }
    writeln!(out, "{}", result.header.join(","))?;
    for row in &result.rows {
        match row.axis2 {
            Some(a2) => writeln!(
                out,
                "{},{},{}",
                fmt_float(row.axis1),
                fmt_float(a2),
                fmt_float(row.log_negativity)
            )?,
            None => writeln!(
                out,
                "{},{}",
                fmt_float(row.axis1),
                fmt_float(row.log_negativity)
            )?,
        }
    }
    Ok(())
}

/// A single pipeline evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointQuery {
    pub params: ModelParams,
    pub thermal: ThermalSpec,
    pub time: TimeSpec,
    pub outcome: Outcome,
    pub trunc: TruncationConfig,
    /// Bypass thermal weighting and use this single Fock block.
    pub fock: Option<(u32, u32)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointReport {
    pub log_negativity: f64,
    pub outcomes: [MeasurementOutcome; 2],
    /// Truncation cutoffs actually used; absent in Fock mode.
    pub cutoffs: Option<(usize, usize)>,
}

/// Evaluates one parameter point, reporting the log-negativity together with
/// both measurement probabilities and the truncation cutoffs.
pub fn single_point(query: &PointQuery) -> Result<PointReport> {
    let state = match query.fock {
        Some((n1, n2)) => single_block_state(query.time, &query.params, n1, n2, query.outcome)?,
        None => mix_thermal(
            query.time,
            &query.params,
            &query.thermal,
            &query.trunc,
            query.outcome,
        )?,
    };
    let log_negativity = log_negativity(&state)?;
    // The pre-normalization trace of the requested outcome is its
    // probability; the other outcome takes the rest.
    let p_requested = 1.0 / state.normalization();
    let (p_plus, p_minus) = match query.outcome {
        Outcome::Plus => (p_requested, 1.0 - p_requested),
        Outcome::Minus => (1.0 - p_requested, p_requested),
    };
    Ok(PointReport {
        log_negativity,
        outcomes: [
            MeasurementOutcome {
                label: Outcome::Plus,
                probability: p_plus,
            },
            MeasurementOutcome {
                label: Outcome::Minus,
                probability: p_minus,
            },
        ],
        cutoffs: match query.fock {
            Some(_) => None,
            None => Some(cutoffs(&query.thermal, &query.trunc)?),
        },
    })
}

/// Result of the randomized oracle cross-checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub trials: usize,
    pub max_dynamics_deviation: f64,
    pub max_negativity_deviation: f64,
    /// Present when the integrator cross-check was requested.
    pub max_rk4_deviation: Option<f64>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.max_dynamics_deviation <= DYNAMICS_TOLERANCE
            && self.max_negativity_deviation <= NEGATIVITY_TOLERANCE
            && self.max_rk4_deviation.is_none_or(|d| d <= RK4_TOLERANCE)
    }
}

/// Samples random parameters and times, comparing the closed-form block
/// evolution against the series oracle and the chain log-negativity against
/// the dense eigensolver. Deterministic for a given seed.
pub fn oracle_check(seed: u64, trials: usize, include_rk4: bool) -> Result<OracleReport> {
    if trials == 0 {
        return Err(Error::InvalidParams(
            "oracle check needs trials >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_dynamics = 0.0f64;
    let mut max_negativity = 0.0f64;
    let mut max_rk4 = 0.0f64;

    for _ in 0..trials {
        let n1 = rng.gen_range(0..=5u32);
        let n2 = rng.gen_range(0..=5u32);
        let g = rng.gen_range(0.1..=1.0);
        let delta = rng.gen_range(-2.0..=2.0);
        let gamma = rng.gen_range(0.0..=1.0);
        let t = rng.gen_range(0.0..=20.0);
        let params = ModelParams::with_detuning(
            1.0,
            1.0,
            delta,
            g,
            gamma,
            std::f64::consts::FRAC_PI_2,
            0.0,
        )?;

        let fast = evolve_block(n1, n2, t, &params)?;
        let series = oracle_evolve_block(n1, n2, t, &params, 1)?;
        max_dynamics = max_dynamics
            .max((fast.p_ee - series.p_ee).abs())
            .max((fast.p_gg - series.p_gg).abs())
            .max((fast.c_eg - series.c_eg).norm());

        if include_rk4 {
            // Short horizon: the fixed-step integrator is a spot check.
            let t_short = t.min(5.0);
            let fast_short = evolve_block(n1, n2, t_short, &params)?;
            let rk4 = rk4_evolve_block(n1, n2, t_short, &params)?;
            max_rk4 = max_rk4
                .max((fast_short.p_ee - rk4.p_ee).abs())
                .max((fast_short.p_gg - rk4.p_gg).abs())
                .max((fast_short.c_eg - rk4.c_eg).norm());
        }

        let state = random_field_state(&mut rng);
        let fast_neg = log_negativity(&state)?;
        let dense_neg = oracle_log_negativity(&state)?;
        max_negativity = max_negativity.max((fast_neg - dense_neg).abs());
    }

    Ok(OracleReport {
        trials,
        max_dynamics_deviation: max_dynamics,
        max_negativity_deviation: max_negativity,
        max_rk4_deviation: include_rk4.then_some(max_rk4),
    })
}

/// Random valid [`FieldState`]: a mixture of random positive field blocks
/// plus diagonal filler, so positivity and the coherence band structure hold
/// by construction.
pub fn random_field_state<R: Rng>(rng: &mut R) -> FieldState {
    // Mostly small states; occasionally wider ones to exercise longer chains.
    let (d1, d2) = if rng.gen_bool(0.15) {
        (rng.gen_range(6..=10u32), rng.gen_range(6..=10u32))
    } else {
        (rng.gen_range(2..=5u32), rng.gen_range(2..=6u32))
    };
    let mut acc = FieldStateAccumulator::new();
    for n1 in 0..d1.saturating_sub(1) {
        for n2 in 0..d2.saturating_sub(1) {
            if rng.gen_bool(0.25) {
                continue; // leave some couplings out to vary the chains
            }
            let w_low: f64 = rng.gen_range(0.0..1.0);
            let w_high: f64 = rng.gen_range(0.0..1.0);
            let magnitude = (w_low * w_high).sqrt() * rng.gen_range(0.0..1.0);
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let block = FieldBlock {
                n1,
                n2,
                w_low,
                w_high,
                c: C64::from_polar(magnitude, phase),
                normalized: false,
            };
            acc.add_block(&block, rng.gen_range(0.05..1.0));
        }
    }
    for m1 in 0..d1 {
        for m2 in 0..d2 {
            if rng.gen_bool(0.5) {
                acc.add_population(m1, m2, rng.gen_range(0.0..0.5));
            }
        }
    }
    acc.add_population(0, 0, 0.1); // keep the trace away from zero
    acc.finish().expect("random state construction")
}

/// Figure presets: the fixed parameters and axes behind `figure 1..6`.
///
/// Presets 1-3 are stationary surfaces over mean photon number and detuning;
/// presets 4-6 are time surfaces. Time grids run to `20/g` so the slowest
/// damped envelope in the sweep decays below 1e-4 by the end of the grid.
pub fn figure_preset(figure: u8, trunc: TruncationConfig) -> Result<(SweepSpec, SweepBase)> {
    let g = 0.5;
    let theta = std::f64::consts::FRAC_PI_2;
    let gamma = 0.5;
    let params = |delta: f64| ModelParams::with_detuning(1.0, 1.0, delta, g, gamma, theta, 0.0);
    let axis = |param: AxisParam, start: f64, stop: f64, step: f64| Axis {
        param,
        start,
        stop,
        step,
    };
    let t_axis = axis(AxisParam::T, 0.0, 20.0 / g, 0.1 / g);

    let (axes, mode, mbar_sum, delta) = match figure {
        1 => (
            vec![
                axis(AxisParam::MbarAlpha, 0.0, 3.0, 0.1),
                axis(AxisParam::Delta, 0.0, 3.0, 0.1),
            ],
            SweepMode::Stationary,
            None,
            1.0,
        ),
        2 => (
            vec![
                axis(AxisParam::Mbar2, 0.0, 5.0, 0.1),
                axis(AxisParam::Delta, 0.0, 3.0, 0.1),
            ],
            SweepMode::Stationary,
            None,
            1.0,
        ),
        3 => (
            vec![
                axis(AxisParam::Mbar1, 0.0, 3.0, 0.1),
                axis(AxisParam::Mbar2, 0.0, 3.0, 0.1),
            ],
            SweepMode::Stationary,
            None,
            1.0,
        ),
        4 => (
            vec![axis(AxisParam::MbarAlpha, 0.0, 3.0, 0.1), t_axis],
            SweepMode::TimePoint,
            None,
            0.0,
        ),
        5 => (
            vec![axis(AxisParam::MbarAlpha, 0.0, 3.0, 0.1), t_axis],
            SweepMode::TimePoint,
            None,
            1.0,
        ),
        6 => (
            vec![axis(AxisParam::MbarDiff, 0.0, 1.0, 0.1), t_axis],
            SweepMode::TimePoint,
            Some(1.0),
            1.0,
        ),
        other => {
            return Err(Error::InvalidSweep(format!(
                "no figure preset {other}; available presets are 1..=6"
            )))
        }
    };

    let spec = SweepSpec {
        axes,
        mode,
        mbar_sum,
    };
    let base = SweepBase {
        params: params(delta)?,
        thermal: ThermalSpec::new(0.0, 0.0)?,
        t: None,
        outcome: Outcome::Plus,
        trunc,
    };
    Ok((spec, base))
}
