//! `qerase` — sweep and query front end.
//!
//! Subcommands: `point` for one pipeline evaluation, `sweep` for CSV grids,
//! `figure <1..6>` for the preset surfaces, and `oracle-check` for the
//! randomized cross-validation of the closed forms.
//!
//! Exit codes: 0 success, 1 invalid arguments, 2 truncation failure,
//! 3 oracle-check failure.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qerase_core::erasure::Outcome;
use qerase_core::sweep::{
    figure_preset, fmt_float, oracle_check, run_sweep, single_point, write_csv, Axis, AxisParam,
    PointQuery, SweepBase, SweepMode, SweepSpec, DYNAMICS_TOLERANCE, NEGATIVITY_TOLERANCE,
    RK4_TOLERANCE,
};
use qerase_core::thermal::{ThermalSpec, TimeSpec, TruncationConfig};
use qerase_core::{Error, ModelParams};

#[derive(Parser)]
#[command(
    name = "qerase",
    version,
    about = "Log-negativity of two thermal field modes entangled by an atomic erasure measurement",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one parameter point and report log-negativity and outcome
    /// probabilities.
    Point(CommonArgs),
    /// Sweep one or two parameters and write a CSV surface.
    Sweep(CommonArgs),
    /// Run a preset sweep (1-6) with its fixed parameters baked in.
    Figure {
        /// Preset number, 1 through 6.
        number: u8,
        #[command(flatten)]
        args: FigureArgs,
    },
    /// Cross-check closed forms against the series and dense oracles.
    OracleCheck {
        /// RNG seed for the sampled parameters.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of random trials.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Also run the fixed-step integrator cross-check.
        #[arg(long)]
        rk4: bool,
    },
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Flat key=value file with the same keys as the flags; flags override.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Atom-field coupling constant.
    #[arg(long)]
    g: Option<f64>,
    /// Detuning omega - omega1 - omega2 (overrides --omega).
    #[arg(long)]
    delta: Option<f64>,
    /// Atomic transition frequency.
    #[arg(long)]
    omega: Option<f64>,
    /// Mode-1 frequency.
    #[arg(long)]
    omega1: Option<f64>,
    /// Mode-2 frequency.
    #[arg(long)]
    omega2: Option<f64>,
    /// Phase decoherence coefficient.
    #[arg(long)]
    gamma: Option<f64>,
    /// Measurement polar angle (radians).
    #[arg(long)]
    theta: Option<f64>,
    /// Measurement azimuthal angle (radians).
    #[arg(long)]
    phi: Option<f64>,
    /// Mean photon number of mode 1.
    #[arg(long)]
    mbar1: Option<f64>,
    /// Mean photon number of mode 2.
    #[arg(long)]
    mbar2: Option<f64>,
    /// Fixed mbar1 + mbar2, required by an mbar_diff sweep axis.
    #[arg(long)]
    mbar_sum: Option<f64>,
    /// Evaluation time.
    #[arg(long)]
    t: Option<f64>,
    /// Evaluate the stationary state instead of a time point.
    #[arg(long)]
    stationary: bool,
    /// Bypass thermal weighting: use the single Fock block N1 N2.
    #[arg(long, num_args = 2, value_names = ["N1", "N2"])]
    fock: Option<Vec<u32>>,
    /// Thermal probability mass allowed outside the Fock cutoff.
    #[arg(long)]
    tail_mass: Option<f64>,
    /// Absolute per-mode Fock cutoff cap.
    #[arg(long)]
    hard_cap: Option<usize>,
    /// Measurement outcome to keep: plus or minus.
    #[arg(long)]
    outcome: Option<String>,
    /// Sweep axis NAME=START:STOP:STEP; repeatable, at most twice.
    #[arg(long)]
    sweep: Vec<String>,
    /// Write output here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Seed echoed into metadata (sweeps are deterministic regardless).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    tail_mass: Option<f64>,
    #[arg(long)]
    hard_cap: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::TruncationOverflow { .. } => 2,
        Error::AtGridPoint { source, .. } => exit_code(source),
        Error::OracleMismatch(_) => 3,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Point(args) => {
            let resolved = Resolved::from_args(args)?;
            let time = resolved
                .time
                .ok_or_else(|| Error::InvalidParams("point needs --t or --stationary".into()))?;
            let query = PointQuery {
                params: resolved.params,
                thermal: resolved.thermal,
                time,
                outcome: resolved.outcome,
                trunc: resolved.trunc,
                fock: resolved.fock,
            };
            let report = single_point(&query)?;
            let mut out = open_output(&resolved.output)?;
            let mut lines = String::new();
            lines.push_str(&format!(
                "log_negativity = {}\n",
                fmt_float(report.log_negativity)
            ));
            for outcome in report.outcomes {
                lines.push_str(&format!(
                    "p_{} = {}\n",
                    outcome.label.label(),
                    fmt_float(outcome.probability)
                ));
            }
            match report.cutoffs {
                Some((n1, n2)) => lines.push_str(&format!("cutoffs = {n1} {n2}\n")),
                None => lines.push_str("cutoffs = fock\n"),
            }
            ignore_pipe(out.write_all(lines.as_bytes()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep(args) => {
            let resolved = Resolved::from_args(args)?;
            if resolved.axes.is_empty() {
                return Err(Error::InvalidSweep(
                    "sweep needs at least one --sweep NAME=START:STOP:STEP".into(),
                ));
            }
            let mode = if resolved.stationary {
                SweepMode::Stationary
            } else {
                SweepMode::TimePoint
            };
            let spec = SweepSpec {
                axes: resolved.axes.clone(),
                mode,
                mbar_sum: resolved.mbar_sum,
            };
            let base = SweepBase {
                params: resolved.params,
                thermal: resolved.thermal,
                t: resolved.t,
                outcome: resolved.outcome,
                trunc: resolved.trunc,
            };
            let mut result = run_sweep(&spec, &base)?;
            if let Some(seed) = resolved.seed {
                result.metadata.push(("seed".into(), seed.to_string()));
            }
            let mut out = open_output(&resolved.output)?;
            ignore_pipe(write_csv(&result, &mut out))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Figure { number, args } => {
            let mut trunc = TruncationConfig::default();
            let config = args
                .config
                .as_ref()
                .map(read_config)
                .transpose()?
                .unwrap_or_default();
            if let Some(tail) = args.tail_mass.or_else(|| parse_from(&config, "tail-mass")) {
                trunc.tail_mass = tail;
            }
            if let Some(cap) = args.hard_cap.or_else(|| parse_from(&config, "hard-cap")) {
                trunc.hard_cap = cap;
            }
            let (spec, base) = figure_preset(number, trunc)?;
            let result = run_sweep(&spec, &base)?;
            let output = args
                .output
                .or_else(|| config.get("output").map(PathBuf::from));
            let mut out = open_output(&output)?;
            ignore_pipe(write_csv(&result, &mut out))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::OracleCheck { seed, trials, rk4 } => {
            let report = oracle_check(seed, trials, rk4)?;
            println!("trials = {}", report.trials);
            println!(
                "max_dynamics_deviation = {} (tolerance {DYNAMICS_TOLERANCE:e})",
                fmt_float(report.max_dynamics_deviation)
            );
            println!(
                "max_negativity_deviation = {} (tolerance {NEGATIVITY_TOLERANCE:e})",
                fmt_float(report.max_negativity_deviation)
            );
            if let Some(rk4_dev) = report.max_rk4_deviation {
                println!(
                    "max_rk4_deviation = {} (tolerance {RK4_TOLERANCE:e})",
                    fmt_float(rk4_dev)
                );
            }
            if report.passed() {
                println!("result = pass");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("result = fail");
                Err(Error::OracleMismatch(format!(
                    "max deviations: dynamics {:.3e}, negativity {:.3e}",
                    report.max_dynamics_deviation, report.max_negativity_deviation
                )))
            }
        }
    }
}

/// Flag values merged over the config file, resolved against the defaults:
/// g = 0.5, theta = pi/2, phi = 0, gamma = 0.5, delta = 1, omega1 = omega2
/// = 1, vacuum thermal fields, plus outcome.
struct Resolved {
    params: ModelParams,
    thermal: ThermalSpec,
    time: Option<TimeSpec>,
    t: Option<f64>,
    stationary: bool,
    outcome: Outcome,
    trunc: TruncationConfig,
    fock: Option<(u32, u32)>,
    axes: Vec<Axis>,
    mbar_sum: Option<f64>,
    output: Option<PathBuf>,
    seed: Option<u64>,
}

impl Resolved {
    fn from_args(args: CommonArgs) -> Result<Self, Error> {
        let config = args
            .config
            .as_ref()
            .map(read_config)
            .transpose()?
            .unwrap_or_default();

        let pick = |flag: Option<f64>, key: &str| flag.or_else(|| parse_from(&config, key));
        let g = pick(args.g, "g").unwrap_or(0.5);
        let omega1 = pick(args.omega1, "omega1").unwrap_or(1.0);
        let omega2 = pick(args.omega2, "omega2").unwrap_or(1.0);
        let gamma = pick(args.gamma, "gamma").unwrap_or(0.5);
        let theta = pick(args.theta, "theta").unwrap_or(std::f64::consts::FRAC_PI_2);
        let phi = pick(args.phi, "phi").unwrap_or(0.0);
        let delta = pick(args.delta, "delta");
        let omega = pick(args.omega, "omega");

        // Delta wins over omega; with neither, default to delta = 1.
        let params = match (delta, omega) {
            (Some(d), _) => ModelParams::with_detuning(omega1, omega2, d, g, gamma, theta, phi)?,
            (None, Some(w)) => ModelParams::new(omega1, omega2, w, g, gamma, theta, phi)?,
            (None, None) => ModelParams::with_detuning(omega1, omega2, 1.0, g, gamma, theta, phi)?,
        };

        let thermal = ThermalSpec::new(
            pick(args.mbar1, "mbar1").unwrap_or(0.0),
            pick(args.mbar2, "mbar2").unwrap_or(0.0),
        )?;
        let trunc = TruncationConfig::new(
            pick(args.tail_mass, "tail-mass").unwrap_or(1e-10),
            args.hard_cap
                .or_else(|| parse_from(&config, "hard-cap"))
                .unwrap_or(512),
        )?;

        let stationary =
            args.stationary || parse_from::<bool>(&config, "stationary").unwrap_or(false);
        let t = pick(args.t, "t");
        let time = if stationary {
            Some(TimeSpec::Stationary)
        } else {
            t.map(TimeSpec::At)
        };

        let outcome_name = args
            .outcome
            .or_else(|| config.get("outcome").cloned())
            .unwrap_or_else(|| "plus".into());
        let outcome = match outcome_name.as_str() {
            "plus" => Outcome::Plus,
            "minus" => Outcome::Minus,
            other => {
                return Err(Error::InvalidParams(format!(
                    "unknown outcome {other:?} (expected plus or minus)"
                )))
            }
        };

        let fock = match args.fock {
            Some(values) => Some((values[0], values[1])),
            None => config.get("fock").map(|raw| parse_fock(raw)).transpose()?,
        };

        let sweep_specs = if args.sweep.is_empty() {
            config
                .get("sweep")
                .map(|v| v.split(';').map(|s| s.trim().to_string()).collect())
                .unwrap_or_default()
        } else {
            args.sweep
        };
        let axes = sweep_specs
            .iter()
            .map(|raw| parse_axis(raw))
            .collect::<Result<Vec<_>, _>>()?;
        if axes.len() > 2 {
            return Err(Error::InvalidSweep(format!(
                "at most two sweep axes are supported, got {}",
                axes.len()
            )));
        }

        Ok(Resolved {
            params,
            thermal,
            time,
            t,
            stationary,
            outcome,
            trunc,
            fock,
            axes,
            mbar_sum: pick(args.mbar_sum, "mbar-sum"),
            output: args
                .output
                .or_else(|| config.get("output").map(PathBuf::from)),
            seed: args.seed.or_else(|| parse_from(&config, "seed")),
        })
    }
}

/// Reads a flat `key = value` file; `#` starts a comment, underscores and
/// hyphens in keys are interchangeable.
fn read_config(path: &PathBuf) -> Result<HashMap<String, String>, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidParams(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::InvalidParams(format!(
                "config line {} is not key=value: {line:?}",
                lineno + 1
            )));
        };
        let key = key.trim().replace('_', "-");
        let entry: &mut String = map.entry(key.clone()).or_default();
        // Repeated sweep lines accumulate; everything else is last-wins.
        if key == "sweep" && !entry.is_empty() {
            entry.push(';');
            entry.push_str(value.trim());
        } else {
            *entry = value.trim().to_string();
        }
    }
    Ok(map)
}

fn parse_from<T: std::str::FromStr>(config: &HashMap<String, String>, key: &str) -> Option<T> {
    config.get(key).and_then(|v| v.parse().ok())
}

fn parse_fock(raw: &str) -> Result<(u32, u32), Error> {
    let parts: Vec<&str> = raw.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(Error::InvalidParams(format!(
            "fock needs two Fock labels, got {raw:?}"
        )));
    }
    let n1 = parts[0]
        .parse()
        .map_err(|_| Error::InvalidParams(format!("bad Fock label {:?}", parts[0])))?;
    let n2 = parts[1]
        .parse()
        .map_err(|_| Error::InvalidParams(format!("bad Fock label {:?}", parts[1])))?;
    Ok((n1, n2))
}

/// Parses `NAME=START:STOP:STEP`.
fn parse_axis(raw: &str) -> Result<Axis, Error> {
    let (name, grid) = raw.split_once('=').ok_or_else(|| {
        Error::InvalidSweep(format!("expected NAME=START:STOP:STEP, got {raw:?}"))
    })?;
    let param = AxisParam::parse(name.trim())?;
    let parts: Vec<&str> = grid.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidSweep(format!(
            "expected START:STOP:STEP, got {grid:?}"
        )));
    }
    let mut values = [0.0f64; 3];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part.trim().parse().map_err(|_| {
            Error::InvalidSweep(format!("bad number {part:?} in sweep axis {raw:?}"))
        })?;
    }
    Ok(Axis {
        param,
        start: values[0],
        stop: values[1],
        step: values[2],
    })
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    match path {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| {
                Error::InvalidParams(format!("cannot create {}: {e}", path.display()))
            })?;
            Ok(Box::new(std::io::BufWriter::new(file)))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn io_error(err: std::io::Error) -> Error {
    Error::InvalidParams(format!("write failed: {err}"))
}

/// A reader closing the pipe early (e.g. `| head`) is not an error.
fn ignore_pipe(result: std::io::Result<()>) -> Result<(), Error> {
    match result {
        Err(err) if err.kind() != std::io::ErrorKind::BrokenPipe => Err(io_error(err)),
        _ => Ok(()),
    }
}
