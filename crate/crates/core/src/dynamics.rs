//! Time evolution of the atom-field state within one invariant block.
//!
//! The fast path is the closed-form solution of the phase-decoherence master
//! equation for a Fock-state start `|n1, n2> ⊗ |e>`. Two independent slow
//! paths back it: a term-by-term evaluation of the decoherence operator
//! series, and an explicit fourth-order integrator for the master equation
//! itself. The oracles never reuse the closed-form trigonometric expressions.

use crate::error::{Error, Result};
use crate::model::{block_hamiltonian, ModelParams};
use crate::C64;

/// 2x2 density matrix on `span{|n1, n2, e>, |n1+1, n2+1, g>}`.
///
/// Hermiticity is structural: only the upper coherence is stored. Trace is
/// preserved at 1 by every evolution path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomFieldBlockState {
    pub n1: u32,
    pub n2: u32,
    /// Population of `|n1, n2> ⊗ |e>`.
    pub p_ee: f64,
    /// Population of `|n1+1, n2+1> ⊗ |g>`.
    pub p_gg: f64,
    /// Coherence `<n1, n2, e| rho |n1+1, n2+1, g>`.
    pub c_eg: C64,
}

impl AtomFieldBlockState {
    pub fn trace(&self) -> f64 {
        self.p_ee + self.p_gg
    }

    /// `p_ee p_gg - |c_eg|^2`; nonnegative (up to rounding) for a valid
    /// density matrix.
    pub fn positivity_defect(&self) -> f64 {
        self.p_ee * self.p_gg - self.c_eg.norm_sqr()
    }
}

/// Closed-form block state at time `t` for the initial state
/// `|n1, n2> ⊗ |e>`.
pub fn evolve_block(n1: u32, n2: u32, t: f64, params: &ModelParams) -> Result<AtomFieldBlockState> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let omega = block_hamiltonian(n1, n2, params).omega_rabi;
    let delta = params.detuning();
    let k = f64::from(n1 + 1) * f64::from(n2 + 1);
    let omega_sq = omega * omega;

    let envelope = (-2.0 * params.gamma * t * omega_sq).exp();
    let (sin2, cos2) = (2.0 * omega * t).sin_cos();
    let damped_cos = envelope * cos2;
    let d2 = delta * delta / (2.0 * omega_sq);

    let p_ee = 0.25 * (2.0 + d2 + (2.0 - d2) * damped_cos);
    let p_gg = 0.25 * (params.g * params.g * k / omega_sq) * (2.0 - 2.0 * damped_cos);
    let c_eg = params.g * k.sqrt() / (4.0 * omega)
        * C64::new(delta / omega * (1.0 - damped_cos), 2.0 * envelope * sin2);

    Ok(AtomFieldBlockState {
        n1,
        n2,
        p_ee,
        p_gg,
        c_eg,
    })
}

/// Block state in the long-time limit, where every damped oscillatory term
/// has died out. Exists only under decoherence.
pub fn stationary_block(n1: u32, n2: u32, params: &ModelParams) -> Result<AtomFieldBlockState> {
    if params.gamma <= 0.0 {
        return Err(Error::NoStationaryState);
    }
    let omega_sq = {
        let o = block_hamiltonian(n1, n2, params).omega_rabi;
        o * o
    };
    let delta = params.detuning();
    let k = f64::from(n1 + 1) * f64::from(n2 + 1);

    Ok(AtomFieldBlockState {
        n1,
        n2,
        p_ee: 0.25 * (2.0 + delta * delta / (2.0 * omega_sq)),
        p_gg: params.g * params.g * k / (2.0 * omega_sq),
        c_eg: C64::new(params.g * delta * k.sqrt() / (4.0 * omega_sq), 0.0),
    })
}

/// Hard term budget for the decoherence series.
const MAX_SERIES_TERMS: usize = 1_000_000;
/// Relative size at which a series term is considered spent.
const SERIES_TERM_CUTOFF: f64 = 1e-16;

/// Independent oracle: evaluates the formal operator-series solution of the
/// phase-decoherence master equation on the 2x2 block, term by term.
///
/// The block Hamiltonian is rebuilt from the bare matrix elements and
/// diagonalized numerically, and the `k`-sum is accumulated numerically with
/// Poisson rescaling rather than collapsed into its closed form. `k_max` is
/// the minimum number of series terms; the sum is extended automatically
/// until the remaining terms are negligible.
pub fn oracle_evolve_block(
    n1: u32,
    n2: u32,
    t: f64,
    params: &ModelParams,
    k_max: usize,
) -> Result<AtomFieldBlockState> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if k_max < 1 {
        return Err(Error::InvalidParams(
            "oracle series needs k_max >= 1".into(),
        ));
    }

    let [h11, h22, h12] = bare_block_elements(n1, n2, params);

    // Numeric eigendecomposition of [[h11, h12], [h12, h22]].
    let mid = 0.5 * (h11 + h22);
    let radius = (0.5 * (h11 - h22)).hypot(h12);
    let lambda_plus = mid + radius;
    let lambda_minus = mid - radius;
    let half_angle = 0.5 * (2.0 * h12).atan2(h11 - h22);
    let (s, c) = half_angle.sin_cos();

    // rho(0) = |e><e| in the eigenbasis: rows of G^T applied to e1.
    let r00 = c * c;
    let r01 = -c * s;
    let r11 = s * s;

    let gt = params.gamma * t;
    let factor = |fi: f64, fj: f64| -> Result<C64> {
        let phase = C64::from_polar(1.0, -(fi - fj) * t);
        let (series, _) =
            scaled_exponential_series(gt * fi * fj, 0.5 * gt * (fi * fi + fj * fj), k_max)?;
        Ok(phase * series)
    };

    let f00 = factor(lambda_plus, lambda_plus)?;
    let f01 = factor(lambda_plus, lambda_minus)?;
    let f11 = factor(lambda_minus, lambda_minus)?;

    let rt00 = r00 * f00;
    let rt01 = r01 * f01;
    let rt11 = r11 * f11;

    // Back to the bare basis: rho = G rho~ G^T.
    let p_ee = c * c * rt00 - 2.0 * c * s * rt01.re + s * s * rt11;
    let p_gg = s * s * rt00 + 2.0 * c * s * rt01.re + c * c * rt11;
    let c_eg = c * s * (rt00 - rt11) + (c * c) * rt01 - (s * s) * rt01.conj();

    Ok(AtomFieldBlockState {
        n1,
        n2,
        p_ee: p_ee.re,
        p_gg: p_gg.re,
        c_eg,
    })
}

/// Matrix elements of the bare Hamiltonian restricted to the block, straight
/// from the interaction terms (no dressed-state shortcuts).
fn bare_block_elements(n1: u32, n2: u32, params: &ModelParams) -> [f64; 3] {
    let h11 = params.omega1 * f64::from(n1) + params.omega2 * f64::from(n2) + 0.5 * params.omega;
    let h22 =
        params.omega1 * f64::from(n1 + 1) + params.omega2 * f64::from(n2 + 1) - 0.5 * params.omega;
    let h12 = params.g * (f64::from(n1 + 1) * f64::from(n2 + 1)).sqrt();
    [h11, h22, h12]
}

/// `sum_k a^k / k! * exp(-p)` for `p >= |a|`, evaluated term by term.
///
/// The terms are rescaled into Poisson weights `|a|^k e^{-|a|} / k!` and the
/// sum is started at the mode, so the evaluation never overflows even when
/// `a` and `p` are both large. Returns the sum and the number of terms used.
fn scaled_exponential_series(a: f64, p: f64, min_terms: usize) -> Result<(f64, usize)> {
    debug_assert!(
        p >= a.abs() - 1e-9 * a.abs().max(1.0),
        "series needs p >= |a|"
    );
    let abs_a = a.abs();
    if abs_a == 0.0 {
        return Ok(((-p).exp(), 1));
    }
    let outer = (abs_a - p).exp();
    if outer == 0.0 {
        // The whole sum is below the smallest positive double.
        return Ok((0.0, 1));
    }
    let negative = a < 0.0;
    let sign_at = |k: usize| if negative && k % 2 == 1 { -1.0 } else { 1.0 };

    let mode = abs_a.floor() as usize;
    let w_mode = (mode as f64 * abs_a.ln() - abs_a - ln_factorial(mode)).exp();
    let cutoff = SERIES_TERM_CUTOFF * w_mode;

    let mut sum = sign_at(mode) * w_mode;
    let mut terms = 1usize;

    // Upward from the mode.
    let mut w = w_mode;
    let mut k = mode;
    loop {
        k += 1;
        w *= abs_a / k as f64;
        sum += sign_at(k) * w;
        terms += 1;
        if terms > MAX_SERIES_TERMS {
            return Err(Error::SeriesDivergence {
                terms,
                last_term: w,
            });
        }
        if w < cutoff && k >= min_terms {
            break;
        }
    }
    // Downward from the mode.
    w = w_mode;
    k = mode;
    while k > 0 {
        w *= k as f64 / abs_a;
        k -= 1;
        sum += sign_at(k) * w;
        terms += 1;
        if w < cutoff {
            break;
        }
    }

    Ok((outer * sum, terms))
}

fn ln_factorial(k: usize) -> f64 {
    if k < 2 {
        return 0.0;
    }
    if k <= 256 {
        (2..=k).map(|i| (i as f64).ln()).sum()
    } else {
        // Stirling series; error below 1e-16 for k > 256.
        let x = k as f64;
        x * x.ln() - x + 0.5 * (std::f64::consts::TAU * x).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3))
            + 1.0 / (1260.0 * x.powi(5))
    }
}

/// Second oracle: fixed-step fourth-order integration of the master equation
/// `d rho/dt = -i [H, rho] - gamma/2 [H, [H, rho]]` on the block.
///
/// Step size `min(0.01/Omega, 0.01/(gamma Omega^2))`, so this is meant for
/// spot checks at moderate times, not sweeps.
pub fn rk4_evolve_block(
    n1: u32,
    n2: u32,
    t: f64,
    params: &ModelParams,
) -> Result<AtomFieldBlockState> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let [h11, h22, h12] = bare_block_elements(n1, n2, params);
    let gamma = params.gamma;
    let omega = block_hamiltonian(n1, n2, params).omega_rabi;

    let mut h = 0.01 / omega;
    if gamma > 0.0 {
        h = h.min(0.01 / (gamma * omega * omega));
    }
    let steps = ((t / h).ceil() as usize).max(1);
    let dt = t / steps as f64;

    type M2 = [[C64; 2]; 2];
    let zero = C64::new(0.0, 0.0);
    let hm: M2 = [
        [C64::new(h11, 0.0), C64::new(h12, 0.0)],
        [C64::new(h12, 0.0), C64::new(h22, 0.0)],
    ];
    let mul = |a: &M2, b: &M2| -> M2 {
        let mut out = [[zero; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, el) in row.iter_mut().enumerate() {
                *el = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    };
    let lincomb = |x: &M2, y: &M2, cx: C64, cy: C64| -> M2 {
        let mut out = [[zero; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, el) in row.iter_mut().enumerate() {
                *el = cx * x[i][j] + cy * y[i][j];
            }
        }
        out
    };
    let commutator = |x: &M2, y: &M2| {
        lincomb(
            &mul(x, y),
            &mul(y, x),
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
        )
    };
    let rhs = |rho: &M2| -> M2 {
        let comm = commutator(&hm, rho);
        let double = commutator(&hm, &comm);
        lincomb(
            &comm,
            &double,
            C64::new(0.0, -1.0),
            C64::new(-0.5 * gamma, 0.0),
        )
    };

    let mut rho: M2 = [[C64::new(1.0, 0.0), zero], [zero, zero]];
    for _ in 0..steps {
        let k1 = rhs(&rho);
        let r2 = lincomb(&rho, &k1, C64::new(1.0, 0.0), C64::new(0.5 * dt, 0.0));
        let k2 = rhs(&r2);
        let r3 = lincomb(&rho, &k2, C64::new(1.0, 0.0), C64::new(0.5 * dt, 0.0));
        let k3 = rhs(&r3);
        let r4 = lincomb(&rho, &k3, C64::new(1.0, 0.0), C64::new(dt, 0.0));
        let k4 = rhs(&r4);
        let k12 = lincomb(&k1, &k2, C64::new(1.0, 0.0), C64::new(2.0, 0.0));
        let k34 = lincomb(&k3, &k4, C64::new(2.0, 0.0), C64::new(1.0, 0.0));
        let ksum = lincomb(&k12, &k34, C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        rho = lincomb(&rho, &ksum, C64::new(1.0, 0.0), C64::new(dt / 6.0, 0.0));
    }

    Ok(AtomFieldBlockState {
        n1,
        n2,
        p_ee: rho[0][0].re,
        p_gg: rho[1][1].re,
        c_eg: rho[0][1],
    })
}
