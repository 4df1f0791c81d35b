//! Small-oscillation model of the pair sitting inside the well.
//!
//! Near the well center the center of mass and the relative coordinate
//! decouple into two harmonic oscillators:
//!
//! ```text
//! R''   + 2 A beta exp(-beta r_eq^2) R       = 0
//! eps'' + (2k + 2 A beta exp(-beta r_eq^2)) eps = 0
//! ```
//!
//! with the relative coordinate shifted by a negative in-well offset,
//! `delta = offset + eps`. `r_eq` is passed explicitly since it can be read
//! either as the free equilibrium separation or as half of it.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::integrator::{integrate_observed, IntegratorConfig, StopCondition, StopReason};
use crate::model::{CmState, ModelParams, State};

/// Closed-form oscillator constants for one reading of `r_eq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedParams {
    pub omega_r: f64,
    pub omega_eps: f64,
    /// Zero when the well is switched off.
    pub delta_offset: f64,
    pub r_eq: f64,
}

impl LinearizedParams {
    pub fn new(params: &ModelParams, r_eq: f64) -> Result<Self> {
        if !(r_eq > 0.0) {
            return Err(Error::InvalidParams(format!(
                "r_eq must be positive, got {r_eq}"
            )));
        }
        let (omega_r, omega_eps) = linearized_frequencies(params, r_eq);
        let delta_offset = match delta_offset(params, r_eq) {
            Ok(d) => d,
            Err(Error::WellAbsent) => 0.0,
            Err(e) => return Err(e),
        };
        Ok(LinearizedParams {
            omega_r,
            omega_eps,
            delta_offset,
            r_eq,
        })
    }
}

/// `(omega_R, omega_eps)` with `omega_R^2 = 2 A beta exp(-beta r_eq^2)` and
/// `omega_eps^2 = 2k + omega_R^2`.
pub fn linearized_frequencies(params: &ModelParams, r_eq: f64) -> (f64, f64) {
    let well = well_curvature(params, r_eq);
    (well.sqrt(), (2.0 * params.k + well).sqrt())
}

fn well_curvature(params: &ModelParams, r_eq: f64) -> f64 {
    2.0 * params.a * params.beta * (-params.beta * r_eq * r_eq).exp()
}

/// In-well shift of the relative coordinate,
/// `-r_eq / (1 + k/(A beta) exp(beta r_eq^2))`.
pub fn delta_offset(params: &ModelParams, r_eq: f64) -> Result<f64> {
    if params.a == 0.0 {
        return Err(Error::WellAbsent);
    }
    let ratio = params.k / (params.a * params.beta) * (params.beta * r_eq * r_eq).exp();
    Ok(-r_eq / (1.0 + ratio))
}

/// Linearized evolution from `init`: returns `(R(t), delta(t))` where
/// `delta = r - r_eq`.
pub fn closed_form_trajectory(init: &CmState, lp: &LinearizedParams, t: f64) -> (f64, f64) {
    let r_cm = oscillator(init.r_cm, init.v_cm, lp.omega_r, t);
    let delta0 = init.r - lp.r_eq;
    let (c, s) = phase(lp.omega_eps, t);
    // offset + (delta0 - offset) cos + w0/omega sin, arranged to be exact at t = 0
    let delta = delta0 * c + lp.delta_offset * (1.0 - c) + init.w * s;
    (r_cm, delta)
}

/// `x0 cos(wt) + v0/w sin(wt)`, continuous in `w -> 0`.
fn oscillator(x0: f64, v0: f64, omega: f64, t: f64) -> f64 {
    let (c, s) = phase(omega, t);
    x0 * c + v0 * s
}

/// `(cos(wt), sin(wt)/w)`, with the free-particle limit `(1, t)` at `w = 0`.
fn phase(omega: f64, t: f64) -> (f64, f64) {
    if omega == 0.0 {
        (1.0, t)
    } else {
        let (s, c) = (omega * t).sin_cos();
        (c, s / omega)
    }
}

/// Angular frequency of a near-sinusoidal series sampled every `dt`.
///
/// Counts crossings of the series mean with a hysteresis band of a tenth of
/// the RMS deviation, so noise near a crossing is not double-counted. Each
/// crossing is timed by linear interpolation at the last mean straddle
/// before the band is left. The estimate is `pi / mean half-period`.
pub fn dominant_frequency(samples: &[f64], dt: f64) -> Result<f64> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InsufficientOscillations { found: 0 });
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let rms = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    if !(rms > 0.0) {
        return Err(Error::InsufficientOscillations { found: 0 });
    }
    let band = 0.1 * rms;

    let mut high: Option<bool> = None;
    let mut last_straddle: Option<f64> = None;
    let mut crossings: Vec<f64> = Vec::new();
    for i in 0..n {
        let x = samples[i] - mean;
        if i > 0 {
            let xp = samples[i - 1] - mean;
            if (xp < 0.0) != (x < 0.0) {
                last_straddle = Some((i as f64 - 1.0 + xp / (xp - x)) * dt);
            }
        }
        let side = if x > band {
            Some(true)
        } else if x < -band {
            Some(false)
        } else {
            None
        };
        if let Some(side) = side {
            if high == Some(!side) {
                if let Some(t) = last_straddle {
                    crossings.push(t);
                }
            }
            high = Some(side);
        }
    }
    if crossings.len() < 4 {
        return Err(Error::InsufficientOscillations {
            found: crossings.len(),
        });
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    Ok(PI * (crossings.len() - 1) as f64 / span)
}

/// Pair separation at rest in the well center: the root of
/// `-k s + n alpha / s^(n+1) + F(s/2) = 0` below the free equilibrium.
pub fn in_well_separation(params: &ModelParams) -> f64 {
    let balance = |s: f64| {
        -params.k * s
            + params.n as f64 * params.alpha / s.powi(params.n as i32 + 1)
            + params.external_force(0.5 * s)
    };
    let mut hi = params.equilibrium_separation();
    let mut lo = hi;
    while balance(lo) <= 0.0 {
        lo *= 0.5;
    }
    if balance(hi) >= 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if balance(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    /// Initial center-of-mass displacement from the well center.
    pub cm_amplitude: f64,
    /// Added to the in-well rest separation at launch.
    pub separation_kick: f64,
    pub duration: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            cm_amplitude: 0.05,
            separation_kick: 0.01,
            duration: 200.0,
        }
    }
}

/// Measured in-well frequencies beside the closed forms for both readings
/// of `r_eq`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearComparison {
    pub in_well_separation: f64,
    pub initial: State,
    pub measured_omega_r: f64,
    pub measured_omega_rel: f64,
    /// Mean of `r - r0/2` over the run; the in-well shrinkage of the half
    /// separation.
    pub mean_half_separation_shift: f64,
    pub energy_drift: f64,
    /// Closed forms at `r_eq = r0` and `r_eq = r0 / 2`.
    pub predictions: [LinearizedParams; 2],
}

/// Start the pair at rest near the well center, slightly displaced in both
/// modes, integrate, and extract the frequencies of `R(t)` and `r(t)`.
///
/// Fails with [`Error::Escaped`] if the pair leaves the well, and with
/// [`Error::InsufficientOscillations`] if a coordinate does not oscillate
/// (with no well nothing binds the center of mass).
pub fn linear_compare(
    params: &ModelParams,
    cfg: &IntegratorConfig,
    opts: &CompareOptions,
) -> Result<LinearComparison> {
    params.validate()?;
    let s_eq = in_well_separation(params);
    let init = CmState {
        t: 0.0,
        r_cm: opts.cm_amplitude,
        r: 0.5 * (s_eq + opts.separation_kick),
        v_cm: 0.0,
        w: 0.0,
    }
    .to_state();
    let escape = 3.0 / params.beta.sqrt() + opts.cm_amplitude.abs();
    let stop = StopCondition::Composite(vec![
        StopCondition::ExitRadius(escape),
        StopCondition::TimeLimit(opts.duration),
    ]);
    let mut cm_series = Vec::new();
    let mut rel_series = Vec::new();
    let (fin, reason, diag) = integrate_observed(&init, params, cfg, &stop, |s, _| {
        let c = s.to_cm();
        cm_series.push(c.r_cm);
        rel_series.push(c.r);
    })?;
    if reason == StopReason::Exited {
        return Err(Error::Escaped { t: fin.t });
    }
    let r0 = params.equilibrium_separation();
    let mean_r = rel_series.iter().sum::<f64>() / rel_series.len() as f64;
    Ok(LinearComparison {
        in_well_separation: s_eq,
        initial: init,
        measured_omega_r: dominant_frequency(&cm_series, cfg.dt)?,
        measured_omega_rel: dominant_frequency(&rel_series, cfg.dt)?,
        mean_half_separation_shift: mean_r - 0.5 * r0,
        energy_drift: diag.peak_energy_drift,
        predictions: [
            LinearizedParams::new(params, r0)?,
            LinearizedParams::new(params, 0.5 * r0)?,
        ],
    })
}
