//! Divergence of two launches whose speeds differ by a tiny amount.
//!
//! Both trajectories are stepped in lockstep and their phase-space distance
//! (Euclidean over `x1, x2, v1, v2`, unit weights) is sampled at fixed
//! times. A finite-time exponent is fitted to `ln d(t)` over the growth
//! window running from the first sample above `10 * seed_delta` to the
//! first sample above `1e-2 * r0`.

use crate::error::{Error, Result};
use crate::integrator::{step, IntegratorConfig, StopCondition};
use crate::scattering::Scenario;

pub const DEFAULT_SEED_DELTA: f64 = 1e-9;
pub const DISTANCE_METRIC: &str = "euclidean(x1,x2,v1,v2)";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityOptions {
    pub seed_delta: f64,
    /// Time between recorded distance samples.
    pub sample_interval: f64,
}

impl Default for SensitivityOptions {
    fn default() -> Self {
        SensitivityOptions {
            seed_delta: DEFAULT_SEED_DELTA,
            sample_interval: 0.5,
        }
    }
}

/// Least-squares line through `ln d(t)` over the growth window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub lambda: f64,
    pub intercept: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    pub v0: f64,
    pub seed_delta: f64,
    /// `(t, d(t))` at the sampling times.
    pub samples: Vec<(f64, f64)>,
    /// First sampled time with `d > 1`.
    pub time_to_unity: Option<f64>,
    /// `max d / d(0)`; infinite when `d(0) = 0 < max d`, NaN when both vanish.
    pub growth_factor: f64,
    pub window_lower: f64,
    pub window_upper: f64,
    pub fit: Option<ExponentFit>,
    /// Why the run does not look exponentially divergent, if it does not.
    pub degenerate: Option<String>,
    /// Time at which integration stopped.
    pub t_end: f64,
}

impl DivergenceReport {
    pub fn is_degenerate(&self) -> bool {
        self.degenerate.is_some()
    }

    /// Orders of magnitude gained from the first sample to the largest.
    pub fn decades(&self) -> f64 {
        self.growth_factor.log10()
    }
}

/// Integrate launches at `v0` and `v0 + seed_delta` side by side.
///
/// Integration runs to `t_max` or until either trajectory leaves the exit
/// radius. The fit is flagged degenerate (a valid, non-chaotic report) if
/// `d` never grows 100-fold, if the growth window never closes, or if the
/// fitted exponent is not positive.
pub fn sensitivity(
    sc: &Scenario,
    cfg: &IntegratorConfig,
    opts: &SensitivityOptions,
) -> Result<DivergenceReport> {
    sc.validate()?;
    cfg.validate()?;
    if !(opts.seed_delta >= 0.0 && opts.seed_delta.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "seed_delta must be non-negative, got {}",
            opts.seed_delta
        )));
    }
    if !(opts.sample_interval > 0.0) {
        return Err(Error::InvalidParams(
            "sample_interval must be positive".into(),
        ));
    }
    let twin = Scenario {
        v0: sc.v0 + opts.seed_delta,
        ..*sc
    };
    twin.validate()?;

    let stride = ((opts.sample_interval / cfg.dt).round() as u64).max(1);
    let exit = StopCondition::ExitRadius(sc.exit_radius);
    let total_steps = (sc.t_max / cfg.dt).ceil() as u64;
    if total_steps > cfg.max_steps {
        return Err(Error::StepBudgetExhausted {
            max_steps: cfg.max_steps,
            t: 0.0,
        });
    }

    let mut a = sc.initial_state();
    let mut b = twin.initial_state();
    let mut samples = vec![(0.0, a.phase_distance(&b))];
    let mut i = 0u64;
    while i < total_steps {
        a = step(&a, &sc.params, cfg)?;
        b = step(&b, &sc.params, cfg)?;
        i += 1;
        let t = i as f64 * cfg.dt;
        a.t = t;
        b.t = t;
        let escaped = exit.fires(&a, t).is_some() || exit.fires(&b, t).is_some();
        if i.is_multiple_of(stride) || escaped || i == total_steps {
            samples.push((t, a.phase_distance(&b)));
        }
        if escaped {
            break;
        }
    }
    let t_end = i as f64 * cfg.dt;

    let d0 = samples[0].1;
    let d_max = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    let growth_factor = d_max / d0;
    let window_lower = 10.0 * opts.seed_delta;
    let window_upper = 1e-2 * sc.params.equilibrium_separation();
    let time_to_unity = samples.iter().find(|s| s.1 > 1.0).map(|s| s.0);

    let start = samples.iter().position(|s| s.1 > window_lower);
    let end = samples.iter().position(|s| s.1 > window_upper);
    let fit = match (start, end) {
        (Some(s), Some(e)) if e > s => fit_log_linear(&samples[s..=e]),
        _ => None,
    };

    let degenerate = if !(growth_factor >= 100.0) {
        Some(format!("d(t) grew by {growth_factor:e}, less than 100x"))
    } else if end.is_none() {
        Some(format!(
            "d(t) never reached the window upper bound {window_upper:e}"
        ))
    } else {
        match fit {
            None => Some("growth window holds too few samples to fit".to_string()),
            Some(f) if !(f.lambda > 0.0) => {
                Some(format!("fitted exponent {} is not positive", f.lambda))
            }
            Some(_) => None,
        }
    };

    Ok(DivergenceReport {
        v0: sc.v0,
        seed_delta: opts.seed_delta,
        samples,
        time_to_unity,
        growth_factor,
        window_lower,
        window_upper,
        fit,
        degenerate,
        t_end,
    })
}

fn fit_log_linear(points: &[(f64, f64)]) -> Option<ExponentFit> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for &(t, d) in points {
        let y = d.ln();
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let denom = n * stt - st * st;
    if denom == 0.0 {
        return None;
    }
    let lambda = (n * sty - st * sy) / denom;
    Some(ExponentFit {
        lambda,
        intercept: (sy - lambda * st) / n,
        t_start: points[0].0,
        t_end: points[points.len() - 1].0,
        points: points.len(),
    })
}
