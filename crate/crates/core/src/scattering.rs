//! The scattering experiment: launch the bound pair at rest internally from
//! far outside the well, integrate through it, classify what comes out.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::integrator::{integrate_observed, IntegratorConfig, StopCondition, StopReason};
use crate::model::{ModelParams, State};

pub const DEFAULT_LAUNCH_OFFSET: f64 = -10.0;
pub const DEFAULT_EXIT_RADIUS: f64 = 10.0;
pub const DEFAULT_T_MAX: f64 = 5000.0;

/// Spacing in time of the center-of-mass samples kept for the tail average.
const CM_SAMPLE_INTERVAL: f64 = 0.05;

/// Fraction of the run, measured back from its end, used for
/// `mean_cm_speed_tail`.
const TAIL_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub params: ModelParams,
    /// Initial center-of-mass velocity.
    pub v0: f64,
    /// Initial center-of-mass position.
    pub launch_offset: f64,
    /// Initial interparticle distance.
    pub separation: f64,
    /// Runs still inside `exit_radius` at this time count as trapped.
    pub t_max: f64,
    pub exit_radius: f64,
}

impl Scenario {
    /// Reference launch for `params` at speed `v0`: from `R = -10`, at the
    /// free equilibrium separation, with a 5000 time-unit horizon.
    pub fn new(params: ModelParams, v0: f64) -> Self {
        Scenario {
            params,
            v0,
            launch_offset: DEFAULT_LAUNCH_OFFSET,
            separation: params.equilibrium_separation(),
            t_max: DEFAULT_T_MAX,
            exit_radius: DEFAULT_EXIT_RADIUS,
        }
    }

    /// The same experiment launched from the other side of the well.
    pub fn mirrored(&self) -> Self {
        Scenario {
            v0: -self.v0,
            launch_offset: -self.launch_offset,
            ..*self
        }
    }

    /// Checks the scenario is a well-posed scattering launch. The launch may
    /// be from either side as long as the pair moves toward the well.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.v0.is_finite() && self.v0 != 0.0) {
            return bad(format!("v0 must be non-zero, got {}", self.v0));
        }
        if !(self.launch_offset * self.v0 < 0.0) {
            return bad("the pair must be launched toward the well".into());
        }
        if !(self.separation.is_finite() && self.separation > 0.0) {
            return bad(format!(
                "separation must be positive, got {}",
                self.separation
            ));
        }
        if !(self.t_max.is_finite() && self.t_max >= 0.0) {
            return bad(format!("t_max must be non-negative, got {}", self.t_max));
        }
        // a radius beyond the launch point is fine: exit also needs R·V > 0
        if !(self.exit_radius.is_finite() && self.exit_radius > 0.0) {
            return bad(format!(
                "exit_radius must be positive, got {}",
                self.exit_radius
            ));
        }
        Ok(())
    }

    /// Pair centered on `launch_offset`, moving rigidly at `v0`.
    pub fn initial_state(&self) -> State {
        let half = 0.5 * self.separation;
        State {
            t: 0.0,
            x1: self.launch_offset - half,
            v1: self.v0,
            x2: self.launch_offset + half,
            v2: self.v0,
        }
    }

    fn stop_condition(&self) -> StopCondition {
        StopCondition::Composite(vec![
            StopCondition::ExitRadius(self.exit_radius),
            StopCondition::TimeLimit(self.t_max),
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Transmitted,
    Reflected,
    Trapped,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Transmitted => "Transmitted",
            Outcome::Reflected => "Reflected",
            Outcome::Trapped => "Trapped",
        })
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Transmitted" => Ok(Outcome::Transmitted),
            "Reflected" => Ok(Outcome::Reflected),
            "Trapped" => Ok(Outcome::Trapped),
            _ => Err(Error::InvalidParams(format!("unknown outcome {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeRecord {
    pub outcome: Outcome,
    /// Center-of-mass velocity at the exit crossing; zero for trapped runs.
    pub v_final: f64,
    pub t_end: f64,
    /// Peak relative energy drift.
    pub energy_drift: f64,
    /// Time-averaged center-of-mass velocity near the end of the run.
    pub mean_cm_speed_tail: f64,
    pub steps: u64,
    /// Center-of-mass velocity at `t_end`, whatever the outcome.
    pub v_cm_end: f64,
}

/// Run one scattering event.
///
/// Escape is declared once `|R| >= exit_radius` with the center of mass
/// moving outward; whether its velocity still points along the launch
/// direction then separates transmission from reflection. A run still inside at `t_max` is trapped.
pub fn run_scattering(sc: &Scenario, cfg: &IntegratorConfig) -> Result<OutcomeRecord> {
    run_scattering_observed(sc, cfg, |_, _| {})
}

/// [`run_scattering`] with a per-step observer (see
/// [`integrate_observed`]).
pub fn run_scattering_observed<F>(
    sc: &Scenario,
    cfg: &IntegratorConfig,
    mut observe: F,
) -> Result<OutcomeRecord>
where
    F: FnMut(&State, u64),
{
    sc.validate()?;
    cfg.validate()?;
    let stride = ((CM_SAMPLE_INTERVAL / cfg.dt).round() as u64).max(1);
    let mut samples: Vec<CmSample> = Vec::new();
    let (fin, reason, diag) = integrate_observed(
        &sc.initial_state(),
        &sc.params,
        cfg,
        &sc.stop_condition(),
        |s, i| {
            if i % stride == 0 {
                samples.push(CmSample::of(s));
            }
            observe(s, i);
        },
    )?;
    if samples.last().map(|c| c.t) != Some(fin.t) {
        samples.push(CmSample::of(&fin));
    }

    let cm = fin.to_cm();
    let (outcome, v_final) = match reason {
        // transmission is judged against the launch direction
        StopReason::Exited if cm.v_cm * sc.v0 > 0.0 => (Outcome::Transmitted, cm.v_cm),
        StopReason::Exited => (Outcome::Reflected, cm.v_cm),
        StopReason::TimeLimit => (Outcome::Trapped, 0.0),
    };
    Ok(OutcomeRecord {
        outcome,
        v_final,
        t_end: fin.t,
        energy_drift: diag.peak_energy_drift,
        mean_cm_speed_tail: tail_mean_velocity(&samples, TAIL_FRACTION),
        steps: diag.steps,
        v_cm_end: cm.v_cm,
    })
}

#[derive(Debug, Clone, Copy)]
struct CmSample {
    t: f64,
    r: f64,
    v: f64,
}

impl CmSample {
    fn of(s: &State) -> Self {
        let c = s.to_cm();
        CmSample {
            t: s.t,
            r: c.r_cm,
            v: c.v_cm,
        }
    }
}

/// Mean center-of-mass velocity over the last `fraction` of the run.
///
/// When the center of mass crosses the well center upward at least twice in
/// that window, the average is taken between the first and last such
/// crossings, i.e. over whole oscillations; otherwise over the full window.
/// The average is the trapezoidal integral of the sampled velocity divided
/// by the window length.
fn tail_mean_velocity(samples: &[CmSample], fraction: f64) -> f64 {
    let Some(last) = samples.last() else {
        return 0.0;
    };
    let first_t = samples[0].t;
    let start_t = last.t - fraction * (last.t - first_t);
    let begin = samples.partition_point(|s| s.t < start_t);
    let tail = &samples[begin..];
    if tail.len() < 2 {
        return last.v;
    }

    // upward crossings of R = 0, linearly interpolated in time
    let crossings: Vec<(usize, f64)> = tail
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].r < 0.0 && w[1].r >= 0.0)
        .map(|(i, w)| {
            (
                i,
                w[0].t + (w[1].t - w[0].t) * (-w[0].r) / (w[1].r - w[0].r),
            )
        })
        .collect();

    if crossings.len() >= 2 {
        let (ia, ta) = crossings[0];
        let (ib, tb) = crossings[crossings.len() - 1];
        integrate_velocity(tail, ia, ta, ib, tb) / (tb - ta)
    } else {
        let mut integral = 0.0;
        for w in tail.windows(2) {
            integral += 0.5 * (w[0].v + w[1].v) * (w[1].t - w[0].t);
        }
        integral / (last.t - tail[0].t)
    }
}

/// Trapezoidal integral of `v` from time `ta` (inside segment `ia`) to time
/// `tb` (inside segment `ib`), interpolating at the partial ends.
fn integrate_velocity(s: &[CmSample], ia: usize, ta: f64, ib: usize, tb: f64) -> f64 {
    let interp = |i: usize, t: f64| {
        let (a, b) = (s[i], s[i + 1]);
        a.v + (b.v - a.v) * (t - a.t) / (b.t - a.t)
    };
    if ia == ib {
        return 0.5 * (interp(ia, ta) + interp(ib, tb)) * (tb - ta);
    }
    let mut total = 0.5 * (interp(ia, ta) + s[ia + 1].v) * (s[ia + 1].t - ta);
    for w in s[ia + 1..=ib].windows(2) {
        total += 0.5 * (w[0].v + w[1].v) * (w[1].t - w[0].t);
    }
    total += 0.5 * (s[ib].v + interp(ib, tb)) * (tb - s[ib].t);
    total
}
