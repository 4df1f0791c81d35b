//! Fixed-step time integration.
//!
//! Velocity Verlet is the production scheme; classical RK4 (run at a smaller
//! step) serves as an independent oracle. Step counts, not accumulated
//! sums, determine the time coordinate, so identical inputs always give
//! bit-identical trajectories.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{with_time, Dynamics, State, DEFAULT_COINCIDENCE_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    VelocityVerlet,
    Rk4,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::VelocityVerlet => "verlet",
            Scheme::Rk4 => "rk4",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "verlet" | "velocityverlet" | "velocity-verlet" => Ok(Scheme::VelocityVerlet),
            "rk4" => Ok(Scheme::Rk4),
            _ => Err(Error::InvalidParams(format!(
                "unknown scheme {s:?} (expected verlet or rk4)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub max_steps: u64,
    pub coincidence_floor: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            scheme: Scheme::VelocityVerlet,
            dt: 1e-4,
            max_steps: 100_000_000,
            coincidence_floor: DEFAULT_COINCIDENCE_FLOOR,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParams(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParams("max_steps must be positive".into()));
        }
        if !(self.coincidence_floor >= 0.0) {
            return Err(Error::InvalidParams(
                "coincidence_floor must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Declarative stop predicate, checked on the initial state and after
/// every step. `max_steps` in the config always bounds the run as well.
#[derive(Debug, Clone, PartialEq)]
pub enum StopCondition {
    /// Stop once the elapsed time reaches `t_max`.
    TimeLimit(f64),
    /// Stop once `|R| >= radius` with the center of mass moving outward.
    ExitRadius(f64),
    /// Stop when any member fires; the first listed wins ties.
    Composite(Vec<StopCondition>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    TimeLimit,
    Exited,
}

impl StopCondition {
    /// The reason to stop at `s` after `elapsed` time, if any.
    pub fn fires(&self, s: &State, elapsed: f64) -> Option<StopReason> {
        match self {
            StopCondition::TimeLimit(t_max) => (elapsed >= *t_max).then_some(StopReason::TimeLimit),
            StopCondition::ExitRadius(radius) => {
                let cm = s.to_cm();
                (cm.r_cm.abs() >= *radius && cm.r_cm * cm.v_cm > 0.0).then_some(StopReason::Exited)
            }
            StopCondition::Composite(parts) => parts.iter().find_map(|c| c.fires(s, elapsed)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub steps: u64,
    pub initial_energy: f64,
    /// Peak of `|E(t) - E(0)| / |E(0)|` over the run.
    pub peak_energy_drift: f64,
}

/// Advance one step of `cfg.dt`.
pub fn step<D: Dynamics + ?Sized>(s: &State, dyn_: &D, cfg: &IntegratorConfig) -> Result<State> {
    match cfg.scheme {
        Scheme::VelocityVerlet => {
            let acc = dyn_
                .accelerations_at(s.x1, s.x2, cfg.coincidence_floor)
                .map_err(|e| with_time(e, s.t))?;
            verlet_step(s, acc, dyn_, cfg).map(|(next, _)| next)
        }
        Scheme::Rk4 => rk4_step(s, dyn_, cfg),
    }
}

/// Kick-drift-kick, reusing the accelerations at the current positions.
/// Returns the new state and the accelerations at its positions.
#[inline]
fn verlet_step<D: Dynamics + ?Sized>(
    s: &State,
    acc: (f64, f64),
    dyn_: &D,
    cfg: &IntegratorConfig,
) -> Result<(State, (f64, f64))> {
    let h = cfg.dt;
    let half = 0.5 * h;
    let v1h = s.v1 + half * acc.0;
    let v2h = s.v2 + half * acc.1;
    let x1 = s.x1 + h * v1h;
    let x2 = s.x2 + h * v2h;
    let t = s.t + h;
    let next_acc = dyn_
        .accelerations_at(x1, x2, cfg.coincidence_floor)
        .map_err(|e| with_time(e, t))?;
    let next = State {
        t,
        x1,
        v1: v1h + half * next_acc.0,
        x2,
        v2: v2h + half * next_acc.1,
    };
    Ok((next, next_acc))
}

fn rk4_step<D: Dynamics + ?Sized>(s: &State, dyn_: &D, cfg: &IntegratorConfig) -> Result<State> {
    let h = cfg.dt;
    let floor = cfg.coincidence_floor;
    // y = (x1, x2, v1, v2); y' = (v1, v2, a1, a2)
    let deriv = |x1: f64, x2: f64, v1: f64, v2: f64, t: f64| -> Result<[f64; 4]> {
        let (a1, a2) = dyn_
            .accelerations_at(x1, x2, floor)
            .map_err(|e| with_time(e, t))?;
        Ok([v1, v2, a1, a2])
    };
    let k1 = deriv(s.x1, s.x2, s.v1, s.v2, s.t)?;
    let k2 = deriv(
        s.x1 + 0.5 * h * k1[0],
        s.x2 + 0.5 * h * k1[1],
        s.v1 + 0.5 * h * k1[2],
        s.v2 + 0.5 * h * k1[3],
        s.t + 0.5 * h,
    )?;
    let k3 = deriv(
        s.x1 + 0.5 * h * k2[0],
        s.x2 + 0.5 * h * k2[1],
        s.v1 + 0.5 * h * k2[2],
        s.v2 + 0.5 * h * k2[3],
        s.t + 0.5 * h,
    )?;
    let k4 = deriv(
        s.x1 + h * k3[0],
        s.x2 + h * k3[1],
        s.v1 + h * k3[2],
        s.v2 + h * k3[3],
        s.t + h,
    )?;
    let comb = |i: usize| h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    Ok(State {
        t: s.t + h,
        x1: s.x1 + comb(0),
        x2: s.x2 + comb(1),
        v1: s.v1 + comb(2),
        v2: s.v2 + comb(3),
    })
}

/// Integrate until `stop` fires. See [`integrate_observed`].
pub fn integrate<D: Dynamics + ?Sized>(
    s: &State,
    dyn_: &D,
    cfg: &IntegratorConfig,
    stop: &StopCondition,
) -> Result<(State, StopReason, Diagnostics)> {
    integrate_observed(s, dyn_, cfg, stop, |_, _| {})
}

/// Integrate until `stop` fires, calling `observe(state, step_index)` on
/// the initial state and after every step.
///
/// The time of step `i` is `t0 + i * dt`. Fails with
/// [`Error::StepBudgetExhausted`] if `cfg.max_steps` steps pass without a
/// stop condition firing.
pub fn integrate_observed<D, F>(
    s: &State,
    dyn_: &D,
    cfg: &IntegratorConfig,
    stop: &StopCondition,
    mut observe: F,
) -> Result<(State, StopReason, Diagnostics)>
where
    D: Dynamics + ?Sized,
    F: FnMut(&State, u64),
{
    cfg.validate()?;
    let t0 = s.t;
    let energy = |st: &State| -> Result<f64> {
        Ok(st.kinetic_energy()
            + dyn_
                .potential_energy(st.x1, st.x2, cfg.coincidence_floor)
                .map_err(|e| with_time(e, st.t))?)
    };
    let e0 = energy(s)?;
    let scale = if e0 != 0.0 { e0.abs() } else { 1.0 };
    let mut diag = Diagnostics {
        steps: 0,
        initial_energy: e0,
        peak_energy_drift: 0.0,
    };

    let mut cur = *s;
    let mut acc = match cfg.scheme {
        Scheme::VelocityVerlet => Some(
            dyn_.accelerations_at(cur.x1, cur.x2, cfg.coincidence_floor)
                .map_err(|e| with_time(e, cur.t))?,
        ),
        Scheme::Rk4 => None,
    };
    observe(&cur, 0);
    loop {
        if let Some(reason) = stop.fires(&cur, cur.t - t0) {
            return Ok((cur, reason, diag));
        }
        if diag.steps >= cfg.max_steps {
            return Err(Error::StepBudgetExhausted {
                max_steps: cfg.max_steps,
                t: cur.t,
            });
        }
        let mut next = match acc {
            Some(a) => {
                let (next, next_acc) = verlet_step(&cur, a, dyn_, cfg)?;
                acc = Some(next_acc);
                next
            }
            None => rk4_step(&cur, dyn_, cfg)?,
        };
        diag.steps += 1;
        next.t = t0 + diag.steps as f64 * cfg.dt;
        let drift = (energy(&next)? - e0).abs() / scale;
        if drift > diag.peak_energy_drift {
            diag.peak_energy_drift = drift;
        }
        cur = next;
        observe(&cur, diag.steps);
    }
}
