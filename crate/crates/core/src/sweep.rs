//! Velocity-grid sweeps and recursive refinement of outcome boundaries.
//!
//! Grid points are independent and run on a rayon pool; results are always
//! returned in grid order, so the worker count never changes the output.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrator::IntegratorConfig;
use crate::scattering::{run_scattering, Outcome, OutcomeRecord, Scenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    /// Every scenario field except `v0` is taken from here.
    pub template: Scenario,
    pub v_min: f64,
    pub v_max: f64,
    pub dv: f64,
    pub cfg: IntegratorConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.v_min.is_finite() && self.v_max.is_finite()) || !(self.v_min < self.v_max) {
            return bad(format!(
                "need v_min < v_max, got [{}, {}]",
                self.v_min, self.v_max
            ));
        }
        if !(self.dv.is_finite() && self.dv > 0.0) {
            return bad(format!("dv must be positive, got {}", self.dv));
        }
        self.cfg.validate()?;
        self.scenario(self.v_min).validate()?;
        self.scenario(self.v_max).validate()
    }

    /// `floor((v_max - v_min) / dv) + 1`, tolerant of the quotient landing a
    /// hair below an integer.
    pub fn len(&self) -> usize {
        ((self.v_max - self.v_min) / self.dv + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Speed at grid index `i`: `v_min + i * dv`, never accumulated.
    pub fn grid_value(&self, i: u64) -> f64 {
        self.refined_value(i, 1.0)
    }

    /// Speed at index `n` of a grid refined by `scale`:
    /// `v_min + (n / scale) * dv`. When `n` is a multiple of `scale` this is
    /// bit-identical to the coarse value.
    fn refined_value(&self, n: u64, scale: f64) -> f64 {
        self.v_min + (n as f64 / scale) * self.dv
    }

    pub fn scenario(&self, v0: f64) -> Scenario {
        Scenario {
            v0,
            ..self.template
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepOutcome {
    Transmitted,
    Reflected,
    Trapped,
    Error,
}

impl From<Outcome> for SweepOutcome {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Transmitted => SweepOutcome::Transmitted,
            Outcome::Reflected => SweepOutcome::Reflected,
            Outcome::Trapped => SweepOutcome::Trapped,
        }
    }
}

impl fmt::Display for SweepOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepOutcome::Transmitted => "Transmitted",
            SweepOutcome::Reflected => "Reflected",
            SweepOutcome::Trapped => "Trapped",
            SweepOutcome::Error => "Error",
        })
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub v0: f64,
    pub outcome: SweepOutcome,
    pub v_final: f64,
    pub t_end: f64,
    pub energy_drift: f64,
    pub steps: u64,
    pub mean_cm_speed_tail: f64,
    /// Failure reason when `outcome` is `Error`.
    pub error: Option<String>,
}

impl SweepRecord {
    fn from_result(v0: f64, res: Result<OutcomeRecord>) -> Self {
        match res {
            Ok(r) => SweepRecord {
                v0,
                outcome: r.outcome.into(),
                v_final: r.v_final,
                t_end: r.t_end,
                energy_drift: r.energy_drift,
                steps: r.steps,
                mean_cm_speed_tail: r.mean_cm_speed_tail,
                error: None,
            },
            Err(e) => SweepRecord {
                v0,
                outcome: SweepOutcome::Error,
                v_final: f64::NAN,
                t_end: f64::NAN,
                energy_drift: f64::NAN,
                steps: 0,
                mean_cm_speed_tail: f64::NAN,
                error: Some(e.to_string()),
            },
        }
    }

    /// Same-bits comparison, treating NaN fields as equal.
    pub fn bitwise_eq(&self, other: &SweepRecord) -> bool {
        let same = |a: f64, b: f64| a.to_bits() == b.to_bits();
        same(self.v0, other.v0)
            && self.outcome == other.outcome
            && same(self.v_final, other.v_final)
            && same(self.t_end, other.t_end)
            && same(self.energy_drift, other.energy_drift)
            && self.steps == other.steps
            && same(self.mean_cm_speed_tail, other.mean_cm_speed_tail)
            && self.error == other.error
    }
}

/// Run `f` on a pool of `workers` threads; 0 means one per core.
fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParams(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn run_points(spec: &SweepSpec, speeds: &[f64]) -> Vec<SweepRecord> {
    speeds
        .par_iter()
        .map(|&v0| SweepRecord::from_result(v0, run_scattering(&spec.scenario(v0), &spec.cfg)))
        .collect()
}

/// Run every grid point of `spec`. Per-point failures become `Error` rows.
pub fn sweep(spec: &SweepSpec, workers: usize) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let speeds: Vec<f64> = (0..spec.len() as u64).map(|i| spec.grid_value(i)).collect();
    with_pool(workers, || run_points(spec, &speeds))
}

/// Records of one refinement depth (0 is the base sweep).
#[derive(Debug, Clone, PartialEq)]
pub struct ZoomLevel {
    pub depth: u32,
    pub dv: f64,
    /// Number of boundary intervals re-swept to produce this level.
    pub intervals: usize,
    pub records: Vec<SweepRecord>,
}

/// Base sweep plus `depth` levels of refinement.
///
/// At each level, every pair of neighboring grid points whose outcome
/// classes differ is re-swept at `dv / refinement_factor`, endpoints
/// included. Intervals sharing an endpoint share the point. Refinement stops
/// early when a level has no mixed pairs.
pub fn zoom(
    spec: &SweepSpec,
    refinement_factor: u32,
    depth: u32,
    workers: usize,
) -> Result<Vec<ZoomLevel>> {
    if refinement_factor < 2 {
        return Err(Error::InvalidParams(
            "refinement factor must be at least 2".into(),
        ));
    }
    if depth < 1 {
        return Err(Error::InvalidParams("zoom depth must be at least 1".into()));
    }
    spec.validate()?;
    let factor = refinement_factor as u64;

    with_pool(workers, || {
        let base_idx: Vec<u64> = (0..spec.len() as u64).collect();
        let speeds: Vec<f64> = base_idx.iter().map(|&i| spec.grid_value(i)).collect();
        let mut levels = vec![ZoomLevel {
            depth: 0,
            dv: spec.dv,
            intervals: 0,
            records: run_points(spec, &speeds),
        }];
        let mut indices = base_idx;
        let mut scale = 1u64;

        for level in 1..=depth {
            let prev = levels.last().unwrap();
            let mixed: Vec<u64> = indices
                .windows(2)
                .zip(prev.records.windows(2))
                .filter(|(i, r)| i[1] == i[0] + 1 && r[0].outcome != r[1].outcome)
                .map(|(i, _)| i[0])
                .collect();
            if mixed.is_empty() {
                break;
            }
            scale = scale.checked_mul(factor).ok_or_else(|| {
                Error::InvalidParams("zoom depth overflows the grid index".into())
            })?;
            let mut next: Vec<u64> = mixed
                .iter()
                .flat_map(|&i| (i * factor)..=(i + 1) * factor)
                .collect();
            next.dedup();
            let speeds: Vec<f64> = next
                .iter()
                .map(|&n| spec.refined_value(n, scale as f64))
                .collect();
            levels.push(ZoomLevel {
                depth: level,
                dv: spec.dv / scale as f64,
                intervals: mixed.len(),
                records: run_points(spec, &speeds),
            });
            indices = next;
        }
        Ok(levels)
    })?
}

/// Number of neighboring pairs whose outcome classes differ.
pub fn count_alternations(records: &[SweepRecord]) -> usize {
    records
        .windows(2)
        .filter(|w| w[0].outcome != w[1].outcome)
        .count()
}
