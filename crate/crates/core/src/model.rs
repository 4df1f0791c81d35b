//! Physical model: two unit masses bound by a spring plus short-range
//! repulsion, each feeling an external Gaussian well.
//!
//! Sign convention: the well enters the Lagrangian as `+V(x)` with
//! `V(x) = A exp(-beta x^2)`, so the potential energy of a particle at `x`
//! is `-A exp(-beta x^2)`. For `A > 0` the well is attractive.
//!
//! Both masses are fixed at 1.

use crate::error::{Error, Result};

/// Floor on `|x1 - x2|` below which the repulsion is treated as singular.
pub const DEFAULT_COINCIDENCE_FLOOR: f64 = 1e-12;

/// Physical constants of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Spring constant.
    pub k: f64,
    /// Repulsion strength.
    pub alpha: f64,
    /// Repulsion exponent.
    pub n: u32,
    /// Well amplitude; positive is attractive.
    pub a: f64,
    /// Inverse squared well width.
    pub beta: f64,
}

impl Default for ModelParams {
    /// The reference parameter set `k=1, alpha=1, n=2, A=2, beta=1`.
    fn default() -> Self {
        ModelParams {
            k: 1.0,
            alpha: 1.0,
            n: 2,
            a: 2.0,
            beta: 1.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("k", self.k)?;
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        if self.n < 1 {
            return Err(Error::InvalidParams("n must be >= 1".into()));
        }
        if !self.a.is_finite() || self.a < 0.0 {
            return Err(Error::InvalidParams(format!(
                "A must be finite and non-negative, got {}",
                self.a
            )));
        }
        Ok(())
    }

    /// Interparticle distance where spring and repulsion balance with the
    /// well switched off: `r0^(n+2) = n alpha / k`.
    pub fn equilibrium_separation(&self) -> f64 {
        (self.n as f64 * self.alpha / self.k).powf(1.0 / (self.n as f64 + 2.0))
    }

    /// Potential energy of one particle in the well.
    pub fn external_potential(&self, x: f64) -> f64 {
        -self.a * (-self.beta * x * x).exp()
    }

    /// Force of the well on one particle, `-d/dx` of [`external_potential`].
    ///
    /// [`external_potential`]: ModelParams::external_potential
    pub fn external_force(&self, x: f64) -> f64 {
        -2.0 * self.a * self.beta * x * (-self.beta * x * x).exp()
    }

    /// Spring plus repulsion energy at separation `dist = |x1 - x2|`.
    pub fn internal_potential(&self, dist: f64) -> f64 {
        0.5 * self.k * dist * dist + self.alpha / dist.powi(self.n as i32)
    }

    /// Acceleration of particle `i` due to partner `j` and the well.
    #[inline]
    fn particle_accel(&self, xi: f64, xj: f64, dist: f64) -> f64 {
        let d = xi - xj;
        -self.k * d
            + self.n as f64 * self.alpha * d / dist.powi(self.n as i32 + 2)
            + self.external_force(xi)
    }

    /// Accelerations `(a1, a2)` at positions `(x1, x2)`, failing if the
    /// particles are closer than `floor`.
    pub fn accelerations_at(&self, x1: f64, x2: f64, floor: f64) -> Result<(f64, f64)> {
        let dist = checked_distance(x1, x2, floor, f64::NAN)?;
        Ok((
            self.particle_accel(x1, x2, dist),
            self.particle_accel(x2, x1, dist),
        ))
    }

    pub fn accelerations(&self, s: &State) -> Result<(f64, f64)> {
        self.accelerations_at(s.x1, s.x2, DEFAULT_COINCIDENCE_FLOOR)
            .map_err(|e| with_time(e, s.t))
    }

    /// Total potential energy of a configuration.
    pub fn potential_energy(&self, x1: f64, x2: f64, floor: f64) -> Result<f64> {
        let dist = checked_distance(x1, x2, floor, f64::NAN)?;
        Ok(self.internal_potential(dist)
            + (self.external_potential(x1) + self.external_potential(x2)))
    }

    pub fn total_energy(&self, s: &State) -> Result<f64> {
        let pot = self
            .potential_energy(s.x1, s.x2, DEFAULT_COINCIDENCE_FLOOR)
            .map_err(|e| with_time(e, s.t))?;
        Ok(s.kinetic_energy() + pot)
    }
}

fn checked_distance(x1: f64, x2: f64, floor: f64, t: f64) -> Result<f64> {
    let dist = (x1 - x2).abs();
    // also rejects NaN
    if dist >= floor {
        Ok(dist)
    } else {
        Err(Error::CoincidentParticles {
            separation: dist,
            floor,
            t,
        })
    }
}

pub(crate) fn with_time(e: Error, t: f64) -> Error {
    match e {
        Error::CoincidentParticles {
            separation, floor, ..
        } => Error::CoincidentParticles {
            separation,
            floor,
            t,
        },
        other => other,
    }
}

/// Forces and energy seen by the integrators.
///
/// [`ModelParams`] is the physical implementation; the trait exists so
/// reduced models (a bare spring, say) can be driven by the same schemes.
pub trait Dynamics: Sync {
    fn accelerations_at(&self, x1: f64, x2: f64, floor: f64) -> Result<(f64, f64)>;
    fn potential_energy(&self, x1: f64, x2: f64, floor: f64) -> Result<f64>;
}

impl Dynamics for ModelParams {
    fn accelerations_at(&self, x1: f64, x2: f64, floor: f64) -> Result<(f64, f64)> {
        ModelParams::accelerations_at(self, x1, x2, floor)
    }

    fn potential_energy(&self, x1: f64, x2: f64, floor: f64) -> Result<f64> {
        ModelParams::potential_energy(self, x1, x2, floor)
    }
}

/// Phase-space point of the two particles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub t: f64,
    pub x1: f64,
    pub v1: f64,
    pub x2: f64,
    pub v2: f64,
}

impl State {
    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.v1 * self.v1 + 0.5 * self.v2 * self.v2
    }

    pub fn to_cm(&self) -> CmState {
        CmState {
            t: self.t,
            r_cm: 0.5 * (self.x1 + self.x2),
            r: 0.5 * (self.x2 - self.x1),
            v_cm: 0.5 * (self.v1 + self.v2),
            w: 0.5 * (self.v2 - self.v1),
        }
    }

    /// Euclidean distance over `(x1, x2, v1, v2)`.
    pub fn phase_distance(&self, other: &State) -> f64 {
        let dx1 = self.x1 - other.x1;
        let dx2 = self.x2 - other.x2;
        let dv1 = self.v1 - other.v1;
        let dv2 = self.v2 - other.v2;
        (dx1 * dx1 + dx2 * dx2 + dv1 * dv1 + dv2 * dv2).sqrt()
    }

    /// Swap the particle labels.
    pub fn exchanged(&self) -> State {
        State {
            t: self.t,
            x1: self.x2,
            v1: self.v2,
            x2: self.x1,
            v2: self.v1,
        }
    }

    /// Spatial reflection `x -> -x, v -> -v`.
    pub fn mirrored(&self) -> State {
        State {
            t: self.t,
            x1: -self.x1,
            v1: -self.v1,
            x2: -self.x2,
            v2: -self.v2,
        }
    }
}

/// Center-of-mass and relative coordinates: `R = (x1 + x2)/2`,
/// `r = (x2 - x1)/2`, with velocity analogues `V` and `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmState {
    pub t: f64,
    pub r_cm: f64,
    pub r: f64,
    pub v_cm: f64,
    pub w: f64,
}

impl CmState {
    pub fn to_state(&self) -> State {
        State {
            t: self.t,
            x1: self.r_cm - self.r,
            v1: self.v_cm - self.w,
            x2: self.r_cm + self.r,
            v2: self.v_cm + self.w,
        }
    }
}
