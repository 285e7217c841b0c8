//! Weighted planar cone measures.
//!
//! A [`ConeMeasure2D`] is the measure `cos(t + θ)^m W'(r) dr dt` restricted
//! to the cone over an arc `[lo, hi]`, where `W'` is either the Gaussian
//! radial density `r^{n-1} e^{-r²/2}` or a power `r^p`. Evaluated on a body
//! `K` it reduces to the single angular integral
//! `∫ cos(t + θ)^m W(ρ_K(t)) dt` with `W` the radial antiderivative.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex2d::{Cone2D, ConvexBody2D};
use crate::error::{domain, Error, Result};
use crate::numerics::{
    cos_power_between, gaussian_radial_unchecked, power_radial_unchecked, try_integrate_with_breaks,
    QuadratureSpec,
};

/// Slack on the sign condition of the angular density.
pub const PHASE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RadialWeight {
    /// `r^{n-1} e^{-r²/2}`.
    Gaussian { n: u32 },
    /// `r^p`.
    Power { p: f64 },
}

impl RadialWeight {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RadialWeight::Gaussian { n } if n < 2 => {
                Err(domain(format!("gaussian weight needs ambient dimension >= 2, got {n}")))
            }
            RadialWeight::Power { p } if !(p > -1.0) || !p.is_finite() => {
                Err(domain(format!("power weight exponent must exceed -1, got {p}")))
            }
            _ => Ok(()),
        }
    }

    /// Pointwise density in `r`.
    pub fn density(&self, r: f64) -> f64 {
        match *self {
            RadialWeight::Gaussian { n } => r.powi(n as i32 - 1) * (-0.5 * r * r).exp(),
            RadialWeight::Power { p } => r.powf(p),
        }
    }

    /// `∫_0^rho density`.
    pub fn cumulative(&self, rho: f64) -> Result<f64> {
        match *self {
            RadialWeight::Gaussian { n } => Ok(gaussian_radial_unchecked(n, rho)),
            RadialWeight::Power { p } => {
                if rho.is_infinite() {
                    Err(Error::NonIntegrable(format!("r^{p} over an unbounded ray")))
                } else {
                    Ok(power_radial_unchecked(p, rho))
                }
            }
        }
    }

    /// Radius past which the Gaussian density stays below `1e-16`.
    fn truncation_radius(&self) -> f64 {
        match *self {
            RadialWeight::Gaussian { n } => {
                let mut r = (f64::from(n) - 1.0).sqrt().max(1.0);
                while self.density(r) >= 1e-16 {
                    r += 0.25;
                }
                r
            }
            RadialWeight::Power { .. } => f64::INFINITY,
        }
    }
}

/// True when `cos(t + phase) >= 0` on `[lo, hi]` (always, for `m = 0`).
pub fn phase_admissible(cone: &Cone2D, phase: f64, m: u32) -> bool {
    if m == 0 {
        return true;
    }
    let width = cone.width();
    if width > PI + PHASE_TOL {
        return false;
    }
    // Shift the start into [-pi/2, 3pi/2) and require the arc to end by pi/2.
    let mut s = (cone.lo() + phase + FRAC_PI_2).rem_euclid(TAU) - FRAC_PI_2;
    if s > 1.5 * PI - PHASE_TOL {
        s -= TAU;
    }
    s >= -FRAC_PI_2 - PHASE_TOL && s + width <= FRAC_PI_2 + PHASE_TOL
}

/// Sub-intervals of `[0, pi]` whose phases keep the density nonnegative on the cone.
pub fn admissible_phases(cone: &Cone2D, m: u32) -> Vec<(f64, f64)> {
    if m == 0 {
        return vec![(0.0, PI)];
    }
    if cone.width() > PI + PHASE_TOL {
        return Vec::new();
    }
    let (a, b) = (-FRAC_PI_2 - cone.lo(), FRAC_PI_2 - cone.hi());
    let mut out = Vec::new();
    for j in -2..=2 {
        let shift = TAU * f64::from(j);
        let lo = (a + shift).max(0.0);
        let hi = (b + shift).min(PI);
        if hi >= lo - PHASE_TOL {
            out.push((lo, hi.max(lo)));
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeMeasure2D {
    cone: Cone2D,
    phase: f64,
    exponent: u32,
    weight: RadialWeight,
}

impl ConeMeasure2D {
    pub fn new(cone: Cone2D, phase: f64, exponent: u32, weight: RadialWeight) -> Result<Self> {
        weight.validate()?;
        if !(-PHASE_TOL..=PI + PHASE_TOL).contains(&phase) {
            return Err(domain(format!("phase must lie in [0, pi], got {phase}")));
        }
        if !phase_admissible(&cone, phase, exponent) {
            return Err(Error::PhaseDomain {
                phase,
                exponent,
                lo: cone.lo(),
                hi: cone.hi(),
            });
        }
        Ok(Self {
            cone,
            phase,
            exponent,
            weight,
        })
    }

    pub fn cone(&self) -> &Cone2D {
        &self.cone
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn weight(&self) -> &RadialWeight {
        &self.weight
    }

    /// Same measure over another arc.
    pub fn with_cone(&self, cone: Cone2D) -> Result<Self> {
        Self::new(cone, self.phase, self.exponent, self.weight)
    }

    pub fn angular_density(&self, t: f64) -> f64 {
        (t + self.phase).cos().max(0.0).powi(self.exponent as i32)
    }

    /// `∫_lo^hi cos(t + θ)^m dt`.
    pub fn angular_mass(&self) -> f64 {
        cos_power_between(
            self.exponent,
            self.cone.lo() + self.phase,
            self.cone.hi() + self.phase,
        )
        .max(0.0)
    }
}

/// Measure of `K ∩ C` under `cm`.
pub fn cone_body_measure(cm: &ConeMeasure2D, body: &ConvexBody2D, spec: &QuadratureSpec) -> Result<f64> {
    let (lo, hi) = (cm.cone.lo(), cm.cone.hi());
    if hi <= lo {
        return Ok(0.0);
    }
    if matches!(cm.weight, RadialWeight::Power { .. }) && !body.is_bounded_on(lo, hi) {
        return Err(Error::NonIntegrable(format!(
            "power weight on a {} unbounded over [{lo}, {hi}]",
            body.kind()
        )));
    }
    let breaks = body.breakpoints_in(lo, hi);
    let value = try_integrate_with_breaks(
        |t| Ok(cm.angular_density(t) * cm.weight.cumulative(body.radial_function(t))?),
        lo,
        hi,
        &breaks,
        spec,
    )?;
    Ok(value.max(0.0))
}

/// Midpoint Riemann sum over a `grid_n × grid_n` polar grid of the cone.
///
/// Each angular column is cut at `ρ_K(t)`; the cell containing the boundary
/// contributes its partial length, which keeps the scheme second order.
/// Gaussian weights are truncated where the density falls below `1e-16`.
pub fn brute_force_cone_measure(cm: &ConeMeasure2D, body: &ConvexBody2D, grid_n: usize) -> Result<f64> {
    if grid_n == 0 {
        return Err(domain("grid_n must be positive"));
    }
    let (lo, hi) = (cm.cone.lo(), cm.cone.hi());
    if hi <= lo {
        return Ok(0.0);
    }
    let dt = (hi - lo) / grid_n as f64;
    let radii: Vec<f64> = (0..grid_n)
        .map(|j| body.radial_function(lo + dt * (j as f64 + 0.5)))
        .collect();
    let r_max = radii
        .iter()
        .copied()
        .fold(0.0, f64::max)
        .min(cm.weight.truncation_radius());
    if r_max.is_infinite() {
        return Err(Error::NonIntegrable(format!(
            "power weight on a {} unbounded over [{lo}, {hi}]",
            body.kind()
        )));
    }
    if r_max == 0.0 {
        return Ok(0.0);
    }
    let dr = r_max / grid_n as f64;
    let columns: Vec<f64> = radii
        .par_iter()
        .enumerate()
        .map(|(j, &rho)| {
            let t = lo + dt * (j as f64 + 0.5);
            let angular = cm.angular_density(t);
            if angular == 0.0 {
                return 0.0;
            }
            let rho = rho.min(r_max);
            let mut sum = 0.0;
            for i in 0..grid_n {
                let r0 = dr * i as f64;
                if r0 >= rho {
                    break;
                }
                let r1 = (r0 + dr).min(rho);
                sum += cm.weight.density(0.5 * (r0 + r1)) * (r1 - r0);
            }
            angular * sum * dt
        })
        .collect();
    Ok(columns.iter().sum())
}
