//! Spherical 1-needles and a Fubini-style consistency harness.
//!
//! A 1-needle in `S^n` of needle dimension `k` is a geodesic arc `[a, b]`
//! (length at most `pi`) carrying the density `C sin(t + phi)^{n-k}`. The
//! meridian fibration of `S^n` is an explicit partition into such needles:
//! every pole-to-pole meridian carries `sin(t)^{n-1}`, so averaging needle
//! integrals over equatorial directions must reproduce the integral over the
//! whole sphere.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::numerics::{gauss_legendre, sin_power_between, try_integrate, try_integrate_with_breaks, QuadratureSpec};
use crate::report::ConsistencyReport;

/// Margin accepted by [`meridian_fubini_check`] reports.
pub const FUBINI_TOLERANCE: f64 = 1e-6;

const SUPPORT_SLACK: f64 = 1e-12;

/// The density `C sin(t + phi)^{n-k}` on the arc `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeedleDensity {
    ambient_dim: u32,
    needle_dim: u32,
    phase: f64,
    lo: f64,
    hi: f64,
    scale: f64,
    normalized: bool,
}

impl NeedleDensity {
    /// A needle of `S^{ambient_dim}` written in sin-phase form.
    pub fn new(ambient_dim: u32, needle_dim: u32, phase: f64, support: (f64, f64), scale: f64) -> Result<Self> {
        if ambient_dim < 1 {
            return Err(domain("ambient dimension must be >= 1"));
        }
        // k = n is the flat (uniform) density, exponent zero.
        if needle_dim < 1 || needle_dim > ambient_dim {
            return Err(domain(format!(
                "needle dimension must satisfy 1 <= k <= n, got k={needle_dim}, n={ambient_dim}"
            )));
        }
        if !phase.is_finite() {
            return Err(domain("phase must be finite"));
        }
        let (lo, hi) = support;
        if !lo.is_finite() || !hi.is_finite() || !(hi > lo) || hi - lo > PI + SUPPORT_SLACK {
            return Err(domain(format!("needle support [{lo}, {hi}] must have length in (0, pi]")));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(domain(format!("scale must be positive, got {scale}")));
        }
        let phase = phase.rem_euclid(TAU);
        // sin(t + phase) >= 0 on [lo, hi] iff the shifted arc sits in some [2j pi, (2j+1) pi]
        let start = lo + phase;
        let j = ((start + SUPPORT_SLACK) / TAU).floor();
        let base = j * TAU;
        if start < base - SUPPORT_SLACK || hi + phase > base + PI + SUPPORT_SLACK {
            return Err(domain(format!(
                "sin(t + {phase}) changes sign on [{lo}, {hi}]; needle densities must be nonnegative"
            )));
        }
        Ok(Self {
            ambient_dim,
            needle_dim,
            phase,
            lo,
            hi,
            scale,
            normalized: false,
        })
    }

    /// The same density written as `C cos(t + t0)^{n-k}`; stored with `phi = t0 + pi/2`.
    pub fn from_cos_phase(ambient_dim: u32, needle_dim: u32, t0: f64, support: (f64, f64), scale: f64) -> Result<Self> {
        Self::new(ambient_dim, needle_dim, t0 + FRAC_PI_2, support, scale)
    }

    pub fn ambient_dim(&self) -> u32 {
        self.ambient_dim
    }

    pub fn needle_dim(&self) -> u32 {
        self.needle_dim
    }

    /// `n - k`.
    pub fn exponent(&self) -> u32 {
        self.ambient_dim - self.needle_dim
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn density(&self, t: f64) -> f64 {
        self.scale * (t + self.phase).sin().max(0.0).powi(self.exponent() as i32)
    }

    /// `∫_a^b C sin(t + phi)^m dt`, in closed form.
    pub fn mass(&self) -> f64 {
        self.scale * sin_power_between(self.exponent(), self.lo + self.phase, self.hi + self.phase)
    }
}

/// Rescales `d` into a probability density on its support.
pub fn needle_normalize(d: &NeedleDensity) -> Result<NeedleDensity> {
    let raw = sin_power_between(d.exponent(), d.lo + d.phase, d.hi + d.phase);
    if !(raw > 1e-300) {
        return Err(Error::DegenerateNeedle);
    }
    Ok(NeedleDensity {
        scale: 1.0 / raw,
        normalized: true,
        ..*d
    })
}

/// `∫_a^b f(t) C sin(t + phi)^m dt` for a normalized needle.
pub fn needle_integrate<F>(d: &NeedleDensity, f: F, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    needle_integrate_with_breaks(d, f, &[], spec)
}

/// [`needle_integrate`] for integrands with known kinks.
pub fn needle_integrate_with_breaks<F>(d: &NeedleDensity, f: F, breaks: &[f64], spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !d.normalized {
        return Err(Error::NotNormalized);
    }
    try_integrate_with_breaks(|t| Ok(f(t) * d.density(t)), d.lo, d.hi, breaks, spec)
}

/// `∫_{S^n} f dμ` against the normalized Riemannian volume, `n ∈ {2, 3}`,
/// by iterated angular quadrature in hyperspherical coordinates with the
/// polar axis along the first coordinate.
pub fn sphere_integrate<F>(n: u32, f: F, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let inner = spec.tightened(10.0);
    match n {
        2 => {
            let total = try_integrate(
                |theta| {
                    let (s, c) = theta.sin_cos();
                    let ring = try_integrate(
                        |phi| {
                            let (sp, cp) = phi.sin_cos();
                            Ok(f(&[c, s * cp, s * sp]))
                        },
                        0.0,
                        TAU,
                        &inner,
                    )?;
                    Ok(s * ring)
                },
                0.0,
                PI,
                spec,
            )?;
            Ok(total / (4.0 * PI))
        }
        3 => {
            let total = try_integrate(
                |chi| {
                    let (sc, cc) = chi.sin_cos();
                    let shell = try_integrate(
                        |theta| {
                            let (st, ct) = theta.sin_cos();
                            let ring = try_integrate(
                                |phi| {
                                    let (sp, cp) = phi.sin_cos();
                                    Ok(f(&[cc, sc * ct, sc * st * cp, sc * st * sp]))
                                },
                                0.0,
                                TAU,
                                &inner.tightened(10.0),
                            )?;
                            Ok(st * ring)
                        },
                        0.0,
                        PI,
                        &inner,
                    )?;
                    Ok(sc * sc * shell)
                },
                0.0,
                PI,
                spec,
            )?;
            Ok(total / (2.0 * PI * PI))
        }
        _ => Err(domain(format!("sphere_integrate supports n in {{2, 3}}, got {n}"))),
    }
}

/// Equatorial directions of `S^n` (unit vectors in the first `n` coordinates)
/// and their quadrature weights, summing to one.
pub fn equatorial_grid(n: u32, directions: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    if directions < 1 {
        return Err(domain("at least one equatorial direction is required"));
    }
    match n {
        2 => {
            let w = 1.0 / directions as f64;
            Ok((0..directions)
                .map(|j| {
                    let (s, c) = (TAU * j as f64 / directions as f64).sin_cos();
                    (vec![c, s], w)
                })
                .collect())
        }
        3 => {
            let polar = (directions / 2).max(2);
            let (nodes, weights) = gauss_legendre(polar);
            let mut out = Vec::with_capacity(polar * directions);
            for (x, wx) in nodes.iter().zip(&weights) {
                let r = (1.0 - x * x).max(0.0).sqrt();
                for j in 0..directions {
                    let (s, c) = (TAU * j as f64 / directions as f64).sin_cos();
                    out.push((vec![r * c, r * s, *x], 0.5 * wx / directions as f64));
                }
            }
            Ok(out)
        }
        _ => Err(domain(format!("meridian grids support n in {{2, 3}}, got {n}"))),
    }
}

/// Compares `∫_{S^n} f dμ` with the weighted average, over equatorial
/// directions `u`, of the needle integral of `t ↦ f(sin t · u, cos t)` along
/// the meridian through `u` (density `∝ sin(t)^{n-1}` on `[0, pi]`).
pub fn meridian_fubini_check<F>(n: u32, f: F, directions: usize, spec: &QuadratureSpec) -> Result<ConsistencyReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let needle = needle_normalize(&NeedleDensity::new(n, 1, 0.0, (0.0, PI), 1.0)?)?;
    let grid = equatorial_grid(n, directions)?;
    let whole = sphere_integrate(n, &f, spec)?;
    let pieces: Vec<Result<f64>> = grid
        .par_iter()
        .map(|(u, w)| {
            let mut point = vec![0.0; n as usize + 1];
            let value = try_integrate(
                |t| {
                    let (s, c) = t.sin_cos();
                    for (p, ui) in point.iter_mut().zip(u) {
                        *p = s * ui;
                    }
                    point[n as usize] = c;
                    Ok(f(&point) * needle.density(t))
                },
                0.0,
                PI,
                spec,
            )?;
            Ok(w * value)
        })
        .collect();
    let mut average = 0.0;
    for piece in pieces {
        average += piece?;
    }
    Ok(ConsistencyReport::absolute(whole, average, FUBINI_TOLERANCE)
        .with_param("n", f64::from(n))
        .with_param("directions", directions as f64))
}

/// Named test functions on `S^n ⊂ R^{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub enum SphereFunction {
    Constant(f64),
    Coordinate(usize),
    CoordinateSquared(usize),
    /// `exp(z) + z³` in the last coordinate `z`.
    Zonal,
    /// Random polynomial of total degree at most 3 with coefficients in `[-1, 1]`.
    Polynomial { seed: u64 },
}

impl SphereFunction {
    /// Binds the function to `S^n`, materializing random coefficients.
    pub fn bind(&self, n: u32) -> Result<BoundSphereFunction> {
        let dim = n as usize + 1;
        match self {
            SphereFunction::Coordinate(i) | SphereFunction::CoordinateSquared(i) if *i >= dim => {
                return Err(domain(format!("coordinate {i} out of range for S^{n}")));
            }
            _ => {}
        }
        let terms = match self {
            SphereFunction::Polynomial { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                monomials(dim, 3)
                    .into_iter()
                    .map(|m| (rng.random_range(-1.0..=1.0), m))
                    .collect()
            }
            _ => Vec::new(),
        };
        Ok(BoundSphereFunction {
            kind: self.clone(),
            terms,
        })
    }
}

impl FromStr for SphereFunction {
    type Err = Error;

    /// `const[:c]`, `coord:i`, `coord2:i`, `zonal`, `poly:seed`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let parse_index = |a: Option<&str>| -> Result<usize> {
            a.ok_or_else(|| domain(format!("{name} needs an index, e.g. {name}:0")))?
                .parse()
                .map_err(|_| domain(format!("bad index in {s}")))
        };
        match name {
            "const" => Ok(SphereFunction::Constant(match arg {
                Some(a) => a.parse().map_err(|_| domain(format!("bad constant in {s}")))?,
                None => 1.0,
            })),
            "coord" => Ok(SphereFunction::Coordinate(parse_index(arg)?)),
            "coord2" => Ok(SphereFunction::CoordinateSquared(parse_index(arg)?)),
            "zonal" => Ok(SphereFunction::Zonal),
            "poly" => Ok(SphereFunction::Polynomial {
                seed: arg
                    .unwrap_or("0")
                    .parse()
                    .map_err(|_| domain(format!("bad seed in {s}")))?,
            }),
            _ => Err(domain(format!("unknown sphere function {s:?}"))),
        }
    }
}

/// A [`SphereFunction`] with its coefficients fixed for a given dimension.
#[derive(Debug, Clone)]
pub struct BoundSphereFunction {
    kind: SphereFunction,
    terms: Vec<(f64, Vec<u32>)>,
}

impl BoundSphereFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            SphereFunction::Constant(c) => *c,
            SphereFunction::Coordinate(i) => x[*i],
            SphereFunction::CoordinateSquared(i) => x[*i] * x[*i],
            SphereFunction::Zonal => {
                let z = x[x.len() - 1];
                z.exp() + z * z * z
            }
            SphereFunction::Polynomial { .. } => self
                .terms
                .iter()
                .map(|(c, powers)| {
                    c * powers
                        .iter()
                        .zip(x)
                        .map(|(&p, &xi)| xi.powi(p as i32))
                        .product::<f64>()
                })
                .sum(),
        }
    }
}

fn monomials(dim: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(dim: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == dim {
            out.push(prefix.clone());
            return;
        }
        for p in 0..=left {
            prefix.push(p);
            rec(dim, left - p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, degree, &mut Vec::new(), &mut out);
    out
}
