//! Waist bounds for uniformly convex normed spaces and the round-sphere
//! tube baseline.
//!
//! For a space of dimension `n + 1` with modulus of convexity `δ`,
//!
//! ```text
//! w(ε) = 1 / (1 + (1 - 2δ(ε/2))^{n-k} (k+1)^{k+1} F(k, ε/2) / G(k, ε/2))
//! F(k, ε) = ∫_{ψ₂(ε)}^{pi/2} sin^{k-1},   G(k, ε) = ∫_0^{ψ₁(ε)} sin^{k-1}
//! ψ₁(ε) = 2 asin(ε / (4√(k+1))),          ψ₂(ε) = 2 asin(ε / (2√(k+1)))
//! ```
//!
//! with `w(0) = 0` by continuity. Any lower estimate of `δ` gives a valid
//! (weaker) bound, since `w` is nondecreasing in `δ`.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numerics::{integrate_interval, sin_power_integral, QuadratureSpec};

/// Source of the modulus of convexity `δ(ε)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Modulus {
    /// Euclidean: `1 - √(1 - ε²/4)`.
    L2,
    /// `1 - (1 - (ε/2)^p)^{1/p}`, a lower estimate for `ℓ_p`, `p >= 2`.
    Lp { p: f64 },
    /// Piecewise-linear through `(0, 0)` and the listed `(ε, δ)` pairs,
    /// constant after the last pair.
    Table { pairs: Vec<(f64, f64)> },
}

impl Modulus {
    pub fn validate(&self) -> Result<()> {
        match self {
            Modulus::L2 => Ok(()),
            Modulus::Lp { p } => {
                if *p >= 2.0 && p.is_finite() {
                    Ok(())
                } else {
                    Err(domain(format!("Lp modulus needs finite p >= 2, got {p}")))
                }
            }
            Modulus::Table { pairs } => {
                if pairs.is_empty() {
                    return Err(domain("modulus table is empty"));
                }
                let mut prev = (0.0, 0.0);
                for (i, &(e, d)) in pairs.iter().enumerate() {
                    if !(0.0..=2.0).contains(&e) || !(0.0..=1.0).contains(&d) {
                        return Err(domain(format!("table pair {i} ({e}, {d}) outside [0,2] x [0,1]")));
                    }
                    let first_at_origin = i == 0 && e == 0.0 && d == 0.0;
                    if !first_at_origin && (e <= prev.0 || d <= prev.1) {
                        return Err(domain(format!(
                            "table pairs must increase strictly in both coordinates (pair {i})"
                        )));
                    }
                    prev = (e, d);
                }
                Ok(())
            }
        }
    }
}

/// `δ(ε)` for `ε ∈ [0, 2]`.
pub fn modulus(space: &Modulus, eps: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&eps) {
        return Err(domain(format!("modulus of convexity is defined on [0, 2], got {eps}")));
    }
    space.validate()?;
    Ok(match space {
        Modulus::L2 => 1.0 - (1.0 - eps * eps / 4.0).max(0.0).sqrt(),
        Modulus::Lp { p } => 1.0 - (1.0 - (eps / 2.0).powf(*p)).max(0.0).powf(1.0 / p),
        Modulus::Table { pairs } => {
            let mut prev = (0.0, 0.0);
            for &(e, d) in pairs {
                if eps <= e {
                    if e == prev.0 {
                        return Ok(d);
                    }
                    return Ok(prev.1 + (d - prev.1) * (eps - prev.0) / (e - prev.0));
                }
                prev = (e, d);
            }
            prev.1
        }
    })
}

fn check_k(k: u32) -> Result<()> {
    if k < 1 {
        return Err(domain("k must be at least 1"));
    }
    Ok(())
}

fn two_asin(arg: f64, name: &str) -> Result<f64> {
    if !(0.0..=1.0 + 1e-15).contains(&arg) {
        return Err(domain(format!("{name}: arcsin argument {arg} outside [0, 1]")));
    }
    Ok(2.0 * arg.min(1.0).asin())
}

/// `2 asin(ε / (4√(k+1)))`.
pub fn psi1(k: u32, eps: f64) -> Result<f64> {
    check_k(k)?;
    two_asin(eps / (4.0 * f64::from(k + 1).sqrt()), "psi1")
}

/// `2 asin(ε / (2√(k+1)))`.
pub fn psi2(k: u32, eps: f64) -> Result<f64> {
    check_k(k)?;
    two_asin(eps / (2.0 * f64::from(k + 1).sqrt()), "psi2")
}

/// `∫_{ψ₂(ε)}^{pi/2} sin(x)^{k-1} dx`.
pub fn big_f(k: u32, eps: f64) -> Result<f64> {
    let a = psi2(k, eps)?;
    if a > FRAC_PI_2 {
        return Err(domain(format!("psi2({eps}) = {a} exceeds pi/2")));
    }
    sin_power_integral(k - 1, a, FRAC_PI_2)
}

/// `∫_0^{ψ₁(ε)} sin(x)^{k-1} dx`.
pub fn big_g(k: u32, eps: f64) -> Result<f64> {
    let b = psi1(k, eps)?;
    if b > FRAC_PI_2 {
        return Err(domain(format!("psi1({eps}) = {b} exceeds pi/2")));
    }
    sin_power_integral(k - 1, 0.0, b)
}

/// Dimension data of the waist inequality: `X` has dimension `n + 1`, the
/// fibres are taken over `R^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaistParams {
    pub n: u32,
    pub k: u32,
    pub space: Modulus,
}

impl WaistParams {
    pub fn new(n: u32, k: u32, space: Modulus) -> Result<Self> {
        if k < 1 || k >= n {
            return Err(domain(format!("waist needs 1 <= k < n, got n={n}, k={k}")));
        }
        space.validate()?;
        Ok(Self { n, k, space })
    }
}

/// `w(ε)`; `w(0) = 0`.
pub fn waist_bound(params: &WaistParams, eps: f64) -> Result<f64> {
    let WaistParams { n, k, space } = params;
    let (n, k) = (*n, *k);
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(domain(format!("epsilon must be finite and nonnegative, got {eps}")));
    }
    if eps == 0.0 {
        return Ok(0.0);
    }
    let half = eps / 2.0;
    let delta = modulus(space, half)?;
    let base = 1.0 - 2.0 * delta;
    if base < 0.0 {
        return Err(domain(format!("1 - 2 delta(eps/2) = {base} is negative at eps = {eps}")));
    }
    let f = big_f(k, half)?;
    let g = big_g(k, half)?;
    let kk = f64::from(k + 1).powi(k as i32 + 1);
    Ok(1.0 / (1.0 + base.powi((n - k) as i32) * kk * f / g))
}

/// Normalized volume of the `ε`-neighbourhood of an equatorial `S^{n-k}` in
/// `S^n`: `∫_0^ε cos^{n-k} sin^{k-1} / ∫_0^{pi/2} cos^{n-k} sin^{k-1}`.
pub fn tube_volume_round(n: u32, k: u32, eps: f64, spec: &QuadratureSpec) -> Result<f64> {
    if k < 1 || k > n {
        return Err(domain(format!("tube needs 1 <= k <= n, got n={n}, k={k}")));
    }
    if !(0.0..=FRAC_PI_2).contains(&eps) {
        return Err(domain(format!("tube radius must lie in [0, pi/2], got {eps}")));
    }
    let density = |t: f64| t.cos().powi((n - k) as i32) * t.sin().powi(k as i32 - 1);
    let spec = spec.tightened(100.0);
    let total = integrate_interval(density, 0.0, FRAC_PI_2, &spec)?;
    if eps == FRAC_PI_2 {
        return Ok(1.0);
    }
    // integrate over the shorter side for accuracy near both ends
    let value = if eps <= FRAC_PI_2 / 2.0 {
        integrate_interval(density, 0.0, eps, &spec)? / total
    } else {
        1.0 - integrate_interval(density, eps, FRAC_PI_2, &spec)? / total
    };
    Ok(value.clamp(0.0, 1.0))
}

/// The tube volume, saturating at 1 once the neighbourhood covers the sphere.
pub fn tube_or_full(n: u32, k: u32, eps: f64, spec: &QuadratureSpec) -> Result<f64> {
    if eps >= FRAC_PI_2 {
        if k < 1 || k > n {
            return Err(domain(format!("tube needs 1 <= k <= n, got n={n}, k={k}")));
        }
        return Ok(1.0);
    }
    tube_volume_round(n, k, eps, spec)
}

/// One row of a waist curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaistRow {
    pub eps: f64,
    pub w: f64,
    pub tube: f64,
}

pub fn waist_curve(params: &WaistParams, grid: &[f64], spec: &QuadratureSpec) -> Result<Vec<WaistRow>> {
    grid.iter()
        .map(|&eps| {
            Ok(WaistRow {
                eps,
                w: waist_bound(params, eps)?,
                tube: tube_or_full(params.n, params.k, eps, spec)?,
            })
        })
        .collect()
}

/// `eps,w,tube` with 17 significant digits per value.
pub fn write_curve_csv<W: Write>(rows: &[WaistRow], out: W) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["eps", "w", "tube"])?;
    for r in rows {
        writer.write_record([r.eps, r.w, r.tube].map(|x| format!("{x:.16e}")))?;
    }
    writer.flush()?;
    Ok(())
}
