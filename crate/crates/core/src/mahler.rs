//! The α min–max estimator and the Mahler lower bound built on it.
//!
//! For a symmetric planar body `S` with `B(0,1) ⊂ int S ⊂ B(0, √(n+1))`,
//!
//! ```text
//! α(n, θ, I, S) = μ_θ(C(I) ∩ S) μ_θ(C(I) ∩ S°) / (∫_I cos(t + θ)^{n-1} dt)²
//! ```
//!
//! with `μ_θ = r^n cos(t + θ)^{n-1} dr dt`. Then `α(n, S)` is the max over
//! `θ ∈ [0, pi]` of the min over intervals `I`, `α(n)` the min over bodies,
//! and `vol(K) vol(K°) >= 4 α(n-1) pi^n / Γ(n/2)²`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conemeasure::{cone_body_measure, ConeMeasure2D, RadialWeight};
use crate::convex2d::{ball_sandwich_check, random_symmetric_polygon, Cone2D, ConvexBody2D, Point};
use crate::error::{domain, Error, Result};
use crate::numerics::{cos_power_between, gamma_half, try_integrate_with_breaks, QuadratureSpec};

/// Squared angular mass below which an interval counts as degenerate.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-14;

/// Grids and sampling for the nested α search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSearchConfig {
    pub n: u32,
    pub theta_grid: usize,
    pub interval_grid: usize,
    pub min_interval_length: f64,
    /// Inclusive range of polygon vertex counts (even counts are drawn).
    pub vertex_range: (usize, usize),
    /// Radii between which random vertices are drawn.
    pub radial_bounds: (f64, f64),
    pub sample_count: usize,
    pub refine_iters: usize,
    pub seed: u64,
}

impl AlphaSearchConfig {
    pub fn new(n: u32) -> Self {
        Self {
            n,
            theta_grid: 16,
            interval_grid: 48,
            min_interval_length: 0.02,
            vertex_range: (4, 10),
            radial_bounds: (1.0, f64::from(n + 1).sqrt()),
            sample_count: 48,
            refine_iters: 20,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(domain(format!("alpha needs n >= 2, got {}", self.n)));
        }
        if self.theta_grid < 2 || self.interval_grid < 2 {
            return Err(domain("theta and interval grids need at least two points"));
        }
        if !(self.min_interval_length > 0.0 && self.min_interval_length <= PI) {
            return Err(domain(format!(
                "min_interval_length must lie in (0, pi], got {}",
                self.min_interval_length
            )));
        }
        let (v0, v1) = self.vertex_range;
        if v0 < 4 || v0 > v1 {
            return Err(domain(format!("bad vertex range {v0}..={v1}")));
        }
        let (r0, r1) = self.radial_bounds;
        let outer = f64::from(self.n + 1).sqrt();
        if !(r0 >= 1.0 && r0 < r1 && r1 <= outer + 1e-12) {
            return Err(domain(format!(
                "radial bounds ({r0}, {r1}) must satisfy 1 <= inner < outer <= {outer}"
            )));
        }
        Ok(())
    }
}

fn sandwich(n: u32, body: &ConvexBody2D) -> Result<()> {
    let outer = f64::from(n + 1).sqrt();
    if ball_sandwich_check(body, 1.0, outer + 1e-12) {
        Ok(())
    } else {
        let (lo, hi) = body.radial_extrema();
        Err(Error::SandwichViolation(format!(
            "radial range [{lo}, {hi}] must satisfy 1 < min and max <= {outer}"
        )))
    }
}

fn alpha_measure(n: u32, theta: f64, interval: &Cone2D) -> Result<ConeMeasure2D> {
    ConeMeasure2D::new(*interval, theta, n - 1, RadialWeight::Power { p: f64::from(n) })
}

/// `α(n, θ, I, S)`.
pub fn alpha_term(n: u32, theta: f64, interval: &Cone2D, body: &ConvexBody2D, spec: &QuadratureSpec) -> Result<f64> {
    if n < 2 {
        return Err(domain(format!("alpha needs n >= 2, got {n}")));
    }
    sandwich(n, body)?;
    let dual = body.polar_dual()?;
    alpha_term_with_dual(n, theta, interval, body, &dual, spec)
}

fn alpha_term_with_dual(
    n: u32,
    theta: f64,
    interval: &Cone2D,
    body: &ConvexBody2D,
    dual: &ConvexBody2D,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let cm = alpha_measure(n, theta, interval)?;
    let g = cm.angular_mass();
    if g * g < DEGENERATE_DENOMINATOR {
        return Err(Error::DegenerateInterval(interval.width()));
    }
    let num = cone_body_measure(&cm, body, spec)? * cone_body_measure(&cm, dual, spec)?;
    Ok(num / (g * g))
}

/// Where `α(n, S)` was attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaRecord {
    pub value: f64,
    pub theta: f64,
    pub interval: (f64, f64),
    /// The inner minimum sits at the shortest allowed interval.
    pub at_min_length: bool,
}

/// Admissible interval range for `θ`: `cos(t + θ) >= 0` on `[-pi/2 - θ, pi/2 - θ]`.
fn arc_for(theta: f64) -> (f64, f64) {
    (-FRAC_PI_2 - theta, FRAC_PI_2 - theta)
}

struct BodyPair<'a> {
    n: u32,
    body: &'a ConvexBody2D,
    dual: ConvexBody2D,
    spec: &'a QuadratureSpec,
}

impl BodyPair<'_> {
    fn term(&self, theta: f64, a: f64, b: f64) -> Option<f64> {
        let cone = Cone2D::new(a, b).ok()?;
        alpha_term_with_dual(self.n, theta, &cone, self.body, &self.dual, self.spec).ok()
    }

    /// Per-cell integrals of `g W(ρ)` on the grid `u_0 < ... < u_G` of the arc.
    fn cells(&self, body: &ConvexBody2D, theta: f64, grid: &[f64]) -> Result<Vec<f64>> {
        let cone = Cone2D::new(grid[0], grid[grid.len() - 1])?;
        let cm = alpha_measure(self.n, theta, &cone)?;
        let weight = *cm.weight();
        grid.windows(2)
            .map(|w| {
                let breaks = body.breakpoints_in(w[0], w[1]);
                try_integrate_with_breaks(
                    |t| Ok(cm.angular_density(t) * weight.cumulative(body.radial_function(t))?),
                    w[0],
                    w[1],
                    &breaks,
                    self.spec,
                )
            })
            .collect()
    }

    /// Inner minimum over intervals for one `θ`: grid scan, then coordinate
    /// descent on the endpoints.
    fn inner_min(&self, theta: f64, config: &AlphaSearchConfig) -> Result<Option<AlphaRecord>> {
        let (lo, hi) = arc_for(theta);
        let g = config.interval_grid;
        let h = (hi - lo) / g as f64;
        let grid: Vec<f64> = (0..=g).map(|i| if i == g { hi } else { lo + h * i as f64 }).collect();
        let cs = self.cells(self.body, theta, &grid)?;
        let cd = self.cells(&self.dual, theta, &grid)?;
        let cg: Vec<f64> = grid
            .windows(2)
            .map(|w| cos_power_between(self.n - 1, w[0] + theta, w[1] + theta))
            .collect();
        let min_len = config.min_interval_length;
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..g {
            let (mut s, mut d, mut q) = (0.0, 0.0, 0.0);
            for j in i + 1..=g {
                s += cs[j - 1];
                d += cd[j - 1];
                q += cg[j - 1];
                if grid[j] - grid[i] < min_len - 1e-12 || q * q < DEGENERATE_DENOMINATOR {
                    continue;
                }
                let v = s * d / (q * q);
                if best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                }
            }
        }
        let Some((mut value, i, j)) = best else {
            return Ok(None);
        };
        let (mut a, mut b) = (grid[i], grid[j]);
        if let Some(v) = self.term(theta, a, b) {
            value = v;
        }
        let mut step = h;
        for _ in 0..config.refine_iters {
            let mut moved = false;
            for (da, db) in [(-step, 0.0), (step, 0.0), (0.0, -step), (0.0, step), (-step, -step), (step, step)] {
                let (na, nb) = ((a + da).max(lo), (b + db).min(hi));
                if nb - na < min_len {
                    continue;
                }
                if let Some(v) = self.term(theta, na, nb) {
                    if v < value {
                        (value, a, b) = (v, na, nb);
                        moved = true;
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        for (na, nb) in [(a, a + min_len), (b - min_len, b)] {
            if config.refine_iters > 0 && nb - na < b - a {
                if let Some(v) = self.term(theta, na.max(lo), nb.min(hi)) {
                    if v <= value {
                        (value, a, b) = (v, na.max(lo), nb.min(hi));
                    }
                }
            }
        }
        Ok(Some(AlphaRecord {
            value,
            theta,
            interval: (a, b),
            at_min_length: b - a <= min_len + 1e-9,
        }))
    }
}

fn max_record(a: AlphaRecord, b: AlphaRecord) -> AlphaRecord {
    // larger value wins; ties keep the smaller theta
    match a.value.total_cmp(&b.value) {
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Equal => {
            if b.theta < a.theta {
                b
            } else {
                a
            }
        }
    }
}

/// `α(n, S) = max_θ min_I α(n, θ, I, S)` on the configured grids, with a
/// golden-section polish of `θ` around the best grid point.
pub fn alpha_for_body(n: u32, body: &ConvexBody2D, config: &AlphaSearchConfig, spec: &QuadratureSpec) -> Result<AlphaRecord> {
    let mut config = config.clone();
    config.n = n;
    config.validate()?;
    sandwich(n, body)?;
    let pair = BodyPair {
        n,
        body,
        dual: body.polar_dual()?,
        spec,
    };
    let k = config.theta_grid;
    let step = PI / (k - 1) as f64;
    let thetas: Vec<f64> = (0..k).map(|i| if i + 1 == k { PI } else { step * i as f64 }).collect();
    let records = thetas
        .par_iter()
        .map(|&th| pair.inner_min(th, &config))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(usize, AlphaRecord)> = None;
    for (i, r) in records.iter().enumerate() {
        if let Some(r) = r {
            best = Some(match best {
                Some((bi, b)) if max_record(b, *r) == b => (bi, b),
                _ => (i, *r),
            });
        }
    }
    let Some((bi, mut record)) = best else {
        return Err(Error::DegenerateInterval(config.min_interval_length));
    };

    let eval = |th: f64| pair.inner_min(th, &config).ok().flatten();
    let (mut a, mut b) = ((thetas[bi] - step).max(0.0), (thetas[bi] + step).min(PI));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    let val = |r: &Option<AlphaRecord>| r.map_or(f64::NEG_INFINITY, |r| r.value);
    for _ in 0..config.refine_iters {
        if val(&fc) >= val(&fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d);
        }
    }
    for r in [fc, fd].into_iter().flatten() {
        record = max_record(record, r);
    }
    Ok(record)
}

/// The body that achieved an estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SampledBody {
    Disk { radius: f64 },
    Polygon { sample: usize, vertices: Vec<Point> },
}

impl SampledBody {
    pub fn body(&self) -> Result<ConvexBody2D> {
        match self {
            SampledBody::Disk { radius } => ConvexBody2D::disk(*radius),
            SampledBody::Polygon { vertices, .. } => ConvexBody2D::polygon(vertices.clone()),
        }
    }
}

/// A sampled upper estimate of `α(n) = min_S α(n, S)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub n: u32,
    /// Minimum over the finite sample: an upper estimate of the true infimum.
    pub alpha: f64,
    pub best: SampledBody,
    pub record: AlphaRecord,
    pub bodies_evaluated: usize,
    pub config: AlphaSearchConfig,
}

/// The disk always included in the family.
pub fn disk_preset(n: u32) -> f64 {
    0.5 * (1.0 + f64::from(n + 1).sqrt())
}

/// Random sandwich-admissible polygon number `index` of the sample.
pub fn sample_polygon(config: &AlphaSearchConfig, index: usize) -> Result<ConvexBody2D> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let (v0, v1) = config.vertex_range;
    let (r0, r1) = config.radial_bounds;
    for _ in 0..1000 {
        let half = rng.random_range(v0 / 2..=(v1 / 2).max(v0 / 2));
        let Ok(p) = random_symmetric_polygon(&mut rng, half, r0, r1) else {
            continue;
        };
        let body = ConvexBody2D::Polygon(p);
        if sandwich(config.n, &body).is_ok() {
            return Ok(body);
        }
    }
    Err(Error::SandwichViolation(format!(
        "no admissible polygon drawn for sample {index}"
    )))
}

/// `min` of [`alpha_for_body`] over the disk preset and `sample_count`
/// seeded random polygons. Ties go to the earlier sample (the disk first).
pub fn alpha_estimate(config: &AlphaSearchConfig, spec: &QuadratureSpec) -> Result<AlphaEstimate> {
    config.validate()?;
    let n = config.n;
    let disk_r = disk_preset(n);
    let disk = ConvexBody2D::disk(disk_r)?;
    let disk_record = alpha_for_body(n, &disk, config, spec)?;
    let samples = (0..config.sample_count)
        .into_par_iter()
        .map(|i| {
            let body = sample_polygon(config, i)?;
            let record = alpha_for_body(n, &body, config, spec)?;
            Ok((i, body, record))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = (SampledBody::Disk { radius: disk_r }, disk_record);
    for (i, body, record) in samples {
        if record.value < best.1.value {
            let ConvexBody2D::Polygon(p) = body else { unreachable!("samples are polygons") };
            best = (
                SampledBody::Polygon {
                    sample: i,
                    vertices: p.vertices().to_vec(),
                },
                record,
            );
        }
    }
    Ok(AlphaEstimate {
        n,
        alpha: best.1.value,
        best: best.0,
        record: best.1,
        bodies_evaluated: config.sample_count + 1,
        config: config.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MahlerBound {
    pub n: u32,
    pub alpha: f64,
    /// `4 α pi^n / Γ(n/2)²`.
    pub bound: f64,
    /// `α |S^{n-1}|²`, the same quantity through the sphere's surface area.
    pub sphere_form: f64,
}

/// Lower bound for `vol(K) vol(K°)` in `R^n` from `α(n-1)`.
///
/// ```
/// use sphloc::mahler::mahler_bound;
/// let b = mahler_bound(4, 1.0 / 16.0, false).unwrap();
/// assert!((b.bound - std::f64::consts::PI.powi(4) / 4.0).abs() < 1e-12);
/// ```
pub fn mahler_bound(n: u32, alpha: f64, allow_small_n: bool) -> Result<MahlerBound> {
    if n < 2 || (n < 4 && !allow_small_n) {
        return Err(domain(format!("the bound is stated for n >= 4, got {n}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let g = gamma_half(n);
    let bound = 4.0 * alpha * PI.powi(n as i32) / (g * g);
    let area = 2.0 * PI.powf(f64::from(n) / 2.0) / g;
    Ok(MahlerBound {
        n,
        alpha,
        bound,
        sphere_form: alpha * area * area,
    })
}
