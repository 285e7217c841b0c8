//! Origin-symmetric planar convex bodies, queried through their radial and
//! support functions.
//!
//! Bodies are radial-function oracles: an intersection is kept lazily as the
//! pointwise minimum of its members' radial functions and is never clipped
//! into a polygon. Strips stay unbounded; whatever integrates over them must
//! supply a decaying weight.

mod polygon;
pub mod schema;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::gamma_half;

pub use polygon::{convex_hull, random_symmetric_polygon, Point, Polygon, VERTEX_TOL};

/// A disk centred at the origin. Radius zero is allowed and stands for the
/// degenerate body `{0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    radius: f64,
}

impl Disk {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidBody(format!("disk radius must be finite and >= 0, got {radius}")));
        }
        Ok(Self { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// `{ x : |<x, (cos a, sin a)>| <= w }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strip {
    normal_angle: f64,
    half_width: f64,
}

impl Strip {
    pub fn new(normal_angle: f64, half_width: f64) -> Result<Self> {
        if !normal_angle.is_finite() {
            return Err(Error::InvalidBody("strip normal angle must be finite".into()));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidBody(format!(
                "strip half-width must be finite and positive, got {half_width}"
            )));
        }
        Ok(Self {
            normal_angle,
            half_width,
        })
    }

    pub fn normal_angle(&self) -> f64 {
        self.normal_angle
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    fn radial(&self, t: f64) -> f64 {
        let c = (t - self.normal_angle).cos().abs();
        if c < 1e-300 {
            f64::INFINITY
        } else {
            self.half_width / c
        }
    }
}

/// An origin-symmetric convex body in the plane.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody2D {
    Polygon(Polygon),
    Disk(Disk),
    Strip(Strip),
    /// Lazy intersection; never empty, never nested, never contains `WholePlane`.
    Intersection(Vec<ConvexBody2D>),
    WholePlane,
}

impl From<Polygon> for ConvexBody2D {
    fn from(p: Polygon) -> Self {
        ConvexBody2D::Polygon(p)
    }
}

impl ConvexBody2D {
    pub fn disk(radius: f64) -> Result<Self> {
        Disk::new(radius).map(ConvexBody2D::Disk)
    }

    pub fn strip(normal_angle: f64, half_width: f64) -> Result<Self> {
        Strip::new(normal_angle, half_width).map(ConvexBody2D::Strip)
    }

    pub fn polygon(vertices: Vec<Point>) -> Result<Self> {
        Polygon::new(vertices).map(ConvexBody2D::Polygon)
    }

    pub fn polygon_from_half(half: &[Point]) -> Result<Self> {
        Polygon::from_half(half).map(ConvexBody2D::Polygon)
    }

    /// Intersection of any number of bodies; an empty list is the whole plane.
    pub fn intersection_of(bodies: impl IntoIterator<Item = ConvexBody2D>) -> Self {
        bodies
            .into_iter()
            .fold(ConvexBody2D::WholePlane, |acc, b| intersect(&acc, &b))
    }

    /// `sup { r >= 0 : r (cos t, sin t) in K }`, possibly infinite.
    pub fn radial_function(&self, t: f64) -> f64 {
        match self {
            ConvexBody2D::Polygon(p) => p.radial(t),
            ConvexBody2D::Disk(d) => d.radius,
            ConvexBody2D::Strip(s) => s.radial(t),
            ConvexBody2D::Intersection(bodies) => bodies
                .iter()
                .map(|b| b.radial_function(t))
                .fold(f64::INFINITY, f64::min),
            ConvexBody2D::WholePlane => f64::INFINITY,
        }
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            ConvexBody2D::Polygon(_) | ConvexBody2D::Disk(_) => true,
            ConvexBody2D::Strip(_) | ConvexBody2D::WholePlane => false,
            ConvexBody2D::Intersection(bodies) => {
                if bodies
                    .iter()
                    .any(|b| matches!(b, ConvexBody2D::Polygon(_) | ConvexBody2D::Disk(_)))
                {
                    return true;
                }
                // Only strips remain: bounded iff two normals are not parallel.
                let normals: Vec<f64> = bodies
                    .iter()
                    .filter_map(|b| match b {
                        ConvexBody2D::Strip(s) => Some(s.normal_angle),
                        _ => None,
                    })
                    .collect();
                normals.iter().any(|&a| {
                    normals
                        .iter()
                        .any(|&b| (a - b).sin().abs() > 1e-12)
                })
            }
        }
    }

    /// `max_{x in K} <x, (cos t, sin t)>`.
    pub fn support_function(&self, t: f64) -> Result<f64> {
        match self {
            ConvexBody2D::Polygon(p) => Ok(p.support(t)),
            ConvexBody2D::Disk(d) => Ok(d.radius),
            ConvexBody2D::Strip(s) => {
                if (t - s.normal_angle).sin().abs() < 1e-15 {
                    Ok(s.half_width)
                } else {
                    Err(Error::Unbounded(t))
                }
            }
            ConvexBody2D::WholePlane => Err(Error::Unbounded(t)),
            ConvexBody2D::Intersection(_) => {
                if !self.is_bounded() {
                    return Err(Error::Unbounded(t));
                }
                Ok(self.support_by_search(t))
            }
        }
    }

    /// `<x(s), u(t)>` is unimodal along the half of a convex boundary facing
    /// `u(t)`, so a coarse scan plus golden-section search finds the support.
    fn support_by_search(&self, t: f64) -> f64 {
        let value = |s: f64| self.radial_function(s) * (s - t).cos();
        let lo = t - FRAC_PI_2;
        let steps = 256;
        let h = PI / steps as f64;
        let best = (0..=steps)
            .map(|i| lo + h * i as f64)
            .max_by(|&a, &b| value(a).total_cmp(&value(b)))
            .expect("nonempty scan");
        let (mut a, mut b) = ((best - h).max(lo), (best + h).min(lo + PI));
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut fc, mut fd) = (value(c), value(d));
        while b - a > 1e-13 {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = value(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = value(d);
            }
        }
        value(best).max(fc).max(fd)
    }

    /// Directions in `[0, 2pi)` where the radial function may have a kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_breakpoints(&mut out);
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        out
    }

    fn collect_breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            ConvexBody2D::Polygon(p) => {
                out.extend(p.vertex_angles().iter().map(|a| a.rem_euclid(TAU)))
            }
            ConvexBody2D::Intersection(bodies) => {
                for b in bodies {
                    b.collect_breakpoints(out);
                }
                self.collect_crossings(bodies, out);
            }
            _ => {}
        }
    }

    /// Directions where the minimizing member of an intersection changes.
    fn collect_crossings(&self, bodies: &[ConvexBody2D], out: &mut Vec<f64>) {
        let steps = 1024;
        let h = PI / steps as f64;
        let argmin = |t: f64| {
            let mut best = (f64::INFINITY, usize::MAX);
            for (i, b) in bodies.iter().enumerate() {
                let r = b.radial_function(t);
                if r < best.0 {
                    best = (r, i);
                }
            }
            best.1
        };
        let mut prev = argmin(0.0);
        for i in 1..=steps {
            let t = h * i as f64;
            let cur = argmin(t);
            if cur != prev && cur != usize::MAX && prev != usize::MAX {
                let gap = |s: f64| bodies[prev].radial_function(s) - bodies[cur].radial_function(s);
                let (mut a, mut b) = (t - h, t);
                let sign_a = gap(a) < 0.0;
                while b - a > 1e-15 {
                    let mid = 0.5 * (a + b);
                    if (gap(mid) < 0.0) == sign_a {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                let x = 0.5 * (a + b);
                out.push(x.rem_euclid(TAU));
                out.push((x + PI).rem_euclid(TAU));
            }
            prev = cur;
        }
    }

    /// Free directions of an unbounded body, as angles modulo `pi`; `None`
    /// when every direction is free.
    fn free_directions(&self) -> Option<Vec<f64>> {
        match self {
            ConvexBody2D::Polygon(_) | ConvexBody2D::Disk(_) => Some(Vec::new()),
            ConvexBody2D::Strip(s) => Some(vec![(s.normal_angle + FRAC_PI_2).rem_euclid(PI)]),
            ConvexBody2D::WholePlane => None,
            ConvexBody2D::Intersection(bodies) => {
                let mut common: Option<Vec<f64>> = None;
                for b in bodies {
                    let Some(dirs) = b.free_directions() else { continue };
                    common = Some(match common {
                        None => dirs,
                        Some(prev) => prev
                            .into_iter()
                            .filter(|&a| dirs.iter().any(|&d| ((a - d).rem_euclid(PI)).min(PI - (a - d).rem_euclid(PI)) < 1e-12))
                            .collect(),
                    });
                }
                common
            }
        }
    }

    /// Whether `rho` stays finite on the closed arc `[lo, hi]`.
    pub fn is_bounded_on(&self, lo: f64, hi: f64) -> bool {
        let Some(dirs) = self.free_directions() else {
            return false;
        };
        dirs.iter().all(|&d| {
            // first translate d + j pi at or above lo
            let first = d + PI * ((lo - d) / PI).ceil();
            let first = if first - PI >= lo - 1e-12 { first - PI } else { first };
            first > hi + 1e-12
        })
    }

    /// Breakpoints shifted into `[lo, hi]` (all `2pi`-translates).
    pub fn breakpoints_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let base = self.breakpoints();
        let mut out = Vec::new();
        if base.is_empty() || !(hi > lo) {
            return out;
        }
        let k0 = (lo / TAU).floor() as i64 - 1;
        let k1 = (hi / TAU).ceil() as i64 + 1;
        for k in k0..=k1 {
            for &a in &base {
                let x = a + TAU * k as f64;
                if x > lo && x < hi {
                    out.push(x);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn rotated(&self, angle: f64) -> Self {
        match self {
            ConvexBody2D::Polygon(p) => ConvexBody2D::Polygon(p.rotated(angle)),
            ConvexBody2D::Disk(d) => ConvexBody2D::Disk(*d),
            ConvexBody2D::Strip(s) => ConvexBody2D::Strip(Strip {
                normal_angle: s.normal_angle + angle,
                half_width: s.half_width,
            }),
            ConvexBody2D::Intersection(bodies) => {
                ConvexBody2D::Intersection(bodies.iter().map(|b| b.rotated(angle)).collect())
            }
            ConvexBody2D::WholePlane => ConvexBody2D::WholePlane,
        }
    }

    /// `factor * K`, for `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::InvalidBody(format!("scale factor must be positive, got {factor}")));
        }
        Ok(match self {
            ConvexBody2D::Polygon(p) => ConvexBody2D::Polygon(p.scaled(factor)?),
            ConvexBody2D::Disk(d) => ConvexBody2D::Disk(Disk::new(d.radius * factor)?),
            ConvexBody2D::Strip(s) => ConvexBody2D::Strip(Strip::new(s.normal_angle, s.half_width * factor)?),
            ConvexBody2D::Intersection(bodies) => ConvexBody2D::Intersection(
                bodies
                    .iter()
                    .map(|b| b.scaled(factor))
                    .collect::<Result<_>>()?,
            ),
            ConvexBody2D::WholePlane => ConvexBody2D::WholePlane,
        })
    }

    /// `K° = { y : <x, y> <= 1 for all x in K }`, for polygons and disks.
    pub fn polar_dual(&self) -> Result<Self> {
        match self {
            ConvexBody2D::Polygon(p) => Ok(ConvexBody2D::Polygon(p.polar_dual()?)),
            ConvexBody2D::Disk(d) => {
                if d.radius == 0.0 {
                    Err(Error::OriginNotInterior)
                } else {
                    Ok(ConvexBody2D::Disk(Disk::new(1.0 / d.radius)?))
                }
            }
            other => Err(Error::InvalidBody(format!(
                "polar dual is only materialized for polygons and disks, got {}",
                other.kind()
            ))),
        }
    }

    /// `(min_t rho(t), max_t rho(t))`; exact for polygons and disks.
    pub fn radial_extrema(&self) -> (f64, f64) {
        match self {
            ConvexBody2D::Polygon(p) => (p.min_radius(), p.max_radius()),
            ConvexBody2D::Disk(d) => (d.radius, d.radius),
            ConvexBody2D::Strip(s) => (s.half_width, f64::INFINITY),
            ConvexBody2D::WholePlane => (f64::INFINITY, f64::INFINITY),
            ConvexBody2D::Intersection(_) => {
                if !self.is_bounded() {
                    let steps = 4096;
                    let min = (0..steps)
                        .map(|i| self.radial_function(PI * i as f64 / steps as f64))
                        .fold(f64::INFINITY, f64::min);
                    return (min, f64::INFINITY);
                }
                let lo = self.refined_extremum(|a, b| a < b);
                let hi = self.refined_extremum(|a, b| a > b);
                (lo, hi)
            }
        }
    }

    fn refined_extremum(&self, better: impl Fn(f64, f64) -> bool) -> f64 {
        let steps = 4096;
        let h = PI / steps as f64;
        let mut best_t = 0.0;
        let mut best = self.radial_function(0.0);
        for i in 1..steps {
            let t = h * i as f64;
            let v = self.radial_function(t);
            if better(v, best) {
                best = v;
                best_t = t;
            }
        }
        // local polish on a shrinking stencil
        let mut step = h;
        while step > 1e-14 {
            let mut moved = false;
            for cand in [best_t - step, best_t + step] {
                let v = self.radial_function(cand);
                if better(v, best) {
                    best = v;
                    best_t = cand;
                    moved = true;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        best
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ConvexBody2D::Polygon(_) => "polygon",
            ConvexBody2D::Disk(_) => "disk",
            ConvexBody2D::Strip(_) => "strip",
            ConvexBody2D::Intersection(_) => "intersection",
            ConvexBody2D::WholePlane => "whole_plane",
        }
    }
}

/// Lazy intersection: the result's radial function is the pointwise minimum.
pub fn intersect(a: &ConvexBody2D, b: &ConvexBody2D) -> ConvexBody2D {
    let mut members = Vec::new();
    for body in [a, b] {
        match body {
            ConvexBody2D::WholePlane => {}
            ConvexBody2D::Intersection(items) => members.extend(items.iter().cloned()),
            other => members.push(other.clone()),
        }
    }
    match members.len() {
        0 => ConvexBody2D::WholePlane,
        1 => members.pop().expect("one member"),
        _ => ConvexBody2D::Intersection(members),
    }
}

/// `inner_r < min rho_S` and `max rho_S <= outer_r`.
pub fn ball_sandwich_check(body: &ConvexBody2D, inner_r: f64, outer_r: f64) -> bool {
    if !body.is_bounded() {
        return false;
    }
    let (lo, hi) = body.radial_extrema();
    inner_r < lo && hi <= outer_r
}

/// A planar cone over the arc `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cone2D {
    lo: f64,
    hi: f64,
}

impl Cone2D {
    /// Zero width is allowed and yields null measures; widths above `pi` are rejected.
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || hi < lo || hi - lo > PI + 1e-12 {
            return Err(Error::InvalidCone { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn rotated(&self, angle: f64) -> Self {
        Self {
            lo: self.lo + angle,
            hi: self.hi + angle,
        }
    }
}

/// Closed-form reference bodies in `R^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VolumePreset {
    Cube,
    Ball,
    CrossPolytope,
}

/// `vol(K) vol(K°)` in `R^n`: `4^n/n!` for the cube and cross-polytope,
/// `pi^n / Γ(n/2 + 1)²` for the Euclidean ball.
pub fn reference_volume_product(preset: VolumePreset, n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    Ok(match preset {
        VolumePreset::Cube | VolumePreset::CrossPolytope => {
            (1..=n).fold(1.0, |acc, k| acc * 4.0 / f64::from(k))
        }
        VolumePreset::Ball => {
            let g = gamma_half(n + 2);
            PI.powi(n as i32) / (g * g)
        }
    })
}
