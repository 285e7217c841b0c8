use std::f64::consts::{PI, TAU};

use rand::Rng;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Relative tolerance for duplicate, collinear and symmetry checks.
pub const VERTEX_TOL: f64 = 1e-12;

#[inline]
pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub(crate) fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub(crate) fn direction(t: f64) -> Point {
    let (s, c) = t.sin_cos();
    [c, s]
}

/// An origin-symmetric, strictly convex polygon with the origin in its interior.
///
/// Vertices are kept counterclockwise, starting from the vertex with the
/// smallest polar angle in `(-pi, pi]`, so radial queries reduce to a binary
/// search over the vertex angles.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
    angles: Vec<f64>,
}

impl Polygon {
    /// Builds a polygon from its full counterclockwise vertex list.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        validate(&vertices)?;
        let start = (0..vertices.len())
            .min_by(|&i, &j| {
                let a = vertices[i][1].atan2(vertices[i][0]);
                let b = vertices[j][1].atan2(vertices[j][0]);
                a.total_cmp(&b)
            })
            .expect("validated polygon has vertices");
        let mut ordered = Vec::with_capacity(vertices.len());
        ordered.extend_from_slice(&vertices[start..]);
        ordered.extend_from_slice(&vertices[..start]);
        let first = ordered[0][1].atan2(ordered[0][0]);
        let angles = ordered
            .iter()
            .map(|v| first + (v[1].atan2(v[0]) - first).rem_euclid(TAU))
            .collect();
        Ok(Self {
            vertices: ordered,
            angles,
        })
    }

    /// Builds a polygon from one half of its vertices; the negated partners are appended.
    pub fn from_half(half: &[Point]) -> Result<Self> {
        let mut full = half.to_vec();
        full.extend(half.iter().map(|v| [-v[0], -v[1]]));
        Self::new(full)
    }

    /// Regular `2k`-gon with circumradius `radius`, first vertex at angle `phase`.
    pub fn regular(vertex_count: usize, radius: f64, phase: f64) -> Result<Self> {
        if vertex_count < 4 || !vertex_count.is_multiple_of(2) {
            return Err(Error::InvalidBody(format!(
                "a symmetric regular polygon needs an even vertex count >= 4, got {vertex_count}"
            )));
        }
        let step = TAU / vertex_count as f64;
        Self::new(
            (0..vertex_count)
                .map(|i| {
                    let d = direction(phase + step * i as f64);
                    [radius * d[0], radius * d[1]]
                })
                .collect(),
        )
    }

    /// Axis-parallel square `[-a, a]²`.
    pub fn square(half_side: f64) -> Result<Self> {
        let a = half_side;
        Self::new(vec![[a, -a], [a, a], [-a, a], [-a, -a]])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// The first half of the vertex list, whose negation completes the polygon.
    pub fn half_vertices(&self) -> &[Point] {
        &self.vertices[..self.vertices.len() / 2]
    }

    /// Polar angles of the vertices, increasing, spanning one full turn.
    pub fn vertex_angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn radial(&self, t: f64) -> f64 {
        let n = self.vertices.len();
        let first = self.angles[0];
        let t = first + (t - first).rem_euclid(TAU);
        let i = self.angles.partition_point(|&a| a <= t).saturating_sub(1);
        let a = self.vertices[i];
        let b = self.vertices[(i + 1) % n];
        let edge = sub(b, a);
        cross(a, edge) / cross(direction(t), edge)
    }

    pub fn support(&self, t: f64) -> f64 {
        let u = direction(t);
        self.vertices
            .iter()
            .map(|&v| dot(v, u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Vertices of the polar body: edge `[a, b]` at distance `d` with outward
    /// normal `u` becomes the dual vertex `u / d`.
    pub fn polar_dual(&self) -> Result<Self> {
        let n = self.vertices.len();
        let dual = (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                let e = sub(b, a);
                // cross(a, e) = |e| * distance of the edge line from the origin
                let c = cross(a, e);
                if c <= 0.0 {
                    return Err(Error::OriginNotInterior);
                }
                Ok([e[1] / c, -e[0] / c])
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dual)
    }

    /// Smallest distance from the origin to the boundary (exact, via edge feet).
    pub fn min_radius(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| segment_distance(self.vertices[i], self.vertices[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_radius(&self) -> f64 {
        self.vertices.iter().map(|&v| norm(v)).fold(0.0, f64::max)
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|i| cross(self.vertices[i], self.vertices[(i + 1) % n]))
            .sum::<f64>()
    }

    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(
            self.vertices
                .iter()
                .map(|v| [c * v[0] - s * v[1], s * v[0] + c * v[1]])
                .collect(),
        )
        .expect("rotation preserves polygon validity")
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::InvalidBody(format!("scale factor must be positive, got {factor}")));
        }
        Self::new(self.vertices.iter().map(|v| [factor * v[0], factor * v[1]]).collect())
    }
}

/// Convex hull of a point set, counterclockwise, without collinear points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |a: Point, b: Point, c: Point| cross(sub(b, a), sub(c, b));
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// A random origin-symmetric polygon: `half_count` jittered directions over
/// half a turn with radii uniform in `[r_min, r_max]`, mirrored and replaced
/// by their convex hull. Hull vertices may number fewer than `2 * half_count`.
pub fn random_symmetric_polygon<R: Rng + ?Sized>(
    rng: &mut R,
    half_count: usize,
    r_min: f64,
    r_max: f64,
) -> Result<Polygon> {
    if half_count < 2 {
        return Err(Error::InvalidBody("need at least two vertices per half".into()));
    }
    if !(r_min > 0.0 && r_min <= r_max && r_max.is_finite()) {
        return Err(Error::InvalidBody(format!("bad radius range [{r_min}, {r_max}]")));
    }
    for _ in 0..64 {
        let phase = rng.random_range(0.0..PI);
        let step = PI / half_count as f64;
        let mut points = Vec::with_capacity(2 * half_count);
        for i in 0..half_count {
            let t = phase + step * (i as f64 + rng.random_range(-0.35..0.35));
            let r = if r_max > r_min { rng.random_range(r_min..=r_max) } else { r_min };
            let d = direction(t);
            points.push([r * d[0], r * d[1]]);
            points.push([-r * d[0], -r * d[1]]);
        }
        if let Ok(p) = Polygon::new(convex_hull(&points)) {
            return Ok(p);
        }
    }
    Err(Error::InvalidBody("could not draw a valid random polygon".into()))
}

fn segment_distance(a: Point, b: Point) -> f64 {
    let e = sub(b, a);
    let len2 = dot(e, e);
    let s = (-dot(a, e) / len2).clamp(0.0, 1.0);
    norm([a[0] + s * e[0], a[1] + s * e[1]])
}

fn validate(vertices: &[Point]) -> Result<()> {
    let n = vertices.len();
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::InvalidBody(format!(
            "a symmetric polygon needs an even number (>= 4) of vertices, got {n}"
        )));
    }
    if let Some(index) = vertices.iter().position(|v| !v[0].is_finite() || !v[1].is_finite()) {
        return Err(Error::InvalidVertex {
            index,
            reason: "coordinates must be finite".into(),
        });
    }
    let scale = vertices.iter().map(|&v| norm(v)).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::InvalidBody("all vertices sit at the origin".into()));
    }
    let tol = VERTEX_TOL * scale;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let c = vertices[(i + 2) % n];
        if norm(sub(b, a)) <= tol {
            return Err(Error::InvalidVertex {
                index: (i + 1) % n,
                reason: "duplicates its predecessor".into(),
            });
        }
        let turn = cross(sub(b, a), sub(c, b));
        if turn <= tol * scale {
            return Err(Error::InvalidVertex {
                index: (i + 1) % n,
                reason: if turn.abs() <= tol * scale {
                    "collinear with its neighbours".into()
                } else {
                    "makes a clockwise (non-convex) turn".into()
                },
            });
        }
        if cross(a, b) <= tol * scale {
            return Err(Error::OriginNotInterior);
        }
    }
    let winding: f64 = (0..n)
        .map(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            cross(a, b).atan2(dot(a, b))
        })
        .sum();
    if (winding - TAU).abs() > 1e-6 {
        return Err(Error::InvalidBody(format!(
            "vertices wind {:.3} turns around the origin instead of one",
            winding / TAU
        )));
    }
    let half = n / 2;
    for i in 0..half {
        let a = vertices[i];
        let b = vertices[i + half];
        if norm([a[0] + b[0], a[1] + b[1]]) > tol {
            return Err(Error::InvalidVertex {
                index: i + half,
                reason: format!("is not the negation of vertex {i} (polygon must be origin-symmetric)"),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn random_polygons_are_valid_and_bounded() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for half in 2..16 {
            let p = random_symmetric_polygon(&mut rng, half, 1.2, 1.9).unwrap();
            assert!(p.max_radius() <= 1.9 + 1e-12);
            assert!(p.vertices().len() <= 2 * half);
        }
        let hull = convex_hull(&[[0.0, 0.0], [1.0, 0.0], [0.5, 0.0], [0.0, 1.0], [0.2, 0.2]]);
        assert_eq!(hull, vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn square_queries() {
        let sq = Polygon::square(1.0).unwrap();
        assert!((sq.radial(FRAC_PI_4) - 2f64.sqrt()).abs() < 1e-15);
        assert!((sq.radial(0.0) - 1.0).abs() < 1e-15);
        assert!((sq.radial(-3.0 * FRAC_PI_4) - 2f64.sqrt()).abs() < 1e-15);
        assert!((sq.support(0.0) - 1.0).abs() < 1e-15);
        assert!((sq.support(FRAC_PI_4) - 2f64.sqrt()).abs() < 1e-15);
        assert!((sq.area() - 4.0).abs() < 1e-15);
        assert!((sq.min_radius() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn square_dual_is_diamond() {
        let dual = Polygon::square(1.0).unwrap().polar_dual().unwrap();
        let mut got: Vec<Point> = dual.vertices().to_vec();
        got.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        let want = [[-1.0, 0.0], [0.0, -1.0], [0.0, 1.0], [1.0, 0.0]];
        for (g, w) in got.iter().zip(want.iter()) {
            assert!(norm(sub(*g, *w)) < 1e-15, "{g:?} vs {w:?}");
        }
    }

    #[test]
    fn rejects_bad_vertex_lists() {
        assert!(Polygon::new(vec![[1.0, 0.0], [-1.0, 0.0]]).is_err());
        // collinear midpoint
        let err = Polygon::from_half(&[[1.0, -1.0], [1.0, 0.0], [1.0, 1.0], [-1.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::InvalidVertex { index: 1, .. }), "{err:?}");
        // duplicate
        let err = Polygon::from_half(&[[1.0, -1.0], [1.0, -1.0], [1.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::InvalidVertex { .. }), "{err:?}");
        // clockwise
        assert!(Polygon::from_half(&[[-1.0, 1.0], [1.0, 1.0]]).is_err());
        // not symmetric
        assert!(Polygon::new(vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.1], [0.0, -1.0]]).is_err());
    }

    #[test]
    fn half_listing_roundtrip() {
        let p = Polygon::from_half(&[[2.0, -0.5], [1.0, 1.5], [-0.5, 1.4]]).unwrap();
        assert_eq!(p.vertices().len(), 6);
        let q = Polygon::from_half(p.half_vertices()).unwrap();
        assert_eq!(p, q);
    }
}
