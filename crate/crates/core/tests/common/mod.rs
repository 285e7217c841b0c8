#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sphloc::convex2d::{random_symmetric_polygon, Cone2D, ConvexBody2D};
use sphloc::numerics::QuadratureSpec;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn tight() -> QuadratureSpec {
    QuadratureSpec::new(1e-12, 1e-11, 4000).unwrap()
}

pub fn polygon(rng: &mut impl Rng, half: usize, r0: f64, r1: f64) -> ConvexBody2D {
    ConvexBody2D::Polygon(random_symmetric_polygon(rng, half, r0, r1).unwrap())
}

/// Bounded bodies: polygons, disks and their intersections with strips.
pub fn bounded_body(rng: &mut impl Rng) -> ConvexBody2D {
    match rng.random_range(0..4) {
        0 => ConvexBody2D::disk(rng.random_range(0.2..3.0)).unwrap(),
        1 => {
            let half = rng.random_range(2..=8);
            polygon(rng, half, 0.3, 2.5)
        }
        2 => {
            let half = rng.random_range(2..=6);
            let p = polygon(rng, half, 0.5, 2.5);
            let s = ConvexBody2D::strip(rng.random_range(0.0..PI), rng.random_range(0.2..1.5)).unwrap();
            ConvexBody2D::intersection_of([p, s])
        }
        _ => {
            let d = ConvexBody2D::disk(rng.random_range(0.5..2.5)).unwrap();
            let s = ConvexBody2D::strip(rng.random_range(0.0..PI), rng.random_range(0.2..1.5)).unwrap();
            ConvexBody2D::intersection_of([d, s])
        }
    }
}

/// Polygon or strip, the mix used for random correlation instances.
pub fn gcc_body(rng: &mut impl Rng) -> ConvexBody2D {
    if rng.random_bool(0.5) {
        let half = rng.random_range(2..=6);
        polygon(rng, half, 0.4, 3.0)
    } else {
        ConvexBody2D::strip(rng.random_range(0.0..PI), rng.random_range(0.1..2.5)).unwrap()
    }
}

/// A cone of width in `[w0, w1]` whose admissible phase set for exponent
/// `n - 2` meets `[0, pi]`, together with one admissible phase.
pub fn admissible_cone(rng: &mut impl Rng, w0: f64, w1: f64) -> (Cone2D, f64) {
    let psi = rng.random_range(0.0..=PI);
    let width = rng.random_range(w0..=w1);
    let lo = rng.random_range(-psi - PI / 2.0..=-psi + PI / 2.0 - width);
    (Cone2D::new(lo, lo + width).unwrap(), psi)
}

// (n, k, eps, w) from tests/oracles/waist_oracle.py at 40 digits.
#[allow(clippy::excessive_precision)]
pub const WAIST_ORACLE: [(u32, u32, f64, f64); 21] = [
    (4, 1, 1.0, 0.042449419346788159771),
    (3, 2, 0.990486, 0.00042066333833466120943),
    (5, 2, 0.18638, 0.000013508903523772350769),
    (6, 5, 0.42284, 1.1011634276000621849e-12),
    (4, 1, 0.307609, 0.0093782467709248260718),
    (8, 7, 1.777317, 5.1117643992715626973e-14),
    (7, 6, 1.161282, 7.2161993184804374448e-13),
    (2, 1, 1.34228, 0.058037888842089187526),
    (6, 4, 0.650707, 3.545575244639451171e-9),
    (5, 3, 1.069519, 4.6392484388046629616e-6),
    (5, 1, 0.781632, 0.030328785971119369838),
    (5, 3, 0.118069, 5.338773596562631574e-9),
    (6, 2, 1.192981, 0.00085427026643016686445),
    (2, 1, 0.409636, 0.012671829378540839161),
    (6, 3, 1.65496, 0.000027265583011309493039),
    (3, 1, 0.461089, 0.014656751378791501648),
    (8, 5, 0.97541, 8.5557451829854146897e-11),
    (8, 1, 1.599663, 0.20339037281095653439),
    (8, 7, 0.730825, 8.4074077597012267287e-17),
    (5, 1, 0.51969, 0.017430610080737994629),
    (3, 1, 0.294785, 0.0089019041265882842896),
];
