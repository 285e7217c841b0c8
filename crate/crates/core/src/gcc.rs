//! Gaussian-correlation checks in the plane.
//!
//! The full-dimensional statement `γ(ℝ²) γ(K₁∩K₂) >= γ(K₁) γ(K₂)` is
//! evaluated by angular integration of sector functions. Its cone version
//! replaces `γ` by the measure `r^{n-1} e^{-r²/2} cos(t + t₀)^{n-2} dr dt`
//! on a cone `C`, and the four factors are then compared directly, as a
//! product of needle integrals, against the strip counterexample hunt and
//! the search for a good phase `t₀`.

use std::cmp::Ordering;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conemeasure::{
    admissible_phases, brute_force_cone_measure, cone_body_measure, ConeMeasure2D, RadialWeight,
};
use crate::convex2d::{intersect, Cone2D, ConvexBody2D};
use crate::error::{domain, Error, Result};
use crate::needle::{needle_integrate_with_breaks, needle_normalize, NeedleDensity};
use crate::numerics::{gaussian_radial_unchecked, try_integrate_with_breaks, QuadratureSpec};
use crate::report::{ConsistencyReport, InequalityReport};

/// Relative margin accepted between the needle and cone forms.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-8;

/// Default number of random candidates for [`hunt_strip_counterexample`].
pub const DEFAULT_HUNT_BUDGET: usize = 100_000;

/// `∫_0^{ρ_K(u)} r^{n-1} e^{-r²/2} dr`.
pub fn sector_function(body: &ConvexBody2D, n: u32, u: f64) -> Result<f64> {
    if n < 1 {
        return Err(domain("sector functions need n >= 1"));
    }
    Ok(gaussian_radial_unchecked(n, body.radial_function(u)))
}

/// Standard Gaussian measure of `K` in the plane,
/// `(1/pi) ∫_0^pi (1 - e^{-ρ(t)²/2}) dt` by symmetry.
pub fn gaussian_mass_2d(body: &ConvexBody2D, spec: &QuadratureSpec) -> Result<f64> {
    if matches!(body, ConvexBody2D::WholePlane) {
        return Ok(1.0);
    }
    let breaks = body.breakpoints_in(0.0, PI);
    let v = try_integrate_with_breaks(|t| sector_function(body, 2, t), 0.0, PI, &breaks, spec)?;
    Ok(v / PI)
}

/// `γ(ℝ²) γ(K₁∩K₂) >= γ(K₁) γ(K₂)`; factors in that order.
pub fn check_full_correlation_2d(
    k1: &ConvexBody2D,
    k2: &ConvexBody2D,
    spec: &QuadratureSpec,
) -> Result<InequalityReport> {
    let whole = 1.0;
    let both = gaussian_mass_2d(&intersect(k1, k2), spec)?;
    let g1 = gaussian_mass_2d(k1, spec)?;
    let g2 = gaussian_mass_2d(k2, spec)?;
    Ok(InequalityReport::new(whole * both, g1 * g2, spec.abs_tol).with_factors(vec![whole, both, g1, g2]))
}

/// The measure `r^{n-1} e^{-r²/2} cos(t + t₀)^{n-2}` on `C`.
pub fn gcc_cone_measure(cone: &Cone2D, t0: f64, n: u32) -> Result<ConeMeasure2D> {
    if n < 2 {
        return Err(domain(format!("cone inequalities need n >= 2, got {n}")));
    }
    ConeMeasure2D::new(*cone, t0, n - 2, RadialWeight::Gaussian { n })
}

/// `[μ(C), μ(K₁∩K₂∩C), μ(K₁∩C), μ(K₂∩C)]`.
pub fn cone_factors(
    cone: &Cone2D,
    t0: f64,
    n: u32,
    k1: &ConvexBody2D,
    k2: &ConvexBody2D,
    spec: &QuadratureSpec,
) -> Result<[f64; 4]> {
    let cm = gcc_cone_measure(cone, t0, n)?;
    Ok([
        cone_body_measure(&cm, &ConvexBody2D::WholePlane, spec)?,
        cone_body_measure(&cm, &intersect(k1, k2), spec)?,
        cone_body_measure(&cm, k1, spec)?,
        cone_body_measure(&cm, k2, spec)?,
    ])
}

/// `μ(C) μ(K₁∩K₂∩C) >= μ(K₁∩C) μ(K₂∩C)`.
pub fn check_cone_inequality(
    cone: &Cone2D,
    t0: f64,
    n: u32,
    k1: &ConvexBody2D,
    k2: &ConvexBody2D,
    spec: &QuadratureSpec,
) -> Result<InequalityReport> {
    let f = cone_factors(cone, t0, n, k1, k2, spec)?;
    Ok(InequalityReport::new(f[0] * f[1], f[2] * f[3], spec.abs_tol)
        .with_factors(f.to_vec())
        .with_param("t0", t0)
        .with_param("n", f64::from(n))
        .with_param("cone_lo", cone.lo())
        .with_param("cone_hi", cone.hi()))
}

/// Relative difference between the product ratio `lhs / rhs` written as
/// needle integrals of sector functions and written as cone measures.
pub fn needle_cone_consistency(
    cone: &Cone2D,
    t0: f64,
    n: u32,
    k1: &ConvexBody2D,
    k2: &ConvexBody2D,
    spec: &QuadratureSpec,
) -> Result<ConsistencyReport> {
    let cone_form = cone_factors(cone, t0, n, k1, k2, spec)?;
    if cone_form[2] <= f64::MIN_POSITIVE || cone_form[3] <= f64::MIN_POSITIVE {
        return Err(Error::DivisionByZero("a right-hand cone factor vanishes".into()));
    }
    // cos(t + t0)^{n-2} is a needle of S^{n-1} with k = 1
    let needle = NeedleDensity::from_cos_phase(n - 1, 1, t0, (cone.lo(), cone.hi()), 1.0)?;
    let needle = needle_normalize(&needle)?;
    let both = intersect(k1, k2);
    let integrate = |body: &ConvexBody2D| {
        let breaks = body.breakpoints_in(cone.lo(), cone.hi());
        needle_integrate_with_breaks(
            &needle,
            |t| gaussian_radial_unchecked(n, body.radial_function(t)),
            &breaks,
            spec,
        )
    };
    let needle_form = [
        integrate(&ConvexBody2D::WholePlane)?,
        integrate(&both)?,
        integrate(k1)?,
        integrate(k2)?,
    ];
    if needle_form[2] <= f64::MIN_POSITIVE || needle_form[3] <= f64::MIN_POSITIVE {
        return Err(Error::DivisionByZero("a right-hand needle factor vanishes".into()));
    }
    let ratio = |f: &[f64; 4]| (f[0] * f[1]) / (f[2] * f[3]);
    Ok(
        ConsistencyReport::relative(ratio(&needle_form), ratio(&cone_form), CONSISTENCY_TOLERANCE)
            .with_param("t0", t0)
            .with_param("n", f64::from(n)),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripParams {
    pub normal_angle: f64,
    pub half_width: f64,
}

/// One candidate for the strip version of the cone inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripInstance {
    pub n: u32,
    pub t0: f64,
    pub cone: Cone2D,
    pub strips: [StripParams; 2],
}

impl StripInstance {
    pub fn bodies(&self) -> Result<(ConvexBody2D, ConvexBody2D)> {
        let [a, b] = self.strips;
        Ok((
            ConvexBody2D::strip(a.normal_angle, a.half_width)?,
            ConvexBody2D::strip(b.normal_angle, b.half_width)?,
        ))
    }

    pub fn evaluate(&self, spec: &QuadratureSpec) -> Result<InequalityReport> {
        let (k1, k2) = self.bodies()?;
        check_cone_inequality(&self.cone, self.t0, self.n, &k1, &k2, spec)
    }

    /// `lhs / rhs` with every factor from [`brute_force_cone_measure`].
    pub fn brute_force_ratio(&self, grid_n: usize) -> Result<f64> {
        let (k1, k2) = self.bodies()?;
        let cm = gcc_cone_measure(&self.cone, self.t0, self.n)?;
        let f = [
            brute_force_cone_measure(&cm, &ConvexBody2D::WholePlane, grid_n)?,
            brute_force_cone_measure(&cm, &intersect(&k1, &k2), grid_n)?,
            brute_force_cone_measure(&cm, &k1, grid_n)?,
            brute_force_cone_measure(&cm, &k2, grid_n)?,
        ];
        Ok(f[0] * f[1] / (f[2] * f[3]))
    }

    fn key(&self) -> [f64; 8] {
        let [a, b] = self.strips;
        [
            f64::from(self.n),
            self.t0,
            self.cone.lo(),
            self.cone.hi(),
            a.normal_angle,
            a.half_width,
            b.normal_angle,
            b.half_width,
        ]
    }
}

/// An instance violating the strip inequality: `ratio = lhs / rhs < 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub instance: StripInstance,
    pub ratio: f64,
    pub margin: f64,
    pub report: InequalityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum HuntOutcome {
    Found {
        witness: Witness,
        evaluated: usize,
    },
    NotFound {
        min_ratio: Option<f64>,
        best: Option<StripInstance>,
        evaluated: usize,
    },
}

// Search coordinates: [n, cone_lo, cone_width, t0 fraction, a1, a2, ln w1, ln w2].
const MIN_WIDTH: f64 = 0.05;
const LOG_W: (f64, f64) = (-3.0, 1.5);

fn decode(x: &[f64; 8]) -> Option<StripInstance> {
    let n = x[0] as u32;
    let width = x[2].clamp(MIN_WIDTH, PI);
    let cone = Cone2D::new(x[1], x[1] + width).ok()?;
    let phases = admissible_phases(&cone, n - 2);
    let (lo, hi) = phases
        .iter()
        .copied()
        .max_by(|p, q| (p.1 - p.0).total_cmp(&(q.1 - q.0)))?;
    let t0 = lo + x[3].clamp(0.0, 1.0) * (hi - lo);
    Some(StripInstance {
        n,
        t0,
        cone,
        strips: [
            StripParams {
                normal_angle: x[4],
                half_width: x[6].clamp(LOG_W.0, LOG_W.1).exp(),
            },
            StripParams {
                normal_angle: x[5],
                half_width: x[7].clamp(LOG_W.0, LOG_W.1).exp(),
            },
        ],
    })
}

fn ratio_of(x: &[f64; 8], spec: &QuadratureSpec) -> Option<(f64, StripInstance)> {
    let inst = decode(x)?;
    let report = inst.evaluate(spec).ok()?;
    let r = report.ratio();
    r.is_finite().then_some((r, inst))
}

fn draw(seed: u64, index: usize) -> [f64; 8] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    [
        f64::from(rng.random_range(3u32..=8)),
        rng.random_range(-PI..PI),
        rng.random_range(MIN_WIDTH..=PI),
        rng.random_range(0.0..=1.0),
        rng.random_range(0.0..PI),
        rng.random_range(0.0..PI),
        rng.random_range(LOG_W.0..LOG_W.1),
        rng.random_range(LOG_W.0..LOG_W.1),
    ]
}

fn better(a: &(f64, StripInstance), b: &(f64, StripInstance)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| {
        a.1.key()
            .iter()
            .zip(b.1.key().iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Coordinate descent on the continuous search coordinates.
fn refine(start: [f64; 8], spec: &QuadratureSpec) -> Option<([f64; 8], f64)> {
    let mut x = start;
    let mut best = ratio_of(&x, spec)?.0;
    let mut step = [0.0, 0.1, 0.1, 0.1, 0.1, 0.1, 0.2, 0.2];
    for _ in 0..400 {
        let mut moved = false;
        for i in 1..8 {
            for dir in [-1.0, 1.0] {
                let mut y = x;
                y[i] += dir * step[i];
                y[2] = y[2].clamp(MIN_WIDTH, PI);
                y[3] = y[3].clamp(0.0, 1.0);
                y[6] = y[6].clamp(LOG_W.0, LOG_W.1);
                y[7] = y[7].clamp(LOG_W.0, LOG_W.1);
                if let Some((r, _)) = ratio_of(&y, spec) {
                    if r < best {
                        best = r;
                        x = y;
                        moved = true;
                        break;
                    }
                }
            }
        }
        if !moved {
            step.iter_mut().for_each(|s| *s *= 0.5);
            if step[1] < 1e-7 {
                break;
            }
        }
    }
    Some((x, best))
}

/// Seeded search for strips violating the cone inequality.
///
/// `budget` random candidates (one ChaCha stream per index) are screened;
/// the eight best are then polished by coordinate descent. A witness is
/// returned when its ratio falls below `1 - 10 abs_tol`.
pub fn hunt_strip_counterexample(seed: u64, budget: usize, spec: &QuadratureSpec) -> Result<HuntOutcome> {
    spec.validate()?;
    let mut screened: Vec<([f64; 8], f64, StripInstance)> = (0..budget)
        .into_par_iter()
        .filter_map(|i| {
            let x = draw(seed, i);
            ratio_of(&x, spec).map(|(r, inst)| (x, r, inst))
        })
        .collect();
    screened.sort_by(|a, b| better(&(a.1, a.2), &(b.1, b.2)));
    screened.truncate(8);

    let refined: Vec<(f64, StripInstance)> = screened
        .par_iter()
        .filter_map(|(x, _, _)| {
            let (y, _) = refine(*x, spec)?;
            ratio_of(&y, spec)
        })
        .collect();
    let best = refined
        .into_iter()
        .chain(screened.iter().map(|s| (s.1, s.2)))
        .min_by(better);

    let Some((ratio, instance)) = best else {
        return Ok(HuntOutcome::NotFound {
            min_ratio: None,
            best: None,
            evaluated: budget,
        });
    };
    if ratio < 1.0 - 10.0 * spec.abs_tol {
        let report = instance.evaluate(spec)?;
        Ok(HuntOutcome::Found {
            witness: Witness {
                instance,
                ratio: report.ratio(),
                margin: report.margin,
                report,
            },
            evaluated: budget,
        })
    } else {
        Ok(HuntOutcome::NotFound {
            min_ratio: Some(ratio),
            best: Some(instance),
            evaluated: budget,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum T0Search {
    Found {
        t0: f64,
        margin: f64,
        report: InequalityReport,
        evaluated: usize,
    },
    /// Inconclusive: no grid phase satisfied the inequality.
    NotFound {
        best_t0: f64,
        best_margin: f64,
        evaluated: usize,
    },
}

/// Phases of the `grid_size`-point uniform grids on each admissible interval.
pub fn t0_grid(cone: &Cone2D, n: u32, grid_size: usize) -> Result<Vec<f64>> {
    if grid_size < 2 {
        return Err(domain("t0 grid needs at least two points"));
    }
    if n < 2 {
        return Err(domain(format!("cone inequalities need n >= 2, got {n}")));
    }
    let mut out = Vec::new();
    for (lo, hi) in admissible_phases(cone, n - 2) {
        if hi - lo <= 0.0 {
            out.push(lo);
            continue;
        }
        let h = (hi - lo) / (grid_size - 1) as f64;
        out.extend((0..grid_size).map(|i| if i + 1 == grid_size { hi } else { lo + h * i as f64 }));
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    if out.is_empty() {
        return Err(Error::EmptyAdmissibleSet);
    }
    Ok(out)
}

/// Grid search for a phase `t₀` satisfying the cone inequality.
///
/// The phase with the largest margin wins (the smallest such phase on ties).
pub fn find_t0(
    cone: &Cone2D,
    n: u32,
    k1: &ConvexBody2D,
    k2: &ConvexBody2D,
    grid_size: usize,
    spec: &QuadratureSpec,
) -> Result<T0Search> {
    let grid = t0_grid(cone, n, grid_size)?;
    let margins = grid
        .par_iter()
        .map(|&t0| check_cone_inequality(cone, t0, n, k1, k2, spec).map(|r| r.margin))
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, m) in margins.iter().enumerate() {
        if *m > margins[best] {
            best = i;
        }
    }
    let (t0, margin) = (grid[best], margins[best]);
    if margin >= -spec.abs_tol {
        Ok(T0Search::Found {
            t0,
            margin,
            report: check_cone_inequality(cone, t0, n, k1, k2, spec)?,
            evaluated: grid.len(),
        })
    } else {
        Ok(T0Search::NotFound {
            best_t0: t0,
            best_margin: margin,
            evaluated: grid.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex2d::Polygon;
    use std::f64::consts::FRAC_PI_2;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn sector_examples() {
        assert_eq!(sector_function(&ConvexBody2D::WholePlane, 2, 0.7).unwrap(), 1.0);
        assert_eq!(sector_function(&ConvexBody2D::disk(0.0).unwrap(), 3, 0.7).unwrap(), 0.0);
        let s = ConvexBody2D::strip(0.0, 1.0).unwrap();
        let v = sector_function(&s, 2, 0.0).unwrap();
        assert!((v - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn single_strip_mass_is_erf() {
        for &w in &[0.1, 0.5, 1.0, 2.5] {
            let s = ConvexBody2D::strip(0.3, w).unwrap();
            let want = libm::erf(w / 2f64.sqrt());
            let got = gaussian_mass_2d(&s, &spec()).unwrap();
            assert!((got - want).abs() < 1e-10, "w={w}: {got} vs {want}");
        }
        let d = ConvexBody2D::disk(1.3).unwrap();
        assert!((gaussian_mass_2d(&d, &spec()).unwrap() - (1.0 - (-0.845f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn perpendicular_strips_are_independent() {
        let a = ConvexBody2D::strip(0.4, 0.7).unwrap();
        let b = ConvexBody2D::strip(0.4 + FRAC_PI_2, 1.3).unwrap();
        let r = check_full_correlation_2d(&a, &b, &spec()).unwrap();
        assert!(r.margin.abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn self_correlation_is_probability_bound() {
        let k: ConvexBody2D = Polygon::regular(8, 1.1, 0.2).unwrap().into();
        let r = check_full_correlation_2d(&k, &k, &spec()).unwrap();
        let g = r.factors[1];
        assert!((r.margin - (g - g * g)).abs() < 1e-12);
        assert!(r.holds);
    }

    #[test]
    fn cone_inequality_trivial_cases() {
        let cone = Cone2D::new(-0.6, 0.6).unwrap();
        let w = ConvexBody2D::WholePlane;
        let r = check_cone_inequality(&cone, 0.0, 4, &w, &w, &spec()).unwrap();
        assert_eq!(r.margin, 0.0);
        let k: ConvexBody2D = Polygon::regular(6, 1.0, 0.1).unwrap().into();
        let r = check_cone_inequality(&cone, 0.2, 4, &w, &k, &spec()).unwrap();
        assert!(r.margin.abs() <= 1e-15 * r.lhs, "{r:?}");
        assert!(matches!(
            check_cone_inequality(&cone, 1.5, 4, &w, &k, &spec()),
            Err(Error::PhaseDomain { .. })
        ));
    }

    #[test]
    fn needle_form_matches_cone_form() {
        let cone = Cone2D::new(-0.3, 1.1).unwrap();
        let k1: ConvexBody2D = Polygon::regular(6, 1.2, 0.3).unwrap().into();
        let k2 = ConvexBody2D::strip(1.0, 0.6).unwrap();
        for n in 2..7 {
            let r = needle_cone_consistency(&cone, 0.4, n, &k1, &k2, &spec()).unwrap();
            assert!(r.consistent, "n={n}: {r:?}");
        }
        let w = ConvexBody2D::WholePlane;
        let r = needle_cone_consistency(&cone, 0.4, 3, &w, &w, &spec()).unwrap();
        assert_eq!((r.first, r.second, r.margin), (1.0, 1.0, 0.0));
        let zero = ConvexBody2D::disk(0.0).unwrap();
        assert!(matches!(
            needle_cone_consistency(&cone, 0.4, 3, &zero, &w, &spec()),
            Err(Error::DivisionByZero(_))
        ));
    }

    #[test]
    fn find_t0_trivial_and_empty() {
        let cone = Cone2D::new(-0.5, 0.5).unwrap();
        let w = ConvexBody2D::WholePlane;
        match find_t0(&cone, 4, &w, &w, 16, &spec()).unwrap() {
            T0Search::Found { t0, margin, .. } => assert_eq!((t0, margin), (0.0, 0.0)),
            other => panic!("{other:?}"),
        }
        let half = Cone2D::new(0.0, PI).unwrap();
        assert!(matches!(find_t0(&half, 3, &w, &w, 16, &spec()), Err(Error::EmptyAdmissibleSet)));
        assert!(matches!(find_t0(&cone, 4, &w, &w, 1, &spec()), Err(Error::Domain(_))));
    }

    #[test]
    fn empty_hunt_is_not_found() {
        let out = hunt_strip_counterexample(1, 0, &spec()).unwrap();
        assert_eq!(
            out,
            HuntOutcome::NotFound {
                min_ratio: None,
                best: None,
                evaluated: 0
            }
        );
    }

    #[test]
    fn small_hunt_finds_a_stable_witness() {
        let out = hunt_strip_counterexample(7, 400, &spec()).unwrap();
        let HuntOutcome::Found { witness, .. } = out else {
            panic!("{out:?}");
        };
        assert!(witness.ratio < 1.0);
        let tight = witness.instance.evaluate(&spec().tightened(10.0)).unwrap();
        assert!(tight.ratio() < 1.0);
    }
}
