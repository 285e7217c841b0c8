//! Acceptance run: one line per criterion.
//!
//! The process fails on any unexpected failure. A criterion that fails for a
//! mathematical reason is printed as FAIL together with its evidence, and
//! the evidence itself is checked (see `t0_existence`).

mod common;

use std::f64::consts::{FRAC_PI_2, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::Rng;
use serde_json::Value;
use sphloc::conemeasure::{brute_force_cone_measure, cone_body_measure, ConeMeasure2D, RadialWeight};
use sphloc::convex2d::{intersect, random_symmetric_polygon, reference_volume_product, Cone2D, ConvexBody2D, VolumePreset};
use sphloc::gcc::{
    check_cone_inequality, check_full_correlation_2d, cone_factors, find_t0, gcc_cone_measure,
    hunt_strip_counterexample, needle_cone_consistency, HuntOutcome, T0Search, DEFAULT_HUNT_BUDGET,
};
use sphloc::mahler::{alpha_estimate, alpha_term, mahler_bound, AlphaSearchConfig};
use sphloc::needle::{meridian_fubini_check, SphereFunction};
use sphloc::numerics::{gamma_half, QuadratureSpec};
use sphloc::waist::{tube_or_full, tube_volume_round, waist_bound, Modulus, WaistParams};

const HUNT_SEED: u64 = 2024;

enum Verdict {
    Pass(String),
    Fail(String),
    /// Fails for a documented mathematical reason; the evidence was verified.
    KnownFail(String),
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn fubini() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in [2, 3] {
        for name in ["const:1.5", "coord:0", "coord:2", "coord2:1", "zonal", "poly:7", "poly:8"] {
            let f: SphereFunction = name.parse().unwrap();
            let bound = f.bind(n).unwrap();
            let r = meridian_fubini_check(n, |x| bound.eval(x), 32, &spec()).unwrap();
            worst = worst.max(r.margin);
            count += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 1e-6 && secs < 60.0, format!("{count} checks, worst margin {worst:.2e}, {secs:.1} s"))
}

fn polar_involution() -> Verdict {
    let mut rng = common::rng(2);
    let (mut hausdorff, mut product): (f64, f64) = (0.0, 0.0);
    for _ in 0..200 {
        let half = rng.random_range(2..=16);
        let body = ConvexBody2D::Polygon(random_symmetric_polygon(&mut rng, half, 0.3, 3.0).unwrap());
        let dual = body.polar_dual().unwrap();
        let back = dual.polar_dual().unwrap();
        let (ConvexBody2D::Polygon(p), ConvexBody2D::Polygon(q)) = (&body, &back) else { unreachable!() };
        let one_way = |a: &[[f64; 2]], b: &[[f64; 2]]| {
            a.iter()
                .map(|v| b.iter().map(|w| (v[0] - w[0]).hypot(v[1] - w[1])).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        hausdorff = hausdorff.max(one_way(p.vertices(), q.vertices())).max(one_way(q.vertices(), p.vertices()));
        for i in 0..360 {
            let t = f64::from(i) * PI / 180.0;
            product = product.max((dual.radial_function(t) * body.support_function(t).unwrap() - 1.0).abs());
        }
    }
    check(
        hausdorff <= 1e-9 && product <= 1e-10,
        format!("200 polygons, Hausdorff {hausdorff:.1e}, |rho h - 1| {product:.1e}"),
    )
}

fn cone_oracle() -> Verdict {
    let mut rng = common::rng(3);
    let tight = common::tight();
    let (mut brute, mut additive, mut scaling): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..50 {
        let (cone, psi) = common::admissible_cone(&mut rng, 0.0, PI);
        let body = common::bounded_body(&mut rng);
        let p = rng.random_range(0.0..4.0);
        let weight = if rng.random_bool(0.5) {
            RadialWeight::Gaussian { n: rng.random_range(2..=7) }
        } else {
            RadialWeight::Power { p }
        };
        let cm = ConeMeasure2D::new(cone, psi, rng.random_range(0..=5), weight).unwrap();
        let exact = cone_body_measure(&cm, &body, &tight).unwrap();
        brute = brute.max((exact - brute_force_cone_measure(&cm, &body, 2000).unwrap()).abs());

        let mid = cone.lo() + cone.width() * rng.random_range(0.0..=1.0);
        let left = cm.with_cone(Cone2D::new(cone.lo(), mid).unwrap()).unwrap();
        let right = cm.with_cone(Cone2D::new(mid, cone.hi()).unwrap()).unwrap();
        let split = cone_body_measure(&left, &body, &tight).unwrap() + cone_body_measure(&right, &body, &tight).unwrap();
        additive = additive.max((exact - split).abs());

        let power = ConeMeasure2D::new(cone, psi, cm.exponent(), RadialWeight::Power { p }).unwrap();
        let s = rng.random_range(0.5..2.0);
        let base = cone_body_measure(&power, &body, &tight).unwrap();
        let grown = cone_body_measure(&power, &body.scaled(s).unwrap(), &tight).unwrap();
        scaling = scaling.max((grown - base * s.powf(p + 1.0)).abs() / (1.0 + grown));
    }
    check(
        brute <= 1e-4 && additive <= 1e-10 && scaling <= 1e-9,
        format!("50 instances at 2000x2000, worst {brute:.1e}; additivity {additive:.1e}, scaling {scaling:.1e}"),
    )
}

fn disk_alpha() -> Verdict {
    let mut rng = common::rng(4);
    let mut worst: f64 = 0.0;
    for n in 2..=6u32 {
        for _ in 0..20 {
            let theta = rng.random_range(0.0..=PI);
            let (lo, hi) = (-FRAC_PI_2 - theta, FRAC_PI_2 - theta);
            let len = rng.random_range(0.05..=PI);
            let a = lo + rng.random_range(0.0..=(hi - lo - len));
            let r = rng.random_range(1.0 + 1e-9..=f64::from(n + 1).sqrt());
            let v = alpha_term(n, theta, &Cone2D::new(a, a + len).unwrap(), &ConvexBody2D::disk(r).unwrap(), &spec()).unwrap();
            worst = worst.max((v - 1.0 / f64::from((n + 1) * (n + 1))).abs());
        }
    }
    check(worst <= 1e-8, format!("100 terms, worst deviation {worst:.1e}"))
}

fn ball_chain() -> Verdict {
    let mut worst: f64 = 0.0;
    for n in [4u32, 5, 6] {
        let b = mahler_bound(n, 1.0 / f64::from(n * n), false).unwrap().bound;
        let g = gamma_half(n + 2);
        let closed = PI.powi(n as i32) / (g * g);
        let ball = reference_volume_product(VolumePreset::Ball, n).unwrap();
        worst = worst.max((b - closed).abs() / closed).max((b - ball).abs() / ball);
    }
    check(worst <= 1e-8, format!("n = 4, 5, 6, worst relative gap {worst:.1e}"))
}

fn mahler_sanity() -> Verdict {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [4u32, 5] {
        let est = alpha_estimate(&AlphaSearchConfig::new(n - 1), &spec()).unwrap();
        let bound = mahler_bound(n, est.alpha, false).unwrap().bound;
        let cube = reference_volume_product(VolumePreset::Cube, n).unwrap();
        ok &= est.alpha <= 1.0 / f64::from(n * n) + 1e-8 && bound <= cube * (1.0 + 1e-6);
        parts.push(format!("n={n}: alpha({}) = {:.6}, bound {bound:.4} <= cube {cube:.4}", n - 1, est.alpha));
    }
    let secs = start.elapsed().as_secs_f64();
    check(ok && secs < 300.0, format!("{}; {secs:.1} s", parts.join("; ")))
}

fn waist_formula() -> Verdict {
    let grid: Vec<f64> = (0..=180).map(|i| 0.01 * f64::from(i)).collect();
    let (mut zero, mut monotone, mut above): (f64, bool, f64) = (0.0, true, f64::NEG_INFINITY);
    for n in 2..=8u32 {
        for k in 1..n {
            for space in [Modulus::L2, Modulus::Lp { p: 4.0 }] {
                let params = WaistParams::new(n, k, space.clone()).unwrap();
                zero = zero.max(waist_bound(&params, 0.0).unwrap().abs());
                let mut prev = 0.0;
                for &e in &grid {
                    let w = waist_bound(&params, e).unwrap();
                    monotone &= w >= prev;
                    prev = w;
                    if space == Modulus::L2 {
                        above = above.max(w - tube_or_full(n, k, e, &spec()).unwrap());
                    }
                }
            }
        }
    }
    let mut oracle: f64 = 0.0;
    for (n, k, e, expected) in common::WAIST_ORACLE.into_iter().skip(1) {
        oracle = oracle.max((waist_bound(&WaistParams::new(n, k, Modulus::L2).unwrap(), e).unwrap() - expected).abs());
    }
    check(
        zero == 0.0 && monotone && above <= 1e-9 && oracle <= 1e-10,
        format!("w(0) = {zero}, monotone {monotone}, max(w - tube) {above:.1e}, oracle gap {oracle:.1e} on 20 points"),
    )
}

fn tube_identities() -> Verdict {
    let (mut ends, mut complement): (f64, f64) = (0.0, 0.0);
    for n in 2..=8u32 {
        for k in 1..n {
            ends = ends
                .max((tube_volume_round(n, k, FRAC_PI_2, &spec()).unwrap() - 1.0).abs())
                .max(tube_volume_round(n, k, 0.0, &spec()).unwrap().abs());
            for i in 0..=24 {
                let e = FRAC_PI_2 * f64::from(i) / 24.0;
                let s = tube_volume_round(n, k, e, &spec()).unwrap()
                    + tube_volume_round(n, n - k + 1, FRAC_PI_2 - e, &spec()).unwrap();
                complement = complement.max((s - 1.0).abs());
            }
        }
    }
    check(
        ends == 0.0 && complement <= 1e-10,
        format!("endpoints exact: {}, complementary identity {complement:.1e}", ends == 0.0),
    )
}

fn full_correlation() -> Verdict {
    let mut rng = common::rng(9);
    let mut worst = f64::INFINITY;
    for _ in 0..500 {
        let [k1, k2] = [(); 2].map(|_| ConvexBody2D::strip(rng.random_range(0.0..PI), rng.random_range(0.05..3.0)).unwrap());
        worst = worst.min(check_full_correlation_2d(&k1, &k2, &spec()).unwrap().margin);
    }
    let mut perp: f64 = 0.0;
    for _ in 0..20 {
        let a = rng.random_range(0.0..PI);
        let k1 = ConvexBody2D::strip(a, rng.random_range(0.05..3.0)).unwrap();
        let k2 = ConvexBody2D::strip(a + FRAC_PI_2, rng.random_range(0.05..3.0)).unwrap();
        perp = perp.max(check_full_correlation_2d(&k1, &k2, &spec()).unwrap().margin.abs());
    }
    check(
        worst >= -1e-10 && perp <= 1e-9,
        format!("500 strip pairs, min margin {worst:.2e}; perpendicular |margin| {perp:.1e}"),
    )
}

fn needle_translation() -> Verdict {
    let mut rng = common::rng(10);
    let (mut worst, mut done, mut skipped): (f64, usize, usize) = (0.0, 0, 0);
    while done < 100 {
        let (cone, t0) = common::admissible_cone(&mut rng, 0.05, PI);
        let n = rng.random_range(3..=7);
        let k1 = common::gcc_body(&mut rng);
        let k2 = common::gcc_body(&mut rng);
        let f = cone_factors(&cone, t0, n, &k1, &k2, &spec()).unwrap();
        if f.iter().any(|x| *x < 1e-8) {
            skipped += 1;
            continue;
        }
        worst = worst.max(needle_cone_consistency(&cone, t0, n, &k1, &k2, &spec()).unwrap().margin);
        done += 1;
    }
    check(worst <= 1e-8, format!("100 instances ({skipped} with vanishing factors redrawn), worst relative gap {worst:.1e}"))
}

fn hunt() -> Verdict {
    let start = Instant::now();
    match hunt_strip_counterexample(HUNT_SEED, DEFAULT_HUNT_BUDGET, &spec()).unwrap() {
        HuntOutcome::Found { witness, evaluated } => {
            let brute = witness.instance.brute_force_ratio(2000).unwrap();
            let tight = witness.instance.evaluate(&common::tight()).unwrap().ratio();
            let i = witness.instance;
            check(
                witness.ratio < 1.0 - 1e-3 && brute < 1.0 - 1e-3 && tight < 1.0 - 1e-3,
                format!(
                    "seed {HUNT_SEED}, {evaluated} evaluated, ratio {:.3e} (brute force {brute:.3e}); n={}, t0={:.4}, cone [{:.4}, {:.4}], strips {:?}; {:.1} s",
                    witness.ratio,
                    i.n,
                    i.t0,
                    i.cone.lo(),
                    i.cone.hi(),
                    i.strips.map(|s| (s.normal_angle, s.half_width)),
                    start.elapsed().as_secs_f64()
                ),
            )
        }
        HuntOutcome::NotFound { min_ratio, evaluated, .. } => {
            Verdict::Fail(format!("NotFound after {evaluated}; minimum ratio {min_ratio:?}"))
        }
    }
}

fn t0_existence() -> Verdict {
    let mut rng = common::rng(12);
    let mut flagged = Vec::new();
    let mut unconfirmed = Vec::new();
    for index in 0..200 {
        let (cone, _) = common::admissible_cone(&mut rng, 0.1, PI);
        let n = rng.random_range(3..=6);
        let k1 = common::gcc_body(&mut rng);
        let k2 = common::gcc_body(&mut rng);
        let T0Search::NotFound { best_t0, best_margin, .. } = find_t0(&cone, n, &k1, &k2, 512, &spec()).unwrap() else {
            continue;
        };
        // a genuine violation survives tighter quadrature and the brute-force grid
        let tight = common::tight();
        let ratio = check_cone_inequality(&cone, best_t0, n, &k1, &k2, &tight).unwrap().ratio();
        let still_fails = matches!(find_t0(&cone, n, &k1, &k2, 512, &tight).unwrap(), T0Search::NotFound { .. });
        let cm = gcc_cone_measure(&cone, best_t0, n).unwrap();
        let b = |body: &ConvexBody2D| brute_force_cone_measure(&cm, body, 2000).unwrap();
        let brute = b(&ConvexBody2D::WholePlane) * b(&intersect(&k1, &k2)) / (b(&k1) * b(&k2));
        let line = format!(
            "#{index}: n={n}, cone [{:.4}, {:.4}] (width {:.4}), {} & {}, best t0 {best_t0:.4}, margin {best_margin:.3e}, 1 - ratio {:.3e} (brute force {:.3e})",
            cone.lo(),
            cone.hi(),
            cone.width(),
            k1.kind(),
            k2.kind(),
            1.0 - ratio,
            1.0 - brute,
        );
        if still_fails && ratio < 1.0 && brute < 1.0 {
            flagged.push(line);
        } else {
            unconfirmed.push(line);
        }
    }
    if !unconfirmed.is_empty() {
        return Verdict::Fail(format!("unconfirmed failures:\n    {}", unconfirmed.join("\n    ")));
    }
    if flagged.is_empty() {
        Verdict::Pass("200 instances, t0 found in every one".into())
    } else {
        Verdict::KnownFail(format!(
            "{} of 200 instances have no admissible t0 (confirmed by tight quadrature and brute force):\n    {}",
            flagged.len(),
            flagged.join("\n    ")
        ))
    }
}

fn cli_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let k1 = dir.path().join("k1.json");
    let k2 = dir.path().join("k2.json");
    std::fs::write(&k1, r#"{"type": "polygon", "vertices": [[1.5, 0.2], [0.3, 1.1], [-1.0, 0.9]]}"#).unwrap();
    std::fs::write(&k2, r#"{"type": "strip", "normal_angle": 2.0, "half_width": 0.6}"#).unwrap();
    let (k1, k2) = (k1.to_str().unwrap(), k2.to_str().unwrap());
    let runs: Vec<Vec<&str>> = vec![
        vec!["waist", "--n", "6", "--k", "2", "--space", "lp:4", "--eps", "0:1.8:0.1"],
        vec!["tube", "--n", "4", "--k", "1", "--eps", "0:1.6:0.1"],
        vec!["needle-integrate", "--n", "4", "--k", "2", "--phase", "0.3", "--support", "0,2", "--f", "poly:1,2,3"],
        vec!["needle-fubini", "--n", "3", "--f", "zonal", "--directions", "8"],
        vec!["gcc-check", "--k1", k1, "--k2", k2],
        vec!["gcc-cone", "--cone", "-0.7,0.4", "--t0", "0.2", "--n", "5", "--k1", k1, "--k2", k2],
        vec!["gcc-strip-hunt", "--seed", "77", "--budget", "200", "--confirm-grid", "100"],
        vec!["gcc-t0", "--cone", "-0.5,0.5", "--n", "4", "--k1", k1, "--k2", k2, "--grid", "128"],
        vec!["mahler-alpha", "--n", "3", "--samples", "3", "--theta-grid", "5", "--interval-grid", "10", "--seed", "1"],
        vec!["mahler-bound", "--n", "6", "--alpha", "0.02"],
        vec!["bodies-validate", k1, k2],
    ];
    let mut bad = Vec::new();
    for args in &runs {
        let results = [(); 2].map(|_| {
            let out = Command::new(env!("CARGO_BIN_EXE_sphloc")).args(args).output().unwrap();
            let v: Value = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
            (out.status.code(), serde_json::to_string(&v["results"]).unwrap())
        });
        if results[0] != results[1] || !matches!(results[0].0, Some(0 | 3)) || results[0].1 == "null" {
            bad.push(args[0]);
        }
    }
    check(bad.is_empty(), format!("{} subcommands run twice, differing: {bad:?}", runs.len()))
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("Fubini/localisation consistency", fubini),
        ("polar-dual involution", polar_involution),
        ("cone-measure oracle", cone_oracle),
        ("disk alpha identity", disk_alpha),
        ("ball equality chain", ball_chain),
        ("Mahler sanity", mahler_sanity),
        ("waist formula", waist_formula),
        ("tube identities", tube_identities),
        ("full-dimensional correlation", full_correlation),
        ("needle/cone translation", needle_translation),
        ("strip counterexample hunt", hunt),
        ("t0 existence", t0_existence),
        ("CLI determinism", cli_determinism),
    ];
    let mut unexpected = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let verdict = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Verdict::Fail(format!("panicked: {msg}"))
        });
        let (tag, detail) = match verdict {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::KnownFail(d) => ("FAIL", format!("{d}\n    (genuine counterexamples, see the t0 chapter of the guide)")),
            Verdict::Fail(d) => {
                unexpected += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:2} {tag} {name}: {detail}", i + 1);
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    }
}
