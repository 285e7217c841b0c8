//! Deterministic scalar quadrature and the closed-form special integrals
//! consumed by the rest of the crate.
//!
//! The adaptive integrator is a global Gauss–Kronrod (7/15) scheme: the
//! segment with the largest error estimate is bisected until the summed
//! estimate drops below `max(abs_tol, rel_tol * |result|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Tolerances for [`integrate_interval`] and everything built on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(domain(format!("abs_tol must be positive, got {}", self.abs_tol)));
        }
        if !(self.rel_tol > 0.0) || !self.rel_tol.is_finite() {
            return Err(domain(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if self.max_subdivisions < 1 {
            return Err(domain("max_subdivisions must be at least 1"));
        }
        Ok(())
    }

    /// Both tolerances divided by `factor`, with proportionally more room to subdivide.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol / factor,
            rel_tol: self.rel_tol / factor,
            max_subdivisions: self.max_subdivisions.saturating_mul(2),
        }
    }
}

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1].
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        // Larger error first; ties broken by position so the order is total.
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod15<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = (fc * WGK[7]).abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        return Err(domain(format!("integrand is not finite on [{a}, {b}]")));
    }
    Ok(Segment { a, b, value, error })
}

/// Adaptive quadrature of a fallible integrand over `[a, b]`, with the
/// initial partition split at every point of `breaks` lying strictly inside.
pub fn try_integrate_with_breaks<F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a <= b) {
        return Err(domain(format!("integration bounds must satisfy a <= b, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > a && x < b && (x - a) > 1e-13 && (b - x) > 1e-13)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-13);

    let mut heap = BinaryHeap::new();
    let mut lo = a;
    for &c in cuts.iter().chain(std::iter::once(&b)) {
        heap.push(kronrod15(&mut f, lo, c)?);
        lo = c;
    }

    let mut subdivisions = 0;
    loop {
        let (total, total_err) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            // Sum in positional order so the result does not depend on heap layout.
            let mut segs: Vec<&Segment> = heap.iter().collect();
            segs.sort_by(|x, y| x.a.total_cmp(&y.a));
            return Ok(segs.iter().map(|s| s.value).sum());
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::SubdivisionLimit {
                max_subdivisions: spec.max_subdivisions,
                estimated_error: total_err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Segment cannot be split further in floating point.
            return Err(Error::SubdivisionLimit {
                max_subdivisions: spec.max_subdivisions,
                estimated_error: total_err,
            });
        }
        heap.push(kronrod15(&mut f, worst.a, mid)?);
        heap.push(kronrod15(&mut f, mid, worst.b)?);
        subdivisions += 1;
    }
}

/// Adaptive quadrature of a fallible integrand.
pub fn try_integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    try_integrate_with_breaks(f, a, b, &[], spec)
}

/// `∫_a^b f` by adaptive Gauss–Kronrod quadrature.
///
/// ```
/// use sphloc::numerics::{integrate_interval, QuadratureSpec};
/// let v = integrate_interval(|x| x.sin().powi(3), 0.0, std::f64::consts::FRAC_PI_2,
///                            &QuadratureSpec::default()).unwrap();
/// assert!((v - 2.0 / 3.0).abs() < 1e-12);
/// ```
pub fn integrate_interval<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), a, b, spec)
}

/// Like [`integrate_interval`] with known kinks of the integrand.
pub fn integrate_with_breaks<F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_with_breaks(|x| Ok(f(x)), a, b, breaks, spec)
}

/// `∫_a^b sin(x)^m dx` for `0 <= a <= b <= pi`.
pub fn sin_power_integral(m: u32, a: f64, b: f64) -> Result<f64> {
    let eps = 1e-12;
    if !(a >= -eps && a <= b && b <= PI + eps) {
        return Err(domain(format!("[{a}, {b}] is not a subinterval of [0, pi]")));
    }
    Ok(sin_power_between(m, a, b))
}

/// Composite 4 × 24-point Gauss–Legendre rule, for short intervals where the
/// reduction formulas lose digits to cancellation.
fn legendre_panels<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let (x, w) = RULE.get_or_init(|| gauss_legendre(24));
    let panels = 4;
    let h = (b - a) / f64::from(panels);
    (0..panels)
        .map(|p| {
            let c = a + h * (f64::from(p) + 0.5);
            0.5 * h * x.iter().zip(w).map(|(&xi, &wi)| wi * f(c + 0.5 * h * xi)).sum::<f64>()
        })
        .sum()
}

/// Value small next to the interval length: the recursion has cancelled.
fn cancelled(value: f64, a: f64, b: f64) -> bool {
    value.abs() < 1e-3 * (b - a).abs()
}

/// `∫_a^b sin(x)^m dx` on any interval, through the reduction formula.
pub fn sin_power_between(m: u32, a: f64, b: f64) -> f64 {
    let v = sin_power_reduction(m, a, b);
    if m >= 2 && cancelled(v, a, b) {
        return legendre_panels(|x| x.sin().powi(m as i32), a, b);
    }
    v
}

fn sin_power_reduction(m: u32, a: f64, b: f64) -> f64 {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut lower = b - a;
    let mut upper = 2.0 * mid.sin() * half.sin();
    if m == 0 {
        return lower;
    }
    // ∫ sin^k = -sin^{k-1} cos / k + (k-1)/k ∫ sin^{k-2}
    for k in 2..=m {
        let kf = f64::from(k);
        let boundary = -(sb.powi(k as i32 - 1) * cb - sa.powi(k as i32 - 1) * ca) / kf;
        let next = boundary + (kf - 1.0) / kf * lower;
        lower = upper;
        upper = next;
    }
    upper
}

/// `∫_a^b cos(x)^m dx` on any interval.
pub fn cos_power_between(m: u32, a: f64, b: f64) -> f64 {
    let v = cos_power_reduction(m, a, b);
    if m >= 2 && cancelled(v, a, b) {
        return legendre_panels(|x| x.cos().powi(m as i32), a, b);
    }
    v
}

fn cos_power_reduction(m: u32, a: f64, b: f64) -> f64 {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut lower = b - a;
    let mut upper = 2.0 * mid.cos() * half.sin();
    if m == 0 {
        return lower;
    }
    // ∫ cos^k = cos^{k-1} sin / k + (k-1)/k ∫ cos^{k-2}
    for k in 2..=m {
        let kf = f64::from(k);
        let boundary = (cb.powi(k as i32 - 1) * sb - ca.powi(k as i32 - 1) * sa) / kf;
        let next = boundary + (kf - 1.0) / kf * lower;
        lower = upper;
        upper = next;
    }
    upper
}

/// `Γ(n/2)` for a positive integer `n`, exact up to rounding.
pub fn gamma_half(n: u32) -> f64 {
    assert!(n >= 1, "gamma_half needs n >= 1");
    let (mut value, mut arg) = if n.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = f64::from(n) / 2.0;
    while arg < target {
        value *= arg;
        arg += 1.0;
    }
    value
}

/// `∫_0^∞ r^{n-1} e^{-r²/2} dr = 2^{n/2-1} Γ(n/2)`.
pub fn gaussian_radial_total(n: u32) -> f64 {
    assert!(n >= 1, "gaussian radial weight needs n >= 1");
    let mut value = if n.is_multiple_of(2) { 1.0 } else { FRAC_PI_2.sqrt() };
    let mut k = if n.is_multiple_of(2) { 2 } else { 1 };
    while k < n {
        value *= f64::from(k);
        k += 2;
    }
    value
}

/// Upper tail `∫_x^∞ r^{n-1} e^{-r²/2} dr`, by upward recurrence (all terms positive).
fn gaussian_radial_tail(n: u32, x: f64) -> f64 {
    let e = (-0.5 * x * x).exp();
    let mut tail = if n.is_multiple_of(2) {
        e
    } else {
        FRAC_PI_2.sqrt() * libm::erfc(x / SQRT_2)
    };
    let mut k = if n.is_multiple_of(2) { 2 } else { 1 };
    // T_{k+2} = k T_k + x^k e^{-x²/2}
    while k < n {
        tail = f64::from(k) * tail + x.powi(k as i32) * e;
        k += 2;
    }
    tail
}

/// `∫_0^upper r^{n-1} e^{-r²/2} dr`; an infinite `upper` uses the closed form.
///
/// Small arguments use the power series of the lower incomplete gamma
/// function, large ones subtract the positive upper tail from the total.
pub fn gaussian_radial_integral(n: u32, upper: f64) -> Result<f64> {
    if n < 1 {
        return Err(domain("gaussian radial weight needs n >= 1"));
    }
    if upper.is_nan() || upper < 0.0 {
        return Err(domain(format!("upper limit must be nonnegative, got {upper}")));
    }
    Ok(gaussian_radial_unchecked(n, upper))
}

pub(crate) fn gaussian_radial_unchecked(n: u32, upper: f64) -> f64 {
    if upper == f64::INFINITY {
        return gaussian_radial_total(n);
    }
    if upper == 0.0 {
        return 0.0;
    }
    let x2 = upper * upper;
    let nf = f64::from(n);
    if x2 < nf + 2.0 {
        // x^n e^{-x²/2} Σ_k x^{2k} / (n (n+2) ... (n+2k))
        let mut term = 1.0 / nf;
        let mut sum = term;
        let mut denom = nf;
        for _ in 0..500 {
            denom += 2.0;
            term *= x2 / denom;
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        upper.powi(n as i32) * (-0.5 * x2).exp() * sum
    } else {
        gaussian_radial_total(n) - gaussian_radial_tail(n, upper)
    }
}

/// `∫_0^upper r^p dr = upper^{p+1}/(p+1)` for `p > -1`.
pub fn power_radial_integral(p: f64, upper: f64) -> Result<f64> {
    if !(p > -1.0) {
        return Err(domain(format!("power weight exponent must exceed -1, got {p}")));
    }
    if upper.is_infinite() {
        return Err(Error::NonIntegrable(format!("r^{p} over an unbounded ray")));
    }
    if upper.is_nan() || upper < 0.0 {
        return Err(domain(format!("upper limit must be nonnegative, got {upper}")));
    }
    Ok(power_radial_unchecked(p, upper))
}

pub(crate) fn power_radial_unchecked(p: f64, upper: f64) -> f64 {
    let e = p + 1.0;
    if e == e.round() && e.abs() < 64.0 {
        upper.powi(e as i32) / e
    } else {
        upper.powf(e) / e
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}
