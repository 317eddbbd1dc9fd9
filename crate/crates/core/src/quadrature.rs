//! Adaptive Gauss–Kronrod integration over finite intervals and the real
//! line, iterated 2-D integration, and FFT-based spectral convolution.
//!
//! Real-line integrals are mapped onto `(−π/2, π/2)` with `ω = h·tan θ`.
//! Every integrand in this crate decays at least like `ω⁻²`, so the mapped
//! integrand stays bounded at the endpoints and no tail term is needed.
//! A Lorentzian of half-width `h` becomes constant under this map.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{SpectralDensity, SpectrumKind};

// 21-point Kronrod abscissae and weights with the embedded 10-point Gauss rule.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208284116148,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Scalar types the integrator can accumulate.
pub trait QuadValue: Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Value paired with the error of the inner integral that produced it.
#[derive(Debug, Clone, Copy)]
struct Carried<T> {
    value: T,
    error: f64,
}

impl<T: QuadValue> Add for Carried<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Carried { value: self.value + o.value, error: self.error + o.error }
    }
}

impl<T: QuadValue> Sub for Carried<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Carried { value: self.value - o.value, error: self.error - o.error }
    }
}

impl<T: QuadValue> Mul<f64> for Carried<T> {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Carried { value: self.value * k, error: self.error * k }
    }
}

impl<T: QuadValue> QuadValue for Carried<T> {
    fn zero() -> Self {
        Carried { value: T::zero(), error: 0.0 }
    }
    fn magnitude(&self) -> f64 {
        self.value.magnitude()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Scale `h` of the real-line map `ω = h·tan θ`; roughly the width of the integrand.
    pub scale: f64,
    /// Evaluate the 21 nodes of each panel in parallel. Summation order is fixed either way.
    pub parallel: bool,
}

impl Default for IntegrationSpec {
    fn default() -> Self {
        IntegrationSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_subdivisions: 4000,
            scale: 1.0,
            parallel: false,
        }
    }
}

impl IntegrationSpec {
    pub fn with_tolerance(rel_tol: f64) -> Self {
        IntegrationSpec { rel_tol, ..Default::default() }
    }

    pub fn scaled(self, scale: f64) -> Self {
        IntegrationSpec { scale, ..self }
    }

    pub fn parallel(self, parallel: bool) -> Self {
        IntegrationSpec { parallel, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidParams("tolerances must be > 0".into()));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::InvalidParams(format!("integration scale must be > 0, got {}", self.scale)));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParams("max_subdivisions must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    abs_value: f64,
}

fn kronrod_panel<T, F>(f: &F, a: f64, b: f64, parallel: bool) -> Panel<T>
where
    T: QuadValue,
    F: Fn(f64) -> T + Sync,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    // nodes ordered: center, then ± pairs
    let mut nodes = [0.0; 21];
    nodes[0] = center;
    for j in 0..10 {
        nodes[1 + 2 * j] = center - half * XGK[j];
        nodes[2 + 2 * j] = center + half * XGK[j];
    }
    let vals: Vec<T> = if parallel {
        nodes.par_iter().map(|&x| f(x)).collect()
    } else {
        nodes.iter().map(|&x| f(x)).collect()
    };

    let f_center = vals[0];
    let mut kronrod = f_center * WGK[10];
    let mut gauss = T::zero();
    let mut res_abs = f_center.magnitude() * WGK[10];
    for j in 0..10 {
        let (lo, hi) = (vals[1 + 2 * j], vals[2 + 2 * j]);
        let sum = lo + hi;
        kronrod = kronrod + sum * WGK[j];
        res_abs += WGK[j] * (lo.magnitude() + hi.magnitude());
        if j % 2 == 1 {
            gauss = gauss + sum * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut res_asc = WGK[10] * (f_center - mean).magnitude();
    for j in 0..10 {
        res_asc += WGK[j] * ((vals[1 + 2 * j] - mean).magnitude() + (vals[2 + 2 * j] - mean).magnitude());
    }

    let value = kronrod * half;
    let abs_half = half.abs();
    res_abs *= abs_half;
    res_asc *= abs_half;
    let mut error = (kronrod - gauss).magnitude() * abs_half;
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel { a, b, value, error, abs_value: res_abs }
}

fn adaptive<T, F>(f: &F, breaks: &[f64], spec: &IntegrationSpec) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T + Sync,
{
    spec.validate()?;
    let mut panels: Vec<Panel<T>> = breaks
        .windows(2)
        .map(|w| kronrod_panel(f, w[0], w[1], spec.parallel))
        .collect();
    let mut evaluations = 21 * panels.len();

    loop {
        let total = panels.iter().fold(T::zero(), |acc, p| acc + p.value);
        let error: f64 = panels.iter().map(|p| p.error).sum();
        // roundoff floor: a cancelling integrand cannot beat the error on ∫|f|
        let floor = 100.0 * f64::EPSILON * panels.iter().map(|p| p.abs_value).sum::<f64>();
        let tol = spec.abs_tol.max(spec.rel_tol * total.magnitude()).max(floor);
        if !total.magnitude().is_finite() {
            return Err(Error::NonConvergence {
                subdivisions: panels.len(),
                value: total.magnitude(),
                error,
            });
        }
        if error <= tol {
            return Ok(Estimate { value: total, error, evaluations });
        }
        if panels.len() >= spec.max_subdivisions {
            return Err(Error::NonConvergence {
                subdivisions: panels.len(),
                value: total.magnitude(),
                error,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let Panel { a, b, .. } = panels[worst];
        let mid = 0.5 * (a + b);
        if !(mid > a && mid < b) || (b - a) <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            // cannot refine further; accept if the remaining error is at roundoff level
            if error <= 1e3 * tol {
                return Ok(Estimate { value: total, error, evaluations });
            }
            return Err(Error::NonConvergence {
                subdivisions: panels.len(),
                value: total.magnitude(),
                error,
            });
        }
        let left = kronrod_panel(f, a, mid, spec.parallel);
        let right = kronrod_panel(f, mid, b, spec.parallel);
        evaluations += 42;
        panels[worst] = left;
        panels.insert(worst + 1, right);
    }
}

/// Integral over `[a, b]`.
pub fn integrate_interval<T, F>(f: F, a: f64, b: f64, spec: &IntegrationSpec) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T + Sync,
{
    if a == b {
        return Ok(Estimate { value: T::zero(), error: 0.0, evaluations: 0 });
    }
    adaptive(&f, &[a, b], spec)
}

/// Panel boundaries in θ: the map scale and a few decades either side.
fn line_breaks() -> Vec<f64> {
    let mut b = vec![-FRAC_PI_2];
    for r in [-100.0_f64, -10.0, -3.0, -1.0, -0.3, 0.0, 0.3, 1.0, 3.0, 10.0, 100.0] {
        b.push(r.atan());
    }
    b.push(FRAC_PI_2);
    b
}

/// Integral over the whole real line.
pub fn integrate_1d<T, F>(f: F, spec: &IntegrationSpec) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T + Sync,
{
    integrate_1d_with_points(f, spec, &[])
}

/// Real-line integral with extra panel boundaries at the given frequencies,
/// for integrands with features far from the map scale.
pub fn integrate_1d_with_points<T, F>(f: F, spec: &IntegrationSpec, points: &[f64]) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T + Sync,
{
    spec.validate()?;
    let h = spec.scale;
    let mut breaks = line_breaks();
    breaks.extend(points.iter().filter(|p| p.is_finite()).map(|p| (p / h).atan()));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 4.0 * f64::EPSILON);
    let mapped = |theta: f64| {
        let (s, c) = theta.sin_cos();
        if c <= 0.0 {
            return T::zero();
        }
        f(h * s / c) * (h / (c * c))
    };
    adaptive(&mapped, &breaks, spec)
}

/// Iterated integral over the plane: `∫ dx ∫ dy f(x, y)`.
///
/// The inner integral runs under `inner`; its error estimates are integrated
/// along with the value and added to the outer error.
pub fn integrate_2d<T, F>(f: F, outer: &IntegrationSpec, inner: &IntegrationSpec) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64, f64) -> T + Sync,
{
    inner.validate()?;
    let failure: OnceLock<Error> = OnceLock::new();
    let inner_evals = std::sync::atomic::AtomicUsize::new(0);
    let row = |x: f64| -> Carried<T> {
        match integrate_1d(|y| f(x, y), inner) {
            Ok(e) => {
                inner_evals.fetch_add(e.evaluations, std::sync::atomic::Ordering::Relaxed);
                Carried { value: e.value, error: e.error }
            }
            Err(e) => {
                let _ = failure.set(e);
                Carried::zero()
            }
        }
    };
    let est = integrate_1d(row, outer)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(Estimate {
        value: est.value.value,
        error: est.error + est.value.error.abs(),
        evaluations: est.evaluations + inner_evals.into_inner(),
    })
}

/// Result of [`spectral_convolution`].
#[derive(Debug, Clone)]
pub struct Convolution {
    pub density: SpectralDensity,
    /// Set when an input exceeds `1e-6` of its peak at the grid edge.
    pub tail_truncated: bool,
}

pub const EDGE_DECAY_LIMIT: f64 = 1e-6;

/// `(f * g)(ω) = (2π)⁻¹ ∫ f(ω − ω′) g(ω′) dω′` sampled on the common grid.
///
/// Computed as a zero-padded linear convolution by FFT; the result is exact
/// for the rectangle rule on the grid.
pub fn spectral_convolution(f: &SpectralDensity, g: &SpectralDensity) -> Result<Convolution> {
    if f.grid != g.grid || f.values.len() != g.values.len() {
        return Err(Error::GridMismatch);
    }
    let n = f.values.len();
    let len = (2 * n - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(len);
    let inverse = planner.plan_fft_inverse(len);

    let padded = |v: &[f64]| {
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for (b, x) in buf.iter_mut().zip(v) {
            b.re = *x;
        }
        buf
    };
    let mut fa = padded(&f.values);
    let mut ga = padded(&g.values);
    forward.process(&mut fa);
    forward.process(&mut ga);
    for (x, y) in fa.iter_mut().zip(&ga) {
        *x *= *y;
    }
    inverse.process(&mut fa);

    let center = f.grid.center();
    let norm = f.grid.spacing() / (2.0 * PI) / len as f64;
    let nonneg = f.is_nonnegative() && g.is_nonnegative();
    let values = (0..n)
        .map(|i| {
            let v = fa[i + center].re * norm;
            if nonneg {
                v.max(0.0)
            } else {
                v
            }
        })
        .collect();
    let kind = match (f.kind, g.kind) {
        (SpectrumKind::Commutator, SpectrumKind::Population) | (SpectrumKind::Population, SpectrumKind::Commutator) => {
            SpectrumKind::ProductNoise
        }
        _ => SpectrumKind::Other,
    };
    Ok(Convolution {
        density: SpectralDensity { grid: f.grid, values, kind },
        tail_truncated: f.edge_ratio() > EDGE_DECAY_LIMIT || g.edge_ratio() > EDGE_DECAY_LIMIT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FrequencyGrid;
    use approx::assert_relative_eq;

    fn lorentzian(gamma: f64) -> impl Fn(f64) -> f64 + Sync {
        move |w| 2.0 * gamma / (w * w + gamma * gamma)
    }

    #[test]
    fn polynomial_is_exact() {
        let est = integrate_interval(|x: f64| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, &Default::default()).unwrap();
        // ∫ = [x⁶/6 − x³ + x] from −1 to 2 = (64/6 − 8 + 2) − (1/6 + 1 − 1)
        assert_relative_eq!(est.value, 64.0 / 6.0 - 6.0 - 1.0 / 6.0, max_relative = 1e-14);
    }

    #[test]
    fn lorentzian_normalization() {
        let spec = IntegrationSpec::default();
        let est = integrate_1d(lorentzian(0.11), &spec).unwrap();
        assert_relative_eq!(est.value / (2.0 * PI), 1.0, epsilon = 1e-8);
        // far-off map scale still converges
        let est = integrate_1d(lorentzian(0.11), &spec.scaled(30.0)).unwrap();
        assert_relative_eq!(est.value / (2.0 * PI), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let est = integrate_1d(|w: f64| w / (1.0 + w.powi(4)), &IntegrationSpec::default()).unwrap();
        assert!(est.value.abs() < 1e-12, "{}", est.value);
    }

    #[test]
    fn complex_integrand() {
        // ∫ e^{iω}/(1+ω²)² dω = π/e
        let f = |w: f64| Complex64::new(w.cos(), w.sin()) / (1.0 + w * w).powi(2);
        let est = integrate_1d(f, &IntegrationSpec::with_tolerance(1e-9)).unwrap();
        assert_relative_eq!(est.value.re, PI / 1f64.exp(), max_relative = 1e-8);
        assert!(est.value.im.abs() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let spec = IntegrationSpec { max_subdivisions: 3, rel_tol: 1e-14, ..Default::default() };
        let r = integrate_interval(|x: f64| (50.0 * x).sin().abs(), 0.0, 10.0, &spec);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn separable_2d_product() {
        let (g1, g2) = (0.3, 2.0);
        let one = integrate_1d(lorentzian(g1), &Default::default()).unwrap().value;
        let two = integrate_1d(lorentzian(g2), &Default::default()).unwrap().value;
        let est = integrate_2d(
            |x, y| lorentzian(g1)(x) * lorentzian(g2)(y),
            &IntegrationSpec::with_tolerance(1e-9),
            &IntegrationSpec::with_tolerance(1e-11),
        )
        .unwrap();
        assert_relative_eq!(est.value, one * two, max_relative = 1e-6);
    }

    #[test]
    fn zero_integrand_2d() {
        let est = integrate_2d(|_, _| 0.0, &Default::default(), &Default::default()).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn parallel_evaluation_is_bit_identical() {
        let f = |w: f64| (1.0 + w.sin().powi(2)) / (1.0 + w.powi(4));
        let a = integrate_1d(f, &IntegrationSpec::default()).unwrap();
        let b = integrate_1d(f, &IntegrationSpec::default().parallel(true)).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn convolution_of_lorentzians_is_lorentzian() {
        // Lorentzians of half-widths a, b convolve to width a+b with mass product / 2π
        let grid = FrequencyGrid::new(400.0, 80_001).unwrap();
        let (a, b) = (0.5, 1.5);
        let f = SpectralDensity::sample(grid, SpectrumKind::Other, lorentzian(a));
        let g = SpectralDensity::sample(grid, SpectrumKind::Other, lorentzian(b));
        let h = spectral_convolution(&f, &g).unwrap();
        assert!(h.tail_truncated);
        let c = grid.center();
        for k in [0usize, 100, 1000] {
            let w = grid.omega(c + k);
            assert_relative_eq!(h.density.values[c + k], lorentzian(a + b)(w), max_relative = 5e-3);
        }
    }

    #[test]
    fn convolution_requires_matching_grids() {
        let g1 = FrequencyGrid::new(1.0, 11).unwrap();
        let g2 = FrequencyGrid::new(2.0, 11).unwrap();
        let f = SpectralDensity::sample(g1, SpectrumKind::Other, |_| 1.0);
        let g = SpectralDensity::sample(g2, SpectrumKind::Other, |_| 1.0);
        assert_eq!(spectral_convolution(&f, &g).unwrap_err(), Error::GridMismatch);
    }
}
