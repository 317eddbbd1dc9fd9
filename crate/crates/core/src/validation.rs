//! Acceptance checks: each criterion runs its oracle comparison and reports
//! the measured worst case against a pinned tolerance.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::g2::{g2_bruteforce, g2_closed, g2_from_relative_increase, CumulantMode, CumulantSpec};
use crate::model::{validity_ratio, LedModel, ModelParams};
use crate::montecarlo::{run_ensemble, MonteCarloConfig};
use crate::photon::{default_integration, mean_photon_closed, mean_photon_quadrature, ConvolutionMode};
use crate::quadrature::{integrate_1d, IntegrationSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationProfile {
    pub skip_montecarlo: bool,
    /// Multiplies `c(ω)` in the normalisation check; 1 for an unperturbed run.
    pub commutator_scale: f64,
    pub seed: u64,
    pub mc_records: usize,
    /// `N₀` for the figure-shape checks.
    pub shape_emitters: f64,
}

impl Default for ValidationProfile {
    fn default() -> Self {
        ValidationProfile { skip_montecarlo: false, commutator_scale: 1.0, seed: 2024, mc_records: 500, shape_emitters: 5.0 }
    }
}

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Worst measured value against the tolerance, in words.
    pub summary: String,
    pub details: Vec<String>,
    pub elapsed: Duration,
    pub skipped: bool,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.skipped {
            "SKIP"
        } else if self.passed {
            "PASS"
        } else {
            "FAIL"
        };
        write!(f, "criterion {}: {status} {} | {} | {:.2} s", self.id, self.name, self.summary, self.elapsed.as_secs_f64())
    }
}

fn report(id: u8, name: &'static str, start: Instant, limit: Option<f64>, passed: bool, summary: String, mut details: Vec<String>) -> CriterionReport {
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed.as_secs_f64() < l);
    if let Some(l) = limit {
        details.push(format!("runtime {:.2} s (limit {l} s)", elapsed.as_secs_f64()));
    }
    CriterionReport { id, name, passed: passed && in_time, summary, details, elapsed, skipped: false }
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Random below-threshold parameter set with `γ⊥ = 1`. With `max_validity`
/// the population decay is drawn as `v·√κ` for `v ≤ max_validity`.
pub fn random_model<R: Rng>(rng: &mut R, validity: Option<(f64, f64)>) -> LedModel {
    loop {
        let kappa_ratio = log_uniform(rng, 0.1, 10.0);
        let gamma_par = match validity {
            Some((lo, hi)) => log_uniform(rng, lo, hi) * (0.5 * kappa_ratio).sqrt(),
            None => log_uniform(rng, 1e-4, 1.0),
        };
        let pump = log_uniform(rng, 0.01, 3.0);
        let n_threshold = rng.random_range(1.0..30.0);
        let n_emitters = log_uniform(rng, 1.0, 500.0).max(1.0);
        let params = ModelParams::from_kappa_ratio(kappa_ratio, gamma_par, pump, n_threshold, n_emitters);
        if let Ok(m) = LedModel::new(params) {
            return m;
        }
    }
}

fn describe(p: &ModelParams) -> String {
    format!(
        "2k/g={:.4} g_par={:.3e} P={:.4} N_th={:.3} N0={:.2}",
        p.kappa_ratio(),
        p.gamma_par,
        p.pump,
        p.n_threshold,
        p.n_emitters
    )
}

/// Normalisation of `c(ω)` on 200 random sets.
pub fn criterion_1(profile: &ValidationProfile) -> CriterionReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let tol = 1e-5;
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    let mut ok = true;
    for _ in 0..200 {
        let m = random_model(&mut rng, None);
        let spec = IntegrationSpec::with_tolerance(1e-9).scaled(m.widest_rate());
        match integrate_1d(|w| profile.commutator_scale * m.commutator_spectrum(w), &spec) {
            Ok(e) => {
                let dev = (e.value / (2.0 * PI) - 1.0).abs();
                if dev > worst {
                    worst = dev;
                }
                if dev >= tol {
                    ok = false;
                }
            }
            Err(e) => {
                ok = false;
                details.push(format!("{}: {e}", describe(m.params())));
            }
        }
    }
    report(1, "commutator normalization", start, Some(10.0), ok, format!("max |mass-1| = {worst:.3e} (tol {tol:.0e}) over 200 sets"), details)
}

/// Mean photon number: δ-approximation quadrature against the closed form.
pub fn criterion_2(profile: &ValidationProfile) -> CriterionReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed ^ 2);
    let tol = 1e-5;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut details = Vec::new();
    for _ in 0..100 {
        let m = random_model(&mut rng, Some((1e-4, 0.05)));
        let closed = mean_photon_closed(&m);
        match mean_photon_quadrature(&m, ConvolutionMode::DeltaApprox, &default_integration(&m)) {
            Ok(q) => {
                let dev = ((q.n_total - closed.n_total) / closed.n_total).abs();
                worst = worst.max(dev);
                ok &= dev < tol;
            }
            Err(e) => {
                ok = false;
                details.push(format!("{}: {e}", describe(m.params())));
            }
        }
    }
    // the exact-convolution mode at the reference point, reported only
    let ex1 = LedModel::new(ModelParams::default()).expect("reference point is valid");
    if let Ok(x) = mean_photon_quadrature(&ex1, ConvolutionMode::ExactConvolution, &default_integration(&ex1)) {
        let c = mean_photon_closed(&ex1).n_total;
        details.push(format!("reference point exact-convolution n = {:.8} vs delta {:.8} (rel {:+.3e})", x.n_total, c, x.n_total / c - 1.0));
    }
    report(2, "mean-photon two-path agreement", start, Some(30.0), ok, format!("max rel dev = {worst:.3e} (tol {tol:.0e}) over 100 sets"), details)
}

/// g₂: brute-force δ-mode cumulant quadrature against the closed form.
pub fn criterion_3(profile: &ValidationProfile) -> CriterionReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed ^ 3);
    let tol = 1e-4;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut details = Vec::new();
    for _ in 0..50 {
        let m = random_model(&mut rng, Some((1e-4, 0.05)));
        let closed = g2_closed(&m).g2;
        match g2_bruteforce(&m, CumulantMode::Delta, &CumulantSpec::for_model(&m, 1e-8)) {
            Ok(b) => {
                let dev = (b.g2 - closed).abs();
                worst = worst.max(dev);
                ok &= dev < tol;
            }
            Err(e) => {
                ok = false;
                details.push(format!("{}: {e}", describe(m.params())));
            }
        }
    }
    report(3, "g2 two-path agreement", start, Some(120.0), ok, format!("max |dg2| = {worst:.3e} (tol {tol:.0e}) over 50 sets"), details)
}

/// Number of log-spaced population decay rates in the degradation scan.
pub const DEGRADATION_POINTS: usize = 13;

/// Full-Lorentzian g₂ against the closed form across `γ∥ ∈ [1e-4, 1]`.
pub fn criterion_4(_profile: &ValidationProfile) -> CriterionReport {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;
    let mut devs = Vec::new();
    let mut worst_small: f64 = 0.0;
    for i in 0..DEGRADATION_POINTS {
        let gamma_par = 10f64.powf(-4.0 + 4.0 * i as f64 / (DEGRADATION_POINTS - 1) as f64);
        let params = ModelParams { gamma_par, ..Default::default() };
        let v = validity_ratio(&params);
        let m = LedModel::new(params).expect("reference family is below threshold");
        let closed = g2_closed(&m).g2;
        match g2_bruteforce(&m, CumulantMode::Full, &CumulantSpec::for_model(&m, 1e-9)) {
            Ok(full) => {
                let dev = ((full.g2 - closed) / closed).abs();
                details.push(format!("g_par={gamma_par:.3e} validity={v:.3e} g2_full={:.8} g2_closed={closed:.8} rel dev={dev:.3e}", full.g2));
                if v <= 0.01 {
                    worst_small = worst_small.max(dev);
                    ok &= dev < 0.01;
                }
                devs.push(dev);
            }
            Err(e) => {
                ok = false;
                details.push(format!("g_par={gamma_par:.3e}: {e}"));
            }
        }
    }
    let monotone = devs.len() == DEGRADATION_POINTS && devs.windows(2).all(|w| w[1] > w[0]);
    report(
        4,
        "validity-condition degradation",
        start,
        None,
        ok && monotone,
        format!(
            "max rel dev at validity<=0.01 = {worst_small:.3e} (tol 1e-2), monotone increasing: {monotone}"
        ),
        details,
    )
}

/// Upper bound on [`LedModel::population_line_ratio`] for the random Monte Carlo sets.
pub const MC_LINE_RATIO: f64 = 0.02;

/// Monte Carlo ensembles against the closed forms.
pub fn criterion_5(profile: &ValidationProfile) -> CriterionReport {
    let start = Instant::now();
    if profile.skip_montecarlo {
        return CriterionReport {
            id: 5,
            name: "Monte Carlo oracle",
            passed: true,
            summary: "skipped".into(),
            details: Vec::new(),
            elapsed: start.elapsed(),
            skipped: true,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed ^ 5);
    let mut models = vec![LedModel::new(ModelParams::default()).expect("reference point is valid")];
    // a narrow population line keeps the closed forms accurate; the lower
    // bound on γ_P keeps the record length bounded
    while models.len() < 10 {
        let m = random_model(&mut rng, Some((0.005, 0.05)));
        let line = m.population_line_ratio();
        if (0.4 * MC_LINE_RATIO..MC_LINE_RATIO).contains(&line) {
            models.push(m);
        }
    }
    let mut ok = true;
    let mut worst_z: f64 = 0.0;
    let mut worst_se: f64 = 0.0;
    let mut details = Vec::new();
    for (i, m) in models.iter().enumerate() {
        let config = MonteCarloConfig::for_model(m, profile.mc_records, profile.seed.wrapping_add(i as u64));
        let closed = mean_photon_closed(m).n_total;
        let g_closed = g2_closed(m).g2;
        match run_ensemble(m, &config) {
            Ok(e) => {
                let zn = (e.n - closed) / e.n_se;
                let zg = (e.g2 - g_closed) / e.g2_se;
                let pass = zn.abs() <= 3.0 && zg.abs() <= 3.0 && e.g2_se <= 0.02;
                ok &= pass;
                worst_z = worst_z.max(zn.abs()).max(zg.abs());
                worst_se = worst_se.max(e.g2_se);
                details.push(format!(
                    "{} {} line={:.3}: n={:.6}+-{:.1e} (closed {:.6}, z={zn:+.2}) g2={:.5}+-{:.1e} (closed {:.5}, z={zg:+.2})",
                    if pass { "ok  " } else { "FAIL" },
                    describe(m.params()),
                    m.population_line_ratio(),
                    e.n,
                    e.n_se,
                    closed,
                    e.g2,
                    e.g2_se,
                    g_closed
                ));
                // the simulation realises the exact convolution; compare with that too
                if let Ok(full) = g2_bruteforce(m, CumulantMode::Full, &CumulantSpec::for_model(m, 1e-6)) {
                    details.push(format!(
                        "       full-Lorentzian quadrature: n={:.6} (z={:+.2}) g2={:.5} (z={:+.2})",
                        full.n_total,
                        (e.n - full.n_total) / e.n_se,
                        full.g2,
                        (e.g2 - full.g2) / e.g2_se
                    ));
                }
            }
            Err(e) => {
                ok = false;
                details.push(format!("{}: {e}", describe(m.params())));
            }
        }
    }
    report(
        5,
        "Monte Carlo oracle",
        start,
        Some(180.0),
        ok,
        format!("max |z| = {worst_z:.2} (tol 3), max SE(g2) = {worst_se:.4} (tol 0.02), {} records", profile.mc_records),
        details,
    )
}

/// Bounds of g₂ and its limits.
pub fn criterion_6(profile: &ValidationProfile) -> CriterionReport {
    let start = Instant::now();
    let mut details = Vec::new();
    let ex1 = LedModel::new(ModelParams::default()).expect("reference point is valid");
    let quiet = ex1.without_fluctuations();
    let closed_quiet = g2_closed(&quiet).g2;
    let brute_quiet = g2_bruteforce(&quiet, CumulantMode::Delta, &CumulantSpec::for_model(&quiet, 1e-8)).map(|g| g.g2);
    let thermal = closed_quiet == 2.0 && brute_quiet == Ok(2.0);
    details.push(format!("no fluctuations: closed g2 = {closed_quiet}, brute-force g2 = {brute_quiet:?}"));

    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed ^ 6);
    let mut bounded = true;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..200 {
        let m = random_model(&mut rng, None);
        let g = g2_closed(&m).g2;
        lo = lo.min(g);
        hi = hi.max(g);
        bounded &= m.populations().delta2_ne > 0.0 && g > 2.0 && g <= 6.0;
    }
    details.push(format!("200 random sets: g2 in [{lo:.6}, {hi:.6}]"));

    let base = mean_photon_closed(&ex1).delta_n;
    let scaled: Vec<f64> = (0..=60).map(|i| g2_from_relative_increase(base * 10f64.powf(i as f64 * 0.2))).collect();
    let rising = scaled.windows(2).all(|w| w[1] > w[0] || (w[1] == w[0] && w[0] > 6.0 - 1e-9));
    let last = *scaled.last().expect("non-empty");
    let approaches = (6.0 - last) < 1e-9 && last <= 6.0;
    details.push(format!("scaled Δn up to 1e12·Δn: g2 = {last:.12}"));

    report(
        6,
        "bounds and limits",
        start,
        None,
        thermal && bounded && rising && approaches,
        format!("thermal limit exact: {thermal}, 2<g2<=6: {bounded}, monotone to 6: {}", rising && approaches),
        details,
    )
}

fn strictly(values: &[f64], increasing: bool) -> bool {
    values.windows(2).all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
}

/// Shapes of the published curves: Δₙ and g₂ versus `2κ/γ⊥`, N_th and P.
pub fn criterion_7(profile: &ValidationProfile) -> CriterionReport {
    let start = Instant::now();
    let n0 = profile.shape_emitters;
    let thresholds = [5.0, 10.0, 15.0];
    let ratios: Vec<f64> = (0..50).map(|i| 10f64.powf(-1.0 + 2.0 * i as f64 / 49.0)).collect();
    let pumps: Vec<f64> = (0..50).map(|i| 10f64.powf(-2.0 + 2.0 * i as f64 / 49.0)).collect();
    let eval = |r: f64, p: f64, nth: f64| {
        LedModel::new(ModelParams::from_kappa_ratio(r, 0.1, p, nth, n0)).map(|m| (mean_photon_closed(&m).delta_n, g2_closed(&m).g2))
    };
    let mut details = Vec::new();
    let mut ok = true;

    let mut by_ratio = true;
    for &nth in &thresholds {
        let vals: Result<Vec<_>, _> = ratios.iter().map(|&r| eval(r, 0.1, nth)).collect();
        match vals {
            Ok(v) => {
                let d: Vec<f64> = v.iter().map(|x| x.0).collect();
                let g: Vec<f64> = v.iter().map(|x| x.1).collect();
                by_ratio &= strictly(&d, true) && strictly(&g, true);
            }
            Err(e) => {
                by_ratio = false;
                details.push(format!("N_th={nth}: {e}"));
            }
        }
    }
    details.push(format!("Δn and g2 strictly increasing in 2k/g on [0.1, 10]: {by_ratio}"));

    let mut by_threshold = true;
    for &r in &ratios {
        let vals: Result<Vec<_>, _> = thresholds.iter().map(|&nth| eval(r, 0.1, nth)).collect();
        match vals {
            Ok(v) => {
                let d: Vec<f64> = v.iter().map(|x| x.0).collect();
                let g: Vec<f64> = v.iter().map(|x| x.1).collect();
                by_threshold &= strictly(&d, false) && strictly(&g, false);
            }
            Err(_) => by_threshold = false,
        }
    }
    details.push(format!("Δn and g2 strictly decreasing over N_th = 5, 10, 15: {by_threshold}"));

    let mut by_pump = true;
    for &nth in &thresholds {
        for &r in &[0.2, 2.0, 6.0] {
            let vals: Result<Vec<_>, _> = pumps.iter().map(|&p| eval(r, p, nth)).collect();
            match vals {
                Ok(v) => {
                    let g: Vec<f64> = v.iter().map(|x| x.1).collect();
                    if !strictly(&g, false) {
                        by_pump = false;
                        details.push(format!("g2(P) not decreasing at 2k/g={r} N_th={nth}"));
                    }
                }
                Err(e) => {
                    by_pump = false;
                    details.push(format!("2k/g={r} N_th={nth}: {e}"));
                }
            }
        }
    }
    details.push(format!("g2 strictly decreasing in P on [0.01, 1]: {by_pump}"));
    ok &= by_ratio && by_threshold && by_pump;
    report(7, "figure-shape reproduction", start, Some(10.0), ok, format!("N0 = {n0}: ratio {by_ratio}, threshold {by_threshold}, pump {by_pump}"), details)
}

/// Tabulated values at the reference point.
pub const REFERENCE_VALUES: [(&str, f64); 4] = [("n0", 0.042554), ("delta_n", 0.178917), ("n", 0.050168), ("g2", 2.09212)];

/// Reference point against the tabulated values on every analytic path.
pub fn criterion_8(_profile: &ValidationProfile) -> CriterionReport {
    let start = Instant::now();
    let tol = 1e-4;
    let m = LedModel::new(ModelParams::default()).expect("reference point is valid");
    let closed = mean_photon_closed(&m);
    let mut paths: Vec<(&str, [f64; 4])> = vec![("closed", [closed.n0, closed.delta_n, closed.n_total, g2_closed(&m).g2])];
    if let (Ok(q), Ok(b)) = (
        mean_photon_quadrature(&m, ConvolutionMode::DeltaApprox, &default_integration(&m)),
        g2_bruteforce(&m, CumulantMode::Delta, &CumulantSpec::for_model(&m, 1e-9)),
    ) {
        paths.push(("quadrature", [q.n0, q.delta_n, q.n_total, b.g2]));
    }
    let mut ok = paths.len() == 2;
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for (path, vals) in &paths {
        for ((name, expected), got) in REFERENCE_VALUES.iter().zip(vals) {
            let dev = ((got - expected) / expected).abs();
            worst = worst.max(dev);
            ok &= dev < tol;
            details.push(format!("{path} {name}: {got:.8} vs {expected} (rel {dev:.3e})"));
        }
    }
    report(8, "reference point values", start, None, ok, format!("max rel dev = {worst:.3e} (tol {tol:.0e})"), details)
}

pub fn run_validation(profile: &ValidationProfile) -> Vec<CriterionReport> {
    vec![
        criterion_1(profile),
        criterion_2(profile),
        criterion_3(profile),
        criterion_4(profile),
        criterion_5(profile),
        criterion_6(profile),
        criterion_7(profile),
        criterion_8(profile),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbed_commutator_fails_normalization() {
        let profile = ValidationProfile { commutator_scale: 1.01, ..Default::default() };
        assert!(!criterion_1(&profile).passed);
    }

    #[test]
    fn skip_flag_skips_montecarlo() {
        let r = criterion_5(&ValidationProfile { skip_montecarlo: true, ..Default::default() });
        assert!(r.skipped && r.passed);
    }

    #[test]
    fn random_models_respect_validity_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let m = random_model(&mut rng, Some((1e-4, 0.05)));
            assert!(validity_ratio(m.params()) < 0.05);
        }
    }
}
