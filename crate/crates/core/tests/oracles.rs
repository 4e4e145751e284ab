//! Independent oracles for the coverage of settings without group invariance.
//!
//! The frozen constants were computed outside this crate (exact Poisson
//! enumeration, and quadrature over the sampling density of the mean with
//! closed-form truncated-normal quantiles). The tests recompute each oracle
//! with code that shares nothing with the grid machinery, check it against
//! the frozen value, then check the library's simulation against it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal as NormalDist};
use statrs::distribution::{Continuous, ContinuousCDF, Discrete, Normal, Poisson};

use cfactor::calibration::{run_coverage, std_error, CalibrationSpec, IntervalMethod};
use cfactor::config::FamilyConfig;
use cfactor::consistency::FactorKind;

const DELTA: f64 = 0.683;

/// Gaussian-approximation coverage for Poisson(λ = 2).
const POISSON_N1: f64 = 0.812_011_699_419_676_1;
const POISSON_N100: f64 = 0.677_188_413_011_986_3;
/// Exact-assign coverage for the Gaussian location truncated at μ ≥ 0.
const TRUNC_MU0_N1: f64 = 0.0;
const TRUNC_MU1_N1: f64 = 0.787_728_285_622_398_8;
const TRUNC_MU1_N64: f64 = 0.683_003_952_047_904_8;

fn z() -> f64 {
    Normal::standard().inverse_cdf(0.5 * (1.0 + DELTA))
}

/// `P(|S − nλ| < z√S)` for `S ~ Poisson(nλ)`; `S = 0` is a boundary miss.
fn poisson_exact(n: usize, lambda: f64) -> f64 {
    let m = n as f64 * lambda;
    let p = Poisson::new(m).unwrap();
    let z = z();
    let top = (m + 40.0 * m.sqrt() + 60.0) as u64;
    (1..top)
        .filter(|&s| ((s as f64) - m).abs() < z * (s as f64).sqrt())
        .map(|s| p.pmf(s))
        .sum()
}

/// Equal-tail interval of `N(x̄, 1/n)` truncated to `μ ≥ 0`.
fn truncated_interval(xbar: f64, n: usize) -> (f64, f64) {
    let s = 1.0 / (n as f64).sqrt();
    let std = Normal::standard();
    let a = std.cdf(-xbar / s);
    let q = |p: f64| xbar + s * std.inverse_cdf(a + (1.0 - a) * p);
    (q(0.5 * (1.0 - DELTA)), q(0.5 * (1.0 + DELTA)))
}

fn truncated_quadrature(mu: f64, n: usize) -> f64 {
    let s = 1.0 / (n as f64).sqrt();
    let dens = Normal::new(mu, s).unwrap();
    let steps = 400_000;
    let (lo, hi) = (mu - 10.0 * s, mu + 10.0 * s);
    let h = (hi - lo) / steps as f64;
    (0..=steps)
        .map(|i| {
            let x = lo + h * i as f64;
            let (a, b) = truncated_interval(x, n);
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            if a < mu && mu < b {
                w * dens.pdf(x)
            } else {
                0.0
            }
        })
        .sum::<f64>()
        * h
}

/// Brute-force Monte Carlo with the closed-form interval.
fn truncated_mc(mu: f64, n: usize, trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = NormalDist::new(mu, 1.0).unwrap();
    let hits = (0..trials)
        .filter(|_| {
            let xbar = (0..n).map(|_| d.sample(&mut rng)).sum::<f64>() / n as f64;
            let (a, b) = truncated_interval(xbar, n);
            a < mu && mu < b
        })
        .count();
    hits as f64 / trials as f64
}

fn library(family: FamilyConfig, factor: Option<FactorKind>, truth: f64, n: usize, method: IntervalMethod, trials: usize) -> f64 {
    let mut spec = CalibrationSpec::new(family, factor, vec![truth]);
    spec.n = n;
    spec.method = method;
    spec.trials = trials;
    spec.seed = 77;
    run_coverage(&spec).unwrap().coverage
}

fn truncated() -> FamilyConfig {
    FamilyConfig::new("trunc_gauss_loc").with("lower", 0.0)
}

#[test]
fn poisson_enumeration_matches_frozen() {
    assert!((poisson_exact(1, 2.0) - POISSON_N1).abs() < 1e-12);
    assert!((poisson_exact(100, 2.0) - POISSON_N100).abs() < 1e-9);
    // closed form at n = 1: the intervals of x = 1..4 contain 2
    assert!((POISSON_N1 - 6.0 * (-2.0f64).exp()).abs() < 1e-12);
}

#[test]
fn truncated_quadrature_matches_frozen() {
    assert!((truncated_quadrature(1.0, 1) - TRUNC_MU1_N1).abs() < 1e-4);
    assert!((truncated_quadrature(1.0, 64) - TRUNC_MU1_N64).abs() < 1e-4);
    // exact zero; the oracle's quantile inversion rounds at x̄ ≈ −10
    let q0 = truncated_quadrature(0.0, 1);
    assert!((q0 - TRUNC_MU0_N1).abs() < 1e-12, "{q0}");
}

#[test]
fn truncated_brute_force_agrees_with_quadrature() {
    let t = 200_000;
    let se = std_error(TRUNC_MU1_N1, t);
    assert!((truncated_mc(1.0, 1, t, 5) - TRUNC_MU1_N1).abs() < 4.0 * se);
    assert_eq!(truncated_mc(0.0, 1, 10_000, 6), 0.0);
}

#[test]
fn broken_settings_miss_delta_by_the_required_margins() {
    assert!((TRUNC_MU0_N1 - DELTA).abs() > 0.03);
    assert!((POISSON_N1 - DELTA).abs() > 0.05);
}

#[test]
fn recovered_settings_approach_delta() {
    assert!((POISSON_N100 - DELTA).abs() < 0.015);
    assert!((TRUNC_MU1_N64 - DELTA).abs() < 0.01);
}

#[test]
fn library_poisson_coverage_matches_oracle() {
    let t = 20_000;
    let se = std_error(DELTA, t);
    let c1 = library(FamilyConfig::new("poisson"), None, 2.0, 1, IntervalMethod::GaussianApprox, t);
    assert!((c1 - POISSON_N1).abs() < 4.0 * se, "{c1}");
    let c100 = library(FamilyConfig::new("poisson"), None, 2.0, 100, IntervalMethod::GaussianApprox, t);
    assert!((c100 - POISSON_N100).abs() < 4.0 * se, "{c100}");
}

#[test]
fn library_truncated_coverage_matches_oracle() {
    let t = 20_000;
    let se = std_error(DELTA, t);
    let c0 = library(truncated(), Some(FactorKind::Location), 0.0, 1, IntervalMethod::ExactAssign, 5_000);
    assert_eq!(c0, TRUNC_MU0_N1);
    let c1 = library(truncated(), Some(FactorKind::Location), 1.0, 1, IntervalMethod::ExactAssign, t);
    assert!((c1 - TRUNC_MU1_N1).abs() < 4.0 * se, "{c1}");
}
