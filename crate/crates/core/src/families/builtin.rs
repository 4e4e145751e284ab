use std::f64::consts::{LN_2, PI};

use rand::RngCore;
use rand_distr::{Distribution, Exp1, StandardNormal};
use statrs::function::erf::{erf, erfc};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::families::{Interval, Invariance, ParamRole, ParamSpec, SamplingFamily, Support};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len().max(1) as f64
}

fn std_dev(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / values.len().max(1) as f64).sqrt()
}

/// Normal with unknown mean and known standard deviation `σ₀`.
#[derive(Debug, Clone)]
pub struct GaussianLocation {
    sigma0: f64,
    params: Vec<ParamSpec>,
}

impl GaussianLocation {
    pub fn new(sigma0: f64) -> Self {
        assert!(sigma0 > 0.0 && sigma0.is_finite(), "sigma0 must be positive");
        GaussianLocation {
            sigma0,
            params: vec![ParamSpec::new("mu", ParamRole::Location, Interval::real())],
        }
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }
}

impl SamplingFamily for GaussianLocation {
    fn id(&self) -> &str {
        "gauss_loc"
    }

    fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    fn support(&self) -> Support {
        Support::continuous(Interval::real())
    }

    fn invariance(&self) -> Invariance {
        Invariance::Translation
    }

    fn ln_density(&self, x: f64, theta: &[f64]) -> f64 {
        let z = (x - theta[0]) / self.sigma0;
        -LN_SQRT_2PI - self.sigma0.ln() - 0.5 * z * z
    }

    fn cdf(&self, x: f64, theta: &[f64]) -> f64 {
        std_normal_cdf((x - theta[0]) / self.sigma0)
    }

    fn sample(&self, theta: &[f64], rng: &mut dyn RngCore) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        theta[0] + self.sigma0 * z
    }

    fn initial_guess(&self, values: &[f64]) -> Vec<f64> {
        vec![mean(values)]
    }
}

/// Normal with unknown mean and standard deviation, `σ⁻¹φ((x−μ)/σ)`.
#[derive(Debug, Clone)]
pub struct GaussianLocationScale {
    params: Vec<ParamSpec>,
}

impl GaussianLocationScale {
    pub fn new() -> Self {
        GaussianLocationScale {
            params: vec![
                ParamSpec::new("mu", ParamRole::Location, Interval::real()),
                ParamSpec::new("sigma", ParamRole::Scale, Interval::positive()),
            ],
        }
    }
}

impl Default for GaussianLocationScale {
    fn default() -> Self {
        Self::new()
    }
}

impl SamplingFamily for GaussianLocationScale {
    fn id(&self) -> &str {
        "gauss_loc_scale"
    }

    fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    fn support(&self) -> Support {
        Support::continuous(Interval::real())
    }

    fn invariance(&self) -> Invariance {
        Invariance::TranslationScaling
    }

    fn ln_density(&self, x: f64, theta: &[f64]) -> f64 {
        let z = (x - theta[0]) / theta[1];
        -LN_SQRT_2PI - theta[1].ln() - 0.5 * z * z
    }

    fn cdf(&self, x: f64, theta: &[f64]) -> f64 {
        std_normal_cdf((x - theta[0]) / theta[1])
    }

    fn sample(&self, theta: &[f64], rng: &mut dyn RngCore) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        theta[0] + theta[1] * z
    }

    fn initial_guess(&self, values: &[f64]) -> Vec<f64> {
        let m = mean(values);
        vec![m, std_dev(values).max(1e-3 * (1.0 + m.abs()))]
    }
}

/// `τ⁻¹ exp(−x/τ)` on `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct ExponentialScale {
    params: Vec<ParamSpec>,
}

impl ExponentialScale {
    pub fn new() -> Self {
        ExponentialScale {
            params: vec![ParamSpec::new("tau", ParamRole::Scale, Interval::positive())],
        }
    }
}

impl Default for ExponentialScale {
    fn default() -> Self {
        Self::new()
    }
}

impl SamplingFamily for ExponentialScale {
    fn id(&self) -> &str {
        "exp_scale"
    }

    fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    fn support(&self) -> Support {
        Support::continuous(Interval::at_least(0.0))
    }

    fn invariance(&self) -> Invariance {
        Invariance::Scaling
    }

    fn ln_density(&self, x: f64, theta: &[f64]) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        -theta[0].ln() - x / theta[0]
    }

    fn cdf(&self, x: f64, theta: &[f64]) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-x / theta[0]).exp_m1()
        }
    }

    fn sample(&self, theta: &[f64], rng: &mut dyn RngCore) -> f64 {
        let e: f64 = Exp1.sample(rng);
        theta[0] * e
    }

    fn initial_guess(&self, values: &[f64]) -> Vec<f64> {
        vec![mean(values).max(1e-300)]
    }
}

/// Cauchy with unknown median and known half-width `γ`.
#[derive(Debug, Clone)]
pub struct CauchyLocation {
    gamma: f64,
    params: Vec<ParamSpec>,
}

impl CauchyLocation {
    pub fn new(gamma: f64) -> Self {
        assert!(gamma > 0.0 && gamma.is_finite(), "gamma must be positive");
        CauchyLocation {
            gamma,
            params: vec![ParamSpec::new("mu", ParamRole::Location, Interval::real())],
        }
    }
}

impl SamplingFamily for CauchyLocation {
    fn id(&self) -> &str {
        "cauchy_loc"
    }

    fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    fn support(&self) -> Support {
        Support::continuous(Interval::real())
    }

    fn invariance(&self) -> Invariance {
        Invariance::Translation
    }

    fn ln_density(&self, x: f64, theta: &[f64]) -> f64 {
        let z = (x - theta[0]) / self.gamma;
        -(PI * self.gamma).ln() - z.mul_add(z, 1.0).ln()
    }

    fn cdf(&self, x: f64, theta: &[f64]) -> f64 {
        0.5 + ((x - theta[0]) / self.gamma).atan() / PI
    }

    fn sample(&self, theta: &[f64], rng: &mut dyn RngCore) -> f64 {
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        theta[0] + self.gamma * a / b
    }

    fn initial_guess(&self, values: &[f64]) -> Vec<f64> {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        vec![v[v.len() / 2]]
    }
}

/// Weibull `(k/λ)(x/λ)^(k−1) exp(−(x/λ)^k)`.
///
/// With a fixed shape `k` this is a pure scale family in `λ`; with the shape
/// free it has parameters `(scale, shape)` and no continuous invariance.
#[derive(Debug, Clone)]
pub struct Weibull {
    shape: Option<f64>,
    params: Vec<ParamSpec>,
}

impl Weibull {
    pub fn with_shape(shape: f64) -> Self {
        assert!(shape > 0.0 && shape.is_finite(), "shape must be positive");
        Weibull {
            shape: Some(shape),
            params: vec![ParamSpec::new("scale", ParamRole::Scale, Interval::positive())],
        }
    }

    pub fn free_shape() -> Self {
        Weibull {
            shape: None,
            params: vec![
                ParamSpec::new("scale", ParamRole::Scale, Interval::positive()),
                ParamSpec::new("shape", ParamRole::Shape, Interval::positive()),
            ],
        }
    }

    fn split(&self, theta: &[f64]) -> (f64, f64) {
        match self.shape {
            Some(k) => (theta[0], k),
            None => (theta[0], theta[1]),
        }
    }
}

impl SamplingFamily for Weibull {
    fn id(&self) -> &str {
        "weibull"
    }

    fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    fn support(&self) -> Support {
        Support::continuous(Interval::positive())
    }

    fn invariance(&self) -> Invariance {
        if self.shape.is_some() {
            Invariance::Scaling
        } else {
            Invariance::None
        }
    }

    fn ln_density(&self, x: f64, theta: &[f64]) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let (scale, k) = self.split(theta);
        let lr = x.ln() - scale.ln();
        k.ln() - scale.ln() + (k - 1.0) * lr - (k * lr).exp()
    }

    fn cdf(&self, x: f64, theta: &[f64]) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let (scale, k) = self.split(theta);
        -(-(x / scale).powf(k)).exp_m1()
    }

    fn sample(&self, theta: &[f64], rng: &mut dyn RngCore) -> f64 {
        let (scale, k) = self.split(theta);
        let e: f64 = Exp1.sample(rng);
        scale * e.powf(1.0 / k)
    }

    fn initial_guess(&self, values: &[f64]) -> Vec<f64> {
        let m = mean(values).max(1e-300);
        match self.shape {
            Some(_) => vec![m],
            None => vec![m, 1.0],
        }
    }
}

/// Poisson counts with mean `λ`.
#[derive(Debug, Clone)]
pub struct Poisson {
    params: Vec<ParamSpec>,
}

impl Poisson {
    pub fn new() -> Self {
        Poisson {
            params: vec![ParamSpec::new("lambda", ParamRole::Rate, Interval::positive())],
        }
    }
}

impl Default for Poisson {
    fn default() -> Self {
        Self::new()
    }
}

impl SamplingFamily for Poisson {
    fn id(&self) -> &str {
        "poisson"
    }

    fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    fn support(&self) -> Support {
        Support::counts()
    }

    fn invariance(&self) -> Invariance {
        Invariance::None
    }

    fn ln_density(&self, x: f64, theta: &[f64]) -> f64 {
        if x < 0.0 || x.fract() != 0.0 {
            return f64::NEG_INFINITY;
        }
        let lambda = theta[0];
        let head = if x == 0.0 { 0.0 } else { x * lambda.ln() };
        head - lambda - ln_gamma(x + 1.0)
    }

    fn cdf(&self, x: f64, theta: &[f64]) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        gamma_ur(x.floor() + 1.0, theta[0])
    }

    fn sample(&self, theta: &[f64], rng: &mut dyn RngCore) -> f64 {
        // rand_distr's Poisson switches algorithms at λ = 12; both are exact.
        rand_distr::Poisson::new(theta[0])
            .expect("lambda checked positive")
            .sample(rng)
    }

    fn initial_guess(&self, values: &[f64]) -> Vec<f64> {
        vec![mean(values) + 0.5]
    }
}

/// Normal location family whose mean is constrained to `μ ≥ lower`.
///
/// The sampling density is the ordinary normal one; only the parameter
/// space is cut, which is enough to break translation invariance.
#[derive(Debug, Clone)]
pub struct TruncatedGaussianLocation {
    sigma0: f64,
    params: Vec<ParamSpec>,
}

impl TruncatedGaussianLocation {
    pub fn new(sigma0: f64, lower: f64) -> Self {
        assert!(sigma0 > 0.0 && sigma0.is_finite(), "sigma0 must be positive");
        TruncatedGaussianLocation {
            sigma0,
            params: vec![ParamSpec::new(
                "mu",
                ParamRole::Location,
                Interval::at_least(lower),
            )],
        }
    }

    pub fn lower(&self) -> f64 {
        self.params[0].domain.lo
    }
}

impl SamplingFamily for TruncatedGaussianLocation {
    fn id(&self) -> &str {
        "trunc_gauss_loc"
    }

    fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    fn support(&self) -> Support {
        Support::continuous(Interval::real())
    }

    fn invariance(&self) -> Invariance {
        Invariance::None
    }

    fn ln_density(&self, x: f64, theta: &[f64]) -> f64 {
        let z = (x - theta[0]) / self.sigma0;
        -LN_SQRT_2PI - self.sigma0.ln() - 0.5 * z * z
    }

    fn cdf(&self, x: f64, theta: &[f64]) -> f64 {
        std_normal_cdf((x - theta[0]) / self.sigma0)
    }

    fn sample(&self, theta: &[f64], rng: &mut dyn RngCore) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        theta[0] + self.sigma0 * z
    }

    fn initial_guess(&self, values: &[f64]) -> Vec<f64> {
        vec![mean(values).max(self.lower())]
    }
}

/// `σ⁻¹ ψ(x/σ)` with `ψ` the standard half-normal density.
#[derive(Debug, Clone)]
pub struct HalfGaussianScale {
    params: Vec<ParamSpec>,
}

impl HalfGaussianScale {
    pub fn new() -> Self {
        HalfGaussianScale {
            params: vec![ParamSpec::new("sigma", ParamRole::Scale, Interval::positive())],
        }
    }
}

impl Default for HalfGaussianScale {
    fn default() -> Self {
        Self::new()
    }
}

impl SamplingFamily for HalfGaussianScale {
    fn id(&self) -> &str {
        "half_gauss_scale"
    }

    fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    fn support(&self) -> Support {
        Support::continuous(Interval::at_least(0.0))
    }

    fn invariance(&self) -> Invariance {
        Invariance::Scaling
    }

    fn ln_density(&self, x: f64, theta: &[f64]) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        let z = x / theta[0];
        LN_2 - LN_SQRT_2PI - theta[0].ln() - 0.5 * z * z
    }

    fn cdf(&self, x: f64, theta: &[f64]) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            erf(x / (theta[0] * std::f64::consts::SQRT_2))
        }
    }

    fn sample(&self, theta: &[f64], rng: &mut dyn RngCore) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        theta[0] * z.abs()
    }

    fn initial_guess(&self, values: &[f64]) -> Vec<f64> {
        let ms = values.iter().map(|x| x * x).sum::<f64>() / values.len().max(1) as f64;
        vec![ms.sqrt().max(1e-300)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{density_at, distribution};

    #[test]
    fn gaussian_location_density_at_center() {
        let f = GaussianLocation::new(1.0);
        let d = density_at(&f, 0.0, &[0.0]).unwrap();
        assert!((d - 0.398_942_280_401_432_7).abs() < 1e-12);
    }

    #[test]
    fn exponential_density_at_one() {
        let f = ExponentialScale::new();
        let d = density_at(&f, 1.0, &[1.0]).unwrap();
        assert!((d - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(density_at(&f, -1.0, &[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn cauchy_cdf_at_median_is_half() {
        let f = CauchyLocation::new(1.0);
        for &mu in &[-3.0, 0.0, 12.5] {
            assert_eq!(distribution(&f, mu, &[mu]).unwrap(), 0.5);
        }
    }

    #[test]
    fn parameter_outside_domain_is_an_error() {
        let f = ExponentialScale::new();
        assert!(matches!(density_at(&f, 1.0, &[-1.0]), Err(crate::Error::Domain { .. })));
        let t = TruncatedGaussianLocation::new(1.0, 0.0);
        assert!(density_at(&t, 1.0, &[-0.1]).is_err());
        assert!(density_at(&t, 1.0, &[0.0]).is_ok());
    }

    #[test]
    fn poisson_pmf_and_cdf() {
        let f = Poisson::new();
        let p2 = density_at(&f, 2.0, &[3.0]).unwrap();
        assert!((p2 - 4.5 * (-3.0f64).exp()).abs() < 1e-14);
        assert_eq!(density_at(&f, 2.5, &[3.0]).unwrap(), 0.0);
        let c = distribution(&f, 2.0, &[3.0]).unwrap();
        let direct = (-3.0f64).exp() * (1.0 + 3.0 + 4.5);
        assert!((c - direct).abs() < 1e-13);
        assert_eq!(distribution(&f, 2.7, &[3.0]).unwrap(), c);
    }

    #[test]
    fn weibull_shape_one_is_exponential() {
        let w = Weibull::with_shape(1.0);
        let e = ExponentialScale::new();
        for &x in &[0.1, 1.0, 4.0] {
            assert!((w.ln_density(x, &[2.0]) - e.ln_density(x, &[2.0])).abs() < 1e-13);
            assert!((w.cdf(x, &[2.0]) - e.cdf(x, &[2.0])).abs() < 1e-14);
        }
        let free = Weibull::free_shape();
        assert!((free.ln_density(1.5, &[2.0, 1.0]) - e.ln_density(1.5, &[2.0])).abs() < 1e-13);
    }
}
