use std::sync::Arc;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::families::{
    FamilyRef, Interval, Invariance, MonotoneMap, ParamRole, ParamSpec, SamplingFamily, Support,
};

/// The family of `y = g(x)` when `x` follows `base`:
/// `f(y|θ) = f(g⁻¹(y)|θ) · |g'(g⁻¹(y))|⁻¹`.
#[derive(Debug, Clone)]
pub struct Pushforward {
    id: String,
    base: FamilyRef,
    map: MonotoneMap,
}

impl Pushforward {
    pub fn base(&self) -> &FamilyRef {
        &self.base
    }

    pub fn map(&self) -> &MonotoneMap {
        &self.map
    }
}

impl SamplingFamily for Pushforward {
    fn id(&self) -> &str {
        &self.id
    }

    fn params(&self) -> &[ParamSpec] {
        self.base.params()
    }

    fn support(&self) -> Support {
        Support::continuous(self.map.map_interval(&self.base.support().range))
    }

    fn invariance(&self) -> Invariance {
        // A transformed family is a different inference problem; any
        // invariance it has must be established separately.
        Invariance::None
    }

    fn ln_density(&self, y: f64, theta: &[f64]) -> f64 {
        let x = self.map.inverse(y);
        if x.is_nan() {
            return f64::NEG_INFINITY;
        }
        let d = self.map.derivative(x).abs();
        if d == 0.0 || !d.is_finite() {
            return f64::NEG_INFINITY;
        }
        self.base.ln_density(x, theta) - d.ln()
    }

    fn cdf(&self, y: f64, theta: &[f64]) -> f64 {
        let x = self.map.inverse(y);
        let f = self.base.cdf(x, theta);
        if self.map.is_increasing() {
            f
        } else {
            1.0 - f
        }
    }

    fn sample(&self, theta: &[f64], rng: &mut dyn RngCore) -> f64 {
        self.map.forward(self.base.sample(theta, rng))
    }

    fn initial_guess(&self, values: &[f64]) -> Vec<f64> {
        let back: Vec<f64> = values.iter().map(|&y| self.map.inverse(y)).collect();
        self.base.initial_guess(&back)
    }
}

/// Pushforward of a continuous family through a strictly monotone map.
pub fn pushforward(family: FamilyRef, map: MonotoneMap) -> Result<FamilyRef> {
    if family.is_discrete() {
        return Err(Error::Unsupported(format!(
            "pushforward of discrete family {}",
            family.id()
        )));
    }
    Ok(Arc::new(Pushforward {
        id: format!("{}∘{}", map.label(), family.id()),
        base: family,
        map,
    }))
}

/// A scale family `σ⁻¹ψ(x/σ)` rewritten in `y = ln x`, `μ = ln σ`.
///
/// The density is `φ(y−μ) = e^(y−μ) ψ(e^(y−μ))`, a pure location family.
#[derive(Debug, Clone)]
pub struct LogReduced {
    id: String,
    base: FamilyRef,
    params: Vec<ParamSpec>,
}

impl LogReduced {
    pub fn base(&self) -> &FamilyRef {
        &self.base
    }
}

impl SamplingFamily for LogReduced {
    fn id(&self) -> &str {
        &self.id
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

    fn ln_density(&self, y: f64, theta: &[f64]) -> f64 {
        self.base.ln_density(y.exp(), &[theta[0].exp()]) + y
    }

    fn cdf(&self, y: f64, theta: &[f64]) -> f64 {
        self.base.cdf(y.exp(), &[theta[0].exp()])
    }

    fn sample(&self, theta: &[f64], rng: &mut dyn RngCore) -> f64 {
        self.base.sample(&[theta[0].exp()], rng).ln()
    }

    fn initial_guess(&self, values: &[f64]) -> Vec<f64> {
        let back: Vec<f64> = values.iter().map(|y| y.exp()).collect();
        vec![self.base.initial_guess(&back)[0].ln()]
    }
}

/// Reduces a one-parameter scale family on `(0, ∞)` to location form.
///
/// Returns the log-transformed family, the variate map `y = ln x` and the
/// parameter map `μ = ln σ`.
pub fn reduce_scale_to_location(family: FamilyRef) -> Result<(FamilyRef, MonotoneMap, MonotoneMap)> {
    let support = family.support();
    let ok = family.invariance() == Invariance::Scaling
        && family.dim() == 1
        && !support.lattice
        && support.range.lo == 0.0
        && support.range.hi == f64::INFINITY;
    if !ok {
        return Err(Error::Unsupported(format!(
            "{} is not a one-parameter scale family on (0, inf)",
            family.id()
        )));
    }
    let name = format!("ln_{}", family.params()[0].name);
    let reduced = LogReduced {
        id: format!("log_{}", family.id()),
        base: family,
        params: vec![ParamSpec::new(&name, ParamRole::Location, Interval::real())],
    };
    Ok((Arc::new(reduced), MonotoneMap::ln(), MonotoneMap::ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{ExponentialScale, GaussianLocation, Poisson};

    #[test]
    fn log_exponential_is_gumbel_type() {
        let (fam, vmap, pmap) = reduce_scale_to_location(Arc::new(ExponentialScale::new())).unwrap();
        let mu = 0.7;
        let d = fam.ln_density(mu, &[mu]).exp();
        assert!((d - (-1.0f64).exp()).abs() < 1e-15);
        for &y in &[-2.0, 0.3, 1.5] {
            let u: f64 = y - mu;
            let closed = (u - u.exp()).exp();
            assert!((fam.ln_density(y, &[mu]).exp() - closed).abs() < 1e-14);
        }
        assert_eq!(pmap.forward(1.0), 0.0);
        assert_eq!(vmap.forward(1.0), 0.0);
        assert_eq!(fam.invariance(), Invariance::Translation);
    }

    #[test]
    fn reduce_rejects_non_scale_families() {
        assert!(matches!(
            reduce_scale_to_location(Arc::new(GaussianLocation::new(1.0))),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn pushforward_rejects_discrete() {
        assert!(matches!(
            pushforward(Arc::new(Poisson::new()), MonotoneMap::identity()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn identity_pushforward_keeps_density() {
        let base: FamilyRef = Arc::new(GaussianLocation::new(2.0));
        let p = pushforward(base.clone(), MonotoneMap::identity()).unwrap();
        for &x in &[-3.0, 0.0, 1.25, 9.0] {
            assert_eq!(p.ln_density(x, &[0.5]), base.ln_density(x, &[0.5]));
        }
    }

    #[test]
    fn push_then_pull_restores_density() {
        let base: FamilyRef = Arc::new(ExponentialScale::new());
        let m = MonotoneMap::ln();
        let there = pushforward(base.clone(), m.clone()).unwrap();
        let back = pushforward(there, m.inverted()).unwrap();
        for &x in &[0.05, 0.5, 1.0, 3.0, 10.0] {
            let a = base.ln_density(x, &[1.5]).exp();
            let b = back.ln_density(x, &[1.5]).exp();
            assert!((a - b).abs() < 1e-10, "{x}: {a} vs {b}");
        }
    }

    #[test]
    fn decreasing_map_cdf_is_reflected() {
        let base: FamilyRef = Arc::new(GaussianLocation::new(1.0));
        let p = pushforward(base.clone(), MonotoneMap::affine(-1.0, 0.0).unwrap()).unwrap();
        for &y in &[-1.0, 0.0, 2.0] {
            let expected = 1.0 - base.cdf(-y, &[0.3]);
            assert!((p.cdf(y, &[0.3]) - expected).abs() < 1e-15);
        }
    }
}
