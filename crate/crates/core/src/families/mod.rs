//! Sampling families: densities, distribution functions, samplers, and the
//! variate transformations that carry one family into another.

mod builtin;
mod maps;
mod registry;
mod transform;

use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use builtin::{
    CauchyLocation, ExponentialScale, GaussianLocation, GaussianLocationScale, HalfGaussianScale,
    Poisson, TruncatedGaussianLocation, Weibull,
};
pub use maps::{MonotoneMap, VariateMap};
pub use registry::{FamilyRegistry, Hyperparameters};
pub use transform::{pushforward, reduce_scale_to_location, LogReduced, Pushforward};

pub type FamilyRef = Arc<dyn SamplingFamily>;

/// A real interval with independently open or closed ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }

    pub const fn real() -> Self {
        Interval::new(f64::NEG_INFINITY, f64::INFINITY, false, false)
    }

    /// `(0, ∞)`
    pub const fn positive() -> Self {
        Interval::new(0.0, f64::INFINITY, false, false)
    }

    /// `[lo, ∞)`
    pub const fn at_least(lo: f64) -> Self {
        Interval::new(lo, f64::INFINITY, true, false)
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn is_bounded_below(&self) -> bool {
        self.lo.is_finite()
    }

    pub fn is_bounded_above(&self) -> bool {
        self.hi.is_finite()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { '(' };
        let close = if self.hi_closed { ']' } else { ')' };
        write!(f, "{open}{}, {}{close}", self.lo, self.hi)
    }
}

/// Sample space of a family: a real interval, optionally restricted to the
/// integers inside it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub range: Interval,
    pub lattice: bool,
}

impl Support {
    pub const fn continuous(range: Interval) -> Self {
        Support {
            range,
            lattice: false,
        }
    }

    pub const fn counts() -> Self {
        Support {
            range: Interval::at_least(0.0),
            lattice: true,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.range.contains(x) && (!self.lattice || x.fract() == 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamRole {
    Location,
    Scale,
    Shape,
    Rate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub role: ParamRole,
    pub domain: Interval,
}

impl ParamSpec {
    pub fn new(name: &str, role: ParamRole, domain: Interval) -> Self {
        ParamSpec {
            name: name.to_owned(),
            role,
            domain,
        }
    }
}

/// Transformation group under which the family's form is invariant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariance {
    Translation,
    Scaling,
    TranslationScaling,
    None,
}

/// A parametric family of sampling distributions for a scalar variate.
///
/// Implementations are immutable and shareable across threads. The unchecked
/// methods assume the parameter point lies in the family's domain; the free
/// functions [`density_at`], [`distribution`] and [`draw`] check it first.
pub trait SamplingFamily: Send + Sync + fmt::Debug {
    fn id(&self) -> &str;

    fn params(&self) -> &[ParamSpec];

    fn support(&self) -> Support;

    fn invariance(&self) -> Invariance;

    /// Log of the density (pmf for lattice families); `-inf` off the support.
    fn ln_density(&self, x: f64, theta: &[f64]) -> f64;

    /// Cumulative distribution function `F(x, θ)`.
    fn cdf(&self, x: f64, theta: &[f64]) -> f64;

    fn sample(&self, theta: &[f64], rng: &mut dyn RngCore) -> f64;

    /// A rough parameter point suggested by the data; seeds mode and
    /// likelihood searches. Need not be accurate, only inside the domain.
    fn initial_guess(&self, values: &[f64]) -> Vec<f64>;

    fn dim(&self) -> usize {
        self.params().len()
    }

    fn is_discrete(&self) -> bool {
        self.support().lattice
    }

    fn in_domain(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && self
                .params()
                .iter()
                .zip(theta)
                .all(|(p, &t)| p.domain.contains(t))
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "family {} takes {} parameter(s), got {}",
                self.id(),
                self.dim(),
                theta.len()
            )));
        }
        for (p, &t) in self.params().iter().zip(theta) {
            if !p.domain.contains(t) {
                return Err(Error::domain(p.name.clone(), t, p.domain));
            }
        }
        Ok(())
    }
}

/// An ordered list of observations from one family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub values: Vec<f64>,
    pub family_id: String,
}

impl Sample {
    /// Validates that the list is non-empty and every value lies in the
    /// family's support.
    pub fn new(family: &dyn SamplingFamily, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("sample must not be empty".into()));
        }
        let support = family.support();
        if let Some(&bad) = values.iter().find(|&&x| !support.contains(x)) {
            return Err(Error::domain("observation", bad, support.range));
        }
        Ok(Sample {
            values,
            family_id: family.id().to_owned(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `f(x|θ)`; zero off the support.
pub fn density_at(family: &dyn SamplingFamily, x: f64, theta: &[f64]) -> Result<f64> {
    family.check_theta(theta)?;
    Ok(family.ln_density(x, theta).exp())
}

/// `F(x, θ)`.
pub fn distribution(family: &dyn SamplingFamily, x: f64, theta: &[f64]) -> Result<f64> {
    family.check_theta(theta)?;
    Ok(family.cdf(x, theta))
}

/// `n` independent draws at `theta`; a deterministic function of the stream.
pub fn draw(
    family: &dyn SamplingFamily,
    theta: &[f64],
    rng: &mut dyn RngCore,
    n: usize,
) -> Result<Sample> {
    family.check_theta(theta)?;
    if n == 0 {
        return Err(Error::InvalidInput("draw count must be at least 1".into()));
    }
    let values = (0..n).map(|_| family.sample(theta, rng)).collect();
    Ok(Sample {
        values,
        family_id: family.id().to_owned(),
    })
}

/// Log-likelihood of an iid sample.
pub fn ln_likelihood(family: &dyn SamplingFamily, values: &[f64], theta: &[f64]) -> f64 {
    values.iter().map(|&x| family.ln_density(x, theta)).sum()
}
