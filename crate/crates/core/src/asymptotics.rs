//! Maximum likelihood, the large-sample Gaussian approximation, and coverage
//! as a function of sample size.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::calibration::{self, CalibrationSpec, CoverageReport, IntervalMethod};
use crate::error::{Error, Result};
use crate::families::{self, Interval, Sample, SamplingFamily};
use crate::grid::{self, GridSpec};
use crate::optimize::{self, maximize_1d, maximize_nd};
use crate::posterior::{CredibleInterval, PosteriorDensity};

const MAX_ITER: usize = 500;
const POLISH_STEPS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MleResult {
    pub estimate: Vec<f64>,
    pub log_likelihood: f64,
    /// `−∂²ℓ` at the estimate, row-major; absent for boundary solutions.
    pub observed_information: Option<Vec<f64>>,
    /// Finite-difference gradient norm at the estimate.
    pub gradient_norm: f64,
    pub converged: bool,
    /// The estimate lies on the boundary of the parameter domain.
    pub boundary: bool,
    pub iterations: usize,
}

impl MleResult {
    pub fn dim(&self) -> usize {
        self.estimate.len()
    }

    /// Inverse information, row-major.
    pub fn covariance(&self) -> Result<Vec<f64>> {
        let info = self
            .observed_information
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("no information at a boundary estimate".into()))?;
        invert_pd(info, self.dim())
    }
}

fn invert_pd(m: &[f64], d: usize) -> Result<Vec<f64>> {
    let not_pd = || Error::InvalidInput("observed information is not positive definite".into());
    match d {
        1 if m[0] > 0.0 => Ok(vec![1.0 / m[0]]),
        2 => {
            let det = m[0] * m[3] - m[1] * m[2];
            if !(m[0] > 0.0 && det > 0.0) {
                return Err(not_pd());
            }
            Ok(vec![m[3] / det, -m[1] / det, -m[2] / det, m[0] / det])
        }
        _ => Err(not_pd()),
    }
}

fn scale_of(x: f64) -> f64 {
    if x != 0.0 && x.is_finite() {
        0.1 * x.abs()
    } else {
        1.0
    }
}

/// Steps for the observed information at `x`.
pub fn information_steps(x: &[f64], domains: &[Interval]) -> Vec<f64> {
    x.iter()
        .zip(domains)
        .map(|(&v, d)| optimize::fd_step(v, v.abs().max(1e-3), d))
        .collect()
}

/// Local maximizer of the log-likelihood from `init`.
pub fn mle(family: &dyn SamplingFamily, sample: &Sample, init: &[f64]) -> Result<MleResult> {
    family.check_theta(init)?;
    let values = &sample.values;
    let ll = |t: &[f64]| {
        if family.in_domain(t) {
            families::ln_likelihood(family, values, t)
        } else {
            f64::NEG_INFINITY
        }
    };
    let domains: Vec<Interval> = family.params().iter().map(|p| p.domain).collect();
    let (estimate, value, boundary, iterations) = if family.dim() == 1 {
        let m = maximize_1d(|t| ll(&[t]), init[0], scale_of(init[0]), &domains[0], MAX_ITER)?;
        (vec![m.x], m.value, m.boundary.is_some(), m.iterations)
    } else {
        let scales: Vec<f64> = init.iter().map(|&x| scale_of(x)).collect();
        let m = maximize_nd(ll, init, &scales, &domains, MAX_ITER)?;
        (m.x, m.value, m.boundary.iter().any(Option::is_some), m.sweeps)
    };
    if !value.is_finite() {
        return Err(Error::NonConvergence {
            iterations,
            trace: format!("log-likelihood {value} at {estimate:?}"),
        });
    }
    let (estimate, value) = if boundary {
        (estimate, value)
    } else {
        polish(&ll, estimate, value, &domains)
    };
    let steps = information_steps(&estimate, &domains);
    let gradient_norm = norm(&optimize::gradient(&ll, &estimate, &steps));
    let observed_information = if boundary {
        None
    } else {
        let info: Vec<f64> = optimize::hessian(&ll, &estimate, &steps).iter().map(|h| -h).collect();
        invert_pd(&info, estimate.len()).map_err(|_| Error::NonConvergence {
            iterations,
            trace: format!("information {info:?} at {estimate:?} is not positive definite"),
        })?;
        Some(info)
    };
    Ok(MleResult {
        estimate,
        log_likelihood: value,
        observed_information,
        gradient_norm,
        converged: true,
        boundary,
        iterations,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|g| g * g).sum::<f64>().sqrt()
}

/// Newton steps on the gradient. Value comparisons stall where `ℓ` is flat
/// to rounding, about `√ε` from the root; steps here are accepted only when
/// the gradient norm shrinks, so the result never gets worse.
fn polish(ll: &impl Fn(&[f64]) -> f64, mut x: Vec<f64>, mut value: f64, domains: &[Interval]) -> (Vec<f64>, f64) {
    let d = x.len();
    let steps = information_steps(&x, domains);
    let mut g = optimize::gradient(ll, &x, &steps);
    for _ in 0..POLISH_STEPS {
        let h = optimize::hessian(ll, &x, &steps);
        let Ok(inv) = invert_pd(&h.iter().map(|v| -v).collect::<Vec<_>>(), d) else {
            break;
        };
        let next: Vec<f64> = (0..d)
            .map(|i| x[i] + (0..d).map(|j| inv[i * d + j] * g[j]).sum::<f64>())
            .collect();
        if !next.iter().zip(domains).all(|(v, dom)| dom.contains(*v)) {
            break;
        }
        let steps = information_steps(&next, domains);
        let g_next = optimize::gradient(ll, &next, &steps);
        let v_next = ll(&next);
        if norm(&g_next) >= norm(&g) || !v_next.is_finite() {
            break;
        }
        x = next;
        g = g_next;
        value = v_next;
    }
    (x, value)
}

/// Gaussian with mean `θ̂` and covariance the inverse observed information,
/// discretized on the given grid (automatic: placed on the Gaussian itself).
pub fn gaussian_approx(result: &MleResult, grid_spec: &GridSpec) -> Result<PosteriorDensity> {
    if !result.converged || result.boundary {
        return Err(Error::InvalidInput("Gaussian approximation needs a converged interior estimate".into()));
    }
    let info = result
        .observed_information
        .clone()
        .ok_or_else(|| Error::InvalidInput("estimate carries no information".into()))?;
    result.covariance()?;
    let d = result.dim();
    let mean = result.estimate.clone();
    let quad = move |t: &[f64]| {
        let mut q = 0.0;
        for i in 0..d {
            for j in 0..d {
                q += (t[i] - mean[i]) * info[i * d + j] * (t[j] - mean[j]);
            }
        }
        -0.5 * q
    };
    match grid_spec {
        GridSpec::Explicit(g) => {
            if g.dims() != d {
                return Err(Error::InvalidInput("grid dimension differs from the estimate".into()));
            }
            PosteriorDensity::from_log_values(g.clone(), &g.evaluate(&quad))
        }
        GridSpec::Auto(spec) => {
            let domains = vec![Interval::real(); d];
            let placed = grid::place(&quad, &result.estimate, &domains, spec)?;
            PosteriorDensity::from_values(placed.grid, placed.values)
        }
    }
}

/// `θ̂ₜ ± z·seₜ` with `z` the `(1+δ)/2` normal quantile. A boundary estimate
/// gives the degenerate interval `(θ̂ₜ, θ̂ₜ)`, which contains nothing.
pub fn approx_interval(family: &dyn SamplingFamily, sample: &Sample, target: usize, delta: f64) -> Result<CredibleInterval> {
    let init = family.initial_guess(&sample.values);
    let m = mle(family, sample, &init)?;
    let center = m.estimate[target];
    if m.boundary {
        return Ok(CredibleInterval {
            lo: center,
            hi: center,
            level: delta,
        });
    }
    let cov = m.covariance()?;
    let se = cov[target * m.dim() + target].sqrt();
    let z = Normal::standard().inverse_cdf(0.5 * (1.0 + delta));
    Ok(CredibleInterval {
        lo: center - z * se,
        hi: center + z * se,
        level: delta,
    })
}

/// Coverage at each sample size. The `k`-th size uses master seed
/// `seed + k`, so sizes draw independent streams.
pub fn coverage_vs_n(spec: &CalibrationSpec, n_list: &[usize], method: IntervalMethod) -> Result<Vec<CoverageReport>> {
    if n_list.is_empty() {
        return Err(Error::validation("n_list", "must not be empty"));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation("n_list", "must be strictly increasing"));
    }
    n_list
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let mut s = spec.clone();
            s.n = n;
            s.method = method;
            s.seed = spec.seed.wrapping_add(k as u64);
            calibration::run_coverage(&s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consistency::location_factor;
    use crate::families::{ExponentialScale, GaussianLocation, Poisson};
    use crate::posterior::assign;

    #[test]
    fn exponential_mle_is_mean() {
        let f = ExponentialScale::new();
        let s = Sample::new(&f, vec![1.0, 3.0]).unwrap();
        let m = mle(&f, &s, &[0.3]).unwrap();
        assert!((m.estimate[0] - 2.0).abs() < 1e-6);
        // information n/τ̂²
        let info = m.observed_information.unwrap()[0];
        assert!((info - 0.5).abs() < 1e-5, "{info}");
    }

    #[test]
    fn poisson_mle_is_mean() {
        let f = Poisson::new();
        let s = Sample::new(&f, vec![2.0, 4.0]).unwrap();
        let m = mle(&f, &s, &[1.0]).unwrap();
        assert!((m.estimate[0] - 3.0).abs() < 1e-6);
        assert!(!m.boundary);
    }

    #[test]
    fn poisson_all_zero_is_boundary() {
        let f = Poisson::new();
        let s = Sample::new(&f, vec![0.0]).unwrap();
        let m = mle(&f, &s, &f.initial_guess(&s.values)).unwrap();
        assert!(m.boundary);
        assert!(m.observed_information.is_none());
        let ci = approx_interval(&f, &s, 0, 0.683).unwrap();
        assert!(!ci.contains(ci.lo));
        assert!(gaussian_approx(&m, &GridSpec::default()).is_err());
    }

    #[test]
    fn gaussian_case_is_exact() {
        let f = GaussianLocation::new(1.0);
        let s = Sample::new(&f, vec![0.2, -0.4, 1.1]).unwrap();
        let exact = assign(&f, &location_factor(), &s, &GridSpec::default()).unwrap();
        let m = mle(&f, &s, &[0.0]).unwrap();
        let approx = gaussian_approx(&m, &GridSpec::Explicit(exact.grid().clone())).unwrap();
        assert!(exact.l1_distance(&approx).unwrap() < 1e-6);
    }

    #[test]
    fn n_list_must_increase() {
        let spec = CalibrationSpec::new(crate::config::FamilyConfig::new("poisson"), None, vec![2.0]);
        assert!(matches!(
            coverage_vs_n(&spec, &[5, 1], IntervalMethod::GaussianApprox),
            Err(Error::Validation { .. })
        ));
    }
}
