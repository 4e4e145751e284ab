//! Monte Carlo coverage of credible intervals and the exact-calibration
//! residual `sup |f(θ|x) − |∂F(x,θ)/∂θ||`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics;
use crate::config::FamilyConfig;
use crate::consistency::{ConsistencyFactor, FactorKind};
use crate::error::{Error, Result};
use crate::families::{self, Interval, Sample, SamplingFamily};
use crate::grid::{AutoGrid, GridSpec};
use crate::posterior::{self, CredibleInterval};
use crate::rng;

pub const MIN_TRIALS: usize = 1000;
/// `|z|` below this passes.
pub const Z_PASS: f64 = 4.0;
/// Largest tolerated fraction of improper trials.
pub const IMPROPER_LIMIT: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Source of the per-trial interval.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMethod {
    /// Equal-tail interval of the assigned grid posterior.
    #[default]
    ExactAssign,
    /// `θ̂ ± z·se` from the maximum-likelihood Gaussian approximation.
    GaussianApprox,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSpec {
    pub family: FamilyConfig,
    /// Required for `exact_assign`, ignored by `gaussian_approx`.
    #[serde(default)]
    pub factor: Option<FactorKind>,
    pub true_value: Vec<f64>,
    /// Further true values; when non-empty these replace `true_value`.
    #[serde(default)]
    pub sweep: Vec<Vec<f64>>,
    pub n: usize,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    /// Parameter whose interval is scored; others are integrated out.
    #[serde(default)]
    pub target: usize,
    #[serde(default)]
    pub method: IntervalMethod,
    #[serde(default)]
    pub grid: AutoGrid,
}

impl CalibrationSpec {
    pub fn new(family: FamilyConfig, factor: Option<FactorKind>, true_value: Vec<f64>) -> Self {
        CalibrationSpec {
            family,
            factor,
            true_value,
            sweep: Vec::new(),
            n: 1,
            delta: 0.683,
            trials: 100_000,
            seed: 0,
            target: 0,
            method: IntervalMethod::ExactAssign,
            grid: AutoGrid::default(),
        }
    }

    /// True values visited, in stream-index order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        if self.sweep.is_empty() {
            vec![self.true_value.clone()]
        } else {
            self.sweep.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::validation("delta", format!("{} is not in (0, 1)", self.delta)));
        }
        if self.trials < MIN_TRIALS {
            return Err(Error::validation(
                "trials",
                format!("{} is below the minimum of {MIN_TRIALS}", self.trials),
            ));
        }
        if self.n == 0 {
            return Err(Error::validation("n", "must be at least 1"));
        }
        if self.method == IntervalMethod::ExactAssign && self.factor.is_none() {
            return Err(Error::validation("factor", "required for exact_assign"));
        }
        Ok(())
    }
}

/// Coverage at one true parameter value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPoint {
    pub true_value: Vec<f64>,
    pub trials: usize,
    pub hits: usize,
    pub coverage: f64,
    pub std_error: f64,
    pub z_score: f64,
    pub improper_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageReport {
    pub family: String,
    pub factor: String,
    pub method: IntervalMethod,
    pub target: usize,
    pub delta: f64,
    pub n: usize,
    pub seed: u64,
    pub requested_trials: usize,
    /// Trials scored, improper ones excluded.
    pub trials: usize,
    pub hits: usize,
    pub coverage: f64,
    pub std_error: f64,
    pub z_score: f64,
    pub verdict: Verdict,
    pub improper_count: usize,
    pub sweep: Vec<SweepPoint>,
}

/// `√(δ(1−δ)/T)`.
pub fn std_error(delta: f64, trials: usize) -> f64 {
    (delta * (1.0 - delta) / trials as f64).sqrt()
}

#[derive(Clone, Copy, Default)]
struct Tally {
    hits: usize,
    misses: usize,
    improper: usize,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            hits: self.hits + o.hits,
            misses: self.misses + o.misses,
            improper: self.improper + o.improper,
        }
    }

    fn scored(&self) -> usize {
        self.hits + self.misses
    }
}

/// First error by trial index, so failures do not depend on scheduling.
type Indexed = std::result::Result<Tally, (usize, Error)>;

fn combine(a: Indexed, b: Indexed) -> Indexed {
    match (a, b) {
        (Ok(x), Ok(y)) => Ok(x.merge(y)),
        (Err(e), Ok(_)) | (Ok(_), Err(e)) => Err(e),
        (Err(e1), Err(e2)) => Err(if e1.0 <= e2.0 { e1 } else { e2 }),
    }
}

/// Interval for one simulated sample.
pub fn trial_interval(
    family: &dyn SamplingFamily,
    factor: Option<&ConsistencyFactor>,
    sample: &Sample,
    spec: &CalibrationSpec,
) -> Result<CredibleInterval> {
    match spec.method {
        IntervalMethod::ExactAssign => {
            let factor = factor.ok_or_else(|| Error::validation("factor", "required for exact_assign"))?;
            let post = posterior::assign(family, factor, sample, &GridSpec::Auto(spec.grid.clone()))?;
            let post = if post.dims() == 2 {
                posterior::marginalize(&post, 1 - spec.target)?
            } else {
                post
            };
            posterior::credible_interval(&post, spec.delta)
        }
        IntervalMethod::GaussianApprox => asymptotics::approx_interval(family, sample, spec.target, spec.delta),
    }
}

fn run_point(
    family: &dyn SamplingFamily,
    factor: Option<&ConsistencyFactor>,
    spec: &CalibrationSpec,
    point: usize,
    truth: &[f64],
) -> Result<Tally> {
    let outcome = (0..spec.trials)
        .into_par_iter()
        .map(|t| -> Indexed {
            let mut stream = rng::stream(spec.seed, rng::trial_index(point, t));
            let sample = families::draw(family, truth, &mut stream, spec.n).map_err(|e| (t, e))?;
            match trial_interval(family, factor, &sample, spec) {
                Ok(ci) => Ok(if ci.contains(truth[spec.target]) {
                    Tally { hits: 1, ..Tally::default() }
                } else {
                    Tally { misses: 1, ..Tally::default() }
                }),
                Err(Error::ImproperPosterior(_)) => Ok(Tally { improper: 1, ..Tally::default() }),
                Err(e) => Err((t, e)),
            }
        })
        .reduce(|| Ok(Tally::default()), combine);
    outcome.map_err(|(_, e)| e)
}

fn summarize(delta: f64, hits: usize, scored: usize) -> (f64, f64, f64) {
    if scored == 0 {
        return (0.0, 0.0, 0.0);
    }
    let coverage = hits as f64 / scored as f64;
    let se = std_error(delta, scored);
    (coverage, se, (coverage - delta) / se)
}

/// Simulates `trials` samples per true value, scores the containment of the
/// true value, and aggregates. Deterministic in the seed.
pub fn run_coverage(spec: &CalibrationSpec) -> Result<CoverageReport> {
    spec.validate()?;
    let family = spec.family.build()?;
    let factor = match &spec.factor {
        Some(kind) => Some(ConsistencyFactor::for_family(kind, family.as_ref())?),
        None => None,
    };
    if spec.target >= family.dim() {
        return Err(Error::validation("target", format!("{} has {} parameter(s)", family.id(), family.dim())));
    }
    let points = spec.points();
    for p in &points {
        family
            .check_theta(p)
            .map_err(|e| Error::validation("true_value", e.to_string()))?;
    }

    let mut sweep = Vec::with_capacity(points.len());
    let mut total = Tally::default();
    for (i, truth) in points.iter().enumerate() {
        let tally = run_point(family.as_ref(), factor.as_ref(), spec, i, truth)?;
        let (coverage, std_error, z_score) = summarize(spec.delta, tally.hits, tally.scored());
        sweep.push(SweepPoint {
            true_value: truth.clone(),
            trials: tally.scored(),
            hits: tally.hits,
            coverage,
            std_error,
            z_score,
            improper_count: tally.improper,
        });
        total = total.merge(tally);
    }

    let (coverage, std_error, z_score) = summarize(spec.delta, total.hits, total.scored());
    let requested = spec.trials * points.len();
    let report = CoverageReport {
        family: family.id().to_owned(),
        factor: factor.as_ref().map_or_else(|| "none".to_owned(), |f| f.label().to_owned()),
        method: spec.method,
        target: spec.target,
        delta: spec.delta,
        n: spec.n,
        seed: spec.seed,
        requested_trials: requested,
        trials: total.scored(),
        hits: total.hits,
        coverage,
        std_error,
        z_score,
        verdict: if total.scored() > 0 && z_score.abs() < Z_PASS {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        improper_count: total.improper,
        sweep,
    };
    if report.improper_count as f64 > IMPROPER_LIMIT * requested as f64 {
        return Err(Error::CalibrationInfeasible(Box::new(report)));
    }
    Ok(report)
}

/// Row of the sweep CSV.
#[derive(Debug, Serialize)]
struct SweepRow {
    true_value: String,
    coverage: f64,
    std_error: f64,
    trials: usize,
    hits: usize,
    improper_count: usize,
}

/// `true_value,coverage,std_error,trials,hits,improper_count`; multi-parameter
/// true values are joined with `;`.
pub fn sweep_csv(report: &CoverageReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in &report.sweep {
        w.serialize(SweepRow {
            true_value: p
                .true_value
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(";"),
            coverage: p.coverage,
            std_error: p.std_error,
            trials: p.trials,
            hits: p.hits,
            improper_count: p.improper_count,
        })
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `sup |f(θ|x) − |∂F(x,θ)/∂θ||` over the grid nodes, maximized over the
/// single-datum posteriors for each `x`.
///
/// The derivative is a central difference with step `1e-5` times the
/// posterior's curvature width (the grid span for explicit grids), one-sided
/// where a step would leave the parameter domain.
pub fn exact_calibration_residual(
    family: &dyn SamplingFamily,
    factor: &ConsistencyFactor,
    x_samples: &[f64],
    grid_spec: &GridSpec,
) -> Result<f64> {
    if family.dim() != 1 || family.is_discrete() {
        return Err(Error::Unsupported(format!(
            "exact calibration needs a continuous one-parameter family, not {}",
            family.id()
        )));
    }
    if x_samples.is_empty() {
        return Err(Error::InvalidInput("no data points".into()));
    }
    let domain: Interval = family.params()[0].domain;
    let mut worst = 0.0f64;
    for &x in x_samples {
        let sample = Sample::new(family, vec![x])?;
        let post = posterior::assign(family, factor, &sample, grid_spec)?;
        let axis = post.grid().axis(0);
        let scale = post.placement().width.first().copied().unwrap_or(axis.span());
        let h = 1e-5 * scale;
        for (&theta, &f) in axis.nodes().iter().zip(post.values()) {
            let (up, down) = (theta + h, theta - h);
            let d = match (domain.contains(up), domain.contains(down)) {
                (true, true) => (family.cdf(x, &[up]) - family.cdf(x, &[down])) / (2.0 * h),
                (true, false) => (family.cdf(x, &[up]) - family.cdf(x, &[theta])) / h,
                (false, true) => (family.cdf(x, &[theta]) - family.cdf(x, &[down])) / h,
                (false, false) => return Err(Error::InvalidInput("grid step leaves the domain".into())),
            };
            worst = worst.max((f - d.abs()).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consistency::{location_factor, scale_factor};
    use crate::families::{CauchyLocation, ExponentialScale, GaussianLocation};

    fn gauss_spec(mu: f64, trials: usize) -> CalibrationSpec {
        let mut s = CalibrationSpec::new(
            FamilyConfig::new("gauss_loc").with("sigma0", 1.0),
            Some(FactorKind::Location),
            vec![mu],
        );
        s.trials = trials;
        s.seed = 11;
        s
    }

    #[test]
    fn residual_vanishes_for_invariant_pairs() {
        let g = GaussianLocation::new(1.0);
        let r = exact_calibration_residual(&g, &location_factor(), &[-2.0, 0.0, 3.0], &GridSpec::default()).unwrap();
        assert!(r < 1e-5, "{r}");
        let e = ExponentialScale::new();
        let r = exact_calibration_residual(&e, &scale_factor(), &[1.0], &GridSpec::default()).unwrap();
        assert!(r < 1e-5, "{r}");
        let c = CauchyLocation::new(1.0);
        let r = exact_calibration_residual(&c, &location_factor(), &[0.5], &GridSpec::default()).unwrap();
        assert!(r < 1e-4, "{r}");
    }

    #[test]
    fn residual_detects_tilted_factor() {
        let g = GaussianLocation::new(1.0);
        let tilted = ConsistencyFactor::custom(1.0, 0.0, &[crate::families::ParamRole::Location]);
        let r = exact_calibration_residual(&g, &tilted, &[0.0], &GridSpec::default()).unwrap();
        assert!(r > 0.05, "{r}");
    }

    #[test]
    fn spec_validation_names_fields() {
        let mut s = gauss_spec(0.0, 1000);
        s.delta = 1.5;
        match run_coverage(&s) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "delta"),
            other => panic!("{other:?}"),
        }
        let s = gauss_spec(0.0, 999);
        assert!(matches!(run_coverage(&s), Err(Error::Validation { .. })));
    }

    #[test]
    fn small_run_is_deterministic_and_sane() {
        let s = gauss_spec(0.0, 2000);
        let a = run_coverage(&s).unwrap();
        let b = run_coverage(&s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials, 2000);
        assert!(a.hits <= a.trials);
        assert!(a.z_score.abs() < Z_PASS, "{a:?}");
    }

    #[test]
    fn sweep_rows() {
        let mut s = gauss_spec(0.0, 1000);
        s.sweep = vec![vec![-1.0], vec![4.0]];
        let r = run_coverage(&s).unwrap();
        assert_eq!(r.sweep.len(), 2);
        assert_eq!(r.requested_trials, 2000);
        let csv = sweep_csv(&r).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "true_value,coverage,std_error,trials,hits,improper_count");
        assert!(lines[2].starts_with("4,"));
    }

    #[test]
    fn std_error_formula() {
        assert!((std_error(0.5, 100) - 0.05).abs() < 1e-15);
    }
}
