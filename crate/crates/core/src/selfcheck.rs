//! The acceptance suite as a library routine, shared by `cfactor self-check`
//! and the `acceptance` test target.
//!
//! Each check records its measured values and a numeric verdict. Wall-clock
//! times are kept apart from the report so that two runs with the same seed
//! serialize identically.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::asymptotics::coverage_vs_n;
use crate::calibration::{exact_calibration_residual, run_coverage, std_error, CalibrationSpec, IntervalMethod};
use crate::config::FamilyConfig;
use crate::consistency::{location_factor, scale_factor, ConsistencyFactor, FactorKind, FactorizationScan};
use crate::error::Result;
use crate::families::{
    self, reduce_scale_to_location, CauchyLocation, ExponentialScale, FamilyRef, GaussianLocation,
    GaussianLocationScale, Sample, SamplingFamily, Weibull,
};
use crate::grid::{GridSpec, DEFAULT_NODES_2D};
use crate::posterior::{assign, transform_parameter, update, PosteriorDensity};
use crate::rng;

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Residual bound for the exact-calibration identity.
pub const RESIDUAL_MAX: f64 = 1e-4;
/// Coverage checks use `T` trials and pass within this many standard errors.
pub const COVERAGE_TRIALS: usize = 100_000;
pub const COVERAGE_Z: f64 = 4.0;
pub const DELTAS: [f64; 3] = [0.5, 0.683, 0.9];
pub const SCAN_Q: [f64; 3] = [-1.0, 0.0, 1.0];
pub const SCAN_R: [f64; 3] = [0.0, 1.0, 2.0];
pub const SCAN_UNIQUE_MAX: f64 = 1e-4;
pub const SCAN_OTHER_MIN: f64 = 1e-2;
pub const ORDER_SAMPLES: usize = 20;
pub const ORDER_N: usize = 5;
pub const ORDER_L1_MAX: f64 = 1e-10;
pub const REDUCTION_L1_MAX: f64 = 1e-6;
pub const BROKEN_DELTA: f64 = 0.683;
pub const TRUNCATED_MIN_GAP: f64 = 0.03;
pub const POISSON_MIN_GAP: f64 = 0.05;
pub const SWEEP_TRIALS: usize = 20_000;
pub const POISSON_N: [usize; 4] = [1, 5, 25, 100];
pub const TRUNCATED_N: [usize; 4] = [1, 4, 16, 64];
pub const RECOVERY_MAX_GAP: f64 = 0.015;

/// Wall-clock budgets in seconds, indexed by criterion id.
pub fn budget(id: u32) -> Option<f64> {
    match id {
        1 => Some(10.0),
        2 => Some(120.0),
        3 => Some(60.0),
        7 => Some(300.0),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Criterion {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    /// Measured quantities by name.
    pub values: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfCheckReport {
    pub seed: u64,
    pub criteria: Vec<Criterion>,
    pub passed: usize,
    pub failed: usize,
}

impl SelfCheckReport {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    pub id: u32,
    pub seconds: f64,
    pub budget: Option<f64>,
}

impl Timing {
    pub fn within_budget(&self) -> bool {
        self.budget.is_none_or(|b| self.seconds < b)
    }
}

fn criterion(id: u32, name: &str, pass: bool, values: BTreeMap<String, f64>) -> Criterion {
    Criterion {
        id,
        name: name.to_owned(),
        pass,
        values,
    }
}

fn gauss() -> FamilyRef {
    Arc::new(GaussianLocation::new(1.0))
}

fn cauchy() -> FamilyRef {
    Arc::new(CauchyLocation::new(1.0))
}

fn expo() -> FamilyRef {
    Arc::new(ExponentialScale::new())
}

/// Exact-calibration residuals for the three invariant headline pairs.
pub fn exact_calibration() -> Result<Criterion> {
    let cases: [(&str, FamilyRef, ConsistencyFactor, [f64; 3]); 3] = [
        ("gauss_loc", gauss(), location_factor(), [-2.0, 0.0, 3.0]),
        ("cauchy_loc", cauchy(), location_factor(), [-2.0, 0.0, 3.0]),
        ("exp_scale", expo(), scale_factor(), [0.5, 1.0, 3.0]),
    ];
    let mut values = BTreeMap::new();
    let mut pass = true;
    for (id, fam, factor, xs) in cases {
        let r = exact_calibration_residual(fam.as_ref(), &factor, &xs, &GridSpec::default())?;
        pass &= r < RESIDUAL_MAX;
        values.insert(format!("{id}.residual"), r);
    }
    Ok(criterion(1, "exact calibration residual", pass, values))
}

/// Coverage of the invariant factors at three levels.
pub fn coverage_headline(seed: u64) -> Result<Criterion> {
    let mut values = BTreeMap::new();
    let mut pass = true;
    for (id, kind, truth) in [("gauss_loc", FactorKind::Location, 0.0), ("exp_scale", FactorKind::Scale, 1.0)] {
        for delta in DELTAS {
            let mut spec = CalibrationSpec::new(FamilyConfig::new(id), Some(kind.clone()), vec![truth]);
            spec.delta = delta;
            spec.trials = COVERAGE_TRIALS;
            spec.seed = seed;
            let r = run_coverage(&spec)?;
            let bound = COVERAGE_Z * std_error(delta, r.trials);
            pass &= (r.coverage - delta).abs() < bound && r.improper_count == 0;
            values.insert(format!("{id}.delta_{delta}.coverage"), r.coverage);
            values.insert(format!("{id}.delta_{delta}.z"), r.z_score);
        }
    }
    Ok(criterion(2, "coverage equals delta", pass, values))
}

/// Factorization discrepancy over the `(q, r)` grid of candidate factors.
pub fn uniqueness_scan() -> Result<Criterion> {
    let fam = GaussianLocationScale::new();
    let sample = Sample::new(&fam, vec![-1.0, 1.0])?;
    let scan = FactorizationScan::new(&fam, &sample, &GridSpec::nodes(DEFAULT_NODES_2D))?;
    let mut values = BTreeMap::new();
    let mut pass = true;
    for q in SCAN_Q {
        for r in SCAN_R {
            let d = scan.evaluate(q, r)?.discrepancy();
            pass &= if q == 0.0 && r == 1.0 {
                d < SCAN_UNIQUE_MAX
            } else {
                d > SCAN_OTHER_MIN
            };
            values.insert(format!("q_{q}.r_{r}"), d);
        }
    }
    Ok(criterion(3, "factorization uniqueness", pass, values))
}

/// Visits every permutation of `items` (Heap's algorithm).
fn permutations(items: &[f64]) -> Vec<Vec<f64>> {
    fn heap(k: usize, a: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k - 1 {
            heap(k - 1, a, out);
            let j = if k.is_multiple_of(2) { i } else { 0 };
            a.swap(j, k - 1);
        }
        heap(k - 1, a, out);
    }
    let mut a = items.to_vec();
    let mut out = Vec::new();
    heap(a.len(), &mut a, &mut out);
    out
}

/// Sequential posterior for `order`, on the given grid.
fn sequential(family: &dyn SamplingFamily, factor: &ConsistencyFactor, order: &[f64], grid: &GridSpec) -> Result<PosteriorDensity> {
    let first = Sample::new(family, vec![order[0]])?;
    let mut post = assign(family, factor, &first, grid)?;
    for &x in &order[1..] {
        post = update(&post, family, x)?;
    }
    Ok(post)
}

/// Largest L1 distance between sequential posteriors over all pairs of
/// orderings of one sample.
pub fn order_spread(family: &dyn SamplingFamily, factor: &ConsistencyFactor, sample: &Sample) -> Result<f64> {
    let batch = assign(family, factor, sample, &GridSpec::default())?;
    let grid = GridSpec::Explicit(batch.grid().clone());
    let posts: Vec<PosteriorDensity> = permutations(&sample.values)
        .iter()
        .map(|o| sequential(family, factor, o, &grid))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for i in 0..posts.len() {
        for j in i + 1..posts.len() {
            worst = worst.max(posts[i].l1_distance(&posts[j])?);
        }
    }
    Ok(worst)
}

/// Posteriors are independent of the order in which data arrive.
pub fn order_invariance(seed: u64) -> Result<Criterion> {
    let cases: [(&str, FamilyRef, ConsistencyFactor, f64); 3] = [
        ("gauss_loc", gauss(), location_factor(), 0.0),
        ("cauchy_loc", cauchy(), location_factor(), 0.0),
        ("exp_scale", expo(), scale_factor(), 1.0),
    ];
    let mut values = BTreeMap::new();
    let mut pass = true;
    for (k, (id, fam, factor, truth)) in cases.into_iter().enumerate() {
        let mut worst = 0.0f64;
        for s in 0..ORDER_SAMPLES {
            let mut stream = rng::stream(seed, rng::trial_index(k, s));
            let sample = families::draw(fam.as_ref(), &[truth], &mut stream, ORDER_N)?;
            worst = worst.max(order_spread(fam.as_ref(), &factor, &sample)?);
        }
        pass &= worst < ORDER_L1_MAX;
        values.insert(format!("{id}.max_l1"), worst);
    }
    Ok(criterion(4, "order invariance", pass, values))
}

/// L1 distance between the scale-factor posterior pushed through `ln` and
/// the location-factor posterior of the log-reduced family on the same nodes.
pub fn reduction_distance(family: FamilyRef, x: f64) -> Result<f64> {
    let sample = Sample::new(family.as_ref(), vec![x])?;
    let direct = assign(family.as_ref(), &scale_factor(), &sample, &GridSpec::default())?;
    let (reduced, vmap, pmap) = reduce_scale_to_location(family)?;
    let pushed = transform_parameter(&direct, &pmap)?;
    let y = Sample::new(reduced.as_ref(), vec![vmap.forward(x)])?;
    let located = assign(
        reduced.as_ref(),
        &location_factor(),
        &y,
        &GridSpec::Explicit(pushed.grid().clone()),
    )?;
    pushed.l1_distance(&located)
}

/// Scale inference equals location inference after the log map.
pub fn scale_reduction() -> Result<Criterion> {
    let cases: [(&str, FamilyRef); 2] = [("exp_scale", expo()), ("weibull_k2", Arc::new(Weibull::with_shape(2.0)))];
    let mut values = BTreeMap::new();
    let mut pass = true;
    for (id, fam) in cases {
        for x in [0.5, 1.0, 3.0] {
            let d = reduction_distance(fam.clone(), x)?;
            pass &= d < REDUCTION_L1_MAX;
            values.insert(format!("{id}.x_{x}.l1"), d);
        }
    }
    Ok(criterion(5, "scale to location reduction", pass, values))
}

fn truncated() -> FamilyConfig {
    FamilyConfig::new("trunc_gauss_loc").with("sigma0", 1.0).with("lower", 0.0)
}

/// Coverage misses delta when invariance is broken.
pub fn broken_consistency(seed: u64) -> Result<Criterion> {
    let mut values = BTreeMap::new();

    let mut trunc = CalibrationSpec::new(truncated(), Some(FactorKind::Location), vec![0.0]);
    trunc.delta = BROKEN_DELTA;
    trunc.trials = COVERAGE_TRIALS;
    trunc.seed = seed;
    let t = run_coverage(&trunc)?;

    let mut pois = CalibrationSpec::new(FamilyConfig::new("poisson"), None, vec![2.0]);
    pois.method = IntervalMethod::GaussianApprox;
    pois.delta = BROKEN_DELTA;
    pois.trials = COVERAGE_TRIALS;
    pois.seed = seed;
    let p = run_coverage(&pois)?;

    let (tg, pg) = ((t.coverage - BROKEN_DELTA).abs(), (p.coverage - BROKEN_DELTA).abs());
    values.insert("trunc_gauss_loc.coverage".into(), t.coverage);
    values.insert("trunc_gauss_loc.gap".into(), tg);
    values.insert("poisson.coverage".into(), p.coverage);
    values.insert("poisson.gap".into(), pg);
    let pass = tg > TRUNCATED_MIN_GAP && pg > POISSON_MIN_GAP;
    Ok(criterion(6, "broken consistency", pass, values))
}

/// Coverage returns to delta as the sample grows.
pub fn consistency_regained(seed: u64) -> Result<Criterion> {
    let mut values = BTreeMap::new();
    let mut pass = true;
    let mut pois = CalibrationSpec::new(FamilyConfig::new("poisson"), None, vec![2.0]);
    pois.trials = SWEEP_TRIALS;
    pois.seed = seed;
    let mut trunc = CalibrationSpec::new(truncated(), Some(FactorKind::Location), vec![1.0]);
    trunc.trials = SWEEP_TRIALS;
    trunc.seed = seed;
    let runs = [
        ("poisson", pois, &POISSON_N[..], IntervalMethod::GaussianApprox),
        ("trunc_gauss_loc", trunc, &TRUNCATED_N[..], IntervalMethod::ExactAssign),
    ];
    for (id, spec, ns, method) in runs {
        let reports = coverage_vs_n(&spec, ns, method)?;
        for r in &reports {
            values.insert(format!("{id}.n_{}.coverage", r.n), r.coverage);
        }
        let (first, last) = (&reports[0], &reports[reports.len() - 1]);
        let gap = |c: f64| (c - spec.delta).abs();
        let combined = (first.std_error.powi(2) + last.std_error.powi(2)).sqrt();
        let drop = gap(first.coverage) - gap(last.coverage);
        values.insert(format!("{id}.gap_drop_in_se"), drop / combined);
        values.insert(format!("{id}.final_gap"), gap(last.coverage));
        pass &= drop > 4.0 * combined && gap(last.coverage) < RECOVERY_MAX_GAP;
    }
    Ok(criterion(7, "consistency regained", pass, values))
}

/// Coverage reports are identical across worker counts.
pub fn determinism(seed: u64) -> Result<Criterion> {
    let mut spec = CalibrationSpec::new(FamilyConfig::new("cauchy_loc"), Some(FactorKind::Location), vec![0.0]);
    spec.trials = 2_000;
    spec.seed = seed;
    spec.sweep = vec![vec![0.0], vec![17.3]];
    let mut reports = Vec::new();
    for workers in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| crate::Error::InvalidInput(e.to_string()))?;
        reports.push(pool.install(|| run_coverage(&spec))?);
    }
    let same = reports[0] == reports[1];
    let mut values = BTreeMap::new();
    values.insert("hits".into(), reports[0].hits as f64);
    Ok(criterion(8, "seed determinism", same, values))
}

/// Runs every check in order, returning the report and per-check times.
pub fn run(seed: u64, mut progress: impl FnMut(&Criterion, &Timing)) -> Result<(SelfCheckReport, Vec<Timing>)> {
    type Check = Box<dyn Fn(u64) -> Result<Criterion>>;
    let checks: Vec<(u32, Check)> = vec![
        (1, Box::new(|_| exact_calibration())),
        (2, Box::new(coverage_headline)),
        (3, Box::new(|_| uniqueness_scan())),
        (4, Box::new(order_invariance)),
        (5, Box::new(|_| scale_reduction())),
        (6, Box::new(broken_consistency)),
        (7, Box::new(consistency_regained)),
        (8, Box::new(determinism)),
    ];
    let mut criteria = Vec::new();
    let mut timings = Vec::new();
    for (id, check) in checks {
        let start = Instant::now();
        let c = check(seed)?;
        let t = Timing {
            id,
            seconds: start.elapsed().as_secs_f64(),
            budget: budget(id),
        };
        progress(&c, &t);
        criteria.push(c);
        timings.push(t);
    }
    let passed = criteria.iter().filter(|c| c.pass).count();
    let failed = criteria.len() - passed;
    Ok((
        SelfCheckReport {
            seed,
            criteria,
            passed,
            failed,
        },
        timings,
    ))
}

/// One line per check: `PASS  3 factorization uniqueness  (12.4 s)`.
pub fn table_line(c: &Criterion, t: &Timing) -> String {
    let ok = c.pass && t.within_budget();
    let budget = match t.budget {
        Some(b) if !t.within_budget() => format!(", over the {b:.0} s budget"),
        _ => String::new(),
    };
    format!(
        "{}  {:>2} {:<28} ({:.1} s{budget})",
        if ok { "PASS" } else { "FAIL" },
        c.id,
        c.name,
        t.seconds
    )
}
