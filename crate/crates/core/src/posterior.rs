//! Grid posteriors: assignment from a consistency factor and the likelihood,
//! Bayes updating, reparameterization, marginals, conditionals and
//! equal-tail credible intervals.
//!
//! Values are densities at the grid nodes, interpolated linearly between
//! them, and integrate to one under the grid's trapezoid weights.

use serde::{Deserialize, Serialize};

use crate::consistency::ConsistencyFactor;
use crate::error::{Error, Result};
use crate::families::{self, Interval, MonotoneMap, Sample, SamplingFamily};
use crate::grid::{self, Axis, GridSpec, ParameterGrid, PlacementInfo};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosteriorDensity {
    grid: ParameterGrid,
    values: Vec<f64>,
    #[serde(default)]
    placement: PlacementInfo,
}

/// Equal-tail interval `(lo, hi)` with content `level`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CredibleInterval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

impl CredibleInterval {
    /// Open-interval containment.
    pub fn contains(&self, theta: f64) -> bool {
        self.lo < theta && theta < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

fn require_1d(p: &PosteriorDensity, what: &str) -> Result<()> {
    if p.dims() == 1 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} needs a one-parameter density")))
    }
}

impl PosteriorDensity {
    /// Normalizes `exp(log_values)` on the grid.
    pub fn from_log_values(grid: ParameterGrid, log_values: &[f64]) -> Result<Self> {
        if log_values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} values for a grid of {} nodes",
                log_values.len(),
                grid.len()
            )));
        }
        let peak = log_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if peak == f64::NEG_INFINITY {
            return Err(Error::EmptyLikelihood);
        }
        if !peak.is_finite() {
            return Err(Error::ImproperPosterior("log density is not finite on the grid".into()));
        }
        let values = log_values.iter().map(|v| (v - peak).exp()).collect();
        Self::from_values(grid, values)
    }

    /// Normalizes non-negative node values on the grid.
    pub fn from_values(grid: ParameterGrid, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput("density values must be finite and non-negative".into()));
        }
        let total = grid.integrate(&values);
        if total == 0.0 {
            return Err(Error::EmptyLikelihood);
        }
        if !total.is_finite() {
            return Err(Error::ImproperPosterior("grid mass is not finite".into()));
        }
        values.iter_mut().for_each(|v| *v /= total);
        Ok(PosteriorDensity {
            grid,
            values,
            placement: PlacementInfo::default(),
        })
    }

    /// Attaches placement diagnostics.
    pub fn with_placement(mut self, placement: PlacementInfo) -> Self {
        self.placement = placement;
        self
    }

    pub fn grid(&self) -> &ParameterGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn placement(&self) -> &PlacementInfo {
        &self.placement
    }

    pub fn dims(&self) -> usize {
        self.grid.dims()
    }

    /// `Σ wₖ fₖ`; one after every operation.
    pub fn mass(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    /// Largest edge value over the peak value.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.values.iter().copied().fold(0.0, f64::max);
        let mut edge = 0.0f64;
        for k in 0..self.values.len() {
            let on_edge = (0..self.dims()).any(|d| {
                let i = self.index_along(k, d);
                i == 0 || i + 1 == self.grid.axis(d).len()
            });
            if on_edge {
                edge = edge.max(self.values[k]);
            }
        }
        edge / peak
    }

    fn index_along(&self, k: usize, d: usize) -> usize {
        if self.dims() == 1 {
            k
        } else if d == 0 {
            k / self.grid.axis(1).len()
        } else {
            k % self.grid.axis(1).len()
        }
    }

    /// Location of the maximum: the vertex of the parabola through the
    /// largest node and its neighbours in 1-d, the largest node in 2-d.
    pub fn mode(&self) -> Vec<f64> {
        let k = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best })
            .0;
        if self.dims() != 1 || k == 0 || k + 1 == self.values.len() {
            return self.grid.point(k);
        }
        let x = self.grid.axis(0).nodes();
        let (x0, x1, x2) = (x[k - 1], x[k], x[k + 1]);
        let (y0, y1, y2) = (self.values[k - 1], self.values[k], self.values[k + 1]);
        let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
        let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
        if den == 0.0 {
            return vec![x1];
        }
        vec![(x1 - 0.5 * num / den).clamp(x0, x2)]
    }

    /// Mean of each coordinate.
    pub fn mean(&self) -> Vec<f64> {
        (0..self.dims())
            .map(|d| {
                (0..self.values.len())
                    .map(|k| self.grid.weight(k) * self.values[k] * self.grid.point(k)[d])
                    .sum()
            })
            .collect()
    }

    /// Standard deviation of each coordinate.
    pub fn sd(&self) -> Vec<f64> {
        let mean = self.mean();
        (0..self.dims())
            .map(|d| {
                let var: f64 = (0..self.values.len())
                    .map(|k| {
                        let dx = self.grid.point(k)[d] - mean[d];
                        self.grid.weight(k) * self.values[k] * dx * dx
                    })
                    .sum();
                var.sqrt()
            })
            .collect()
    }

    /// Linear (bilinear in 2-d) interpolation; zero off the grid.
    pub fn density_at(&self, theta: &[f64]) -> f64 {
        if theta.len() != self.dims() {
            return 0.0;
        }
        let a0 = self.grid.axis(0);
        let Some((i, t)) = a0.locate(theta[0]) else {
            return 0.0;
        };
        if self.dims() == 1 {
            return (1.0 - t) * self.values[i] + t * self.values[i + 1];
        }
        let n1 = self.grid.axis(1).len();
        let Some((j, s)) = self.grid.axis(1).locate(theta[1]) else {
            return 0.0;
        };
        let v = |i: usize, j: usize| self.values[i * n1 + j];
        (1.0 - t) * ((1.0 - s) * v(i, j) + s * v(i, j + 1))
            + t * ((1.0 - s) * v(i + 1, j) + s * v(i + 1, j + 1))
    }

    /// Cumulative mass at each node of a 1-d density.
    fn cumulative(&self) -> Vec<f64> {
        let x = self.grid.axis(0).nodes();
        let mut c = Vec::with_capacity(x.len());
        let mut acc = 0.0;
        c.push(0.0);
        for i in 0..x.len() - 1 {
            acc += 0.5 * (x[i + 1] - x[i]) * (self.values[i] + self.values[i + 1]);
            c.push(acc);
        }
        c
    }

    /// Exact cumulative of the piecewise-linear density.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        require_1d(self, "cdf")?;
        let axis = self.grid.axis(0);
        if x <= axis.lo() {
            return Ok(0.0);
        }
        let c = self.cumulative();
        let total = c[c.len() - 1];
        if x >= axis.hi() {
            return Ok(1.0);
        }
        let (i, t) = axis.locate(x).expect("inside the span");
        let h = axis.nodes()[i + 1] - axis.nodes()[i];
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        Ok((c[i] + h * (v0 * t + 0.5 * (v1 - v0) * t * t)) / total)
    }

    /// Inverse of [`cdf`](Self::cdf), solving the cell's quadratic exactly.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        require_1d(self, "quantile")?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain("probability", p, Interval::new(0.0, 1.0, true, true)));
        }
        let c = self.cumulative();
        Ok(self.invert(&c, p))
    }

    fn invert(&self, c: &[f64], p: f64) -> f64 {
        let x = self.grid.axis(0).nodes();
        let n = x.len();
        let target = p * c[n - 1];
        // first cell whose upper cumulative reaches the target
        let i = c[1..].partition_point(|&v| v < target).min(n - 2);
        let h = x[i + 1] - x[i];
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        let a = 0.5 * h * (v1 - v0);
        let b = h * v0;
        let rem = (target - c[i]).max(0.0);
        let disc = (b * b + 4.0 * a * rem).max(0.0);
        let denom = b + disc.sqrt();
        let t = if denom > 0.0 { 2.0 * rem / denom } else { 0.0 };
        x[i] + t.clamp(0.0, 1.0) * h
    }

    /// Posterior probability of `(a, b)`.
    pub fn content(&self, a: f64, b: f64) -> Result<f64> {
        Ok(self.cdf(b)? - self.cdf(a)?)
    }

    /// `Σ wₖ |fₖ − gₖ|` on a shared grid.
    pub fn l1_distance(&self, other: &PosteriorDensity) -> Result<f64> {
        if !self.grid.same_nodes(&other.grid) {
            return Err(Error::InvalidInput("L1 distance needs identical grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(k, (a, b))| self.grid.weight(k) * (a - b).abs())
            .sum())
    }

    /// Largest absolute difference at the nodes of a shared grid.
    pub fn sup_distance(&self, other: &PosteriorDensity) -> Result<f64> {
        if !self.grid.same_nodes(&other.grid) {
            return Err(Error::InvalidInput("sup distance needs identical grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Unnormalized log posterior `ln π(θ) + Σ ln p(xᵢ|θ)`; `-inf` outside the
/// family's domain or where the factor is undefined.
fn log_target<'a>(
    family: &'a dyn SamplingFamily,
    factor: &'a ConsistencyFactor,
    values: &'a [f64],
) -> impl Fn(&[f64]) -> f64 + 'a {
    move |theta| {
        if !family.in_domain(theta) {
            return f64::NEG_INFINITY;
        }
        match factor.ln_weight(theta) {
            Ok(w) => w + families::ln_likelihood(family, values, theta),
            Err(_) => f64::NEG_INFINITY,
        }
    }
}

fn check_pair(family: &dyn SamplingFamily, factor: &ConsistencyFactor) -> Result<()> {
    if factor.dim() != family.dim() {
        return Err(Error::InvalidInput(format!(
            "factor {} has dimension {} but {} has {} free parameter(s)",
            factor.label(),
            factor.dim(),
            family.id(),
            family.dim()
        )));
    }
    Ok(())
}

/// Grid an assignment would use: an explicit grid as given, otherwise the
/// automatic placement for this factor and sample.
pub fn resolve_grid(
    family: &dyn SamplingFamily,
    factor: &ConsistencyFactor,
    sample: &Sample,
    grid_spec: &GridSpec,
) -> Result<ParameterGrid> {
    Ok(assign(family, factor, sample, grid_spec)?.grid)
}

/// `f(θ|x) ∝ π(θ)·∏ p(xᵢ|θ)`, normalized on the grid.
pub fn assign(
    family: &dyn SamplingFamily,
    factor: &ConsistencyFactor,
    sample: &Sample,
    grid_spec: &GridSpec,
) -> Result<PosteriorDensity> {
    check_pair(family, factor)?;
    if sample.is_empty() {
        return Err(Error::InvalidInput("sample must not be empty".into()));
    }
    let target = log_target(family, factor, &sample.values);
    match grid_spec {
        GridSpec::Explicit(g) => {
            if g.dims() != family.dim() {
                return Err(Error::InvalidInput(format!(
                    "grid has {} dimension(s), family has {}",
                    g.dims(),
                    family.dim()
                )));
            }
            let logs = g.evaluate(&target);
            PosteriorDensity::from_log_values(g.clone(), &logs)
        }
        GridSpec::Auto(spec) => {
            let domains: Vec<Interval> = family.params().iter().map(|p| p.domain).collect();
            let start = family.initial_guess(&sample.values);
            let placed = grid::place(&target, &start, &domains, spec)?;
            Ok(PosteriorDensity::from_values(placed.grid, placed.values)?
                .with_placement(placed.info))
        }
    }
}

/// Bayes update with one more observation, on the prior's grid.
pub fn update(prior: &PosteriorDensity, family: &dyn SamplingFamily, x: f64) -> Result<PosteriorDensity> {
    if prior.dims() != family.dim() {
        return Err(Error::InvalidInput("prior and family dimensions differ".into()));
    }
    if !family.support().contains(x) {
        return Err(Error::domain("observation", x, family.support().range));
    }
    let logs: Vec<f64> = (0..prior.grid.len())
        .map(|k| {
            let v = prior.values[k];
            if v == 0.0 {
                return f64::NEG_INFINITY;
            }
            let theta = prior.grid.point(k);
            if !family.in_domain(&theta) {
                return f64::NEG_INFINITY;
            }
            v.ln() + family.ln_density(x, &theta)
        })
        .collect();
    Ok(PosteriorDensity::from_log_values(prior.grid.clone(), &logs)?.with_placement(prior.placement.clone()))
}

/// Density of `ν = g(θ)` on the image nodes: `f(θ)·|g'(θ)|⁻¹`.
pub fn transform_parameter(post: &PosteriorDensity, reparam: &MonotoneMap) -> Result<PosteriorDensity> {
    require_1d(post, "transform_parameter")?;
    let theta = post.grid.axis(0).nodes();
    let mut pairs = Vec::with_capacity(theta.len());
    for (&t, &v) in theta.iter().zip(&post.values) {
        let d = reparam.derivative(t).abs();
        if d == 0.0 || !d.is_finite() {
            return Err(Error::Singularity(format!(
                "derivative {d} of {} at {t}",
                reparam.label()
            )));
        }
        pairs.push((reparam.forward(t), v / d));
    }
    if !reparam.is_increasing() {
        pairs.reverse();
    }
    let (nodes, values): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let axis = Axis::new(nodes).map_err(|e| {
        Error::Singularity(format!("{} is not strictly monotone on the grid ({e})", reparam.label()))
    })?;
    PosteriorDensity::from_values(ParameterGrid::one(axis), values)
}

/// Integrates out parameter `over` of a 2-d density.
pub fn marginalize(joint: &PosteriorDensity, over: usize) -> Result<PosteriorDensity> {
    if joint.dims() != 2 || over > 1 {
        return Err(Error::InvalidInput("marginalize needs a 2-d density and index 0 or 1".into()));
    }
    let keep = 1 - over;
    let (n0, n1) = (joint.grid.axis(0).len(), joint.grid.axis(1).len());
    let w = joint.grid.axis(over).weights();
    let values: Vec<f64> = (0..joint.grid.axis(keep).len())
        .map(|m| {
            (0..w.len())
                .map(|o| {
                    let k = if over == 0 { o * n1 + m } else { m * n1 + o };
                    w[o] * joint.values[k]
                })
                .sum()
        })
        .collect();
    debug_assert_eq!(values.len(), if keep == 0 { n0 } else { n1 });
    PosteriorDensity::from_values(ParameterGrid::one(joint.grid.axis(keep).clone()), values)
}

/// Slice of a 2-d density at `θ[fixed] = value`, linearly interpolated
/// between grid rows, renormalized.
pub fn condition(joint: &PosteriorDensity, fixed: usize, value: f64) -> Result<PosteriorDensity> {
    if joint.dims() != 2 || fixed > 1 {
        return Err(Error::InvalidInput("condition needs a 2-d density and index 0 or 1".into()));
    }
    let axis = joint.grid.axis(fixed);
    let (i, t) = axis.locate(value).ok_or_else(|| {
        Error::domain(
            format!("conditioning value for parameter {fixed}"),
            value,
            Interval::new(axis.lo(), axis.hi(), true, true),
        )
    })?;
    let free = 1 - fixed;
    let n1 = joint.grid.axis(1).len();
    let at = |row: usize, m: usize| {
        if fixed == 0 {
            joint.values[row * n1 + m]
        } else {
            joint.values[m * n1 + row]
        }
    };
    let values: Vec<f64> = (0..joint.grid.axis(free).len())
        .map(|m| {
            if t == 0.0 {
                at(i, m)
            } else {
                (1.0 - t) * at(i, m) + t * at(i + 1, m)
            }
        })
        .collect();
    PosteriorDensity::from_values(ParameterGrid::one(joint.grid.axis(free).clone()), values)
}

/// Equal-tail interval: quantiles `(1−δ)/2` and `(1+δ)/2`.
pub fn credible_interval(post: &PosteriorDensity, delta: f64) -> Result<CredibleInterval> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain("delta", delta, Interval::new(0.0, 1.0, false, false)));
    }
    require_1d(post, "credible_interval")?;
    let c = post.cumulative();
    Ok(CredibleInterval {
        lo: post.invert(&c, 0.5 * (1.0 - delta)),
        hi: post.invert(&c, 0.5 * (1.0 + delta)),
        level: delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consistency::{location_factor, location_scale_factor, scale_factor};
    use crate::families::{
        CauchyLocation, ExponentialScale, GaussianLocation, GaussianLocationScale,
    };
    use crate::grid::AutoGrid;

    fn sample(f: &dyn SamplingFamily, v: &[f64]) -> Sample {
        Sample::new(f, v.to_vec()).unwrap()
    }

    #[test]
    fn gaussian_flat_posterior_moments() {
        let fam = GaussianLocation::new(1.0);
        let p = assign(&fam, &location_factor(), &sample(&fam, &[0.5]), &GridSpec::default()).unwrap();
        assert!((p.mass() - 1.0).abs() < 1e-12);
        assert!((p.mean()[0] - 0.5).abs() < 1e-4);
        assert!((p.sd()[0] - 1.0).abs() < 1e-4);
        assert!(p.edge_ratio() < 1e-10);
    }

    #[test]
    fn exponential_scale_posterior_mode() {
        let fam = ExponentialScale::new();
        let p = assign(&fam, &scale_factor(), &sample(&fam, &[1.0]), &GridSpec::default()).unwrap();
        assert!((p.mode()[0] - 0.5).abs() < 1e-3);
        // x τ⁻² e^(−x/τ) at τ = 0.5
        let exact = 4.0 * (-2.0f64).exp();
        assert!((p.density_at(&[0.5]) - exact).abs() < 1e-4);
    }

    #[test]
    fn exponential_flat_factor_is_improper() {
        let fam = ExponentialScale::new();
        let r = assign(&fam, &location_factor(), &sample(&fam, &[1.0]), &GridSpec::default());
        assert!(matches!(r, Err(Error::ImproperPosterior(_))), "{r:?}");
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let fam = GaussianLocation::new(1.0);
        let r = assign(&fam, &location_scale_factor(), &sample(&fam, &[0.0]), &GridSpec::default());
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn update_matches_conjugate_result() {
        let fam = GaussianLocation::new(1.0);
        let p = assign(&fam, &location_factor(), &sample(&fam, &[1.0]), &GridSpec::default()).unwrap();
        let q = update(&p, &fam, 3.0).unwrap();
        assert!((q.mean()[0] - 2.0).abs() < 1e-4);
        assert!((q.sd()[0] - 0.5f64.sqrt()).abs() < 1e-4);
    }

    #[test]
    fn standard_normal_interval() {
        let fam = GaussianLocation::new(1.0);
        let p = assign(&fam, &location_factor(), &sample(&fam, &[0.0]), &GridSpec::default()).unwrap();
        let ci = credible_interval(&p, 0.683).unwrap();
        assert!((ci.lo + 1.0).abs() < 2e-3 && (ci.hi - 1.0).abs() < 2e-3, "{ci:?}");
        assert!((p.content(ci.lo, ci.hi).unwrap() - 0.683).abs() < 1e-6);
    }

    #[test]
    fn cauchy_quartiles() {
        let fam = CauchyLocation::new(1.0);
        let p = assign(&fam, &location_factor(), &sample(&fam, &[2.5]), &GridSpec::default()).unwrap();
        let ci = credible_interval(&p, 0.5).unwrap();
        assert!((ci.lo - 1.5).abs() < 2e-3 && (ci.hi - 3.5).abs() < 2e-3, "{ci:?}");
    }

    #[test]
    fn delta_out_of_range() {
        let fam = GaussianLocation::new(1.0);
        let p = assign(&fam, &location_factor(), &sample(&fam, &[0.0]), &GridSpec::default()).unwrap();
        assert!(matches!(credible_interval(&p, 1.5), Err(Error::Domain { .. })));
        assert!(credible_interval(&p, 0.0).is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        let fam = ExponentialScale::new();
        let p = assign(&fam, &scale_factor(), &sample(&fam, &[2.0]), &GridSpec::default()).unwrap();
        for &u in &[0.01, 0.2, 0.5, 0.77, 0.999] {
            let x = p.quantile(u).unwrap();
            assert!((p.cdf(x).unwrap() - u).abs() < 1e-12);
        }
    }

    #[test]
    fn transform_identity_is_noop() {
        let fam = GaussianLocation::new(1.0);
        let p = assign(&fam, &location_factor(), &sample(&fam, &[0.3]), &GridSpec::default()).unwrap();
        let q = transform_parameter(&p, &MonotoneMap::identity()).unwrap();
        assert!(p.l1_distance(&q).unwrap() < 1e-14);
    }

    #[test]
    fn transform_preserves_node_interval_content() {
        // piecewise-linear in τ and in ln τ agree to second order in the
        // spacing, so this needs a fine grid
        let fam = ExponentialScale::new();
        let g = ParameterGrid::one(Axis::uniform(0.02, 30.0, 300_001).unwrap());
        let p = assign(&fam, &scale_factor(), &sample(&fam, &[1.0]), &GridSpec::Explicit(g)).unwrap();
        let q = transform_parameter(&p, &MonotoneMap::ln()).unwrap();
        let (a, b) = (0.3, 2.0);
        let lhs = p.content(a, b).unwrap();
        let rhs = q.content(a.ln(), b.ln()).unwrap();
        assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn marginal_and_condition() {
        let fam = GaussianLocationScale::new();
        let s = sample(&fam, &[-1.0, 1.0]);
        let joint = assign(&fam, &location_scale_factor(), &s, &GridSpec::default()).unwrap();
        let mu = marginalize(&joint, 1).unwrap();
        assert!((mu.mass() - 1.0).abs() < 1e-8);
        assert!(mu.quantile(0.5).unwrap().abs() < 1e-3);
        let sigma = marginalize(&joint, 0).unwrap();
        assert!(sigma.mode()[0] > 0.0);
        // conditioning at a node is the renormalized row
        let j = 37;
        let s_node = joint.grid().axis(1).nodes()[j];
        let c = condition(&joint, 1, s_node).unwrap();
        let n1 = joint.grid().axis(1).len();
        let row: Vec<f64> = (0..joint.grid().axis(0).len()).map(|i| joint.values()[i * n1 + j]).collect();
        let direct = PosteriorDensity::from_values(ParameterGrid::one(joint.grid().axis(0).clone()), row).unwrap();
        assert!(c.l1_distance(&direct).unwrap() < 1e-14);
        assert!(matches!(condition(&joint, 1, -1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn explicit_grid_used_verbatim() {
        let fam = GaussianLocation::new(1.0);
        let g = ParameterGrid::one(Axis::uniform(-8.0, 8.0, 1601).unwrap());
        let p = assign(&fam, &location_factor(), &sample(&fam, &[0.0]), &GridSpec::Explicit(g.clone())).unwrap();
        assert_eq!(p.grid(), &g);
        let auto = GridSpec::Auto(AutoGrid {
            span: Some(vec![[-8.0, 8.0]]),
            nodes: Some(1601),
            tail_ratio: None,
        });
        let q = assign(&fam, &location_factor(), &sample(&fam, &[0.0]), &auto).unwrap();
        assert!(p.l1_distance(&q).unwrap() < 1e-15);
    }
}
