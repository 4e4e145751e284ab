//! Consistency factors: the weights `π(θ)` relating an assigned parameter
//! density to the likelihood.
//!
//! A factor is defined only up to a positive constant and is not a
//! probability distribution. Nothing here normalizes a factor on its own;
//! comparisons between factors are ratio tests.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{Interval, MonotoneMap, ParamRole, Sample, SamplingFamily};
use crate::grid::{self, GridSpec, ParameterGrid};

type LnWeight = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FactorKind {
    Location,
    Scale,
    LocationScale,
    /// `e^(−qμ)` on location coordinates, `σ^(−r)` on scale coordinates.
    Custom { q: f64, r: f64 },
    Transformed,
    General,
}

#[derive(Clone)]
pub struct ConsistencyFactor {
    kind: FactorKind,
    dim: usize,
    label: String,
    ln_weight: LnWeight,
}

fn positive_scale(sigma: f64) -> Result<f64> {
    if sigma > 0.0 {
        Ok(sigma)
    } else {
        Err(Error::domain("sigma", sigma, Interval::positive()))
    }
}

fn check_dim(theta: &[f64], dim: usize) -> Result<()> {
    if theta.len() == dim {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "factor takes {dim} coordinate(s), got {}",
            theta.len()
        )))
    }
}

impl ConsistencyFactor {
    /// `π(μ) = 1`.
    pub fn location() -> Self {
        ConsistencyFactor {
            kind: FactorKind::Location,
            dim: 1,
            label: "location".into(),
            ln_weight: Arc::new(|t| {
                check_dim(t, 1)?;
                Ok(0.0)
            }),
        }
    }

    /// `π(σ) = σ⁻¹` on `(0, ∞)`.
    pub fn scale() -> Self {
        ConsistencyFactor {
            kind: FactorKind::Scale,
            dim: 1,
            label: "scale".into(),
            ln_weight: Arc::new(|t| {
                check_dim(t, 1)?;
                Ok(-positive_scale(t[0])?.ln())
            }),
        }
    }

    /// `π(μ, σ) = σ⁻¹`.
    pub fn location_scale() -> Self {
        ConsistencyFactor {
            kind: FactorKind::LocationScale,
            dim: 2,
            label: "location_scale".into(),
            ln_weight: Arc::new(|t| {
                check_dim(t, 2)?;
                Ok(-positive_scale(t[1])?.ln())
            }),
        }
    }

    /// `∏ e^(−qθ)` over location coordinates times `∏ θ^(−r)` over scale
    /// coordinates; other roles contribute 1.
    pub fn custom(q: f64, r: f64, roles: &[ParamRole]) -> Self {
        let roles = roles.to_vec();
        let dim = roles.len();
        ConsistencyFactor {
            kind: FactorKind::Custom { q, r },
            dim,
            label: format!("custom(q={q}, r={r})"),
            ln_weight: Arc::new(move |t| {
                check_dim(t, dim)?;
                let mut acc = 0.0;
                for (role, &x) in roles.iter().zip(t) {
                    match role {
                        ParamRole::Location => acc -= q * x,
                        ParamRole::Scale => acc -= r * positive_scale(x)?.ln(),
                        ParamRole::Shape | ParamRole::Rate => {}
                    }
                }
                Ok(acc)
            }),
        }
    }

    /// Arbitrary factor from its log weight.
    pub fn from_ln_weight(
        dim: usize,
        label: impl Into<String>,
        ln_weight: impl Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        ConsistencyFactor {
            kind: FactorKind::General,
            dim,
            label: label.into(),
            ln_weight: Arc::new(ln_weight),
        }
    }

    /// Resolves a kind against a family's parameter roles.
    pub fn for_family(kind: &FactorKind, family: &dyn SamplingFamily) -> Result<Self> {
        let roles: Vec<ParamRole> = family.params().iter().map(|p| p.role).collect();
        let factor = match kind {
            FactorKind::Location => Self::location(),
            FactorKind::Scale => Self::scale(),
            FactorKind::LocationScale => Self::location_scale(),
            FactorKind::Custom { q, r } => Self::custom(*q, *r, &roles),
            FactorKind::Transformed | FactorKind::General => {
                return Err(Error::validation("factor.kind", "not constructible from a config"))
            }
        };
        if factor.dim != family.dim() {
            return Err(Error::validation(
                "factor.kind",
                format!(
                    "{} factor has dimension {} but {} has {} free parameter(s)",
                    factor.label,
                    factor.dim,
                    family.id(),
                    family.dim()
                ),
            ));
        }
        Ok(factor)
    }

    pub fn kind(&self) -> &FactorKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn ln_weight(&self, theta: &[f64]) -> Result<f64> {
        (self.ln_weight)(theta)
    }

    pub fn weight(&self, theta: &[f64]) -> Result<f64> {
        Ok(self.ln_weight(theta)?.exp())
    }
}

impl fmt::Debug for ConsistencyFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConsistencyFactor")
            .field("kind", &self.kind)
            .field("dim", &self.dim)
            .field("label", &self.label)
            .finish()
    }
}

pub fn location_factor() -> ConsistencyFactor {
    ConsistencyFactor::location()
}

pub fn scale_factor() -> ConsistencyFactor {
    ConsistencyFactor::scale()
}

pub fn location_scale_factor() -> ConsistencyFactor {
    ConsistencyFactor::location_scale()
}

/// The factor for `ν = g(θ)`: `π̃(g(θ)) = π(θ)·|g'(θ)|⁻¹`, constant fixed to 1.
pub fn transform_factor(factor: &ConsistencyFactor, reparam: &MonotoneMap) -> Result<ConsistencyFactor> {
    if factor.dim != 1 {
        return Err(Error::Unsupported(
            "reparameterizing multi-parameter factors".into(),
        ));
    }
    let base = factor.clone();
    let map = reparam.clone();
    Ok(ConsistencyFactor {
        kind: FactorKind::Transformed,
        dim: 1,
        label: format!("{}∘{}", factor.label, reparam.label()),
        ln_weight: Arc::new(move |nu| {
            check_dim(nu, 1)?;
            let theta = map.inverse(nu[0]);
            let d = map.derivative(theta).abs();
            if d == 0.0 || !d.is_finite() {
                return Err(Error::Singularity(format!(
                    "derivative {d} of {} at {theta}",
                    map.label()
                )));
            }
            Ok(base.ln_weight(&[theta])? - d.ln())
        }),
    })
}

/// Spread `(max − min)/mean` of `a(θ)/b(θ)` over the points; zero when the
/// two factors agree up to a constant.
pub fn ratio_spread(a: &ConsistencyFactor, b: &ConsistencyFactor, points: &[Vec<f64>]) -> Result<f64> {
    let ln_ratios = points
        .iter()
        .map(|p| Ok(a.ln_weight(p)? - b.ln_weight(p)?))
        .collect::<Result<Vec<f64>>>()?;
    spread_of_logs(&ln_ratios)
}

fn spread_of_logs(logs: &[f64]) -> Result<f64> {
    if logs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singularity("zero or infinite weight in ratio".into()));
    }
    let center = logs.iter().sum::<f64>() / logs.len() as f64;
    let vals: Vec<f64> = logs.iter().map(|v| (v - center).exp()).collect();
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    Ok((max - min) / mean)
}

type ActionFn = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;
type JacobianFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// A transformation group acting on parameter space, `θ → ḡₐ(θ)`.
#[derive(Clone)]
pub struct GroupAction {
    name: String,
    identity: Vec<f64>,
    range: Vec<Interval>,
    transform: ActionFn,
    jacobian: JacobianFn,
}

impl GroupAction {
    pub fn new(
        name: impl Into<String>,
        identity: Vec<f64>,
        range: Vec<Interval>,
        transform: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
        jacobian: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        GroupAction {
            name: name.into(),
            identity,
            range,
            transform: Arc::new(transform),
            jacobian: Arc::new(jacobian),
        }
    }

    /// `μ → μ + a`.
    pub fn translation() -> Self {
        GroupAction::new(
            "translation",
            vec![0.0],
            vec![Interval::real()],
            |a, t| vec![t[0] + a[0]],
            |_, _| 1.0,
        )
    }

    /// `σ → aσ`, `a > 0`.
    pub fn scaling() -> Self {
        GroupAction::new(
            "scaling",
            vec![1.0],
            vec![Interval::positive()],
            |a, t| vec![a[0] * t[0]],
            |a, _| a[0],
        )
    }

    /// `(μ, σ) → (aμ + b, aσ)` with Jacobian `a²`; group parameter `(a, b)`.
    pub fn affine() -> Self {
        GroupAction::new(
            "affine",
            vec![1.0, 0.0],
            vec![Interval::positive(), Interval::real()],
            |g, t| vec![g[0] * t[0] + g[1], g[0] * t[1]],
            |g, _| g[0] * g[0],
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn identity(&self) -> &[f64] {
        &self.identity
    }

    pub fn parameter_range(&self) -> &[Interval] {
        &self.range
    }

    pub fn transform(&self, a: &[f64], theta: &[f64]) -> Vec<f64> {
        (self.transform)(a, theta)
    }

    pub fn jacobian(&self, a: &[f64], theta: &[f64]) -> f64 {
        (self.jacobian)(a, theta)
    }

    fn check(&self, a: &[f64]) -> Result<()> {
        if a.len() != self.range.len() {
            return Err(Error::InvalidInput(format!(
                "{} takes {} group parameter(s)",
                self.name,
                self.range.len()
            )));
        }
        for (iv, &v) in self.range.iter().zip(a) {
            if !iv.contains(v) {
                return Err(Error::domain("group parameter", v, iv));
            }
        }
        Ok(())
    }
}

impl fmt::Debug for GroupAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupAction").field("name", &self.name).finish()
    }
}

/// `k(a, θ) = π(ḡₐ(θ))·|ḡₐ'(θ)| / π(θ)`.
pub fn group_multiplier(
    factor: &ConsistencyFactor,
    action: &GroupAction,
    a: &[f64],
    theta: &[f64],
) -> Result<f64> {
    Ok(ln_multiplier(factor, action, a, theta)?.exp())
}

fn ln_multiplier(factor: &ConsistencyFactor, action: &GroupAction, a: &[f64], theta: &[f64]) -> Result<f64> {
    action.check(a)?;
    let base = factor.ln_weight(theta)?;
    if base == f64::NEG_INFINITY {
        return Err(Error::Singularity(format!("zero weight at {theta:?}")));
    }
    let moved = factor.ln_weight(&action.transform(a, theta))?;
    let jac = action.jacobian(a, theta).abs();
    Ok(moved + jac.ln() - base)
}

/// Maximum over `a` of the relative spread of `k(a, θ)` across `θ`. Zero
/// means the multiplier depends on `a` alone, i.e. the factor satisfies the
/// group's functional equation.
pub fn verify_group_equation(
    factor: &ConsistencyFactor,
    action: &GroupAction,
    a_samples: &[Vec<f64>],
    theta_samples: &[Vec<f64>],
) -> Result<f64> {
    if a_samples.is_empty() || theta_samples.is_empty() {
        return Err(Error::InvalidInput("need at least one a and one θ".into()));
    }
    let mut worst = 0.0f64;
    for a in a_samples {
        let logs = theta_samples
            .iter()
            .map(|t| ln_multiplier(factor, action, a, t))
            .collect::<Result<Vec<_>>>()?;
        worst = worst.max(spread_of_logs(&logs)?);
    }
    Ok(worst)
}

/// Location-scale likelihood tabulated on a `(μ, σ)` grid, reused across
/// `(q, r)` pairs.
pub struct FactorizationScan {
    grid: ParameterGrid,
    /// log-likelihood, row-major `(μᵢ, σⱼ)`
    ln_lik: Vec<f64>,
}

/// Sup-norm factorization errors for one `(q, r)`, in grid-normalized
/// density units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    /// `sup f(μσ|x)`
    pub joint_peak: f64,
    /// `sup |f(μσ|x) − f(μ|σx)·f(σ|x)|`
    pub via_location_conditional: f64,
    /// `sup |f(μσ|x) − f(σ|μx)·f(μ|x)|`
    pub via_scale_conditional: f64,
}

impl Factorization {
    /// Worse of the two errors relative to the joint's peak. Scale-free, so
    /// a joint that spreads over a wide grid does not shrink it.
    pub fn discrepancy(&self) -> f64 {
        self.via_location_conditional.max(self.via_scale_conditional) / self.joint_peak
    }
}

impl FactorizationScan {
    /// Tabulates the likelihood. An automatic grid is placed on the joint
    /// with the reference weight `σ⁻¹`, so every `(q, r)` shares one grid.
    pub fn new(family: &dyn SamplingFamily, sample: &Sample, grid_spec: &GridSpec) -> Result<Self> {
        let roles: Vec<ParamRole> = family.params().iter().map(|p| p.role).collect();
        if roles != [ParamRole::Location, ParamRole::Scale] {
            return Err(Error::Unsupported(format!(
                "factorization needs a (location, scale) family, {} has {roles:?}",
                family.id()
            )));
        }
        if sample.len() < 2 {
            return Err(Error::ImproperPosterior(
                "joint location-scale assignment needs at least two observations".into(),
            ));
        }
        let values = &sample.values;
        let ln_lik_at = |p: &[f64]| {
            if !family.in_domain(p) {
                return f64::NEG_INFINITY;
            }
            crate::families::ln_likelihood(family, values, p)
        };
        let grid = match grid_spec {
            GridSpec::Explicit(g) => {
                if g.dims() != 2 {
                    return Err(Error::InvalidInput("factorization grid must be 2-d".into()));
                }
                g.clone()
            }
            GridSpec::Auto(spec) => {
                let target = |p: &[f64]| {
                    if !family.in_domain(p) {
                        return f64::NEG_INFINITY;
                    }
                    ln_lik_at(p) - p[1].ln()
                };
                let domains: Vec<Interval> = family.params().iter().map(|p| p.domain).collect();
                grid::place(&target, &family.initial_guess(values), &domains, spec)?.grid
            }
        };
        let ln_lik = grid.evaluate(ln_lik_at);
        Ok(FactorizationScan { grid, ln_lik })
    }

    pub fn grid(&self) -> &ParameterGrid {
        &self.grid
    }

    pub fn evaluate(&self, q: f64, r: f64) -> Result<Factorization> {
        let mu = self.grid.axis(0);
        let sigma = self.grid.axis(1);
        let (nm, ns) = (mu.len(), sigma.len());
        let (wm, ws) = (mu.weights(), sigma.weights());
        let ln_s: Vec<f64> = sigma.nodes().iter().map(|s| s.ln()).collect();
        let at = |i: usize, j: usize| self.ln_lik[i * ns + j];

        // joint ∝ σ^(−r)·L
        let joint_log: Vec<f64> = (0..nm * ns).map(|k| -r * ln_s[k % ns] + self.ln_lik[k]).collect();
        let joint = normalize(&joint_log, |k| wm[k / ns] * ws[k % ns])?;
        let joint_peak = joint.iter().copied().fold(0.0, f64::max);

        let mut marg_sigma = vec![0.0; ns];
        let mut marg_mu = vec![0.0; nm];
        for i in 0..nm {
            for j in 0..ns {
                let v = joint[i * ns + j];
                marg_sigma[j] += wm[i] * v;
                marg_mu[i] += ws[j] * v;
            }
        }

        // f(μ|σx) ∝ e^(−qμ)·L, one column per σ
        let mut via_loc = 0.0f64;
        for j in 0..ns {
            let col: Vec<f64> = (0..nm).map(|i| -q * mu.nodes()[i] + at(i, j)).collect();
            let cond = normalize(&col, |i| wm[i])?;
            for i in 0..nm {
                via_loc = via_loc.max((joint[i * ns + j] - cond[i] * marg_sigma[j]).abs());
            }
        }
        // f(σ|μx) ∝ σ^(−(q+1))·L, one row per μ
        let mut via_scale = 0.0f64;
        for i in 0..nm {
            let row: Vec<f64> = (0..ns).map(|j| -(q + 1.0) * ln_s[j] + at(i, j)).collect();
            let cond = normalize(&row, |j| ws[j])?;
            for j in 0..ns {
                via_scale = via_scale.max((joint[i * ns + j] - cond[j] * marg_mu[i]).abs());
            }
        }
        Ok(Factorization {
            joint_peak,
            via_location_conditional: via_loc,
            via_scale_conditional: via_scale,
        })
    }
}

/// Exponentiates log values and normalizes them under the given weights.
fn normalize(logs: &[f64], weight: impl Fn(usize) -> f64) -> Result<Vec<f64>> {
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return Err(Error::EmptyLikelihood);
    }
    if !peak.is_finite() {
        return Err(Error::ImproperPosterior("non-finite log density on the grid".into()));
    }
    let mut vals: Vec<f64> = logs.iter().map(|v| (v - peak).exp()).collect();
    let z: f64 = vals.iter().enumerate().map(|(k, v)| weight(k) * v).sum();
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::ImproperPosterior("normalizer is not finite and positive".into()));
    }
    vals.iter_mut().for_each(|v| *v /= z);
    Ok(vals)
}

/// Relative sup-norm discrepancy between the joint assigned with `σ^(−r)`
/// and its two product-rule factorizations built from conditionals with `e^(−qμ)` and
/// `σ^(−(q+1))` and grid marginals.
pub fn factorization_discrepancy(
    family: &dyn SamplingFamily,
    q: f64,
    r: f64,
    sample: &Sample,
    grid_spec: &GridSpec,
) -> Result<f64> {
    Ok(FactorizationScan::new(family, sample, grid_spec)?
        .evaluate(q, r)?
        .discrepancy())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::GaussianLocationScale;

    #[test]
    fn location_factor_is_constant() {
        let f = location_factor();
        assert_eq!(f.weight(&[0.0]).unwrap(), 1.0);
        assert_eq!(f.weight(&[-7.3]).unwrap(), 1.0);
    }

    #[test]
    fn scale_factor_values_and_domain() {
        let f = scale_factor();
        assert_eq!(f.weight(&[2.0]).unwrap(), 0.5);
        assert_eq!(f.weight(&[1.0]).unwrap(), 1.0);
        assert!(matches!(f.weight(&[0.0]), Err(Error::Domain { .. })));
        assert!(f.weight(&[-1.0]).is_err());
    }

    #[test]
    fn location_scale_factor_ignores_mu() {
        let f = location_scale_factor();
        assert_eq!(f.weight(&[5.0, 4.0]).unwrap(), 0.25);
        assert_eq!(f.weight(&[-5.0, 4.0]).unwrap(), 0.25);
        assert_eq!(f.weight(&[0.0, 1.0]).unwrap(), 1.0);
        assert!(f.weight(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn scale_factor_under_exp_is_location_factor() {
        // σ = e^μ, so μ = ln σ is the new parameter
        let t = transform_factor(&scale_factor(), &MonotoneMap::ln()).unwrap();
        for &mu in &[-3.0, -0.5, 0.0, 1.0, 4.0] {
            assert!((t.weight(&[mu]).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn location_factor_under_doubling() {
        let t = transform_factor(&location_factor(), &MonotoneMap::affine(2.0, 0.0).unwrap()).unwrap();
        assert_eq!(t.weight(&[3.0]).unwrap(), 0.5);
        let pts: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 - 4.5]).collect();
        assert!(ratio_spread(&t, &location_factor(), &pts).unwrap() < 1e-12);
    }

    #[test]
    fn zero_derivative_is_singular() {
        let flat = MonotoneMap::new("cube", true, |x| x * x * x, f64::cbrt, |x| 3.0 * x * x);
        let t = transform_factor(&location_factor(), &flat).unwrap();
        assert!(matches!(t.weight(&[0.0]), Err(Error::Singularity(_))));
        assert!(t.weight(&[8.0]).is_ok());
    }

    #[test]
    fn group_equation_examples() {
        let a = vec![vec![0.5], vec![2.0]];
        let s = vec![vec![1.0], vec![2.0], vec![4.0]];
        let d = verify_group_equation(&scale_factor(), &GroupAction::scaling(), &a, &s).unwrap();
        assert!(d < 1e-12);
        let inv_sq = ConsistencyFactor::custom(0.0, 2.0, &[ParamRole::Scale]);
        let d = verify_group_equation(&inv_sq, &GroupAction::scaling(), &a, &s).unwrap();
        assert!(d < 1e-12);
        let k = group_multiplier(&inv_sq, &GroupAction::scaling(), &[2.0], &[3.0]).unwrap();
        assert!((k - 0.5).abs() < 1e-14);
        let expo = ConsistencyFactor::from_ln_weight(1, "exp(-s)", |t| Ok(-t[0]));
        let d = verify_group_equation(&expo, &GroupAction::scaling(), &a, &s).unwrap();
        assert!(d > 0.1);
        let d = verify_group_equation(
            &location_factor(),
            &GroupAction::translation(),
            &[vec![-3.0], vec![1.5]],
            &[vec![0.0], vec![10.0]],
        )
        .unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn affine_group_multiplier_is_a() {
        let k = group_multiplier(&location_scale_factor(), &GroupAction::affine(), &[3.0, -1.0], &[0.2, 0.7]).unwrap();
        assert!((k - 3.0).abs() < 1e-12);
    }

    #[test]
    fn group_parameter_out_of_range() {
        let r = verify_group_equation(&scale_factor(), &GroupAction::scaling(), &[vec![-1.0]], &[vec![1.0]]);
        assert!(matches!(r, Err(Error::Domain { .. })));
    }

    #[test]
    fn single_observation_is_improper_for_joint() {
        let fam = GaussianLocationScale::new();
        let s = Sample::new(&fam, vec![0.3]).unwrap();
        let r = factorization_discrepancy(&fam, 0.0, 1.0, &s, &GridSpec::default());
        assert!(matches!(r, Err(Error::ImproperPosterior(_))));
    }

    #[test]
    fn custom_factor_for_family() {
        let fam = GaussianLocationScale::new();
        let f = ConsistencyFactor::for_family(&FactorKind::Custom { q: 1.0, r: 2.0 }, &fam).unwrap();
        let w = f.weight(&[1.0, 2.0]).unwrap();
        assert!((w - (-1.0f64).exp() / 4.0).abs() < 1e-15);
        assert!(ConsistencyFactor::for_family(&FactorKind::Location, &fam).is_err());
    }
}
