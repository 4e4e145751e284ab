//! Parameter grids with trapezoid quadrature, and automatic grid placement.
//!
//! Automatic placement centres the grid on the mode of the unnormalized log
//! target, walks outward on each side until the target falls below
//! `tail_ratio` of its peak, and spaces nodes uniformly in `u` under
//! `θ = mode + w·sinh(u)`, `w` being the curvature width at the mode. Nodes
//! are dense near the mode and geometric in the tails, so heavy-tailed
//! targets get wide spans without losing resolution where the mass is.
//!
//! Truncation is then checked: if the mass within the outer 5% of either
//! half-span exceeds `1e-6` of the total, the half-spans are doubled (at most
//! twice). A target whose band mass is still above the threshold and has not
//! at least halved across the doublings is declared improper.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::Interval;
use crate::optimize::{maximize_1d, maximize_nd, Side};

pub const DEFAULT_NODES_1D: usize = 2001;
pub const DEFAULT_NODES_2D: usize = 401;
pub const DEFAULT_TAIL_RATIO: f64 = 1e-12;

const BAND: f64 = 0.05;
const BAND_MASS_LIMIT: f64 = 1e-6;
const MAX_DOUBLINGS: usize = 2;
/// Furthest a tail walk may go, in units of the curvature width.
const WALK_CAP: f64 = 1e10;

/// Nodes along one parameter with their trapezoid weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Axis {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidInput("an axis needs at least two nodes".into()));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("axis nodes must be finite".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("axis nodes must be strictly increasing".into()));
        }
        let n = nodes.len();
        let mut weights = vec![0.0; n];
        for i in 0..n - 1 {
            let h = 0.5 * (nodes[i + 1] - nodes[i]);
            weights[i] += h;
            weights[i + 1] += h;
        }
        Ok(Axis { nodes, weights })
    }

    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || hi <= lo || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!("bad uniform axis [{lo}, {hi}] with {n} nodes")));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
        nodes[n - 1] = hi;
        Axis::new(nodes)
    }

    /// Nodes uniform in `u` under `x = center + width·sinh(u)`, spanning
    /// `[center − left, center + right]`.
    pub fn stretched(center: f64, width: f64, left: f64, right: f64, n: usize) -> Result<Self> {
        let u0 = -(left / width).asinh();
        let u1 = (right / width).asinh();
        // e^u advances geometrically; re-anchoring every 64 nodes keeps the
        // accumulated rounding below 1e-14 relative.
        let du = (u1 - u0) / (n - 1) as f64;
        let q = du.exp();
        let mut e = 0.0;
        let mut nodes: Vec<f64> = (0..n)
            .map(|i| {
                e = if i % 64 == 0 { (u0 + du * i as f64).exp() } else { e * q };
                center + 0.5 * width * (e - 1.0 / e)
            })
            .collect();
        nodes[0] = center - left;
        nodes[n - 1] = center + right;
        // guard against collapsed nodes at extreme stretch
        for i in 1..n {
            if nodes[i] <= nodes[i - 1] {
                return Axis::uniform(center - left, center + right, n);
            }
        }
        Axis::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }

    pub fn hi(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn span(&self) -> f64 {
        self.hi() - self.lo()
    }

    /// Cell index `i` and fraction `t ∈ [0,1]` with `x = (1−t)·xᵢ + t·xᵢ₊₁`.
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        if !(x >= self.lo() && x <= self.hi()) {
            return None;
        }
        let i = match self.nodes.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(self.nodes.len() - 2),
            Err(i) => i - 1,
        };
        let t = (x - self.nodes[i]) / (self.nodes[i + 1] - self.nodes[i]);
        Some((i, t))
    }
}

/// Tensor grid over one or two parameters. Values on a 2-d grid are stored
/// row-major: index `i·n₁ + j` is node `(axis₀[i], axis₁[j])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterGrid {
    axes: Vec<Axis>,
}

impl ParameterGrid {
    pub fn one(axis: Axis) -> Self {
        ParameterGrid { axes: vec![axis] }
    }

    pub fn two(first: Axis, second: Axis) -> Self {
        ParameterGrid {
            axes: vec![first, second],
        }
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        match self.axes.as_slice() {
            [a] => vec![a.nodes[idx]],
            [a, b] => vec![a.nodes[idx / b.len()], b.nodes[idx % b.len()]],
            _ => unreachable!("grids are 1-d or 2-d"),
        }
    }

    pub fn weight(&self, idx: usize) -> f64 {
        match self.axes.as_slice() {
            [a] => a.weights[idx],
            [a, b] => a.weights[idx / b.len()] * b.weights[idx % b.len()],
            _ => unreachable!("grids are 1-d or 2-d"),
        }
    }

    /// Trapezoid integral of node values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        match self.axes.as_slice() {
            [a] => a.weights.iter().zip(values).map(|(w, v)| w * v).sum(),
            [a, b] => a
                .weights
                .iter()
                .zip(values.chunks_exact(b.len()))
                .map(|(wa, row)| wa * b.weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>())
                .sum(),
            _ => unreachable!("grids are 1-d or 2-d"),
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    /// Evaluates `f` at every node.
    pub fn evaluate(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        match self.axes.as_slice() {
            [a] => a.nodes.iter().map(|&x| f(&[x])).collect(),
            [a, b] => {
                let mut out = Vec::with_capacity(self.len());
                let mut p = [0.0; 2];
                for &x in &a.nodes {
                    p[0] = x;
                    for &y in &b.nodes {
                        p[1] = y;
                        out.push(f(&p));
                    }
                }
                out
            }
            _ => unreachable!("grids are 1-d or 2-d"),
        }
    }

    pub fn same_nodes(&self, other: &ParameterGrid) -> bool {
        self.axes.len() == other.axes.len()
            && self
                .axes
                .iter()
                .zip(&other.axes)
                .all(|(a, b)| a.nodes == b.nodes)
    }
}

/// Automatic grid settings. Absent fields take the defaults above.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutoGrid {
    /// Nodes per dimension.
    #[serde(default)]
    pub nodes: Option<usize>,
    /// Fixed `[lo, hi]` per dimension; disables automatic placement and the
    /// truncation check.
    #[serde(default)]
    pub span: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub tail_ratio: Option<f64>,
}

impl AutoGrid {
    pub fn with_nodes(nodes: usize) -> Self {
        AutoGrid {
            nodes: Some(nodes),
            ..AutoGrid::default()
        }
    }

    pub fn nodes_for(&self, dims: usize) -> usize {
        self.nodes
            .unwrap_or(if dims == 1 { DEFAULT_NODES_1D } else { DEFAULT_NODES_2D })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GridSpec {
    Auto(AutoGrid),
    Explicit(ParameterGrid),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Auto(AutoGrid::default())
    }
}

impl GridSpec {
    pub fn nodes(n: usize) -> Self {
        GridSpec::Auto(AutoGrid::with_nodes(n))
    }
}

/// How an automatic grid was placed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementInfo {
    pub mode: Vec<f64>,
    pub width: Vec<f64>,
    pub doublings: usize,
    /// Mass fraction in the outer bands of the final grid.
    pub tail_fraction: f64,
}

pub(crate) struct Placed {
    pub grid: ParameterGrid,
    /// `exp(log target − peak)` at each node.
    pub values: Vec<f64>,
    pub info: PlacementInfo,
}

/// One side of one axis.
#[derive(Clone, Copy, Debug)]
struct Reach {
    length: f64,
    /// The side ends on a domain bound rather than in the tail.
    at_bound: bool,
}

fn improper(msg: impl Into<String>) -> Error {
    Error::ImproperPosterior(msg.into())
}

fn initial_scale(x: f64) -> f64 {
    if x != 0.0 && x.is_finite() {
        0.1 * x.abs()
    } else {
        1.0
    }
}

/// Offset from an open bound used as the outermost node.
fn open_offset(reference: f64) -> f64 {
    1e-12 * reference.abs().max(f64::MIN_POSITIVE)
}

/// Places a grid for the unnormalized log target and returns it together
/// with the log target at every node.
pub(crate) fn place(
    log_target: &dyn Fn(&[f64]) -> f64,
    start: &[f64],
    domains: &[Interval],
    spec: &AutoGrid,
) -> Result<Placed> {
    let dims = domains.len();
    let n = spec.nodes_for(dims);
    if n < 3 {
        return Err(Error::InvalidInput("grids need at least 3 nodes".into()));
    }
    if let Some(span) = &spec.span {
        if span.len() != dims {
            return Err(Error::validation("grid.span", format!("expected {dims} [lo, hi] pair(s)")));
        }
        let axes: Vec<Axis> = span
            .iter()
            .map(|&[lo, hi]| Axis::uniform(lo, hi, n))
            .collect::<Result<_>>()?;
        let grid = match axes.len() {
            1 => ParameterGrid::one(axes[0].clone()),
            _ => ParameterGrid::two(axes[0].clone(), axes[1].clone()),
        };
        let values = relative(&grid.evaluate(|p| log_target(p)))?;
        return Ok(Placed {
            grid,
            values,
            info: PlacementInfo::default(),
        });
    }
    let tail_ratio = spec.tail_ratio.unwrap_or(DEFAULT_TAIL_RATIO);
    if !(tail_ratio > 0.0 && tail_ratio < 1.0) {
        return Err(Error::validation("grid.tail_ratio", "must lie in (0, 1)"));
    }
    let drop = -tail_ratio.ln();

    // Mode of the target.
    let scales: Vec<f64> = start.iter().map(|&x| initial_scale(x)).collect();
    let (mode, peak, mode_sides) = if dims == 1 {
        let m = maximize_1d(|t| log_target(&[t]), start[0], scales[0], &domains[0], 500)
            .map_err(|_| improper("log target increases without bound"))?;
        (vec![m.x], m.value, vec![m.boundary])
    } else {
        let m = maximize_nd(log_target, start, &scales, domains, 300)
            .map_err(|_| improper("log target has no finite maximum"))?;
        (m.x, m.value, m.boundary)
    };
    if peak == f64::NEG_INFINITY {
        return Err(Error::EmptyLikelihood);
    }
    if !peak.is_finite() {
        return Err(improper("log target is unbounded at its mode"));
    }

    // Per-axis profile: the target maximized over the other coordinate.
    let profile = |d: usize, t: f64, hint: &mut Vec<f64>| -> f64 {
        if dims == 1 {
            return log_target(&[t]);
        }
        let o = 1 - d;
        let mut p = hint.clone();
        p[d] = t;
        let r = maximize_1d(
            |s| {
                let mut q = p.clone();
                q[o] = s;
                log_target(&q)
            },
            hint[o],
            initial_scale(hint[o]),
            &domains[o],
            200,
        );
        match r {
            Ok(m) => {
                hint[o] = m.x;
                m.value
            }
            Err(_) => f64::INFINITY,
        }
    };

    let mut widths = Vec::with_capacity(dims);
    let mut reaches = Vec::with_capacity(dims);
    for d in 0..dims {
        let dom = &domains[d];
        let m = mode[d];
        if mode_sides[d] == Some(Side::Lower) && !dom.lo_closed {
            check_open_bound_integrable(|t| profile(d, t, &mut mode.clone()), dom.lo, m, peak)?;
        }
        if mode_sides[d] == Some(Side::Upper) && !dom.hi_closed {
            check_open_bound_integrable(|t| profile(d, t, &mut mode.clone()), dom.hi, m, peak)?;
        }
        let width = curvature_width(|t| profile(d, t, &mut mode.clone()), m, peak, dom, scales[d]);
        let mut sides = [Reach { length: 0.0, at_bound: true }; 2];
        for (k, dir) in [-1.0f64, 1.0].into_iter().enumerate() {
            let mut hint = mode.clone();
            sides[k] = walk(|t| profile(d, t, &mut hint), m, dir, width, peak - drop, dom)?;
        }
        widths.push(width);
        reaches.push(sides);
    }

    let mut first_fraction = None;
    for doubling in 0..=MAX_DOUBLINGS {
        let axes: Vec<Axis> = (0..dims)
            .map(|d| {
                let [l, r] = reaches[d];
                Axis::stretched(mode[d], widths[d], l.length, r.length, n)
            })
            .collect::<Result<_>>()?;
        let grid = match axes.len() {
            1 => ParameterGrid::one(axes[0].clone()),
            _ => ParameterGrid::two(axes[0].clone(), axes[1].clone()),
        };
        let values = relative(&grid.evaluate(|p| log_target(p)))?;
        let fraction = band_fraction(&grid, &values, &mode, &reaches);
        let first = *first_fraction.get_or_insert(fraction);
        let accept = fraction <= BAND_MASS_LIMIT
            || (doubling == MAX_DOUBLINGS && fraction <= 0.5 * first);
        if accept {
            return Ok(Placed {
                grid,
                values,
                info: PlacementInfo {
                    mode,
                    width: widths,
                    doublings: doubling,
                    tail_fraction: fraction,
                },
            });
        }
        if doubling == MAX_DOUBLINGS {
            return Err(improper(format!(
                "tail mass fraction {fraction:.3e} does not decay as the grid span grows"
            )));
        }
        for d in 0..dims {
            for (k, dir) in [-1.0f64, 1.0].into_iter().enumerate() {
                let r = reaches[d][k];
                if !r.at_bound {
                    reaches[d][k] = extend(mode[d], dir, 2.0 * r.length, &domains[d]);
                }
            }
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// Share of each node's trapezoid cell lying in the outer bands of the
/// sides that end in a tail.
fn band_shares(axis: &Axis, mode: f64, reach: &[Reach; 2]) -> Vec<f64> {
    let x = axis.nodes();
    let n = x.len();
    let [l, r] = *reach;
    let lo_edge = (!l.at_bound).then_some(mode - (1.0 - BAND) * l.length);
    let hi_edge = (!r.at_bound).then_some(mode + (1.0 - BAND) * r.length);
    (0..n)
        .map(|k| {
            let a = if k == 0 { x[0] } else { 0.5 * (x[k - 1] + x[k]) };
            let b = if k + 1 == n { x[n - 1] } else { 0.5 * (x[k] + x[k + 1]) };
            if b <= a {
                return 0.0;
            }
            let mut inside = 0.0;
            if let Some(e) = lo_edge {
                inside += (e.min(b) - a).max(0.0);
            }
            if let Some(e) = hi_edge {
                inside += (b - e.max(a)).max(0.0);
            }
            (inside / (b - a)).min(1.0)
        })
        .collect()
}

/// `exp(v − max v)`, rejecting targets that are empty or unbounded on the grid.
fn relative(log_values: &[f64]) -> Result<Vec<f64>> {
    let peak = log_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return Err(Error::EmptyLikelihood);
    }
    if !peak.is_finite() {
        return Err(improper("log target is not finite on the grid"));
    }
    Ok(log_values.iter().map(|v| (v - peak).exp()).collect())
}

/// Fraction of total mass inside the outer bands.
fn band_fraction(grid: &ParameterGrid, values: &[f64], mode: &[f64], reaches: &[[Reach; 2]]) -> f64 {
    let shares: Vec<Vec<f64>> = (0..grid.dims())
        .map(|d| band_shares(grid.axis(d), mode[d], &reaches[d]))
        .collect();
    let mut total = 0.0;
    let mut band = 0.0;
    match grid.dims() {
        1 => {
            let w = grid.axis(0).weights();
            for (k, &v) in values.iter().enumerate() {
                let m = w[k] * v;
                total += m;
                band += m * shares[0][k];
            }
        }
        _ => {
            let (w0, w1) = (grid.axis(0).weights(), grid.axis(1).weights());
            let n1 = w1.len();
            for (k, &v) in values.iter().enumerate() {
                let (i, j) = (k / n1, k % n1);
                let m = w0[i] * w1[j] * v;
                total += m;
                // share of the cell outside both axes' cores
                let core = (1.0 - shares[0][i]) * (1.0 - shares[1][j]);
                band += m * (1.0 - core);
            }
        }
    }
    band / total
}

/// Rejects a target that diverges non-integrably at an open bound, i.e.
/// behaves like `|θ − bound|^(−k)` with `k ≥ 1`.
fn check_open_bound_integrable(
    f: impl Fn(f64) -> f64,
    bound: f64,
    mode: f64,
    peak: f64,
) -> Result<()> {
    let reference = (mode - bound).abs().max(bound.abs()).max(1e-300);
    let dir = if mode >= bound { 1.0 } else { -1.0 };
    let e1 = 1e-6 * reference;
    let e2 = 1e-10 * reference;
    let f1 = f(bound + dir * e1);
    let f2 = f(bound + dir * e2);
    if !peak.is_finite() || !f2.is_finite() && f2 > 0.0 {
        return Err(improper("log target is infinite at a parameter bound"));
    }
    let slope = (f2 - f1) / (e1 / e2).ln();
    if slope >= 1.0 - 1e-3 {
        return Err(improper(format!(
            "density diverges like |θ − {bound}|^(−{slope:.3}) at the parameter bound"
        )));
    }
    Ok(())
}

/// `1/√(−ℓ'')` at the mode, or the distance over which the target drops by
/// one half when the curvature is unusable.
fn curvature_width(f: impl Fn(f64) -> f64, mode: f64, peak: f64, dom: &Interval, scale: f64) -> f64 {
    let room_lo = mode - dom.lo;
    let room_hi = dom.hi - mode;
    let h = (1e-4 * (mode.abs() + scale)).min(0.5 * room_lo).min(0.5 * room_hi);
    if h > 0.0 {
        let c = (f(mode + h) - 2.0 * peak + f(mode - h)) / (h * h);
        if c < 0.0 && c.is_finite() {
            return 1.0 / (-c).sqrt();
        }
    }
    // Fallback: half-unit drop on the side with room.
    let dir = if room_hi >= room_lo { 1.0 } else { -1.0 };
    let mut t = scale;
    let mut inside = 0.0;
    for _ in 0..200 {
        let x = mode + dir * t;
        if !dom.contains(x) {
            break;
        }
        if f(x) < peak - 0.5 {
            let mut lo = inside;
            let mut hi = t;
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if f(mode + dir * mid) < peak - 0.5 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return hi;
        }
        inside = t;
        t *= 2.0;
    }
    scale
}

/// Side reach `length` from `mode` in direction `dir`, clipped to the domain.
fn extend(mode: f64, dir: f64, length: f64, dom: &Interval) -> Reach {
    let target = mode + dir * length;
    let bound = if dir < 0.0 { dom.lo } else { dom.hi };
    let closed = if dir < 0.0 { dom.lo_closed } else { dom.hi_closed };
    let beyond = if dir < 0.0 { target <= bound } else { target >= bound };
    if beyond {
        let edge = if closed {
            bound
        } else {
            bound - dir * open_offset(mode - bound)
        };
        Reach {
            length: (edge - mode).abs(),
            at_bound: true,
        }
    } else {
        Reach {
            length,
            at_bound: false,
        }
    }
}

/// Walks from the mode until the target drops below `threshold`.
fn walk(
    mut f: impl FnMut(f64) -> f64,
    mode: f64,
    dir: f64,
    width: f64,
    threshold: f64,
    dom: &Interval,
) -> Result<Reach> {
    let bound = if dir < 0.0 { dom.lo } else { dom.hi };
    if mode == bound {
        return Ok(Reach {
            length: 0.0,
            at_bound: true,
        });
    }
    let mut inside = 0.0;
    let mut t = width;
    loop {
        let reach = extend(mode, dir, t, dom);
        let x = mode + dir * reach.length;
        let v = f(x);
        if v.is_nan() || v == f64::INFINITY {
            return Err(improper(format!("log target is not finite at {x}")));
        }
        if v < threshold {
            let (mut lo, mut hi) = (inside, reach.length);
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if f(mode + dir * mid) < threshold {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Reach {
                length: hi,
                at_bound: false,
            });
        }
        if reach.at_bound {
            return Ok(reach);
        }
        if t >= WALK_CAP * width {
            return Ok(reach);
        }
        inside = t;
        t *= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_weights_sum_to_span() {
        let a = Axis::new(vec![0.0, 0.1, 0.5, 2.0, 2.25]).unwrap();
        let total: f64 = a.weights().iter().sum();
        assert!((total - a.span()).abs() < 1e-12);
        let s = Axis::stretched(1.0, 0.3, 4.0, 100.0, 501).unwrap();
        let total: f64 = s.weights().iter().sum();
        assert!((total - s.span()).abs() < 1e-12 * s.span());
        assert_eq!(s.lo(), -3.0);
        assert_eq!(s.hi(), 101.0);
    }

    #[test]
    fn rejects_unsorted_nodes() {
        assert!(Axis::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(Axis::new(vec![1.0]).is_err());
    }

    #[test]
    fn locate_at_nodes_and_between() {
        let a = Axis::uniform(0.0, 1.0, 11).unwrap();
        let (i, t) = a.locate(0.35).unwrap();
        assert_eq!(i, 3);
        assert!((t - 0.5).abs() < 1e-12);
        assert_eq!(a.locate(1.0), Some((9, 1.0)));
        assert!(a.locate(1.01).is_none());
    }

    #[test]
    fn gaussian_target_is_covered() {
        let f = |p: &[f64]| -0.5 * (p[0] - 2.0).powi(2);
        let placed = place(&f, &[0.0], &[Interval::real()], &AutoGrid::default()).unwrap();
        let a = placed.grid.axis(0);
        assert!((placed.info.mode[0] - 2.0).abs() < 1e-8);
        assert!((placed.info.width[0] - 1.0).abs() < 1e-4);
        let edge_ratio = (-0.5 * (a.hi() - 2.0).powi(2)).exp();
        assert!(edge_ratio < 1e-10);
        assert_eq!(placed.info.doublings, 0);
    }

    #[test]
    fn divergent_tail_is_improper() {
        // τ⁻¹ e^(−1/τ): flat weight on an exponential scale likelihood
        let f = |p: &[f64]| -p[0].ln() - 1.0 / p[0];
        let r = place(&f, &[1.0], &[Interval::positive()], &AutoGrid::default());
        assert!(matches!(r, Err(Error::ImproperPosterior(_))), "{:?}", r.err());
    }

    #[test]
    fn cauchy_tail_is_proper() {
        let f = |p: &[f64]| -(1.0 + p[0] * p[0]).ln();
        let placed = place(&f, &[0.3], &[Interval::real()], &AutoGrid::default()).unwrap();
        assert!(placed.info.tail_fraction < 1e-6);
    }

    #[test]
    fn boundary_mode_on_closed_bound() {
        let f = |p: &[f64]| -0.5 * (p[0] + 1.0).powi(2);
        let placed = place(&f, &[0.5], &[Interval::at_least(0.0)], &AutoGrid::default()).unwrap();
        assert_eq!(placed.grid.axis(0).lo(), 0.0);
    }

    #[test]
    fn non_integrable_open_bound() {
        // λ⁻¹ e^(−λ) near 0
        let f = |p: &[f64]| -p[0].ln() - p[0];
        let r = place(&f, &[1.0], &[Interval::positive()], &AutoGrid::default());
        assert!(matches!(r, Err(Error::ImproperPosterior(_))), "{:?}", r.err());
        // e^(−λ) is fine
        let g = |p: &[f64]| -p[0];
        let placed = place(&g, &[1.0], &[Interval::positive()], &AutoGrid::default()).unwrap();
        assert!(placed.grid.axis(0).lo() > 0.0);
    }

    #[test]
    fn two_dimensional_placement() {
        let f = |p: &[f64]| -0.5 * (p[0] - 1.0).powi(2) - 0.5 * ((p[1] - 3.0) / 0.5).powi(2);
        let placed = place(
            &f,
            &[0.0, 1.0],
            &[Interval::real(), Interval::positive()],
            &AutoGrid::default(),
        )
        .unwrap();
        assert_eq!(placed.grid.len(), 401 * 401);
        assert!((placed.info.mode[1] - 3.0).abs() < 1e-6);
        assert!((placed.info.width[1] - 0.5).abs() < 1e-3);
    }
}
