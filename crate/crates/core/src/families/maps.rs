use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::families::Interval;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A strictly monotone scalar map with its inverse and derivative.
///
/// Used both for variate maps `x → y` and for one-to-one
/// reparameterizations `θ → ν`.
#[derive(Clone)]
pub struct MonotoneMap {
    label: String,
    increasing: bool,
    forward: ScalarFn,
    inverse: ScalarFn,
    derivative: ScalarFn,
}

pub type VariateMap = MonotoneMap;

impl MonotoneMap {
    pub fn new(
        label: impl Into<String>,
        increasing: bool,
        forward: impl Fn(f64) -> f64 + Send + Sync + 'static,
        inverse: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        MonotoneMap {
            label: label.into(),
            increasing,
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
            derivative: Arc::new(derivative),
        }
    }

    pub fn identity() -> Self {
        MonotoneMap::new("identity", true, |x| x, |y| y, |_| 1.0)
    }

    pub fn ln() -> Self {
        MonotoneMap::new("ln", true, f64::ln, f64::exp, |x| 1.0 / x)
    }

    pub fn exp() -> Self {
        MonotoneMap::new("exp", true, f64::exp, f64::ln, f64::exp)
    }

    /// `x → a·x + b`, `a ≠ 0`.
    pub fn affine(a: f64, b: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(Error::Singularity(format!("affine map with slope {a}")));
        }
        Ok(MonotoneMap::new(
            format!("affine({a}, {b})"),
            a > 0.0,
            move |x| a * x + b,
            move |y| (y - b) / a,
            move |_| a,
        ))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_increasing(&self) -> bool {
        self.increasing
    }

    pub fn forward(&self, x: f64) -> f64 {
        (self.forward)(x)
    }

    pub fn inverse(&self, y: f64) -> f64 {
        (self.inverse)(y)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }

    /// The inverse map, with derivative `1 / g'(g⁻¹(y))`.
    pub fn inverted(&self) -> MonotoneMap {
        let fwd = self.forward.clone();
        let inv = self.inverse.clone();
        let der = self.derivative.clone();
        let inv2 = self.inverse.clone();
        MonotoneMap {
            label: format!("inverse({})", self.label),
            increasing: self.increasing,
            forward: inv,
            inverse: fwd,
            derivative: Arc::new(move |y| 1.0 / der(inv2(y))),
        }
    }

    /// Image of an interval; endpoints map through `forward` (limits for
    /// infinite or boundary endpoints are whatever `forward` returns there).
    pub fn map_interval(&self, iv: &Interval) -> Interval {
        let a = self.forward(iv.lo);
        let b = self.forward(iv.hi);
        if self.increasing {
            Interval::new(a, b, iv.lo_closed && a.is_finite(), iv.hi_closed && b.is_finite())
        } else {
            Interval::new(b, a, iv.hi_closed && b.is_finite(), iv.lo_closed && a.is_finite())
        }
    }
}

impl fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneMap")
            .field("label", &self.label)
            .field("increasing", &self.increasing)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trips() {
        let maps = [
            MonotoneMap::ln(),
            MonotoneMap::exp(),
            MonotoneMap::affine(-2.5, 1.0).unwrap(),
        ];
        for m in &maps {
            for &x in &[0.1, 0.5, 1.0, 2.0, 7.5] {
                let back = m.inverse(m.forward(x));
                assert!((back - x).abs() < 1e-12 * x.abs().max(1.0), "{}: {x}", m.label());
                assert!(m.derivative(x) != 0.0);
            }
        }
    }

    #[test]
    fn inverted_derivative_is_reciprocal() {
        let m = MonotoneMap::ln().inverted();
        for &y in &[-1.0, 0.0, 2.0] {
            assert!((m.derivative(y) - y.exp()).abs() < 1e-12 * y.exp());
        }
    }

    #[test]
    fn zero_slope_affine_is_singular() {
        assert!(matches!(MonotoneMap::affine(0.0, 1.0), Err(Error::Singularity(_))));
    }

    #[test]
    fn decreasing_map_flips_interval() {
        let m = MonotoneMap::affine(-1.0, 0.0).unwrap();
        let iv = m.map_interval(&Interval::at_least(2.0));
        assert_eq!(iv.lo, f64::NEG_INFINITY);
        assert_eq!(iv.hi, -2.0);
        assert!(iv.hi_closed && !iv.lo_closed);
    }
}
