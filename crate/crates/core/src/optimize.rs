//! Derivative-based maximization for one and two parameters.
//!
//! 1-d: bracket the maximum by step doubling, then Newton steps with
//! finite-difference derivatives, falling back to golden-section steps when
//! Newton leaves the bracket or fails to improve. 2-d: coordinate ascent
//! over the 1-d routine.

use crate::error::{Error, Result};
use crate::families::Interval;

const GOLDEN: f64 = 0.381_966_011_250_105;
const MAX_EXPANSIONS: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    /// Set when the supremum sits on a domain boundary.
    pub boundary: Option<Side>,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct MaximumN {
    pub x: Vec<f64>,
    pub value: f64,
    pub boundary: Vec<Option<Side>>,
    pub sweeps: usize,
}

fn guard(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Finite-difference step for coordinate `x` with characteristic scale `scale`.
pub fn fd_step(x: f64, scale: f64, domain: &Interval) -> f64 {
    let mut h = 1e-4 * scale.abs().max(1e-3 * x.abs()).max(f64::MIN_POSITIVE);
    if domain.is_bounded_below() {
        h = h.min(0.5 * (x - domain.lo).abs()).max(f64::MIN_POSITIVE);
    }
    if domain.is_bounded_above() {
        h = h.min(0.5 * (domain.hi - x).abs()).max(f64::MIN_POSITIVE);
    }
    h
}

/// Moves from `x` by `dx`, never leaving the domain. Crossing a closed end
/// lands on it; crossing an open end goes halfway to it.
fn advance(x: f64, dx: f64, domain: &Interval) -> f64 {
    let t = x + dx;
    if t < domain.lo || (t == domain.lo && !domain.lo_closed) {
        if domain.lo_closed {
            domain.lo
        } else {
            x + 0.5 * (domain.lo - x)
        }
    } else if t > domain.hi || (t == domain.hi && !domain.hi_closed) {
        if domain.hi_closed {
            domain.hi
        } else {
            x + 0.5 * (domain.hi - x)
        }
    } else {
        t
    }
}

fn near(x: f64, bound: f64, scale: f64) -> bool {
    (x - bound).abs() <= 1e-13 * (bound.abs() + scale.abs()) || x == bound
}

/// Maximizes `f` over `domain`, starting at `start` with initial step `scale`.
pub fn maximize_1d(
    f: impl Fn(f64) -> f64,
    start: f64,
    scale: f64,
    domain: &Interval,
    max_iter: usize,
) -> Result<Maximum> {
    let f = |x: f64| guard(f(x));
    let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    let x0 = feasible_start(start, scale, domain);
    let f0 = f(x0);
    let xp = advance(x0, scale, domain);
    let xm = advance(x0, -scale, domain);
    let (fp, fm) = (f(xp), f(xm));

    let boundary_at = |x: f64, side: Side| Maximum {
        x,
        value: f(x),
        boundary: Some(side),
        iterations: 0,
    };

    let (mut a, mut b, mut c, mut fb);
    if fp <= f0 && fm <= f0 {
        if xm == x0 || xp == x0 {
            // x0 sits on a closed end; look for an interior point between it
            // and the lower neighbour.
            let (side, mut far) = if xm == x0 { (Side::Lower, xp) } else { (Side::Upper, xm) };
            let mut inner = None;
            for _ in 0..200 {
                let x = x0 + GOLDEN * (far - x0);
                let fx = f(x);
                if fx > f0 {
                    inner = Some((x, fx));
                    break;
                }
                far = x;
                if near(far, x0, scale) {
                    break;
                }
            }
            let Some((x, fx)) = inner else {
                return Ok(boundary_at(x0, side));
            };
            a = x0.min(far);
            c = x0.max(far);
            b = x;
            fb = fx;
        } else {
            a = xm;
            b = x0;
            c = xp;
            fb = f0;
        }
    } else {
        let dir = if fp >= fm { 1.0 } else { -1.0 };
        let (mut prev, mut cur, mut fcur) = if dir > 0.0 { (x0, xp, fp) } else { (x0, xm, fm) };
        let (bound, side) = if dir > 0.0 {
            (domain.hi, Side::Upper)
        } else {
            (domain.lo, Side::Lower)
        };
        let mut step = scale;
        let mut bracket = None;
        for _ in 0..MAX_EXPANSIONS {
            if bound.is_finite() && near(cur, bound, scale) {
                return Ok(boundary_at(cur, side));
            }
            step *= 2.0;
            let next = advance(cur, dir * step, domain);
            if next == cur {
                return Ok(boundary_at(cur, side));
            }
            let fnext = f(next);
            if fnext < fcur {
                bracket = Some((prev, cur, next, fcur));
                break;
            }
            if !next.is_finite() || next.abs() > 1e300 {
                break;
            }
            prev = cur;
            cur = next;
            fcur = fnext;
        }
        let Some((p, q, r, fq)) = bracket else {
            return Err(Error::NonConvergence {
                iterations: MAX_EXPANSIONS,
                trace: format!("objective keeps increasing from {start}, last point {cur}"),
            });
        };
        a = p.min(r);
        c = p.max(r);
        b = q;
        fb = fq;
    }
    refine(&f, &mut a, &mut b, &mut c, &mut fb, scale, domain, max_iter)
}

fn feasible_start(start: f64, scale: f64, domain: &Interval) -> f64 {
    if domain.contains(start) {
        return start;
    }
    let width = if domain.lo.is_finite() && domain.hi.is_finite() {
        0.5 * (domain.hi - domain.lo)
    } else {
        scale
    };
    let candidate = if start <= domain.lo {
        if domain.lo_closed {
            domain.lo
        } else {
            domain.lo + scale.min(width)
        }
    } else if start >= domain.hi {
        if domain.hi_closed {
            domain.hi
        } else {
            domain.hi - scale.min(width)
        }
    } else {
        f64::NAN
    };
    if domain.contains(candidate) {
        candidate
    } else if domain.lo.is_finite() && domain.hi.is_finite() {
        0.5 * (domain.lo + domain.hi)
    } else if domain.lo.is_finite() {
        domain.lo + scale
    } else if domain.hi.is_finite() {
        domain.hi - scale
    } else {
        0.0
    }
}

#[allow(clippy::too_many_arguments)]
fn refine(
    f: &impl Fn(f64) -> f64,
    a: &mut f64,
    b: &mut f64,
    c: &mut f64,
    fb: &mut f64,
    scale: f64,
    domain: &Interval,
    max_iter: usize,
) -> Result<Maximum> {
    for it in 1..=max_iter {
        let tol = 1e-11 * (b.abs() + scale);
        if *c - *a <= 2.0 * tol {
            return Ok(bracketed_result(*b, *fb, *a, *c, domain, scale, it));
        }
        let h = (1e-5 * (b.abs() + scale))
            .min(0.25 * (*c - *a))
            .min(0.5 * (*b - domain.lo))
            .min(0.5 * (domain.hi - *b));
        let fp = f(*b + h);
        let fm = f(*b - h);
        let g = (fp - fm) / (2.0 * h);
        let hess = (fp - 2.0 * *fb + fm) / (h * h);
        let mut moved = false;
        if hess < 0.0 && g.is_finite() {
            let x = *b - g / hess;
            if x > *a && x < *c && x != *b {
                let fx = f(x);
                let dx = (x - *b).abs();
                if fx >= *fb {
                    if x < *b {
                        *c = *b;
                    } else {
                        *a = *b;
                    }
                    *b = x;
                    *fb = fx;
                    moved = true;
                    if dx <= tol {
                        return Ok(bracketed_result(*b, *fb, *a, *c, domain, scale, it));
                    }
                } else if x < *b {
                    *a = x;
                } else {
                    *c = x;
                }
            }
        }
        if !moved {
            let x = if *c - *b > *b - *a {
                *b + GOLDEN * (*c - *b)
            } else {
                *b - GOLDEN * (*b - *a)
            };
            let fx = f(x);
            if fx > *fb {
                if x > *b {
                    *a = *b;
                } else {
                    *c = *b;
                }
                *b = x;
                *fb = fx;
            } else if x > *b {
                *c = x;
            } else {
                *a = x;
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        trace: format!("bracket [{a}, {c}] around {b}"),
    })
}

fn bracketed_result(b: f64, fb: f64, a: f64, c: f64, domain: &Interval, scale: f64, it: usize) -> Maximum {
    let boundary = if domain.is_bounded_below() && near(a, domain.lo, scale) && near(b, domain.lo, scale) {
        Some(Side::Lower)
    } else if domain.is_bounded_above() && near(c, domain.hi, scale) && near(b, domain.hi, scale) {
        Some(Side::Upper)
    } else {
        None
    };
    Maximum {
        x: b,
        value: fb,
        boundary,
        iterations: it,
    }
}

/// Coordinate ascent over `maximize_1d`.
pub fn maximize_nd(
    f: impl Fn(&[f64]) -> f64,
    start: &[f64],
    scales: &[f64],
    domains: &[Interval],
    max_sweeps: usize,
) -> Result<MaximumN> {
    let mut x = start.to_vec();
    let mut boundary = vec![None; x.len()];
    let mut value = guard(f(&x));
    for sweep in 1..=max_sweeps {
        let mut largest = 0.0f64;
        for i in 0..x.len() {
            let base = x.clone();
            let m = maximize_1d(
                |t| {
                    let mut probe = base.clone();
                    probe[i] = t;
                    f(&probe)
                },
                x[i],
                scales[i],
                &domains[i],
                500,
            )?;
            if m.value >= value {
                largest = largest.max((m.x - x[i]).abs() / (x[i].abs() + scales[i]));
                x[i] = m.x;
                value = m.value;
                boundary[i] = m.boundary;
            }
        }
        if largest < 1e-10 {
            return Ok(MaximumN {
                x,
                value,
                boundary,
                sweeps: sweep,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: max_sweeps,
        trace: format!("coordinate ascent stalled near {x:?}"),
    })
}

/// Central-difference gradient.
pub fn gradient(f: &impl Fn(&[f64]) -> f64, x: &[f64], steps: &[f64]) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            p[i] = x[i] + steps[i];
            let fp = f(&p);
            p[i] = x[i] - steps[i];
            let fm = f(&p);
            p[i] = x[i];
            (fp - fm) / (2.0 * steps[i])
        })
        .collect()
}

/// Central-difference Hessian (row-major, symmetric).
pub fn hessian(f: &impl Fn(&[f64]) -> f64, x: &[f64], steps: &[f64]) -> Vec<f64> {
    let d = x.len();
    let f0 = f(x);
    let mut p = x.to_vec();
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        let hi = steps[i];
        p[i] = x[i] + hi;
        let fp = f(&p);
        p[i] = x[i] - hi;
        let fm = f(&p);
        p[i] = x[i];
        out[i * d + i] = (fp - 2.0 * f0 + fm) / (hi * hi);
        for j in 0..i {
            let hj = steps[j];
            let mut corner = |si: f64, sj: f64| {
                p[i] = x[i] + si * hi;
                p[j] = x[j] + sj * hj;
                let v = f(&p);
                p[i] = x[i];
                p[j] = x[j];
                v
            };
            let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0))
                / (4.0 * hi * hj);
            out[i * d + j] = v;
            out[j * d + i] = v;
        }
    }
    out
}
