//! Safeguarded scalar root finding on a sign-changing bracket.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub value: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// Expands geometrically from `start` until `g` changes sign, assuming
/// `g > 0` below the root and `g < 0` above it. Returns `(lo, hi)` with
/// `g(lo) > 0 >= g(hi)` (or an exact zero at one end).
pub fn bracket_decreasing<G>(g: G, start: f64, factor: f64, max_steps: usize) -> Result<(f64, f64, usize)>
where
    G: Fn(f64) -> f64,
{
    let v = g(start);
    if v == 0.0 {
        return Ok((start, start, 0));
    }
    let mut steps = 0;
    if v > 0.0 {
        let mut lo = start;
        let mut hi = start * factor;
        while g(hi) > 0.0 {
            steps += 1;
            if steps > max_steps {
                return Err(Error::BracketFailure(format!(
                    "no sign change up to t = {hi:e} after {max_steps} expansions"
                )));
            }
            lo = hi;
            hi *= factor;
        }
        Ok((lo, hi, steps + 1))
    } else {
        let mut hi = start;
        let mut lo = start / factor;
        while g(lo) <= 0.0 {
            steps += 1;
            if steps > max_steps {
                return Err(Error::BracketFailure(format!(
                    "no sign change down to t = {lo:e} after {max_steps} contractions"
                )));
            }
            hi = lo;
            lo /= factor;
        }
        Ok((lo, hi, steps + 1))
    }
}

/// Root of a function with `g(lo) > 0 > g(hi)`: bisection until the bracket's
/// relative width is below `bisect_width`, then Newton steps kept inside the
/// bracket (bisection whenever Newton leaves it). Stops when
/// `|g| <= abs_tol(x)` or the bracket collapses to round-off.
pub fn solve_decreasing<G, D, T>(
    g: G,
    dg: D,
    mut lo: f64,
    mut hi: f64,
    bisect_width: f64,
    abs_tol: T,
    max_iters: usize,
) -> Root
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
    T: Fn(f64) -> f64,
{
    let mut iterations = 0;
    if lo == hi {
        return Root {
            x: lo,
            value: g(lo),
            bracket: (lo, hi),
            iterations,
        };
    }
    let bracket = (lo, hi);
    while (hi - lo) > bisect_width * hi && iterations < max_iters {
        let mid = 0.5 * (lo + hi);
        let v = g(mid);
        iterations += 1;
        if v == 0.0 {
            return Root {
                x: mid,
                value: v,
                bracket,
                iterations,
            };
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    let mut v = g(x);
    while iterations < max_iters {
        iterations += 1;
        if v.abs() <= abs_tol(x) {
            break;
        }
        if v > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = dg(x);
        let newton = x - v / d;
        let next = if d < 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == x || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        x = next;
        v = g(x);
    }
    Root {
        x,
        value: v,
        bracket,
        iterations,
    }
}
