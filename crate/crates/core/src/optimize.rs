//! One-dimensional convex minimisation by golden-section search.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimiser found by [`golden_section`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Minimises a unimodal `f` on `[lo, hi]` until the bracket is narrower
/// than `tol`. The endpoints are always evaluated so minima sitting on the
/// boundary are returned exactly.
pub fn golden_section<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<Minimum>
where
    F: FnMut(f64) -> f64,
{
    if !(lo <= hi) {
        return Err(Error::InvalidParameter(format!(
            "golden section bracket [{lo}, {hi}] is empty"
        )));
    }
    let f_lo = f(lo);
    let f_hi = f(hi);
    let mut best = if f_lo <= f_hi {
        Minimum { x: lo, value: f_lo, iterations: 0 }
    } else {
        Minimum { x: hi, value: f_hi, iterations: 0 }
    };
    if hi - lo <= tol {
        return Ok(best);
    }

    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while b - a > tol {
        if iterations >= max_iter {
            return Err(Error::IterationCap { routine: "golden_section", cap: max_iter });
        }
        iterations += 1;
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let (x, value) = if fc <= fd { (c, fc) } else { (d, fd) };
    if value < best.value {
        best = Minimum { x, value, iterations };
    } else {
        best.iterations = iterations;
    }
    Ok(best)
}
