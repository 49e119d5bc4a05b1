//! Adaptive Simpson quadrature with Richardson correction.

use crate::error::{Error, Result};

/// Integrate `f` over [a, b] to absolute tolerance `tol`.
///
/// The interval is split recursively until the three-point and five-point
/// Simpson estimates agree; the extrapolated value is returned. Fails if any
/// subinterval still disagrees at `max_depth`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64, max_depth: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(b > a) {
        return Err(Error::invalid(format!("bad interval [{a}, {b}]")));
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut converged = true;
    let value = recurse(&f, a, b, fa, fm, fb, whole, tol, max_depth, &mut converged);
    if !converged {
        return Err(Error::Quadrature(format!(
            "interval [{a}, {b}] not resolved at depth {max_depth} and tolerance {tol}"
        )));
    }
    Ok(value)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    converged: &mut bool,
) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    if depth == 0 {
        *converged = false;
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, converged)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, converged)
}
