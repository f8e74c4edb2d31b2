//! Bracketed scalar root finding: secant steps safeguarded by bisection.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Stop once `|f(x)| <= f_tol`.
    pub f_tol: f64,
    /// Stop once the bracket is narrower than `x_tol * max(1, |x|)`.
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            f_tol: 1e-12,
            x_tol: 1e-13,
            max_iter: 400,
        }
    }
}

/// Root of `f` on `[lo, hi]` given `f(lo)` and `f(hi)` of opposite sign.
///
/// Each iteration tries the secant point of the current bracket; when the
/// bracket fails to at least halve over two consecutive steps, the next step
/// is a plain bisection, so convergence is never slower than bisection.
pub fn find_root<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    f_lo: f64,
    f_hi: f64,
    opts: &RootOptions,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(Error::BracketFailure {
            low: lo,
            high: hi,
            f_low: f_lo,
            f_high: f_hi,
        });
    }
    let (mut a, mut fa, mut b, mut fb) = (lo, f_lo, hi, f_hi);
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    let mut width_two_back = f64::INFINITY;
    let mut width_one_back = (b - a).abs();
    let mut force_bisect = false;

    for _ in 0..opts.max_iter {
        if best.1.abs() <= opts.f_tol {
            return Ok(best.0);
        }
        let width = (b - a).abs();
        if width <= opts.x_tol * a.abs().max(b.abs()).max(1.0) {
            return Ok(best.0);
        }
        let mid = 0.5 * (a + b);
        let mut x = if force_bisect {
            mid
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let (left, right) = if a < b { (a, b) } else { (b, a) };
        if !(x > left && x < right) {
            x = mid;
        }
        let fx = f(x)?;
        if fx.is_nan() {
            return Err(Error::BracketFailure {
                low: a,
                high: b,
                f_low: fa,
                f_high: fb,
            });
        }
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        let new_width = (b - a).abs();
        force_bisect = new_width > 0.5 * width_two_back;
        width_two_back = width_one_back;
        width_one_back = new_width;
    }
    if best.1.abs() <= opts.f_tol.max(1e3 * f64::EPSILON) {
        Ok(best.0)
    } else {
        Err(Error::BracketFailure {
            low: a,
            high: b,
            f_low: fa,
            f_high: fb,
        })
    }
}

/// Like [`find_root`] but evaluates the endpoints itself.
pub fn bracketed_root<F>(mut f: F, lo: f64, hi: f64, opts: &RootOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    find_root(f, lo, hi, f_lo, f_hi, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_root_of_two() {
        let r = bracketed_root(|x| Ok(x * x - 2.0), 0.0, 2.0, &RootOptions::default()).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn steep_and_flat_functions_converge() {
        let opts = RootOptions {
            f_tol: 0.0,
            x_tol: 1e-14,
            max_iter: 400,
        };
        // Secant alone stalls on this one.
        let r = bracketed_root(|x: f64| Ok(x.powi(9) - 1e-9), -1.0, 4.0, &opts).unwrap();
        assert!((r - 0.1).abs() < 1e-12, "{r}");
        let r = bracketed_root(|x: f64| Ok((x - 0.3).cbrt()), 0.0, 1.0, &opts).unwrap();
        assert!((r - 0.3).abs() < 1e-13, "{r}");
    }

    #[test]
    fn decreasing_function() {
        let r = bracketed_root(|x: f64| Ok(1.0 - x.exp()), -3.0, 5.0, &RootOptions::default())
            .unwrap();
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn same_sign_is_a_bracket_failure() {
        let err = bracketed_root(|x| Ok(x * x + 1.0), -1.0, 1.0, &RootOptions::default());
        assert!(matches!(err, Err(Error::BracketFailure { .. })));
    }

    #[test]
    fn errors_propagate() {
        let err = bracketed_root(
            |x| {
                if x > 0.5 && x < 1.5 {
                    Err(Error::InvalidParam("boom".into()))
                } else {
                    Ok(x - 1.0)
                }
            },
            0.0,
            3.0,
            &RootOptions::default(),
        );
        assert!(matches!(err, Err(Error::InvalidParam(_))));
    }
}
