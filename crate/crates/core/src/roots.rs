//! Monotone inversion: bracket expansion plus a bisection/secant hybrid.
//!
//! This is the workhorse behind every generalized quantile in the crate. The
//! secant step is attempted on alternate iterations and clamped into the
//! current bracket; bisection therefore still halves the bracket at least
//! every other iteration, so convergence is guaranteed for any nondecreasing
//! function.

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Default tolerance on `|f(x) - target|` for quantile inversion.
pub fn default_inversion_tol<T: Real>() -> T {
    real(1e-12)
}

const MAX_ITER: usize = 256;
const MAX_EXPANSIONS: usize = 200;

/// Expand `[lo, hi]` (doubling the step each time) until it brackets
/// `f(x) = target` for a nondecreasing `f`, staying inside `[bound_lo, bound_hi]`.
pub fn expand_bracket<T, F>(
    f: &F,
    target: T,
    mut lo: T,
    mut hi: T,
    bound_lo: T,
    bound_hi: T,
) -> Result<(T, T)>
where
    T: Real,
    F: Fn(T) -> T,
{
    debug_assert!(lo < hi);
    if bound_lo.is_finite() {
        lo = lo.max(bound_lo);
    }
    if bound_hi.is_finite() {
        hi = hi.min(bound_hi);
    }
    let mut step = hi - lo;
    for _ in 0..MAX_EXPANSIONS {
        let f_lo_ok = lo == bound_lo || f(lo) < target;
        let f_hi_ok = hi == bound_hi || f(hi) >= target;
        if f_lo_ok && f_hi_ok {
            return Ok((lo, hi));
        }
        step = step + step;
        if !f_lo_ok {
            lo = if bound_lo.is_finite() {
                (lo - step).max(bound_lo)
            } else {
                lo - step
            };
        }
        if !f_hi_ok {
            hi = if bound_hi.is_finite() {
                (hi + step).min(bound_hi)
            } else {
                hi + step
            };
        }
        if !lo.is_finite() || !hi.is_finite() {
            break;
        }
    }
    Err(Error::NoConvergence {
        context: "bracket expansion",
        iterations: MAX_EXPANSIONS,
        lo: lo.to_f64().unwrap_or(f64::NAN),
        hi: hi.to_f64().unwrap_or(f64::NAN),
    })
}

/// Solve `f(x) = target` for nondecreasing `f` on a bracketing interval.
///
/// Returns the smallest solution in the generalized-inverse sense: the
/// invariant `f(lo) < target <= f(hi)` is maintained, and when the bracket
/// collapses to rounding width the upper end is returned.
pub fn invert_monotone<T, F>(f: &F, target: T, lo: T, hi: T, f_tol: T) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    let mut lo = lo;
    let mut hi = hi;
    let mut f_lo = f(lo) - target;
    let mut f_hi = f(hi) - target;
    if f_lo >= T::zero() {
        // Already at or past the target on the left edge (support boundary).
        return Ok(lo);
    }
    if f_hi < T::zero() {
        return Err(Error::NoConvergence {
            context: "monotone inversion (target not bracketed)",
            iterations: 0,
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
        });
    }

    let four = real::<T>(4.0);
    for iter in 0..MAX_ITER {
        // No absolute floor here: roots can sit many orders of magnitude
        // below the initial bracket (a chi-square quantile near zero), and
        // the bracket must be allowed to shrink all the way down to them.
        let width_tol = four * T::epsilon() * (lo.abs() + hi.abs()) + T::min_positive_value();
        if hi - lo <= width_tol {
            return Ok(hi);
        }

        let mid_bisect = lo + (hi - lo) / real(2.0);
        let mid = if iter % 2 == 1 && f_hi > f_lo {
            // Secant proposal, accepted only if strictly interior.
            let s = hi - f_hi * (hi - lo) / (f_hi - f_lo);
            if s > lo && s < hi {
                s
            } else {
                mid_bisect
            }
        } else {
            mid_bisect
        };

        let f_mid = f(mid) - target;
        if f_mid.abs() <= f_tol {
            return Ok(mid);
        }
        if f_mid < T::zero() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    Err(Error::NoConvergence {
        context: "monotone inversion",
        iterations: MAX_ITER,
        lo: lo.to_f64().unwrap_or(f64::NAN),
        hi: hi.to_f64().unwrap_or(f64::NAN),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverts_cubic() {
        let f = |x: f64| x * x * x;
        let root = invert_monotone(&f, 8.0, 0.0, 10.0, 1e-14).unwrap();
        assert!((root - 2.0).abs() < 1e-12, "root = {root}");
    }

    #[test]
    fn expansion_reaches_distant_target() {
        let f = |x: f64| x;
        let (lo, hi) = expand_bracket(&f, 1000.0, -1.0, 1.0, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert!(f(lo) < 1000.0 && f(hi) >= 1000.0, "bracket [{lo}, {hi}]");
        let root = invert_monotone(&f, 1000.0, lo, hi, 1e-12).unwrap();
        assert!((root - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn respects_support_bounds() {
        // CDF-like function that is 0 below 0 and saturates at 1.
        let f = |x: f64| x.clamp(0.0, 1.0);
        let (lo, hi) = expand_bracket(&f, 0.25, 0.5, 2.5, 0.0, f64::INFINITY).unwrap();
        assert!(lo >= 0.0);
        let root = invert_monotone(&f, 0.25, lo, hi, 1e-13).unwrap();
        assert!((root - 0.25).abs() < 1e-10, "root = {root}");
    }

    #[test]
    fn generalized_inverse_of_flat_region() {
        // Flat on [1, 2]. Querying just below the plateau level must land on
        // the left edge of the plateau, the generalized-inverse point.
        let f = |x: f64| {
            if x < 1.0 {
                x
            } else if x <= 2.0 {
                1.0
            } else {
                x - 1.0
            }
        };
        let root = invert_monotone(&f, 1.0 - 1e-9, 0.0, 3.0, 1e-13).unwrap();
        assert!((root - 1.0).abs() < 1e-8, "root = {root}");
    }

    #[test]
    fn resolves_roots_far_below_bracket_scale() {
        // Root at 1e-18 inside [0, 2]; the width tolerance must scale down
        // with the bracket instead of stalling near zero.
        let f = |x: f64| (x.max(0.0) * 1e18).sqrt().min(2.0);
        let root = invert_monotone(&f, 1.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((f(root) - 1.0).abs() <= 1e-9, "f(root) = {}", f(root));
    }

    #[test]
    fn unbracketed_target_errors() {
        let f = |x: f64| x;
        let err = invert_monotone(&f, 5.0, 0.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }));
    }
}
