//! Distortion functions and the two equivalent CVaR computations.
//!
//! A distorted expected loss can be evaluated two ways: directly over the
//! loss axis by integrating the distorted survival function, or over the
//! probability axis by integrating the quantile function. Both are exposed
//! and their agreement is a standing property test — they are independent
//! routes through different machinery (CDF quadrature vs. quantile
//! inversion).

use crate::distributions::ContinuousDistribution;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breakpoints, QuadratureConfig};
use crate::report::RiskReport;
use crate::scalar::{real, Real};

/// A monotone map of `[0, 1]` onto itself applied to survival probabilities.
pub trait DistortionFunction<T: Real> {
    fn eval(&self, t: T) -> T;

    /// Label plus parameters, for reports.
    fn descriptor(&self) -> String;

    /// Tail-mass level this distortion is tied to, when it has one.
    fn alpha(&self) -> Option<T> {
        None
    }

    /// Survival levels where the distortion has kinks; used as quadrature
    /// split hints.
    fn kink_levels(&self) -> Vec<T> {
        Vec::new()
    }

    /// Slope of the distortion at `0+` when it is linear there; enables an
    /// analytic remainder for the truncated upper tail.
    fn tail_slope(&self) -> Option<T> {
        None
    }
}

/// The CVaR distortion: `t / (1 - alpha)` capped at 1.
#[derive(Debug, Clone, Copy)]
pub struct CvarDistortion<T> {
    alpha: T,
}

impl<T: Real> CvarDistortion<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if !(alpha >= T::zero() && alpha < T::one()) {
            return Err(Error::domain(format!(
                "cvar distortion requires alpha in [0, 1), got {alpha}"
            )));
        }
        Ok(CvarDistortion { alpha })
    }
}

impl<T: Real> DistortionFunction<T> for CvarDistortion<T> {
    fn eval(&self, t: T) -> T {
        let spread = T::one() - self.alpha;
        if t >= spread {
            T::one()
        } else {
            t / spread
        }
    }

    fn descriptor(&self) -> String {
        format!("cvar(alpha={})", self.alpha)
    }

    fn alpha(&self) -> Option<T> {
        Some(self.alpha)
    }

    fn kink_levels(&self) -> Vec<T> {
        vec![T::one() - self.alpha]
    }

    fn tail_slope(&self) -> Option<T> {
        Some((T::one() - self.alpha).recip())
    }
}

/// The identity distortion; the Choquet expected loss reduces to the mean.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityDistortion;

impl<T: Real> DistortionFunction<T> for IdentityDistortion {
    fn eval(&self, t: T) -> T {
        t
    }

    fn descriptor(&self) -> String {
        "identity".to_string()
    }

    fn tail_slope(&self) -> Option<T> {
        Some(T::one())
    }
}

/// Choquet expected loss: the distorted survival function integrated over
/// the loss axis,
/// `int_0^inf Phi(1 - F(x)) dx + int_{-inf}^0 [Phi(1 - F(x)) - 1] dx`.
///
/// Infinite domains are truncated at the configured tail mass; when the law
/// supplies a closed-form survival integral and the distortion is linear in
/// the tail, the truncated upper remainder is added back analytically.
pub fn choquet_expected_loss<T, D, P>(
    dist: &D,
    phi: &P,
    cfg: &QuadratureConfig<T>,
) -> Result<RiskReport<T>>
where
    T: Real,
    D: ContinuousDistribution<T> + ?Sized,
    P: DistortionFunction<T> + ?Sized,
{
    cfg.validate()?;
    let ttp = cfg.tail_truncation_probability;
    let (support_lo, support_hi) = dist.support();

    let z_hi = if support_hi.is_finite() {
        support_hi
    } else {
        dist.quantile_upper(ttp)?
    };

    // Survival-level kinks of the distortion map to loss-axis breakpoints.
    let mut breaks = Vec::new();
    for level in phi.kink_levels() {
        if level > T::zero() && level < T::one() {
            breaks.push(dist.quantile_upper(level)?);
        }
    }

    let mut value = T::zero();
    if z_hi > T::zero() {
        let upper =
            integrate_with_breakpoints(|x| phi.eval(dist.survival(x)), T::zero(), z_hi, &breaks, cfg)?;
        value += upper.value;
        if !support_hi.is_finite() {
            if let (Some(slope), Some(tail)) =
                (phi.tail_slope(), dist.upper_tail_survival_integral(z_hi))
            {
                value += slope * tail;
            }
        }
    }

    let z_lo = if support_lo.is_finite() {
        support_lo
    } else {
        dist.quantile(ttp)?
    };
    if z_lo < T::zero() {
        let lower = integrate_with_breakpoints(
            |x| phi.eval(dist.survival(x)) - T::one(),
            z_lo,
            T::zero(),
            &breaks,
            cfg,
        )?;
        value += lower.value;
    }

    if !value.is_finite() {
        return Err(Error::NonIntegrable(format!(
            "choquet expected loss diverges for {}",
            phi.descriptor()
        )));
    }

    Ok(RiskReport::new(
        value,
        "choquet_expected_loss",
        phi.alpha().unwrap_or(T::nan()),
        phi.descriptor(),
        cfg.tolerance_for(value),
    ))
}

/// Expected shortfall through the quantile function:
/// `(1 - alpha)^{-1} int_alpha^1 F^{-1}(t) dt`.
///
/// Computed after the substitution `u = 1 - t`, so the integrable endpoint
/// singularity of heavy-tailed quantiles sits at `u = 0` where the adaptive
/// rule refines.
pub fn cvar_quantile_integral<T, D>(
    dist: &D,
    alpha: T,
    cfg: &QuadratureConfig<T>,
) -> Result<RiskReport<T>>
where
    T: Real,
    D: ContinuousDistribution<T> + ?Sized,
{
    cfg.validate()?;
    if !(alpha >= T::zero() && alpha < T::one()) {
        return Err(Error::domain(format!(
            "cvar requires alpha in [0, 1), got {alpha}"
        )));
    }
    let tail_mass = T::one() - alpha;
    let q = integrate_with_breakpoints(
        |u| dist.quantile_upper(u).unwrap_or(T::nan()),
        T::zero(),
        tail_mass,
        &[],
        cfg,
    )?;
    let value = q.value / tail_mass;
    if !value.is_finite() {
        return Err(Error::NonIntegrable(
            "quantile integral diverges; tail index must exceed 1".to_string(),
        ));
    }
    Ok(RiskReport::new(
        value,
        "cvar_quantile_integral",
        alpha,
        format!("tail_mass={tail_mass}"),
        cfg.tolerance_for(value),
    ))
}

/// CVaR triple for `X`, `X + shift` and `scale * X`, with the coherence
/// deviations measured against translation invariance and positive
/// homogeneity.
#[derive(Debug, Clone)]
pub struct CoherenceProbe<T> {
    pub base: T,
    pub shifted: T,
    pub scaled: T,
    pub translation_error: T,
    pub homogeneity_error: T,
    pub tolerance: T,
    pub passes: bool,
}

/// Evaluate CVaR on affine transforms of the law and check the two coherence
/// properties that are visible on a single marginal, within 10x the
/// quadrature tolerance.
pub fn coherence_probe<T, D>(
    dist: &D,
    alpha: T,
    shift: T,
    scale: T,
    cfg: &QuadratureConfig<T>,
) -> Result<CoherenceProbe<T>>
where
    T: Real,
    D: ContinuousDistribution<T>,
{
    use crate::distributions::AffineTransformed;

    let base = cvar_quantile_integral(dist, alpha, cfg)?.value;
    let shifted_law = AffineTransformed::new(dist, T::one(), shift)?;
    let shifted = cvar_quantile_integral(&shifted_law, alpha, cfg)?.value;
    let scaled_law = AffineTransformed::new(dist, scale, T::zero())?;
    let scaled = cvar_quantile_integral(&scaled_law, alpha, cfg)?.value;

    let tolerance = real::<T>(10.0) * (cfg.tolerance_for(base) + cfg.tolerance_for(shifted));
    let translation_error = (shifted - (base + shift)).abs();
    let homogeneity_error = (scaled - scale * base).abs();
    let passes = translation_error <= tolerance && homogeneity_error <= tolerance.max(cfg.tolerance_for(scaled) * real(10.0));
    Ok(CoherenceProbe {
        base,
        shifted,
        scaled,
        translation_error,
        homogeneity_error,
        tolerance,
        passes,
    })
}
