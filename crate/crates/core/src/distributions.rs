//! Analytic univariate distributions.
//!
//! [`ContinuousDistribution`] is the capability set the rest of the engine
//! computes on: CDF, density, high-order density derivatives (where a law
//! has them in closed form), generalized quantiles and inverse-transform
//! sampling. Quantiles fall back to bracket expansion plus a
//! bisection/secant hybrid for laws without a closed-form inverse.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::roots::{default_inversion_tol, expand_bracket, invert_monotone};
use crate::scalar::{real, Real};
use crate::special::{
    inverse_normal_cdf, ln_gamma, reg_lower_gamma, reg_upper_gamma, standard_normal_cdf,
    standard_normal_pdf, standard_normal_sf,
};

/// A univariate law with a continuous distribution function.
pub trait ContinuousDistribution<T: Real> {
    /// Distribution function `P(X <= z)`.
    fn cdf(&self, z: T) -> T;

    /// Density at `z`.
    fn pdf(&self, z: T) -> T;

    /// `n`-th derivative of the density, for `order` in `1..=4`.
    ///
    /// Laws without closed-form derivatives reject instead of silently
    /// falling back to finite differences; the expansion family needs
    /// derivative accuracy at second-order perturbation scale.
    fn pdf_derivative(&self, z: T, order: u32) -> Result<T>;

    /// Support interval; ends may be infinite.
    fn support(&self) -> (T, T);

    /// Mean, when defined.
    fn mean(&self) -> Option<T>;

    /// Survival function `P(X > z)`. Override when `1 - cdf` loses tail
    /// precision.
    fn survival(&self, z: T) -> T {
        T::one() - self.cdf(z)
    }

    /// Generalized inverse `inf { z : cdf(z) >= t }` for `t` in `(0, 1)`.
    fn quantile(&self, t: T) -> Result<T> {
        invert_cdf(self, t)
    }

    /// Upper quantile `F^{-1}(1 - u)` parameterized by the tail mass `u`, so
    /// heavy-tail implementations stay accurate for `u` below rounding of
    /// `1 - u`.
    fn quantile_upper(&self, u: T) -> Result<T> {
        if !(u > T::zero() && u < T::one()) {
            return Err(Error::domain(format!(
                "upper quantile requires tail mass in (0, 1), got {u}"
            )));
        }
        self.quantile(T::one() - u)
    }

    /// Closed form of the integrated survival `int_a^inf P(X > x) dx`
    /// (equivalently `E (X - a)^+`), when the law has one. Used as an
    /// analytic tail remainder beyond quadrature truncation points.
    fn upper_tail_survival_integral(&self, _a: T) -> Option<T> {
        None
    }
}

impl<T: Real, D: ContinuousDistribution<T> + ?Sized> ContinuousDistribution<T> for &D {
    fn cdf(&self, z: T) -> T {
        (**self).cdf(z)
    }
    fn pdf(&self, z: T) -> T {
        (**self).pdf(z)
    }
    fn pdf_derivative(&self, z: T, order: u32) -> Result<T> {
        (**self).pdf_derivative(z, order)
    }
    fn support(&self) -> (T, T) {
        (**self).support()
    }
    fn mean(&self) -> Option<T> {
        (**self).mean()
    }
    fn survival(&self, z: T) -> T {
        (**self).survival(z)
    }
    fn quantile(&self, t: T) -> Result<T> {
        (**self).quantile(t)
    }
    fn quantile_upper(&self, u: T) -> Result<T> {
        (**self).quantile_upper(u)
    }
    fn upper_tail_survival_integral(&self, a: T) -> Option<T> {
        (**self).upper_tail_survival_integral(a)
    }
}

/// Generalized quantile by bracket expansion and bisection/secant.
///
/// The bracket starts at `mean +- 1` and doubles, clipped to the support.
pub fn invert_cdf<T, D>(dist: &D, t: T) -> Result<T>
where
    T: Real,
    D: ContinuousDistribution<T> + ?Sized,
{
    if !(t > T::zero() && t < T::one()) {
        return Err(Error::domain(format!(
            "quantile requires probability in (0, 1), got {t}"
        )));
    }
    let (support_lo, support_hi) = dist.support();
    let center = dist.mean().unwrap_or_else(|| {
        if support_lo.is_finite() && support_hi.is_finite() {
            (support_lo + support_hi) / real(2.0)
        } else if support_lo.is_finite() {
            support_lo + T::one()
        } else if support_hi.is_finite() {
            support_hi - T::one()
        } else {
            T::zero()
        }
    });
    let f = |z: T| dist.cdf(z);
    let (lo, hi) = expand_bracket(
        &f,
        t,
        center - T::one(),
        center + T::one(),
        support_lo,
        support_hi,
    )?;
    invert_monotone(&f, t, lo, hi, default_inversion_tol())
}

/// Map raw RNG output to the open interval `(0, 1)`.
#[inline]
pub(crate) fn unit_open(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

/// Draw `n` observations by inverse-transform sampling, deterministic in
/// `seed`.
pub fn sample<T, D>(dist: &D, n: usize, seed: u64) -> Result<Vec<T>>
where
    T: Real,
    D: ContinuousDistribution<T> + ?Sized,
{
    if n == 0 {
        return Err(Error::domain("sample size must be at least 1"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u: T = real(unit_open(rng.next_u64()));
        out.push(dist.quantile(u)?);
    }
    Ok(out)
}

/// Normal law `N(mu, sigma^2)` with closed-form density derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalLaw<T> {
    mu: T,
    sigma: T,
}

impl<T: Real> NormalLaw<T> {
    pub fn new(mu: T, sigma: T) -> Result<Self> {
        if !(sigma > T::zero() && sigma.is_finite() && mu.is_finite()) {
            return Err(Error::domain(format!(
                "normal law requires finite mu and sigma > 0, got mu = {mu}, sigma = {sigma}"
            )));
        }
        Ok(NormalLaw { mu, sigma })
    }

    pub fn standard() -> Self {
        NormalLaw {
            mu: T::zero(),
            sigma: T::one(),
        }
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    #[inline]
    fn standardize(&self, z: T) -> T {
        (z - self.mu) / self.sigma
    }
}

impl<T: Real> ContinuousDistribution<T> for NormalLaw<T> {
    fn cdf(&self, z: T) -> T {
        standard_normal_cdf(self.standardize(z))
    }

    fn survival(&self, z: T) -> T {
        standard_normal_sf(self.standardize(z))
    }

    fn pdf(&self, z: T) -> T {
        standard_normal_pdf(self.standardize(z)) / self.sigma
    }

    fn pdf_derivative(&self, z: T, order: u32) -> Result<T> {
        if !(1..=4).contains(&order) {
            return Err(Error::domain(format!(
                "density derivative order must be in 1..=4, got {order}"
            )));
        }
        // Probabilists' Hermite recursion: He_{n+1}(x) = x He_n(x) - n He_{n-1}(x);
        // the n-th density derivative is (-1)^n He_n(x) f(z) / sigma^n.
        let x = self.standardize(z);
        let mut he_prev = T::one();
        let mut he = x;
        for n in 1..order {
            let next = x * he - real::<T>(n as f64) * he_prev;
            he_prev = he;
            he = next;
        }
        let sign = if order.is_multiple_of(2) { T::one() } else { -T::one() };
        Ok(sign * he * self.pdf(z) / self.sigma.powi(order as i32))
    }

    fn support(&self) -> (T, T) {
        (T::neg_infinity(), T::infinity())
    }

    fn mean(&self) -> Option<T> {
        Some(self.mu)
    }

    fn quantile(&self, t: T) -> Result<T> {
        Ok(self.mu + self.sigma * inverse_normal_cdf(t)?)
    }

    fn quantile_upper(&self, u: T) -> Result<T> {
        // Phi^{-1}(1 - u) = -Phi^{-1}(u), evaluated at u for tail accuracy.
        Ok(self.mu - self.sigma * inverse_normal_cdf(u)?)
    }

    fn upper_tail_survival_integral(&self, a: T) -> Option<T> {
        // E (X - a)^+ = sigma * (phi(u) - u * (1 - Phi(u))), u = (a - mu)/sigma.
        let u = self.standardize(a);
        Some(self.sigma * (standard_normal_pdf(u) - u * standard_normal_sf(u)))
    }
}

/// Chi-square law with `k` degrees of freedom.
///
/// The CDF is the regularized lower incomplete gamma `P(k/2, x/2)`; the
/// quantile has no closed form and is obtained by bracketed inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareLaw<T> {
    k: u32,
    half_k: T,
}

impl<T: Real> ChiSquareLaw<T> {
    pub fn new(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("chi-square requires at least 1 degree of freedom"));
        }
        Ok(ChiSquareLaw {
            k,
            half_k: real(k as f64 / 2.0),
        })
    }

    pub fn degrees_of_freedom(&self) -> u32 {
        self.k
    }
}

impl<T: Real> ContinuousDistribution<T> for ChiSquareLaw<T> {
    fn cdf(&self, z: T) -> T {
        if z <= T::zero() {
            return T::zero();
        }
        reg_lower_gamma(self.half_k, z / real(2.0)).unwrap_or(T::nan())
    }

    fn survival(&self, z: T) -> T {
        if z <= T::zero() {
            return T::one();
        }
        reg_upper_gamma(self.half_k, z / real(2.0)).unwrap_or(T::nan())
    }

    fn pdf(&self, z: T) -> T {
        let half = real::<T>(0.5);
        if z < T::zero() {
            return T::zero();
        }
        if z == T::zero() {
            return match self.k {
                1 => T::infinity(),
                2 => half,
                _ => T::zero(),
            };
        }
        let ln2 = real::<T>(std::f64::consts::LN_2);
        ((self.half_k - T::one()) * z.ln() - half * z - ln_gamma(self.half_k)
            - self.half_k * ln2)
            .exp()
    }

    fn pdf_derivative(&self, _z: T, _order: u32) -> Result<T> {
        Err(Error::domain(
            "chi-square does not expose closed-form density derivatives",
        ))
    }

    fn support(&self) -> (T, T) {
        (T::zero(), T::infinity())
    }

    fn mean(&self) -> Option<T> {
        Some(real(self.k as f64))
    }

    fn upper_tail_survival_integral(&self, a: T) -> Option<T> {
        // E X 1{X > a} = k Q(k/2 + 1, a/2), so E (X - a)^+ follows directly.
        let k = real::<T>(self.k as f64);
        if a <= T::zero() {
            return Some(k - a);
        }
        let half_a = a / real(2.0);
        let tail_mean = k * reg_upper_gamma(self.half_k + T::one(), half_a).ok()?;
        let surv = reg_upper_gamma(self.half_k, half_a).ok()?;
        Some(tail_mean - a * surv)
    }
}

/// Uniform law on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformLaw<T> {
    lo: T,
    hi: T,
}

impl<T: Real> UniformLaw<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::domain(format!(
                "uniform law requires finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(UniformLaw { lo, hi })
    }
}

impl<T: Real> ContinuousDistribution<T> for UniformLaw<T> {
    fn cdf(&self, z: T) -> T {
        if z <= self.lo {
            T::zero()
        } else if z >= self.hi {
            T::one()
        } else {
            (z - self.lo) / (self.hi - self.lo)
        }
    }

    fn pdf(&self, z: T) -> T {
        if z >= self.lo && z <= self.hi {
            (self.hi - self.lo).recip()
        } else {
            T::zero()
        }
    }

    fn pdf_derivative(&self, _z: T, _order: u32) -> Result<T> {
        Err(Error::domain(
            "uniform density is not differentiable at its endpoints",
        ))
    }

    fn support(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    fn mean(&self) -> Option<T> {
        Some((self.lo + self.hi) / real(2.0))
    }

    fn quantile(&self, t: T) -> Result<T> {
        if !(t > T::zero() && t < T::one()) {
            return Err(Error::domain(format!(
                "quantile requires probability in (0, 1), got {t}"
            )));
        }
        Ok(self.lo + t * (self.hi - self.lo))
    }

    fn quantile_upper(&self, u: T) -> Result<T> {
        if !(u > T::zero() && u < T::one()) {
            return Err(Error::domain(format!(
                "upper quantile requires tail mass in (0, 1), got {u}"
            )));
        }
        Ok(self.hi - u * (self.hi - self.lo))
    }

    fn upper_tail_survival_integral(&self, a: T) -> Option<T> {
        let two = real::<T>(2.0);
        if a <= self.lo {
            return Some((self.lo + self.hi) / two - a);
        }
        if a >= self.hi {
            return Some(T::zero());
        }
        Some((self.hi - a) * (self.hi - a) / (two * (self.hi - self.lo)))
    }
}

/// The law of `scale * X + shift` for `scale > 0`.
#[derive(Debug, Clone, Copy)]
pub struct AffineTransformed<T, D> {
    inner: D,
    scale: T,
    shift: T,
}

impl<T: Real, D: ContinuousDistribution<T>> AffineTransformed<T, D> {
    pub fn new(inner: D, scale: T, shift: T) -> Result<Self> {
        if !(scale > T::zero() && scale.is_finite() && shift.is_finite()) {
            return Err(Error::domain(format!(
                "affine transform requires finite shift and scale > 0, got scale = {scale}, shift = {shift}"
            )));
        }
        Ok(AffineTransformed { inner, scale, shift })
    }

    #[inline]
    fn pullback(&self, z: T) -> T {
        (z - self.shift) / self.scale
    }
}

impl<T: Real, D: ContinuousDistribution<T>> ContinuousDistribution<T> for AffineTransformed<T, D> {
    fn cdf(&self, z: T) -> T {
        self.inner.cdf(self.pullback(z))
    }

    fn survival(&self, z: T) -> T {
        self.inner.survival(self.pullback(z))
    }

    fn pdf(&self, z: T) -> T {
        self.inner.pdf(self.pullback(z)) / self.scale
    }

    fn pdf_derivative(&self, z: T, order: u32) -> Result<T> {
        let inner = self.inner.pdf_derivative(self.pullback(z), order)?;
        Ok(inner / self.scale.powi(order as i32 + 1))
    }

    fn support(&self) -> (T, T) {
        let (lo, hi) = self.inner.support();
        (self.scale * lo + self.shift, self.scale * hi + self.shift)
    }

    fn mean(&self) -> Option<T> {
        self.inner.mean().map(|m| self.scale * m + self.shift)
    }

    fn quantile(&self, t: T) -> Result<T> {
        Ok(self.scale * self.inner.quantile(t)? + self.shift)
    }

    fn quantile_upper(&self, u: T) -> Result<T> {
        Ok(self.scale * self.inner.quantile_upper(u)? + self.shift)
    }

    fn upper_tail_survival_integral(&self, a: T) -> Option<T> {
        self.inner
            .upper_tail_survival_integral(self.pullback(a))
            .map(|v| self.scale * v)
    }
}
