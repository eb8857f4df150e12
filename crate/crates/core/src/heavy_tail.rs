//! Pareto-tail contamination of a base loss law.
//!
//! [`SplicedPareto`] replaces the base law beyond its `alpha`-quantile `tau`
//! with a Pareto tail of index `gamma`; [`HuberMixture`] blends the base and
//! the spliced law with weight `epsilon`. Both carry a closed-form expected
//! shortfall and an independent integral route, and reports flag the two
//! routes whenever they disagree beyond tolerance: for the spliced law the
//! closed form `cvar(base) + tau / (1 - gamma)` and the direct quantile
//! integral `tau * gamma / (gamma - 1)` genuinely differ, and both values
//! are legitimate outputs of their respective derivations, so the engine
//! reports rather than reconciles them.
//!
//! `gamma = +inf` is accepted and treated as the analytic limit (the tail
//! contribution collapses onto `tau`), not as a large-number hack.

use crate::choquet::cvar_quantile_integral;
use crate::distributions::ContinuousDistribution;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breakpoints, QuadratureConfig};
use crate::report::RiskReport;
use crate::scalar::{real, Real};

/// Base law spliced with a Pareto right tail at its `alpha`-quantile.
#[derive(Debug, Clone)]
pub struct SplicedPareto<T, F0> {
    base: F0,
    alpha: T,
    gamma: T,
    tau: T,
    /// Lower endpoint of the raw Pareto tail CDF, `(1 - alpha)^{1/gamma} * tau`.
    tail_start: T,
}

impl<T, F0> SplicedPareto<T, F0>
where
    T: Real,
    F0: ContinuousDistribution<T>,
{
    pub fn new(base: F0, alpha: T, gamma: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(Error::domain(format!(
                "splice level alpha must be in (0, 1), got {alpha}"
            )));
        }
        if !(gamma > T::one()) {
            return Err(Error::domain(format!(
                "pareto index must exceed 1 for an integrable tail, got {gamma}"
            )));
        }
        let tau = base.quantile(alpha)?;
        if !(tau > T::zero()) {
            return Err(Error::domain(format!(
                "splice point F0^-1(alpha) must be positive, got {tau}; \
                 raise alpha above F0(0)"
            )));
        }
        let tail_start = (T::one() - alpha).powf(gamma.recip()) * tau;
        Ok(SplicedPareto {
            base,
            alpha,
            gamma,
            tau,
            tail_start,
        })
    }

    pub fn base(&self) -> &F0 {
        &self.base
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// Splice point `tau = F0^-1(alpha)`.
    pub fn tau(&self) -> T {
        self.tau
    }

    /// Where the raw Pareto tail CDF leaves zero.
    pub fn tail_start(&self) -> T {
        self.tail_start
    }

    /// The raw Pareto tail CDF: `0` up to the tail start, then
    /// `1 - (1 - alpha) (tau / x)^gamma`. It passes through `alpha` at `tau`.
    pub fn pareto_tail_cdf(&self, x: T) -> T {
        if x <= self.tail_start {
            return T::zero();
        }
        T::one() - (T::one() - self.alpha) * self.tail_ratio(x)
    }

    /// `(tau / x)^gamma`, with the infinite-index limit collapsing to 0 for
    /// `x > tau`.
    fn tail_ratio(&self, x: T) -> T {
        if self.gamma.is_infinite() {
            if x > self.tau {
                T::zero()
            } else {
                T::one()
            }
        } else {
            (self.tau / x).powf(self.gamma)
        }
    }

    /// `gamma / (gamma - 1)`, or 1 in the infinite-index limit.
    fn tail_mean_factor(&self) -> T {
        if self.gamma.is_infinite() {
            T::one()
        } else {
            self.gamma / (self.gamma - T::one())
        }
    }

    /// Closed-form expected shortfall at the splice level:
    /// `cvar(base, alpha) + tau / (1 - gamma)`, increasing in `gamma`.
    pub fn cvar_closed_form(&self, cfg: &QuadratureConfig<T>) -> Result<RiskReport<T>> {
        let base_cvar = cvar_quantile_integral(&self.base, self.alpha, cfg)?;
        let correction = if self.gamma.is_infinite() {
            T::zero()
        } else {
            self.tau / (T::one() - self.gamma)
        };
        let value = base_cvar.value + correction;
        Ok(RiskReport::new(
            value,
            "spliced_cvar/closed_form",
            self.alpha,
            format!("gamma={}, tau={}", self.gamma, self.tau),
            base_cvar.tolerance_used,
        ))
    }

    /// Independent route: integrate the spliced quantile function over the
    /// tail. Equals `tau * gamma / (gamma - 1)` analytically.
    pub fn cvar_by_quantile_integral(&self, cfg: &QuadratureConfig<T>) -> Result<RiskReport<T>> {
        let mut r = cvar_quantile_integral(self, self.alpha, cfg)?;
        r.method = "spliced_cvar/quantile_integral";
        r.inputs = format!("gamma={}, tau={}", self.gamma, self.tau);
        Ok(r)
    }

    /// Both CVaR routes side by side, flagged when they disagree beyond 10x
    /// the combined quadrature tolerances.
    pub fn cvar_dual(&self, cfg: &QuadratureConfig<T>) -> Result<DualCvarReport<T>> {
        let closed_form = self.cvar_closed_form(cfg)?;
        let integral = self.cvar_by_quantile_integral(cfg)?;
        Ok(DualCvarReport::compare(closed_form, integral))
    }
}

/// Two routes to the same (or, for the spliced law, deliberately not the
/// same) risk number.
#[derive(Debug, Clone)]
pub struct DualCvarReport<T> {
    pub closed_form: RiskReport<T>,
    pub integral: RiskReport<T>,
    pub divergence: T,
    /// Set when the two routes disagree beyond 10x combined tolerances.
    pub flagged: bool,
}

impl<T: Real> DualCvarReport<T> {
    fn compare(closed_form: RiskReport<T>, integral: RiskReport<T>) -> Self {
        let divergence = (closed_form.value - integral.value).abs();
        let tol = real::<T>(10.0) * (closed_form.tolerance_used + integral.tolerance_used);
        DualCvarReport {
            flagged: divergence > tol,
            divergence,
            closed_form,
            integral,
        }
    }
}

impl<T, F0> ContinuousDistribution<T> for SplicedPareto<T, F0>
where
    T: Real,
    F0: ContinuousDistribution<T>,
{
    fn cdf(&self, x: T) -> T {
        if x <= self.tau {
            self.base.cdf(x)
        } else {
            self.pareto_tail_cdf(x)
        }
    }

    fn survival(&self, x: T) -> T {
        if x <= self.tau {
            self.base.survival(x)
        } else {
            (T::one() - self.alpha) * self.tail_ratio(x)
        }
    }

    fn pdf(&self, x: T) -> T {
        if x <= self.tau {
            self.base.pdf(x)
        } else if self.gamma.is_infinite() {
            T::zero()
        } else {
            self.gamma * (T::one() - self.alpha) * self.tail_ratio(x) / x
        }
    }

    fn pdf_derivative(&self, _z: T, _order: u32) -> Result<T> {
        Err(Error::domain(
            "spliced law has a density jump at the splice point; no derivatives",
        ))
    }

    fn support(&self) -> (T, T) {
        let (lo, _) = self.base.support();
        if self.gamma.is_infinite() {
            (lo, self.tau)
        } else {
            (lo, T::infinity())
        }
    }

    fn mean(&self) -> Option<T> {
        None
    }

    fn quantile(&self, t: T) -> Result<T> {
        if !(t > T::zero() && t < T::one()) {
            return Err(Error::domain(format!(
                "quantile requires probability in (0, 1), got {t}"
            )));
        }
        if t <= self.alpha {
            self.base.quantile(t)
        } else {
            self.quantile_upper(T::one() - t)
        }
    }

    fn quantile_upper(&self, u: T) -> Result<T> {
        if !(u > T::zero() && u < T::one()) {
            return Err(Error::domain(format!(
                "upper quantile requires tail mass in (0, 1), got {u}"
            )));
        }
        let spread = T::one() - self.alpha;
        if u >= spread {
            self.base.quantile_upper(u)
        } else if self.gamma.is_infinite() {
            Ok(self.tau)
        } else {
            Ok(self.tau * (spread / u).powf(self.gamma.recip()))
        }
    }

    fn upper_tail_survival_integral(&self, a: T) -> Option<T> {
        let spread = T::one() - self.alpha;
        let tail_from = |x: T| {
            if self.gamma.is_infinite() {
                T::zero()
            } else {
                spread * self.tau.powf(self.gamma) * x.powf(T::one() - self.gamma)
                    / (self.gamma - T::one())
            }
        };
        if a >= self.tau {
            Some(tail_from(a))
        } else {
            let base_part =
                self.base.upper_tail_survival_integral(a)? - self.base.upper_tail_survival_integral(self.tau)?;
            Some(base_part + tail_from(self.tau))
        }
    }
}

/// Convex mixture of the base law and its Pareto-spliced version with
/// contamination weight `epsilon`.
#[derive(Debug, Clone)]
pub struct HuberMixture<T, F0> {
    spliced: SplicedPareto<T, F0>,
    epsilon: T,
}

impl<T, F0> HuberMixture<T, F0>
where
    T: Real,
    F0: ContinuousDistribution<T>,
{
    /// `epsilon = 1` is accepted as the degenerate probe that collapses the
    /// mixture onto the spliced law.
    pub fn new(spliced: SplicedPareto<T, F0>, epsilon: T) -> Result<Self> {
        if !(epsilon >= T::zero() && epsilon <= T::one()) {
            return Err(Error::domain(format!(
                "contamination weight must be in [0, 1], got {epsilon}"
            )));
        }
        Ok(HuberMixture { spliced, epsilon })
    }

    pub fn spliced(&self) -> &SplicedPareto<T, F0> {
        &self.spliced
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn alpha(&self) -> T {
        self.spliced.alpha
    }

    pub fn tau(&self) -> T {
        self.spliced.tau
    }

    fn base(&self) -> &F0 {
        &self.spliced.base
    }

    /// The survival function distorted at level `alpha`: 1 up to the splice
    /// point, then
    /// `(1 - eps)(1 - F0(x))/(1 - alpha) + eps (tau/x)^gamma`.
    pub fn distorted_survival(&self, x: T) -> T {
        if x <= self.spliced.tau {
            return T::one();
        }
        let spread = T::one() - self.spliced.alpha;
        (T::one() - self.epsilon) * self.base().survival(x) / spread
            + self.epsilon * self.spliced.tail_ratio(x)
    }

    /// Closed-form expected shortfall:
    /// `(1 - eps) cvar(base, alpha) + eps tau gamma / (gamma - 1)`.
    pub fn cvar_closed_form(&self, cfg: &QuadratureConfig<T>) -> Result<RiskReport<T>> {
        let base_cvar = cvar_quantile_integral(self.base(), self.spliced.alpha, cfg)?;
        let value = (T::one() - self.epsilon) * base_cvar.value
            + self.epsilon * self.spliced.tail_mean_factor() * self.spliced.tau;
        Ok(RiskReport::new(
            value,
            "mixture_cvar/closed_form",
            self.spliced.alpha,
            format!(
                "epsilon={}, gamma={}, tau={}",
                self.epsilon, self.spliced.gamma, self.spliced.tau
            ),
            base_cvar.tolerance_used,
        ))
    }

    /// Independent route: the distorted-survival (Choquet) integral
    /// `tau + int_tau^inf w(x) dx`, with the Pareto part of the truncated
    /// tail added back in closed form.
    pub fn cvar_by_choquet_integral(&self, cfg: &QuadratureConfig<T>) -> Result<RiskReport<T>> {
        cfg.validate()?;
        let tau = self.spliced.tau;
        let gamma = self.spliced.gamma;
        let ttp = cfg.tail_truncation_probability;
        let two = real::<T>(2.0);

        let base_cut = self.base().quantile_upper(ttp)?;
        let z_hi = base_cut.max(tau * two);
        let q = integrate_with_breakpoints(|x| self.distorted_survival(x), tau, z_hi, &[], cfg)?;

        let mut value = tau + q.value;
        if !gamma.is_infinite() {
            // Analytic Pareto remainder beyond the truncation point.
            value += self.epsilon * tau.powf(gamma) * z_hi.powf(T::one() - gamma)
                / (gamma - T::one());
        }
        if let Some(base_tail) = self.base().upper_tail_survival_integral(z_hi) {
            value += (T::one() - self.epsilon) * base_tail / (T::one() - self.spliced.alpha);
        }

        Ok(RiskReport::new(
            value,
            "mixture_cvar/choquet_integral",
            self.spliced.alpha,
            format!(
                "epsilon={}, gamma={}, tau={}",
                self.epsilon, self.spliced.gamma, tau
            ),
            cfg.tolerance_for(value),
        ))
    }

    /// Both CVaR routes side by side; these are expected to agree.
    pub fn cvar_dual(&self, cfg: &QuadratureConfig<T>) -> Result<DualCvarReport<T>> {
        let closed_form = self.cvar_closed_form(cfg)?;
        let integral = self.cvar_by_choquet_integral(cfg)?;
        Ok(DualCvarReport::compare(closed_form, integral))
    }
}

impl<T, F0> ContinuousDistribution<T> for HuberMixture<T, F0>
where
    T: Real,
    F0: ContinuousDistribution<T>,
{
    fn cdf(&self, x: T) -> T {
        if x <= self.spliced.tau {
            self.base().cdf(x)
        } else {
            (T::one() - self.epsilon) * self.base().cdf(x) + self.epsilon * self.spliced.cdf(x)
        }
    }

    fn survival(&self, x: T) -> T {
        if x <= self.spliced.tau {
            self.base().survival(x)
        } else {
            (T::one() - self.epsilon) * self.base().survival(x)
                + self.epsilon * self.spliced.survival(x)
        }
    }

    fn pdf(&self, x: T) -> T {
        if x <= self.spliced.tau {
            self.base().pdf(x)
        } else {
            (T::one() - self.epsilon) * self.base().pdf(x) + self.epsilon * self.spliced.pdf(x)
        }
    }

    fn pdf_derivative(&self, _z: T, _order: u32) -> Result<T> {
        Err(Error::domain(
            "mixture has a density jump at the splice point; no derivatives",
        ))
    }

    fn support(&self) -> (T, T) {
        let (lo, _) = self.base().support();
        if self.spliced.gamma.is_infinite() && self.epsilon == T::one() {
            (lo, self.spliced.tau)
        } else {
            (lo, T::infinity())
        }
    }

    fn mean(&self) -> Option<T> {
        None
    }

    fn quantile(&self, t: T) -> Result<T> {
        if !(t > T::zero() && t < T::one()) {
            return Err(Error::domain(format!(
                "quantile requires probability in (0, 1), got {t}"
            )));
        }
        if t <= self.spliced.alpha {
            self.base().quantile(t)
        } else {
            self.quantile_upper(T::one() - t)
        }
    }

    fn quantile_upper(&self, u: T) -> Result<T> {
        use crate::roots::{default_inversion_tol, expand_bracket, invert_monotone};
        if !(u > T::zero() && u < T::one()) {
            return Err(Error::domain(format!(
                "upper quantile requires tail mass in (0, 1), got {u}"
            )));
        }
        let spread = T::one() - self.spliced.alpha;
        if u >= spread {
            return self.base().quantile_upper(u);
        }
        // Invert the strictly decreasing mixture survival beyond tau.
        let tau = self.spliced.tau;
        let g = |x: T| -self.survival(x);
        let hi_seed = self
            .spliced
            .quantile_upper(u)
            .unwrap_or(tau + tau)
            .max(tau + tau);
        let (lo, hi) = expand_bracket(&g, -u, tau, hi_seed, tau, T::infinity())?;
        invert_monotone(&g, -u, lo, hi, default_inversion_tol())
    }

    fn upper_tail_survival_integral(&self, a: T) -> Option<T> {
        let base_part = self.base().upper_tail_survival_integral(a)?;
        let spliced_part = self.spliced.upper_tail_survival_integral(a)?;
        if a >= self.spliced.tau {
            Some((T::one() - self.epsilon) * base_part + self.epsilon * spliced_part)
        } else {
            // Below tau both branches coincide with the base law.
            let base_above_tau = self.base().upper_tail_survival_integral(self.spliced.tau)?;
            let spliced_above_tau = self.spliced.upper_tail_survival_integral(self.spliced.tau)?;
            Some(
                base_part - base_above_tau
                    + (T::one() - self.epsilon) * base_above_tau
                    + self.epsilon * spliced_above_tau,
            )
        }
    }
}

/// The five-by-three spliced-tail table: rows are splice levels, columns are
/// Pareto indices, with the base quantile and base CVaR as auxiliary columns.
#[derive(Debug, Clone)]
pub struct SplicedCvarRow<T> {
    pub alpha: T,
    pub base_quantile: T,
    pub base_cvar: T,
    pub cells: Vec<(T, T)>,
}

/// Closed-form spliced CVaR over a grid of levels and tail indices.
pub fn spliced_cvar_table<T, F0, M>(
    make_base: M,
    alphas: &[T],
    gammas: &[T],
    cfg: &QuadratureConfig<T>,
) -> Result<Vec<SplicedCvarRow<T>>>
where
    T: Real,
    F0: ContinuousDistribution<T>,
    M: Fn() -> F0,
{
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let base = make_base();
        let base_quantile = base.quantile(alpha)?;
        let base_cvar = cvar_quantile_integral(&base, alpha, cfg)?.value;
        let mut cells = Vec::with_capacity(gammas.len());
        for &gamma in gammas {
            let model = SplicedPareto::new(make_base(), alpha, gamma)?;
            cells.push((gamma, model.cvar_closed_form(cfg)?.value));
        }
        rows.push(SplicedCvarRow {
            alpha,
            base_quantile,
            base_cvar,
            cells,
        });
    }
    Ok(rows)
}

/// One row of the mixture table: contamination weight, then one closed-form
/// CVaR per Pareto index.
#[derive(Debug, Clone)]
pub struct MixtureCvarRow<T> {
    pub epsilon: T,
    pub cells: Vec<(T, T)>,
}

/// Closed-form mixture CVaR over a grid of contamination weights and tail
/// indices at a fixed level.
pub fn mixture_cvar_table<T, F0, M>(
    make_base: M,
    alpha: T,
    epsilons: &[T],
    gammas: &[T],
    cfg: &QuadratureConfig<T>,
) -> Result<Vec<MixtureCvarRow<T>>>
where
    T: Real,
    F0: ContinuousDistribution<T>,
    M: Fn() -> F0,
{
    let mut rows = Vec::with_capacity(epsilons.len());
    for &epsilon in epsilons {
        let mut cells = Vec::with_capacity(gammas.len());
        for &gamma in gammas {
            let model = HuberMixture::new(SplicedPareto::new(make_base(), alpha, gamma)?, epsilon)?;
            cells.push((gamma, model.cvar_closed_form(cfg)?.value));
        }
        rows.push(MixtureCvarRow { epsilon, cells });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::ChiSquareLaw;

    fn chi2() -> ChiSquareLaw<f64> {
        ChiSquareLaw::new(1).unwrap()
    }

    fn cfg() -> QuadratureConfig<f64> {
        QuadratureConfig::default()
    }

    #[test]
    fn tail_cdf_branch_values() {
        let m = SplicedPareto::new(chi2(), 0.9, 2.0).unwrap();
        let tau = m.tau();
        assert!((tau - 2.705543454095404).abs() < 1e-9);
        assert_eq!(m.pareto_tail_cdf(m.tail_start()), 0.0);
        assert!((m.pareto_tail_cdf(tau) - 0.9).abs() < 1e-12);
        assert!((m.pareto_tail_cdf(2.0 * tau) - 0.975).abs() < 1e-12);
    }

    #[test]
    fn spliced_cdf_continuous_at_the_splice() {
        let m = SplicedPareto::new(chi2(), 0.9, 2.0).unwrap();
        let tau = m.tau();
        let below = m.cdf(tau);
        let above = m.cdf(tau + 1e-12);
        assert!((below - 0.9).abs() < 1e-9);
        assert!((above - below).abs() < 1e-9);
    }

    #[test]
    fn spliced_quantile_inverts_the_splice() {
        let m = SplicedPareto::new(chi2(), 0.9, 2.0).unwrap();
        let tau = m.tau();
        assert!((m.quantile(0.9).unwrap() - tau).abs() < 1e-9);
        // Inverse of the 0.975 tail example: 2 tau.
        let q = m.quantile(0.975).unwrap();
        assert!((q - 2.0 * tau).abs() < 1e-9, "q = {q}, 2tau = {}", 2.0 * tau);
        assert!((q - 5.411086908).abs() < 1e-6);
    }

    #[test]
    fn spliced_cdf_is_valid_on_a_grid() {
        let m = SplicedPareto::new(chi2(), 0.9, 2.0).unwrap();
        let mut prev = -1.0;
        for i in 0..=2000 {
            let x = i as f64 * 0.02;
            let c = m.cdf(x);
            assert!((0.0..=1.0).contains(&c), "cdf({x}) = {c}");
            assert!(c >= prev - 1e-14, "cdf decreasing at {x}");
            prev = c;
        }
        assert!(m.cdf(0.0) < 1e-12);
        assert!(m.cdf(1e6) > 1.0 - 1e-9);
    }

    #[test]
    fn closed_form_reproduces_tabulated_cells() {
        let cfg = cfg();
        // Spot cells of the spliced table; the alpha = 0.9 row is exact.
        let m = SplicedPareto::new(chi2(), 0.9, 2.0).unwrap();
        let v = m.cvar_closed_form(&cfg).unwrap().value;
        assert!((v - 1.68).abs() < 0.01, "v = {v}");

        let m = SplicedPareto::new(chi2(), 0.9, 3.0).unwrap();
        let v = m.cvar_closed_form(&cfg).unwrap().value;
        assert!((v - 3.04).abs() < 0.01, "v = {v}");
    }

    #[test]
    fn infinite_gamma_recovers_base_cvar() {
        let cfg = cfg();
        let m = SplicedPareto::new(chi2(), 0.9, f64::INFINITY).unwrap();
        let v = m.cvar_closed_form(&cfg).unwrap().value;
        let base = cvar_quantile_integral(&chi2(), 0.9, &cfg).unwrap().value;
        assert!((v - base).abs() < 1e-12);
        // A large finite index approaches the same limit.
        let m = SplicedPareto::new(chi2(), 0.9, 1e6).unwrap();
        let v6 = m.cvar_closed_form(&cfg).unwrap().value;
        assert!((v6 - base).abs() < 1e-4, "v = {v6}, base = {base}");
    }

    #[test]
    fn closed_form_is_increasing_in_gamma() {
        let cfg = cfg();
        let mut prev = f64::NEG_INFINITY;
        for gamma in [1.5, 2.0, 3.0, 5.0, 50.0] {
            let v = SplicedPareto::new(chi2(), 0.9, gamma)
                .unwrap()
                .cvar_closed_form(&cfg)
                .unwrap()
                .value;
            assert!(v > prev, "gamma = {gamma}: {v} <= {prev}");
            prev = v;
        }
    }

    #[test]
    fn quantile_integral_gives_tail_mean_and_diverges_from_closed_form() {
        let cfg = cfg();
        let m = SplicedPareto::new(chi2(), 0.9, 2.0).unwrap();
        let dual = m.cvar_dual(&cfg).unwrap();
        let expected = 2.0 * m.tau();
        assert!(
            (dual.integral.value - expected).abs() < 1e-6,
            "integral = {}, tau gamma/(gamma-1) = {expected}",
            dual.integral.value
        );
        // The two derivations genuinely disagree and the report says so.
        assert!(dual.flagged);
        assert!((dual.integral.value - 5.411).abs() < 0.01);
        assert!((dual.closed_form.value - 1.687).abs() < 0.01);
    }

    #[test]
    fn quantile_integral_limit_at_large_gamma() {
        let cfg = cfg();
        let m = SplicedPareto::new(chi2(), 0.9, 1e6).unwrap();
        let v = m.cvar_by_quantile_integral(&cfg).unwrap().value;
        assert!((v - m.tau()).abs() < 1e-4, "v = {v}, tau = {}", m.tau());
    }

    #[test]
    fn gamma_at_or_below_one_is_rejected() {
        assert!(SplicedPareto::new(chi2(), 0.9, 1.0).is_err());
        assert!(SplicedPareto::new(chi2(), 0.9, 0.5).is_err());
    }

    #[test]
    fn nonpositive_splice_point_is_rejected() {
        use crate::distributions::NormalLaw;
        // The 0.4-quantile of a standard normal is negative.
        assert!(SplicedPareto::new(NormalLaw::<f64>::standard(), 0.4, 2.0).is_err());
    }

    #[test]
    fn mixture_cdf_equals_convex_combination() {
        let spliced = SplicedPareto::new(chi2(), 0.96, 2.0).unwrap();
        let reference = SplicedPareto::new(chi2(), 0.96, 2.0).unwrap();
        let m = HuberMixture::new(spliced, 0.1).unwrap();
        let base = chi2();
        for i in 0..=400 {
            let x = i as f64 * 0.05;
            let expect = 0.9 * base.cdf(x) + 0.1 * reference.cdf(x);
            assert!(
                (m.cdf(x) - expect).abs() < 1e-14,
                "x = {x}: {} vs {expect}",
                m.cdf(x)
            );
        }
    }

    #[test]
    fn mixture_cdf_is_base_below_tau_and_continuous() {
        let spliced = SplicedPareto::new(chi2(), 0.96, 2.0).unwrap();
        let tau = spliced.tau();
        let m = HuberMixture::new(spliced, 0.3).unwrap();
        let base = chi2();
        for x in [0.0, 0.5, tau / 2.0, tau] {
            assert_eq!(m.cdf(x), base.cdf(x));
        }
        assert!((m.cdf(tau + 1e-10) - m.cdf(tau)).abs() < 1e-8);
    }

    #[test]
    fn epsilon_zero_is_the_base_law() {
        let spliced = SplicedPareto::new(chi2(), 0.96, 2.0).unwrap();
        let m = HuberMixture::new(spliced, 0.0).unwrap();
        let base = chi2();
        for x in [0.1, 1.0, 5.0, 10.0, 20.0] {
            assert!((m.cdf(x) - base.cdf(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn distorted_survival_branches() {
        let spliced = SplicedPareto::new(chi2(), 0.96, 2.0).unwrap();
        let tau = spliced.tau();
        let m = HuberMixture::new(spliced, 0.1).unwrap();
        assert_eq!(m.distorted_survival(tau - 0.5), 1.0);
        assert_eq!(m.distorted_survival(tau), 1.0);
        // Continuity from the right at the splice.
        assert!((m.distorted_survival(tau + 1e-9) - 1.0).abs() < 1e-6);
        // Vanishes far out.
        assert!(m.distorted_survival(1e9) < 1e-9);
        // Direct formula check at 2 tau.
        let expect = 0.9 * chi2().survival(2.0 * tau) / 0.04 + 0.1 * 0.25;
        assert!((m.distorted_survival(2.0 * tau) - expect).abs() < 1e-14);
    }

    #[test]
    fn mixture_closed_form_reproduces_tabulated_cells() {
        let cfg = cfg();
        let m = HuberMixture::new(SplicedPareto::new(chi2(), 0.96, 1.5).unwrap(), 0.1).unwrap();
        let v = m.cvar_closed_form(&cfg).unwrap().value;
        assert!((v - 6.65).abs() < 0.01, "v = {v}");

        let m = HuberMixture::new(SplicedPareto::new(chi2(), 0.96, 2.0).unwrap(), 0.0).unwrap();
        let v = m.cvar_closed_form(&cfg).unwrap().value;
        assert!((v - 5.98).abs() < 0.01, "v = {v}");

        let m =
            HuberMixture::new(SplicedPareto::new(chi2(), 0.96, f64::INFINITY).unwrap(), 0.3).unwrap();
        let v = m.cvar_closed_form(&cfg).unwrap().value;
        assert!((v - 5.45).abs() < 0.01, "v = {v}");
    }

    #[test]
    fn choquet_route_agrees_with_closed_form() {
        let cfg = cfg();
        for (eps, gamma) in [(0.1, 1.5), (0.0, 2.0), (0.3, 5.0), (0.2, f64::INFINITY)] {
            let m =
                HuberMixture::new(SplicedPareto::new(chi2(), 0.96, gamma).unwrap(), eps).unwrap();
            let dual = m.cvar_dual(&cfg).unwrap();
            assert!(
                !dual.flagged,
                "eps = {eps}, gamma = {gamma}: {} vs {} (divergence {:e})",
                dual.closed_form.value, dual.integral.value, dual.divergence
            );
        }
    }

    #[test]
    fn degenerate_full_contamination_links_the_two_models() {
        let cfg = cfg();
        let gamma = 1.5;
        let spliced = SplicedPareto::new(chi2(), 0.96, gamma).unwrap();
        let tau = spliced.tau();
        let expected = tau * gamma / (gamma - 1.0);
        assert!((expected - 12.653653763764185).abs() < 1e-6);
        let m = HuberMixture::new(spliced, 1.0).unwrap();
        let v = m.cvar_by_choquet_integral(&cfg).unwrap().value;
        assert!((v - expected).abs() < 1e-6, "v = {v}, expected = {expected}");
        let direct = SplicedPareto::new(chi2(), 0.96, gamma)
            .unwrap()
            .cvar_by_quantile_integral(&cfg)
            .unwrap()
            .value;
        assert!((v - direct).abs() < 1e-5, "choquet {v} vs quantile {direct}");
    }

    #[test]
    fn mixture_cvar_monotone_in_epsilon_by_tail_weight() {
        let cfg = cfg();
        // Heavy tail (gamma = 1.5): increasing in epsilon. Infinite gamma:
        // decreasing.
        let mut prev = f64::NEG_INFINITY;
        for eps in [0.0, 0.01, 0.1, 0.2, 0.3] {
            let v = HuberMixture::new(SplicedPareto::new(chi2(), 0.96, 1.5).unwrap(), eps)
                .unwrap()
                .cvar_closed_form(&cfg)
                .unwrap()
                .value;
            assert!(v >= prev, "eps = {eps}");
            prev = v;
        }
        let mut prev = f64::INFINITY;
        for eps in [0.01, 0.1, 0.2, 0.3] {
            let v =
                HuberMixture::new(SplicedPareto::new(chi2(), 0.96, f64::INFINITY).unwrap(), eps)
                    .unwrap()
                    .cvar_closed_form(&cfg)
                    .unwrap()
                    .value;
            assert!(v <= prev, "eps = {eps}");
            prev = v;
        }
    }

    #[test]
    fn mixture_quantile_roundtrip() {
        let m = HuberMixture::new(SplicedPareto::new(chi2(), 0.96, 2.0).unwrap(), 0.1).unwrap();
        for t in [0.5, 0.9, 0.96, 0.97, 0.99, 0.999] {
            let q = m.quantile(t).unwrap();
            assert!((m.cdf(q) - t).abs() < 1e-9, "roundtrip at {t}: q = {q}");
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            // The direct quantile integral of the spliced law is the Pareto
            // tail mean tau gamma / (gamma - 1), whatever the splice level.
            #[test]
            fn spliced_quantile_integral_is_tail_mean(
                alpha in 0.5f64..0.99,
                gamma in 1.2f64..8.0,
            ) {
                let m = SplicedPareto::new(chi2(), alpha, gamma).unwrap();
                let v = m.cvar_by_quantile_integral(&cfg()).unwrap().value;
                let expected = m.tau() * gamma / (gamma - 1.0);
                prop_assert!(
                    (v - expected).abs() <= 1e-6 * expected,
                    "{} vs {}", v, expected
                );
            }

            // Closed form and Choquet route agree across the parameter box.
            #[test]
            fn mixture_routes_agree(
                eps in 0.0f64..0.5,
                gamma in 1.2f64..6.0,
            ) {
                let m = HuberMixture::new(
                    SplicedPareto::new(chi2(), 0.96, gamma).unwrap(),
                    eps,
                ).unwrap();
                let dual = m.cvar_dual(&cfg()).unwrap();
                prop_assert!(!dual.flagged, "divergence {:e}", dual.divergence);
            }
        }
    }
}
