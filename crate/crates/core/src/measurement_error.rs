//! Worst-case expected shortfall under additive measurement error.
//!
//! A smooth base density `f0` contaminated by an independent error of scale
//! `sqrt(delta)` and kurtosis `kappa` has, to second order, the distribution
//! function `F0(z) + (delta/2) f0'(z) + kappa (delta^2/24) f0'''(z)`. The
//! family over a `(delta, kappa)` box yields a worst-case CVaR upper bound
//! (supremum over members) and a capacity envelope (pointwise CDF supremum)
//! whose CVaR lower-bounds every member's.

use crate::choquet::cvar_quantile_integral;
use crate::distributions::{ContinuousDistribution, NormalLaw};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureConfig;
use crate::report::RiskReport;
use crate::roots::{default_inversion_tol, expand_bracket, invert_monotone};
use crate::scalar::{real, Real};
use crate::special::{standard_normal_cdf, standard_normal_pdf};

fn linspace<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    if n <= 1 || a == b {
        return vec![a];
    }
    let step = (b - a) / real((n - 1) as f64);
    (0..n).map(|i| a + step * real(i as f64)).collect()
}

/// The second-order expansion family over a base law, parameterized by the
/// error-variance box `[0, delta_max]` and the kurtosis box `[1, kurt_max]`.
#[derive(Debug, Clone)]
pub struct ExpansionFamily<T, B> {
    base: B,
    delta_max: T,
    kurt_max: T,
}

/// One `(delta, kappa)` member of the family, usable as a distribution.
#[derive(Debug, Clone, Copy)]
pub struct ExpansionMember<'a, T, B> {
    family: &'a ExpansionFamily<T, B>,
    pub delta: T,
    pub kappa: T,
}

impl<T, B> ExpansionFamily<T, B>
where
    T: Real,
    B: ContinuousDistribution<T>,
{
    /// The base law must expose density derivatives up to order 4.
    pub fn new(base: B, delta_max: T, kurt_max: T) -> Result<Self> {
        if !(delta_max >= T::zero() && delta_max.is_finite()) {
            return Err(Error::domain(format!(
                "delta_max must be finite and nonnegative, got {delta_max}"
            )));
        }
        if !(kurt_max >= T::one() && kurt_max.is_finite()) {
            return Err(Error::domain(format!(
                "kurt_max must be finite and at least 1, got {kurt_max}"
            )));
        }
        let probe = base.mean().unwrap_or(T::zero()) + real(0.37);
        for order in 1..=4 {
            base.pdf_derivative(probe, order)?;
        }
        Ok(ExpansionFamily {
            base,
            delta_max,
            kurt_max,
        })
    }

    pub fn base(&self) -> &B {
        &self.base
    }

    pub fn delta_max(&self) -> T {
        self.delta_max
    }

    pub fn kurt_max(&self) -> T {
        self.kurt_max
    }

    pub fn member(&self, delta: T, kappa: T) -> Result<ExpansionMember<'_, T, B>> {
        let in_range = delta >= T::zero()
            && delta <= self.delta_max
            && kappa >= T::one()
            && kappa <= self.kurt_max;
        if !in_range {
            return Err(Error::domain(format!(
                "member (delta={delta}, kappa={kappa}) outside box [0, {}] x [1, {}]",
                self.delta_max, self.kurt_max
            )));
        }
        Ok(ExpansionMember {
            family: self,
            delta,
            kappa,
        })
    }

    /// Corner members of the parameter box, deduplicated.
    pub fn corners(&self) -> Vec<(T, T)> {
        let mut out = Vec::with_capacity(4);
        let deltas = if self.delta_max > T::zero() {
            vec![T::zero(), self.delta_max]
        } else {
            vec![T::zero()]
        };
        let kappas = if self.kurt_max > T::one() {
            vec![T::one(), self.kurt_max]
        } else {
            vec![T::one()]
        };
        for &d in &deltas {
            for &k in &kappas {
                out.push((d, k));
            }
        }
        out
    }

    /// Raw (unclamped) expansion CDF
    /// `F0(z) + (delta/2) f0'(z) + kappa (delta^2/24) f0'''(z)`.
    pub fn expansion_cdf(&self, delta: T, kappa: T, z: T) -> T {
        let d1 = self.base.pdf_derivative(z, 1).unwrap_or(T::nan());
        let d3 = self.base.pdf_derivative(z, 3).unwrap_or(T::nan());
        self.base.cdf(z) + self.cdf_perturbation(delta, kappa, d1, d3)
    }

    /// Expansion CDF clamped into `[0, 1]` for reporting.
    pub fn expansion_cdf_clamped(&self, delta: T, kappa: T, z: T) -> T {
        self.expansion_cdf(delta, kappa, z).max(T::zero()).min(T::one())
    }

    /// Raw expansion density
    /// `f0(z) + (delta/2) f0''(z) + kappa (delta^2/24) f0''''(z)`.
    pub fn expansion_pdf(&self, delta: T, kappa: T, z: T) -> T {
        let d2 = self.base.pdf_derivative(z, 2).unwrap_or(T::nan());
        let d4 = self.base.pdf_derivative(z, 4).unwrap_or(T::nan());
        self.base.pdf(z) + self.cdf_perturbation(delta, kappa, d2, d4)
    }

    #[inline]
    fn cdf_perturbation(&self, delta: T, kappa: T, lower: T, higher: T) -> T {
        let half = real::<T>(0.5);
        let frac24 = real::<T>(24.0).recip();
        half * delta * lower + kappa * delta * delta * frac24 * higher
    }

    /// Pointwise supremum of the expansion CDF over the whole parameter box
    /// (the capacity of `(-inf, z]`). The CDF is linear in `kappa` and
    /// quadratic in `delta`, so the kappa edges together with the interior
    /// delta stationary point cover the supremum exactly.
    pub fn envelope_cdf(&self, z: T) -> T {
        let d1 = self.base.pdf_derivative(z, 1).unwrap_or(T::nan());
        let d3 = self.base.pdf_derivative(z, 3).unwrap_or(T::nan());
        let base = self.base.cdf(z);
        let mut best = base;
        for kappa in [T::one(), self.kurt_max] {
            for delta in self.delta_candidates_for_extremum(d1, d3, kappa) {
                let v = base + self.cdf_perturbation(delta, kappa, d1, d3);
                if v > best {
                    best = v;
                }
            }
        }
        best
    }

    /// Candidate `delta` values for an extremum of `b d + c kappa d^2` on
    /// `[0, delta_max]`: the endpoints plus the interior stationary point.
    fn delta_candidates_for_extremum(&self, lower: T, higher: T, kappa: T) -> Vec<T> {
        let half = real::<T>(0.5);
        let frac24 = real::<T>(24.0).recip();
        let b = half * lower;
        let c = kappa * frac24 * higher;
        let mut out = vec![T::zero(), self.delta_max];
        if c != T::zero() {
            let vertex = -b / (c + c);
            if vertex > T::zero() && vertex < self.delta_max {
                out.push(vertex);
            }
        }
        out
    }

    /// The envelope as a distribution-like object (monotone, 0 to 1).
    pub fn envelope(&self) -> EnvelopeDistribution<'_, T, B> {
        EnvelopeDistribution { family: self }
    }

    /// Expected shortfall of one family member, by numeric inversion of the
    /// raw expansion CDF inside the quantile integral.
    pub fn member_cvar(
        &self,
        member: &ExpansionMember<'_, T, B>,
        alpha: T,
        cfg: &QuadratureConfig<T>,
    ) -> Result<RiskReport<T>> {
        let mut r = cvar_quantile_integral(member, alpha, cfg)?;
        r.method = "member_cvar";
        r.inputs = format!("delta={}, kappa={}", member.delta, member.kappa);
        Ok(r)
    }

    /// Worst-case CVaR over the box: exhaustive grid search plus two local
    /// refinement passes at halved spacing around the best cell. Ties keep
    /// the smallest `delta`, then the smallest `kappa`.
    pub fn worst_case_cvar(
        &self,
        alpha: T,
        grid: &GridSpec<T>,
        cfg: &QuadratureConfig<T>,
    ) -> Result<WorstCaseBound<T>> {
        grid.validate()?;
        let deltas = linspace(T::zero(), self.delta_max, grid.delta_points);
        let kappas = linspace(T::one(), self.kurt_max, grid.kappa_points);

        let mut best_value = T::neg_infinity();
        let mut best = (T::zero(), T::one());
        let evaluate = |this: &Self, d: T, k: T, best_value: &mut T, best: &mut (T, T)| -> Result<()> {
            let member = this.member(d, k)?;
            let v = this.member_cvar(&member, alpha, cfg)?.value;
            if v > *best_value {
                *best_value = v;
                *best = (d, k);
            }
            Ok(())
        };

        for &d in &deltas {
            for &k in &kappas {
                evaluate(self, d, k, &mut best_value, &mut best)?;
            }
        }

        let mut step_d = if deltas.len() > 1 { deltas[1] - deltas[0] } else { T::zero() };
        let mut step_k = if kappas.len() > 1 { kappas[1] - kappas[0] } else { T::zero() };
        for _ in 0..2 {
            let two = real::<T>(2.0);
            step_d /= two;
            step_k /= two;
            if step_d == T::zero() && step_k == T::zero() {
                break;
            }
            let (d0, k0) = best;
            for di in [-T::one(), T::zero(), T::one()] {
                for ki in [-T::one(), T::zero(), T::one()] {
                    if di == T::zero() && ki == T::zero() {
                        continue;
                    }
                    let d = (d0 + di * step_d).max(T::zero()).min(self.delta_max);
                    let k = (k0 + ki * step_k).max(T::one()).min(self.kurt_max);
                    evaluate(self, d, k, &mut best_value, &mut best)?;
                }
            }
        }

        let report = RiskReport::new(
            best_value,
            "capacity_upper_bound",
            alpha,
            format!(
                "delta_max={}, kurt_max={}, delta_star={}, kappa_star={}",
                self.delta_max, self.kurt_max, best.0, best.1
            ),
            cfg.tolerance_for(best_value),
        );
        Ok(WorstCaseBound {
            report,
            delta_star: best.0,
            kappa_star: best.1,
        })
    }

    /// Expected shortfall of the envelope, via the generalized inverse of
    /// the pointwise-sup CDF. Lower-bounds every member CVaR.
    pub fn envelope_cvar(&self, alpha: T, cfg: &QuadratureConfig<T>) -> Result<RiskReport<T>> {
        let envelope = self.envelope();
        let mut r = cvar_quantile_integral(&envelope, alpha, cfg)?;
        r.method = "envelope_cvar";
        r.inputs = format!("delta_max={}, kurt_max={}", self.delta_max, self.kurt_max);
        Ok(r)
    }

    /// Verify that every member of the box is a valid distribution on the
    /// grid: density nonnegative (to -1e-12), CDF within `[0, 1]` and
    /// nondecreasing. On failure the report carries violation coordinates
    /// and the largest grid box that does hold.
    ///
    /// The density at fixed `z` is linear in `kappa` and quadratic in
    /// `delta`, so checking the kappa edges plus the interior delta
    /// stationary point bounds the whole box, not just its corners.
    pub fn validity_check(&self, grid: &GridSpec<T>) -> Result<ValidityReport<T>> {
        grid.validate()?;
        let slack = real::<T>(-1e-12);
        let one_plus = T::one() - slack;
        let zs = linspace(grid.z_lo, grid.z_hi, grid.z_points);
        let mut violations = Vec::new();
        let push = |v: Violation<T>, violations: &mut Vec<Violation<T>>| {
            if violations.len() < MAX_REPORTED_VIOLATIONS {
                violations.push(v);
            }
        };

        for &z in &zs {
            let a = self.base.pdf(z);
            let d2 = self.base.pdf_derivative(z, 2)?;
            let d4 = self.base.pdf_derivative(z, 4)?;
            for kappa in [T::one(), self.kurt_max] {
                for delta in self.delta_candidates_for_extremum(d2, d4, kappa) {
                    let f = a + self.cdf_perturbation(delta, kappa, d2, d4);
                    if f < slack {
                        push(
                            Violation {
                                delta,
                                kappa,
                                z,
                                value: f,
                                kind: ViolationKind::NegativeDensity,
                            },
                            &mut violations,
                        );
                    }
                }
            }
        }

        for (delta, kappa) in self.corners() {
            let mut prev = T::neg_infinity();
            for &z in &zs {
                let c = self.expansion_cdf(delta, kappa, z);
                if c < slack || c > one_plus {
                    push(
                        Violation {
                            delta,
                            kappa,
                            z,
                            value: c,
                            kind: ViolationKind::CdfOutOfRange,
                        },
                        &mut violations,
                    );
                }
                if c < prev - real(1e-12) {
                    push(
                        Violation {
                            delta,
                            kappa,
                            z,
                            value: c - prev,
                            kind: ViolationKind::CdfDecreasing,
                        },
                        &mut violations,
                    );
                }
                prev = c;
            }
        }

        let valid = violations.is_empty();
        let largest_valid_box = if valid {
            None
        } else {
            self.largest_valid_grid_box(grid, &zs)
        };
        Ok(ValidityReport {
            valid,
            violations,
            largest_valid_box,
        })
    }

    /// Largest `(delta_i, kappa_j)` grid pair whose whole sub-box passes the
    /// density check; `delta` is maximized first.
    fn largest_valid_grid_box(&self, grid: &GridSpec<T>, zs: &[T]) -> Option<(T, T)> {
        let slack = real::<T>(-1e-12);
        let deltas = linspace(T::zero(), self.delta_max, grid.delta_points);
        let kappas = linspace(T::one(), self.kurt_max, grid.kappa_points);
        let mut valid = vec![vec![true; kappas.len()]; deltas.len()];
        for &z in zs {
            let a = self.base.pdf(z);
            let d2 = self.base.pdf_derivative(z, 2).ok()?;
            let d4 = self.base.pdf_derivative(z, 4).ok()?;
            for (i, &d) in deltas.iter().enumerate() {
                for (j, &k) in kappas.iter().enumerate() {
                    if valid[i][j] && a + self.cdf_perturbation(d, k, d2, d4) < slack {
                        valid[i][j] = false;
                    }
                }
            }
        }
        let mut best: Option<(usize, usize)> = None;
        for i in 0..deltas.len() {
            for j in 0..kappas.len() {
                let whole_box_ok = (0..=i).all(|ii| (0..=j).all(|jj| valid[ii][jj]));
                if whole_box_ok {
                    best = match best {
                        Some((bi, bj)) if (i, j) <= (bi, bj) => Some((bi, bj)),
                        _ => Some((i, j)),
                    };
                }
            }
        }
        best.map(|(i, j)| (deltas[i], kappas[j]))
    }

    /// Supremum over the box and the grid of `|f_member - f0|`, with the
    /// location of the maximum. `reference_bound` evaluates
    /// `C K delta_max^2 / 12` with `C = sup |f0''''|` taken on the grid — a
    /// stand-in, reported for comparison and never asserted.
    pub fn max_density_deviation(&self, grid: &GridSpec<T>) -> Result<DeviationReport<T>> {
        grid.validate()?;
        let zs = linspace(grid.z_lo, grid.z_hi, grid.z_points);
        let mut sup = T::zero();
        let mut at = (T::zero(), T::one(), grid.z_lo);
        let mut sup_d4 = T::zero();
        for &z in &zs {
            let d2 = self.base.pdf_derivative(z, 2)?;
            let d4 = self.base.pdf_derivative(z, 4)?;
            sup_d4 = sup_d4.max(d4.abs());
            for kappa in [T::one(), self.kurt_max] {
                for delta in self.delta_candidates_for_extremum(d2, d4, kappa) {
                    let dev = self.cdf_perturbation(delta, kappa, d2, d4).abs();
                    if dev > sup {
                        sup = dev;
                        at = (delta, kappa, z);
                    }
                }
            }
        }
        let twelve = real::<T>(12.0);
        Ok(DeviationReport {
            sup,
            at_delta: at.0,
            at_kappa: at.1,
            at_z: at.2,
            reference_bound: sup_d4 * self.kurt_max * self.delta_max * self.delta_max / twelve,
        })
    }
}

const MAX_REPORTED_VIOLATIONS: usize = 32;

impl<'a, T, B> ContinuousDistribution<T> for ExpansionMember<'a, T, B>
where
    T: Real,
    B: ContinuousDistribution<T>,
{
    fn cdf(&self, z: T) -> T {
        self.family.expansion_cdf(self.delta, self.kappa, z)
    }

    fn survival(&self, z: T) -> T {
        let d1 = self.family.base.pdf_derivative(z, 1).unwrap_or(T::nan());
        let d3 = self.family.base.pdf_derivative(z, 3).unwrap_or(T::nan());
        self.family.base.survival(z) - self.family.cdf_perturbation(self.delta, self.kappa, d1, d3)
    }

    fn pdf(&self, z: T) -> T {
        self.family.expansion_pdf(self.delta, self.kappa, z)
    }

    fn pdf_derivative(&self, _z: T, _order: u32) -> Result<T> {
        Err(Error::domain(
            "expansion members would need base derivatives beyond order 4",
        ))
    }

    fn support(&self) -> (T, T) {
        self.family.base.support()
    }

    fn mean(&self) -> Option<T> {
        // The perturbation terms are exact derivatives of integrable
        // functions, so they shift no mass in expectation.
        self.family.base.mean()
    }

    fn quantile(&self, t: T) -> Result<T> {
        if !(t > T::zero() && t < T::one()) {
            return Err(Error::domain(format!(
                "quantile requires probability in (0, 1), got {t}"
            )));
        }
        let (support_lo, support_hi) = self.support();
        let seed = self.family.base.quantile(t)?;
        let f = |z: T| self.cdf(z);
        let (lo, hi) = expand_bracket(&f, t, seed - T::one(), seed + T::one(), support_lo, support_hi)?;
        invert_monotone(&f, t, lo, hi, default_inversion_tol())
    }

    fn quantile_upper(&self, u: T) -> Result<T> {
        if !(u > T::zero() && u < T::one()) {
            return Err(Error::domain(format!(
                "upper quantile requires tail mass in (0, 1), got {u}"
            )));
        }
        // Invert the survival function; seeded at the base upper quantile,
        // which is within the perturbation's reach of the member's.
        let (support_lo, support_hi) = self.support();
        let seed = self.family.base.quantile_upper(u)?;
        let g = |z: T| -self.survival(z);
        let (lo, hi) = expand_bracket(&g, -u, seed - T::one(), seed + T::one(), support_lo, support_hi)?;
        invert_monotone(&g, -u, lo, hi, default_inversion_tol())
    }

    fn upper_tail_survival_integral(&self, a: T) -> Option<T> {
        // Integrating the derivative perturbations from a to infinity picks
        // up the boundary values: int_a^inf f0' = -f0(a), same one order up.
        let base_tail = self.family.base.upper_tail_survival_integral(a)?;
        let f0 = self.family.base.pdf(a);
        let d2 = self.family.base.pdf_derivative(a, 2).ok()?;
        Some(base_tail + self.family.cdf_perturbation(self.delta, self.kappa, f0, d2))
    }
}

/// Pointwise supremum of the family CDFs, as a monotone distribution-like
/// object whose generalized inverse yields the envelope CVaR.
#[derive(Debug, Clone, Copy)]
pub struct EnvelopeDistribution<'a, T, B> {
    family: &'a ExpansionFamily<T, B>,
}

impl<'a, T, B> ContinuousDistribution<T> for EnvelopeDistribution<'a, T, B>
where
    T: Real,
    B: ContinuousDistribution<T>,
{
    fn cdf(&self, z: T) -> T {
        self.family.envelope_cdf(z)
    }

    fn pdf(&self, z: T) -> T {
        // Derivative of the active branch, defined almost everywhere.
        let mut best = (self.family.base.cdf(z), T::zero(), T::one());
        for (d, k) in self.family.corners() {
            let c = self.family.expansion_cdf(d, k, z);
            if c > best.0 {
                best = (c, d, k);
            }
        }
        self.family.expansion_pdf(best.1, best.2, z)
    }

    fn pdf_derivative(&self, _z: T, _order: u32) -> Result<T> {
        Err(Error::domain("the envelope is piecewise; no derivatives"))
    }

    fn support(&self) -> (T, T) {
        self.family.base.support()
    }

    fn mean(&self) -> Option<T> {
        self.family.base.mean()
    }
}

/// Worst-case bound with its argmax location.
#[derive(Debug, Clone)]
pub struct WorstCaseBound<T> {
    pub report: RiskReport<T>,
    pub delta_star: T,
    pub kappa_star: T,
}

/// Evaluation grid for validity, deviation and worst-case sweeps.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec<T> {
    pub delta_points: usize,
    pub kappa_points: usize,
    pub z_lo: T,
    pub z_hi: T,
    pub z_points: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn with_z_range(z_lo: T, z_hi: T) -> Self {
        GridSpec {
            delta_points: 41,
            kappa_points: 11,
            z_lo,
            z_hi,
            z_points: 2001,
        }
    }

    /// Default grid whose z-range covers the base law out to probability
    /// 1e-10 on both sides.
    pub fn for_base<B: ContinuousDistribution<T>>(base: &B) -> Result<Self> {
        let eps = real::<T>(1e-10);
        let z_lo = base.quantile(eps)?;
        let z_hi = base.quantile_upper(eps)?;
        Ok(GridSpec::with_z_range(z_lo, z_hi))
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta_points == 0 || self.kappa_points == 0 || self.z_points < 2 {
            return Err(Error::domain(format!(
                "grid needs at least 1 point per parameter axis and 2 z-points, got {} x {} x {}",
                self.delta_points, self.kappa_points, self.z_points
            )));
        }
        if !(self.z_lo < self.z_hi) {
            return Err(Error::domain(format!(
                "grid z-range is empty: [{}, {}]",
                self.z_lo, self.z_hi
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NegativeDensity,
    CdfOutOfRange,
    CdfDecreasing,
}

/// A located validity violation.
#[derive(Debug, Clone, Copy)]
pub struct Violation<T> {
    pub delta: T,
    pub kappa: T,
    pub z: T,
    pub value: T,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone)]
pub struct ValidityReport<T> {
    pub valid: bool,
    pub violations: Vec<Violation<T>>,
    /// Largest grid `(delta, kappa)` whose sub-box passes, when the
    /// requested box fails.
    pub largest_valid_box: Option<(T, T)>,
}

/// Density deviation supremum with its location and the reported-only
/// reference bound.
#[derive(Debug, Clone, Copy)]
pub struct DeviationReport<T> {
    pub sup: T,
    pub at_delta: T,
    pub at_kappa: T,
    pub at_z: T,
    pub reference_bound: T,
}

/// Error laws with known fourth moment and an exact contaminated CDF,
/// used to measure the expansion's accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementErrorLaw {
    /// Standard normal error; the contaminated law is again normal.
    Gaussian,
    /// Uniform on `[-sqrt(3), sqrt(3)]` (unit variance), fourth moment 9/5.
    Uniform,
    /// Two-point `+-1` error smoothed by the base law itself; the
    /// contaminated CDF is a two-component normal mixture.
    RademacherSmoothed,
}

impl MeasurementErrorLaw {
    pub fn kurtosis(&self) -> f64 {
        match self {
            MeasurementErrorLaw::Gaussian => 3.0,
            MeasurementErrorLaw::Uniform => 1.8,
            MeasurementErrorLaw::RademacherSmoothed => 1.0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            MeasurementErrorLaw::Gaussian => "gaussian",
            MeasurementErrorLaw::Uniform => "uniform",
            MeasurementErrorLaw::RademacherSmoothed => "rademacher-smoothed",
        }
    }
}

/// Exact CDF of `X + sqrt(delta) V` for a normal base and one of the
/// reference error laws.
pub fn exact_contaminated_cdf<T: Real>(
    base: &NormalLaw<T>,
    v_law: MeasurementErrorLaw,
    delta: T,
    z: T,
) -> T {
    let u = (z - base.mu()) / base.sigma();
    if delta == T::zero() {
        return standard_normal_cdf(u);
    }
    match v_law {
        MeasurementErrorLaw::Gaussian => {
            let widened = (base.sigma() * base.sigma() + delta).sqrt();
            standard_normal_cdf((z - base.mu()) / widened)
        }
        MeasurementErrorLaw::Uniform => {
            // Averaging Phi over the uniform error gives
            // [G(u + w) - G(u - w)] / (2 w) with G(t) = t Phi(t) + phi(t).
            let w = (real::<T>(3.0) * delta).sqrt() / base.sigma();
            let g = |t: T| t * standard_normal_cdf(t) + standard_normal_pdf(t);
            (g(u + w) - g(u - w)) / (w + w)
        }
        MeasurementErrorLaw::RademacherSmoothed => {
            let half = real::<T>(0.5);
            let s = delta.sqrt() / base.sigma();
            half * (standard_normal_cdf(u - s) + standard_normal_cdf(u + s))
        }
    }
}

/// Accuracy row: largest absolute expansion error over the z-set at one
/// error scale.
#[derive(Debug, Clone, Copy)]
pub struct ExpansionErrorRow<T> {
    pub delta: T,
    pub max_abs_error: T,
}

/// Compare the second-order expansion (with `kappa` set to the error law's
/// fourth moment) against the exact contaminated CDF.
pub fn expansion_error_table<T: Real>(
    base: &NormalLaw<T>,
    v_law: MeasurementErrorLaw,
    deltas: &[T],
    z_set: &[T],
) -> Result<Vec<ExpansionErrorRow<T>>> {
    let kappa = real::<T>(v_law.kurtosis());
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        if delta < T::zero() {
            return Err(Error::domain(format!("delta must be nonnegative, got {delta}")));
        }
        let family = ExpansionFamily::new(*base, delta.max(real(1e-30)), kappa.max(T::one()))?;
        let mut max_err = T::zero();
        for &z in z_set {
            let approx = family.expansion_cdf(delta, kappa, z);
            let exact = exact_contaminated_cdf(base, v_law, delta, z);
            max_err = max_err.max((approx - exact).abs());
        }
        rows.push(ExpansionErrorRow {
            delta,
            max_abs_error: max_err,
        });
    }
    Ok(rows)
}

/// One cell of the worst-case bound table.
#[derive(Debug, Clone, Copy)]
pub struct WorstCaseCell<T> {
    pub delta_max: T,
    pub kurt_max: T,
    pub bound: T,
    pub delta_star: T,
    pub kappa_star: T,
}

/// Worst-case CVaR bounds for a standard normal base over a grid of
/// `(delta_max, kurt_max)` boxes.
pub fn worst_case_bound_table<T: Real>(
    alpha: T,
    delta_maxes: &[T],
    kurt_maxes: &[T],
    cfg: &QuadratureConfig<T>,
) -> Result<Vec<WorstCaseCell<T>>> {
    let base = NormalLaw::<T>::standard();
    let grid_template = GridSpec::for_base(&base)?;
    let mut cells = Vec::with_capacity(delta_maxes.len() * kurt_maxes.len());
    for &delta_max in delta_maxes {
        for &kurt_max in kurt_maxes {
            let family = ExpansionFamily::new(NormalLaw::<T>::standard(), delta_max, kurt_max)?;
            let bound = family.worst_case_cvar(alpha, &grid_template, cfg)?;
            cells.push(WorstCaseCell {
                delta_max,
                kurt_max,
                bound: bound.report.value,
                delta_star: bound.delta_star,
                kappa_star: bound.kappa_star,
            });
        }
    }
    Ok(cells)
}
