//! Nonparametric expected shortfall from a loss sample.
//!
//! The estimator is the mean of the top block of order statistics. It is
//! tied to quantile-loss minimization: the minimizer of the pinball
//! objective is a sample quantile, and re-centering the minimal objective by
//! the sample mean reproduces the top-block mean exactly whenever
//! `n * alpha` is an integer. [`EmpiricalSample::minimization_identity_residual`]
//! checks that identity on concrete data.

use std::path::Path;

use crate::error::{Error, Result};
use crate::report::RiskReport;
use crate::scalar::{compensated_sum, real, Real};

/// Which top-block convention the estimator uses.
///
/// The printed form of the estimator sums from order statistic
/// `floor(n (1 - alpha))` upward while dividing by `floor(n (1 - alpha))`,
/// which mixes a lower index with a block size. `TopBlock` averages the
/// `floor(n (1 - alpha))` largest observations, the convention consistent
/// with the minimization identity and with consistency for the analytic
/// CVaR; `Literal` evaluates the printed form unchanged for side-by-side
/// comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimatorMode {
    #[default]
    TopBlock,
    Literal,
}

/// Quantile (pinball) loss `x * (alpha - 1[x < 0])`.
pub fn pinball_loss<T: Real>(x: T, alpha: T) -> T {
    if x < T::zero() {
        x * (alpha - T::one())
    } else {
        x * alpha
    }
}

/// A loss sample with its order statistics computed once at construction.
#[derive(Debug, Clone)]
pub struct EmpiricalSample<T> {
    values: Vec<T>,
    sorted: Vec<T>,
}

/// Round `x` to the nearest integer when it is within 1e-9 (relative) of
/// one; floating products like `10 * 0.8` must index as exactly 8.
fn snap<T: Real>(x: T) -> T {
    let r = x.round();
    if (x - r).abs() <= real::<T>(1e-9) * x.abs().max(T::one()) {
        r
    } else {
        x
    }
}

fn snap_floor<T: Real>(x: T) -> usize {
    snap(x).floor().to_usize().unwrap_or(0)
}

fn snap_ceil<T: Real>(x: T) -> usize {
    snap(x).ceil().to_usize().unwrap_or(0)
}

impl<T: Real> EmpiricalSample<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("empirical sample must not be empty"));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite loss value: {bad}")));
        }
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values are comparable"));
        Ok(EmpiricalSample { values, sorted })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Order statistics, smallest first.
    pub fn order_statistics(&self) -> &[T] {
        &self.sorted
    }

    pub fn mean(&self) -> T {
        compensated_sum(self.values.iter().copied()) / real(self.len() as f64)
    }

    fn check_alpha(&self, alpha: T) -> Result<()> {
        if alpha > T::zero() && alpha < T::one() {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "alpha must be in (0, 1), got {alpha}"
            )))
        }
    }

    /// Pinball objective `sum_i rho_alpha(X_i - xi)` at a given center.
    pub fn quantile_loss_objective(&self, alpha: T, xi: T) -> T {
        compensated_sum(self.values.iter().map(|&x| pinball_loss(x - xi, alpha)))
    }

    /// The minimizing center `X_{n:ceil(n alpha)}` and the objective there.
    pub fn quantile_loss_minimizer(&self, alpha: T) -> Result<(T, T)> {
        self.check_alpha(alpha)?;
        let n = self.len();
        let k = snap_ceil(real::<T>(n as f64) * alpha);
        if k == 0 || k > n {
            return Err(Error::domain(format!(
                "degenerate alpha: ceil(n alpha) = {k} outside 1..={n}"
            )));
        }
        let xi = self.sorted[k - 1];
        Ok((xi, self.quantile_loss_objective(alpha, xi)))
    }

    /// Sweep the center over every sample point and return the smallest
    /// objective; verification oracle for [`Self::quantile_loss_minimizer`].
    pub fn quantile_loss_sweep_minimum(&self, alpha: T) -> T {
        self.values
            .iter()
            .map(|&xi| self.quantile_loss_objective(alpha, xi))
            .fold(T::infinity(), T::min)
    }

    fn block_size(&self, alpha: T) -> (usize, bool) {
        let n = self.len();
        let raw = snap_floor(real::<T>(n as f64) * (T::one() - alpha));
        if raw == 0 {
            (1, true)
        } else {
            (raw.min(n), false)
        }
    }

    /// Empirical expected shortfall at level `alpha`.
    pub fn cvar(&self, alpha: T, mode: EstimatorMode) -> Result<RiskReport<T>> {
        self.check_alpha(alpha)?;
        let n = self.len();
        let (m, clamped) = self.block_size(alpha);
        let (value, method) = match mode {
            EstimatorMode::TopBlock => {
                let sum = compensated_sum(self.sorted[n - m..].iter().copied());
                (sum / real(m as f64), "empirical_cvar/top_block")
            }
            EstimatorMode::Literal => {
                // Printed form: sum from the m-th order statistic upward,
                // still divided by m.
                let sum = compensated_sum(self.sorted[m - 1..].iter().copied());
                (sum / real(m as f64), "empirical_cvar/literal")
            }
        };
        let mut report = RiskReport::new(
            value,
            method,
            alpha,
            format!("n={n}, m={m}"),
            T::zero(),
        );
        if clamped {
            report = report.with_warning("tail block was empty; clamped to the sample maximum");
        }
        Ok(report)
    }

    /// Residual of the minimization identity: recompute the estimator as
    /// `min_xi sum rho_alpha(X_i - xi) / floor(n (1 - alpha)) + mean` and
    /// return its absolute difference from the top-block estimator.
    ///
    /// The identity is exact (up to summation roundoff) whenever `n * alpha`
    /// is an integer.
    pub fn minimization_identity_residual(&self, alpha: T) -> Result<T> {
        self.check_alpha(alpha)?;
        let n = self.len();
        let m = snap_floor(real::<T>(n as f64) * (T::one() - alpha));
        if m == 0 {
            return Err(Error::domain(format!(
                "identity undefined: floor(n (1 - alpha)) = 0 for n = {n}, alpha = {alpha}"
            )));
        }
        let (_, objective) = self.quantile_loss_minimizer(alpha)?;
        let recentered = objective / real(m as f64) + self.mean();
        let direct = self.cvar(alpha, EstimatorMode::TopBlock)?.value;
        Ok((recentered - direct).abs())
    }
}

/// Read a single-column loss CSV. The column header `loss` is required when
/// `strict_header` is set and optional otherwise; parse failures report the
/// 1-based line number.
pub fn read_losses_csv(path: &Path, strict_header: bool) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input {
        line: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_losses_csv(&text, strict_header)
}

/// Parse the CSV text form of a loss column; see [`read_losses_csv`].
pub fn parse_losses_csv(text: &str, strict_header: bool) -> Result<Vec<f64>> {
    let mut losses = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let field = raw.trim();
        if field.is_empty() {
            continue;
        }
        if field.contains(',') {
            return Err(Error::Input {
                line,
                message: "expected a single column".to_string(),
            });
        }
        if idx == 0 && field.eq_ignore_ascii_case("loss") {
            continue;
        }
        if idx == 0 && strict_header {
            return Err(Error::Input {
                line,
                message: format!("strict mode requires a 'loss' header, found '{field}'"),
            });
        }
        let value: f64 = field.parse().map_err(|_| Error::Input {
            line,
            message: format!("not a number: '{field}'"),
        })?;
        losses.push(value);
    }
    if losses.is_empty() {
        return Err(Error::Input {
            line: 0,
            message: "no loss values found".to_string(),
        });
    }
    Ok(losses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{sample, ChiSquareLaw, NormalLaw};

    fn one_to_ten() -> EmpiricalSample<f64> {
        EmpiricalSample::new((1..=10).map(f64::from).collect()).unwrap()
    }

    #[test]
    fn pinball_loss_values() {
        assert_eq!(pinball_loss(0.0f64, 0.96), 0.0);
        assert!((pinball_loss(1.0f64, 0.96) - 0.96).abs() < 1e-15);
        assert!((pinball_loss(-1.0f64, 0.96) - 0.04).abs() < 1e-15);
    }

    #[test]
    fn minimizer_on_small_sample() {
        let s = one_to_ten();
        let (xi, objective) = s.quantile_loss_minimizer(0.8).unwrap();
        assert_eq!(xi, 8.0);
        assert!((objective - 8.0).abs() < 1e-12, "objective = {objective}");
        // Global minimality among sample points.
        let sweep = s.quantile_loss_sweep_minimum(0.8);
        assert!((sweep - objective).abs() < 1e-12);
        for &xi in s.values() {
            assert!(s.quantile_loss_objective(0.8, xi) >= objective - 1e-12);
        }
    }

    #[test]
    fn minimizer_on_constant_sample() {
        let s = EmpiricalSample::new(vec![3.5f64; 7]).unwrap();
        let (xi, objective) = s.quantile_loss_minimizer(0.3).unwrap();
        assert_eq!(xi, 3.5);
        assert_eq!(objective, 0.0);
    }

    #[test]
    fn minimizer_near_population_quantile() {
        let law = NormalLaw::<f64>::standard();
        let s = EmpiricalSample::new(sample(&law, 1000, 2024).unwrap()).unwrap();
        let (xi, _) = s.quantile_loss_minimizer(0.96).unwrap();
        assert!((xi - 1.7507).abs() < 0.15, "xi = {xi}");
    }

    #[test]
    fn top_block_estimator_small_sample() {
        let s = one_to_ten();
        let r = s.cvar(0.8, EstimatorMode::TopBlock).unwrap();
        assert_eq!(r.value, 9.5);
        assert!(r.warning.is_none());
    }

    #[test]
    fn literal_mode_evaluates_printed_form() {
        let s = one_to_ten();
        let r = s.cvar(0.8, EstimatorMode::Literal).unwrap();
        // Sum of order statistics 2..=10 divided by 2.
        assert_eq!(r.value, 27.0);
    }

    #[test]
    fn constant_sample_estimates_the_constant() {
        let s = EmpiricalSample::new(vec![2.25f64; 13]).unwrap();
        assert_eq!(s.cvar(0.9, EstimatorMode::TopBlock).unwrap().value, 2.25);
        // The literal printed form sums n - m + 1 terms over a divisor of m,
        // so even a constant sample inflates: 13 * 2.25 / 1 here.
        assert_eq!(s.cvar(0.9, EstimatorMode::Literal).unwrap().value, 29.25);
    }

    #[test]
    fn tiny_tail_clamps_with_warning() {
        let s = EmpiricalSample::new(vec![1.0, 2.0, 3.0]).unwrap();
        let r = s.cvar(0.99, EstimatorMode::TopBlock).unwrap();
        assert_eq!(r.value, 3.0);
        assert!(r.warning.is_some());
    }

    #[test]
    fn estimator_converges_to_analytic_cvar() {
        let law = NormalLaw::<f64>::standard();
        let s = EmpiricalSample::new(sample(&law, 1_000_000, 5).unwrap()).unwrap();
        let r = s.cvar(0.96, EstimatorMode::TopBlock).unwrap();
        assert!((r.value - 2.1543).abs() < 0.01, "value = {}", r.value);
    }

    #[test]
    fn identity_residual_small_sample() {
        let s = one_to_ten();
        let residual = s.minimization_identity_residual(0.8).unwrap();
        assert!(residual <= 1e-10, "residual = {residual:e}");
    }

    #[test]
    fn identity_residual_constant_sample() {
        let s = EmpiricalSample::new(vec![4.0f64; 20]).unwrap();
        assert_eq!(s.minimization_identity_residual(0.9).unwrap(), 0.0);
    }

    #[test]
    fn identity_residual_chi_square_draws() {
        let law = ChiSquareLaw::<f64>::new(1).unwrap();
        let s = EmpiricalSample::new(sample(&law, 100, 77).unwrap()).unwrap();
        let residual = s.minimization_identity_residual(0.9).unwrap();
        assert!(residual <= 1e-10, "residual = {residual:e}");
    }

    #[test]
    fn empty_sample_is_rejected() {
        assert!(EmpiricalSample::<f64>::new(vec![]).is_err());
        assert!(EmpiricalSample::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn sorted_view_is_a_nondecreasing_permutation() {
        let s = EmpiricalSample::new(vec![3.0, -1.0, 2.0, 2.0, 0.5]).unwrap();
        let sorted = s.order_statistics();
        assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        let mut a = s.values().to_vec();
        let mut b = sorted.to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b);
    }

    #[test]
    fn csv_parsing_and_errors() {
        let ok = parse_losses_csv("loss\n1.5\n2.5\n", false).unwrap();
        assert_eq!(ok, vec![1.5, 2.5]);
        let ok = parse_losses_csv("1.5\n2.5", false).unwrap();
        assert_eq!(ok, vec![1.5, 2.5]);

        let err = parse_losses_csv("1.5\nnot_a_number\n", false).unwrap_err();
        match err {
            Error::Input { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other}"),
        }

        let err = parse_losses_csv("1.5\n2.5\n", true).unwrap_err();
        match err {
            Error::Input { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {other}"),
        }

        assert!(parse_losses_csv("a,b\n", false).is_err());
        assert!(parse_losses_csv("", false).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn alpha_for(n: usize) -> impl Strategy<Value = f64> {
            (1..n).prop_map(move |k| k as f64 / n as f64)
        }

        proptest! {
            #[test]
            fn permutation_invariance(
                values in proptest::collection::vec(-100.0f64..100.0, 2..60),
                k in 1usize..59,
            ) {
                let n = values.len();
                let alpha = (k % (n - 1) + 1) as f64 / n as f64;
                let base = EmpiricalSample::new(values.clone()).unwrap()
                    .cvar(alpha, EstimatorMode::TopBlock).unwrap().value;
                let mut reversed = values.clone();
                reversed.reverse();
                let mut rotated = values.clone();
                rotated.rotate_left(n / 2);
                for permuted in [reversed, rotated] {
                    let v = EmpiricalSample::new(permuted).unwrap()
                        .cvar(alpha, EstimatorMode::TopBlock).unwrap().value;
                    prop_assert_eq!(v, base);
                }
            }

            #[test]
            fn raising_an_observation_never_lowers_cvar(
                values in proptest::collection::vec(-100.0f64..100.0, 2..40),
                idx in 0usize..40,
                bump in 0.0f64..50.0,
                k in 1usize..39,
            ) {
                let n = values.len();
                let idx = idx % n;
                let alpha = (k % (n - 1) + 1) as f64 / n as f64;
                let before = EmpiricalSample::new(values.clone()).unwrap()
                    .cvar(alpha, EstimatorMode::TopBlock).unwrap().value;
                let mut raised = values;
                raised[idx] += bump;
                let after = EmpiricalSample::new(raised).unwrap()
                    .cvar(alpha, EstimatorMode::TopBlock).unwrap().value;
                prop_assert!(after >= before - 1e-10 * (1.0 + before.abs()));
            }

            #[test]
            fn affine_equivariance(
                values in proptest::collection::vec(-512i32..512, 2..40),
                scale_pow in -3i32..4,
                shift_num in -512i32..512,
                k in 1usize..39,
            ) {
                // Dyadic inputs keep every product exact; the identity is
                // algebraic, so only the final division can round, and it
                // rounds the same way on both sides.
                let n = values.len();
                let alpha = (k % (n - 1) + 1) as f64 / n as f64;
                let xs: Vec<f64> = values.iter().map(|&v| v as f64 / 64.0).collect();
                let a = (2.0f64).powi(scale_pow);
                let b = shift_num as f64 / 64.0;
                let direct = EmpiricalSample::new(xs.iter().map(|&x| a * x + b).collect())
                    .unwrap().cvar(alpha, EstimatorMode::TopBlock).unwrap().value;
                let composed = a * EmpiricalSample::new(xs).unwrap()
                    .cvar(alpha, EstimatorMode::TopBlock).unwrap().value + b;
                prop_assert!(
                    (direct - composed).abs() <= 1e-13 * (1.0 + composed.abs()),
                    "direct {} vs composed {}", direct, composed
                );
            }

            #[test]
            fn identity_residual_vanishes_when_n_alpha_is_integral(
                values in proptest::collection::vec(-50.0f64..50.0, 4..50),
                seed in 0u32..1000,
            ) {
                let n = values.len();
                let k = 1 + (seed as usize % (n - 1));
                let alpha = k as f64 / n as f64;
                if (n as f64 * (1.0 - alpha)).floor() >= 1.0 {
                    let s = EmpiricalSample::new(values).unwrap();
                    let residual = s.minimization_identity_residual(alpha).unwrap();
                    prop_assert!(residual <= 1e-10, "residual = {:e}", residual);
                }
            }
        }

        #[test]
        fn alpha_strategy_stays_in_bounds() {
            // Guards the helper used above.
            proptest!(|(a in alpha_for(10))| {
                prop_assert!(a > 0.0 && a < 1.0);
            });
        }
    }
}
