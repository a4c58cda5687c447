//! Median-of-means aggregation of coarse estimates, and sizing of the
//! estimator pool for a target accuracy.
//!
//! Each coarse estimate is unbiased but heavy-tailed; averaging within
//! groups tames the variance and the median across groups suppresses the
//! outlier groups, giving the usual (epsilon, delta) style guarantee.

use thiserror::Error;

use crate::estimator::{coarse_estimate, Estimator};
use crate::exec::{tabulate, Exec};
use crate::primitives as prim;

#[derive(Debug, Error, PartialEq)]
pub enum AggregateError {
    #[error("estimate undefined: no estimators")]
    NoEstimators,
    #[error("invalid {name}: {value} (must be {requirement})")]
    InvalidParameter { name: &'static str, value: f64, requirement: &'static str },
    #[error("estimator sizing infeasible: triangle-count lower bound is zero")]
    InfeasibleTauBound,
}

/// Aggregation parameters. `groups` may not exceed the number of
/// estimators; it is clamped when it does.
#[derive(Debug, Clone, Copy)]
pub struct AggregateConfig {
    pub groups: usize,
    /// Relative error target in (0, 1].
    pub epsilon: f64,
    /// Failure probability in (0, 1).
    pub delta: f64,
}

impl AggregateConfig {
    pub fn new(groups: usize, epsilon: f64, delta: f64) -> AggregateConfig {
        AggregateConfig { groups, epsilon, delta }
    }

    /// Default-sized configuration for a pool of `r` estimators.
    pub fn with_default_groups(r: usize, epsilon: f64, delta: f64) -> AggregateConfig {
        AggregateConfig { groups: default_group_count(r, delta), epsilon, delta }
    }
}

/// Standard median-of-means group count: `ceil(8 ln(1/delta))`, at least
/// one group and at most one group per estimator.
pub fn default_group_count(r: usize, delta: f64) -> usize {
    let ideal = (8.0 * (1.0 / delta).ln()).ceil();
    (ideal.max(1.0) as usize).min(r.max(1))
}

/// Median-of-means over the estimators' coarse estimates at stream
/// position `m`.
pub fn aggregate_estimate(
    estimators: &[Estimator],
    m: u64,
    cfg: &AggregateConfig,
) -> Result<f64, AggregateError> {
    let coarse: Vec<u128> =
        prim::map(Exec::Sequential, estimators, |e| coarse_estimate(e, m));
    aggregate_coarse(Exec::Sequential, &coarse, cfg.groups)
}

/// Median-of-means over raw coarse values.
///
/// The values are split into `groups` contiguous ranges with sizes
/// differing by at most one; group sums come from an exact integer prefix
/// scan, and the result is the lower median of the group means.
pub fn aggregate_coarse(
    exec: Exec,
    coarse: &[u128],
    groups: usize,
) -> Result<f64, AggregateError> {
    let r = coarse.len();
    if r == 0 {
        return Err(AggregateError::NoEstimators);
    }
    let g = groups.clamp(1, r);
    let (prefix, total) = prim::scan_with_total(exec, coarse, &|a, b| a + b, 0u128);
    let base = r / g;
    let extra = r % g;
    let means: Vec<f64> = tabulate(exec, g, |k| {
        let start = k * base + k.min(extra);
        let size = base + usize::from(k < extra);
        let end = start + size;
        let sum = if end == r { total } else { prefix[end] } - prefix[start];
        (sum as f64) / size as f64
    });
    let sorted = prim::sort_by(exec, &means, |a, b| a.total_cmp(b));
    Ok(sorted[(g - 1) / 2])
}

/// Number of independent estimators sufficient for a relative error of
/// `epsilon` with failure probability `delta`, given the stream size, the
/// maximum degree, and a lower bound on the triangle count:
/// `ceil(96/epsilon^2 * m*max_degree/tau * ln(1/delta))`, at least 1.
pub fn required_estimators(
    epsilon: f64,
    delta: f64,
    m: u64,
    max_degree: u64,
    tau_lower_bound: u64,
) -> Result<u64, AggregateError> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(AggregateError::InvalidParameter {
            name: "epsilon",
            value: epsilon,
            requirement: "in (0, 1]",
        });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(AggregateError::InvalidParameter {
            name: "delta",
            value: delta,
            requirement: "in (0, 1)",
        });
    }
    if tau_lower_bound == 0 {
        return Err(AggregateError::InfeasibleTauBound);
    }
    let ratio = (m as f64) * (max_degree as f64) / (tau_lower_bound as f64);
    let r = (96.0 / (epsilon * epsilon)) * ratio * (1.0 / delta).ln();
    Ok((r.ceil() as u64).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_values_aggregate_to_themselves() {
        let coarse = vec![42u128; 17];
        for exec in [Exec::Sequential, Exec::Parallel] {
            for groups in [1, 3, 17] {
                assert_eq!(aggregate_coarse(exec, &coarse, groups).unwrap(), 42.0);
            }
        }
    }

    #[test]
    fn median_of_three_groups() {
        // Values 0, 0, 6 in three singleton groups: median of means is 0.
        assert_eq!(aggregate_coarse(Exec::Sequential, &[0, 0, 6], 3).unwrap(), 0.0);
        // One group: plain mean.
        assert_eq!(aggregate_coarse(Exec::Sequential, &[0, 0, 6], 1).unwrap(), 2.0);
    }

    #[test]
    fn no_estimators_is_an_error() {
        assert_eq!(
            aggregate_coarse(Exec::Sequential, &[], 4).unwrap_err(),
            AggregateError::NoEstimators
        );
    }

    #[test]
    fn group_permutation_invariance() {
        // Permuting within a group and swapping whole groups both leave
        // the aggregate unchanged (sizes 3+3+2 here).
        let a = vec![1u128, 2, 3, 10, 20, 30, 100, 200];
        let within = vec![3u128, 1, 2, 30, 10, 20, 200, 100];
        let swapped = vec![10u128, 20, 30, 1, 2, 3, 100, 200];
        let got = |v: &[u128]| aggregate_coarse(Exec::Sequential, v, 3).unwrap();
        assert_eq!(got(&a), got(&within));
        assert_eq!(got(&a), got(&swapped));
    }

    #[test]
    fn scaling_values_scales_the_aggregate() {
        let a: Vec<u128> = (0..100).map(|i| (i * 13) % 57).collect();
        let scaled: Vec<u128> = a.iter().map(|x| x * 7).collect();
        let base = aggregate_coarse(Exec::Parallel, &a, 9).unwrap();
        let big = aggregate_coarse(Exec::Parallel, &scaled, 9).unwrap();
        assert!((big - 7.0 * base).abs() < 1e-9);
    }

    #[test]
    fn aggregate_estimate_wraps_coarse_path() {
        use crate::estimator::Edge;
        let est = |chi: u64, closed: bool| Estimator {
            f1: Some(Edge::new(1, 2).unwrap()),
            f2: Some(Edge::new(2, 3).unwrap()),
            f3: closed.then(|| Edge::new(1, 3).unwrap()),
            chi,
            ..Estimator::default()
        };
        let ests = vec![est(2, true), est(5, false), est(4, true)];
        let cfg = AggregateConfig::new(3, 0.5, 0.1);
        // Coarse values at m = 10: 20, 0, 40; median 20.
        assert_eq!(aggregate_estimate(&ests, 10, &cfg).unwrap(), 20.0);
    }

    #[test]
    fn required_estimators_formula() {
        // 96 * 6 * ln(e) = 576.
        let delta = (-1.0f64).exp();
        assert_eq!(required_estimators(1.0, delta, 6, 1, 1).unwrap(), 576);
        // Log term vanishing leaves the minimum of one estimator.
        assert_eq!(required_estimators(1.0, 0.999_999_9, 6, 1, 1).unwrap(), 1);
        // Doubling epsilon quarters the requirement (checked away from
        // any rounding effects).
        let fine = required_estimators(0.5, delta, 1000, 1, 1).unwrap();
        let coarse = required_estimators(1.0, delta, 1000, 1, 1).unwrap();
        assert_eq!(fine, 4 * coarse);
        assert_eq!(coarse, 96_000);
    }

    #[test]
    fn required_estimators_rejects_bad_parameters() {
        assert!(matches!(
            required_estimators(0.0, 0.1, 10, 2, 1),
            Err(AggregateError::InvalidParameter { name: "epsilon", .. })
        ));
        assert!(matches!(
            required_estimators(0.5, 1.0, 10, 2, 1),
            Err(AggregateError::InvalidParameter { name: "delta", .. })
        ));
        assert_eq!(
            required_estimators(0.5, 0.1, 10, 2, 0).unwrap_err(),
            AggregateError::InfeasibleTauBound
        );
    }

    #[test]
    fn default_group_count_tracks_delta() {
        assert_eq!(default_group_count(1000, 0.1), 19); // ceil(8 ln 10)
        assert_eq!(default_group_count(5, 0.1), 5);
        assert_eq!(default_group_count(1000, 0.5), 6); // ceil(8 ln 2)
    }
}
