//! Single-model AUROC: the Mann-Whitney point estimate, Newcombe's asymptotic
//! variance and the 95% confidence interval built from it.
//!
//! Labels are `bool` (`true` = case). Scores are `f64` where a higher value
//! means a higher predicted risk. Ties between a case and a control earn half
//! a win. Two scores tie only when they compare equal as floats; no epsilon is
//! applied, since predictions from a deterministic model either match exactly
//! or they don't.

use serde::{Deserialize, Serialize};

use crate::error::{open_unit, Error, Result};

/// Normal quantile used for every 95% interval in the crate.
pub const Z_95: f64 = 1.96;

/// Point estimate, standard error and 95% interval for one model's AUROC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AurocEstimate {
    pub theta_hat: f64,
    pub se: f64,
    /// Interval clamped to `[0, 1]`.
    pub ci_low: f64,
    pub ci_high: f64,
    /// `theta_hat ± 1.96·se` before clamping.
    pub ci_low_raw: f64,
    pub ci_high_raw: f64,
    pub n_cases: usize,
    pub n_controls: usize,
}

/// Validates a labelled score vector and returns `(n_cases, n_controls)`.
pub(crate) fn class_counts(labels: &[bool], scores: &[f64]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            what: "scores",
            expected: labels.len(),
            got: scores.len(),
        });
    }
    if let Some((index, &value)) = scores.iter().enumerate().find(|(_, s)| !s.is_finite()) {
        return Err(Error::NonFiniteScore { index, value });
    }
    let n_cases = labels.iter().filter(|&&y| y).count();
    let n_controls = labels.len() - n_cases;
    if n_cases == 0 || n_controls == 0 {
        return Err(Error::EmptyClass {
            n_cases,
            n_controls,
        });
    }
    Ok((n_cases, n_controls))
}

/// 1-based midranks of `values`: tied values share the mean of the ranks they
/// span. Values must be finite.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<(f64, usize)> = values.iter().copied().zip(0..).collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite scores"));

    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let value = order[start].0;
        let mut end = start + 1;
        while end < order.len() && order[end].0 == value {
            end += 1;
        }
        // ranks start..end (0-based) average to (start + end + 1) / 2 in 1-based terms
        let rank = (start + end + 1) as f64 / 2.0;
        for &(_, idx) in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

/// Fraction of case/control pairs in which the case scores higher, with ties
/// credited 0.5. Runs in O(N log N) through the rank-sum identity.
pub fn estimate_auroc(labels: &[bool], scores: &[f64]) -> Result<f64> {
    let (n_cases, n_controls) = class_counts(labels, scores)?;
    let ranks = midranks(scores);
    let case_rank_sum: f64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &y)| y)
        .map(|(r, _)| r)
        .sum();
    let n = n_cases as f64;
    let m = n_controls as f64;
    Ok((case_rank_sum - n * (n + 1.0) / 2.0) / (n * m))
}

/// Newcombe's asymptotic variance of the AUROC estimator for a design with
/// `n_total` subjects of which a fraction `phi` are cases.
pub fn newcombe_variance(theta: f64, phi: f64, n_total: usize) -> Result<f64> {
    open_unit("theta", theta)?;
    open_unit("phi", phi)?;
    if n_total < 2 {
        return Err(Error::Domain {
            name: "n_total",
            value: n_total as f64,
            constraint: "must be at least 2",
        });
    }
    let n = n_total as f64;
    let half_minus_one = n / 2.0 - 1.0;
    let bracket = 1.0
        + half_minus_one * (1.0 - theta) / (2.0 - theta)
        + half_minus_one * theta / (1.0 + theta);
    Ok(theta * (1.0 - theta) * bracket / (phi * (1.0 - phi) * n * n))
}

/// AUROC with its asymptotic 95% interval. Fails with
/// [`Error::DegenerateAuroc`] when the estimate is exactly 0 or 1.
pub fn auroc_with_ci(labels: &[bool], scores: &[f64]) -> Result<AurocEstimate> {
    let theta_hat = estimate_auroc(labels, scores)?;
    if theta_hat <= 0.0 || theta_hat >= 1.0 {
        return Err(Error::DegenerateAuroc { theta_hat });
    }
    let (n_cases, n_controls) = class_counts(labels, scores)?;
    let n_total = labels.len();
    let phi = n_cases as f64 / n_total as f64;
    let se = newcombe_variance(theta_hat, phi, n_total)?.sqrt();
    let ci_low_raw = theta_hat - Z_95 * se;
    let ci_high_raw = theta_hat + Z_95 * se;
    Ok(AurocEstimate {
        theta_hat,
        se,
        ci_low: ci_low_raw.max(0.0),
        ci_high: ci_high_raw.min(1.0),
        ci_low_raw,
        ci_high_raw,
        n_cases,
        n_controls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force_auroc(labels: &[bool], scores: &[f64]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &yi) in labels.iter().enumerate() {
            if !yi {
                continue;
            }
            for (j, &yj) in labels.iter().enumerate() {
                if yj {
                    continue;
                }
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn single_ordered_pair() {
        assert_eq!(estimate_auroc(&[true, false], &[0.9, 0.1]).unwrap(), 1.0);
    }

    #[test]
    fn single_tied_pair() {
        assert_eq!(estimate_auroc(&[true, false], &[0.5, 0.5]).unwrap(), 0.5);
    }

    #[test]
    fn five_point_example() {
        let labels = [true, true, false, false, false];
        let scores = [0.8, 0.4, 0.6, 0.3, 0.2];
        let auc = estimate_auroc(&labels, &scores).unwrap();
        assert!((auc - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn midranks_average_ties() {
        assert_eq!(midranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
        assert_eq!(midranks(&[0.0, -0.0]), vec![1.5, 1.5]);
    }

    #[test]
    fn input_errors() {
        assert!(matches!(
            estimate_auroc(&[true, true], &[0.1, 0.2]),
            Err(Error::EmptyClass {
                n_cases: 2,
                n_controls: 0
            })
        ));
        assert!(matches!(
            estimate_auroc(&[true, false], &[f64::NAN, 0.2]),
            Err(Error::NonFiniteScore { index: 0, .. })
        ));
        assert!(matches!(
            estimate_auroc(&[true, false], &[0.1, f64::INFINITY]),
            Err(Error::NonFiniteScore { index: 1, .. })
        ));
        assert!(matches!(
            estimate_auroc(&[true, false], &[0.1]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn newcombe_case_study_value() {
        // hand evaluation: 0.81·0.19·(1 + 224·0.19/1.19 + 224·0.81/1.81) / (0.16·450²)
        let v = newcombe_variance(0.81, 0.20, 450).unwrap();
        let bracket = 1.0 + 224.0 * 0.19 / 1.19 + 224.0 * 0.81 / 1.81;
        let expected = 0.81 * 0.19 * bracket / (0.16 * 450.0 * 450.0);
        assert!((v - expected).abs() < 1e-18);
        assert!((v - 6.508e-4).abs() < 1e-6, "{v}");
        assert!((v.sqrt() - 0.02551).abs() < 5e-5);
    }

    #[test]
    fn newcombe_symmetric_point() {
        for n in [2usize, 10, 101, 1000] {
            let nf = n as f64;
            let expected = 0.25 * (1.0 + 2.0 * (nf / 2.0 - 1.0) / 3.0) / (0.25 * nf * nf);
            let v = newcombe_variance(0.5, 0.5, n).unwrap();
            assert!((v - expected).abs() <= 1e-15 * expected, "n={n}");
        }
    }

    #[test]
    fn newcombe_domain() {
        assert!(newcombe_variance(0.0, 0.5, 10).is_err());
        assert!(newcombe_variance(1.0, 0.5, 10).is_err());
        assert!(newcombe_variance(0.7, 1.0, 10).is_err());
        assert!(newcombe_variance(0.7, 0.5, 1).is_err());
        assert!(newcombe_variance(f64::NAN, 0.5, 10).is_err());
    }

    #[test]
    fn newcombe_vanishes_with_n() {
        let small = newcombe_variance(0.8, 0.3, 1_000).unwrap();
        let large = newcombe_variance(0.8, 0.3, 1_000_000).unwrap();
        assert!(large < small);
    }

    #[test]
    fn ci_symmetric_at_half() {
        // 100 cases, 100 controls, every score tied -> theta_hat = 0.5
        let labels: Vec<bool> = (0..200).map(|i| i < 100).collect();
        let scores = vec![0.3; 200];
        let est = auroc_with_ci(&labels, &scores).unwrap();
        assert_eq!(est.theta_hat, 0.5);
        assert!(((est.ci_high - 0.5) - (0.5 - est.ci_low)).abs() < 1e-15);
        assert_eq!((est.n_cases, est.n_controls), (100, 100));
    }

    #[test]
    fn ci_perfect_separation_is_degenerate() {
        let labels = [true, true, false, false];
        let scores = [0.9, 0.8, 0.2, 0.1];
        assert_eq!(
            auroc_with_ci(&labels, &scores),
            Err(Error::DegenerateAuroc { theta_hat: 1.0 })
        );
    }

    #[test]
    fn ci_is_clamped_but_raw_kept() {
        // small sample with a high AUROC pushes the raw upper bound past 1
        let labels = [true, true, false, false];
        let scores = [0.9, 0.3, 0.4, 0.1];
        let est = auroc_with_ci(&labels, &scores).unwrap();
        assert_eq!(est.theta_hat, 0.75);
        assert!(est.ci_high_raw > 1.0);
        assert_eq!(est.ci_high, 1.0);
        assert!(est.ci_low <= est.theta_hat && est.theta_hat <= est.ci_high);
    }

    fn labelled_scores() -> impl Strategy<Value = (Vec<bool>, Vec<f64>)> {
        (2usize..200).prop_flat_map(|n| {
            (
                proptest::collection::vec(any::<bool>(), n),
                // coarse integer grid so ties show up regularly
                proptest::collection::vec((0i32..25).prop_map(|v| v as f64 / 4.0), n),
            )
        })
    }

    proptest! {
        #[test]
        fn ranked_equals_double_sum((mut labels, scores) in labelled_scores()) {
            labels[0] = true;
            labels[1] = false;
            let fast = estimate_auroc(&labels, &scores).unwrap();
            let slow = brute_force_auroc(&labels, &scores);
            prop_assert!((fast - slow).abs() < 1e-12);
        }

        #[test]
        fn invariant_under_increasing_transform((mut labels, scores) in labelled_scores()) {
            labels[0] = true;
            labels[1] = false;
            let transformed: Vec<f64> = scores.iter().map(|s| (0.7 * s).exp() - 3.0).collect();
            let a = estimate_auroc(&labels, &scores).unwrap();
            let b = estimate_auroc(&labels, &transformed).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn flipping_labels_complements((mut labels, scores) in labelled_scores()) {
            labels[0] = true;
            labels[1] = false;
            let flipped: Vec<bool> = labels.iter().map(|y| !y).collect();
            let a = estimate_auroc(&labels, &scores).unwrap();
            let b = estimate_auroc(&flipped, &scores).unwrap();
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }

        #[test]
        fn newcombe_decreases_in_n(theta in 0.01f64..0.99, phi in 0.01f64..0.99, n in 2usize..100_000) {
            let v1 = newcombe_variance(theta, phi, n).unwrap();
            let v2 = newcombe_variance(theta, phi, 2 * n).unwrap();
            prop_assert!(v1 > 0.0);
            prop_assert!(v2 < v1);
        }
    }
}
