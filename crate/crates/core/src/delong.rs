//! DeLong's paired comparison of two correlated AUROCs.
//!
//! Both models are scored on the same subjects. Each subject gets a placement
//! value per model: for a case, the fraction of controls it outranks; for a
//! control, the fraction of cases that outrank it (ties count half). The
//! AUROC is the mean of either set of placements, and the sample covariances
//! of the placements give the variance/covariance matrix of the two AUROC
//! estimates.
//!
//! [`delong_test`] builds the placements with explicit case/control loops,
//! O(n·m). [`delong_test_fast`] derives the same placements from midranks in
//! O(N log N). The placement values are exact multiples of `1/m` (or `1/n`)
//! on both paths, so the two functions agree to the last bit.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::roc::{class_counts, midranks};

/// Per-observation placement values for a single model.
#[derive(Debug, Clone, PartialEq)]
pub struct Placements {
    /// One entry per case, in input order.
    pub cases: Vec<f64>,
    /// One entry per control, in input order.
    pub controls: Vec<f64>,
}

impl Placements {
    pub fn auroc(&self) -> f64 {
        mean(&self.cases)
    }
}

/// Result of the paired two-sided test of equal AUROCs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelongComparison {
    pub auroc_a: f64,
    pub auroc_b: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub cov_ab: f64,
    /// `var_a + var_b - 2·cov_ab`, computed from the paired placement
    /// differences so it never goes negative through cancellation.
    pub var_diff: f64,
    pub z: f64,
    pub p_value: f64,
}

/// Placement values via midranks, O(N log N).
pub fn delong_components(labels: &[bool], scores: &[f64]) -> Result<Placements> {
    let (n_cases, n_controls) = class_counts(labels, scores)?;
    Ok(ranked_placements(labels, scores, n_cases, n_controls))
}

/// Placement values via explicit pair loops, O(n·m). Kept as the reference
/// the ranked path is checked against.
pub fn delong_components_pairwise(labels: &[bool], scores: &[f64]) -> Result<Placements> {
    let (n_cases, n_controls) = class_counts(labels, scores)?;
    let (case_scores, control_scores) = split(labels, scores);

    let mut control_wins = vec![0.0; n_controls];
    let mut cases = Vec::with_capacity(n_cases);
    for &x in &case_scores {
        let mut wins = 0.0;
        for (j, &y) in control_scores.iter().enumerate() {
            let credit = if x > y {
                1.0
            } else if x == y {
                0.5
            } else {
                0.0
            };
            wins += credit;
            control_wins[j] += credit;
        }
        cases.push(wins / n_controls as f64);
    }
    let controls = control_wins
        .into_iter()
        .map(|w| w / n_cases as f64)
        .collect();
    Ok(Placements { cases, controls })
}

fn ranked_placements(
    labels: &[bool],
    scores: &[f64],
    n_cases: usize,
    n_controls: usize,
) -> Placements {
    let (case_scores, control_scores) = split(labels, scores);
    let all = midranks(scores);
    let within_cases = midranks(&case_scores);
    let within_controls = midranks(&control_scores);

    let mut cases = Vec::with_capacity(n_cases);
    let mut controls = Vec::with_capacity(n_controls);
    let (mut ci, mut cj) = (0, 0);
    let n = n_cases as f64;
    let m = n_controls as f64;
    for (&y, &rank) in labels.iter().zip(&all) {
        if y {
            // controls strictly below plus half the tied controls
            cases.push((rank - within_cases[ci]) / m);
            ci += 1;
        } else {
            let cases_not_above = rank - within_controls[cj];
            controls.push((n - cases_not_above) / n);
            cj += 1;
        }
    }
    Placements { cases, controls }
}

fn split(labels: &[bool], scores: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut cases = Vec::new();
    let mut controls = Vec::new();
    for (&y, &s) in labels.iter().zip(scores) {
        if y {
            cases.push(s);
        } else {
            controls.push(s);
        }
    }
    (cases, controls)
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample covariance; zero for fewer than two observations, where
/// the placements carry no spread.
fn sample_cov(x: &[f64], y: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let (mx, my) = (mean(x), mean(y));
    let s: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    s / (x.len() - 1) as f64
}

fn compare(a: &Placements, b: &Placements) -> Result<DelongComparison> {
    let n = a.cases.len() as f64;
    let m = a.controls.len() as f64;
    let auroc_a = a.auroc();
    let auroc_b = b.auroc();

    let var_a = sample_cov(&a.cases, &a.cases) / n + sample_cov(&a.controls, &a.controls) / m;
    let var_b = sample_cov(&b.cases, &b.cases) / n + sample_cov(&b.controls, &b.controls) / m;
    let cov_ab = sample_cov(&a.cases, &b.cases) / n + sample_cov(&a.controls, &b.controls) / m;

    let diff = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(p, q)| p - q).collect() };
    let d_cases = diff(&a.cases, &b.cases);
    let d_controls = diff(&a.controls, &b.controls);
    let var_diff = sample_cov(&d_cases, &d_cases) / n + sample_cov(&d_controls, &d_controls) / m;

    if var_diff.is_nan() || var_diff <= DEGENERATE_RELATIVE_TOL * (var_a + var_b) {
        return Err(Error::DegenerateComparison {
            auroc_a,
            auroc_b,
            variance: var_diff,
        });
    }
    let z = (auroc_a - auroc_b) / var_diff.sqrt();
    let p_value = erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0);
    Ok(DelongComparison {
        auroc_a,
        auroc_b,
        var_a,
        var_b,
        cov_ab,
        var_diff,
        z,
        p_value,
    })
}

/// Difference variance at or below this fraction of `var_a + var_b` is treated
/// as zero.
const DEGENERATE_RELATIVE_TOL: f64 = 1e-12;

fn check_pair(labels: &[bool], scores_b: &[f64]) -> Result<()> {
    if scores_b.len() != labels.len() {
        return Err(Error::LengthMismatch {
            what: "scores_b",
            expected: labels.len(),
            got: scores_b.len(),
        });
    }
    Ok(())
}

/// Paired DeLong test using pairwise placements (quadratic time).
pub fn delong_test(
    labels: &[bool],
    scores_a: &[f64],
    scores_b: &[f64],
) -> Result<DelongComparison> {
    let a = delong_components_pairwise(labels, scores_a)?;
    check_pair(labels, scores_b)?;
    let b = delong_components_pairwise(labels, scores_b)?;
    compare(&a, &b)
}

/// Paired DeLong test using midrank placements (linearithmic time). Same
/// contract and same output as [`delong_test`].
pub fn delong_test_fast(
    labels: &[bool],
    scores_a: &[f64],
    scores_b: &[f64],
) -> Result<DelongComparison> {
    let (n_cases, n_controls) = class_counts(labels, scores_a)?;
    check_pair(labels, scores_b)?;
    class_counts(labels, scores_b)?;
    let a = ranked_placements(labels, scores_a, n_cases, n_controls);
    let b = ranked_placements(labels, scores_b, n_cases, n_controls);
    compare(&a, &b)
}
