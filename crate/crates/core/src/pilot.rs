//! Power for comparing two models by resampling a pilot test set.
//!
//! Each Monte Carlo iteration draws `n` rows with replacement from the pilot
//! set and runs the paired DeLong test on them. `n` is free to exceed the
//! pilot size: this is simulation of a future study, not a bootstrap of the
//! pilot itself.
//!
//! With a target prevalence `phi`, rows are drawn with weights
//! `phi/n_cases` for cases and `(1 − phi)/n_controls` for controls, so the
//! expected case fraction of each resample is `phi`.
//!
//! Rows are drawn one at a time from the iteration's substream, so for a
//! fixed seed the resample at size `n + k` extends the one at size `n`.
//! Power curves therefore move smoothly with `n` instead of jittering
//! independently at every grid point.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{open_unit, Error, Result};
use crate::montecarlo::{
    estimate_power, search_min_n, sweep, DatasetSource, McConfig, MinNResult, PairedSample,
    PowerCurve, PowerEstimate, SearchOptions,
};
use crate::roc::class_counts;

/// Labels and both models' predictions for the rows of a pilot test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPilot")]
pub struct PilotDataset {
    labels: Vec<bool>,
    scores_a: Vec<f64>,
    scores_b: Vec<f64>,
}

#[derive(Deserialize)]
struct RawPilot {
    labels: Vec<bool>,
    scores_a: Vec<f64>,
    scores_b: Vec<f64>,
}

impl TryFrom<RawPilot> for PilotDataset {
    type Error = Error;

    fn try_from(raw: RawPilot) -> Result<Self> {
        Self::new(raw.labels, raw.scores_a, raw.scores_b)
    }
}

impl PilotDataset {
    /// Checks equal lengths, finite scores and that both classes are present.
    pub fn new(labels: Vec<bool>, scores_a: Vec<f64>, scores_b: Vec<f64>) -> Result<Self> {
        class_counts(&labels, &scores_a)?;
        if scores_b.len() != labels.len() {
            return Err(Error::LengthMismatch {
                what: "scores_b",
                expected: labels.len(),
                got: scores_b.len(),
            });
        }
        class_counts(&labels, &scores_b)?;
        Ok(Self {
            labels,
            scores_a,
            scores_b,
        })
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn scores_a(&self) -> &[f64] {
        &self.scores_a
    }

    pub fn scores_b(&self) -> &[f64] {
        &self.scores_b
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_cases(&self) -> usize {
        self.labels.iter().filter(|&&y| y).count()
    }

    pub fn prevalence(&self) -> f64 {
        self.n_cases() as f64 / self.len() as f64
    }
}

/// Sampling weights that move the expected case fraction to `phi`. They sum
/// to one and put total mass `phi` on the cases.
pub fn prevalence_weights(labels: &[bool], phi: f64) -> Result<Vec<f64>> {
    open_unit("phi", phi)?;
    let n_cases = labels.iter().filter(|&&y| y).count();
    let n_controls = labels.len() - n_cases;
    if n_cases == 0 || n_controls == 0 {
        return Err(Error::EmptyClass {
            n_cases,
            n_controls,
        });
    }
    let case_weight = phi / n_cases as f64;
    let control_weight = (1.0 - phi) / n_controls as f64;
    Ok(labels
        .iter()
        .map(|&y| if y { case_weight } else { control_weight })
        .collect())
}

/// Draws row indices from a pilot set, uniformly or prevalence-weighted.
#[derive(Debug, Clone)]
pub struct Resampler<'a> {
    pilot: &'a PilotDataset,
    weighted: Option<WeightedIndex<f64>>,
}

impl<'a> Resampler<'a> {
    pub fn uniform(pilot: &'a PilotDataset) -> Self {
        Self {
            pilot,
            weighted: None,
        }
    }

    pub fn reweighted(pilot: &'a PilotDataset, phi: f64) -> Result<Self> {
        let weights = prevalence_weights(&pilot.labels, phi)?;
        let index = WeightedIndex::new(&weights).expect("weights are positive and finite");
        Ok(Self {
            pilot,
            weighted: Some(index),
        })
    }

    fn draw_index<R: Rng>(&self, rng: &mut R) -> usize {
        match &self.weighted {
            Some(index) => index.sample(rng),
            None => rng.random_range(0..self.pilot.len()),
        }
    }

    /// `n` row indices drawn with replacement.
    pub fn resample_indices<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        (0..n).map(|_| self.draw_index(rng)).collect()
    }
}

impl DatasetSource for Resampler<'_> {
    fn fill(&self, n: usize, rng: &mut ChaCha8Rng, out: &mut PairedSample) {
        out.clear();
        for _ in 0..n {
            let i = self.draw_index(rng);
            out.push(
                self.pilot.labels[i],
                self.pilot.scores_a[i],
                self.pilot.scores_b[i],
            );
        }
    }

    fn exhausted(&self, n: usize, budget: usize) -> Error {
        Error::PilotTooDegenerate { n, budget }
    }
}

fn resampler(pilot: &PilotDataset, phi: Option<f64>) -> Result<Resampler<'_>> {
    match phi {
        Some(phi) => Resampler::reweighted(pilot, phi),
        None => Ok(Resampler::uniform(pilot)),
    }
}

/// Power of the DeLong test at sample size `n_eval`, resampling the pilot
/// rows uniformly.
pub fn power_pilot(pilot: &PilotDataset, n_eval: usize, cfg: &McConfig) -> Result<PowerEstimate> {
    estimate_power(&Resampler::uniform(pilot), n_eval, cfg)
}

/// As [`power_pilot`], with rows weighted so resamples have expected
/// prevalence `phi`.
pub fn power_pilot_reweighted(
    pilot: &PilotDataset,
    n_eval: usize,
    phi: f64,
    cfg: &McConfig,
) -> Result<PowerEstimate> {
    estimate_power(&Resampler::reweighted(pilot, phi)?, n_eval, cfg)
}

/// One power estimate per grid point. Every point uses the same seed, so a
/// point equals the standalone estimate at that `n`.
pub fn power_curve_pilot(
    pilot: &PilotDataset,
    n_grid: &[usize],
    phi: Option<f64>,
    cfg: &McConfig,
) -> Result<PowerCurve> {
    let source = resampler(pilot, phi)?;
    let points = sweep(n_grid, |n| estimate_power(&source, n, cfg))?;
    Ok(PowerCurve {
        points,
        config: *cfg,
        prevalence_override: phi,
    })
}

/// Smallest sample size whose estimated power reaches `target_power`.
pub fn min_n_for_power(
    pilot: &PilotDataset,
    target_power: f64,
    phi: Option<f64>,
    cfg: &McConfig,
    opts: &SearchOptions,
) -> Result<MinNResult> {
    let source = resampler(pilot, phi)?;
    search_min_n(target_power, opts, |n| estimate_power(&source, n, cfg))
}
