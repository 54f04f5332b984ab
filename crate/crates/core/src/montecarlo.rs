//! Monte Carlo power estimation shared by the pilot-resampling and binormal
//! calculators.
//!
//! One iteration draws a paired dataset, runs the DeLong test on it and
//! records whether `p < alpha`. Draws that cannot be tested (one class only,
//! or two models with identical ranks) are redrawn from the same substream,
//! up to `max_redraws_per_iteration` times, so every estimate rests on
//! exactly `iterations` tested datasets.

use std::sync::atomic::{AtomicBool, Ordering};

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::delong::delong_test_fast;
use crate::error::{Error, Result};
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McConfig {
    pub alpha: f64,
    pub iterations: usize,
    pub seed: u64,
    pub max_redraws_per_iteration: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            iterations: 2000,
            seed: 0,
            max_redraws_per_iteration: 100,
        }
    }
}

impl McConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain {
                name: "alpha",
                value: self.alpha,
                constraint: "must lie strictly between 0 and 1",
            });
        }
        if self.iterations == 0 {
            return Err(Error::Domain {
                name: "iterations",
                value: 0.0,
                constraint: "must be at least 1",
            });
        }
        Ok(())
    }
}

/// Power at one sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub n: usize,
    pub power: f64,
    /// Binomial standard error `sqrt(power·(1 − power)/iterations)`.
    pub mc_se: f64,
    pub rejections: usize,
    pub iterations: usize,
    /// Draws discarded as untestable and replaced.
    pub degenerate_draws: usize,
}

impl PowerEstimate {
    fn from_counts(
        n: usize,
        rejections: usize,
        iterations: usize,
        degenerate_draws: usize,
    ) -> Self {
        let power = rejections as f64 / iterations as f64;
        Self {
            n,
            power,
            mc_se: (power * (1.0 - power) / iterations as f64).sqrt(),
            rejections,
            iterations,
            degenerate_draws,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub points: Vec<PowerEstimate>,
    pub config: McConfig,
    pub prevalence_override: Option<f64>,
}

/// Labels plus both models' scores for one simulated or resampled study.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairedSample {
    pub labels: Vec<bool>,
    pub scores_a: Vec<f64>,
    pub scores_b: Vec<f64>,
}

impl PairedSample {
    pub(crate) fn clear(&mut self) {
        self.labels.clear();
        self.scores_a.clear();
        self.scores_b.clear();
    }

    pub(crate) fn push(&mut self, label: bool, a: f64, b: f64) {
        self.labels.push(label);
        self.scores_a.push(a);
        self.scores_b.push(b);
    }
}

/// Something that can produce paired datasets of a requested size.
pub(crate) trait DatasetSource: Sync {
    fn fill(&self, n: usize, rng: &mut ChaCha8Rng, out: &mut PairedSample);

    /// Error reported when an iteration runs out of redraws.
    fn exhausted(&self, n: usize, budget: usize) -> Error;
}

pub(crate) fn estimate_power<S: DatasetSource>(
    source: &S,
    n: usize,
    cfg: &McConfig,
) -> Result<PowerEstimate> {
    cfg.validate()?;
    if n < 2 {
        return Err(Error::Domain {
            name: "n",
            value: n as f64,
            constraint: "must be at least 2",
        });
    }
    let budget = cfg.max_redraws_per_iteration;
    let abort = AtomicBool::new(false);

    let outcomes: std::result::Result<Vec<(bool, usize)>, ()> = (0..cfg.iterations)
        .into_par_iter()
        .map_init(PairedSample::default, |sample, iteration| {
            if abort.load(Ordering::Relaxed) {
                return Err(());
            }
            let mut rng = substream(cfg.seed, iteration as u64);
            let mut redraws = 0;
            loop {
                source.fill(n, &mut rng, sample);
                match delong_test_fast(&sample.labels, &sample.scores_a, &sample.scores_b) {
                    Ok(cmp) => return Ok((cmp.p_value < cfg.alpha, redraws)),
                    Err(Error::EmptyClass { .. } | Error::DegenerateComparison { .. }) => {
                        if redraws == budget {
                            abort.store(true, Ordering::Relaxed);
                            return Err(());
                        }
                        redraws += 1;
                    }
                    Err(other) => unreachable!("sampler produced invalid data: {other}"),
                }
            }
        })
        .collect();

    let outcomes = outcomes.map_err(|()| source.exhausted(n, budget))?;
    let rejections = outcomes.iter().filter(|(rejected, _)| *rejected).count();
    let degenerate = outcomes.iter().map(|(_, r)| r).sum();
    Ok(PowerEstimate::from_counts(
        n,
        rejections,
        cfg.iterations,
        degenerate,
    ))
}

/// Grids must be non-empty and strictly increasing.
pub fn validate_grid(grid: &[usize]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGrid);
    }
    Ok(())
}

/// Evaluates `power_at` on each grid point in order, tagging failures with the
/// offending `n`.
pub(crate) fn sweep(
    grid: &[usize],
    mut power_at: impl FnMut(usize) -> Result<PowerEstimate>,
) -> Result<Vec<PowerEstimate>> {
    validate_grid(grid)?;
    grid.iter()
        .map(|&n| {
            power_at(n).map_err(|e| Error::AtGridPoint {
                n,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Bounds and step choices for the minimum-N search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchOptions {
    pub n_min: usize,
    pub n_max: usize,
    /// Ratio between consecutive coarse grid points.
    pub growth: f64,
    /// Spacing of the refinement scan inside the bracketing interval; when
    /// unset the interval is split into about twenty steps.
    pub refine_step: Option<usize>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            n_min: 50,
            n_max: 10_000,
            growth: 2.0,
            refine_step: None,
        }
    }
}

impl SearchOptions {
    fn validate(&self) -> Result<()> {
        if self.n_min < 2 {
            return Err(Error::Domain {
                name: "n_min",
                value: self.n_min as f64,
                constraint: "must be at least 2",
            });
        }
        if self.n_max <= self.n_min {
            return Err(Error::Domain {
                name: "n_max",
                value: self.n_max as f64,
                constraint: "must exceed n_min",
            });
        }
        if !self.growth.is_finite() || self.growth <= 1.0 {
            return Err(Error::Domain {
                name: "growth",
                value: self.growth,
                constraint: "must be a finite ratio above 1",
            });
        }
        if self.refine_step == Some(0) {
            return Err(Error::Domain {
                name: "refine_step",
                value: 0.0,
                constraint: "must be at least 1",
            });
        }
        Ok(())
    }

    /// `n_min`, `n_min·growth`, ... capped at and always ending with `n_max`.
    pub fn coarse_grid(&self) -> Vec<usize> {
        let mut grid = vec![self.n_min];
        let mut current = self.n_min;
        while current < self.n_max {
            let next = ((current as f64 * self.growth).ceil() as usize).max(current + 1);
            current = next.min(self.n_max);
            grid.push(current);
        }
        grid
    }
}

/// Outcome of the minimum-N search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinNResult {
    /// Smallest evaluated sample size whose power reached the target.
    pub n: usize,
    pub estimate: PowerEstimate,
    pub target_power: f64,
    /// Coarse grid points bracketing the crossing; `low` is absent when the
    /// first grid point already met the target.
    pub bracket_low: Option<usize>,
    pub bracket_high: usize,
    pub refine_step: usize,
    /// Every estimate computed, coarse points first, then refinement points.
    pub evaluated: Vec<PowerEstimate>,
}

/// Geometric coarse scan from `n_min` up to `n_max`, then a linear scan
/// between the last grid point below target and the first one at or above it.
pub(crate) fn search_min_n(
    target_power: f64,
    opts: &SearchOptions,
    mut power_at: impl FnMut(usize) -> Result<PowerEstimate>,
) -> Result<MinNResult> {
    opts.validate()?;
    if !(0.0..1.0).contains(&target_power) {
        return Err(Error::Domain {
            name: "target_power",
            value: target_power,
            constraint: "must lie in [0, 1)",
        });
    }

    let mut evaluated = Vec::new();
    let mut previous: Option<usize> = None;
    let mut hit = None;
    for n in opts.coarse_grid() {
        let est = power_at(n)?;
        evaluated.push(est);
        if est.power >= target_power {
            hit = Some(est);
            break;
        }
        previous = Some(n);
    }

    let Some(hit) = hit else {
        let last = evaluated.last().expect("grid is never empty");
        return Err(Error::TargetUnreachable {
            n_max: opts.n_max,
            power: last.power,
            target: target_power,
        });
    };

    let Some(low) = previous else {
        return Ok(MinNResult {
            n: hit.n,
            estimate: hit,
            target_power,
            bracket_low: None,
            bracket_high: hit.n,
            refine_step: 1,
            evaluated,
        });
    };

    let high = hit.n;
    let step = opts
        .refine_step
        .unwrap_or_else(|| (high - low).div_ceil(20).max(1));
    let mut best = hit;
    let mut n = low + step;
    while n < high {
        let est = power_at(n)?;
        evaluated.push(est);
        if est.power >= target_power {
            best = est;
            break;
        }
        n += step;
    }

    Ok(MinNResult {
        n: best.n,
        estimate: best,
        target_power,
        bracket_low: Some(low),
        bracket_high: high,
        refine_step: step,
        evaluated,
    })
}
