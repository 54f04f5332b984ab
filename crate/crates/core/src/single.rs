//! Sample size for estimating one model's AUROC to a given 95% CI width.
//!
//! The target standard error is `width / (2·1.96)`. Starting from `N = 2`,
//! `N` grows by one until Newcombe's standard error drops strictly below the
//! target.

use serde::{Deserialize, Serialize};

use crate::error::{open_unit, Error, Result};
use crate::roc::{newcombe_variance, Z_95};

/// Widest CI we recommend targeting; wider requests still run but carry an
/// advisory.
pub const RECOMMENDED_MAX_CI_WIDTH: f64 = 0.1;

/// Scan limit; targets needing more subjects are reported as unreachable.
pub const MAX_SAMPLE_SIZE: usize = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleSizeRequest {
    /// Anticipated AUROC.
    pub auroc: f64,
    /// Outcome prevalence in the validation population.
    pub prevalence: f64,
    /// Target width of the 95% confidence interval.
    pub ci_width: f64,
}

impl SingleSizeRequest {
    pub fn validate(&self) -> Result<()> {
        open_unit("auroc", self.auroc)?;
        open_unit("prevalence", self.prevalence)?;
        open_unit("ci_width", self.ci_width)?;
        Ok(())
    }

    pub fn advisory(&self) -> Option<String> {
        (self.ci_width > RECOMMENDED_MAX_CI_WIDTH).then(|| {
            format!(
                "a CI width of {} is wide; widths of at most {} are recommended",
                self.ci_width, RECOMMENDED_MAX_CI_WIDTH
            )
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleSizeResult {
    pub n_total: usize,
    /// `ceil(prevalence · n_total)`.
    pub n_events: usize,
    pub se_achieved: f64,
    pub target_se: f64,
}

pub fn sample_size_single(req: &SingleSizeRequest) -> Result<SingleSizeResult> {
    req.validate()?;
    let target_se = req.ci_width / (2.0 * Z_95);
    for n in 2..=MAX_SAMPLE_SIZE {
        let se = newcombe_variance(req.auroc, req.prevalence, n)?.sqrt();
        if se < target_se {
            return Ok(SingleSizeResult {
                n_total: n,
                n_events: (req.prevalence * n as f64).ceil() as usize,
                se_achieved: se,
                target_se,
            });
        }
    }
    Err(Error::Overflow {
        limit: MAX_SAMPLE_SIZE,
    })
}
