//! Sample-size and power calculations for external validation of binary
//! prediction models by their AUROC.
//!
//! * [`single`]: subjects needed to estimate one model's AUROC to a target
//!   95% CI width.
//! * [`pilot`]: power to detect a difference between two models' AUROCs,
//!   by resampling a pilot test set (optionally at a different prevalence).
//! * [`binormal`]: the same power calculation from a user-specified
//!   bivariate binormal model of both models' scores.
//!
//! The statistics underneath live in [`roc`] (AUROC, Newcombe variance,
//! intervals) and [`delong`] (paired DeLong test). All Monte Carlo work is
//! seeded and bitwise reproducible regardless of thread count.

pub mod binormal;
pub mod delong;
pub mod error;
pub mod ingest;
pub mod montecarlo;
pub mod pilot;
pub mod report;
pub mod rng;
pub mod roc;
pub mod single;

pub use binormal::{BinormalSpec, Class, Model};
pub use delong::{delong_test, delong_test_fast, DelongComparison};
pub use error::{Error, Result};
pub use montecarlo::{
    McConfig, MinNResult, PairedSample, PowerCurve, PowerEstimate, SearchOptions,
};
pub use pilot::PilotDataset;
pub use roc::{auroc_with_ci, estimate_auroc, newcombe_variance, AurocEstimate};
pub use single::{sample_size_single, SingleSizeRequest, SingleSizeResult};
