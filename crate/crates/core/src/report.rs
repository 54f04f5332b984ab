//! Versioned result documents.
//!
//! The command-line tool and the HTTP service both build their output through
//! the `run_*` functions here and serialize it with
//! [`Document::to_json`], so identical inputs and seeds give byte-identical
//! documents on either interface.

use serde::{Deserialize, Serialize};

use crate::binormal::{
    anticipated_auroc, anticipated_auroc_literal, density_contours, min_n_for_power_binormal,
    power_binormal, power_curve_binormal, BinormalSpec, Class, DensityGrid, Model,
};
use crate::error::Result;
use crate::ingest::PilotSummary;
use crate::montecarlo::{McConfig, MinNResult, PowerEstimate, SearchOptions};
use crate::pilot::{
    min_n_for_power, power_curve_pilot, power_pilot, power_pilot_reweighted, prevalence_weights,
    PilotDataset,
};
use crate::single::{sample_size_single, SingleSizeRequest, SingleSizeResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "aucpower";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const ORIENTATION_NOTE: &str =
    "control scores are generated on the negated logit scale so that a \
model assigning higher mean risk to cases than to controls has AUROC above 0.5; \
anticipated_auroc_literal gives the values without this correction";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<I, R> {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub inputs: I,
    pub results: R,
}

impl<I: Serialize, R: Serialize> Document<I, R> {
    fn new(command: &str, inputs: I, results: R) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: TOOL_NAME.into(),
            tool_version: TOOL_VERSION.into(),
            command: command.into(),
            inputs,
            results,
        }
    }

    /// Canonical rendering: pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }
}

/// What to compute for a two-model comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Query {
    Power {
        n: usize,
    },
    Curve {
        n_grid: Vec<usize>,
    },
    MinN {
        target_power: f64,
        search: SearchOptions,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PowerOutcome {
    Power {
        estimate: PowerEstimate,
        expected_events: usize,
    },
    Curve {
        points: Vec<PowerEstimate>,
    },
    MinN {
        n: usize,
        expected_events: usize,
        search: MinNResult,
    },
}

fn expected_events(n: usize, prevalence: f64) -> usize {
    (n as f64 * prevalence).ceil() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleResults {
    #[serde(flatten)]
    pub result: SingleSizeResult,
    pub advisory: Option<String>,
}

pub type SingleDocument = Document<SingleSizeRequest, SingleResults>;

pub fn run_single(req: &SingleSizeRequest) -> Result<SingleDocument> {
    let result = sample_size_single(req)?;
    Ok(Document::new(
        "single",
        *req,
        SingleResults {
            result,
            advisory: req.advisory(),
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotInputs {
    pub pilot: PilotSummary,
    /// Target prevalence for weighted resampling; absent means uniform.
    pub prevalence: Option<f64>,
    pub config: McConfig,
    pub query: Query,
}

/// Per-row resampling weights of a reweighted run, with their sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSummary {
    pub case_weight: f64,
    pub control_weight: f64,
    pub total: f64,
    pub case_mass: f64,
}

impl WeightSummary {
    pub fn new(pilot: &PilotDataset, phi: f64) -> Result<Self> {
        let w = prevalence_weights(pilot.labels(), phi)?;
        let mut summary = Self {
            case_weight: 0.0,
            control_weight: 0.0,
            total: 0.0,
            case_mass: 0.0,
        };
        for (&y, &wi) in pilot.labels().iter().zip(&w) {
            summary.total += wi;
            if y {
                summary.case_weight = wi;
                summary.case_mass += wi;
            } else {
                summary.control_weight = wi;
            }
        }
        Ok(summary)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotResults {
    /// Expected prevalence of the simulated studies.
    pub simulated_prevalence: f64,
    /// Present only when a target prevalence was given.
    pub weights: Option<WeightSummary>,
    pub outcome: PowerOutcome,
}

pub type PilotDocument = Document<PilotInputs, PilotResults>;

pub fn run_pilot(
    pilot: &PilotDataset,
    summary: PilotSummary,
    prevalence: Option<f64>,
    config: McConfig,
    query: Query,
) -> Result<PilotDocument> {
    let phi = prevalence.unwrap_or_else(|| pilot.prevalence());
    let weights = prevalence
        .map(|p| WeightSummary::new(pilot, p))
        .transpose()?;
    let outcome = match &query {
        Query::Power { n } => {
            let estimate = match prevalence {
                Some(p) => power_pilot_reweighted(pilot, *n, p, &config)?,
                None => power_pilot(pilot, *n, &config)?,
            };
            PowerOutcome::Power {
                estimate,
                expected_events: expected_events(*n, phi),
            }
        }
        Query::Curve { n_grid } => PowerOutcome::Curve {
            points: power_curve_pilot(pilot, n_grid, prevalence, &config)?.points,
        },
        Query::MinN {
            target_power,
            search,
        } => {
            let found = min_n_for_power(pilot, *target_power, prevalence, &config, search)?;
            PowerOutcome::MinN {
                n: found.n,
                expected_events: expected_events(found.n, phi),
                search: found,
            }
        }
    };
    Ok(Document::new(
        "pilot",
        PilotInputs {
            pilot: summary,
            prevalence,
            config,
            query,
        },
        PilotResults {
            simulated_prevalence: phi,
            weights,
            outcome,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AurocPair {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnticipatedAurocs {
    pub anticipated_auroc: AurocPair,
    pub anticipated_auroc_literal: AurocPair,
    pub orientation_note: String,
}

impl AnticipatedAurocs {
    pub fn for_spec(spec: &BinormalSpec) -> Result<Self> {
        Ok(Self {
            anticipated_auroc: AurocPair {
                a: anticipated_auroc(spec, Model::A)?,
                b: anticipated_auroc(spec, Model::B)?,
            },
            anticipated_auroc_literal: AurocPair {
                a: anticipated_auroc_literal(spec, Model::A)?,
                b: anticipated_auroc_literal(spec, Model::B)?,
            },
            orientation_note: ORIENTATION_NOTE.into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinormalInputs {
    pub spec: BinormalSpec,
    pub config: McConfig,
    pub query: Query,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinormalResults {
    #[serde(flatten)]
    pub aurocs: AnticipatedAurocs,
    pub outcome: PowerOutcome,
}

pub type BinormalDocument = Document<BinormalInputs, BinormalResults>;

pub fn run_binormal(
    spec: &BinormalSpec,
    config: McConfig,
    query: Query,
) -> Result<BinormalDocument> {
    let aurocs = AnticipatedAurocs::for_spec(spec)?;
    let outcome = match &query {
        Query::Power { n } => PowerOutcome::Power {
            estimate: power_binormal(spec, *n, &config)?,
            expected_events: expected_events(*n, spec.phi),
        },
        Query::Curve { n_grid } => PowerOutcome::Curve {
            points: power_curve_binormal(spec, n_grid, &config)?.points,
        },
        Query::MinN {
            target_power,
            search,
        } => {
            let found = min_n_for_power_binormal(spec, *target_power, &config, search)?;
            PowerOutcome::MinN {
                n: found.n,
                expected_events: expected_events(found.n, spec.phi),
                search: found,
            }
        }
    };
    Ok(Document::new(
        "binormal",
        BinormalInputs {
            spec: *spec,
            config,
            query,
        },
        BinormalResults { aurocs, outcome },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preview {
    #[serde(flatten)]
    pub aurocs: AnticipatedAurocs,
    pub case_density: DensityGrid,
    pub control_density: DensityGrid,
}

/// Anticipated AUROCs plus both class densities, for live previews.
pub fn binormal_preview(spec: &BinormalSpec, grid_resolution: usize) -> Result<Preview> {
    Ok(Preview {
        aurocs: AnticipatedAurocs::for_spec(spec)?,
        case_density: density_contours(spec, Class::Case, grid_resolution)?,
        control_density: density_contours(spec, Class::Control, grid_resolution)?,
    })
}

/// Power table as `n,power,mc_se` CSV.
pub fn curve_csv(points: &[PowerEstimate]) -> String {
    let mut out = String::from("n,power,mc_se\n");
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.n, p.power, p.mc_se));
    }
    out
}

impl PowerOutcome {
    /// Every estimate the outcome carries, in `n` order.
    pub fn points(&self) -> Vec<PowerEstimate> {
        match self {
            Self::Power { estimate, .. } => vec![*estimate],
            Self::Curve { points } => points.clone(),
            Self::MinN { search, .. } => {
                let mut pts = search.evaluated.clone();
                pts.sort_by_key(|p| p.n);
                pts
            }
        }
    }
}

/// Builds a [`Query`] from the mutually exclusive `n` / `n_grid` /
/// `target_power` choices.
pub fn query_from_parts(
    n: Option<usize>,
    n_grid: Option<Vec<usize>>,
    target_power: Option<f64>,
    search: SearchOptions,
) -> std::result::Result<Query, String> {
    match (n, n_grid, target_power) {
        (Some(n), None, None) => Ok(Query::Power { n }),
        (None, Some(n_grid), None) => {
            crate::montecarlo::validate_grid(&n_grid).map_err(|e| e.to_string())?;
            Ok(Query::Curve { n_grid })
        }
        (None, None, Some(target_power)) => Ok(Query::MinN {
            target_power,
            search,
        }),
        (None, None, None) => Err("one of n, n_grid or target_power is required".into()),
        _ => Err("n, n_grid and target_power are mutually exclusive".into()),
    }
}
