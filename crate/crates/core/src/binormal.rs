//! Power for comparing two models under a user-specified binormal model.
//!
//! The user describes each class with parameters in `(0, 1)`: a mean
//! predicted risk per model, a variance parameter per model and a
//! between-model correlation. They are mapped to a bivariate normal on the
//! logit scale:
//!
//! * mean: cases `logit(mu)`, controls `logit(1 − mu)`;
//! * variance: `−ln(1 − v)`;
//! * covariance: `r·sqrt(v_a·v_b)` on the mapped variances.
//!
//! # Orientation
//!
//! Taken literally, the control mean `logit(1 − mu)` puts controls *above*
//! cases whenever the control risk is below one half, which reverses the
//! meaning of the AUROC. Scores are therefore generated with the control draw
//! negated. Negation keeps the covariance and moves the control mean to
//! `logit(mu)`, so a model whose cases get a higher mean risk than its
//! controls has an AUROC above 0.5. [`anticipated_auroc_literal`] reports the
//! value without this correction.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{open_unit, Error, Result};
use crate::montecarlo::{
    estimate_power, search_min_n, sweep, DatasetSource, McConfig, MinNResult, PairedSample,
    PowerCurve, PowerEstimate, SearchOptions,
};

pub const DEFAULT_VARIANCE: f64 = 0.9;
pub const DEFAULT_CORRELATION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Case,
    Control,
}

fn default_variance() -> f64 {
    DEFAULT_VARIANCE
}

fn default_correlation() -> f64 {
    DEFAULT_CORRELATION
}

/// User-facing parameters of the generative model, all in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinormalSpec {
    pub mu_case_a: f64,
    pub mu_case_b: f64,
    pub mu_ctrl_a: f64,
    pub mu_ctrl_b: f64,
    #[serde(default = "default_variance")]
    pub v_case_a: f64,
    #[serde(default = "default_variance")]
    pub v_case_b: f64,
    #[serde(default = "default_variance")]
    pub v_ctrl_a: f64,
    #[serde(default = "default_variance")]
    pub v_ctrl_b: f64,
    #[serde(default = "default_correlation")]
    pub r_case: f64,
    #[serde(default = "default_correlation")]
    pub r_ctrl: f64,
    #[serde(alias = "prevalence")]
    pub phi: f64,
}

impl BinormalSpec {
    /// Spec with the given means and prevalence and default variances and
    /// correlations.
    pub fn with_means(
        mu_case_a: f64,
        mu_case_b: f64,
        mu_ctrl_a: f64,
        mu_ctrl_b: f64,
        phi: f64,
    ) -> Self {
        Self {
            mu_case_a,
            mu_case_b,
            mu_ctrl_a,
            mu_ctrl_b,
            v_case_a: DEFAULT_VARIANCE,
            v_case_b: DEFAULT_VARIANCE,
            v_ctrl_a: DEFAULT_VARIANCE,
            v_ctrl_b: DEFAULT_VARIANCE,
            r_case: DEFAULT_CORRELATION,
            r_ctrl: DEFAULT_CORRELATION,
            phi,
        }
    }

    /// `(name, value)` for every parameter, in declaration order.
    pub fn parameters(&self) -> [(&'static str, f64); 11] {
        [
            ("mu_case_a", self.mu_case_a),
            ("mu_case_b", self.mu_case_b),
            ("mu_ctrl_a", self.mu_ctrl_a),
            ("mu_ctrl_b", self.mu_ctrl_b),
            ("v_case_a", self.v_case_a),
            ("v_case_b", self.v_case_b),
            ("v_ctrl_a", self.v_ctrl_a),
            ("v_ctrl_b", self.v_ctrl_b),
            ("r_case", self.r_case),
            ("r_ctrl", self.r_ctrl),
            ("phi", self.phi),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.parameters() {
            open_unit(name, value)?;
        }
        Ok(())
    }

    /// The same spec with case and control parameters exchanged.
    pub fn swap_classes(&self) -> Self {
        Self {
            mu_case_a: self.mu_ctrl_a,
            mu_case_b: self.mu_ctrl_b,
            mu_ctrl_a: self.mu_case_a,
            mu_ctrl_b: self.mu_case_b,
            v_case_a: self.v_ctrl_a,
            v_case_b: self.v_ctrl_b,
            v_ctrl_a: self.v_case_a,
            v_ctrl_b: self.v_case_b,
            r_case: self.r_ctrl,
            r_ctrl: self.r_case,
            phi: self.phi,
        }
    }
}

/// Bivariate normal for one class, `[model A, model B]` ordering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    pub mean: [f64; 2],
    pub var: [f64; 2],
    pub cov: f64,
}

impl ClassDistribution {
    pub fn sd(&self) -> [f64; 2] {
        [self.var[0].sqrt(), self.var[1].sqrt()]
    }

    pub fn correlation(&self) -> f64 {
        self.cov / (self.var[0] * self.var[1]).sqrt()
    }

    fn negated(&self) -> Self {
        Self {
            mean: [-self.mean[0], -self.mean[1]],
            ..*self
        }
    }

    /// Joint density at `(a, b)`.
    pub fn density(&self, a: f64, b: f64) -> f64 {
        let [sa, sb] = self.sd();
        let rho = self.correlation();
        let za = (a - self.mean[0]) / sa;
        let zb = (b - self.mean[1]) / sb;
        let one_minus = 1.0 - rho * rho;
        let q = (za * za - 2.0 * rho * za * zb + zb * zb) / one_minus;
        (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * sa * sb * one_minus.sqrt())
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let sa = self.var[0].sqrt();
        let slope = self.cov / sa;
        let resid = (self.var[1] - slope * slope).max(0.0).sqrt();
        (
            self.mean[0] + sa * z1,
            self.mean[1] + slope * z1 + resid * z2,
        )
    }
}

/// Parameters after the logit / log mapping. `control.mean` holds the literal
/// `logit(1 − mu)` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReparameterizedSpec {
    pub case: ClassDistribution,
    pub control: ClassDistribution,
    pub phi: f64,
}

impl ReparameterizedSpec {
    /// Distribution the scores of `class` are actually generated from, after
    /// the orientation correction.
    pub fn generating(&self, class: Class) -> ClassDistribution {
        match class {
            Class::Case => self.case,
            Class::Control => self.control.negated(),
        }
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn reparameterize(spec: &BinormalSpec) -> Result<ReparameterizedSpec> {
    spec.validate()?;
    let class = |y: f64, mu: [f64; 2], v: [f64; 2], r: f64| {
        let mean = mu.map(|m| logit(y * m + (1.0 - y) * (1.0 - m)));
        let var = v.map(|v| -(1.0 - v).ln());
        ClassDistribution {
            mean,
            var,
            cov: r * (var[0] * var[1]).sqrt(),
        }
    };
    Ok(ReparameterizedSpec {
        case: class(
            1.0,
            [spec.mu_case_a, spec.mu_case_b],
            [spec.v_case_a, spec.v_case_b],
            spec.r_case,
        ),
        control: class(
            0.0,
            [spec.mu_ctrl_a, spec.mu_ctrl_b],
            [spec.v_ctrl_a, spec.v_ctrl_b],
            spec.r_ctrl,
        ),
        phi: spec.phi,
    })
}

fn binormal_auroc(case_mean: f64, case_var: f64, ctrl_mean: f64, ctrl_var: f64) -> f64 {
    std_normal_cdf((case_mean - ctrl_mean) / (case_var + ctrl_var).sqrt())
}

fn model_index(model: Model) -> usize {
    match model {
        Model::A => 0,
        Model::B => 1,
    }
}

/// AUROC implied by the spec for `model`, under the orientation the scores
/// are generated with.
pub fn anticipated_auroc(spec: &BinormalSpec, model: Model) -> Result<f64> {
    let r = reparameterize(spec)?;
    let i = model_index(model);
    let (case, control) = (r.generating(Class::Case), r.generating(Class::Control));
    Ok(binormal_auroc(
        case.mean[i],
        case.var[i],
        control.mean[i],
        control.var[i],
    ))
}

/// AUROC implied by the uncorrected mapping, with controls centred at
/// `logit(1 − mu)`.
pub fn anticipated_auroc_literal(spec: &BinormalSpec, model: Model) -> Result<f64> {
    let r = reparameterize(spec)?;
    let i = model_index(model);
    Ok(binormal_auroc(
        r.case.mean[i],
        r.case.var[i],
        r.control.mean[i],
        r.control.var[i],
    ))
}

/// Draws `n` labelled rows: `Y ~ Bernoulli(phi)`, then both scores from the
/// class's bivariate normal.
pub fn sample_dataset<R: Rng>(rspec: &ReparameterizedSpec, n: usize, rng: &mut R) -> PairedSample {
    let mut out = PairedSample::default();
    fill_sample(rspec, n, rng, &mut out);
    out
}

fn fill_sample<R: Rng>(rspec: &ReparameterizedSpec, n: usize, rng: &mut R, out: &mut PairedSample) {
    let case = rspec.generating(Class::Case);
    let control = rspec.generating(Class::Control);
    out.clear();
    for _ in 0..n {
        let is_case = rng.random::<f64>() < rspec.phi;
        let (a, b) = if is_case {
            case.sample(rng)
        } else {
            control.sample(rng)
        };
        out.push(is_case, a, b);
    }
}

struct BinormalSource(ReparameterizedSpec);

impl DatasetSource for BinormalSource {
    fn fill(&self, n: usize, rng: &mut ChaCha8Rng, out: &mut PairedSample) {
        fill_sample(&self.0, n, rng, out);
    }

    fn exhausted(&self, n: usize, budget: usize) -> Error {
        Error::DegenerateSpec { n, budget }
    }
}

pub fn power_binormal(spec: &BinormalSpec, n_eval: usize, cfg: &McConfig) -> Result<PowerEstimate> {
    estimate_power(&BinormalSource(reparameterize(spec)?), n_eval, cfg)
}

pub fn power_curve_binormal(
    spec: &BinormalSpec,
    n_grid: &[usize],
    cfg: &McConfig,
) -> Result<PowerCurve> {
    let source = BinormalSource(reparameterize(spec)?);
    let points = sweep(n_grid, |n| estimate_power(&source, n, cfg))?;
    Ok(PowerCurve {
        points,
        config: *cfg,
        prevalence_override: None,
    })
}

pub fn min_n_for_power_binormal(
    spec: &BinormalSpec,
    target_power: f64,
    cfg: &McConfig,
    opts: &SearchOptions,
) -> Result<MinNResult> {
    let source = BinormalSource(reparameterize(spec)?);
    search_min_n(target_power, opts, |n| estimate_power(&source, n, cfg))
}

/// Density of one class's generating distribution on a regular grid, for
/// contour plots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub class: Class,
    /// Model A score at each column.
    pub x: Vec<f64>,
    /// Model B score at each row.
    pub y: Vec<f64>,
    /// `z[row][col]` is the density at `(x[col], y[row])` divided by
    /// `peak_density`.
    pub z: Vec<Vec<f64>>,
    /// Density at the mean; multiply `z` by this to recover absolute values.
    pub peak_density: f64,
    pub mean: [f64; 2],
}

/// Half-width of the contour grid in standard deviations.
pub const CONTOUR_SPAN_SD: f64 = 4.0;

pub fn density_contours(
    spec: &BinormalSpec,
    class: Class,
    grid_resolution: usize,
) -> Result<DensityGrid> {
    if grid_resolution < 16 {
        return Err(Error::Domain {
            name: "grid_resolution",
            value: grid_resolution as f64,
            constraint: "must be at least 16",
        });
    }
    let dist = reparameterize(spec)?.generating(class);
    let sd = dist.sd();
    let axis = |k: usize| -> Vec<f64> {
        let lo = dist.mean[k] - CONTOUR_SPAN_SD * sd[k];
        let step = 2.0 * CONTOUR_SPAN_SD * sd[k] / (grid_resolution - 1) as f64;
        (0..grid_resolution).map(|i| lo + step * i as f64).collect()
    };
    let x = axis(0);
    let y = axis(1);
    let peak_density = dist.density(dist.mean[0], dist.mean[1]);
    let z = y
        .iter()
        .map(|&b| {
            x.iter()
                .map(|&a| dist.density(a, b) / peak_density)
                .collect()
        })
        .collect();
    Ok(DensityGrid {
        class,
        x,
        y,
        z,
        peak_density,
        mean: dist.mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn case_study() -> BinormalSpec {
        BinormalSpec::with_means(0.44, 0.41, 0.17, 0.17, 0.2)
    }

    #[test]
    fn logit_identity_at_half() {
        let spec = BinormalSpec::with_means(0.5, 0.5, 0.5, 0.5, 0.3);
        let r = reparameterize(&spec).unwrap();
        assert_eq!(r.case.mean, [0.0, 0.0]);
        assert_eq!(r.control.mean, [0.0, 0.0]);
    }

    #[test]
    fn variance_map_at_default() {
        let r = reparameterize(&case_study()).unwrap();
        for v in r.case.var.iter().chain(&r.control.var) {
            assert!((v - 10f64.ln()).abs() < 1e-12);
        }
        // r·sqrt(v_a v_b) with equal variances is r·v
        assert!((r.case.cov - 0.9 * 10f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn control_mean_uses_complement() {
        let r = reparameterize(&case_study()).unwrap();
        assert!((r.control.mean[0] - 1.5856).abs() < 1e-4);
        assert!((r.generating(Class::Control).mean[0] + 1.5856).abs() < 1e-4);
        assert!((r.case.mean[0] - (0.44f64 / 0.56).ln()).abs() < 1e-12);
    }

    #[test]
    fn boundary_parameters_rejected() {
        let mut spec = case_study();
        spec.r_case = 1.0;
        assert!(matches!(
            reparameterize(&spec),
            Err(Error::Domain { name: "r_case", .. })
        ));
        let mut spec = case_study();
        spec.v_ctrl_b = 0.0;
        assert!(reparameterize(&spec).is_err());
        let mut spec = case_study();
        spec.phi = 1.0;
        assert!(anticipated_auroc(&spec, Model::A).is_err());
    }

    #[test]
    fn symmetric_spec_has_half_auroc() {
        let spec = BinormalSpec::with_means(0.3, 0.3, 0.3, 0.3, 0.4);
        assert!((anticipated_auroc(&spec, Model::A).unwrap() - 0.5).abs() < 1e-15);
        assert!((anticipated_auroc(&spec, Model::B).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn swapping_classes_complements_auroc() {
        let mut spec = case_study();
        spec.v_case_a = 0.7;
        spec.r_ctrl = 0.4;
        let swapped = spec.swap_classes();
        for model in [Model::A, Model::B] {
            let a = anticipated_auroc(&spec, model).unwrap();
            let b = anticipated_auroc(&swapped, model).unwrap();
            assert!((a + b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn case_study_aurocs() {
        // closed form: Φ((logit 0.44 − logit 0.17) / sqrt(2·ln 10))
        let spec = case_study();
        let a = anticipated_auroc(&spec, Model::A).unwrap();
        let b = anticipated_auroc(&spec, Model::B).unwrap();
        assert!((a - 0.734509).abs() < 1e-5, "{a}");
        assert!((b - 0.715418).abs() < 1e-5, "{b}");
        let literal = anticipated_auroc_literal(&spec, Model::A).unwrap();
        assert!(literal < 0.5);
    }

    #[test]
    fn sample_within_class_correlation() {
        let mut spec = case_study();
        spec.r_case = 0.6;
        spec.r_ctrl = 0.3;
        let r = reparameterize(&spec).unwrap();
        let data = sample_dataset(&r, 100_000, &mut substream(4, 0));
        let corr = |want: bool| {
            let (a, b): (Vec<f64>, Vec<f64>) = data
                .labels
                .iter()
                .zip(data.scores_a.iter().zip(&data.scores_b))
                .filter(|(y, _)| **y == want)
                .map(|(_, (a, b))| (*a, *b))
                .unzip();
            let n = a.len() as f64;
            let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
            let sab: f64 = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum();
            let saa: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
            let sbb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
            sab / (saa * sbb).sqrt()
        };
        assert!((corr(true) - 0.6).abs() < 0.05);
        assert!((corr(false) - 0.3).abs() < 0.05);
        let prevalence = data.labels.iter().filter(|&&y| y).count() as f64 / 1e5;
        assert!((prevalence - 0.2).abs() < 0.005);
    }

    #[test]
    fn contours_peak_and_symmetry() {
        let mut spec = BinormalSpec::with_means(0.6, 0.6, 0.3, 0.3, 0.3);
        spec.r_case = 0.05;
        let g = density_contours(&spec, Class::Case, 33).unwrap();
        // odd resolution puts the mean on the centre node
        assert_eq!(g.z[16][16], 1.0);
        let max = g.z.iter().flatten().cloned().fold(f64::MIN, f64::max);
        assert_eq!(max, 1.0);
        for i in 0..33 {
            for j in 0..33 {
                assert!((g.z[i][j] - g.z[j][i]).abs() < 1e-12);
            }
        }
        assert!(density_contours(&spec, Class::Case, 8).is_err());
    }

    #[test]
    fn contour_mass_integrates_to_one() {
        let spec = case_study();
        for class in [Class::Case, Class::Control] {
            let g = density_contours(&spec, class, 64).unwrap();
            let dx = g.x[1] - g.x[0];
            let dy = g.y[1] - g.y[0];
            let edge = |i: usize| if i == 0 || i == 63 { 0.5 } else { 1.0 };
            let mut total = 0.0;
            for (i, row) in g.z.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    total += edge(i) * edge(j) * v;
                }
            }
            total *= dx * dy * g.peak_density;
            assert!((total - 1.0).abs() < 0.02, "{class:?}: {total}");
        }
    }

    #[test]
    fn deserialize_fills_defaults() {
        let spec: BinormalSpec = serde_json::from_str(
            r#"{"mu_case_a":0.44,"mu_case_b":0.41,"mu_ctrl_a":0.17,"mu_ctrl_b":0.17,"phi":0.2}"#,
        )
        .unwrap();
        assert_eq!(spec, case_study());
    }
}
