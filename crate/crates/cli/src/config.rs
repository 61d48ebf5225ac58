//! JSON scenario files.
//!
//! Lengths are meters, angles degrees, levels dB SPL re 20 µPa at 1 m.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sweetspot_core::acoustics::{source_gain, Medium, SourceSpec, SpeakerArray, EXCLUSION_RADIUS};
use sweetspot_core::baselines::BaselineSettings;
use sweetspot_core::evaluation::{EvalThresholds, IldConvention};
use sweetspot_core::optimizer::{Grid, SolverSettings};
use sweetspot_core::psychoacoustics::{DirectionSet, EarWeighting, ErbFormula, ErbsLog, LoudnessModel, VanDeParParams};
use sweetspot_core::scenario::Scenario;
use sweetspot_core::Position;
use thiserror::Error;

use crate::formats;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: line {line}, column {column}: {message}")]
    Syntax { path: String, line: usize, column: usize, message: String },
    #[error("{path}: line {line}: `{field}` {message}")]
    Invalid { path: String, line: usize, field: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub array: ArrayConfig,
    pub region: RegionConfig,
    pub source: SourceConfig,
    #[serde(default)]
    pub medium: MediumConfig,
    #[serde(default)]
    pub perceptual: PerceptualConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub baselines: BaselineConfig,
    #[serde(default)]
    pub hrtf: HrtfConfig,
    #[serde(default)]
    pub thresholds: ThresholdConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ArrayConfig {
    Circle {
        radius: f64,
        count: usize,
        #[serde(default)]
        start_deg: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    Positions {
        points: Vec<[f64; 2]>,
        #[serde(default)]
        center: [f64; 2],
    },
}

impl ArrayConfig {
    fn center(&self) -> [f64; 2] {
        match self {
            ArrayConfig::Circle { center, .. } | ArrayConfig::Positions { center, .. } => *center,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub radius: f64,
    pub spacing: f64,
    /// Minimum distance of an atom to any loudspeaker or to the virtual source.
    #[serde(default = "default_clearance")]
    pub clearance: f64,
}

fn default_clearance() -> f64 {
    EXCLUSION_RADIUS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub position: [f64; 2],
    pub level_db: f64,
    pub f_star: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
}

fn default_sigma() -> f64 {
    5.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub speed_of_sound: f64,
}

impl Default for MediumConfig {
    fn default() -> Self {
        MediumConfig { speed_of_sound: 343.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ErbChoice {
    #[default]
    Reciprocal,
    GlasbergMoore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ErbsLogChoice {
    #[default]
    Base10,
    Natural,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EarWeightingChoice {
    ClosedForm,
    #[default]
    ThresholdCalibrated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IldChoice {
    #[default]
    Conventional,
    PerSpeedOfSound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DirectionsConfig {
    /// Listeners look at the virtual source.
    FacingSource {
        #[serde(default)]
        offsets_deg: Vec<f64>,
    },
    Fixed {
        angles_deg: Vec<f64>,
    },
}

impl Default for DirectionsConfig {
    fn default() -> Self {
        DirectionsConfig::FacingSource { offsets_deg: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerceptualConfig {
    pub n_bands: usize,
    pub f_first: f64,
    pub f_last: f64,
    pub c_a: f64,
    pub c_psi_prime: f64,
    pub c_eta: [f64; 4],
    pub erb: ErbChoice,
    pub erbs_log: ErbsLogChoice,
    pub ear_weighting: EarWeightingChoice,
    pub ild: IldChoice,
    /// CSV `freq_hz,ldl_db_spl`; the flat 100 dB table when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loudness_csv: Option<PathBuf>,
    pub directions: DirectionsConfig,
}

impl Default for PerceptualConfig {
    fn default() -> Self {
        let p = VanDeParParams::default();
        PerceptualConfig {
            n_bands: p.n_bands,
            f_first: p.f_first,
            f_last: p.f_last,
            c_a: p.c_a,
            c_psi_prime: p.c_psi_prime,
            c_eta: p.c_eta,
            erb: ErbChoice::default(),
            erbs_log: ErbsLogChoice::default(),
            ear_weighting: EarWeightingChoice::default(),
            ild: IldChoice::default(),
            loudness_csv: None,
            directions: DirectionsConfig::default(),
        }
    }
}

/// Every field falls back to the defaults scaled by the source gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub penalty_rho: Option<f64>,
    /// Relative to `gamma_max`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_inner_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_rel_obj: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_eps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub percentile: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub history_stride: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_ridge: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hoa_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wfs_ref_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum HrtfConfig {
    FreeField {
        ear_spacing: f64,
    },
    /// CSV `azimuth_deg,channel,sample_0..,sample_rate_hz,radius_m`.
    HrirCsv {
        path: PathBuf,
    },
}

impl Default for HrtfConfig {
    fn default() -> Self {
        HrtfConfig::FreeField { ear_spacing: 0.15 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    pub lss_deg: f64,
    pub css_db: f64,
    pub ild_gate_db: f64,
    pub divergent_halfspace: bool,
    pub lookup_azimuths: usize,
    pub lookup_radius: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        let t = EvalThresholds::default();
        ThresholdConfig {
            lss_deg: t.lss_deg,
            css_db: t.css_db,
            ild_gate_db: t.ild_gate_db,
            divergent_halfspace: t.divergent_halfspace,
            lookup_azimuths: 181,
            lookup_radius: 100.0,
        }
    }
}

impl ScenarioConfig {
    /// 20 loudspeakers on a 2.5 m circle, listening disk of 2.4975 m, a
    /// 343 Hz source 5 m away at 68 dB.
    pub fn near_field(spacing: f64) -> Self {
        ScenarioConfig {
            name: Some("near-field".into()),
            array: ArrayConfig::Circle { radius: 2.5, count: 20, start_deg: 0.0, center: [0.0, 0.0] },
            region: RegionConfig { radius: 2.4975, spacing, clearance: default_clearance() },
            source: SourceConfig { position: [0.0, 5.0], level_db: 68.0, f_star: 343.0, sigma: default_sigma() },
            medium: MediumConfig::default(),
            perceptual: PerceptualConfig::default(),
            solver: SolverConfig::default(),
            baselines: BaselineConfig::default(),
            hrtf: HrtfConfig::default(),
            thresholds: ThresholdConfig::default(),
        }
    }

    /// Same array with a focused source 0.82 m from the center at 60 dB.
    pub fn focus(spacing: f64) -> Self {
        ScenarioConfig {
            name: Some("focus-source".into()),
            source: SourceConfig { position: [0.0, 0.82], level_db: 60.0, f_star: 343.0, sigma: default_sigma() },
            ..Self::near_field(spacing)
        }
    }

    pub fn from_json(text: &str, path: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
            path: path.into(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate().map_err(|(field, message)| ConfigError::Invalid {
            path: path.into(),
            line: locate(text, &field),
            field,
            message,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        let mut cfg = Self::from_json(&text, &path.display().to_string())?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        if let HrtfConfig::HrirCsv { path } = &mut self.hrtf {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        if let Some(p) = &mut self.perceptual.loudness_csv {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Semantic checks; errors name the offending field by dotted path.
    pub fn validate(&self) -> Result<(), (String, String)> {
        let bad = |f: &str, m: &str| Err((f.to_string(), m.to_string()));
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        let center = self.array.center();
        let array_radius = match &self.array {
            ArrayConfig::Circle { radius, count, .. } => {
                if !finite_pos(*radius) {
                    return bad("array.circle.radius", "must be positive");
                }
                if *count == 0 {
                    return bad("array.circle.count", "must be at least 1");
                }
                *radius
            }
            ArrayConfig::Positions { points, .. } => {
                if points.is_empty() {
                    return bad("array.positions.points", "must not be empty");
                }
                points
                    .iter()
                    .map(|p| ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min)
            }
        };
        if !finite_pos(self.region.spacing) {
            return bad("region.spacing", "must be positive");
        }
        if !finite_pos(self.region.radius) {
            return bad("region.radius", "must be positive");
        }
        if self.region.radius >= array_radius {
            return bad("region.radius", "must be smaller than the array radius");
        }
        if !(self.region.clearance >= EXCLUSION_RADIUS) {
            return bad("region.clearance", "must be at least the 0.1 m exclusion radius");
        }
        if !finite_pos(self.source.f_star) {
            return bad("source.f_star", "must be positive");
        }
        if !finite_pos(self.source.sigma) || self.source.sigma >= self.source.f_star {
            return bad("source.sigma", "must be positive and below f_star");
        }
        if !self.source.level_db.is_finite() {
            return bad("source.level_db", "must be finite");
        }
        if !finite_pos(self.medium.speed_of_sound) {
            return bad("medium.speed_of_sound", "must be positive");
        }
        let p = &self.perceptual;
        if p.n_bands == 0 {
            return bad("perceptual.n_bands", "must be at least 1");
        }
        if !(p.f_first > 0.0 && p.f_first < p.f_last) {
            return bad("perceptual.f_first", "needs 0 < f_first < f_last");
        }
        if !finite_pos(p.c_a) {
            return bad("perceptual.c_a", "must be positive");
        }
        if !finite_pos(p.c_psi_prime) {
            return bad("perceptual.c_psi_prime", "must be positive");
        }
        if let DirectionsConfig::Fixed { angles_deg } = &p.directions {
            if angles_deg.is_empty() {
                return bad("perceptual.directions.fixed.angles_deg", "must not be empty");
            }
        }
        let s = &self.solver;
        for (name, v) in [
            ("solver.gamma_max", s.gamma_max),
            ("solver.penalty_rho", s.penalty_rho),
            ("solver.step_c", s.step_c),
            ("solver.tol_rel_obj", s.tol_rel_obj),
            ("solver.epsilon_min", s.epsilon_min),
        ] {
            if let Some(v) = v {
                if !finite_pos(v) {
                    return bad(name, "must be positive");
                }
            }
        }
        if let Some(pc) = s.percentile {
            if !(pc > 0.0 && pc <= 100.0) {
                return bad("solver.percentile", "must lie in (0, 100]");
            }
        }
        for (name, v) in [
            ("solver.max_inner_iters", s.max_inner_iters),
            ("solver.n_eps", s.n_eps),
            ("solver.n_max", s.n_max),
            ("solver.history_stride", s.history_stride),
        ] {
            if v == Some(0) {
                return bad(name, "must be positive");
            }
        }
        if let Some(l) = self.baselines.lambda_ridge {
            if !(l >= 0.0 && l.is_finite()) {
                return bad("baselines.lambda_ridge", "must be non-negative");
            }
        }
        if let Some(d) = self.baselines.wfs_ref_distance {
            if !finite_pos(d) {
                return bad("baselines.wfs_ref_distance", "must be positive");
            }
        }
        if let HrtfConfig::FreeField { ear_spacing } = self.hrtf {
            if !(ear_spacing >= 0.0 && ear_spacing.is_finite()) {
                return bad("hrtf.free_field.ear_spacing", "must be non-negative");
            }
        }
        let t = &self.thresholds;
        if !finite_pos(t.lss_deg) {
            return bad("thresholds.lss_deg", "must be positive");
        }
        if !finite_pos(t.css_db) {
            return bad("thresholds.css_db", "must be positive");
        }
        if !(t.ild_gate_db >= 0.0) {
            return bad("thresholds.ild_gate_db", "must be non-negative");
        }
        if t.lookup_azimuths < 3 {
            return bad("thresholds.lookup_azimuths", "must be at least 3");
        }
        if !finite_pos(t.lookup_radius) {
            return bad("thresholds.lookup_radius", "must be positive");
        }
        Ok(())
    }

    pub fn medium(&self) -> Medium {
        Medium { speed_of_sound: self.medium.speed_of_sound }
    }

    pub fn array_center(&self) -> Position {
        let c = self.array.center();
        Position::planar(c[0], c[1])
    }

    pub fn speaker_array(&self) -> sweetspot_core::Result<SpeakerArray> {
        match &self.array {
            ArrayConfig::Circle { radius, count, start_deg, .. } => {
                SpeakerArray::circular(self.array_center(), *radius, *count, start_deg.to_radians())
            }
            ArrayConfig::Positions { points, .. } => {
                SpeakerArray::new(points.iter().map(|p| Position::planar(p[0], p[1])).collect())
            }
        }
    }

    pub fn source_spec(&self) -> SourceSpec {
        SourceSpec {
            position: Position::planar(self.source.position[0], self.source.position[1]),
            level_db_spl: self.source.level_db,
            f_star: self.source.f_star,
            sigma: self.source.sigma,
        }
    }

    /// Square lattice over the listening disk, clear of every loudspeaker
    /// and of the virtual source.
    pub fn grid(&self) -> sweetspot_core::Result<Grid> {
        let array = self.speaker_array()?;
        let mut avoid = array.positions().to_vec();
        avoid.push(self.source_spec().position);
        Grid::disk_lattice(self.array_center(), self.region.radius, self.region.spacing, &avoid, self.region.clearance)
    }

    pub fn detectability(&self) -> VanDeParParams {
        let p = &self.perceptual;
        VanDeParParams {
            n_bands: p.n_bands,
            f_first: p.f_first,
            f_last: p.f_last,
            c_a: p.c_a,
            c_psi_prime: p.c_psi_prime,
            c_eta: p.c_eta,
            erb_formula: match p.erb {
                ErbChoice::Reciprocal => ErbFormula::Reciprocal,
                ErbChoice::GlasbergMoore => ErbFormula::GlasbergMoore,
            },
            erbs_log: match p.erbs_log {
                ErbsLogChoice::Base10 => ErbsLog::Base10,
                ErbsLogChoice::Natural => ErbsLog::Natural,
            },
            ear_weighting: match p.ear_weighting {
                EarWeightingChoice::ClosedForm => EarWeighting::ClosedForm,
                EarWeightingChoice::ThresholdCalibrated => EarWeighting::ThresholdCalibrated,
            },
        }
    }

    pub fn ild_convention(&self) -> IldConvention {
        match self.perceptual.ild {
            IldChoice::Conventional => IldConvention::Conventional,
            IldChoice::PerSpeedOfSound => IldConvention::PerSpeedOfSound,
        }
    }

    pub fn loudness(&self) -> anyhow::Result<LoudnessModel> {
        match &self.perceptual.loudness_csv {
            None => Ok(LoudnessModel::flat_default()),
            Some(p) => formats::read_loudness_csv(p),
        }
    }

    pub fn directions(&self) -> DirectionSet {
        let src = self.source_spec().position;
        match &self.perceptual.directions {
            DirectionsConfig::FacingSource { offsets_deg } if offsets_deg.is_empty() => DirectionSet::FacingPoint(src),
            DirectionsConfig::FacingSource { offsets_deg } => DirectionSet::FacingPointWithOffsets {
                point: src,
                offsets: offsets_deg.iter().map(|d| d.to_radians()).collect(),
            },
            DirectionsConfig::Fixed { angles_deg } => {
                DirectionSet::Fixed(angles_deg.iter().map(|d| d.to_radians()).collect())
            }
        }
    }

    pub fn scenario(&self) -> anyhow::Result<Scenario> {
        let scenario = Scenario {
            medium: self.medium(),
            array: self.speaker_array()?,
            array_center: self.array_center(),
            source: self.source_spec(),
            grid: self.grid()?,
            detectability: self.detectability(),
            loudness: self.loudness()?,
            directions: self.directions(),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn solver_settings(&self) -> SolverSettings {
        let mut s = SolverSettings::for_source_gain(source_gain(self.source.level_db));
        let c = &self.solver;
        let relative_step = c.step_c.unwrap_or(s.step_c / s.gamma_max);
        if let Some(g) = c.gamma_max {
            s.gamma_max = g;
        }
        s.step_c = relative_step * s.gamma_max;
        s.penalty_rho = c.penalty_rho.unwrap_or(s.penalty_rho);
        s.max_inner_iters = c.max_inner_iters.unwrap_or(s.max_inner_iters);
        s.tol_rel_obj = c.tol_rel_obj.unwrap_or(s.tol_rel_obj);
        s.n_eps = c.n_eps.unwrap_or(s.n_eps);
        s.percentile = c.percentile.unwrap_or(s.percentile);
        s.epsilon_min = c.epsilon_min.unwrap_or(s.epsilon_min);
        s.n_max = c.n_max.unwrap_or(s.n_max);
        s.history_stride = c.history_stride.unwrap_or(s.history_stride);
        s
    }

    pub fn baseline_settings(&self) -> BaselineSettings {
        BaselineSettings {
            lambda_ridge: self.baselines.lambda_ridge,
            hoa_order: self.baselines.hoa_order,
            wfs_ref_distance: self.baselines.wfs_ref_distance,
        }
    }

    pub fn eval_thresholds(&self) -> EvalThresholds {
        EvalThresholds {
            lss_deg: self.thresholds.lss_deg,
            css_db: self.thresholds.css_db,
            ild_gate_db: self.thresholds.ild_gate_db,
            divergent_halfspace: self.thresholds.divergent_halfspace,
        }
    }
}

/// 1-based line of the last key of a dotted path, searching each key after
/// the previous one.
fn locate(text: &str, field: &str) -> usize {
    let mut from = 0;
    for key in field.split('.') {
        let needle = format!("\"{key}\"");
        match text[from..].find(&needle) {
            Some(i) => from += i,
            None => break,
        }
    }
    text[..from].matches('\n').count() + 1
}
