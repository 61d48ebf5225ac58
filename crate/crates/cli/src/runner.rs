//! Method execution and artifact emission.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use sweetspot_core::acoustics::{synthesize_field, DriveCoefficients, FreeFieldTwoEar, HrtfProvider};
use sweetspot_core::baselines::{nfc_hoa_25d, pmm_l2, wfs_25d};
use sweetspot_core::evaluation::{build_itd_lookup, evaluate_method, EvalReport};
use sweetspot_core::optimizer::{sweet_relu_on, HistoryRow};
use sweetspot_core::problem::BinauralProblem;
use sweetspot_core::scenario::Scenario;

use crate::config::{HrtfConfig, ScenarioConfig};
use crate::formats::{self, CoefficientRow, CoefficientsFile, ComparisonRow, EvalReportJson};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Method {
    SweetRelu,
    Pmm,
    Wfs,
    NfcHoa,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::SweetRelu, Method::Pmm, Method::Wfs, Method::NfcHoa];

    pub fn name(self) -> &'static str {
        match self {
            Method::SweetRelu => "sweet-relu",
            Method::Pmm => "pmm",
            Method::Wfs => "wfs",
            Method::NfcHoa => "nfc-hoa",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match Method::ALL.into_iter().find(|m| m.name() == s.trim()) {
            Some(m) => Ok(m),
            None => bail!("unknown method `{s}` (expected sweet-relu, pmm, wfs or nfc-hoa)"),
        }
    }
}

pub fn provider(config: &ScenarioConfig) -> Result<Box<dyn HrtfProvider>> {
    Ok(match &config.hrtf {
        HrtfConfig::FreeField { ear_spacing } => Box::new(FreeFieldTwoEar { ear_spacing: *ear_spacing }),
        HrtfConfig::HrirCsv { path } => Box::new(formats::read_hrir_csv(path)?),
    })
}

/// A loaded configuration with everything derived from it.
pub struct Prepared {
    pub config: ScenarioConfig,
    pub scenario: Scenario,
    pub provider: Box<dyn HrtfProvider>,
}

impl Prepared {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate().map_err(|(f, m)| anyhow::anyhow!("`{f}` {m}"))?;
        Ok(Prepared { config: config.clone(), scenario: config.scenario()?, provider: provider(config)? })
    }
}

pub struct MethodOutput {
    pub method: Method,
    pub coefficients: DriveCoefficients,
    pub warnings: Vec<String>,
    pub history: Vec<HistoryRow>,
    pub report: EvalReport,
}

pub fn solve(prep: &Prepared, method: Method) -> Result<MethodOutput> {
    let scenario = &prep.scenario;
    let provider = prep.provider.as_ref();
    let baseline = prep.config.baseline_settings();
    let (coefficients, warnings, history) = match method {
        Method::SweetRelu => {
            let problem = BinauralProblem::new(scenario, provider)?;
            let report = sweet_relu_on(&problem, &prep.config.solver_settings(), None)?;
            let mut warnings = Vec::new();
            if !report.converged {
                warnings.push("an inner solve stopped at its iteration limit".to_string());
            }
            (report.coefficients, warnings, report.history)
        }
        Method::Pmm => {
            let s = pmm_l2(scenario, &baseline)?;
            (s.coefficients, s.warnings, Vec::new())
        }
        Method::Wfs => {
            let s = wfs_25d(scenario, &baseline)?;
            (s.coefficients, s.warnings, Vec::new())
        }
        Method::NfcHoa => {
            let s = nfc_hoa_25d(scenario, &baseline)?;
            (s.coefficients, s.warnings, Vec::new())
        }
    };
    let t = &prep.config.thresholds;
    let lookup = build_itd_lookup(
        provider,
        scenario.source.f_star,
        t.lookup_radius,
        t.lookup_azimuths,
        t.ild_gate_db,
        &scenario.medium,
    )?;
    let report =
        evaluate_method(method.name(), &coefficients, scenario, provider, &lookup, &prep.config.eval_thresholds())?;
    Ok(MethodOutput { method, coefficients, warnings, history, report })
}

/// Writes every artifact of one method into `out`.
pub fn write_outputs(prep: &Prepared, out: &MethodOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let scenario = &prep.scenario;
    let f = scenario.source.f_star;
    let coefficients = CoefficientsFile {
        method: out.method.name().into(),
        f_star: f,
        coefficients: out
            .coefficients
            .as_slice()
            .iter()
            .zip(scenario.array.positions())
            .enumerate()
            .map(|(index, (a, p))| CoefficientRow {
                index,
                x: p.x,
                y: p.y,
                re: a.re,
                im: a.im,
                magnitude: a.norm(),
                phase_deg: a.arg().to_degrees(),
            })
            .collect(),
        warnings: out.warnings.clone(),
    };
    formats::write_json(&dir.join("coefficients.json"), &coefficients)?;

    let mut field = csv::Writer::from_path(dir.join("field.csv"))?;
    field.write_record(["x", "y", "u_re", "u_im", "u0_re", "u0_im"])?;
    for atom in scenario.grid.atoms() {
        let u = synthesize_field(&out.coefficients, &scenario.array, f, atom.position, &scenario.medium)?;
        let u0 = scenario.target_field(atom.position)?;
        field.write_record([atom.position.x, atom.position.y, u.re, u.im, u0.re, u0.im].map(|v| v.to_string()))?;
    }
    field.flush()?;

    let mut th = csv::Writer::from_path(dir.join("thresholds.csv"))?;
    th.write_record(["x", "y", "td", "tl"])?;
    for a in &out.report.atoms {
        th.write_record([a.position.x, a.position.y, a.td, a.tl].map(|v| v.to_string()))?;
    }
    th.flush()?;

    formats::write_atoms_csv(&dir.join("atoms.csv"), &out.report.atoms)?;
    formats::write_history_csv(&dir.join("history.csv"), &out.history)?;
    let t = &prep.config.thresholds;
    formats::write_json(&dir.join("eval_report.json"), &EvalReportJson::new(&out.report, t.lss_deg, t.css_db))?;
    Ok(())
}

pub fn run(config: &ScenarioConfig, method: Method, dir: &Path) -> Result<MethodOutput> {
    let prep = Prepared::new(config)?;
    let out = solve(&prep, method)?;
    write_outputs(&prep, &out, dir)?;
    Ok(out)
}

pub fn comparison_row(out: &MethodOutput, focus: bool) -> ComparisonRow {
    let r = &out.report;
    ComparisonRow {
        method: out.method.name().into(),
        lss: r.overall.lss,
        css_proxy: r.overall.css,
        internal_sweet: r.overall.sweet,
        lss_dh: if focus { r.divergent.as_ref().map(|d| d.lss) } else { None },
    }
}

/// Runs the methods in parallel; rows keep the requested order.
pub fn compare(config: &ScenarioConfig, methods: &[Method], dir: &Path) -> Result<Vec<ComparisonRow>> {
    if methods.len() < 2 {
        bail!("compare needs at least two methods");
    }
    let prep = Prepared::new(config)?;
    let outputs: Vec<MethodOutput> = methods.par_iter().map(|&m| solve(&prep, m)).collect::<Result<_>>()?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let focus = prep.scenario.is_focus_source();
    let mut rows = Vec::with_capacity(outputs.len());
    for (i, out) in outputs.iter().enumerate() {
        // a method listed twice gets a numbered directory
        let name =
            if methods[..i].contains(&out.method) { format!("{}-{i}", out.method) } else { out.method.to_string() };
        write_outputs(&prep, out, &dir.join(name))?;
        rows.push(comparison_row(out, focus));
    }
    formats::write_comparison_csv(&dir.join("comparison.csv"), &rows, focus)?;
    formats::write_json(&dir.join("comparison.json"), &rows)?;
    Ok(rows)
}
