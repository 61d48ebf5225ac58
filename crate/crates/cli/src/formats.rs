//! HRIR and loudness tables, and the CSV/JSON artifacts of a run.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sweetspot_core::acoustics::{HrirDataset, HrirEntry};
use sweetspot_core::evaluation::{AtomEval, EvalReport, Fractions};
use sweetspot_core::optimizer::HistoryRow;
use sweetspot_core::psychoacoustics::LoudnessModel;

pub fn read_loudness_csv(path: &Path) -> Result<LoudnessModel> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["freq_hz", "ldl_db_spl"] {
        bail!("{}: expected header `freq_hz,ldl_db_spl`", path.display());
    }
    let mut knots = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |k: usize| -> Result<f64> {
            rec[k].trim().parse().with_context(|| format!("{}: line {}: bad number", path.display(), i + 2))
        };
        knots.push((parse(0)?, parse(1)?));
    }
    LoudnessModel::new(&knots).map_err(|e| anyhow!("{}: {e}", path.display()))
}

pub fn write_loudness_csv(path: &Path, model: &LoudnessModel) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["freq_hz", "ldl_db_spl"])?;
    let (f, db) = model.knots();
    for (f, db) in f.iter().zip(db) {
        w.write_record([f.to_string(), db.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per (azimuth, channel): `azimuth_deg,channel,sample_0..,sample_rate_hz,radius_m`,
/// channel `left` or `right`.
pub fn read_hrir_csv(path: &Path) -> Result<HrirDataset> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    let n = headers.len();
    if n < 5
        || &headers[0] != "azimuth_deg"
        || &headers[1] != "channel"
        || &headers[n - 2] != "sample_rate_hz"
        || &headers[n - 1] != "radius_m"
    {
        bail!("{}: expected header `azimuth_deg,channel,sample_0,..,sample_rate_hz,radius_m`", path.display());
    }
    let taps = n - 4;
    let mut by_az: BTreeMap<u64, (f64, Option<Vec<f64>>, Option<Vec<f64>>)> = BTreeMap::new();
    let mut meta: Option<(f64, f64)> = None;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .trim()
                .parse()
                .with_context(|| format!("{}: line {line}: bad number in column {}", path.display(), k + 1))
        };
        let az = num(0)?;
        let samples = (2..2 + taps).map(num).collect::<Result<Vec<_>>>()?;
        let m = (num(n - 2)?, num(n - 1)?);
        match meta {
            None => meta = Some(m),
            Some(prev) if prev != m => {
                bail!("{}: line {line}: sample rate/radius differ from earlier rows", path.display())
            }
            _ => {}
        }
        let slot = by_az.entry(az.to_bits()).or_insert((az, None, None));
        let target = match rec[1].trim() {
            "left" => &mut slot.1,
            "right" => &mut slot.2,
            other => bail!("{}: line {line}: unknown channel `{other}`", path.display()),
        };
        if target.replace(samples).is_some() {
            bail!("{}: line {line}: duplicate row", path.display());
        }
    }
    let (fs, radius) = meta.ok_or_else(|| anyhow!("{}: no data rows", path.display()))?;
    let entries = by_az
        .into_values()
        .map(|(az, l, r)| match (l, r) {
            (Some(left), Some(right)) => Ok(HrirEntry { azimuth_deg: az, left, right }),
            _ => Err(anyhow!("{}: azimuth {az} lacks one channel", path.display())),
        })
        .collect::<Result<Vec<_>>>()?;
    HrirDataset::new(fs, radius, entries).map_err(|e| anyhow!("{}: {e}", path.display()))
}

pub fn write_hrir_csv(path: &Path, data: &HrirDataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let taps = data.response_len();
    let mut header = vec!["azimuth_deg".to_string(), "channel".to_string()];
    header.extend((0..taps).map(|i| format!("sample_{i}")));
    header.extend(["sample_rate_hz".to_string(), "radius_m".to_string()]);
    w.write_record(&header)?;
    for e in data.entries() {
        for (name, h) in [("left", &e.left), ("right", &e.right)] {
            let mut row = vec![e.azimuth_deg.to_string(), name.to_string()];
            row.extend(h.iter().map(|v| v.to_string()));
            row.extend([data.sample_rate().to_string(), data.radius().to_string()]);
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub index: usize,
    pub x: f64,
    pub y: f64,
    pub re: f64,
    pub im: f64,
    pub magnitude: f64,
    pub phase_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientsFile {
    pub method: String,
    pub f_star: f64,
    pub coefficients: Vec<CoefficientRow>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionsJson {
    pub lss: f64,
    pub css_proxy: f64,
    pub internal_sweet: f64,
    pub atoms: usize,
    pub weight: f64,
}

impl From<&Fractions> for FractionsJson {
    fn from(f: &Fractions) -> Self {
        FractionsJson { lss: f.lss, css_proxy: f.css, internal_sweet: f.sweet, atoms: f.atoms, weight: f.weight }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReportJson {
    pub method: String,
    pub coloration_metric: String,
    pub lss_deg: f64,
    pub css_db: f64,
    pub atoms: usize,
    pub invalid_atoms: usize,
    pub overall: FractionsJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divergent_halfspace: Option<FractionsJson>,
    pub max_tl: f64,
}

impl EvalReportJson {
    pub fn new(report: &EvalReport, lss_deg: f64, css_db: f64) -> Self {
        EvalReportJson {
            method: report.method.clone(),
            coloration_metric: "coloration-proxy(dB)".into(),
            lss_deg,
            css_db,
            atoms: report.atoms.len(),
            invalid_atoms: report.invalid_atoms,
            overall: (&report.overall).into(),
            divergent_halfspace: report.divergent.as_ref().map(Into::into),
            max_tl: report.atoms.iter().map(|a| a.tl).fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn write_history_csv(path: &Path, rows: &[HistoryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["stage", "outer", "inner", "objective", "feasibility", "active_count"])?;
    for r in rows {
        w.write_record([
            r.stage.to_string(),
            r.outer.to_string(),
            r.inner.to_string(),
            r.objective.to_string(),
            r.feasibility.to_string(),
            r.active_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// `x,y,td,tl,az_err_deg,color_db,in_lss,in_css,in_sweet,halfspace`; missing
/// azimuth errors are left empty, `halfspace` is `divergent` or `convergent`.
pub fn write_atoms_csv(path: &Path, atoms: &[AtomEval]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "y", "td", "tl", "az_err_deg", "color_db", "in_lss", "in_css", "in_sweet", "halfspace"])?;
    for a in atoms {
        w.write_record([
            a.position.x.to_string(),
            a.position.y.to_string(),
            a.td.to_string(),
            a.tl.to_string(),
            a.az_err_deg.map(|v| v.to_string()).unwrap_or_default(),
            a.color_db.to_string(),
            flag(a.in_lss).to_string(),
            flag(a.in_css).to_string(),
            flag(a.in_sweet).to_string(),
            if a.divergent { "divergent" } else { "convergent" }.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    pub lss: f64,
    pub css_proxy: f64,
    pub internal_sweet: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lss_dh: Option<f64>,
}

pub fn write_comparison_csv(path: &Path, rows: &[ComparisonRow], focus: bool) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["method", "lss", "css_proxy", "internal_sweet"];
    if focus {
        header.push("lss_dh");
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.method.clone(), r.lss.to_string(), r.css_proxy.to_string(), r.internal_sweet.to_string()];
        if focus {
            rec.push(r.lss_dh.map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
