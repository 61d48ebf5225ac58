use std::fs;
use std::path::Path;
use std::process::Command;

use sweetspot_cli::config::{ArrayConfig, ConfigError, ScenarioConfig};
use sweetspot_cli::formats::{read_hrir_csv, read_loudness_csv, write_hrir_csv, write_loudness_csv};
use sweetspot_cli::runner::{compare, run, Method};
use sweetspot_core::acoustics::{HrirDataset, HrirEntry};
use sweetspot_core::psychoacoustics::LoudnessModel;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sweetspot"))
}

fn small(mut cfg: ScenarioConfig) -> ScenarioConfig {
    cfg.region.spacing = 0.6;
    cfg.solver.max_inner_iters = Some(400);
    cfg.solver.n_eps = Some(2);
    cfg.solver.n_max = Some(2);
    cfg
}

fn write_config(dir: &Path, cfg: &ScenarioConfig) -> std::path::PathBuf {
    let p = dir.join("scenario.json");
    fs::write(&p, cfg.to_json()).unwrap();
    p
}

#[test]
fn config_round_trips_through_json() {
    for cfg in [ScenarioConfig::near_field(0.25), ScenarioConfig::focus(0.1)] {
        let back = ScenarioConfig::from_json(&cfg.to_json(), "mem").unwrap();
        assert_eq!(back, cfg);
    }
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["near_field.json", "focus_source.json"] {
        ScenarioConfig::load(&shipped.join(name)).unwrap();
    }
}

#[test]
fn config_errors_point_at_a_line() {
    let text = "{\n  \"name\": \"x\",\n  \"array\": { \"circle\": { \"radius\": 2.5, \"count\": 20 } },\n  \"region\": { \"radius\": 2.0, \"spacing\": -0.25 },\n  \"source\": { \"position\": [0.0, 5.0], \"level_db\": 68.0, \"f_star\": 343.0 }\n}\n";
    match ScenarioConfig::from_json(text, "bad.json") {
        Err(e @ ConfigError::Invalid { line: 4, .. }) => assert!(e.to_string().contains("bad.json: line 4")),
        other => panic!("{other:?}"),
    }
    let typo = text.replace("\"level_db\"", "\"level\"");
    assert!(matches!(ScenarioConfig::from_json(&typo, "t.json"), Err(ConfigError::Syntax { line: 5, .. })));
    let broken = text.replace("68.0,", "68.0,,");
    assert!(matches!(ScenarioConfig::from_json(&broken, "t.json"), Err(ConfigError::Syntax { line: 5, .. })));
}

#[test]
fn loudness_table_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("ldl.csv");
    let m = LoudnessModel::new(&[(20.0, 110.0), (250.0, 101.5), (1000.0, 100.0), (8000.0, 104.25)]).unwrap();
    write_loudness_csv(&p, &m).unwrap();
    let back = read_loudness_csv(&p).unwrap();
    assert_eq!(back.knots(), m.knots());
    fs::write(&p, "frequency_hz,ldl_db\n100,oops\n").unwrap();
    assert!(read_loudness_csv(&p).is_err());
}

#[test]
fn hrir_table_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("hrir.csv");
    let entries = (0..8)
        .map(|i| HrirEntry {
            azimuth_deg: -180.0 + 45.0 * i as f64,
            left: (0..16).map(|t| ((i * 16 + t) as f64 * 0.37).sin()).collect(),
            right: (0..16).map(|t| ((i * 16 + t) as f64 * 0.11).cos() * 0.5).collect(),
        })
        .collect();
    let data = HrirDataset::new(48_000.0, 1.5, entries).unwrap();
    write_hrir_csv(&p, &data).unwrap();
    assert_eq!(read_hrir_csv(&p).unwrap(), data);
}

#[test]
fn single_co_located_speaker_pmm_is_the_source_gain() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(ScenarioConfig::near_field(0.5));
    cfg.array = ArrayConfig::Positions { points: vec![[0.0, 5.0]], center: [0.0, 0.0] };
    cfg.baselines.lambda_ridge = Some(0.0);
    let out = run(&cfg, Method::Pmm, dir.path()).unwrap();
    let gain = cfg.source_spec().gain();
    assert!((out.coefficients.0[0] - gain).norm() < 1e-12 * gain.norm());
    for f in ["coefficients.json", "field.csv", "thresholds.csv", "atoms.csv", "history.csv", "eval_report.json"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
}

#[test]
fn duplicate_methods_give_identical_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(ScenarioConfig::near_field(0.5));
    let rows = compare(&cfg, &[Method::Pmm, Method::Wfs, Method::Pmm], dir.path()).unwrap();
    assert_eq!(rows[0], rows[2]);
    assert!(dir.path().join("pmm-2").is_dir());
    let header = fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    assert!(header.starts_with("method,lss,css_proxy,internal_sweet\n"));
}

#[test]
fn halfspace_column_only_for_focus_sources() {
    let dir = tempfile::tempdir().unwrap();
    let rows = compare(&small(ScenarioConfig::focus(0.5)), &[Method::Pmm, Method::NfcHoa], dir.path()).unwrap();
    assert!(rows.iter().all(|r| r.lss_dh.is_some()));
    let csv = fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    assert!(csv.starts_with("method,lss,css_proxy,internal_sweet,lss_dh\n"));
    let atoms = fs::read_to_string(dir.path().join("pmm/atoms.csv")).unwrap();
    assert!(atoms.contains(",convergent") && atoms.contains(",divergent"));
}

#[test]
fn binary_runs_and_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write_config(dir.path(), &small(ScenarioConfig::near_field(0.5)));
    let out = dir.path().join("out");
    let ok = bin()
        .args(["run", "--method", "sweet-relu", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("sweet-relu: lss "));
    let history = fs::read_to_string(out.join("history.csv")).unwrap();
    assert!(history.starts_with("stage,outer,inner,objective,feasibility,active_count\n"));

    let unknown =
        bin().args(["run", "--method", "vbap", "--config"]).arg(&cfg_path).arg("--out").arg(&out).output().unwrap();
    assert!(!unknown.status.success());

    fs::write(&cfg_path, "{ \"name\": 3 }").unwrap();
    let bad = bin().args(["grid", "--config"]).arg(&cfg_path).output().unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 1"));
}

#[test]
fn fine_grid_size() {
    let n = ScenarioConfig::near_field(0.09).grid().unwrap().len() as f64;
    assert!((n - 2348.0).abs() <= 0.05 * 2348.0, "{n}");
}
