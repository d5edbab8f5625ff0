use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

use tripod_vortex::beam::initial_fields;
use tripod_vortex::propagation::q_factor;
use tripod_vortex_cli::config::{preset, Axis, ConfigSource, GridSpec, ScenarioConfig};
use tripod_vortex_cli::run::{run_all, run_polarization, run_propagation, run_response_map};
use tripod_vortex_cli::validate::Suite;

fn small(name: &str, dir: &Path) -> ScenarioConfig {
    let mut cfg = preset(name).unwrap();
    cfg.phi_list = Axis::linspace(0.0, std::f64::consts::TAU, 16, false);
    cfg.delta_list = Axis::linspace(-2.0, 2.0, 9, true);
    cfg.grid = GridSpec::square(2.0, 9);
    if let Some(sweep) = cfg.sweep.as_mut() {
        sweep.z = Axis::linspace(0.0, 400.0, 5, true);
        sweep.delta = Axis::linspace(-0.2, 0.2, 3, true);
        sweep.grid = Some(GridSpec::square(2.0, 7));
    }
    cfg.output.dir = dir.to_path_buf();
    cfg
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], key: &str) -> usize {
    header.iter().position(|h| h == key).unwrap()
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect()
}

#[test]
fn flipped_medium_response_is_caught() {
    let suite = Suite {
        q: |delta, delta_c, omega_c, atom, zeta| {
            q_factor(delta, delta_c, omega_c, atom, zeta).map(|q| -q)
        },
        ..Suite::default()
    };
    let report = suite.run();
    assert!(report.checks.len() >= 20);
    assert!(!report.get("bright mode decays").unwrap().passed);
    assert!(report.get("dark mode invariance").unwrap().passed);
}

#[test]
fn empty_phi_list_is_rejected() {
    let source = ConfigSource {
        preset: Some("fig2".into()),
        sets: vec!["phi_list=[]".into()],
        ..Default::default()
    };
    let err = source.resolve().unwrap_err();
    assert!(format!("{err:#}").contains("phi_list"), "{err:#}");
}

#[test]
fn entrance_slice_reproduces_initial_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small("fig3a", tmp.path());
    cfg.z_list = vec![0.0];
    let report = run_propagation(&cfg).unwrap();
    assert_eq!(report.files.len(), 1);
    let (header, rows) = read_csv(&report.dir.join(&report.files[0].file));
    let (x, y) = (column(&header, "x"), column(&header, "y"));
    let (ir, il) = (column(&header, "omega_r_sq"), column(&header, "omega_l_sq"));
    for row in &rows {
        let px: f64 = row[x].parse().unwrap();
        let py: f64 = row[y].parse().unwrap();
        let f = initial_fields(px.hypot(py), py.atan2(px), &cfg.beam).unwrap();
        let close = |got: &str, want: f64| {
            (got.parse::<f64>().unwrap() - want).abs() <= 1e-14 * want.max(f64::MIN_POSITIVE)
        };
        assert!(close(&row[ir], f.omega_r.norm_sqr()));
        assert!(close(&row[il], f.omega_l.norm_sqr()));
    }
}

#[test]
fn total_is_sum_of_components() {
    let tmp = tempfile::tempdir().unwrap();
    let report = run_propagation(&small("fig3b", tmp.path())).unwrap();
    assert_eq!(report.files.len(), 5);
    for f in &report.files {
        let (header, rows) = read_csv(&report.dir.join(&f.file));
        let (ir, il, t) = (
            column(&header, "omega_r_sq"),
            column(&header, "omega_l_sq"),
            column(&header, "total"),
        );
        for row in &rows {
            let v = |i: usize| row[i].parse::<f64>().unwrap();
            assert!((v(t) - v(ir) - v(il)).abs() <= 1e-14 * v(t).max(1.0));
        }
    }
}

#[test]
fn sidecar_records_hash_and_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small("fig2", tmp.path());
    let report = run_response_map(&cfg).unwrap();
    let sidecar: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&report.sidecar).unwrap()).unwrap();
    assert_eq!(sidecar["command"], "response-map");
    assert_eq!(sidecar["config_hash"], cfg.hash().as_str());
    assert_eq!(sidecar["files"].as_array().unwrap().len(), 1);
    assert_eq!(sidecar["files"][0]["rows"], 16 * 9);

    let (header, rows) = read_csv(&report.dir.join(&report.files[0].file));
    assert_eq!(header.last().unwrap(), "config_hash");
    assert!(rows.iter().all(|r| r.last().unwrap() == &cfg.hash()));

    let elsewhere = small("fig2", &tmp.path().join("moved"));
    assert_eq!(elsewhere.hash(), cfg.hash());
}

#[test]
fn texture_rows_carry_class_and_theta() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small("fig4b", tmp.path());
    let report = run_polarization(&cfg).unwrap();
    let textures: Vec<_> = report
        .files
        .iter()
        .filter(|f| f.kind == "texture")
        .collect();
    assert_eq!(textures.len(), cfg.thetas.len() * cfg.z_list.len());
    let sweeps = report.files.iter().filter(|f| f.kind == "sweep").count();
    assert_eq!(sweeps, cfg.thetas.len());
    for f in textures {
        let (header, rows) = read_csv(&report.dir.join(&f.file));
        let (class, theta) = (column(&header, "class"), column(&header, "theta"));
        for row in &rows {
            assert!(
                ["linear", "elliptical", "circular", "undefined"].contains(&row[class].as_str())
            );
            assert_eq!(row[theta].parse::<f64>().unwrap(), f.theta.unwrap());
        }
    }
}

#[test]
fn output_is_independent_of_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (k, threads) in [8, 1, 8].into_iter().enumerate() {
        let dir = tmp.path().join(k.to_string());
        let cfg = small("fig5", &dir);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| run_all(&cfg)).unwrap();
        outputs.push(csv_files(&dir));
    }
    assert!(!outputs[0].is_empty());
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn binary_writes_files_and_reports_bad_config() {
    let bin = env!("CARGO_BIN_EXE_tripod-vortex");
    let tmp = tempfile::tempdir().unwrap();
    let ok = Command::new(bin)
        .args([
            "response-map",
            "--preset",
            "fig2",
            "--set",
            "phi_list.count=8",
            "--set",
            "delta_list.count=5",
            "--out",
        ])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(
        ok.status.success(),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    let (_, rows) = read_csv(&tmp.path().join("fig2_response_map.csv"));
    assert_eq!(rows.len(), 40);
    assert!(tmp.path().join("fig2_response_map.json").exists());

    let bad = Command::new(bin)
        .args([
            "propagate",
            "--preset",
            "fig3a",
            "--set",
            "z_list=[-1]",
            "--out",
        ])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("z_list"));

    let presets = Command::new(bin).arg("presets").output().unwrap();
    assert!(presets.status.success());
    assert_eq!(String::from_utf8_lossy(&presets.stdout).lines().count(), 5);
}
