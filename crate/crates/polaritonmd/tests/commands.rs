use std::fs;

use polaritonmd::commands::{cmd_modes, cmd_run, cmd_scan_lambda, cmd_spectrum, simulate};
use polaritonmd::config::{self, LoadedConfig, RunConfig};
use polaritonmd::Error;

fn loaded(text: &str, label: &str) -> LoadedConfig {
    LoadedConfig {
        config: RunConfig::parse(text).unwrap(),
        source: text.into(),
        label: label.into(),
    }
}

const SHORT: &str = r#"
[system]
preset = "co2"

[[cavity]]
omega_cm1 = 2430.0
lambda_au = 0.05
polarization = [1.0, 0.0, 0.0]

[initialization]
kick_species = "C"
kick_angstrom = [0.01, 0.01, 0.0]

[integration]
dt_fs = 0.1
t_end_ps = 0.5
stride = 10
"#;

#[test]
fn run_writes_self_describing_files() {
    let dir = tempfile::tempdir().unwrap();
    let l = loaded(SHORT, "short");
    let report = cmd_run(&l, dir.path(), Some(17)).unwrap();
    assert_eq!(report.files.len(), 5);
    for f in &report.files {
        let text = fs::read_to_string(f).unwrap();
        assert!(text.starts_with("# polaritonmd "), "{}", f.display());
        assert!(text.contains("# seed: 17"));
        assert!(text.contains(&format!("# config_sha256: {}", l.hash())));
        assert!(text.contains("# units:"));
    }
    let traj = fs::read_to_string(dir.path().join("short.traj.dat")).unwrap();
    assert!(traj.contains("# columns: t_fs x0_bohr y0_bohr z0_bohr"));
    assert!(traj.contains("q0_au p0_au mu_x_ebohr mu_y_ebohr mu_z_ebohr e_kin_ha"));
    assert_eq!(
        traj.lines().filter(|l| !l.starts_with('#')).count(),
        report.trajectory.len()
    );
    assert!(report.summary.drift.max_abs_deviation < 1e-6);
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let l = config::load("fig3_spinning").unwrap();
    let mut cfg = l.config.clone();
    cfg.integration.t_end_ps = 0.3;
    let l = LoadedConfig { config: cfg, ..l };
    let ra = cmd_run(&l, a.path(), None).unwrap();
    let rb = cmd_run(&l, b.path(), None).unwrap();
    for (fa, fb) in ra.files.iter().zip(&rb.files) {
        assert_eq!(fs::read(fa).unwrap(), fs::read(fb).unwrap(), "{}", fa.display());
    }
    let other = cmd_run(&l, b.path(), Some(8)).unwrap();
    assert_ne!(
        other.trajectory.frames()[0].velocities,
        ra.trajectory.frames()[0].velocities
    );
}

#[test]
fn zero_coupling_spectrum_matches_cavity_free_run() {
    let with_mode = RunConfig::parse(&SHORT.replace("lambda_au = 0.05", "lambda_au = 0.0")).unwrap();
    let mut bare = with_mode.clone();
    bare.cavity.clear();
    let sa = polaritonmd::analysis::ir_spectrum(
        &simulate(&with_mode, 0).unwrap(),
        &polaritonmd::analysis::Axis::ALL,
        Default::default(),
        4,
    )
    .unwrap();
    let sb = polaritonmd::analysis::ir_spectrum(
        &simulate(&bare, 0).unwrap(),
        &polaritonmd::analysis::Axis::ALL,
        Default::default(),
        4,
    )
    .unwrap();
    let (na, nb) = (sa.normalized(), sb.normalized());
    let worst = na.iter().zip(&nb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-12, "{worst:e}");
}

#[test]
fn unstable_step_reports_blow_up() {
    let cfg = RunConfig::parse(
        &SHORT
            .replace("dt_fs = 0.1", "dt_fs = 10.0")
            .replace("t_end_ps = 0.5", "t_end_ps = 20.0"),
    )
    .unwrap();
    match simulate(&cfg, 0) {
        Err(Error::BlowUp { step, time_fs, .. }) => {
            assert!(step > 0);
            assert!((time_fs - 10.0 * step as f64).abs() < 1e-6);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn spectrum_command_reproduces_run_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let l = loaded(SHORT, "short");
    let report = cmd_run(&l, dir.path(), None).unwrap();
    let out = dir.path().join("again");
    let again = cmd_spectrum(&dir.path().join("short.traj.dat"), Some(&l), &out).unwrap();
    assert_eq!(again.spectrum.intensity.len(), report.analysis.spectrum.intensity.len());
    for (a, b) in again
        .spectrum
        .normalized()
        .iter()
        .zip(report.analysis.spectrum.normalized())
    {
        assert!((a - b).abs() < 1e-9);
    }
    assert_eq!(
        fs::read_to_string(out.join("short.peaks.dat")).unwrap(),
        fs::read_to_string(dir.path().join("short.peaks.dat")).unwrap()
    );
}

#[test]
fn scan_flags_unresolved_rows_and_tracks_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let l = config::load("fig1_lambda005").unwrap();
    let rows = cmd_scan_lambda(&l, &[0.0, 0.05], dir.path(), None).unwrap();
    assert_eq!(rows[0].flag(), "no splitting");
    assert!(rows[0].relative_deviation().is_none());
    assert_eq!(rows[1].flag(), "ok");
    assert!(rows[1].relative_deviation().unwrap() < 0.05);
    let table = fs::read_to_string(dir.path().join("fig1_lambda005.scan.dat")).unwrap();
    let body: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body.len(), 2);
    assert!(body[0].ends_with("no_splitting"));
}

#[test]
fn modes_report_resonant_mixing() {
    let dir = tempfile::tempdir().unwrap();
    let l = config::load("fig1_lambda005").unwrap();
    let r = cmd_modes(&l, dir.path()).unwrap();
    let vib = r.modes.vibrational_frequencies(5.0);
    assert_eq!(vib.len(), 4);
    assert!((vib[0] - 654.0).abs() < 0.01 && (vib[1] - 654.0).abs() < 0.01);
    assert!((vib[3] - 2430.0).abs() < 0.01);
    let pm = r.polaritons.unwrap();
    let (lo, hi) = pm.polariton_pair(2430.0, 1e-3).unwrap();
    for f in [lo, hi] {
        let k = pm.frequencies.iter().position(|x| *x == f).unwrap();
        assert!((pm.photon_weights[k] - 0.5).abs() < 0.05, "{}", pm.photon_weights[k]);
    }
    let report = fs::read_to_string(dir.path().join("fig1_lambda005.polaritons.dat")).unwrap();
    assert!(report.contains("matter_weight photon_weight"));
    assert!(dir.path().join("fig1_lambda005.modes.dat").exists());
}

#[test]
fn uncoupled_polariton_list_adds_bare_cavity_line() {
    let dir = tempfile::tempdir().unwrap();
    let l = config::load("fig1_lambda000").unwrap();
    let r = cmd_modes(&l, dir.path()).unwrap();
    let pm = r.polaritons.unwrap();
    let mut expected: Vec<f64> = r.modes.vibrational_frequencies(5.0);
    expected.push(2430.0);
    expected.sort_by(f64::total_cmp);
    let got: Vec<f64> = pm.frequencies.iter().copied().filter(|f| f.abs() >= 5.0).collect();
    assert_eq!(got.len(), expected.len());
    for (g, e) in got.iter().zip(&expected) {
        assert!((g - e).abs() < 1e-6, "{g} vs {e}");
    }
}
