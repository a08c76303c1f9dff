use std::fs;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_polaritonmd"));
    c.env_remove("POLARITONMD_OUT");
    c
}

fn short_config(dir: &std::path::Path) -> std::path::PathBuf {
    let path = dir.join("quick.toml");
    fs::write(
        &path,
        "[system]\npreset = \"co2\"\n\n[[cavity]]\nomega_cm1 = 2430.0\nlambda_au = 0.05\npolarization = [1.0, 0.0, 0.0]\n\n\
         [initialization]\nkick_species = \"C\"\nkick_angstrom = [0.01, 0.0, 0.0]\n\n[integration]\nt_end_ps = 0.4\n",
    )
    .unwrap();
    path
}

#[test]
fn run_and_reanalyse() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path());
    let out = dir.path().join("out");
    let o = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--seed-override", "5", "--threads", "1"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("energy drift"), "{stdout}");
    let traj = out.join("quick.traj.dat");
    assert!(fs::read_to_string(&traj).unwrap().contains("# seed: 5"));

    let re = dir.path().join("re");
    let o = bin().arg("spectrum").arg(&traj).arg("--out").arg(&re).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(re.join("quick.spectrum.dat").exists());
    assert!(re.join("quick.peaks.dat").exists());
}

#[test]
fn env_var_sets_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path());
    let o = bin()
        .args(["modes", "--config"])
        .arg(&cfg)
        .env("POLARITONMD_OUT", dir.path().join("root"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("root/quick/quick.modes.dat").exists());
    assert!(String::from_utf8_lossy(&o.stdout).contains("polariton pair"));
}

#[test]
fn bad_config_fails_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(
        &path,
        "[system]\npreset = \"co2\"\n[integration]\ndt_fs = 0.1\nlength_ps = 3\n",
    )
    .unwrap();
    let o = bin()
        .args(["run", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("length_ps") && err.contains("line 5"), "{err}");

    let o = bin().args(["run", "--config", "no_such_recipe"]).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("fig1_lambda005"));
}

#[test]
fn lists_recipes() {
    let o = bin().arg("recipes").output().unwrap();
    let s = String::from_utf8_lossy(&o.stdout);
    for name in [
        "fig1_lambda002",
        "fig1_lambda005",
        "fig1_lambda010",
        "fig2_kick_x",
        "fig3_spinning",
    ] {
        assert!(s.contains(name));
    }
}
