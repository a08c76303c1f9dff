//! Self-describing text formats. Every file starts with `#` header lines
//! naming the code version, seed, config hash and units; floats are written
//! in shortest round-trip form so re-reading is exact.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use polaritonmd_core::units::{au_to_fs, fs_to_au};
use polaritonmd_core::{EnergyDrift, NormalModeSet, PolaritonModel, Trajectory, Vec3};

use crate::analysis::{Peak, Spectrum};
use crate::commands::ScanRow;
use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance written at the top of every output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub kind: &'static str,
    pub label: String,
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    fn header(&self) -> String {
        format!(
            "# polaritonmd {VERSION} {}\n# run: {}\n# seed: {}\n# config_sha256: {}\n",
            self.kind, self.label, self.seed, self.config_hash
        )
    }

    fn with_kind(&self, kind: &'static str) -> Self {
        Self { kind, ..self.clone() }
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

const ENERGY_COLUMNS: [&str; 5] = ["e_kin_ha", "e_ff_ha", "e_ph_kin_ha", "e_ph_pot_ha", "e_total_ha"];

pub fn format_trajectory(traj: &Trajectory, prov: &Provenance) -> String {
    let m = traj.template();
    let n_modes = traj.initial_modes().len();
    let mut out = prov.with_kind("trajectory").header();
    let labels: Vec<&str> = (0..m.len()).map(|i| m.label(i)).collect();
    let _ = writeln!(out, "# atoms: {}", labels.join(" "));
    let _ = writeln!(out, "# modes: {n_modes}");
    let _ = writeln!(out, "# sample_interval_fs: {}", au_to_fs(traj.sample_interval()));
    let _ = writeln!(
        out,
        "# units: time fs; positions bohr; photon q, p atomic units; dipole e*bohr; energies Ha"
    );
    let mut cols = vec!["t_fs".to_string()];
    for i in 0..m.len() {
        for c in ["x", "y", "z"] {
            cols.push(format!("{c}{i}_bohr"));
        }
    }
    for a in 0..n_modes {
        cols.push(format!("q{a}_au"));
        cols.push(format!("p{a}_au"));
    }
    cols.extend(["mu_x_ebohr", "mu_y_ebohr", "mu_z_ebohr"].map(String::from));
    cols.extend(ENERGY_COLUMNS.map(String::from));
    let _ = writeln!(out, "# columns: {}", cols.join(" "));
    for f in traj.frames() {
        let _ = write!(out, "{:e}", au_to_fs(f.time));
        for r in &f.positions {
            let _ = write!(out, " {:e} {:e} {:e}", r.x, r.y, r.z);
        }
        for (q, p) in &f.photons {
            let _ = write!(out, " {q:e} {p:e}");
        }
        let e = &f.energy;
        let _ = writeln!(
            out,
            " {:e} {:e} {:e} {:e} {:e} {:e} {:e} {:e}",
            f.dipole.x,
            f.dipole.y,
            f.dipole.z,
            e.kinetic_matter,
            e.potential_ff,
            e.photon_kinetic,
            e.photon_potential,
            e.total
        );
    }
    out
}

/// Columns of a trajectory file needed for re-analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFile {
    pub label: String,
    pub seed: u64,
    pub config_hash: String,
    /// atomic time units
    pub times: Vec<f64>,
    pub dipoles: Vec<Vec3>,
    pub photon_q: Vec<Vec<f64>>,
    pub total_energy: Vec<f64>,
}

pub fn read_trajectory(path: &Path) -> Result<TrajectoryFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trajectory(&text, path)
}

pub fn parse_trajectory(text: &str, path: &Path) -> Result<TrajectoryFile> {
    let fail = |line: usize, message: String| Error::Format {
        path: PathBuf::from(path),
        line,
        message,
    };
    let mut label = String::new();
    let mut seed = None;
    let mut config_hash = String::new();
    let mut columns: Option<Vec<String>> = None;
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if let Some(h) = line.strip_prefix('#') {
            let h = h.trim();
            if let Some(v) = h.strip_prefix("run:") {
                label = v.trim().to_string();
            } else if let Some(v) = h.strip_prefix("seed:") {
                seed = Some(
                    v.trim()
                        .parse::<u64>()
                        .map_err(|e| fail(lineno, format!("bad seed: {e}")))?,
                );
            } else if let Some(v) = h.strip_prefix("config_sha256:") {
                config_hash = v.trim().to_string();
            } else if let Some(v) = h.strip_prefix("columns:") {
                columns = Some(v.split_whitespace().map(String::from).collect());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| fail(lineno, format!("bad number `{t}`: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((lineno, values));
    }
    let columns = columns.ok_or_else(|| fail(0, "missing `# columns:` header".into()))?;
    let col = |name: &str| {
        columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| fail(0, format!("missing column `{name}`")))
    };
    let t = col("t_fs")?;
    let mu = [col("mu_x_ebohr")?, col("mu_y_ebohr")?, col("mu_z_ebohr")?];
    let e = col("e_total_ha")?;
    let q_cols: Vec<usize> = (0..)
        .map_while(|a| columns.iter().position(|c| *c == format!("q{a}_au")))
        .collect();
    let mut out = TrajectoryFile {
        label,
        seed: seed.ok_or_else(|| fail(0, "missing `# seed:` header".into()))?,
        config_hash,
        times: Vec::with_capacity(rows.len()),
        dipoles: Vec::with_capacity(rows.len()),
        photon_q: vec![Vec::with_capacity(rows.len()); q_cols.len()],
        total_energy: Vec::with_capacity(rows.len()),
    };
    for (lineno, r) in rows {
        if r.len() != columns.len() {
            return Err(fail(
                lineno,
                format!("expected {} columns, found {}", columns.len(), r.len()),
            ));
        }
        out.times.push(fs_to_au(r[t]));
        out.dipoles.push(Vec3::new(r[mu[0]], r[mu[1]], r[mu[2]]));
        for (a, &c) in q_cols.iter().enumerate() {
            out.photon_q[a].push(r[c]);
        }
        out.total_energy.push(r[e]);
    }
    Ok(out)
}

pub fn format_spectrum(s: &Spectrum, components: &str, prov: &Provenance) -> String {
    let mut out = prov.with_kind("spectrum").header();
    let _ = writeln!(out, "# units: wavenumber cm^-1; intensity normalized to max = 1");
    let _ = writeln!(
        out,
        "# window: {}; pad_factor: {}; components: {components}; samples: {}; sample_interval_fs: {}",
        s.window,
        s.pad_factor,
        s.n_samples,
        au_to_fs(s.sample_interval)
    );
    let _ = writeln!(
        out,
        "# native_resolution_cm1: {}; grid_spacing_cm1: {}",
        s.resolution(),
        s.bin_width()
    );
    let _ = writeln!(out, "# columns: wavenumber_cm1 intensity");
    for (w, y) in s.wavenumbers.iter().zip(s.normalized()) {
        let _ = writeln!(out, "{w:e} {y:e}");
    }
    out
}

/// Peak list plus the splitting estimate, if one was resolved.
pub fn format_peaks(
    peaks: &[Peak],
    band: Option<[f64; 2]>,
    min_prominence: f64,
    splitting: &std::result::Result<f64, String>,
    prov: &Provenance,
) -> String {
    let mut out = prov.with_kind("peaks").header();
    let _ = writeln!(
        out,
        "# units: wavenumber cm^-1; height and prominence relative to the band maximum"
    );
    match band {
        Some([lo, hi]) => {
            let _ = writeln!(out, "# band_cm1: {lo} {hi}");
        }
        None => {
            let _ = writeln!(out, "# band_cm1: full");
        }
    }
    let _ = writeln!(out, "# min_prominence: {min_prominence}");
    match splitting {
        Ok(w) => {
            let _ = writeln!(out, "# rabi_splitting_cm1: {w}");
        }
        Err(msg) => {
            let _ = writeln!(out, "# rabi_splitting_cm1: none ({msg})");
        }
    }
    let _ = writeln!(out, "# columns: wavenumber_cm1 height prominence");
    for p in peaks {
        let _ = writeln!(out, "{:e} {:e} {:e}", p.wavenumber, p.height, p.prominence);
    }
    out
}

pub fn format_coupling(times: &[f64], projection: &[f64], orientation: Option<&[f64]>, prov: &Provenance) -> String {
    let mut out = prov.with_kind("effective-coupling").header();
    let _ = writeln!(out, "# units: time fs; projection e*bohr; orientation factor a.u.");
    let _ = writeln!(out, "# projection = e . mu(t); orientation = |lambda . molecular axis|");
    let _ = writeln!(
        out,
        "# columns: t_fs projection_ebohr{}",
        if orientation.is_some() { " orientation_au" } else { "" }
    );
    for (i, (t, p)) in times.iter().zip(projection).enumerate() {
        let _ = write!(out, "{:e} {p:e}", au_to_fs(*t));
        if let Some(o) = orientation {
            let _ = write!(out, " {:e}", o[i]);
        }
        out.push('\n');
    }
    out
}

/// Key-value run summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub frames: usize,
    pub steps: usize,
    pub dt_fs: f64,
    pub drift: EnergyDrift,
    pub peak_count: usize,
    pub splitting: std::result::Result<f64, String>,
    pub oracle_splitting: Option<f64>,
    pub orientation_range: Option<(f64, f64)>,
    pub notices: Vec<String>,
}

pub fn format_summary(s: &Summary, prov: &Provenance) -> String {
    let mut out = prov.with_kind("summary").header();
    let _ = writeln!(out, "# units: energies Ha; wavenumbers cm^-1; time fs");
    let _ = writeln!(out, "frames = {}", s.frames);
    let _ = writeln!(out, "steps = {}", s.steps);
    let _ = writeln!(out, "dt_fs = {}", s.dt_fs);
    let d = &s.drift;
    let _ = writeln!(out, "energy_initial_ha = {:e}", d.initial);
    let _ = writeln!(out, "energy_max_abs_deviation_ha = {:e}", d.max_abs_deviation);
    let _ = writeln!(out, "energy_max_relative_deviation = {:e}", d.max_relative_deviation);
    let _ = writeln!(out, "energy_secular_drift_ha = {:e}", d.secular_drift);
    let _ = writeln!(out, "energy_relative_secular_drift = {:e}", d.relative_secular_drift);
    let _ = writeln!(out, "peaks = {}", s.peak_count);
    match &s.splitting {
        Ok(w) => {
            let _ = writeln!(out, "rabi_splitting_cm1 = {w}");
        }
        Err(msg) => {
            let _ = writeln!(out, "rabi_splitting_cm1 = none ({msg})");
        }
    }
    if let Some(w) = s.oracle_splitting {
        let _ = writeln!(out, "rabi_splitting_oracle_cm1 = {w}");
    }
    if let Some((lo, hi)) = s.orientation_range {
        let _ = writeln!(out, "orientation_factor_min = {lo:e}");
        let _ = writeln!(out, "orientation_factor_max = {hi:e}");
    }
    for n in &s.notices {
        let _ = writeln!(out, "# notice: {n}");
    }
    out
}

pub fn format_modes(nm: &NormalModeSet, labels: &[&str], prov: &Provenance) -> String {
    let mut out = prov.with_kind("normal-modes").header();
    let _ = writeln!(
        out,
        "# units: frequency cm^-1 (negative = imaginary); ir_intensity (e^2/m_e); eigenvector mass-weighted"
    );
    let _ = writeln!(out, "# atoms: {}", labels.join(" "));
    let _ = writeln!(out, "# columns: index frequency_cm1 ir_intensity eigenvector[3N]");
    for k in 0..nm.len() {
        let _ = write!(out, "{k} {:.6} {:e}", nm.frequencies[k], nm.ir_intensity[k]);
        for i in 0..nm.vectors.nrows() {
            let _ = write!(out, " {:.8}", nm.vectors[(i, k)]);
        }
        out.push('\n');
    }
    out
}

pub fn format_polaritons(pm: &PolaritonModel, oracle_splitting: Option<f64>, prov: &Provenance) -> String {
    let mut out = prov.with_kind("polaritons").header();
    let _ = writeln!(out, "# units: frequency cm^-1; weights are squared-norm fractions");
    let _ = writeln!(out, "# matter_dimension: {}", pm.matter_dimension());
    let _ = writeln!(
        out,
        "# trace_uncoupled_ha2: {:e}; trace_self_energy_ha2: {:e}",
        pm.uncoupled_trace, pm.self_energy_trace
    );
    match oracle_splitting {
        Some(w) => {
            let _ = writeln!(out, "# rabi_splitting_cm1: {w}");
        }
        None => {
            let _ = writeln!(out, "# rabi_splitting_cm1: none");
        }
    }
    let _ = writeln!(
        out,
        "# columns: index frequency_cm1 matter_weight photon_weight eigenvector[3N+modes]"
    );
    for k in 0..pm.frequencies.len() {
        let w = pm.photon_weights[k];
        let _ = write!(out, "{k} {:.6} {:.6} {:.6}", pm.frequencies[k], 1.0 - w, w);
        for i in 0..pm.vectors.nrows() {
            let _ = write!(out, " {:.8}", pm.vectors[(i, k)]);
        }
        out.push('\n');
    }
    out
}

pub fn format_scan(rows: &[ScanRow], prov: &Provenance) -> String {
    let mut out = prov.header();
    let _ = writeln!(out, "# units: lambda a.u.; splittings cm^-1");
    let _ = writeln!(
        out,
        "# columns: lambda_au rabi_dynamics_cm1 rabi_oracle_cm1 relative_deviation flag"
    );
    let na = || "nan".to_string();
    for r in rows {
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            r.lambda,
            r.dynamics.as_ref().map(|w| w.to_string()).unwrap_or_else(|_| na()),
            r.oracle.map(|w| w.to_string()).unwrap_or_else(na),
            r.relative_deviation().map(|w| format!("{w:e}")).unwrap_or_else(na),
            r.flag().replace(' ', "_"),
        );
    }
    out
}
