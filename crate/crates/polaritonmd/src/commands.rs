//! Command implementations shared by the binary and the tests.

use std::path::{Path, PathBuf};

use polaritonmd_core::normal_modes::DEFAULT_FD_STEP;
use polaritonmd_core::units::au_to_fs;
use polaritonmd_core::{hessian_fd, run_trajectory, NormalModeSet, PolaritonModel, Trajectory, Vec3};
use rayon::prelude::*;

use crate::analysis::{self, AnalysisError, Peak, Spectrum};
use crate::config::{AnalysisConfig, LoadedConfig, RunConfig};
use crate::error::{Error, Result};
use crate::io::{self, Provenance, Summary};

/// Spectrum, peaks and splitting for one dipole trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralAnalysis {
    pub spectrum: Spectrum,
    /// Peaks inside the configured band (or the whole spectrum).
    pub peaks: Vec<Peak>,
    pub splitting: std::result::Result<f64, String>,
}

pub fn analyze_dipoles(
    times: &[f64],
    dipoles: &[Vec3],
    analysis: &AnalysisConfig,
    rabi_center: Option<f64>,
) -> Result<SpectralAnalysis> {
    let spectrum = analysis::ir_spectrum_from_dipoles(
        times,
        dipoles,
        &analysis.components,
        analysis.window,
        analysis.pad_factor,
    )?;
    let peaks = match analysis.peak_band_cm1 {
        Some([lo, hi]) => analysis::find_peaks(&spectrum.band(lo, hi), analysis.min_prominence),
        None => analysis::find_peaks(&spectrum, analysis.min_prominence),
    };
    let splitting = match rabi_center {
        Some(c) => analysis::rabi_splitting(&spectrum, c, analysis.rabi_half_window_cm1, analysis.min_prominence),
        None => Err(AnalysisError::NoSplitting("no splitting centre configured".into())),
    }
    .map_err(|e| e.to_string());
    Ok(SpectralAnalysis {
        spectrum,
        peaks,
        splitting,
    })
}

/// Integrate the configured system. Non-finite forces become
/// [`Error::BlowUp`] with the offending step.
pub fn simulate(cfg: &RunConfig, seed: u64) -> Result<Trajectory> {
    let (state, ff) = cfg.build_initial_state(seed)?;
    let plan = cfg.build_plan(seed)?;
    run_trajectory(&state, &ff, &plan).map_err(|e| match e {
        polaritonmd_core::Error::NonFiniteForce { time, .. } => Error::BlowUp {
            step: (time / plan.dt()).round() as usize,
            time_fs: au_to_fs(time),
            source: e,
        },
        other => other.into(),
    })
}

/// Linearized splitting about the template geometry; `None` when there is
/// no cavity or no resolvable polariton pair.
pub fn oracle_splitting(cfg: &RunConfig) -> Result<Option<f64>> {
    let Some(center) = cfg.rabi_center() else {
        return Ok(None);
    };
    let (m, ff) = cfg.build_system()?;
    let modes = cfg.build_modes()?;
    if modes.is_empty() {
        return Ok(None);
    }
    let h = hessian_fd(&ff, &m, DEFAULT_FD_STEP)?;
    Ok(PolaritonModel::assemble(&h.matrix, &m, &modes)?.rabi_splitting(center))
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub trajectory: Trajectory,
    pub analysis: SpectralAnalysis,
    pub summary: Summary,
    pub files: Vec<PathBuf>,
}

/// Simulate, analyse and write trajectory, spectrum, peaks, coupling and
/// summary files into `out_dir`.
pub fn cmd_run(loaded: &LoadedConfig, out_dir: &Path, seed_override: Option<u64>) -> Result<RunReport> {
    let cfg = &loaded.config;
    let seed = seed_override.unwrap_or(cfg.initialization.seed);
    let trajectory = simulate(cfg, seed)?;
    let prov = Provenance {
        kind: "",
        label: loaded.label.clone(),
        seed,
        config_hash: loaded.hash(),
    };
    let analysis = analyze_dipoles(
        &trajectory.times(),
        &trajectory.dipoles(),
        &cfg.analysis,
        cfg.rabi_center(),
    )?;

    let mut notices = Vec::new();
    let oracle = match oracle_splitting(cfg) {
        Ok(w) => w,
        Err(e) => {
            notices.push(format!("oracle unavailable: {e}"));
            None
        }
    };
    let coupling = if cfg.cavity.is_empty() {
        None
    } else {
        let c = analysis::effective_coupling_trace(&trajectory, 0)?;
        notices.extend(c.notice.clone());
        Some(c)
    };
    let orientation_range = coupling.as_ref().and_then(|c| c.orientation.as_ref()).map(|o| {
        o.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
    });
    let summary = Summary {
        frames: trajectory.len(),
        steps: cfg.build_plan(seed)?.n_steps(),
        dt_fs: cfg.integration.dt_fs,
        drift: trajectory.energy_drift(),
        peak_count: analysis.peaks.len(),
        splitting: analysis.splitting.clone(),
        oracle_splitting: oracle,
        orientation_range,
        notices,
    };

    let components: Vec<String> = cfg.analysis.components.iter().map(|c| c.to_string()).collect();
    let label = &loaded.label;
    let mut outputs = vec![
        (format!("{label}.traj.dat"), io::format_trajectory(&trajectory, &prov)),
        (
            format!("{label}.spectrum.dat"),
            io::format_spectrum(&analysis.spectrum, &components.join(","), &prov),
        ),
        (
            format!("{label}.peaks.dat"),
            io::format_peaks(
                &analysis.peaks,
                cfg.analysis.peak_band_cm1,
                cfg.analysis.min_prominence,
                &analysis.splitting,
                &prov,
            ),
        ),
        (format!("{label}.summary.txt"), io::format_summary(&summary, &prov)),
    ];
    if let Some(c) = &coupling {
        outputs.push((
            format!("{label}.coupling.dat"),
            io::format_coupling(&c.times, &c.projection, c.orientation.as_deref(), &prov),
        ));
    }
    let files = write_all(out_dir, outputs)?;
    Ok(RunReport {
        trajectory,
        analysis,
        summary,
        files,
    })
}

fn write_all(out_dir: &Path, outputs: Vec<(String, String)>) -> Result<Vec<PathBuf>> {
    outputs
        .into_iter()
        .map(|(name, text)| {
            let path = out_dir.join(name);
            io::write_file(&path, &text)?;
            Ok(path)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub lambda: f64,
    pub dynamics: std::result::Result<f64, String>,
    pub oracle: Option<f64>,
}

impl ScanRow {
    /// `|dynamics - oracle| / oracle` when both are available.
    pub fn relative_deviation(&self) -> Option<f64> {
        match (&self.dynamics, self.oracle) {
            (Ok(d), Some(o)) if o > 0.0 => Some((d - o).abs() / o),
            _ => None,
        }
    }

    pub fn flag(&self) -> &'static str {
        match (&self.dynamics, self.oracle) {
            (Ok(_), Some(_)) => "ok",
            (Ok(_), None) => "no oracle splitting",
            (Err(_), _) => "no splitting",
        }
    }
}

/// Run the base config once per coupling strength, in parallel, and
/// tabulate dynamics against oracle splittings.
pub fn cmd_scan_lambda(
    loaded: &LoadedConfig,
    lambdas: &[f64],
    out_dir: &Path,
    seed_override: Option<u64>,
) -> Result<Vec<ScanRow>> {
    let base = &loaded.config;
    if base.cavity.is_empty() {
        return Err(Error::Config("scan-lambda needs at least one [[cavity]] mode".into()));
    }
    let seed = seed_override.unwrap_or(base.initialization.seed);
    let rows = lambdas
        .par_iter()
        .map(|&lambda| {
            let cfg = base.with_lambda(lambda);
            let traj = simulate(&cfg, seed)?;
            let a = analyze_dipoles(&traj.times(), &traj.dipoles(), &cfg.analysis, cfg.rabi_center())?;
            Ok(ScanRow {
                lambda,
                dynamics: a.splitting,
                oracle: oracle_splitting(&cfg)?,
            })
        })
        .collect::<Result<Vec<ScanRow>>>()?;

    let prov = Provenance {
        kind: "lambda-scan",
        label: loaded.label.clone(),
        seed,
        config_hash: loaded.hash(),
    };
    write_all(
        out_dir,
        vec![(format!("{}.scan.dat", loaded.label), io::format_scan(&rows, &prov))],
    )?;
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct ModesReport {
    pub modes: NormalModeSet,
    pub polaritons: Option<PolaritonModel>,
    pub files: Vec<PathBuf>,
}

/// Normal modes of the template geometry and, with a cavity, the coupled
/// matter-photon modes.
pub fn cmd_modes(loaded: &LoadedConfig, out_dir: &Path) -> Result<ModesReport> {
    let cfg = &loaded.config;
    let (m, ff) = cfg.build_system()?;
    let h = hessian_fd(&ff, &m, DEFAULT_FD_STEP)?;
    let modes = NormalModeSet::from_hessian(&h.matrix, &m.masses(), Some(&polaritonmd_core::dipole_jacobian(&m)))?;
    let prov = Provenance {
        kind: "",
        label: loaded.label.clone(),
        seed: cfg.initialization.seed,
        config_hash: loaded.hash(),
    };
    let labels: Vec<&str> = (0..m.len()).map(|i| m.label(i)).collect();
    let mut outputs = vec![(
        format!("{}.modes.dat", loaded.label),
        io::format_modes(&modes, &labels, &prov),
    )];
    let photon_modes = cfg.build_modes()?;
    let polaritons = if photon_modes.is_empty() {
        None
    } else {
        let pm = PolaritonModel::assemble(&h.matrix, &m, &photon_modes)?;
        let split = cfg.rabi_center().and_then(|c| pm.rabi_splitting(c));
        outputs.push((
            format!("{}.polaritons.dat", loaded.label),
            io::format_polaritons(&pm, split, &prov),
        ));
        Some(pm)
    };
    let files = write_all(out_dir, outputs)?;
    Ok(ModesReport {
        modes,
        polaritons,
        files,
    })
}

/// Re-analyse a trajectory file with the analysis settings of `loaded`
/// (defaults when absent).
pub fn cmd_spectrum(trajectory: &Path, loaded: Option<&LoadedConfig>, out_dir: &Path) -> Result<SpectralAnalysis> {
    let file = io::read_trajectory(trajectory)?;
    let default_cfg = AnalysisConfig::default();
    let (analysis_cfg, center) = match loaded {
        Some(l) => (&l.config.analysis, l.config.rabi_center()),
        None => (&default_cfg, None),
    };
    let result = analyze_dipoles(&file.times, &file.dipoles, analysis_cfg, center)?;
    let label = if file.label.is_empty() {
        "trajectory".to_string()
    } else {
        file.label.clone()
    };
    let prov = Provenance {
        kind: "",
        label: label.clone(),
        seed: file.seed,
        config_hash: file.config_hash.clone(),
    };
    let components: Vec<String> = analysis_cfg.components.iter().map(|c| c.to_string()).collect();
    write_all(
        out_dir,
        vec![
            (
                format!("{label}.spectrum.dat"),
                io::format_spectrum(&result.spectrum, &components.join(","), &prov),
            ),
            (
                format!("{label}.peaks.dat"),
                io::format_peaks(
                    &result.peaks,
                    analysis_cfg.peak_band_cm1,
                    analysis_cfg.min_prominence,
                    &result.splitting,
                    &prov,
                ),
            ),
        ],
    )?;
    Ok(result)
}
