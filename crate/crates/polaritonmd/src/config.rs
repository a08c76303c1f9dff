//! TOML run configuration.
//!
//! Every physical quantity carries its unit in the key name
//! (`omega_cm1`, `dt_fs`, `lambda_au`, ...). Unknown keys are rejected.
//! The full schema is documented in `docs/config.md`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use polaritonmd_core::units::{cm1_to_hartree, fs_to_au};
use polaritonmd_core::{
    build_co2_preset, init_photon, kick_displacement, sample_maxwell_boltzmann, Angle, Atom, AtomicSpecies, Bond,
    BondCoupling, DriveSignal, ForceDrive, HarmonicForceField, IntegrationPlan, MatterState, PhotonMode,
    SimulationState, Vec3,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{Axis, WindowKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Run label used for output file names; defaults to the config stem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub system: SystemConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cavity: Vec<CavityModeConfig>,
    #[serde(default)]
    pub initialization: InitConfig,
    #[serde(default)]
    pub integration: IntegrationConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub drives: Vec<ForceDriveConfig>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Named preset (`"co2"`); mutually exclusive with the inline tables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Species label to charge in elementary charges, applied on top of the
    /// preset or inline species.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub charge_overrides_e: BTreeMap<String, f64>,
    /// Dipole origin; required for charged systems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dipole_origin_bohr: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub species: Vec<SpeciesConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<AtomConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bonds: Vec<BondConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub angles: Vec<AngleConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bond_couplings: Vec<BondCouplingConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesConfig {
    pub label: String,
    pub mass_amu: f64,
    pub charge_e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub species: String,
    pub position_bohr: [f64; 3],
    #[serde(default, skip_serializing_if = "is_zero3")]
    pub velocity_au: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BondConfig {
    pub i: usize,
    pub j: usize,
    pub r0_bohr: f64,
    pub k_ha_per_bohr2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleConfig {
    pub i: usize,
    /// vertex atom
    pub j: usize,
    pub k: usize,
    pub theta0_deg: f64,
    pub k_ha_per_rad2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BondCouplingConfig {
    /// indices into `bonds`
    pub a: usize,
    pub b: usize,
    pub k_ha_per_bohr2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityModeConfig {
    pub omega_cm1: f64,
    pub lambda_au: f64,
    pub polarization: [f64; 3],
    #[serde(default, skip_serializing_if = "is_zero")]
    pub q0_au: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub p0_au: f64,
    /// External current `j_ext(t)` on this mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<SignalConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SignalConfig {
    /// `amplitude_au * cos(omega t + phase_rad)`
    Sinusoid {
        amplitude_au: f64,
        frequency_cm1: f64,
        #[serde(default)]
        phase_rad: f64,
    },
    /// Gaussian pulse of total area `strength_au` (a.u. of the signal times
    /// atomic time units).
    Impulse {
        strength_au: f64,
        time_fs: f64,
        width_fs: f64,
    },
}

impl SignalConfig {
    pub fn to_signal(self) -> DriveSignal {
        match self {
            SignalConfig::Sinusoid {
                amplitude_au,
                frequency_cm1,
                phase_rad,
            } => DriveSignal::Sinusoid {
                amplitude: amplitude_au,
                angular_frequency: cm1_to_hartree(frequency_cm1),
                phase: phase_rad,
            },
            SignalConfig::Impulse {
                strength_au,
                time_fs,
                width_fs,
            } => DriveSignal::Impulse {
                strength: strength_au,
                time: fs_to_au(time_fs),
                width: fs_to_au(width_fs),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceDriveConfig {
    pub species: String,
    pub direction: [f64; 3],
    pub signal: SignalConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kick_species: Option<String>,
    #[serde(default, skip_serializing_if = "is_zero3")]
    pub kick_angstrom: [f64; 3],
    #[serde(default, skip_serializing_if = "is_zero")]
    pub temperature_k: f64,
    /// Must fit in a signed 64-bit TOML integer.
    #[serde(default)]
    pub seed: u64,
    /// Subtract the centre-of-mass velocity after thermal sampling. Off by
    /// default so a thermal molecule keeps its full momentum.
    #[serde(default)]
    pub remove_com: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationConfig {
    #[serde(default = "default_dt_fs")]
    pub dt_fs: f64,
    #[serde(default = "default_t_end_ps")]
    pub t_end_ps: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            dt_fs: default_dt_fs(),
            t_end_ps: default_t_end_ps(),
            stride: default_stride(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default)]
    pub window: WindowKind,
    #[serde(default = "default_pad")]
    pub pad_factor: usize,
    #[serde(default = "default_prominence")]
    pub min_prominence: f64,
    #[serde(default = "default_components")]
    pub components: Vec<Axis>,
    /// Restrict peak picking to this band; thresholds become relative to
    /// the strongest line inside it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_band_cm1: Option<[f64; 2]>,
    /// Centre for the splitting estimate; defaults to the first cavity mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabi_center_cm1: Option<f64>,
    #[serde(default = "default_half_window")]
    pub rabi_half_window_cm1: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            window: WindowKind::Hann,
            pad_factor: default_pad(),
            min_prominence: default_prominence(),
            components: default_components(),
            peak_band_cm1: None,
            rabi_center_cm1: None,
            rabi_half_window_cm1: default_half_window(),
        }
    }
}

fn default_dt_fs() -> f64 {
    0.1
}
fn default_t_end_ps() -> f64 {
    5.0
}
fn default_stride() -> usize {
    10
}
fn default_pad() -> usize {
    4
}
fn default_prominence() -> f64 {
    0.05
}
fn default_components() -> Vec<Axis> {
    Axis::ALL.to_vec()
}
fn default_half_window() -> f64 {
    300.0
}
fn is_zero(x: &f64) -> bool {
    *x == 0.0
}
fn is_zero3(x: &[f64; 3]) -> bool {
    x.iter().all(|v| *v == 0.0)
}

/// Recipes shipped with the binary, selectable by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("fig1_lambda000", include_str!("../configs/fig1_lambda000.toml")),
    ("fig1_lambda002", include_str!("../configs/fig1_lambda002.toml")),
    ("fig1_lambda005", include_str!("../configs/fig1_lambda005.toml")),
    ("fig1_lambda010", include_str!("../configs/fig1_lambda010.toml")),
    ("fig2_kick_x", include_str!("../configs/fig2_kick_x.toml")),
    ("fig3_spinning", include_str!("../configs/fig3_spinning.toml")),
];

/// A parsed config together with the exact text it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub source: String,
    /// Run label: `name`, else the file stem or bundled name.
    pub label: String,
}

impl LoadedConfig {
    /// Hex SHA-256 of the canonical serialization, so formatting and
    /// comments in the source do not change it.
    pub fn hash(&self) -> String {
        self.config.hash()
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.system;
        let inline = !(s.species.is_empty() && s.atoms.is_empty() && s.bonds.is_empty() && s.angles.is_empty())
            || !s.bond_couplings.is_empty();
        match (&s.preset, inline) {
            (Some(_), true) => {
                return Err(Error::Config(
                    "system: give either `preset` or inline tables, not both".into(),
                ))
            }
            (None, false) => return Err(Error::Config("system: missing `preset` or inline species/atoms".into())),
            _ => {}
        }
        if let Some(p) = &s.preset {
            if p != "co2" {
                return Err(Error::Config(format!(
                    "system.preset: unknown preset `{p}` (known: co2)"
                )));
            }
        }
        if self.integration.stride == 0 {
            return Err(Error::Config("integration.stride must be at least 1".into()));
        }
        if !(self.integration.dt_fs > 0.0) || !(self.integration.t_end_ps > 0.0) {
            return Err(Error::Config(
                "integration.dt_fs and integration.t_end_ps must be positive".into(),
            ));
        }
        if self.analysis.pad_factor == 0 {
            return Err(Error::Config("analysis.pad_factor must be at least 1".into()));
        }
        if self.analysis.components.is_empty() {
            return Err(Error::Config("analysis.components must not be empty".into()));
        }
        if let Some([lo, hi]) = self.analysis.peak_band_cm1 {
            if !(lo < hi) {
                return Err(Error::Config("analysis.peak_band_cm1 must be [low, high]".into()));
            }
        }
        if self.initialization.seed > i64::MAX as u64 {
            return Err(Error::Config("initialization.seed must be below 2^63".into()));
        }
        if self.initialization.temperature_k < 0.0 {
            return Err(Error::Config(
                "initialization.temperature_k must not be negative".into(),
            ));
        }
        if !is_zero3(&self.initialization.kick_angstrom) && self.initialization.kick_species.is_none() {
            return Err(Error::Config("initialization.kick_angstrom needs kick_species".into()));
        }
        Ok(())
    }

    /// Matter template (before kicks and thermal sampling) and force field.
    pub fn build_system(&self) -> Result<(MatterState, HarmonicForceField)> {
        let s = &self.system;
        let (mut m, ff) = if s.preset.is_some() {
            build_co2_preset()
        } else {
            let species = s
                .species
                .iter()
                .map(|sp| AtomicSpecies::from_amu(sp.label.clone(), sp.mass_amu, sp.charge_e))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let atoms = s
                .atoms
                .iter()
                .map(|a| {
                    let idx = species
                        .iter()
                        .position(|sp| sp.label() == a.species)
                        .ok_or_else(|| Error::Config(format!("system.atoms: unknown species `{}`", a.species)))?;
                    let mut atom = Atom::at_rest(idx, Vec3::from(a.position_bohr));
                    atom.velocity = Vec3::from(a.velocity_au);
                    Ok(atom)
                })
                .collect::<Result<Vec<_>>>()?;
            let m = MatterState::new(species, atoms)?;
            let ff = HarmonicForceField::new(
                s.bonds
                    .iter()
                    .map(|b| Bond {
                        i: b.i,
                        j: b.j,
                        r0: b.r0_bohr,
                        k: b.k_ha_per_bohr2,
                    })
                    .collect(),
                s.angles
                    .iter()
                    .map(|a| Angle {
                        i: a.i,
                        j: a.j,
                        k: a.k,
                        theta0: a.theta0_deg.to_radians(),
                        k_theta: a.k_ha_per_rad2,
                    })
                    .collect(),
                s.bond_couplings
                    .iter()
                    .map(|c| BondCoupling {
                        a: c.a,
                        b: c.b,
                        k: c.k_ha_per_bohr2,
                    })
                    .collect(),
            )?;
            if let Some(max) = ff.max_atom_index() {
                if max >= m.len() {
                    return Err(Error::Config(format!(
                        "force field references atom {max}, system has {}",
                        m.len()
                    )));
                }
            }
            (m, ff)
        };
        for (label, q) in &s.charge_overrides_e {
            m = m.with_species_charge(label, *q)?;
        }
        if let Some(o) = s.dipole_origin_bohr {
            m = m.with_dipole_origin(Vec3::from(o));
        }
        Ok((m, ff))
    }

    pub fn build_modes(&self) -> Result<Vec<PhotonMode>> {
        self.cavity
            .iter()
            .map(|c| {
                let mut mode = PhotonMode::from_cm1(c.omega_cm1, c.lambda_au, Vec3::from(c.polarization))?;
                if let Some(d) = c.drive {
                    mode = mode.with_drive(d.to_signal())?;
                }
                Ok(init_photon(&mode, c.q0_au, c.p0_au))
            })
            .collect()
    }

    /// Initial state: kick, then thermal velocities when `temperature_k > 0`.
    pub fn build_initial_state(&self, seed: u64) -> Result<(SimulationState, HarmonicForceField)> {
        let (mut m, ff) = self.build_system()?;
        let init = &self.initialization;
        if let Some(label) = &init.kick_species {
            m = kick_displacement(&m, label, Vec3::from(init.kick_angstrom))?;
        }
        if init.temperature_k > 0.0 {
            m = sample_maxwell_boltzmann(&m, init.temperature_k, seed, init.remove_com)?;
        }
        Ok((SimulationState::new(m, self.build_modes()?), ff))
    }

    pub fn build_plan(&self, seed: u64) -> Result<IntegrationPlan> {
        let it = &self.integration;
        let drives = self
            .drives
            .iter()
            .map(|d| ForceDrive {
                species: d.species.clone(),
                direction: Vec3::from(d.direction),
                signal: d.signal.to_signal(),
            })
            .collect();
        Ok(IntegrationPlan::from_fs(it.dt_fs, it.t_end_ps * 1000.0, it.stride)?
            .with_drives(drives)?
            .with_seed(seed))
    }

    /// Splitting centre: explicit, else the first cavity mode.
    pub fn rabi_center(&self) -> Option<f64> {
        self.analysis
            .rabi_center_cm1
            .or_else(|| self.cavity.first().map(|c| c.omega_cm1))
    }

    /// Copy with every cavity coupling set to `lambda_au`.
    pub fn with_lambda(&self, lambda_au: f64) -> Self {
        let mut next = self.clone();
        for c in &mut next.cavity {
            c.lambda_au = lambda_au;
        }
        next
    }
}

/// Load a config from a path, or from the bundled recipes when `name_or_path` names
/// one and no such file exists.
pub fn load(name_or_path: &str) -> Result<LoadedConfig> {
    let path = Path::new(name_or_path);
    if path.exists() {
        let source = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config = RunConfig::parse(&source).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into());
        let label = config.name.clone().unwrap_or(stem);
        return Ok(LoadedConfig { config, source, label });
    }
    let (name, text) = BUNDLED.iter().find(|(n, _)| *n == name_or_path).ok_or_else(|| {
        let names: Vec<&str> = BUNDLED.iter().map(|(n, _)| *n).collect();
        Error::Config(format!(
            "`{name_or_path}` is neither a file nor a bundled recipe ({})",
            names.join(", ")
        ))
    })?;
    let config = RunConfig::parse(text).map_err(|e| Error::Config(format!("bundled {name}: {e}")))?;
    let label = config.name.clone().unwrap_or_else(|| name.to_string());
    Ok(LoadedConfig {
        config,
        source: text.to_string(),
        label,
    })
}
