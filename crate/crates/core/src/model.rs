//! Domain types for nuclei, cavity modes and the combined simulation state.

use alloc::{format, string::String, vec::Vec};

use nalgebra::{DMatrix, Vector3};

use crate::error::{Error, Result};
// Shadowed by the inherent methods whenever std is in the build graph.
#[allow(unused_imports)]
use num_traits::Float;

pub type Vec3 = Vector3<f64>;

/// Total charge below which a system counts as neutral.
pub const NEUTRALITY_TOLERANCE: f64 = 1e-12;

/// A nuclear species: label, mass and effective point charge.
///
/// The effective charge stands in for the nuclear charge screened by the
/// electron cloud, so that `sum Q_a R_a` reproduces the molecular dipole.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicSpecies {
    label: String,
    mass: f64,
    charge: f64,
}

impl AtomicSpecies {
    /// `mass` is in electron masses, `charge` in elementary charges.
    pub fn new(label: impl Into<String>, mass: f64, charge: f64) -> Result<Self> {
        let label = label.into();
        if label.is_empty() {
            return Err(Error::InvalidSystem("species label is empty".into()));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidSystem(format!(
                "species `{label}` has non-positive mass {mass}"
            )));
        }
        if !charge.is_finite() {
            return Err(Error::InvalidSystem(format!("species `{label}` has non-finite charge")));
        }
        Ok(Self { label, mass, charge })
    }

    /// Convenience constructor taking the mass in atomic mass units.
    pub fn from_amu(label: impl Into<String>, mass_amu: f64, charge: f64) -> Result<Self> {
        Self::new(label, crate::units::amu_to_me(mass_amu), charge)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub species: usize,
    /// bohr
    pub position: Vec3,
    /// bohr per atomic time unit
    pub velocity: Vec3,
}

impl Atom {
    pub fn at_rest(species: usize, position: Vec3) -> Self {
        Self {
            species,
            position,
            velocity: Vec3::zeros(),
        }
    }
}

/// Classical nuclei: a species table plus an ordered list of atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct MatterState {
    species: Vec<AtomicSpecies>,
    atoms: Vec<Atom>,
    dipole_origin: Option<Vec3>,
}

impl MatterState {
    pub fn new(species: Vec<AtomicSpecies>, atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidSystem("system has no atoms".into()));
        }
        for (i, s) in species.iter().enumerate() {
            if species[..i].iter().any(|o| o.label == s.label) {
                return Err(Error::InvalidSystem(format!(
                    "species label `{}` is not unique",
                    s.label
                )));
            }
        }
        for (i, a) in atoms.iter().enumerate() {
            if a.species >= species.len() {
                return Err(Error::IndexOutOfRange {
                    index: a.species,
                    count: species.len(),
                });
            }
            if !(is_finite(&a.position) && is_finite(&a.velocity)) {
                return Err(Error::InvalidSystem(format!("atom {i} has non-finite coordinates")));
            }
        }
        Ok(Self {
            species,
            atoms,
            dipole_origin: None,
        })
    }

    /// Configure the reference point for the dipole of a charged system.
    pub fn with_dipole_origin(mut self, origin: Vec3) -> Self {
        self.dipole_origin = Some(origin);
        self
    }

    pub fn dipole_origin(&self) -> Option<Vec3> {
        self.dipole_origin
    }

    pub fn species(&self) -> &[AtomicSpecies] {
        &self.species
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn species_of(&self, atom: usize) -> &AtomicSpecies {
        &self.species[self.atoms[atom].species]
    }

    pub fn mass(&self, atom: usize) -> f64 {
        self.species_of(atom).mass
    }

    pub fn charge(&self, atom: usize) -> f64 {
        self.species_of(atom).charge
    }

    pub fn label(&self, atom: usize) -> &str {
        &self.species_of(atom).label
    }

    pub fn species_index(&self, label: &str) -> Option<usize> {
        self.species.iter().position(|s| s.label == label)
    }

    pub fn masses(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.mass(i)).collect()
    }

    pub fn charges(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.charge(i)).collect()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.atoms.iter().map(|a| a.position).collect()
    }

    pub fn velocities(&self) -> Vec<Vec3> {
        self.atoms.iter().map(|a| a.velocity).collect()
    }

    pub fn total_charge(&self) -> f64 {
        (0..self.len()).map(|i| self.charge(i)).sum()
    }

    pub fn total_mass(&self) -> f64 {
        (0..self.len()).map(|i| self.mass(i)).sum()
    }

    pub fn center_of_mass(&self) -> Vec3 {
        let mut c = Vec3::zeros();
        for (i, a) in self.atoms.iter().enumerate() {
            c += a.position * self.mass(i);
        }
        c / self.total_mass()
    }

    pub fn linear_momentum(&self) -> Vec3 {
        let mut p = Vec3::zeros();
        for (i, a) in self.atoms.iter().enumerate() {
            p += a.velocity * self.mass(i);
        }
        p
    }

    pub fn angular_momentum(&self) -> Vec3 {
        let com = self.center_of_mass();
        let mut l = Vec3::zeros();
        for (i, a) in self.atoms.iter().enumerate() {
            l += (a.position - com).cross(&(a.velocity * self.mass(i)));
        }
        l
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.atoms
            .iter()
            .enumerate()
            .map(|(i, a)| 0.5 * self.mass(i) * a.velocity.norm_squared())
            .sum()
    }

    /// `sum_beta R_{I,beta}` for every species `I`, in species-table order.
    pub fn species_position_sums(&self) -> Vec<Vec3> {
        let mut sums = alloc::vec![Vec3::zeros(); self.species.len()];
        for a in &self.atoms {
            sums[a.species] += a.position;
        }
        sums
    }

    /// Same system with new positions and velocities.
    pub fn with_phase_space(&self, positions: &[Vec3], velocities: &[Vec3]) -> Result<Self> {
        if positions.len() != self.len() || velocities.len() != self.len() {
            return Err(Error::InvalidSystem(format!(
                "expected {} positions and velocities, got {} and {}",
                self.len(),
                positions.len(),
                velocities.len()
            )));
        }
        let mut next = self.clone();
        for ((a, r), v) in next.atoms.iter_mut().zip(positions).zip(velocities) {
            if !(is_finite(r) && is_finite(v)) {
                return Err(Error::InvalidSystem("non-finite coordinates".into()));
            }
            a.position = *r;
            a.velocity = *v;
        }
        Ok(next)
    }

    pub fn with_positions(&self, positions: &[Vec3]) -> Result<Self> {
        self.with_phase_space(positions, &self.velocities())
    }

    pub fn with_velocities(&self, velocities: &[Vec3]) -> Result<Self> {
        self.with_phase_space(&self.positions(), velocities)
    }

    /// Replace the effective charge of one species.
    pub fn with_species_charge(&self, label: &str, charge: f64) -> Result<Self> {
        let idx = self
            .species_index(label)
            .ok_or_else(|| Error::UnknownLabel(label.into()))?;
        let mut next = self.clone();
        let s = &next.species[idx];
        next.species[idx] = AtomicSpecies::new(s.label.clone(), s.mass, charge)?;
        Ok(next)
    }

    pub(crate) fn atoms_mut(&mut self) -> &mut [Atom] {
        &mut self.atoms
    }
}

fn is_finite(v: &Vec3) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Total dipole `mu = sum_a Q_a R_a` in e*bohr.
///
/// Charged systems are rejected unless an explicit origin was configured, in
/// which case positions are taken relative to it.
pub fn dipole_moment(m: &MatterState) -> Result<Vec3> {
    let origin = match m.dipole_origin {
        Some(o) => o,
        None => {
            let q = m.total_charge();
            if q.abs() > NEUTRALITY_TOLERANCE {
                return Err(Error::ChargedSystem(q));
            }
            Vec3::zeros()
        }
    };
    Ok(dipole_about(m, &origin))
}

pub(crate) fn dipole_about(m: &MatterState, origin: &Vec3) -> Vec3 {
    let mut mu = Vec3::zeros();
    for (i, a) in m.atoms.iter().enumerate() {
        mu += (a.position - origin) * m.charge(i);
    }
    mu
}

/// `d mu / d R` as a 3 x 3N matrix: block `Q_a I_3` for each atom.
pub fn dipole_jacobian(m: &MatterState) -> DMatrix<f64> {
    let n = m.len();
    let mut j = DMatrix::zeros(3, 3 * n);
    for a in 0..n {
        let q = m.charge(a);
        for k in 0..3 {
            j[(k, 3 * a + k)] = q;
        }
    }
    j
}

/// Time-dependent external signal, used either as a force on nuclei or as
/// the photon source current `j_ext`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DriveSignal {
    #[default]
    None,
    /// `amplitude * cos(angular_frequency * t + phase)`, frequency in Ha.
    Sinusoid {
        amplitude: f64,
        angular_frequency: f64,
        phase: f64,
    },
    /// Normalized Gaussian pulse of total area `strength` centred at `time`.
    Impulse { strength: f64, time: f64, width: f64 },
}

impl DriveSignal {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DriveSignal::None => Ok(()),
            DriveSignal::Sinusoid {
                amplitude,
                angular_frequency,
                phase,
            } => {
                if !(amplitude.is_finite() && angular_frequency.is_finite() && phase.is_finite()) {
                    return Err(Error::InvalidDrive("non-finite sinusoid parameter".into()));
                }
                if angular_frequency < 0.0 {
                    return Err(Error::InvalidDrive("negative sinusoid frequency".into()));
                }
                Ok(())
            }
            DriveSignal::Impulse { strength, time, width } => {
                if !(strength.is_finite() && time.is_finite() && width.is_finite()) {
                    return Err(Error::InvalidDrive("non-finite impulse parameter".into()));
                }
                if width <= 0.0 {
                    return Err(Error::InvalidDrive(format!(
                        "impulse width must be positive, got {width}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            DriveSignal::None => 0.0,
            DriveSignal::Sinusoid {
                amplitude,
                angular_frequency,
                phase,
            } => amplitude * (angular_frequency * t + phase).cos(),
            DriveSignal::Impulse { strength, time, width } => {
                let x = (t - time) / width;
                strength * (-0.5 * x * x).exp() / (width * (2.0 * core::f64::consts::PI).sqrt())
            }
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, DriveSignal::None)
    }
}

/// One quantized cavity mode treated in mean field: frequency, coupling
/// vector and the phase-space pair `(q, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonMode {
    omega: f64,
    lambda: Vec3,
    pub q: f64,
    pub p: f64,
    drive: DriveSignal,
}

impl PhotonMode {
    /// `omega` in Hartree, `lambda` in atomic units. Starts in `(q, p) = (0, 0)`.
    pub fn new(omega: f64, lambda: Vec3) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidMode(format!("frequency must be positive, got {omega}")));
        }
        if !is_finite(&lambda) {
            return Err(Error::InvalidMode("non-finite coupling vector".into()));
        }
        Ok(Self {
            omega,
            lambda,
            q: 0.0,
            p: 0.0,
            drive: DriveSignal::None,
        })
    }

    /// Mode from a wavenumber, a coupling strength and a polarization direction.
    pub fn from_cm1(omega_cm1: f64, lambda: f64, polarization: Vec3) -> Result<Self> {
        let n = polarization.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidMode("polarization must be a nonzero vector".into()));
        }
        Self::new(crate::units::cm1_to_hartree(omega_cm1), polarization * (lambda / n))
    }

    pub fn with_drive(mut self, drive: DriveSignal) -> Result<Self> {
        drive.validate()?;
        self.drive = drive;
        Ok(self)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn lambda(&self) -> Vec3 {
        self.lambda
    }

    pub fn coupling_strength(&self) -> f64 {
        self.lambda.norm()
    }

    /// Unit polarization vector; `None` for an uncoupled mode.
    pub fn polarization(&self) -> Option<Vec3> {
        let n = self.lambda.norm();
        (n > 0.0).then(|| self.lambda / n)
    }

    pub fn drive(&self) -> &DriveSignal {
        &self.drive
    }
}

/// Nuclei plus cavity modes at a given time (atomic units).
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    pub time: f64,
    pub matter: MatterState,
    pub modes: Vec<PhotonMode>,
}

impl SimulationState {
    pub fn new(matter: MatterState, modes: Vec<PhotonMode>) -> Self {
        Self {
            time: 0.0,
            matter,
            modes,
        }
    }
}
