//! Coupled propagation: velocity Verlet for the nuclei, the exact driven
//! oscillator update for every photon mode in between the two half kicks.

use alloc::{string::String, vec::Vec};

use crate::cavity::{
    breakdown, cavity_forces_with_dipole, photon_source, rotate_with_linear_source, CavityEnergyBreakdown,
};
use crate::error::{Error, ForceTerm, Result};
use crate::forcefield::{energy_at, forces_at, HarmonicForceField};
use crate::model::{dipole_moment, DriveSignal, MatterState, PhotonMode, SimulationState, Vec3};
use crate::units::{au_to_fs, fs_to_au};
// Shadowed by the inherent methods whenever std is in the build graph.
#[allow(unused_imports)]
use num_traits::Float;

/// External force `signal(t) * direction` on every atom of one species.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceDrive {
    pub species: String,
    pub direction: Vec3,
    pub signal: DriveSignal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationPlan {
    dt: f64,
    t_end: f64,
    record_stride: usize,
    drives: Vec<ForceDrive>,
    seed: u64,
}

impl IntegrationPlan {
    /// Time step and duration in femtoseconds.
    pub fn from_fs(dt_fs: f64, t_end_fs: f64, record_stride: usize) -> Result<Self> {
        if !(dt_fs > 0.0 && dt_fs.is_finite()) {
            return Err(Error::InvalidPlan(alloc::format!(
                "dt must be positive, got {dt_fs} fs"
            )));
        }
        if !(t_end_fs >= dt_fs && t_end_fs.is_finite()) {
            return Err(Error::InvalidPlan(alloc::format!(
                "t_end ({t_end_fs} fs) must be at least dt ({dt_fs} fs)"
            )));
        }
        if record_stride == 0 {
            return Err(Error::InvalidPlan("record stride must be at least 1".into()));
        }
        Ok(Self {
            dt: fs_to_au(dt_fs),
            t_end: fs_to_au(t_end_fs),
            record_stride,
            drives: Vec::new(),
            seed: 0,
        })
    }

    pub fn with_drives(mut self, drives: Vec<ForceDrive>) -> Result<Self> {
        for d in &drives {
            d.signal.validate()?;
            if !d.direction.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidDrive("non-finite drive direction".into()));
            }
        }
        self.drives = drives;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Time step in atomic units.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dt_fs(&self) -> f64 {
        au_to_fs(self.dt)
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn record_stride(&self) -> usize {
        self.record_stride
    }

    pub fn drives(&self) -> &[ForceDrive] {
        &self.drives
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Forces, dipole and energy evaluated at one point in phase space.
struct Evaluation {
    forces: Vec<Vec3>,
    dipole: Vec3,
}

struct ResolvedDrive {
    species: usize,
    direction: Vec3,
    signal: DriveSignal,
}

fn resolve_drives(m: &MatterState, drives: &[ForceDrive]) -> Result<Vec<ResolvedDrive>> {
    drives
        .iter()
        .map(|d| {
            let species = m
                .species_index(&d.species)
                .ok_or_else(|| Error::UnknownLabel(d.species.clone()))?;
            Ok(ResolvedDrive {
                species,
                direction: d.direction,
                signal: d.signal,
            })
        })
        .collect()
}

fn evaluate(
    ff: &HarmonicForceField,
    m: &MatterState,
    modes: &[PhotonMode],
    drives: &[ResolvedDrive],
    t: f64,
) -> Result<Evaluation> {
    let dipole = dipole_moment(m)?;
    let mut forces = forces_at(ff, &m.positions());
    check_finite(&forces, ForceTerm::ForceField, t)?;
    if !modes.is_empty() {
        let cav = cavity_forces_with_dipole(modes, m, &dipole);
        check_finite(&cav, ForceTerm::Cavity, t)?;
        for (f, c) in forces.iter_mut().zip(&cav) {
            *f += c;
        }
    }
    for d in drives {
        let fext = d.direction * d.signal.value(t);
        for (i, atom) in m.atoms().iter().enumerate() {
            if atom.species == d.species {
                if !fext.iter().all(|x| x.is_finite()) {
                    return Err(Error::NonFiniteForce {
                        atom: i,
                        term: ForceTerm::External,
                        time: t,
                    });
                }
                forces[i] += fext;
            }
        }
    }
    Ok(Evaluation { forces, dipole })
}

fn check_finite(f: &[Vec3], term: ForceTerm, time: f64) -> Result<()> {
    match f.iter().position(|v| !v.iter().all(|x| x.is_finite())) {
        Some(atom) => Err(Error::NonFiniteForce { atom, term, time }),
        None => Ok(()),
    }
}

/// One step from a state whose forces are already known. Returns the new
/// state together with its forces for the next step.
fn advance(
    state: &SimulationState,
    eval: &Evaluation,
    ff: &HarmonicForceField,
    drives: &[ResolvedDrive],
    dt: f64,
) -> Result<(SimulationState, Evaluation)> {
    let t0 = state.time;
    let t1 = t0 + dt;
    let mut next = state.clone();
    next.time = t1;

    let masses = state.matter.masses();
    for ((atom, f), m) in next.matter.atoms_mut().iter_mut().zip(&eval.forces).zip(&masses) {
        atom.velocity += f * (0.5 * dt / m);
        atom.position += atom.velocity * dt;
    }

    let mu1 = dipole_moment(&next.matter)?;
    for mode in next.modes.iter_mut() {
        let s0 = photon_source(mode, &eval.dipole, t0);
        let s1 = photon_source(mode, &mu1, t1);
        let (q, p) = rotate_with_linear_source(mode.omega(), mode.q, mode.p, s0, s1, dt);
        mode.q = q;
        mode.p = p;
    }

    let eval1 = evaluate(ff, &next.matter, &next.modes, drives, t1)?;
    for ((atom, f), m) in next.matter.atoms_mut().iter_mut().zip(&eval1.forces).zip(&masses) {
        atom.velocity += f * (0.5 * dt / m);
    }
    Ok((next, eval1))
}

/// Advance the full state by one time step of `plan`.
pub fn step(state: &SimulationState, ff: &HarmonicForceField, plan: &IntegrationPlan) -> Result<SimulationState> {
    let drives = resolve_drives(&state.matter, &plan.drives)?;
    let eval = evaluate(ff, &state.matter, &state.modes, &drives, state.time)?;
    advance(state, &eval, ff, &drives, plan.dt).map(|(s, _)| s)
}

/// One recorded sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    /// atomic time units
    pub time: f64,
    pub positions: Vec<Vec3>,
    pub velocities: Vec<Vec3>,
    /// `(q, p)` per mode
    pub photons: Vec<(f64, f64)>,
    pub dipole: Vec3,
    pub energy: CavityEnergyBreakdown,
    /// `sum_beta R_{I,beta}` per species
    pub species_sums: Vec<Vec3>,
}

/// Summary of total-energy conservation along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyDrift {
    pub initial: f64,
    /// `max_t |E(t) - E(0)|`
    pub max_abs_deviation: f64,
    /// `max_abs_deviation / |E(0)|`
    pub max_relative_deviation: f64,
    /// Least-squares slope of `E(t)` times the trajectory length.
    pub secular_drift: f64,
    /// `secular_drift / |E(0)|`
    pub relative_secular_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    template: MatterState,
    modes: Vec<PhotonMode>,
    dt: f64,
    record_stride: usize,
    seed: u64,
    frames: Vec<Frame>,
}

impl Trajectory {
    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Species table and initial nuclei.
    pub fn template(&self) -> &MatterState {
        &self.template
    }

    /// Photon modes as configured at `t = 0`.
    pub fn initial_modes(&self) -> &[PhotonMode] {
        &self.modes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Spacing between samples in atomic units.
    pub fn sample_interval(&self) -> f64 {
        self.dt * self.record_stride as f64
    }

    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.time).collect()
    }

    pub fn dipoles(&self) -> Vec<Vec3> {
        self.frames.iter().map(|f| f.dipole).collect()
    }

    pub fn photon_coordinate(&self, mode: usize) -> Vec<f64> {
        self.frames.iter().map(|f| f.photons[mode].0).collect()
    }

    pub fn total_energies(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.energy.total).collect()
    }

    /// Nuclei at sample `i`.
    pub fn matter_at(&self, i: usize) -> MatterState {
        let f = &self.frames[i];
        self.template
            .with_phase_space(&f.positions, &f.velocities)
            .expect("recorded frames are finite")
    }

    pub fn energy_drift(&self) -> EnergyDrift {
        let e: Vec<f64> = self.total_energies();
        let t: Vec<f64> = self.times();
        let e0 = e[0];
        let max_abs_deviation = e.iter().map(|x| (x - e0).abs()).fold(0.0, f64::max);
        let n = e.len() as f64;
        let slope = if e.len() > 1 {
            let tm = t.iter().sum::<f64>() / n;
            let em = e.iter().sum::<f64>() / n;
            let sxy: f64 = t.iter().zip(&e).map(|(a, b)| (a - tm) * (b - em)).sum();
            let sxx: f64 = t.iter().map(|a| (a - tm) * (a - tm)).sum();
            sxy / sxx
        } else {
            0.0
        };
        let span = t.last().copied().unwrap_or(0.0) - t[0];
        let secular_drift = slope * span;
        let scale = e0.abs();
        EnergyDrift {
            initial: e0,
            max_abs_deviation,
            max_relative_deviation: max_abs_deviation / scale,
            secular_drift,
            relative_secular_drift: secular_drift.abs() / scale,
        }
    }
}

fn record(state: &SimulationState, ff: &HarmonicForceField, eval: &Evaluation) -> Frame {
    let m = &state.matter;
    let potential = energy_at(ff, &m.positions());
    Frame {
        time: state.time,
        positions: m.positions(),
        velocities: m.velocities(),
        photons: state.modes.iter().map(|md| (md.q, md.p)).collect(),
        dipole: eval.dipole,
        energy: breakdown(m, potential, &state.modes, &eval.dipole),
        species_sums: m.species_position_sums(),
    }
}

/// Integrate from `state0` to the end of `plan`, sampling every
/// `record_stride` steps (the initial state is always sample 0).
pub fn run_trajectory(state0: &SimulationState, ff: &HarmonicForceField, plan: &IntegrationPlan) -> Result<Trajectory> {
    let drives = resolve_drives(&state0.matter, &plan.drives)?;
    let mut state = state0.clone();
    let mut eval = evaluate(ff, &state.matter, &state.modes, &drives, state.time)?;
    let n = plan.n_steps();
    let mut frames = Vec::with_capacity(n / plan.record_stride + 1);
    frames.push(record(&state, ff, &eval));
    for i in 1..=n {
        let (s, e) = advance(&state, &eval, ff, &drives, plan.dt)?;
        state = s;
        eval = e;
        if i % plan.record_stride == 0 {
            frames.push(record(&state, ff, &eval));
        }
    }
    Ok(Trajectory {
        template: state0.matter.clone(),
        modes: state0.modes.clone(),
        dt: plan.dt,
        record_stride: plan.record_stride,
        seed: plan.seed,
        frames,
    })
}
