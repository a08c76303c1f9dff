//! Mean-field dynamics of classical nuclei coupled to quantized cavity
//! modes in the length gauge and dipole approximation.
//!
//! The crate is `no_std` (it needs `alloc`) and holds the physics only:
//! the force-field closure, the cavity coupling with dipole self-energy,
//! the coupled integrator, initial conditions and the harmonic
//! (normal-mode and polariton) analysis. File formats, spectra and the
//! command line live in the `polaritonmd` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cavity;
pub mod error;
pub mod forcefield;
pub mod init;
pub mod integrator;
pub mod model;
pub mod normal_modes;
pub mod presets;
pub mod units;

pub use cavity::{
    cavity_force_on_atoms, displacement_field, photon_source, propagate_photon_analytic, total_displacement_field,
    total_energy, CavityEnergyBreakdown,
};
pub use error::{Error, ForceTerm, Result};
pub use forcefield::{matter_forces, potential_energy, Angle, Bond, BondCoupling, HarmonicForceField};
pub use init::{init_photon, kick_displacement, sample_maxwell_boltzmann};
pub use integrator::{run_trajectory, step, EnergyDrift, ForceDrive, Frame, IntegrationPlan, Trajectory};
pub use model::{
    dipole_jacobian, dipole_moment, Atom, AtomicSpecies, DriveSignal, MatterState, PhotonMode, SimulationState, Vec3,
};
pub use normal_modes::{hessian_fd, HessianReport, NormalModeSet, PolaritonModel};
pub use presets::{build_co2_preset, build_co2_with_charge};
