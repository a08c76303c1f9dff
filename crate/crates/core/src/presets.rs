//! Built-in molecular systems.

use alloc::vec;
use core::f64::consts::PI;

use crate::forcefield::{Angle, Bond, BondCoupling, HarmonicForceField};
use crate::model::{Atom, AtomicSpecies, MatterState, Vec3};
use crate::units::{amu_to_me, angstrom_to_bohr, cm1_to_hartree};

pub const CO2_BOND_LENGTH_ANGSTROM: f64 = 1.16;
pub const CO2_ASYMMETRIC_STRETCH_CM1: f64 = 2430.0;
pub const CO2_BEND_CM1: f64 = 654.0;
/// IR-inactive; only sets the stretch-stretch cross term.
pub const CO2_SYMMETRIC_STRETCH_CM1: f64 = 1333.0;
pub const CO2_CARBON_CHARGE: f64 = 0.8;
pub const CARBON_MASS_AMU: f64 = 12.011;
pub const OXYGEN_MASS_AMU: f64 = 15.999;

/// Linear O=C=O along x with the default effective charges.
pub fn build_co2_preset() -> (MatterState, HarmonicForceField) {
    build_co2_with_charge(CO2_CARBON_CHARGE)
}

/// CO2 preset with carbon charge `q_c`; each oxygen carries `-q_c / 2`.
///
/// Atom order is C, O, O. Force constants follow from the linear XY2
/// normal-mode relations, so the harmonic frequencies land on the targets
/// exactly:
///
/// * asymmetric stretch `w^2 = (k - k_ss)(1/m_O + 2/m_C)`
/// * symmetric stretch `w^2 = (k + k_ss) / m_O`
/// * bend `w^2 = (2 k_b / r^2)(1/m_O + 2/m_C)`
pub fn build_co2_with_charge(q_c: f64) -> (MatterState, HarmonicForceField) {
    let m_c = amu_to_me(CARBON_MASS_AMU);
    let m_o = amu_to_me(OXYGEN_MASS_AMU);
    let r0 = angstrom_to_bohr(CO2_BOND_LENGTH_ANGSTROM);
    let inv_mu = 1.0 / m_o + 2.0 / m_c;

    let w_as = cm1_to_hartree(CO2_ASYMMETRIC_STRETCH_CM1);
    let w_ss = cm1_to_hartree(CO2_SYMMETRIC_STRETCH_CM1);
    let w_b = cm1_to_hartree(CO2_BEND_CM1);

    let k_minus = w_as * w_as / inv_mu;
    let k_plus = w_ss * w_ss * m_o;
    let k = 0.5 * (k_plus + k_minus);
    let k_ss = 0.5 * (k_plus - k_minus);
    let k_b = w_b * w_b * r0 * r0 / (2.0 * inv_mu);

    let species = vec![
        AtomicSpecies::new("C", m_c, q_c).expect("carbon parameters are valid"),
        AtomicSpecies::new("O", m_o, -0.5 * q_c).expect("oxygen parameters are valid"),
    ];
    let atoms = vec![
        Atom::at_rest(0, Vec3::zeros()),
        Atom::at_rest(1, Vec3::new(-r0, 0.0, 0.0)),
        Atom::at_rest(1, Vec3::new(r0, 0.0, 0.0)),
    ];
    let matter = MatterState::new(species, atoms).expect("preset geometry is valid");
    let ff = HarmonicForceField::new(
        vec![Bond { i: 0, j: 1, r0, k }, Bond { i: 0, j: 2, r0, k }],
        vec![Angle {
            i: 1,
            j: 0,
            k: 2,
            theta0: PI,
            k_theta: k_b,
        }],
        vec![BondCoupling { a: 0, b: 1, k: k_ss }],
    )
    .expect("preset force field is valid");
    (matter, ff)
}
