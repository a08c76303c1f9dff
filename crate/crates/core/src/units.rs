//! Fixed unit conversions. Everything inside the crate is in Hartree atomic
//! units (hbar = e = m_e = 1); conversions happen only at the edges.

/// Hartree expressed in wavenumbers.
pub const HARTREE_TO_CM1: f64 = 219_474.631_4;
/// Bohr radius in angstrom.
pub const BOHR_TO_ANGSTROM: f64 = 0.529_177;
/// Atomic time unit in femtoseconds.
pub const AU_TIME_TO_FS: f64 = 0.024_188_8;
/// Unified atomic mass unit in electron masses.
pub const AMU_TO_ME: f64 = 1_822.888_486;
/// Boltzmann constant in Hartree per kelvin.
pub const BOLTZMANN_HA_PER_K: f64 = 3.166_811_563e-6;

#[inline]
pub fn cm1_to_hartree(nu: f64) -> f64 {
    nu / HARTREE_TO_CM1
}

#[inline]
pub fn hartree_to_cm1(e: f64) -> f64 {
    e * HARTREE_TO_CM1
}

#[inline]
pub fn angstrom_to_bohr(x: f64) -> f64 {
    x / BOHR_TO_ANGSTROM
}

#[inline]
pub fn bohr_to_angstrom(x: f64) -> f64 {
    x * BOHR_TO_ANGSTROM
}

#[inline]
pub fn fs_to_au(t: f64) -> f64 {
    t / AU_TIME_TO_FS
}

#[inline]
pub fn au_to_fs(t: f64) -> f64 {
    t * AU_TIME_TO_FS
}

#[inline]
pub fn amu_to_me(m: f64) -> f64 {
    m * AMU_TO_ME
}
