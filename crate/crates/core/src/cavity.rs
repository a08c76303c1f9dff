//! Light-matter coupling in the length gauge under the dipole approximation.
//!
//! The photon energy of mode `a` is `1/2 [p^2 + (w q + lambda.mu)^2]`, which
//! contains the dipole self-energy `1/2 (lambda.mu)^2`. Every sign below is a
//! gradient of that expression.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::forcefield::HarmonicForceField;
use crate::model::{dipole_moment, MatterState, PhotonMode, Vec3};
// Shadowed by the inherent methods whenever std is in the build graph.
#[allow(unused_imports)]
use num_traits::Float;

/// Energy split of the coupled system, all in Hartree.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CavityEnergyBreakdown {
    pub kinetic_matter: f64,
    pub potential_ff: f64,
    pub photon_kinetic: f64,
    pub photon_potential: f64,
    pub total: f64,
}

impl CavityEnergyBreakdown {
    fn from_parts(kinetic_matter: f64, potential_ff: f64, photon_kinetic: f64, photon_potential: f64) -> Self {
        Self {
            kinetic_matter,
            potential_ff,
            photon_kinetic,
            photon_potential,
            total: kinetic_matter + potential_ff + photon_kinetic + photon_potential,
        }
    }
}

/// Right-hand side `s` of `q'' = -w^2 q + s` for one mode:
/// `s = -w lambda.mu - j_ext(t) / w`.
pub fn photon_source(mode: &PhotonMode, mu: &Vec3, t: f64) -> f64 {
    -mode.omega() * mode.lambda().dot(mu) - mode.drive().value(t) / mode.omega()
}

/// Displacement coordinate that makes `q'' = 0` for a frozen dipole.
pub fn stationary_coordinate(mode: &PhotonMode, mu: &Vec3, t: f64) -> f64 {
    let w = mode.omega();
    photon_source(mode, mu, t) / (w * w)
}

/// Cavity force on every nucleus:
/// `F_a = -Q_a sum_modes (w q + lambda.mu) lambda`.
pub fn cavity_force_on_atoms(modes: &[PhotonMode], m: &MatterState) -> Result<Vec<Vec3>> {
    let mu = dipole_moment(m)?;
    Ok(cavity_forces_with_dipole(modes, m, &mu))
}

pub(crate) fn cavity_forces_with_dipole(modes: &[PhotonMode], m: &MatterState, mu: &Vec3) -> Vec<Vec3> {
    let mut field = Vec3::zeros();
    for mode in modes {
        let lam = mode.lambda();
        field += lam * (mode.omega() * mode.q + lam.dot(mu));
    }
    (0..m.len()).map(|a| field * -m.charge(a)).collect()
}

/// `D = sqrt(4 pi) w lambda q`, evaluated at the centre of charge.
pub fn displacement_field(mode: &PhotonMode) -> Vec3 {
    mode.lambda() * ((4.0 * core::f64::consts::PI).sqrt() * mode.omega() * mode.q)
}

pub fn total_displacement_field(modes: &[PhotonMode]) -> Vec3 {
    modes.iter().map(displacement_field).fold(Vec3::zeros(), |a, b| a + b)
}

/// Exact solution of `q'' = -w^2 q + s(t)` over one step, with `s` linear
/// between `s0` at the start and `s1` at the end.
///
/// A linear source has the particular solution `q_p = (a + b t) / w^2`, so
/// the remainder is a free oscillation rotated through `w dt`.
pub fn propagate_photon_analytic(mode: &PhotonMode, s0: f64, s1: f64, dt: f64) -> Result<(f64, f64)> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveStep(dt));
    }
    Ok(rotate_with_linear_source(mode.omega(), mode.q, mode.p, s0, s1, dt))
}

pub(crate) fn rotate_with_linear_source(w: f64, q: f64, p: f64, s0: f64, s1: f64, dt: f64) -> (f64, f64) {
    let w2 = w * w;
    let offset = s0 / w2;
    let slope = (s1 - s0) / (w2 * dt);
    let u = q - offset;
    let du = p - slope;
    let (sin, cos) = (w * dt).sin_cos();
    let q_new = offset + slope * dt + u * cos + du / w * sin;
    let p_new = slope + du * cos - u * w * sin;
    (q_new, p_new)
}

/// Energy of the coupled system; the photon term includes the dipole
/// self-energy.
pub fn total_energy(ff: &HarmonicForceField, m: &MatterState, modes: &[PhotonMode]) -> Result<CavityEnergyBreakdown> {
    let mu = dipole_moment(m)?;
    let potential_ff = crate::forcefield::potential_energy(ff, m)?;
    Ok(breakdown(m, potential_ff, modes, &mu))
}

pub(crate) fn breakdown(m: &MatterState, potential_ff: f64, modes: &[PhotonMode], mu: &Vec3) -> CavityEnergyBreakdown {
    let photon_kinetic = modes.iter().map(|md| 0.5 * md.p * md.p).sum();
    let photon_potential = photon_potential(modes, mu);
    CavityEnergyBreakdown::from_parts(m.kinetic_energy(), potential_ff, photon_kinetic, photon_potential)
}

pub(crate) fn photon_potential(modes: &[PhotonMode], mu: &Vec3) -> f64 {
    modes
        .iter()
        .map(|md| {
            let x = md.omega() * md.q + md.lambda().dot(mu);
            0.5 * x * x
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DriveSignal;
    use crate::presets::build_co2_preset;
    use crate::units::cm1_to_hartree;
    use approx::assert_relative_eq;

    fn mode(lambda: f64) -> PhotonMode {
        PhotonMode::from_cm1(2430.0, lambda, Vec3::x()).unwrap()
    }

    #[test]
    fn uncoupled_source_vanishes() {
        let m = PhotonMode::new(0.01, Vec3::zeros()).unwrap();
        assert_eq!(photon_source(&m, &Vec3::new(1.0, 2.0, 3.0), 0.0), 0.0);
    }

    #[test]
    fn source_is_direct_substitution() {
        let m = mode(0.05);
        let mu = Vec3::new(0.3, 7.0, -2.0);
        assert_relative_eq!(photon_source(&m, &mu, 0.0), -m.omega() * 0.05 * 0.3, epsilon = 1e-18);
    }

    #[test]
    fn stationary_coordinate_solves_photon_equation() {
        let m = mode(0.05)
            .with_drive(DriveSignal::Sinusoid {
                amplitude: 1e-4,
                angular_frequency: 0.0,
                phase: 0.0,
            })
            .unwrap();
        let mu = Vec3::new(0.02, 0.0, 0.0);
        let w = m.omega();
        let q = stationary_coordinate(&m, &mu, 0.0);
        assert_relative_eq!(q, -0.05 * 0.02 / w - 1e-4 / (w * w * w), max_relative = 1e-12);
        // q'' = -w^2 q - w lambda.mu - j/w = 0
        assert!((-w * w * q - w * 0.05 * 0.02 - 1e-4 / w).abs() < 1e-16);
    }

    #[test]
    fn zero_coupling_means_zero_cavity_force() {
        let (m, _) = build_co2_preset();
        let mut md = mode(0.0);
        md.q = 3.0;
        let f = cavity_force_on_atoms(&[md], &m).unwrap();
        assert!(f.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn cavity_force_is_gradient_of_photon_potential() {
        let (m, _) = build_co2_preset();
        let mut r = m.positions();
        r[0] += Vec3::new(0.03, -0.02, 0.01);
        r[2] += Vec3::new(-0.01, 0.04, 0.0);
        let m = m.with_positions(&r).unwrap();
        let mut a = PhotonMode::from_cm1(2430.0, 0.05, Vec3::new(1.0, 0.3, 0.0)).unwrap();
        a.q = 0.7;
        let mut b = PhotonMode::from_cm1(1000.0, 0.02, Vec3::z()).unwrap();
        b.q = -0.2;
        let modes = [a, b];
        let f = cavity_force_on_atoms(&modes, &m).unwrap();
        let h = 1e-5;
        for at in 0..3 {
            for k in 0..3 {
                let mut p = m.positions();
                let mut q = m.positions();
                p[at][k] += h;
                q[at][k] -= h;
                let ep = photon_potential(&modes, &dipole_moment(&m.with_positions(&p).unwrap()).unwrap());
                let eq = photon_potential(&modes, &dipole_moment(&m.with_positions(&q).unwrap()).unwrap());
                assert!((f[at][k] + (ep - eq) / (2.0 * h)).abs() < 1e-7);
            }
        }
        let net: Vec3 = f.iter().fold(Vec3::zeros(), |s, v| s + v);
        assert!(net.norm() < 1e-15);
    }

    #[test]
    fn displacement_field_formula() {
        let mut m = PhotonMode::new(0.011_07, Vec3::new(0.05, 0.0, 0.0)).unwrap();
        assert_eq!(displacement_field(&m), Vec3::zeros());
        m.q = 1.0;
        let d = displacement_field(&m);
        assert_relative_eq!(
            d.x,
            (4.0 * core::f64::consts::PI).sqrt() * 0.011_07 * 0.05,
            epsilon = 1e-16
        );
        m.q = -2.5;
        assert_relative_eq!(displacement_field(&m).x, -2.5 * d.x, epsilon = 1e-16);
    }

    #[test]
    fn quarter_period_rotation() {
        let w = cm1_to_hartree(2430.0);
        let mut m = PhotonMode::new(w, Vec3::zeros()).unwrap();
        m.q = 1.0;
        let period = 2.0 * core::f64::consts::PI / w;
        let (q, p) = propagate_photon_analytic(&m, 0.0, 0.0, period / 4.0).unwrap();
        assert!(q.abs() < 1e-14);
        assert_relative_eq!(p, -w, max_relative = 1e-14);
    }

    #[test]
    fn constant_source_fixed_point() {
        let w = 0.02;
        let s = 3e-5;
        let mut m = PhotonMode::new(w, Vec3::zeros()).unwrap();
        m.q = s / (w * w);
        let (q, p) = propagate_photon_analytic(&m, s, s, 17.3).unwrap();
        assert_relative_eq!(q, m.q, max_relative = 1e-14);
        assert!(p.abs() < 1e-16);
    }

    #[test]
    fn rejects_non_positive_step() {
        let m = mode(0.0);
        assert_eq!(
            propagate_photon_analytic(&m, 0.0, 0.0, 0.0),
            Err(Error::NonPositiveStep(0.0))
        );
        assert!(propagate_photon_analytic(&m, 0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn energy_breakdown() {
        let (m, ff) = build_co2_preset();
        let e = total_energy(&ff, &m, &[mode(0.05)]).unwrap();
        assert_eq!(e.total, 0.0);

        let mut r = m.positions();
        r[0].x += 0.02;
        let m = m.with_positions(&r).unwrap();
        let e = total_energy(&ff, &m, &[mode(0.05)]).unwrap();
        let lm = 0.05 * 0.8 * 0.02;
        assert_relative_eq!(e.photon_potential, 0.5 * lm * lm, max_relative = 1e-12);
        let sum = e.kinetic_matter + e.potential_ff + e.photon_kinetic + e.photon_potential;
        assert!((e.total - sum).abs() < 1e-12);
    }
}
