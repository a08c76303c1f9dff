//! Initial conditions: kicks, thermal velocities and photon start values.

use alloc::vec::Vec;

use rand_chacha::ChaCha20Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{MatterState, PhotonMode, Vec3};
use crate::units::{angstrom_to_bohr, BOLTZMANN_HA_PER_K};
// Shadowed by the inherent methods whenever std is in the build graph.
#[allow(unused_imports)]
use num_traits::Float;

/// Shift every atom of species `label` by `delta_angstrom`. Velocities are
/// left alone.
pub fn kick_displacement(m: &MatterState, label: &str, delta_angstrom: Vec3) -> Result<MatterState> {
    let species = m
        .species_index(label)
        .ok_or_else(|| Error::UnknownLabel(label.into()))?;
    let delta = delta_angstrom.map(angstrom_to_bohr);
    let positions: Vec<Vec3> = m
        .atoms()
        .iter()
        .map(|a| {
            if a.species == species {
                a.position + delta
            } else {
                a.position
            }
        })
        .collect();
    m.with_positions(&positions)
}

/// Draw every velocity component from `N(0, k_B T / M_a)`.
///
/// With `remove_com` the total linear momentum is subtracted afterwards.
/// Angular momentum is never removed, so a thermal molecule keeps spinning.
/// The stream is ChaCha20 keyed by `seed`, so equal seeds give equal
/// velocities on every platform.
pub fn sample_maxwell_boltzmann(m: &MatterState, temperature: f64, seed: u64, remove_com: bool) -> Result<MatterState> {
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::NegativeTemperature(temperature));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let kt = BOLTZMANN_HA_PER_K * temperature;
    let mut velocities: Vec<Vec3> = (0..m.len())
        .map(|i| {
            let sigma = (kt / m.mass(i)).sqrt();
            let mut v = Vec3::zeros();
            for k in 0..3 {
                let z: f64 = StandardNormal.sample(&mut rng);
                v[k] = sigma * z;
            }
            v
        })
        .collect();
    if remove_com {
        let total_mass = m.total_mass();
        let mut p = Vec3::zeros();
        for (i, v) in velocities.iter().enumerate() {
            p += v * m.mass(i);
        }
        let v_com = p / total_mass;
        for v in velocities.iter_mut() {
            *v -= v_com;
        }
    }
    m.with_velocities(&velocities)
}

/// Set the photon phase-space start point.
pub fn init_photon(mode: &PhotonMode, q0: f64, p0: f64) -> PhotonMode {
    let mut next = *mode;
    next.q = q0;
    next.p = p0;
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::build_co2_preset;

    #[test]
    fn kick_moves_only_the_named_species() {
        let (m, _) = build_co2_preset();
        let k = kick_displacement(&m, "C", Vec3::new(0.01, 0.0, 0.0)).unwrap();
        assert!((k.positions()[0].x - angstrom_to_bohr(0.01)).abs() < 1e-15);
        assert_eq!(k.positions()[1], m.positions()[1]);
        assert_eq!(k.velocities(), m.velocities());
        assert_eq!(kick_displacement(&m, "C", Vec3::zeros()).unwrap(), m);
        assert_eq!(
            kick_displacement(&m, "Xe", Vec3::x()),
            Err(Error::UnknownLabel("Xe".into()))
        );
    }

    #[test]
    fn zero_temperature_gives_zero_velocities() {
        let (m, _) = build_co2_preset();
        let s = sample_maxwell_boltzmann(&m, 0.0, 42, false).unwrap();
        assert!(s.velocities().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn negative_temperature_is_rejected() {
        let (m, _) = build_co2_preset();
        assert_eq!(
            sample_maxwell_boltzmann(&m, -1.0, 1, false),
            Err(Error::NegativeTemperature(-1.0))
        );
    }

    #[test]
    fn seed_determinism_and_com_removal() {
        let (m, _) = build_co2_preset();
        let a = sample_maxwell_boltzmann(&m, 100.0, 7, false).unwrap();
        let b = sample_maxwell_boltzmann(&m, 100.0, 7, false).unwrap();
        let c = sample_maxwell_boltzmann(&m, 100.0, 8, false).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.linear_momentum().norm() > 0.0);
        let d = sample_maxwell_boltzmann(&m, 100.0, 7, true).unwrap();
        assert!(d.linear_momentum().norm() < 1e-12);
    }

    #[test]
    fn photon_start_values() {
        let mode = PhotonMode::new(0.01, Vec3::x()).unwrap();
        let s = init_photon(&mode, 0.3, -0.1);
        assert_eq!((s.q, s.p), (0.3, -0.1));
        assert_eq!(s.omega(), mode.omega());
    }
}
