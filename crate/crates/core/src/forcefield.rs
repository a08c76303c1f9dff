//! Harmonic intramolecular force field. Closes the electronic problem with
//! bond, angle and bond-bond coupling terms.

use alloc::{format, vec, vec::Vec};
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{MatterState, Vec3};
// Shadowed by the inherent methods whenever std is in the build graph.
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond {
    pub i: usize,
    pub j: usize,
    /// bohr
    pub r0: f64,
    /// Ha / bohr^2
    pub k: f64,
}

/// Angle `i-j-k` with `j` at the vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    /// radians
    pub theta0: f64,
    /// Ha / rad^2
    pub k_theta: f64,
}

/// Cross term `k * (r_a - r0_a) * (r_b - r0_b)` between two bonds, referenced
/// by their position in the bond list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondCoupling {
    pub a: usize,
    pub b: usize,
    /// Ha / bohr^2
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HarmonicForceField {
    bonds: Vec<Bond>,
    angles: Vec<Angle>,
    couplings: Vec<BondCoupling>,
}

impl HarmonicForceField {
    pub fn new(bonds: Vec<Bond>, angles: Vec<Angle>, couplings: Vec<BondCoupling>) -> Result<Self> {
        for b in &bonds {
            if !(b.k >= 0.0 && b.k.is_finite() && b.r0 > 0.0 && b.r0.is_finite()) {
                return Err(Error::InvalidSystem(format!("bad bond parameters {b:?}")));
            }
            if b.i == b.j {
                return Err(Error::InvalidSystem(format!("bond {}-{} is degenerate", b.i, b.j)));
            }
        }
        for a in &angles {
            if !(a.k_theta >= 0.0 && a.k_theta.is_finite() && (0.0..=PI).contains(&a.theta0)) {
                return Err(Error::InvalidSystem(format!("bad angle parameters {a:?}")));
            }
            if a.i == a.j || a.j == a.k || a.i == a.k {
                return Err(Error::InvalidSystem("angle repeats an atom".into()));
            }
        }
        for c in &couplings {
            if !c.k.is_finite() {
                return Err(Error::InvalidSystem("non-finite bond coupling".into()));
            }
            for idx in [c.a, c.b] {
                if idx >= bonds.len() {
                    return Err(Error::IndexOutOfRange {
                        index: idx,
                        count: bonds.len(),
                    });
                }
            }
            if c.a == c.b {
                return Err(Error::InvalidSystem("bond coupled to itself".into()));
            }
            // Cross term must not make the stretch block indefinite.
            let (ka, kb) = (bonds[c.a].k, bonds[c.b].k);
            if c.k * c.k > ka * kb {
                return Err(Error::InvalidSystem(format!(
                    "bond coupling {} exceeds sqrt(k_a k_b)",
                    c.k
                )));
            }
        }
        Ok(Self {
            bonds,
            angles,
            couplings,
        })
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn angles(&self) -> &[Angle] {
        &self.angles
    }

    pub fn couplings(&self) -> &[BondCoupling] {
        &self.couplings
    }

    /// Largest atom index referenced, if any.
    pub fn max_atom_index(&self) -> Option<usize> {
        let b = self.bonds.iter().map(|b| b.i.max(b.j));
        let a = self.angles.iter().map(|a| a.i.max(a.j).max(a.k));
        b.chain(a).max()
    }

    fn check_indices(&self, n: usize) -> Result<()> {
        match self.max_atom_index() {
            Some(idx) if idx >= n => Err(Error::IndexOutOfRange { index: idx, count: n }),
            _ => Ok(()),
        }
    }
}

fn bond_stretch(b: &Bond, r: &[Vec3]) -> (f64, Vec3) {
    let d = r[b.j] - r[b.i];
    let len = d.norm();
    (len - b.r0, d / len)
}

/// Bending angle via atan2, accurate near 0 and pi.
fn bend_angle(a: &Angle, r: &[Vec3]) -> (f64, Vec3, Vec3) {
    let u = r[a.i] - r[a.j];
    let v = r[a.k] - r[a.j];
    let theta = u.cross(&v).norm().atan2(u.dot(&v));
    (theta, u, v)
}

/// `x / sin(x)` without the removable singularity at zero.
fn x_over_sin(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 6.0 + 7.0 * x2 * x2 / 360.0
    } else {
        x / x.sin()
    }
}

/// `(theta - theta0) / sin(theta)`, finite for linear references.
fn angle_prefactor(theta: f64, theta0: f64) -> f64 {
    if (theta0 - PI).abs() < 1e-12 {
        -x_over_sin(PI - theta)
    } else if theta0.abs() < 1e-12 {
        x_over_sin(theta)
    } else {
        (theta - theta0) / theta.sin()
    }
}

/// Force-field energy in Hartree.
pub fn potential_energy(ff: &HarmonicForceField, m: &MatterState) -> Result<f64> {
    ff.check_indices(m.len())?;
    let r = m.positions();
    Ok(energy_at(ff, &r))
}

pub(crate) fn energy_at(ff: &HarmonicForceField, r: &[Vec3]) -> f64 {
    let stretches: Vec<f64> = ff.bonds.iter().map(|b| bond_stretch(b, r).0).collect();
    let mut e = 0.0;
    for (b, d) in ff.bonds.iter().zip(&stretches) {
        e += 0.5 * b.k * d * d;
    }
    for c in &ff.couplings {
        e += c.k * stretches[c.a] * stretches[c.b];
    }
    for a in &ff.angles {
        let (theta, _, _) = bend_angle(a, r);
        let d = theta - a.theta0;
        e += 0.5 * a.k_theta * d * d;
    }
    e
}

/// Per-atom forces `-dV/dR` in Ha/bohr.
pub fn matter_forces(ff: &HarmonicForceField, m: &MatterState) -> Result<Vec<Vec3>> {
    ff.check_indices(m.len())?;
    Ok(forces_at(ff, &m.positions()))
}

pub(crate) fn forces_at(ff: &HarmonicForceField, r: &[Vec3]) -> Vec<Vec3> {
    let mut f = vec![Vec3::zeros(); r.len()];
    let geo: Vec<(f64, Vec3)> = ff.bonds.iter().map(|b| bond_stretch(b, r)).collect();

    // dV/d(stretch) for every bond, including the cross terms.
    let mut dv_dstretch: Vec<f64> = ff.bonds.iter().zip(&geo).map(|(b, (d, _))| b.k * d).collect();
    for c in &ff.couplings {
        dv_dstretch[c.a] += c.k * geo[c.b].0;
        dv_dstretch[c.b] += c.k * geo[c.a].0;
    }
    for ((b, (_, unit)), g) in ff.bonds.iter().zip(&geo).zip(&dv_dstretch) {
        // d r / d R_j = unit, d r / d R_i = -unit
        f[b.i] += unit * *g;
        f[b.j] -= unit * *g;
    }

    for a in &ff.angles {
        let (theta, u, v) = bend_angle(a, r);
        let (lu, lv) = (u.norm(), v.norm());
        let (uh, vh) = (u / lu, v / lv);
        let cos = theta.cos();
        // F_i = k (theta - theta0) / sin(theta) * (v^ - cos u^) / |u|
        let pref = a.k_theta * angle_prefactor(theta, a.theta0);
        let fi = (vh - uh * cos) * (pref / lu);
        let fk = (uh - vh * cos) * (pref / lv);
        f[a.i] += fi;
        f[a.k] += fk;
        f[a.j] -= fi + fk;
    }
    f
}
