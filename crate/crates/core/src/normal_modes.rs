//! Harmonic analysis about an equilibrium geometry.
//!
//! [`hessian_fd`] differentiates the force field numerically,
//! [`NormalModeSet`] diagonalizes the mass-weighted Hessian, and
//! [`PolaritonModel`] linearizes the coupled nuclei + cavity equations of
//! motion. The polariton eigenvalues give the Rabi splitting that the
//! dynamics must reproduce.

use alloc::{format, vec::Vec};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::forcefield::{forces_at, HarmonicForceField};
use crate::model::{dipole_jacobian, MatterState, PhotonMode, Vec3};
use crate::units::HARTREE_TO_CM1;
// Shadowed by the inherent methods whenever std is in the build graph.
#[allow(unused_imports)]
use num_traits::Float;

/// Largest force allowed at the expansion point.
pub const MINIMUM_FORCE_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_FD_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct HessianReport {
    /// Symmetrized Cartesian Hessian, Ha/bohr^2, Richardson-extrapolated
    /// from the steps `h` and `h / 2`.
    pub matrix: DMatrix<f64>,
    pub step: f64,
    /// `max |H - H^T|` before symmetrization.
    pub symmetry_defect: f64,
    /// `max |H(step) - H(step / 2)|`.
    pub richardson_defect: f64,
}

fn raw_hessian(ff: &HarmonicForceField, r0: &[Vec3], h: f64) -> DMatrix<f64> {
    let n = 3 * r0.len();
    let mut hess = DMatrix::zeros(n, n);
    let mut r = r0.to_vec();
    for col in 0..n {
        let (a, k) = (col / 3, col % 3);
        r[a][k] = r0[a][k] + h;
        let fp = forces_at(ff, &r);
        r[a][k] = r0[a][k] - h;
        let fm = forces_at(ff, &r);
        r[a][k] = r0[a][k];
        for row in 0..n {
            let (b, l) = (row / 3, row % 3);
            hess[(row, col)] = -(fp[b][l] - fm[b][l]) / (2.0 * h);
        }
    }
    hess
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Central-difference Hessian of the force field at `m_eq`.
///
/// Fails with [`Error::NotAtMinimum`] unless every force component is
/// below [`MINIMUM_FORCE_TOLERANCE`].
pub fn hessian_fd(ff: &HarmonicForceField, m_eq: &MatterState, step: f64) -> Result<HessianReport> {
    if !(step > 0.0) {
        return Err(Error::NonPositiveStep(step));
    }
    let r0 = m_eq.positions();
    let forces = crate::forcefield::matter_forces(ff, m_eq)?;
    let max_force = forces.iter().fold(0.0, |acc: f64, f| acc.max(f.amax()));
    if max_force > MINIMUM_FORCE_TOLERANCE {
        return Err(Error::NotAtMinimum { max_force });
    }
    let coarse = raw_hessian(ff, &r0, step);
    let fine = raw_hessian(ff, &r0, 0.5 * step);
    let richardson_defect = max_abs(&(&coarse - &fine));
    // Central differences are even in the step, so this cancels the h^2 term.
    let raw = (fine * 4.0 - coarse) / 3.0;
    let symmetry_defect = max_abs(&(&raw - raw.transpose()));
    let matrix = (&raw + raw.transpose()) * 0.5;
    Ok(HessianReport {
        matrix,
        step,
        symmetry_defect,
        richardson_defect,
    })
}

/// Signed wavenumber of an angular-frequency-squared eigenvalue; negative
/// curvature is reported as a negative frequency.
pub fn eigenvalue_to_cm1(ev: f64) -> f64 {
    ev.signum() * ev.abs().sqrt() * HARTREE_TO_CM1
}

fn sorted_eigen(m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigensolver("matrix has non-finite entries".into()));
    }
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Eigensolver(format!("no convergence for {n}x{n} matrix")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

fn inv_sqrt_masses(masses: &[f64]) -> Vec<f64> {
    masses
        .iter()
        .flat_map(|&m| {
            let s = 1.0 / m.sqrt();
            [s, s, s]
        })
        .collect()
}

fn mass_weight(h: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(h.nrows(), h.ncols(), |i, j| h[(i, j)] * w[i] * w[j])
}

/// Eigen-decomposition of the mass-weighted Hessian, ascending in
/// eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalModeSet {
    /// cm^-1, negative for imaginary modes
    pub frequencies: Vec<f64>,
    /// Squared angular frequencies, Ha^2.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal mass-weighted eigenvectors, one per column.
    pub vectors: DMatrix<f64>,
    /// `|d mu / d Q|^2` per mode; zeros when no dipole Jacobian was given.
    pub ir_intensity: Vec<f64>,
    inv_sqrt_mass: Vec<f64>,
}

impl NormalModeSet {
    pub fn from_hessian(
        hessian: &DMatrix<f64>,
        masses: &[f64],
        dipole_jacobian: Option<&DMatrix<f64>>,
    ) -> Result<Self> {
        let n = hessian.nrows();
        if hessian.ncols() != n || n != 3 * masses.len() {
            return Err(Error::InvalidSystem(format!(
                "Hessian is {}x{}, expected {}x{}",
                n,
                hessian.ncols(),
                3 * masses.len(),
                3 * masses.len()
            )));
        }
        let w = inv_sqrt_masses(masses);
        let (eigenvalues, vectors) = sorted_eigen(mass_weight(hessian, &w))?;
        let frequencies = eigenvalues.iter().map(|&e| eigenvalue_to_cm1(e)).collect();
        let ir_intensity = (0..n)
            .map(|k| match dipole_jacobian {
                Some(j) => {
                    let cart = DVector::from_fn(n, |i, _| vectors[(i, k)] * w[i]);
                    (j * cart).norm_squared()
                }
                None => 0.0,
            })
            .collect();
        Ok(Self {
            frequencies,
            eigenvalues,
            vectors,
            ir_intensity,
            inv_sqrt_mass: w,
        })
    }

    /// Hessian, masses and dipole Jacobian all taken from `m_eq`.
    pub fn analyze(ff: &HarmonicForceField, m_eq: &MatterState, step: f64) -> Result<Self> {
        let h = hessian_fd(ff, m_eq, step)?;
        Self::from_hessian(&h.matrix, &m_eq.masses(), Some(&dipole_jacobian(m_eq)))
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Cartesian displacement pattern `M^{-1/2} e` of mode `k`.
    pub fn cartesian_displacement(&self, k: usize) -> Vec<Vec3> {
        let n = self.inv_sqrt_mass.len() / 3;
        (0..n)
            .map(|a| {
                Vec3::new(
                    self.vectors[(3 * a, k)] * self.inv_sqrt_mass[3 * a],
                    self.vectors[(3 * a + 1, k)] * self.inv_sqrt_mass[3 * a + 1],
                    self.vectors[(3 * a + 2, k)] * self.inv_sqrt_mass[3 * a + 2],
                )
            })
            .collect()
    }

    pub fn near_zero_count(&self, threshold_cm1: f64) -> usize {
        self.frequencies.iter().filter(|f| f.abs() < threshold_cm1).count()
    }

    /// Frequencies above `threshold_cm1`, ascending.
    pub fn vibrational_frequencies(&self, threshold_cm1: f64) -> Vec<f64> {
        self.frequencies
            .iter()
            .copied()
            .filter(|f| f.abs() >= threshold_cm1)
            .collect()
    }
}

/// Orthonormal mass-weighted rigid-body basis (3 translations and up to 3
/// rotations) about the centre of mass.
pub fn rigid_body_basis(m: &MatterState) -> Vec<DVector<f64>> {
    let n = m.len();
    let com = m.center_of_mass();
    let mut candidates = Vec::with_capacity(6);
    for k in 0..3 {
        let e = Vec3::ith(k, 1.0);
        candidates.push(DVector::from_fn(3 * n, |i, _| {
            if i % 3 == k {
                m.mass(i / 3).sqrt()
            } else {
                0.0
            }
        }));
        let rot: Vec<Vec3> = (0..n)
            .map(|a| e.cross(&(m.atoms()[a].position - com)) * m.mass(a).sqrt())
            .collect();
        candidates.push(DVector::from_fn(3 * n, |i, _| rot[i / 3][i % 3]));
    }
    let scale = candidates.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for mut v in candidates {
        for b in &basis {
            let c = b.dot(&v);
            v -= b * c;
        }
        let norm = v.norm();
        if norm > 1e-8 * scale {
            basis.push(v / norm);
        }
    }
    basis
}

/// Linearized nuclei + photon problem about an equilibrium geometry.
///
/// With mass-weighted matter coordinates `x` and photon coordinates `q`,
/// the quadratic potential is
/// `1/2 x^T (K + sum g g^T) x + sum w q g.x + 1/2 sum w^2 q^2`, where
/// `K = M^{-1/2} H M^{-1/2}` and `g = M^{-1/2} (d mu/d R)^T lambda`. The `g g^T`
/// block is the dipole self-energy curvature. Rigid-body motions are
/// projected out of the matter block first.
#[derive(Debug, Clone, PartialEq)]
pub struct PolaritonModel {
    pub matrix: DMatrix<f64>,
    /// Ascending squared angular frequencies.
    pub eigenvalues: Vec<f64>,
    pub vectors: DMatrix<f64>,
    /// cm^-1, ascending
    pub frequencies: Vec<f64>,
    /// Photon share of each eigenvector's norm; the matter share is `1 - w`.
    pub photon_weights: Vec<f64>,
    n_matter: usize,
    /// `trace(K)` after projection plus `sum w^2`.
    pub uncoupled_trace: f64,
    /// `sum |g|^2`.
    pub self_energy_trace: f64,
}

impl PolaritonModel {
    pub fn assemble(hessian: &DMatrix<f64>, m_eq: &MatterState, modes: &[PhotonMode]) -> Result<Self> {
        let nm = 3 * m_eq.len();
        if hessian.nrows() != nm || hessian.ncols() != nm {
            return Err(Error::InvalidSystem("Hessian size does not match the system".into()));
        }
        for md in modes {
            if !(md.omega() > 0.0) {
                return Err(Error::InvalidMode(format!(
                    "photon frequency {} is not positive",
                    md.omega()
                )));
            }
        }
        let w = inv_sqrt_masses(&m_eq.masses());
        let mut projector = DMatrix::<f64>::identity(nm, nm);
        for b in rigid_body_basis(m_eq) {
            projector -= &b * b.transpose();
        }
        let k = &projector * mass_weight(hessian, &w) * &projector;
        let jac = dipole_jacobian(m_eq);
        let gs: Vec<DVector<f64>> = modes
            .iter()
            .map(|md| {
                let g = jac.transpose() * DVector::from_column_slice(md.lambda().as_slice());
                &projector * DVector::from_fn(nm, |i, _| g[i] * w[i])
            })
            .collect();

        let dim = nm + modes.len();
        let mut matrix = DMatrix::zeros(dim, dim);
        matrix.view_mut((0, 0), (nm, nm)).copy_from(&k);
        for (a, (md, g)) in modes.iter().zip(&gs).enumerate() {
            let mut block = matrix.view_mut((0, 0), (nm, nm));
            block += g * g.transpose();
            let col = nm + a;
            for i in 0..nm {
                matrix[(i, col)] = md.omega() * g[i];
                matrix[(col, i)] = md.omega() * g[i];
            }
            matrix[(col, col)] = md.omega() * md.omega();
        }
        let uncoupled_trace = k.trace() + modes.iter().map(|m| m.omega() * m.omega()).sum::<f64>();
        let self_energy_trace = gs.iter().map(|g| g.norm_squared()).sum();

        let (eigenvalues, vectors) = sorted_eigen(matrix.clone())?;
        let frequencies = eigenvalues.iter().map(|&e| eigenvalue_to_cm1(e)).collect();
        let photon_weights = (0..dim)
            .map(|c| (nm..dim).map(|r| vectors[(r, c)] * vectors[(r, c)]).sum())
            .collect();
        Ok(Self {
            matrix,
            eigenvalues,
            vectors,
            frequencies,
            photon_weights,
            n_matter: nm,
            uncoupled_trace,
            self_energy_trace,
        })
    }

    pub fn matter_dimension(&self) -> usize {
        self.n_matter
    }

    /// The two light-matter hybrids closest to `center_cm1` on either side,
    /// as `(lower, upper)` wavenumbers. Only eigenvectors with at least
    /// `min_weight` of both photon and matter character count.
    pub fn polariton_pair(&self, center_cm1: f64, min_weight: f64) -> Option<(f64, f64)> {
        let mixed = |i: &usize| {
            let w = self.photon_weights[*i];
            w >= min_weight && 1.0 - w >= min_weight
        };
        let idx: Vec<usize> = (0..self.frequencies.len()).filter(mixed).collect();
        let lower = idx
            .iter()
            .map(|&i| self.frequencies[i])
            .filter(|&f| f < center_cm1)
            .fold(None, |acc: Option<f64>, f| Some(acc.map_or(f, |a| a.max(f))));
        let upper = idx
            .iter()
            .map(|&i| self.frequencies[i])
            .filter(|&f| f >= center_cm1)
            .fold(None, |acc: Option<f64>, f| Some(acc.map_or(f, |a| a.min(f))));
        Some((lower?, upper?))
    }

    /// Upper minus lower polariton, in cm^-1.
    pub fn rabi_splitting(&self, center_cm1: f64) -> Option<f64> {
        self.polariton_pair(center_cm1, 1e-3).map(|(lo, hi)| hi - lo)
    }
}

/// Sorted polariton wavenumbers for the equilibrium `m_eq` coupled to `modes`.
pub fn polariton_frequencies(hessian: &DMatrix<f64>, m_eq: &MatterState, modes: &[PhotonMode]) -> Result<Vec<f64>> {
    Ok(PolaritonModel::assemble(hessian, m_eq, modes)?.frequencies)
}
