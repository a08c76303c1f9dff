use alloc::string::String;

/// Errors raised by the core model and its numerical operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("atom index {index} out of range for {count} atoms")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("unknown atom label `{0}`")]
    UnknownLabel(String),
    #[error("total charge {0:+.3e} is nonzero; dipole is origin dependent and no origin was configured")]
    ChargedSystem(f64),
    #[error("invalid photon mode: {0}")]
    InvalidMode(String),
    #[error("invalid drive: {0}")]
    InvalidDrive(String),
    #[error("invalid integration plan: {0}")]
    InvalidPlan(String),
    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("temperature must be non-negative, got {0} K")]
    NegativeTemperature(f64),
    #[error("non-finite {term} force on atom {atom} at t = {time:.6} a.u.")]
    NonFiniteForce { atom: usize, term: ForceTerm, time: f64 },
    #[error("geometry is not at a force-field minimum (max |F| = {max_force:.3e} Ha/bohr)")]
    NotAtMinimum { max_force: f64 },
    #[error("eigensolver failure: {0}")]
    Eigensolver(String),
}

/// Which contribution to the nuclear force went bad.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForceTerm {
    ForceField,
    Cavity,
    External,
}

impl core::fmt::Display for ForceTerm {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            ForceTerm::ForceField => "force-field",
            ForceTerm::Cavity => "cavity",
            ForceTerm::External => "external",
        })
    }
}

pub type Result<T> = core::result::Result<T, Error>;
