//! Potentials, Papangelou intensity, Hamiltonian and U-statistics.

mod interaction;
mod spec;
mod ustat;

use thiserror::Error;

pub use interaction::{hamiltonian, local_energy, papangelou, papangelou_p, papangelou_parts};
pub use spec::{
    unit_ball_volume, Diagnostic, Energy, ModelSpec, OrientationLaw, PairFn, PairStep, ParticleLaw, Potential,
    Validation,
};
pub use ustat::{score, u_statistic, Kernel, KernelFn, UStatSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("configurations share a particle")]
    OverlappingSupports,
    #[error("invalid model: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("unsupported kernel: {0}")]
    UnsupportedKernel(String),
}
