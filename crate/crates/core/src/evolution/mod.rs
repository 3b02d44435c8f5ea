//! Reduced density matrix of the system at time `t`.

mod density;
mod kernel;
mod oracle;

pub use density::{
    basis_change, DensityMatrix, DiagonalDistribution, InvariantReport, HERMITICITY_TOLERANCE,
    PSD_TOLERANCE, TRACE_TOLERANCE,
};
pub use kernel::{
    free_particle_momentum_kernel, long_time_diagonal, momentum_kernel, position_kernel,
    FactorizedKernel, Mass, ModelParams,
};
pub use oracle::{brute_force_reduced, brute_force_reduced_with, OracleGrids, ORACLE_AXIS_CAP};
