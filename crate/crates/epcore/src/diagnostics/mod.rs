//! Observables and detectors on top of the core: Petermann factors, density-matrix
//! evolution, fidelities, population ratios and symmetry residuals.

pub mod density;
pub mod observables;
pub mod petermann;

pub use density::{
    analytic_mixed_fidelity, density_evolve, diagonal_density, dirichlet_weights, least_squares_slope, mixed_state_ensemble,
    DensityTrajectory, EnsembleAverage,
};
pub use observables::{
    entanglement_transfer_fidelities, splitting_ratio, symmetry_residuals, SymmetryOperators, SymmetryResiduals,
    TransferFidelities,
};
pub use petermann::{petermann, petermann_of, petermann_with, PetermannReport, PETERMANN_CAP};
