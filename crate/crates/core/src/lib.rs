//! Decomposed multi-group asymptotic-preserving solver for 1-D slab
//! frequency-dependent radiative transfer, with gray-diffusion and
//! frequency-dependent-diffusion limit solvers.

pub mod gauss;
pub mod linalg;
pub mod physics;
pub mod quadrature;
pub mod scaling;
pub mod ap_solver;
pub mod limit_solvers;
