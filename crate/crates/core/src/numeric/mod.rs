//! Generic numerical kernels: quadrature, ODE integration, scalar search.

pub mod dopri;
pub mod linsolve;
pub mod quadrature;
pub mod search;
