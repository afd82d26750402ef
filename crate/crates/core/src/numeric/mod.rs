//! Small numerical kernels shared by the analysis modules: adaptive
//! Gauss–Kronrod quadrature, bracketing root finders, golden-section
//! minimisation and the binomial / regression statistics used by the
//! Monte Carlo estimators.

pub mod quad;
pub mod roots;
pub mod stats;
