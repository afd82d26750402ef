//! Desk-scale survey of `H = ½|y|² + εf(x)`: integrate orbits, classify them
//! as torus / non-torus / undecided, estimate the non-torus fraction over
//! `B × Tⁿ` and fit its scaling in ε.

mod classify;
mod fit;
mod integrator;
mod run;

pub use classify::{classify_orbit, run_orbit, weighted_frequency, ClassifierSettings, OrbitClassification, Verdict};
pub use fit::{fit_points, scaling_fit, Hypothesis, ScalingFit, ScalingPoint};
pub use integrator::{fli, integrate, ForceField, Integrator, Propagator, Scheme, State, Trajectory};
pub use run::{nontorus_fraction, OrbitRecord, SurveyResult, SurveySettings, ZoneTally, MIN_ORBITS};
