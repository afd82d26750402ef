//! Numerical toolkit for nearly-integrable mechanical systems
//! `H = ½|y|² + ε f(x)` with real-analytic potentials on `Tⁿ`.
//!
//! * [`fourier`]: sparse Fourier potentials, weighted norms and their
//!   one-dimensional projections `F_k`.
//! * [`class`]: the Morse-type genericity conditions on the projections,
//!   their critical curves and the repair of a potential into the open
//!   good set.
//! * [`resonance`]: resonant modes and the zone decomposition of action
//!   space.
//! * [`one_dof`]: phase portraits, action-angle profiles and the measure
//!   lemmas for `η²/2 + F(ξ)`.
//! * [`random`]: product measures on potential space.
//! * [`survey`]: symplectic integration, torus detection and the
//!   non-torus fraction versus `ε`.

pub mod class;
pub mod error;
pub mod exec;
pub mod fourier;
pub mod numeric;
pub mod one_dof;
pub mod random;
pub mod resonance;
pub mod survey;

pub use error::{Error, Result};
pub use exec::Exec;
