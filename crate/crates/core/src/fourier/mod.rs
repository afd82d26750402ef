//! Potentials on the torus in sparse Fourier form and their projections
//! onto one-dimensional resonance directions.

pub mod io;
mod potential;
mod profile;
mod wave;

pub use potential::{Evaluation, FourierPotential, Tail};
pub use profile::{Jet, OneDProfile};
pub use wave::{count_with_norm, sharp_up_to, sharp_with_norm, star_up_to, WaveVector};
