//! The one-degree-of-freedom energy `E(η, ξ) = η²/2 + F(ξ)`: phase
//! components, action-angle profiles `p ↦ E(p)` with `E′ = ω` and `E″`,
//! Kolmogorov margins and two measure lemmas.

mod components;
mod integrals;
mod lemmas;
mod profile;

pub use components::{component_graph, ComponentKind, Edge, LiftedPoint, PhaseComponent};
pub use integrals::{action_of_energy, e2_richardson, orbit_integrals, period, OrbitIntegrals};
pub use lemmas::{critical_band_measure, free_rotor_band, level_set_measure, BandMeasure, LevelFunction};
pub use profile::{
    default_a, energy_of_action, kolmogorov_margin, theta_scale, ActionPoint, ActionProfile, GridOptions, KolmogorovMargin,
};
