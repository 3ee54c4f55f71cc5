//! Approximate whispering-gallery-mode solver for a ring resonator.
//!
//! The 3D ring is reduced to a vertical slab (effective index) times a 2D
//! radial boundary-value problem solved with cylinder functions.

pub mod bessel;
pub mod resonance;
pub mod slab;
pub mod volume;

pub use bessel::{bessel_j, bessel_j_prime, bessel_jy, bessel_y, CylinderPair};
pub use resonance::{
    characteristic, choose_model, find_resonances, RadialModel, Resonance, SolverOptions,
};
pub use slab::{dispersion_residual, solve_slab, solve_slab_order, SlabProfile, SlabSolution};
pub use volume::{energy_volume_um3, mode_volume, mode_volume_with, radial_field, RadialField};
