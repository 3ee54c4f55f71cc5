//! Emitter–microresonator coupling toolkit.
//!
//! Models a zero-phonon-line dipole coupled to whispering-gallery modes of a
//! ring resonator: resonance search, mode volumes, Purcell enhancement,
//! modified lifetimes and branching ratios, plus the forward simulators and
//! least-squares fits used to analyse lifetime and detuning data.
//!
//! Every numerical routine is generic over [`Real`] (`f32` or `f64`). The
//! aliases at the crate root fix the scalar to `f64`.

// `!(x > 0)` is the NaN-rejecting form used by every validator.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod fit;
pub mod io;
pub mod model;
pub mod purcell;
pub mod reproduce;
pub mod scalar;
pub mod spectra;
pub mod wgm;

pub use error::{Error, Result};
pub use model::{validate, Polarization};
pub use scalar::Real;

pub type CavityMode = model::CavityMode<f64>;
pub type CouplingGeometry = model::CouplingGeometry<f64>;
pub type EmitterTransition = model::EmitterTransition<f64>;
pub type DecayModel = model::DecayModel<f64>;
pub type RingGeometry = model::RingGeometry<f64>;
pub type SlabSolution = wgm::SlabSolution<f64>;
pub type RadialField = wgm::RadialField<f64>;
pub type Resonance = wgm::Resonance<f64>;
pub type EnhancementResult = purcell::EnhancementResult<f64>;
pub type Histogram = dynamics::Histogram<f64>;
pub type DetuningScan = dynamics::DetuningScan<f64>;
pub type FitReport = fit::FitReport<f64>;
pub type SpectrumConfig = spectra::SpectrumConfig<f64>;
