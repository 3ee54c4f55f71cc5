//! Least-squares inverse problems: lifetimes from histograms and cavity
//! parameters from lifetime-vs-detuning scans.

mod detuning;
mod lifetime;
mod minimize;

pub use detuning::{detuning_curve, detuning_model, fit_detuning_scan, DetuningFitConfig};
pub use lifetime::{decay_value, fit_decay_curve, fit_lifetime, LifetimeModel, MIN_FIT_BINS};
pub use minimize::{least_squares, minimize, Bounds, FitReport, MinimizeOptions, Minimum};
