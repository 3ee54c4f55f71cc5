//! Domain values shared across the toolkit.
//!
//! Units are fixed everywhere: wavelengths in nm, lifetimes in ns, lengths in
//! μm and rates in ns⁻¹. Mode volumes are stored in units of (λ/n)³ where λ is
//! the vacuum resonance wavelength and n the core index.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    /// Electric field in the plane of the ring (H_z dominant).
    TE,
    /// Electric field normal to the plane of the ring (E_z dominant).
    TM,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::TE => f.write_str("TE"),
            Polarization::TM => f.write_str("TM"),
        }
    }
}

impl std::str::FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TE" => Ok(Polarization::TE),
            "TM" => Ok(Polarization::TM),
            other => Err(Error::Parse(format!("unknown polarization `{other}`"))),
        }
    }
}

/// One optical resonance of the microresonator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityMode<T> {
    pub wavelength_nm: T,
    pub quality_factor: T,
    pub mode_volume_cubic_lambda_over_n: T,
    pub polarization: Polarization,
    pub azimuthal_number: u32,
    pub radial_number: u32,
}

impl<T: Real> CavityMode<T> {
    /// A resonance described only by what enters the enhancement formulas;
    /// the mode labels default to a TE fundamental.
    pub fn resonance(wavelength_nm: T, quality_factor: T, mode_volume: T) -> Self {
        CavityMode {
            wavelength_nm,
            quality_factor,
            mode_volume_cubic_lambda_over_n: mode_volume,
            polarization: Polarization::TE,
            azimuthal_number: 0,
            radial_number: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength_nm > T::zero()) {
            return Err(Error::invalid("wavelength_nm", "must be positive"));
        }
        if !(self.quality_factor > T::zero()) {
            return Err(Error::invalid("quality_factor", "must be positive"));
        }
        if !(self.mode_volume_cubic_lambda_over_n > T::zero()) {
            return Err(Error::invalid(
                "mode_volume_cubic_lambda_over_n",
                "must be positive",
            ));
        }
        if self.radial_number < 1 {
            return Err(Error::invalid("radial_number", "must be at least 1"));
        }
        Ok(())
    }

    /// Full width at half maximum of the resonance, λ/Q.
    pub fn linewidth_nm(&self) -> T {
        self.wavelength_nm / self.quality_factor
    }

    /// Mode volume in μm³ for a material of index `core_index`.
    pub fn mode_volume_cubic_um(&self, core_index: T) -> T {
        let unit = self.wavelength_nm * T::lit(1e-3) / core_index;
        self.mode_volume_cubic_lambda_over_n * unit * unit * unit
    }

    /// Same mode rigidly moved by `shift_nm`.
    pub fn shifted(&self, shift_nm: T) -> Self {
        CavityMode {
            wavelength_nm: self.wavelength_nm + shift_nm,
            ..*self
        }
    }
}

/// Position and orientation of the dipole relative to the cavity field,
/// folded into η = (E(r)·μ)/(|E_max||μ|).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingGeometry<T> {
    pub overlap_eta: T,
}

impl<T: Real> CouplingGeometry<T> {
    pub fn ideal() -> Self {
        CouplingGeometry {
            overlap_eta: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.overlap_eta >= T::zero() && self.overlap_eta <= T::one()) {
            return Err(Error::invalid("overlap_eta", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

fn default_leak_ratio<T: Real>() -> T {
    T::one()
}

/// A single emitter dipole line (the zero-phonon line of one color center).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Real"))]
pub struct EmitterTransition<T> {
    pub wavelength_nm: T,
    /// Total lifetime in the uniform bulk medium, τ₀.
    pub bulk_lifetime_ns: T,
    /// Fraction of bulk emission into the zero-phonon line, ξ = τ₀/τ_ZPL.
    pub zpl_branching_ratio: T,
    /// τ₀/τ_leak. Defaults to 1.
    #[serde(default = "default_leak_ratio")]
    pub leak_ratio: T,
    #[serde(default = "CouplingGeometry::ideal")]
    pub geometry: CouplingGeometry<T>,
}

impl<T: Real> EmitterTransition<T> {
    pub fn new(wavelength_nm: T, bulk_lifetime_ns: T, zpl_branching_ratio: T) -> Self {
        EmitterTransition {
            wavelength_nm,
            bulk_lifetime_ns,
            zpl_branching_ratio,
            leak_ratio: T::one(),
            geometry: CouplingGeometry::ideal(),
        }
    }

    pub fn with_overlap(mut self, overlap_eta: T) -> Self {
        self.geometry.overlap_eta = overlap_eta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        validate(self)
    }
}

/// Checks every invariant of `transition`, reporting the first violation.
pub fn validate<T: Real>(transition: &EmitterTransition<T>) -> Result<()> {
    if !(transition.wavelength_nm > T::zero()) {
        return Err(Error::invalid("wavelength_nm", "must be positive"));
    }
    if !(transition.bulk_lifetime_ns > T::zero()) {
        return Err(Error::invalid("bulk_lifetime_ns", "must be positive"));
    }
    let xi = transition.zpl_branching_ratio;
    if !(xi > T::zero() && xi < T::one()) {
        return Err(Error::invalid(
            "zpl_branching_ratio",
            "must lie in the open interval (0, 1)",
        ));
    }
    if !(transition.leak_ratio > T::zero()) {
        return Err(Error::invalid("leak_ratio", "must be positive"));
    }
    transition.geometry.validate()
}

/// Radiative rate decomposition into zero-phonon and sideband channels, with
/// the zero-phonon channel scaled by `leak_ratio + purcell_factor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Real"))]
pub struct DecayModel<T> {
    pub zpl_rate_per_ns: T,
    pub sideband_rate_per_ns: T,
    pub purcell_factor: T,
    #[serde(default = "default_leak_ratio")]
    pub leak_ratio: T,
}

impl<T: Real> DecayModel<T> {
    pub fn from_transition(transition: &EmitterTransition<T>, purcell_factor: T) -> Self {
        let tau0 = transition.bulk_lifetime_ns;
        let xi = transition.zpl_branching_ratio;
        DecayModel {
            zpl_rate_per_ns: xi / tau0,
            sideband_rate_per_ns: (T::one() - xi) / tau0,
            purcell_factor,
            leak_ratio: transition.leak_ratio,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.zpl_rate_per_ns >= T::zero()) {
            return Err(Error::invalid("zpl_rate_per_ns", "must be non-negative"));
        }
        if !(self.sideband_rate_per_ns >= T::zero()) {
            return Err(Error::invalid(
                "sideband_rate_per_ns",
                "must be non-negative",
            ));
        }
        if !(self.purcell_factor >= T::zero()) {
            return Err(Error::invalid("purcell_factor", "must be non-negative"));
        }
        Ok(())
    }

    pub fn enhanced_zpl_rate_per_ns(&self) -> T {
        (self.leak_ratio + self.purcell_factor) * self.zpl_rate_per_ns
    }

    pub fn total_rate_per_ns(&self) -> T {
        self.enhanced_zpl_rate_per_ns() + self.sideband_rate_per_ns
    }

    pub fn lifetime_ns(&self) -> T {
        self.total_rate_per_ns().recip()
    }

    /// Fraction of all emission that goes into the zero-phonon line.
    pub fn zpl_branching_ratio(&self) -> T {
        self.enhanced_zpl_rate_per_ns() / self.total_rate_per_ns()
    }
}

/// Ring resonator cross-section and materials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingGeometry<T> {
    pub outer_diameter_um: T,
    pub ring_width_um: T,
    pub membrane_thickness_um: T,
    pub core_index: T,
    pub cladding_index_top: T,
    pub cladding_index_bottom: T,
}

impl<T: Real> RingGeometry<T> {
    /// 4.8 μm diameter, 700 nm wide diamond ring etched in a 280 nm membrane,
    /// air above and below.
    pub fn diamond_microring() -> Self {
        RingGeometry {
            outer_diameter_um: T::lit(4.8),
            ring_width_um: T::lit(0.7),
            membrane_thickness_um: T::lit(0.28),
            core_index: T::lit(2.4),
            cladding_index_top: T::one(),
            cladding_index_bottom: T::one(),
        }
    }

    pub fn outer_radius_um(&self) -> T {
        self.outer_diameter_um / T::lit(2.0)
    }

    pub fn inner_radius_um(&self) -> T {
        self.outer_radius_um() - self.ring_width_um
    }

    pub fn max_cladding_index(&self) -> T {
        self.cladding_index_top.max(self.cladding_index_bottom)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.outer_diameter_um > T::zero()) {
            return Err(Error::invalid("outer_diameter_um", "must be positive"));
        }
        if !(self.ring_width_um > T::zero()) {
            return Err(Error::invalid("ring_width_um", "must be positive"));
        }
        if !(self.ring_width_um < self.outer_radius_um()) {
            return Err(Error::invalid(
                "ring_width_um",
                "must be smaller than the outer radius",
            ));
        }
        if !(self.membrane_thickness_um > T::zero()) {
            return Err(Error::invalid("membrane_thickness_um", "must be positive"));
        }
        if !(self.cladding_index_top > T::zero() && self.cladding_index_bottom > T::zero()) {
            return Err(Error::invalid("cladding_index", "must be positive"));
        }
        if !(self.core_index > self.max_cladding_index()) {
            return Err(Error::invalid(
                "core_index",
                "must exceed both cladding indices",
            ));
        }
        Ok(())
    }
}
