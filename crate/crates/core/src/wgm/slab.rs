//! Three-layer slab waveguide: the vertical confinement of the ring.
//!
//! Guided modes satisfy the transverse resonance condition
//! κt = jπ + atan(r_top γ_top/κ) + atan(r_bot γ_bot/κ), with r = 1 for TE
//! and r = (n_core/n_clad)² for TM.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Polarization, RingGeometry};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabSolution<T> {
    pub effective_index: T,
    pub polarization: Polarization,
    pub slab_order: u32,
}

pub(crate) fn wavenumber_per_um<T: Real>(wavelength_nm: T) -> T {
    T::lit(2.0) * T::PI() / (wavelength_nm * T::lit(1e-3))
}

fn contrast<T: Real>(polarization: Polarization, core: T, clad: T) -> T {
    match polarization {
        Polarization::TE => T::one(),
        Polarization::TM => (core / clad).powi(2),
    }
}

/// Transverse resonance residual; decreasing in `n_eff` on the guided range.
pub fn dispersion_residual<T: Real>(
    geometry: &RingGeometry<T>,
    wavelength_nm: T,
    polarization: Polarization,
    order: u32,
    n_eff: T,
) -> T {
    let k = wavenumber_per_um(wavelength_nm);
    let n1 = geometry.core_index;
    let kappa = k * (n1 * n1 - n_eff * n_eff).max(T::zero()).sqrt();
    let phase = |clad: T| {
        let gamma = k * (n_eff * n_eff - clad * clad).max(T::zero()).sqrt();
        (contrast(polarization, n1, clad) * gamma).atan2(kappa)
    };
    kappa * geometry.membrane_thickness_um
        - phase(geometry.cladding_index_top)
        - phase(geometry.cladding_index_bottom)
        - T::from_count(order as usize) * T::PI()
}

/// Fundamental guided mode of the membrane at `wavelength_nm`.
pub fn solve_slab<T: Real>(
    geometry: &RingGeometry<T>,
    wavelength_nm: T,
    polarization: Polarization,
) -> Result<SlabSolution<T>> {
    solve_slab_order(geometry, wavelength_nm, polarization, 0)
}

pub fn solve_slab_order<T: Real>(
    geometry: &RingGeometry<T>,
    wavelength_nm: T,
    polarization: Polarization,
    order: u32,
) -> Result<SlabSolution<T>> {
    if !(wavelength_nm > T::zero()) {
        return Err(Error::invalid("wavelength_nm", "must be positive"));
    }
    let hi = geometry.core_index;
    let lo = geometry.max_cladding_index();
    if !(hi > lo) {
        return Err(Error::NoGuidedMode(format!(
            "core index {hi} does not exceed cladding index {lo}"
        )));
    }
    geometry.validate()?;
    let f = |n: T| dispersion_residual(geometry, wavelength_nm, polarization, order, n);
    let (mut a, mut b) = (lo, hi);
    if !(f(a) > T::zero()) {
        return Err(Error::NoGuidedMode(format!(
            "slab order {order} is below cutoff at {wavelength_nm} nm"
        )));
    }
    // f(a) > 0 > f(b); halve until the bracket stops shrinking
    for _ in 0..200 {
        let mid = (a + b) / T::lit(2.0);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            a = mid;
            b = mid;
            break;
        }
        if fm > T::zero() {
            a = mid;
        } else {
            b = mid;
        }
    }
    let n_eff = if f(a).abs() <= f(b).abs() { a } else { b };
    Ok(SlabSolution {
        effective_index: n_eff,
        polarization,
        slab_order: order,
    })
}

/// Vertical field profile of a slab mode, z = 0 at the bottom interface.
#[derive(Debug, Clone, Copy)]
pub struct SlabProfile<T> {
    pub polarization: Polarization,
    pub thickness_um: T,
    pub kappa: T,
    pub gamma_top: T,
    pub gamma_bottom: T,
    pub phase_bottom: T,
    pub core_index: T,
    pub index_top: T,
    pub index_bottom: T,
}

impl<T: Real> SlabProfile<T> {
    pub fn new(geometry: &RingGeometry<T>, wavelength_nm: T, solution: &SlabSolution<T>) -> Self {
        let k = wavenumber_per_um(wavelength_nm);
        let n1 = geometry.core_index;
        let ne = solution.effective_index;
        let kappa = k * (n1 * n1 - ne * ne).sqrt();
        let gamma = |clad: T| k * (ne * ne - clad * clad).max(T::zero()).sqrt();
        let gamma_bottom = gamma(geometry.cladding_index_bottom);
        let phase_bottom = (contrast(solution.polarization, n1, geometry.cladding_index_bottom)
            * gamma_bottom)
            .atan2(kappa);
        SlabProfile {
            polarization: solution.polarization,
            thickness_um: geometry.membrane_thickness_um,
            kappa,
            gamma_top: gamma(geometry.cladding_index_top),
            gamma_bottom,
            phase_bottom,
            core_index: n1,
            index_top: geometry.cladding_index_top,
            index_bottom: geometry.cladding_index_bottom,
        }
    }

    /// Continuous transverse function: E_y for TE, H_y for TM.
    pub fn psi(&self, z: T) -> T {
        let t = self.thickness_um;
        if z < T::zero() {
            self.phase_bottom.cos() * (self.gamma_bottom * z).exp()
        } else if z > t {
            (self.kappa * t - self.phase_bottom).cos() * (-self.gamma_top * (z - t)).exp()
        } else {
            (self.kappa * z - self.phase_bottom).cos()
        }
    }

    pub fn index_at(&self, z: T) -> T {
        if z < T::zero() {
            self.index_bottom
        } else if z > self.thickness_um {
            self.index_top
        } else {
            self.core_index
        }
    }

    /// Squared electric-field magnitude up to a constant.
    pub fn electric_sq(&self, z: T) -> T {
        let p = self.psi(z);
        match self.polarization {
            Polarization::TE => p * p,
            Polarization::TM => {
                let n2 = self.index_at(z).powi(2);
                p * p / (n2 * n2)
            }
        }
    }

    /// Distance beyond which the field has decayed by e^-`decades`·ln10 on both sides.
    pub fn tail_extent_um(&self, decades: T) -> (T, T) {
        let ln10 = T::LN_10();
        let floor = T::lit(1e-3);
        (
            decades * ln10 / self.gamma_bottom.max(floor),
            decades * ln10 / self.gamma_top.max(floor),
        )
    }
}
