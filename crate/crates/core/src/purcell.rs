//! Spontaneous-emission enhancement of a dipole coupled to cavity modes.
//!
//! The ideal-placement ceiling is F_cav = (3/4π²)(λ/n)³ Q/V; a real emitter
//! sees F = F_cav η² L(λ_i), where L is the Lorentzian detuning factor
//! 1/(1 + 4Q²(λ_i/λ_cav − 1)²). Contributions from several modes add.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CavityMode, EmitterTransition};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnhancementResult<T> {
    /// Summed cavity enhancement F.
    pub purcell_f: T,
    /// `leak_ratio + F`: total rate enhancement of the transition.
    pub total_factor: T,
    /// (index into the mode list, F contributed by that mode).
    pub per_mode_f: Vec<(usize, T)>,
}

/// F_cav for ideal placement and zero detuning; mode volume in (λ/n)³.
pub fn f_cav<T: Real>(mode: &CavityMode<T>) -> T {
    let pi = T::PI();
    T::lit(3.0) / (T::lit(4.0) * pi * pi) * mode.quality_factor
        / mode.mode_volume_cubic_lambda_over_n
}

/// Detuning factor in [0, 1], expressed through the wavelength ratio.
pub fn lorentzian_detuning<T: Real>(mode: &CavityMode<T>, emitter_wavelength_nm: T) -> T {
    let q = mode.quality_factor;
    let d = emitter_wavelength_nm / mode.wavelength_nm - T::one();
    (T::one() + T::lit(4.0) * q * q * d * d).recip()
}

/// F for one mode, using the emitter's own overlap η.
pub fn purcell_factor<T: Real>(mode: &CavityMode<T>, emitter: &EmitterTransition<T>) -> T {
    purcell_factor_with_overlap(mode, emitter.wavelength_nm, emitter.geometry.overlap_eta)
}

pub fn purcell_factor_with_overlap<T: Real>(
    mode: &CavityMode<T>,
    emitter_wavelength_nm: T,
    overlap_eta: T,
) -> T {
    f_cav(mode) * overlap_eta * overlap_eta * lorentzian_detuning(mode, emitter_wavelength_nm)
}

/// Sum of independent per-mode enhancements, each with its own η.
pub fn total_enhancement<T: Real>(
    modes: &[CavityMode<T>],
    overlaps: &[T],
    emitter: &EmitterTransition<T>,
) -> Result<EnhancementResult<T>> {
    if modes.len() != overlaps.len() {
        return Err(Error::LengthMismatch {
            what: "modes and overlap factors",
            left: modes.len(),
            right: overlaps.len(),
        });
    }
    let peaks: Vec<T> = modes
        .iter()
        .zip(overlaps)
        .map(|(m, &eta)| f_cav(m) * eta * eta)
        .collect();
    total_enhancement_from_peaks(modes, &peaks, emitter.wavelength_nm, emitter.leak_ratio)
}

/// As [`total_enhancement`], with each mode's on-resonance F given directly
/// (F_cav η² already folded in, as in a fit).
pub fn total_enhancement_from_peaks<T: Real>(
    modes: &[CavityMode<T>],
    peak_f: &[T],
    emitter_wavelength_nm: T,
    leak_ratio: T,
) -> Result<EnhancementResult<T>> {
    if modes.len() != peak_f.len() {
        return Err(Error::LengthMismatch {
            what: "modes and peak enhancements",
            left: modes.len(),
            right: peak_f.len(),
        });
    }
    let per_mode_f: Vec<(usize, T)> = modes
        .iter()
        .zip(peak_f)
        .enumerate()
        .map(|(i, (m, &peak))| (i, peak * lorentzian_detuning(m, emitter_wavelength_nm)))
        .collect();
    let purcell_f = per_mode_f.iter().map(|(_, f)| *f).sum::<T>();
    Ok(EnhancementResult {
        purcell_f,
        total_factor: leak_ratio + purcell_f,
        per_mode_f,
    })
}

/// F = (τ₀/τ_c − 1)/ξ from bulk and coupled lifetimes.
pub fn purcell_from_lifetimes<T: Real>(tau0_ns: T, tau_coupled_ns: T, xi_zpl: T) -> Result<T> {
    if !(tau_coupled_ns > T::zero()) {
        return Err(Error::Domain("coupled lifetime must be positive".into()));
    }
    if !(tau_coupled_ns <= tau0_ns) {
        return Err(Error::Domain(format!(
            "coupled lifetime {tau_coupled_ns} ns exceeds bulk lifetime {tau0_ns} ns"
        )));
    }
    if !(xi_zpl > T::zero() && xi_zpl < T::one()) {
        return Err(Error::invalid("xi_zpl", "must lie in (0, 1)"));
    }
    Ok((tau0_ns / tau_coupled_ns - T::one()) / xi_zpl)
}

/// ZPL branching ratio after the ZPL rate is multiplied by 1 + F.
pub fn enhanced_branching<T: Real>(xi_zpl: T, f: T) -> T {
    let zpl = (T::one() + f) * xi_zpl;
    zpl / (zpl + (T::one() - xi_zpl))
}

/// Branching ratio reached by an ideally placed, resonant emitter in a cavity
/// of quality factor `q` and mode volume `v` (λ/n)³.
pub fn design_projection<T: Real>(q: T, v: T, xi_zpl: T) -> T {
    let mode = CavityMode::resonance(T::one(), q, v);
    enhanced_branching(xi_zpl, f_cav(&mode))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode(q: f64, v: f64) -> CavityMode<f64> {
        CavityMode::resonance(637.0, q, v)
    }

    #[test]
    fn f_cav_range_for_q4000() {
        let small = f_cav(&mode(4000.0, 17.0));
        let large = f_cav(&mode(4000.0, 32.0));
        assert!((small - 17.88).abs() < 0.005, "{small}");
        assert!((large - 9.50).abs() < 0.005, "{large}");
        assert!(f_cav(&mode(1e-30, 17.0)) < 1e-30);
    }

    #[test]
    fn lorentzian_special_points() {
        let m = mode(3800.0, 17.0);
        assert_eq!(lorentzian_detuning(&m, 637.0), 1.0);
        let half = 637.0 * (1.0 + 1.0 / (2.0 * 3800.0));
        assert!((lorentzian_detuning(&m, half) - 0.5).abs() < 1e-12);
        let want = 1.0 / (1.0 + 4.0 * 3800.0f64.powi(2) * (0.24f64 / 637.0).powi(2));
        let got = lorentzian_detuning(&m, 637.24);
        assert!((got - want).abs() < 1e-12 * want);
        assert!((got - 0.108).abs() < 1e-3, "{got}");
    }

    #[test]
    fn purcell_factorizes() {
        let e = EmitterTransition::new(637.0, 11.1, 0.03);
        let m = mode(4000.0, 17.0);
        assert!((purcell_factor(&m, &e) - f_cav(&m)).abs() < 1e-12);
        assert_eq!(purcell_factor(&m, &e.with_overlap(0.0)), 0.0);
        let m = mode(3800.0, 20.0);
        let e_half = EmitterTransition::new(637.0 * (1.0 + 1.0 / 7600.0), 11.1, 0.03);
        assert!((purcell_factor(&m, &e_half) / f_cav(&m) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn far_mode_adds_nothing() {
        let e = EmitterTransition::new(637.0, 11.1, 0.03);
        let near = mode(4300.0, 17.0);
        let far = CavityMode::resonance(637.0 + 100.0 * 637.0 / 3800.0, 3800.0, 17.0);
        let single = total_enhancement(&[near], &[1.0], &e).unwrap();
        let both = total_enhancement(&[near, far], &[1.0, 1.0], &e).unwrap();
        assert!((both.total_factor - single.total_factor).abs() < 1e-3 * single.total_factor);
        let sum: f64 = both.per_mode_f.iter().map(|p| p.1).sum();
        assert_eq!(sum, both.purcell_f);
    }

    #[test]
    fn empty_modes_leave_leak_ratio() {
        let e = EmitterTransition::new(637.0, 11.1, 0.03);
        let r = total_enhancement(&[], &[], &e).unwrap();
        assert_eq!(r.total_factor, 1.0);
        assert_eq!(r.purcell_f, 0.0);
        assert!(matches!(
            total_enhancement(&[mode(1.0, 1.0)], &[], &e),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn lifetimes_to_purcell() {
        let f = purcell_from_lifetimes(11.1f64, 8.3, 0.03).unwrap();
        assert!((f - 11.2450).abs() < 1e-4, "{f}");
        assert_eq!(purcell_from_lifetimes(9.0f64, 9.0, 0.2).unwrap(), 0.0);
        let nv3 = purcell_from_lifetimes(11.1f64, 10.4, 0.03).unwrap();
        assert!((nv3 - 2.24).abs() < 0.005);
        assert!(matches!(
            purcell_from_lifetimes(8.0f64, 9.0, 0.03),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn branching_arithmetic() {
        assert!((enhanced_branching(0.03f64, 11.0) - 36.0 / 133.0).abs() < 1e-12);
        assert_eq!(enhanced_branching(0.07f64, 0.0), 0.07);
        let f = f_cav(&mode(5e5, 17.0));
        assert!(enhanced_branching(0.03, f) > 0.98);
        assert!((design_projection(5e5f64, 17.0, 0.03) - 0.986).abs() < 5e-4);
        let pc = design_projection(2e5f64, 2.0, 0.03);
        assert!(pc > 0.995 && (pc - 0.9958).abs() < 5e-5, "{pc}");
        assert!((design_projection(1e-30f64, 2.0, 0.03) - 0.03).abs() < 1e-15);
    }

    #[test]
    fn works_in_single_precision() {
        let m = CavityMode::resonance(637.0f32, 4000.0, 17.0);
        assert!((f_cav(&m) - 17.88).abs() < 0.01);
    }
}
