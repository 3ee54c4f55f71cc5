//! Two-mode Lorentzian fit of lifetime against cavity detuning.
//!
//! The model is [`lifetime_vs_detuning`] with C2 resonant at
//! `detuning = center_offset_nm` and C1 `mode_spacing_nm` to the red of C2.
//! Quality factors and the ZPL branching ratio are held fixed unless
//! `float_q` is set.

use serde::{Deserialize, Serialize};

use super::minimize::{least_squares, Bounds, FitReport, MinimizeOptions, Minimum};
use crate::dynamics::{lifetime_vs_detuning, DetuningScan};
use crate::error::{Error, Result};
use crate::model::{CavityMode, EmitterTransition};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Real"))]
pub struct DetuningFitConfig<T> {
    pub q1: T,
    pub q2: T,
    /// λ_C1 − λ_C2.
    pub mode_spacing_nm: T,
    pub emitter_wavelength_nm: T,
    pub zpl_branching_ratio: T,
    #[serde(default = "one")]
    pub leak_ratio: T,
    #[serde(default)]
    pub float_q: bool,
}

fn one<T: Real>() -> T {
    T::one()
}

impl<T: Real> DetuningFitConfig<T> {
    pub fn parameter_names(&self) -> &'static [&'static str] {
        if self.float_q {
            &["tau0_ns", "peak_f1", "peak_f2", "center_offset_nm", "q1", "q2"]
        } else {
            &["tau0_ns", "peak_f1", "peak_f2", "center_offset_nm"]
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q1 > T::zero() && self.q2 > T::zero()) {
            return Err(Error::invalid("q", "quality factors must be positive"));
        }
        if !self.mode_spacing_nm.is_finite() {
            return Err(Error::invalid("mode_spacing_nm", "must be finite"));
        }
        if !(self.emitter_wavelength_nm > T::zero()) {
            return Err(Error::invalid("emitter_wavelength_nm", "must be positive"));
        }
        if !(self.zpl_branching_ratio > T::zero() && self.zpl_branching_ratio < T::one()) {
            return Err(Error::invalid("zpl_branching_ratio", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Modes and emitter for parameter vector `p` (order as in `parameter_names`).
fn assemble<T: Real>(
    cfg: &DetuningFitConfig<T>,
    p: &[T],
) -> (EmitterTransition<T>, [CavityMode<T>; 2], [T; 2]) {
    let (q1, q2) = if cfg.float_q { (p[4], p[5]) } else { (cfg.q1, cfg.q2) };
    let mut emitter = EmitterTransition::new(cfg.emitter_wavelength_nm, p[0], cfg.zpl_branching_ratio);
    emitter.leak_ratio = cfg.leak_ratio;
    let c2 = cfg.emitter_wavelength_nm - p[3];
    let modes = [
        CavityMode::resonance(c2 + cfg.mode_spacing_nm, q1, T::one()),
        CavityMode::resonance(c2, q2, T::one()),
    ];
    (emitter, modes, [p[1], p[2]])
}

/// Lifetimes predicted by the fit model at `detunings_nm`.
pub fn detuning_model<T: Real>(
    cfg: &DetuningFitConfig<T>,
    params: &[T],
    detunings_nm: &[T],
) -> Result<Vec<T>> {
    let (emitter, modes, peaks) = assemble(cfg, params);
    Ok(lifetime_vs_detuning(&emitter, &modes, &peaks, detunings_nm)?.lifetimes())
}

/// [`detuning_model`] for a finished fit report.
pub fn detuning_curve<T: Real>(
    cfg: &DetuningFitConfig<T>,
    report: &FitReport<T>,
    detunings_nm: &[T],
) -> Result<Vec<T>> {
    let p: Vec<T> = cfg.parameter_names().iter().map(|n| report.get(n)).collect();
    detuning_model(cfg, &p, detunings_nm)
}

fn nearest_lifetime<T: Real>(scan: &DetuningScan<T>, at: T) -> T {
    scan.points
        .iter()
        .min_by(|a, b| {
            (a.detuning_nm - at)
                .abs()
                .partial_cmp(&(b.detuning_nm - at).abs())
                .unwrap()
        })
        .map(|p| p.lifetime_ns)
        .unwrap()
}

/// Least-squares fit of τ₀, the two peak enhancements and the scan offset.
///
/// Points are weighted by 1/σ when every σ is positive, otherwise equally.
/// Two starts are tried (deepest dip on C2, deepest dip on C1) and the lower
/// cost wins.
pub fn fit_detuning_scan<T: Real>(
    scan: &DetuningScan<T>,
    cfg: &DetuningFitConfig<T>,
) -> Result<FitReport<T>> {
    scan.validate()?;
    cfg.validate()?;
    let names = cfg.parameter_names();
    if scan.points.len() < names.len() {
        return Err(Error::InsufficientData(format!(
            "{} scan points for {} free parameters",
            scan.points.len(),
            names.len()
        )));
    }
    let d0 = scan.points[0].detuning_nm;
    if scan.points.iter().all(|p| p.detuning_nm == d0) {
        return Err(Error::DegenerateScan("every point has the same detuning".into()));
    }

    let detunings = scan.detunings();
    let weighted = scan.points.iter().all(|p| p.sigma_ns > T::zero());
    let inv_sigma: Vec<T> = scan
        .points
        .iter()
        .map(|p| if weighted { p.sigma_ns.recip() } else { T::one() })
        .collect();
    let residuals = |p: &[T]| -> Vec<T> {
        match detuning_model(cfg, p, &detunings) {
            Ok(model) => scan
                .points
                .iter()
                .zip(&model)
                .zip(&inv_sigma)
                .map(|((pt, &m), &w)| (pt.lifetime_ns - m) * w)
                .collect(),
            Err(_) => vec![T::nan(); detunings.len()],
        }
    };

    let xi = cfg.zpl_branching_ratio;
    let tau0 = scan.points.iter().map(|p| p.lifetime_ns).fold(T::zero(), T::max);
    let deepest = scan
        .points
        .iter()
        .min_by(|a, b| a.lifetime_ns.partial_cmp(&b.lifetime_ns).unwrap())
        .unwrap();
    let f_at = |tau: T| ((tau0 / tau - T::one()) / xi).max(T::lit(0.1));
    let f_deep = f_at(deepest.lifetime_ns);
    let s = cfg.mode_spacing_nm;
    // C2 resonant at the dip: C1 resonant at offset − spacing; and vice versa
    let starts = [
        (deepest.detuning_nm, f_at(nearest_lifetime(scan, deepest.detuning_nm - s)), f_deep),
        (deepest.detuning_nm + s, f_deep, f_at(nearest_lifetime(scan, deepest.detuning_nm + s))),
    ];

    let mut lower = vec![T::lit(1e-9), T::zero(), T::zero(), T::neg_infinity()];
    let mut upper = vec![T::infinity(); 4];
    if cfg.float_q {
        lower.extend([T::one(), T::one()]);
        upper.extend([T::infinity(), T::infinity()]);
    }
    let bounds = Bounds { lower, upper };

    let mut best: Option<Minimum<T>> = None;
    let mut last_err = None;
    for (offset, f1, f2) in starts {
        let mut init = vec![tau0, f1, f2, offset];
        if cfg.float_q {
            init.extend([cfg.q1, cfg.q2]);
        }
        match least_squares(residuals, &init, Some(&bounds), &MinimizeOptions::default()) {
            Ok(m) => {
                if best.as_ref().is_none_or(|b| m.cost < b.cost) {
                    best = Some(m);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some(m) => Ok(m.into_report(names)),
        None => Err(last_err.unwrap_or(Error::SingularNormalEquations)),
    }
}
