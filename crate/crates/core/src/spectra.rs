//! Synthetic photoluminescence spectra and peak finding.
//!
//! A spectrum is Σ lines + E(λ)·(1 + Σ cavity peaks), where E is a
//! piecewise-linear sideband envelope (zero outside its breakpoints). Lines
//! and cavity peaks are Lorentzians; a cavity peak has FWHM λ_cav/Q.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CavityMode, EmitterTransition};
use crate::purcell::total_enhancement;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine<T> {
    pub center_nm: T,
    pub fwhm_nm: T,
    pub amplitude: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModePeak<T> {
    pub mode: CavityMode<T>,
    pub amplitude: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavelengthGrid<T> {
    pub start: T,
    pub stop: T,
    pub step: T,
}

impl<T: Real> WavelengthGrid<T> {
    pub fn points(&self) -> Vec<T> {
        let n = ((self.stop - self.start) / self.step + T::lit(1e-9))
            .floor()
            .to_usize()
            .unwrap_or(0);
        (0..=n).map(|i| self.start + T::from_count(i) * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Real"))]
pub struct SpectrumConfig<T> {
    #[serde(default)]
    pub lines: Vec<SpectralLine<T>>,
    #[serde(default)]
    pub cavity_modes: Vec<ModePeak<T>>,
    /// (wavelength_nm, level) breakpoints, sorted by wavelength.
    #[serde(default)]
    pub sideband: Vec<(T, T)>,
    pub wavelength_grid_nm: WavelengthGrid<T>,
    /// Field overlap η used for every line in [`tuning_map`].
    #[serde(default = "one")]
    pub overlap_eta: T,
}

fn one<T: Real>() -> T {
    T::one()
}

impl<T: Real> SpectrumConfig<T> {
    pub fn empty(grid: WavelengthGrid<T>) -> Self {
        SpectrumConfig {
            lines: Vec::new(),
            cavity_modes: Vec::new(),
            sideband: Vec::new(),
            wavelength_grid_nm: grid,
            overlap_eta: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for l in &self.lines {
            if !(l.fwhm_nm > T::zero()) {
                return Err(Error::invalid("fwhm_nm", "must be positive"));
            }
            if !(l.amplitude >= T::zero()) || !l.center_nm.is_finite() {
                return Err(Error::invalid("lines", "amplitude must be non-negative, centre finite"));
            }
        }
        for m in &self.cavity_modes {
            m.mode.validate()?;
            if !(m.amplitude >= T::zero()) {
                return Err(Error::invalid("cavity_modes", "amplitude must be non-negative"));
            }
        }
        if self.sideband.iter().any(|&(x, y)| !x.is_finite() || !(y >= T::zero())) {
            return Err(Error::invalid("sideband", "levels must be non-negative"));
        }
        if self.sideband.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::invalid("sideband", "breakpoints must increase"));
        }
        let g = &self.wavelength_grid_nm;
        if !(g.step > T::zero()) || !(g.stop >= g.start) {
            return Err(Error::invalid("wavelength_grid_nm", "need step > 0 and stop ≥ start"));
        }
        if !(self.overlap_eta >= T::zero() && self.overlap_eta <= T::one()) {
            return Err(Error::invalid("overlap_eta", "must lie in [0, 1]"));
        }
        Ok(())
    }

    fn envelope(&self, x: T) -> T {
        let s = &self.sideband;
        match s.len() {
            0 => T::zero(),
            1 => {
                if x == s[0].0 {
                    s[0].1
                } else {
                    T::zero()
                }
            }
            _ => {
                if x < s[0].0 || x > s[s.len() - 1].0 {
                    return T::zero();
                }
                let i = s.partition_point(|p| p.0 <= x).clamp(1, s.len() - 1);
                let (x0, y0) = s[i - 1];
                let (x1, y1) = s[i];
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }
}

fn lorentzian<T: Real>(x: T, center: T, fwhm: T) -> T {
    let u = T::lit(2.0) * (x - center) / fwhm;
    (T::one() + u * u).recip()
}

fn intensity<T: Real>(cfg: &SpectrumConfig<T>, line_gain: &[T], modes: &[ModePeak<T>], x: T) -> T {
    let lines = cfg
        .lines
        .iter()
        .zip(line_gain)
        .map(|(l, &g)| g * l.amplitude * lorentzian(x, l.center_nm, l.fwhm_nm))
        .sum::<T>();
    let peaks = modes
        .iter()
        .map(|m| m.amplitude * lorentzian(x, m.mode.wavelength_nm, m.mode.linewidth_nm()))
        .sum::<T>();
    lines + cfg.envelope(x) * (T::one() + peaks)
}

/// Intensity on the configured grid as (wavelength_nm, intensity) pairs.
pub fn synthesize<T: Real>(config: &SpectrumConfig<T>) -> Result<Vec<(T, T)>> {
    config.validate()?;
    let gain = vec![T::one(); config.lines.len()];
    Ok(config
        .wavelength_grid_nm
        .points()
        .into_iter()
        .map(|x| (x, intensity(config, &gain, &config.cavity_modes, x)))
        .collect())
}

/// Enhancement factor leak + F of every line with the modes shifted by `shift`.
fn line_factors<T: Real>(config: &SpectrumConfig<T>, shift: T) -> Result<Vec<T>> {
    let modes: Vec<CavityMode<T>> = config
        .cavity_modes
        .iter()
        .map(|m| m.mode.shifted(shift))
        .collect();
    let eta = vec![config.overlap_eta; modes.len()];
    config
        .lines
        .iter()
        .map(|l| {
            let emitter = EmitterTransition::new(l.center_nm, T::one(), T::lit(0.5));
            total_enhancement(&modes, &eta, &emitter).map(|e| e.total_factor)
        })
        .collect()
}

/// One spectrum per rigid mode shift. Each line is scaled by the ratio of its
/// enhanced ZPL rate at that shift to the rate at zero shift, so the zero-shift
/// row equals [`synthesize`].
pub fn tuning_map<T: Real>(config: &SpectrumConfig<T>, shifts_nm: &[T]) -> Result<Vec<Vec<T>>> {
    config.validate()?;
    if shifts_nm.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("shifts_nm", "must be finite"));
    }
    let reference = line_factors(config, T::zero())?;
    let grid = config.wavelength_grid_nm.points();
    shifts_nm
        .par_iter()
        .map(|&s| {
            let gain: Vec<T> = line_factors(config, s)?
                .iter()
                .zip(&reference)
                .map(|(&f, &f0)| f / f0)
                .collect();
            let modes: Vec<ModePeak<T>> = config
                .cavity_modes
                .iter()
                .map(|m| ModePeak {
                    mode: m.mode.shifted(s),
                    amplitude: m.amplitude,
                })
                .collect();
            Ok(grid.iter().map(|&x| intensity(config, &gain, &modes, x)).collect())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak<T> {
    pub center_nm: T,
    pub fwhm_nm: T,
    pub q_estimate: T,
    pub prominence: T,
}

/// Local maxima whose topographic prominence is at least `min_prominence`.
/// Width is taken at half prominence below the peak, with linearly
/// interpolated crossings; the centre is refined by a three-point parabola.
pub fn find_peaks<T: Real>(spectrum: &[(T, T)], min_prominence: T) -> Vec<Peak<T>> {
    let n = spectrum.len();
    let y: Vec<T> = spectrum.iter().map(|p| p.1).collect();
    let x: Vec<T> = spectrum.iter().map(|p| p.0).collect();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if !(y[i] > y[i - 1]) {
            i += 1;
            continue;
        }
        // walk across a flat top
        let mut j = i;
        while j + 1 < n && y[j + 1] == y[i] {
            j += 1;
        }
        if j + 1 >= n || !(y[j + 1] < y[i]) {
            i = j + 1;
            continue;
        }
        let top = y[i];
        let mut l = i;
        let mut left_min = top;
        while l > 0 && y[l - 1] <= top {
            l -= 1;
            left_min = left_min.min(y[l]);
        }
        let mut r = j;
        let mut right_min = top;
        while r + 1 < n && y[r + 1] <= top {
            r += 1;
            right_min = right_min.min(y[r]);
        }
        let prominence = top - left_min.max(right_min);
        if prominence >= min_prominence && prominence > T::zero() {
            let half = top - prominence / T::lit(2.0);
            let mut a = i;
            while a > l && y[a] > half {
                a -= 1;
            }
            let xl = if y[a] > half {
                x[a]
            } else {
                x[a] + (half - y[a]) / (y[a + 1] - y[a]) * (x[a + 1] - x[a])
            };
            let mut b = j;
            while b < r && y[b] > half {
                b += 1;
            }
            let xr = if y[b] > half {
                x[b]
            } else {
                x[b] - (half - y[b]) / (y[b - 1] - y[b]) * (x[b] - x[b - 1])
            };
            let mut center = if i == j {
                x[i]
            } else {
                (x[i] + x[j]) / T::lit(2.0)
            };
            if i == j {
                let denom = y[i - 1] - T::lit(2.0) * y[i] + y[i + 1];
                if denom < T::zero() {
                    let off = (y[i - 1] - y[i + 1]) / (T::lit(2.0) * denom);
                    center = x[i] + off * (x[i + 1] - x[i - 1]) / T::lit(2.0);
                }
            }
            let fwhm = xr - xl;
            peaks.push(Peak {
                center_nm: center,
                fwhm_nm: fwhm,
                q_estimate: center / fwhm,
                prominence,
            });
        }
        i = j + 1;
    }
    peaks
}
