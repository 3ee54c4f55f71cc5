//! Forward model: coupled lifetimes, lifetime-vs-detuning scans and synthetic
//! time-correlated photon-count histograms.
//!
//! Randomness comes from a ChaCha8 stream seeded with a single `u64`; the same
//! seed always reproduces the same histogram or noisy scan.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CavityMode, DecayModel, EmitterTransition};
use crate::purcell::total_enhancement_from_peaks;
use crate::scalar::Real;

/// Seeded generator used by every simulator in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Lifetime of `emitter` when its ZPL rate is enhanced by F = `f`.
pub fn coupled_lifetime<T: Real>(emitter: &EmitterTransition<T>, f: T) -> T {
    DecayModel::from_transition(emitter, f).lifetime_ns()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram<T> {
    pub bin_edges_ns: Vec<T>,
    pub counts: Vec<u64>,
    pub repetition_rate_mhz: T,
}

impl<T: Real> Histogram<T> {
    pub fn period_ns(&self) -> T {
        T::lit(1000.0) / self.repetition_rate_mhz
    }

    pub fn bin_centers(&self) -> Vec<T> {
        self.bin_edges_ns
            .windows(2)
            .map(|w| (w[0] + w[1]) / T::lit(2.0))
            .collect()
    }

    pub fn total_counts(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.bin_edges_ns.len() != self.counts.len() + 1 {
            return Err(Error::LengthMismatch {
                what: "histogram edges and counts",
                left: self.bin_edges_ns.len(),
                right: self.counts.len() + 1,
            });
        }
        if self.bin_edges_ns.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Histogram("bin edges must be strictly increasing".into()));
        }
        if !(self.repetition_rate_mhz > T::zero()) {
            return Err(Error::Histogram("repetition rate must be positive".into()));
        }
        if let (Some(&first), Some(&last)) = (self.bin_edges_ns.first(), self.bin_edges_ns.last()) {
            let span = last - first;
            if span > self.period_ns() * (T::one() + T::lit(1e-9)) {
                return Err(Error::Histogram(format!(
                    "span {span} ns exceeds the repetition period {} ns",
                    self.period_ns()
                )));
            }
        }
        Ok(())
    }
}

/// Fast contaminating luminescence mixed into the emitter decay.
///
/// `amplitude_fraction` is the contaminant's share of the decay-curve
/// amplitude at zero delay, a/(a + b) for a·exp(−t/τ_c) + b·exp(−t/τ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contamination<T> {
    pub amplitude_fraction: T,
    pub tau_ns: T,
}

impl<T: Real> Contamination<T> {
    pub fn none() -> Self {
        Contamination {
            amplitude_fraction: T::zero(),
            tau_ns: T::one(),
        }
    }

    /// Probability that a detected photon comes from the contaminant.
    pub fn photon_fraction(&self, emitter_lifetime_ns: T) -> T {
        let a = self.amplitude_fraction;
        if a == T::zero() {
            return T::zero();
        }
        let c = a * self.tau_ns;
        c / (c + (T::one() - a) * emitter_lifetime_ns)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramSimulation<T> {
    pub true_lifetime_ns: T,
    pub n_photons: u64,
    pub bin_width_ns: T,
    pub repetition_rate_mhz: T,
    pub contamination: Contamination<T>,
}

impl<T: Real> HistogramSimulation<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.true_lifetime_ns > T::zero()) {
            return Err(Error::invalid("true_lifetime_ns", "must be positive"));
        }
        if !(self.repetition_rate_mhz > T::zero()) {
            return Err(Error::invalid("repetition_rate_mhz", "must be positive"));
        }
        let period = T::lit(1000.0) / self.repetition_rate_mhz;
        if !(self.bin_width_ns > T::zero() && self.bin_width_ns <= period) {
            return Err(Error::invalid(
                "bin_width_ns",
                "must be positive and no longer than the repetition period",
            ));
        }
        let c = self.contamination;
        if !(c.amplitude_fraction >= T::zero() && c.amplitude_fraction < T::one()) {
            return Err(Error::invalid("amplitude_fraction", "must lie in [0, 1)"));
        }
        if c.amplitude_fraction > T::zero() && !(c.tau_ns > T::zero()) {
            return Err(Error::invalid("tau_ns", "contamination lifetime must be positive"));
        }
        Ok(())
    }

    fn period_ns(&self) -> f64 {
        1000.0 / self.repetition_rate_mhz.as_f64()
    }

    /// Whole bins that fit inside one repetition period.
    pub fn bin_count(&self) -> usize {
        let ratio = self.period_ns() / self.bin_width_ns.as_f64();
        (ratio + 1e-9).floor() as usize
    }
}

/// Photon delays after the excitation pulse, wrapped into one repetition period.
pub fn sample_arrival_times<T: Real>(
    sim: &HistogramSimulation<T>,
    seed: u64,
) -> Result<Vec<f64>> {
    sim.validate()?;
    let mut rng = seeded_rng(seed);
    let period = sim.period_ns();
    let emitter = Exp::new(1.0 / sim.true_lifetime_ns.as_f64())
        .map_err(|e| Error::Domain(e.to_string()))?;
    let frac = sim
        .contamination
        .photon_fraction(sim.true_lifetime_ns)
        .as_f64();
    let contaminant = if frac > 0.0 {
        Some(
            Exp::new(1.0 / sim.contamination.tau_ns.as_f64())
                .map_err(|e| Error::Domain(e.to_string()))?,
        )
    } else {
        None
    };
    let mut times = Vec::with_capacity(sim.n_photons as usize);
    for _ in 0..sim.n_photons {
        let t = match contaminant {
            Some(c) if rng.random::<f64>() < frac => c.sample(&mut rng),
            _ => emitter.sample(&mut rng),
        };
        times.push(t % period);
    }
    Ok(times)
}

/// Bins simulated arrival times. Delays falling in the partial bin left over
/// at the end of the period are discarded.
pub fn simulate_histogram<T: Real>(sim: &HistogramSimulation<T>, seed: u64) -> Result<Histogram<T>> {
    let times = sample_arrival_times(sim, seed)?;
    let width = sim.bin_width_ns.as_f64();
    let n_bins = sim.bin_count();
    let mut counts = vec![0u64; n_bins];
    for t in times {
        let idx = (t / width).floor() as usize;
        if idx < n_bins {
            counts[idx] += 1;
        }
    }
    let bin_edges_ns = (0..=n_bins)
        .map(|i| T::from_count(i) * sim.bin_width_ns)
        .collect();
    Ok(Histogram {
        bin_edges_ns,
        counts,
        repetition_rate_mhz: sim.repetition_rate_mhz,
    })
}

/// Mean of an exponential of lifetime `tau` wrapped into [0, period).
pub fn wrapped_exponential_mean(tau: f64, period: f64) -> f64 {
    let q = (-period / tau).exp();
    tau - period * q / (1.0 - q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint<T> {
    pub detuning_nm: T,
    pub lifetime_ns: T,
    pub sigma_ns: T,
}

/// Lifetime measured while the cavity modes are tuned across the emitter.
/// `detuning_nm` is λ_C2 − λ_emitter; `reference_mode_spacing_nm` is λ_C1 − λ_C2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetuningScan<T> {
    pub points: Vec<ScanPoint<T>>,
    pub reference_mode_spacing_nm: T,
}

impl<T: Real> DetuningScan<T> {
    pub fn validate(&self) -> Result<()> {
        for p in &self.points {
            if !p.detuning_nm.is_finite() {
                return Err(Error::invalid("detuning_nm", "must be finite"));
            }
            if !(p.lifetime_ns > T::zero()) {
                return Err(Error::invalid("lifetime_ns", "must be positive"));
            }
            if !(p.sigma_ns >= T::zero()) {
                return Err(Error::invalid("sigma_ns", "must be non-negative"));
            }
        }
        Ok(())
    }

    pub fn detunings(&self) -> Vec<T> {
        self.points.iter().map(|p| p.detuning_nm).collect()
    }

    pub fn lifetimes(&self) -> Vec<T> {
        self.points.iter().map(|p| p.lifetime_ns).collect()
    }
}

/// Lifetime at each rigid shift of the mode comb. Modes are given at zero
/// shift; with modes `[C1, C2]` and C2 placed at the emitter wavelength the
/// shift equals λ_C2 − λ_emitter.
pub fn lifetime_vs_detuning<T: Real>(
    emitter: &EmitterTransition<T>,
    modes: &[CavityMode<T>],
    peak_f: &[T],
    detunings_nm: &[T],
) -> Result<DetuningScan<T>> {
    if modes.len() != peak_f.len() {
        return Err(Error::LengthMismatch {
            what: "modes and peak enhancements",
            left: modes.len(),
            right: peak_f.len(),
        });
    }
    let mut shifted = modes.to_vec();
    let points = detunings_nm
        .iter()
        .map(|&d| {
            for (s, m) in shifted.iter_mut().zip(modes) {
                *s = m.shifted(d);
            }
            let e = total_enhancement_from_peaks(
                &shifted,
                peak_f,
                emitter.wavelength_nm,
                emitter.leak_ratio,
            )?;
            Ok(ScanPoint {
                detuning_nm: d,
                lifetime_ns: coupled_lifetime(emitter, e.purcell_f),
                sigma_ns: T::zero(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let spacing = match modes {
        [c1, c2, ..] => c1.wavelength_nm - c2.wavelength_nm,
        _ => T::zero(),
    };
    Ok(DetuningScan {
        points,
        reference_mode_spacing_nm: spacing,
    })
}

/// Multiplies each lifetime by (1 + s·N(0,1)) and records σ = s·τ.
pub fn add_lifetime_noise<T: Real>(
    scan: &DetuningScan<T>,
    relative_sigma: T,
    seed: u64,
) -> DetuningScan<T> {
    let mut rng = seeded_rng(seed);
    let points = scan
        .points
        .iter()
        .map(|p| {
            let z: f64 = StandardNormal.sample(&mut rng);
            ScanPoint {
                detuning_nm: p.detuning_nm,
                lifetime_ns: p.lifetime_ns * (T::one() + relative_sigma * T::lit(z)),
                sigma_ns: relative_sigma * p.lifetime_ns,
            }
        })
        .collect();
    DetuningScan {
        points,
        reference_mode_spacing_nm: scan.reference_mode_spacing_nm,
    }
}
