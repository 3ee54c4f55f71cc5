//! Exponential lifetime extraction from photon-count histograms.

use serde::{Deserialize, Serialize};

use super::minimize::{least_squares, Bounds, FitReport, MinimizeOptions};
use crate::dynamics::Histogram;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MIN_FIT_BINS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LifetimeModel {
    /// A·exp(−t/τ)
    SingleExp,
    /// A·exp(−t/τ) + C
    SingleExpPlusConstant,
}

impl LifetimeModel {
    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            LifetimeModel::SingleExp => &["amplitude", "tau_ns"],
            LifetimeModel::SingleExpPlusConstant => &["amplitude", "tau_ns", "offset"],
        }
    }
}

impl std::str::FromStr for LifetimeModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single_exp" => Ok(LifetimeModel::SingleExp),
            "single_exp_plus_constant" => Ok(LifetimeModel::SingleExpPlusConstant),
            other => Err(Error::Parse(format!("unknown lifetime model {other:?}"))),
        }
    }
}

/// Model value at delay `t` measured from the first fitted sample.
pub fn decay_value<T: Real>(model: LifetimeModel, params: &[T], t: T) -> T {
    let base = params[0] * (-t / params[1]).exp();
    match model {
        LifetimeModel::SingleExp => base,
        LifetimeModel::SingleExpPlusConstant => base + params[2],
    }
}

/// Weighted fit of a decay to samples `(t, y)` with weights `w` (Σ w·r²).
/// The amplitude refers to the first sample time, so the reported τ does not
/// depend on the time origin.
pub fn fit_decay_curve<T: Real>(
    times: &[T],
    values: &[T],
    weights: &[T],
    model: LifetimeModel,
) -> Result<FitReport<T>> {
    if times.len() != values.len() || times.len() != weights.len() {
        return Err(Error::LengthMismatch {
            what: "decay samples",
            left: times.len(),
            right: values.len().min(weights.len()),
        });
    }
    if times.len() < MIN_FIT_BINS {
        return Err(Error::InsufficientData(format!(
            "{} samples, need at least {MIN_FIT_BINS}",
            times.len()
        )));
    }
    if values.iter().all(|&v| v == T::zero()) {
        return Err(Error::AllZeroCounts);
    }
    let t0 = times[0];
    let t: Vec<T> = times.iter().map(|&x| x - t0).collect();
    let sw: Vec<T> = weights.iter().map(|&w| w.sqrt()).collect();

    let span = t[t.len() - 1];
    if !(span > T::zero()) {
        return Err(Error::InsufficientData("samples span no time".into()));
    }
    // first moment of the decay about the first sample
    let total = values.iter().map(|&v| v.max(T::zero())).sum::<T>();
    let mean = t
        .iter()
        .zip(values)
        .map(|(&t, &v)| t * v.max(T::zero()))
        .sum::<T>()
        / total;
    let tau_guess = mean.max(span * T::lit(1e-3)).min(span);
    let peak = values.iter().copied().fold(T::zero(), T::max);
    let tail = values[values.len() * 9 / 10..]
        .iter()
        .copied()
        .sum::<T>()
        / T::from_count(values.len() - values.len() * 9 / 10);

    let tau_floor = span * T::lit(1e-6);
    let (initial, bounds) = match model {
        LifetimeModel::SingleExp => (
            vec![peak, tau_guess],
            Bounds {
                lower: vec![T::zero(), tau_floor],
                upper: vec![T::infinity(), T::infinity()],
            },
        ),
        LifetimeModel::SingleExpPlusConstant => (
            vec![(peak - tail).max(peak * T::lit(0.5)), tau_guess, tail.max(T::zero())],
            Bounds {
                lower: vec![T::zero(), tau_floor, T::neg_infinity()],
                upper: vec![T::infinity(), T::infinity(), T::infinity()],
            },
        ),
    };

    let residuals = |p: &[T]| -> Vec<T> {
        t.iter()
            .zip(values)
            .zip(&sw)
            .map(|((&t, &y), &s)| s * (y - decay_value(model, p, t)))
            .collect()
    };
    least_squares(residuals, &initial, Some(&bounds), &MinimizeOptions::default())
        .map(|m| m.into_report(model.parameter_names()))
}

/// Fits bins whose left edge is at or after `skip_ns`, weighted by
/// 1/max(count, 1), with the bin centre as the sample time.
pub fn fit_lifetime<T: Real>(
    hist: &Histogram<T>,
    skip_ns: T,
    model: LifetimeModel,
) -> Result<FitReport<T>> {
    hist.validate()?;
    if !(skip_ns >= T::zero()) {
        return Err(Error::invalid("skip_ns", "must be non-negative"));
    }
    if hist.total_counts() == 0 {
        return Err(Error::AllZeroCounts);
    }
    let centers = hist.bin_centers();
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut weights = Vec::new();
    for (i, &c) in hist.counts.iter().enumerate() {
        if hist.bin_edges_ns[i] >= skip_ns {
            times.push(centers[i]);
            values.push(T::lit(c as f64));
            weights.push(T::one() / T::lit(c.max(1) as f64));
        }
    }
    if times.len() < MIN_FIT_BINS {
        return Err(Error::InsufficientData(format!(
            "{} bins after the {skip_ns} ns skip window, need at least {MIN_FIT_BINS}",
            times.len()
        )));
    }
    fit_decay_curve(&times, &values, &weights, model)
}
