//! Regression report over every quantitative claim the toolkit reproduces.
//!
//! Each check records the computed value, the target and the tolerance. The
//! report text is a pure function of [`ReproduceOptions`].

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    add_lifetime_noise, lifetime_vs_detuning, simulate_histogram, coupled_lifetime,
    Contamination, HistogramSimulation,
};
use crate::error::Result;
use crate::fit::{fit_detuning_scan, fit_lifetime, DetuningFitConfig, LifetimeModel};
use crate::model::{CavityMode, EmitterTransition, Polarization, RingGeometry};
use crate::purcell::{design_projection, enhanced_branching, f_cav, purcell_from_lifetimes};
use crate::spectra::{find_peaks, synthesize, ModePeak, SpectrumConfig, WavelengthGrid};
use crate::wgm::{bessel_j, bessel_jy, find_resonances, SolverOptions};

pub const REFERENCE_XI: f64 = 0.03;
pub const TAU0_NS: f64 = 11.1;
pub const TAU_C2_NS: f64 = 8.3;
pub const TAU_NV3_NS: f64 = 10.4;
pub const Q1: f64 = 4300.0;
pub const Q2: f64 = 3800.0;
/// λ_C1 − λ_C2 used for synthetic detuning scans.
pub const MODE_SPACING_NM: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReproduceOptions {
    pub xi_zpl: f64,
    pub seed: u64,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        ReproduceOptions {
            xi_zpl: REFERENCE_XI,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Reported only; the reference target does not apply to these inputs.
    Info,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub name: String,
    pub computed: f64,
    pub target: String,
    pub tolerance: String,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub options: ReproduceOptions,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// Fixed-width text table.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "purcellkit reproduce  xi_zpl={}  seed={}",
            self.options.xi_zpl, self.options.seed
        );
        let _ = writeln!(
            s,
            "{:<4} {:<44} {:>14}  {:<22} {:<18} status",
            "id", "check", "computed", "target", "tolerance"
        );
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<4} {:<44} {:>14}  {:<22} {:<18} {}",
                c.id,
                c.name,
                format_value(c.computed),
                c.target,
                c.tolerance,
                c.status.label()
            );
        }
        let failed = self.checks.iter().filter(|c| c.status == Status::Fail).count();
        let _ = writeln!(s, "{} checks, {} failed", self.checks.len(), failed);
        s
    }
}

fn format_value(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e6) {
        format!("{x:.4e}")
    } else {
        format!("{x:.6}")
    }
}

fn check(id: &str, name: &str, computed: f64, target: &str, tolerance: &str, status: Status) -> Check {
    Check {
        id: id.into(),
        name: name.into(),
        computed,
        target: target.into(),
        tolerance: tolerance.into(),
        status,
    }
}

/// Parameters of one synthetic detuning-scan trial.
pub fn detuning_trial_config(xi_zpl: f64) -> DetuningFitConfig<f64> {
    DetuningFitConfig {
        q1: Q1,
        q2: Q2,
        mode_spacing_nm: MODE_SPACING_NM,
        emitter_wavelength_nm: 637.0,
        zpl_branching_ratio: xi_zpl,
        leak_ratio: 1.0,
        float_q: false,
    }
}

/// Detunings of the 25-point synthetic scan, covering both crossings.
pub fn trial_detunings() -> Vec<f64> {
    (0..25).map(|i| -0.8 + 0.05 * i as f64).collect()
}

/// Fits one noisy synthetic scan; true when τ₀ and both peak F are within 10%.
pub fn detuning_trial(xi_zpl: f64, seed: u64) -> Result<bool> {
    let cfg = detuning_trial_config(xi_zpl);
    let emitter = EmitterTransition::new(637.0, TAU0_NS, xi_zpl);
    let modes = [
        CavityMode::resonance(637.0 + MODE_SPACING_NM, Q1, 1.0),
        CavityMode::resonance(637.0, Q2, 1.0),
    ];
    let truth = [4.0, 11.24];
    let clean = lifetime_vs_detuning(&emitter, &modes, &truth, &trial_detunings())?;
    let noisy = add_lifetime_noise(&clean, 0.02, seed);
    let r = fit_detuning_scan(&noisy, &cfg)?;
    let close = |got: f64, want: f64| ((got - want) / want).abs() < 0.1;
    Ok(close(r.get("tau0_ns"), TAU0_NS)
        && close(r.get("peak_f1"), truth[0])
        && close(r.get("peak_f2"), truth[1]))
}

fn histogram_sim() -> HistogramSimulation<f64> {
    HistogramSimulation {
        true_lifetime_ns: TAU0_NS,
        n_photons: 100_000,
        bin_width_ns: 0.2,
        repetition_rate_mhz: 4.75,
        contamination: Contamination {
            amplitude_fraction: 0.3,
            tau_ns: 1.0,
        },
    }
}

fn special_function_errors() -> Result<(f64, f64)> {
    let mut wronskian: f64 = 0.0;
    let mut recurrence: f64 = 0.0;
    for m in [0u32, 1, 10, 46] {
        for i in 0..100 {
            let x = 1.0 + 199.0 * i as f64 / 99.0;
            let p = bessel_jy(m, x)?;
            let want = 2.0 / (std::f64::consts::PI * x);
            wronskian = wronskian.max(((p.j * p.yp - p.jp * p.y - want) / want).abs());
            if m > 0 {
                let lhs = bessel_j(m - 1, x) + bessel_j(m + 1, x);
                let rhs = 2.0 * m as f64 / x * p.j;
                let scale = rhs.abs().max(bessel_j(m - 1, x).abs()).max(f64::MIN_POSITIVE);
                recurrence = recurrence.max((lhs - rhs).abs() / scale);
            }
        }
    }
    Ok((wronskian, recurrence))
}

pub fn run(opts: &ReproduceOptions) -> Result<Report> {
    let xi = opts.xi_zpl;
    let reference_xi = xi == REFERENCE_XI;
    let mut checks = Vec::new();

    let one_plus = |q: f64, v: f64| 1.0 + f_cav(&CavityMode::resonance(637.0, q, v));
    let lo = one_plus(4000.0, 32.0);
    let hi = one_plus(4000.0, 17.0);
    checks.push(check("1a", "1+F_cav at Q=4000, V=32", lo, "[10.0, 11.0]", "interval",
        Status::from_bool((10.0..=11.0).contains(&lo))));
    checks.push(check("1b", "1+F_cav at Q=4000, V=17", hi, "[18.0, 19.5]", "interval",
        Status::from_bool((18.0..=19.5).contains(&hi))));

    let f = purcell_from_lifetimes(TAU0_NS, TAU_C2_NS, xi)?;
    let status = if reference_xi {
        Status::from_bool((11.0..=11.5).contains(&f))
    } else {
        Status::Info
    };
    checks.push(check("2", "1+F from lifetimes 11.1 -> 8.3 ns", 1.0 + f, "[12.0, 12.5]", "interval", status));

    let emitter = EmitterTransition::new(637.0, TAU0_NS, xi);
    let tau = coupled_lifetime(&emitter, f);
    checks.push(check("3", "coupled lifetime at extracted F (ns)", tau, "8.3", "1e-9 rel",
        Status::from_bool(((tau - TAU_C2_NS) / TAU_C2_NS).abs() <= 1e-9)));

    let b = enhanced_branching(REFERENCE_XI, 11.0);
    checks.push(check("4", "branching ratio at F=11", b, "36/133", "1e-12 abs",
        Status::from_bool((b - 36.0 / 133.0).abs() <= 1e-12)));

    let b = enhanced_branching(REFERENCE_XI, f_cav(&CavityMode::resonance(637.0, 5e5, 17.0)));
    checks.push(check("5a", "branching ratio at Q=5e5, V=17", b, "> 0.98", "strict", Status::from_bool(b > 0.98)));
    let b = design_projection(2e5, 2.0, REFERENCE_XI);
    checks.push(check("5b", "branching ratio at Q=2e5, V=2", b, "> 0.995", "strict", Status::from_bool(b > 0.995)));

    let geometry = RingGeometry::diamond_microring();
    let modes = find_resonances(&geometry, (620.0, 660.0), Polarization::TE, &SolverOptions::default())?;
    let m46 = modes
        .iter()
        .find(|r| r.mode.azimuthal_number == 46 && r.mode.radial_number == 1);
    let (lam, vol) = m46.map_or((f64::NAN, f64::NAN), |r| {
        (r.mode.wavelength_nm, r.mode.mode_volume_cubic_lambda_over_n)
    });
    checks.push(check("6a", "TE m=46 p=1 wavelength (nm)", lam, "637", "2% rel",
        Status::from_bool(((lam - 637.0) / 637.0).abs() <= 0.02)));
    checks.push(check("6b", "TE m=46 p=1 mode volume ((lambda/n)^3)", vol, "[8.5, 48]", "interval",
        Status::from_bool((8.5..=48.0).contains(&vol))));

    let mut passes = 0;
    for k in 0..20 {
        if detuning_trial(xi, opts.seed + k).unwrap_or(false) {
            passes += 1;
        }
    }
    checks.push(check("7", "detuning fit seeds within 10% (of 20)", passes as f64, ">= 18", "count",
        Status::from_bool(passes >= 18)));

    let hist = simulate_histogram(&histogram_sim(), opts.seed)?;
    let skipped = fit_lifetime(&hist, 3.0, LifetimeModel::SingleExp)?;
    let t3 = skipped.get("tau_ns");
    checks.push(check("8a", "lifetime fit, 3 ns skip (ns)", t3, "11.1", "3% rel",
        Status::from_bool(((t3 - TAU0_NS) / TAU0_NS).abs() <= 0.03)));
    let raw = fit_lifetime(&hist, 0.0, LifetimeModel::SingleExp)?;
    let bias = (TAU0_NS - raw.get("tau_ns")) / raw.sigma("tau_ns");
    checks.push(check("8b", "unskipped fit bias low (sigmas)", bias, "> 1", "strict", Status::from_bool(bias > 1.0)));

    let f3 = purcell_from_lifetimes(TAU0_NS, TAU_NV3_NS, xi)?;
    let status = if reference_xi {
        Status::from_bool((2.2..=2.3).contains(&f3))
    } else {
        Status::Info
    };
    checks.push(check("9", "F from lifetimes 11.1 -> 10.4 ns", f3, "[2.2, 2.3]", "interval", status));

    let (w, r) = special_function_errors()?;
    checks.push(check("10a", "Wronskian max relative error", w, "0", "<= 1e-8", Status::from_bool(w <= 1e-8)));
    checks.push(check("10b", "J recurrence max relative error", r, "0", "<= 1e-8", Status::from_bool(r <= 1e-8)));

    let mut spec = SpectrumConfig::empty(WavelengthGrid {
        start: 635.0,
        stop: 639.0,
        step: 0.002,
    });
    spec.sideband = vec![(600.0, 1.0), (700.0, 1.0)];
    spec.cavity_modes.push(ModePeak {
        mode: CavityMode::resonance(637.0, Q2, 17.0),
        amplitude: 5.0,
    });
    let q = find_peaks(&synthesize(&spec)?, 0.5)
        .first()
        .map_or(f64::NAN, |p| p.q_estimate);
    checks.push(check("11", "Q estimate of synthesized Q=3800 peak", q, "3800", "5% rel",
        Status::from_bool(((q - Q2) / Q2).abs() <= 0.05)));

    Ok(Report {
        options: *opts,
        checks,
    })
}
