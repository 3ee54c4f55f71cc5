//! `purcellkit` command-line front end.
//!
//! Exit status: 0 on success, 1 when a computation, fit or reproduction
//! check fails, 2 on usage, configuration or input-parse errors.

mod config;
mod output;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use purcellkit::dynamics::{add_lifetime_noise, lifetime_vs_detuning, simulate_histogram};
use purcellkit::fit::{decay_value, detuning_curve, fit_detuning_scan, fit_lifetime};
use purcellkit::io;
use purcellkit::purcell::total_enhancement;
use purcellkit::reproduce::{self, ReproduceOptions};
use purcellkit::spectra::{synthesize, tuning_map};
use purcellkit::wgm::{find_resonances, SolverOptions};

use config::{
    FitDetuningConfig, FitLifetimeConfig, ModesConfig, PurcellConfig, SimulateConfig,
    TuningMapConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "purcellkit", version, about = "Emitter-microresonator coupling toolkit")]
struct Cli {
    /// JSON configuration file (top-level "schema": "purcellkit/1").
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Whispering-gallery resonances of a ring.
    Modes,
    /// Purcell enhancement of an emitter by a set of modes.
    Purcell,
    /// Synthetic photon-count histogram or lifetime-vs-detuning scan.
    Simulate,
    /// Exponential lifetime fit of a histogram CSV.
    FitLifetime {
        #[arg(long)]
        input: PathBuf,
        /// Also write data and fitted model as CSV.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Two-mode Lorentzian fit of a detuning-scan CSV.
    FitDetuning {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Synthetic photoluminescence spectrum.
    Spectrum,
    /// Spectra for a list of rigid mode shifts, as a TSV matrix.
    TuningMap,
    /// Recompute every reproduced number and print a pass/fail table.
    Reproduce {
        /// Override the ZPL branching ratio.
        #[arg(long)]
        xi: Option<f64>,
    },
}

enum Failure {
    Usage(anyhow::Error),
    Run(anyhow::Error),
}

type Outcome = Result<(), Failure>;

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Usage(e.into())
}

fn run_err<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Run(e.into())
}

fn load<C: serde::de::DeserializeOwned>(path: Option<&Path>) -> Result<C, Failure> {
    let path = path.ok_or_else(|| usage(anyhow!("this command needs --config PATH")))?;
    config::load(path).map_err(usage)
}

fn open(path: &Path) -> Result<std::fs::File, Failure> {
    std::fs::File::open(path)
        .with_context(|| format!("cannot open {}", path.display()))
        .map_err(usage)
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Outcome {
    output::emit(path, bytes).map_err(run_err)
}

fn to_bytes(f: impl FnOnce(&mut Vec<u8>) -> purcellkit::Result<()>) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(run_err)?;
    Ok(buf)
}

fn cmd_modes(cli: &Cli) -> Outcome {
    let cfg: ModesConfig = match &cli.config {
        Some(p) => config::load(p).map_err(usage)?,
        None => config::parse(&format!("{{\"schema\": \"{}\"}}", config::SCHEMA)).map_err(usage)?,
    };
    let mut opts = SolverOptions::default();
    if let Some(q) = cfg.quality_factor {
        opts.quality_factor = q;
    }
    let mut all = Vec::new();
    for &pol in &cfg.polarizations {
        let found = find_resonances(&cfg.geometry, cfg.band_nm, pol, &opts).map_err(run_err)?;
        info!("{} {pol} resonances in {:?} nm", found.len(), cfg.band_nm);
        all.extend(found);
    }
    all.sort_by(|a, b| a.mode.wavelength_nm.total_cmp(&b.mode.wavelength_nm));
    let bytes = match cli.format {
        Format::Csv => to_bytes(|b| io::write_modes(b, &all))?,
        Format::Json => output::json(&all).map_err(run_err)?,
    };
    emit(cli.out.as_deref(), &bytes)
}

fn cmd_purcell(cli: &Cli) -> Outcome {
    let cfg: PurcellConfig = load(cli.config.as_deref())?;
    cfg.emitter.validate().map_err(usage)?;
    for m in &cfg.modes {
        m.validate().map_err(usage)?;
    }
    let overlaps = cfg
        .overlaps
        .clone()
        .unwrap_or_else(|| vec![cfg.emitter.geometry.overlap_eta; cfg.modes.len()]);
    let result = total_enhancement(&cfg.modes, &overlaps, &cfg.emitter).map_err(usage)?;
    let mut table = String::new();
    let _ = writeln!(table, "{:<6} {:>14} {:>10} {:>12}", "mode", "wavelength_nm", "Q", "F");
    for &(i, f) in &result.per_mode_f {
        let m = &cfg.modes[i];
        let _ = writeln!(table, "{:<6} {:>14.4} {:>10.1} {:>12.6}", i, m.wavelength_nm, m.quality_factor, f);
    }
    let _ = writeln!(table, "F = {:.6}   leak + F = {:.6}", result.purcell_f, result.total_factor);
    eprint!("{table}");
    emit(cli.out.as_deref(), &output::json(&result).map_err(run_err)?)
}

fn cmd_simulate(cli: &Cli) -> Outcome {
    let cfg: SimulateConfig = load(cli.config.as_deref())?;
    let bytes = match cfg {
        SimulateConfig::Histogram(sim) => {
            sim.validate().map_err(usage)?;
            let h = simulate_histogram(&sim, cli.seed).map_err(run_err)?;
            info!("{} photons binned into {} bins", h.total_counts(), h.counts.len());
            match cli.format {
                Format::Csv => to_bytes(|b| io::write_histogram(b, &h))?,
                Format::Json => output::json(&h).map_err(run_err)?,
            }
        }
        SimulateConfig::DetuningScan(s) => {
            s.emitter.validate().map_err(usage)?;
            let clean = lifetime_vs_detuning(&s.emitter, &s.modes, &s.peak_f, &s.detunings_nm)
                .map_err(usage)?;
            let scan = if s.relative_noise > 0.0 {
                add_lifetime_noise(&clean, s.relative_noise, cli.seed)
            } else {
                clean
            };
            match cli.format {
                Format::Csv => to_bytes(|b| io::write_scan(b, &scan))?,
                Format::Json => output::json(&scan).map_err(run_err)?,
            }
        }
    };
    emit(cli.out.as_deref(), &bytes)
}

fn cmd_fit_lifetime(cli: &Cli, input: &Path, curve: Option<&Path>) -> Outcome {
    let cfg: FitLifetimeConfig = load(cli.config.as_deref())?;
    let hist = io::read_histogram(open(input)?, cfg.repetition_rate_mhz).map_err(usage)?;
    let report = fit_lifetime(&hist, cfg.skip_ns, cfg.model).map_err(run_err)?;
    info!(
        "tau = {} ± {} ns after {} iterations",
        report.get("tau_ns"),
        report.sigma("tau_ns"),
        report.iterations
    );
    if let Some(path) = curve {
        let centers = hist.bin_centers();
        let names = cfg.model.parameter_names();
        let params: Vec<f64> = names.iter().map(|n| report.get(n)).collect();
        let mut t = Vec::new();
        let mut counts = Vec::new();
        let mut model = Vec::new();
        for (i, &c) in hist.counts.iter().enumerate() {
            if hist.bin_edges_ns[i] >= cfg.skip_ns {
                t.push(centers[i]);
                counts.push(c as f64);
            }
        }
        let t0 = t.first().copied().unwrap_or(0.0);
        for &x in &t {
            model.push(decay_value(cfg.model, &params, x - t0));
        }
        let bytes = to_bytes(|b| io::write_columns(b, &["time_ns", "counts", "model"], &[&t, &counts, &model]))?;
        emit(Some(path), &bytes)?;
    }
    let bytes = output::json(&report).map_err(run_err)?;
    emit(cli.out.as_deref(), &bytes)?;
    if report.converged {
        Ok(())
    } else {
        Err(run_err(anyhow!("lifetime fit did not converge")))
    }
}

fn cmd_fit_detuning(cli: &Cli, input: &Path, curve: Option<&Path>) -> Outcome {
    let cfg: FitDetuningConfig = load(cli.config.as_deref())?;
    let scan = io::read_scan(open(input)?, cfg.mode_spacing_nm).map_err(usage)?;
    let report = fit_detuning_scan(&scan, &cfg).map_err(run_err)?;
    if let Some(path) = curve {
        let d = scan.detunings();
        let (lo, hi) = d
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let grid: Vec<f64> = (0..=400).map(|i| lo + (hi - lo) * i as f64 / 400.0).collect();
        let model = detuning_curve(&cfg, &report, &grid).map_err(run_err)?;
        let bytes = to_bytes(|b| io::write_columns(b, &["detuning_nm", "lifetime_ns"], &[&grid, &model]))?;
        emit(Some(path), &bytes)?;
    }
    let bytes = output::json(&report).map_err(run_err)?;
    emit(cli.out.as_deref(), &bytes)?;
    if report.converged {
        Ok(())
    } else {
        Err(run_err(anyhow!("detuning fit did not converge")))
    }
}

fn cmd_spectrum(cli: &Cli) -> Outcome {
    let cfg: purcellkit::SpectrumConfig = load(cli.config.as_deref())?;
    cfg.validate().map_err(usage)?;
    let s = synthesize(&cfg).map_err(run_err)?;
    let bytes = match cli.format {
        Format::Csv => to_bytes(|b| io::write_spectrum(b, &s))?,
        Format::Json => output::json(&s).map_err(run_err)?,
    };
    emit(cli.out.as_deref(), &bytes)
}

fn cmd_tuning_map(cli: &Cli) -> Outcome {
    let cfg: TuningMapConfig = load(cli.config.as_deref())?;
    cfg.spectrum.validate().map_err(usage)?;
    let rows = tuning_map(&cfg.spectrum, &cfg.shifts_nm).map_err(usage)?;
    let grid = cfg.spectrum.wavelength_grid_nm.points();
    let bytes = to_bytes(|b| io::write_tuning_map(b, &grid, &cfg.shifts_nm, &rows))?;
    emit(cli.out.as_deref(), &bytes)
}

fn cmd_reproduce(cli: &Cli, xi: Option<f64>) -> Outcome {
    let mut opts = ReproduceOptions {
        seed: cli.seed,
        ..Default::default()
    };
    if let Some(x) = xi {
        if !(x > 0.0 && x < 1.0) {
            return Err(usage(anyhow!("--xi must lie in (0, 1)")));
        }
        opts.xi_zpl = x;
    }
    let report = reproduce::run(&opts).map_err(run_err)?;
    let bytes = match cli.format {
        Format::Json => output::json(&report).map_err(run_err)?,
        Format::Csv => report.to_table().into_bytes(),
    };
    emit(cli.out.as_deref(), &bytes)?;
    if report.all_passed() {
        Ok(())
    } else {
        Err(run_err(anyhow!("one or more reproduction checks failed")))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PURCELLKIT_LOG", "warn")).init();

    let outcome = match &cli.command {
        Command::Modes => cmd_modes(&cli),
        Command::Purcell => cmd_purcell(&cli),
        Command::Simulate => cmd_simulate(&cli),
        Command::FitLifetime { input, curve } => cmd_fit_lifetime(&cli, input, curve.as_deref()),
        Command::FitDetuning { input, curve } => cmd_fit_detuning(&cli, input, curve.as_deref()),
        Command::Spectrum => cmd_spectrum(&cli),
        Command::TuningMap => cmd_tuning_map(&cli),
        Command::Reproduce { xi } => cmd_reproduce(&cli, *xi),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
