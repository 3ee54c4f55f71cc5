//! Whispering-gallery resonances of the effective-index ring.
//!
//! The membrane is first reduced to its fundamental slab index n_eff(λ). The
//! in-plane problem is then a step-index disk or annulus for the scalar
//! ψ = E_z (TM) or ψ = H_z (TE). Inside the ring ψ is a combination of J_m
//! and Y_m; outside it is the evanescent Y_m(n_c k r). At every interface ψ and
//! w·ψ' are continuous, with w = 1 for TM and w = 1/n² for TE.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bessel::{bessel_jy, CylinderPair};
use super::slab::{solve_slab, wavenumber_per_um};
use super::volume::{mode_volume_with, RadialField};
use crate::error::{Error, Result};
use crate::model::{CavityMode, Polarization, RingGeometry};
use crate::scalar::Real;

/// Which boundary-value problem the radial equation is solved as.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RadialModel {
    /// Single outer boundary; the inner edge lies inside the evanescent caustic region.
    Disk,
    /// Inner and outer boundaries both matched.
    Annulus,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions<T> {
    /// Q assigned to every resonance found; the solver does not compute losses.
    pub quality_factor: T,
    pub grid_step_nm: T,
    pub root_tolerance_nm: T,
    /// Radial samples per region used for field profiles and mode volumes.
    pub radial_points: usize,
    pub vertical_points: usize,
    pub compute_volumes: bool,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions {
            quality_factor: T::lit(4000.0),
            grid_step_nm: T::lit(0.05),
            root_tolerance_nm: T::lit(1e-6),
            radial_points: 600,
            vertical_points: 200,
            compute_volumes: true,
        }
    }
}

/// A resonance together with solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance<T> {
    /// Traveling-wave mode; `mode_volume_cubic_lambda_over_n` is the traveling-wave V.
    pub mode: CavityMode<T>,
    /// Standing-wave V in (λ/n)³: half the traveling-wave value.
    pub standing_wave_volume: T,
    pub effective_index: T,
    pub model: RadialModel,
    pub residual: T,
}

fn weight<T: Real>(polarization: Polarization, n: T) -> T {
    match polarization {
        Polarization::TM => T::one(),
        Polarization::TE => (n * n).recip(),
    }
}

fn unit_row<T: Real>(a: T, b: T) -> (T, T) {
    let norm = a.hypot(b);
    if norm > T::zero() {
        (a / norm, b / norm)
    } else {
        (a, b)
    }
}

/// Everything needed to evaluate ψ(r) for one (m, λ, polarization).
#[derive(Debug, Clone, Copy)]
pub(crate) struct RadialProblem<T> {
    pub m: u32,
    pub k: T,
    pub n_ring: T,
    pub n_clad: T,
    pub inner_radius: T,
    pub outer_radius: T,
    pub polarization: Polarization,
    pub model: RadialModel,
}

impl<T: Real> RadialProblem<T> {
    pub fn new(
        geometry: &RingGeometry<T>,
        m: u32,
        wavelength_nm: T,
        polarization: Polarization,
        model: RadialModel,
    ) -> Result<Self> {
        let slab = solve_slab(geometry, wavelength_nm, polarization)?;
        Ok(RadialProblem {
            m,
            k: wavenumber_per_um(wavelength_nm),
            n_ring: slab.effective_index,
            n_clad: geometry.cladding_index_top,
            inner_radius: geometry.inner_radius_um(),
            outer_radius: geometry.outer_radius_um(),
            polarization,
            model,
        })
    }

    fn w_ring(&self) -> T {
        weight(self.polarization, self.n_ring)
    }

    fn w_clad(&self) -> T {
        weight(self.polarization, self.n_clad)
    }

    fn pair(&self, n: T, r: T) -> Result<CylinderPair<T>> {
        bessel_jy(self.m, n * self.k * r)
    }

    /// Normalised row of the outer matching condition acting on (B, C).
    fn outer_row(&self) -> Result<(T, T)> {
        let rr = self.outer_radius;
        let ring = self.pair(self.n_ring, rr)?;
        let out = self.pair(self.n_clad, rr)?;
        let (c, s) = unit_row(out.y * self.w_ring() * self.n_ring, self.w_clad() * self.n_clad * out.yp);
        Ok((c * ring.jp - s * ring.j, c * ring.yp - s * ring.y))
    }

    /// Normalised row of the inner matching condition acting on (B, C).
    fn inner_row(&self) -> Result<(T, T)> {
        let a = self.inner_radius;
        let ring = self.pair(self.n_ring, a)?;
        let hole = self.pair(self.n_clad, a)?;
        let (c, s) = unit_row(hole.j * self.w_ring() * self.n_ring, self.w_clad() * self.n_clad * hole.jp);
        Ok((c * ring.jp - s * ring.j, c * ring.yp - s * ring.y))
    }

    /// Characteristic function; continuous in λ and zero exactly at resonances.
    pub fn characteristic(&self) -> Result<T> {
        let (b1, b2) = self.outer_row()?;
        match self.model {
            Disk => Ok(b1),
            Annulus => {
                let (a1, a2) = unit_row_pair(self.inner_row()?);
                let (b1, b2) = unit_row_pair((b1, b2));
                Ok(a1 * b2 - a2 * b1)
            }
        }
    }

    /// Field coefficients (hole, ring J, ring Y, exterior) with ψ continuous.
    fn coefficients(&self) -> Result<[T; 4]> {
        let (bj, by) = match self.model {
            Disk => (T::one(), T::zero()),
            Annulus => {
                let (a1, a2) = self.inner_row()?;
                (a2, -a1)
            }
        };
        let ring_at = |r: T| -> Result<T> {
            let p = self.pair(self.n_ring, r)?;
            Ok(bj * p.j + by * p.y)
        };
        let hole = match self.model {
            Disk => T::zero(),
            Annulus => {
                let a = self.inner_radius;
                ring_at(a)? / self.pair(self.n_clad, a)?.j
            }
        };
        let rr = self.outer_radius;
        let ext = ring_at(rr)? / self.pair(self.n_clad, rr)?.y;
        Ok([hole, bj, by, ext])
    }

    fn region_index(&self, r: T) -> T {
        if r > self.outer_radius || (self.model == Annulus && r < self.inner_radius) {
            self.n_clad
        } else {
            self.n_ring
        }
    }
}

use RadialModel::{Annulus, Disk};

fn unit_row_pair<T: Real>(row: (T, T)) -> (T, T) {
    unit_row(row.0, row.1)
}

/// Samples of ψ and ψ' on a radial grid.
pub(crate) struct RadialSamples<T> {
    pub radius: Vec<T>,
    pub psi: Vec<T>,
    pub dpsi: Vec<T>,
    pub index: Vec<T>,
}

impl<T: Real> RadialProblem<T> {
    /// Radial grid with uniform sampling per region and a node pair straddling
    /// each interface so that jumps in ψ' are represented.
    pub fn grid(&self, points_per_region: usize, r_max: T) -> Vec<T> {
        let n = points_per_region.max(4);
        let gap = T::lit(1e-9);
        let bounds = [T::zero(), self.inner_radius, self.outer_radius, r_max];
        let mut grid = Vec::new();
        for (i, w) in bounds.windows(2).enumerate() {
            let start = if i == 0 { w[0] } else { w[0] + gap };
            let last = i + 2 == bounds.len();
            let end = if last { w[1] } else { w[1] - gap };
            for j in 0..n {
                let f = T::from_count(j) / T::from_count(n - 1);
                grid.push(start + (end - start) * f);
            }
        }
        grid
    }

    pub fn sample(&self, grid: &[T]) -> Result<RadialSamples<T>> {
        let [hole, bj, by, ext] = self.coefficients()?;
        let mut out = RadialSamples {
            radius: Vec::with_capacity(grid.len()),
            psi: Vec::with_capacity(grid.len()),
            dpsi: Vec::with_capacity(grid.len()),
            index: Vec::with_capacity(grid.len()),
        };
        for &r in grid {
            let n = self.region_index(r);
            let (psi, dpsi) = if r == T::zero() {
                let psi = if self.m == 0 { T::one() } else { T::zero() };
                let scale = if self.model == Annulus { hole } else { bj };
                (scale * psi, T::zero())
            } else if r > self.outer_radius {
                let p = self.pair(self.n_clad, r)?;
                (ext * p.y, ext * n * self.k * p.yp)
            } else if self.model == Annulus && r < self.inner_radius {
                let p = self.pair(self.n_clad, r)?;
                (hole * p.j, hole * n * self.k * p.jp)
            } else {
                let p = self.pair(self.n_ring, r)?;
                (bj * p.j + by * p.y, n * self.k * (bj * p.jp + by * p.yp))
            };
            out.radius.push(r);
            out.psi.push(psi);
            out.dpsi.push(dpsi);
            out.index.push(n);
        }
        Ok(out)
    }

    /// Outer edge of the sampled domain: far enough for the evanescent tail
    /// to vanish, short of the radiation caustic.
    pub fn field_extent(&self) -> T {
        let m = T::from_count(self.m as usize);
        let x = self.n_clad * self.k * self.outer_radius;
        let ratio = m / x;
        let gamma = self.n_clad * self.k * (ratio * ratio - T::one()).max(T::lit(1e-6)).sqrt();
        let caustic = m / (self.n_clad * self.k);
        (self.outer_radius + T::lit(30.0) / gamma)
            .min(caustic)
            .max(self.outer_radius * T::lit(1.05))
    }
}

/// Number of radial field maxima inside the ring material.
fn radial_order<T: Real>(problem: &RadialProblem<T>) -> Result<u32> {
    let lo = if problem.model == Annulus {
        problem.inner_radius
    } else {
        T::zero()
    };
    let n = 2000;
    let grid: Vec<T> = (1..n)
        .map(|i| lo + (problem.outer_radius - lo) * T::from_count(i) / T::from_count(n))
        .collect();
    let s = problem.sample(&grid)?;
    let zeros = s
        .psi
        .windows(2)
        .filter(|w| (w[0] > T::zero()) != (w[1] > T::zero()))
        .count();
    Ok(zeros as u32 + 1)
}

/// Disk or annulus, chosen by comparing the caustic radius m/(n_eff k) with the inner radius.
pub fn choose_model<T: Real>(geometry: &RingGeometry<T>, m: u32, wavelength_nm: T, polarization: Polarization) -> Result<RadialModel> {
    let slab = solve_slab(geometry, wavelength_nm, polarization)?;
    let caustic = T::from_count(m as usize) / (slab.effective_index * wavenumber_per_um(wavelength_nm));
    Ok(if caustic > geometry.inner_radius_um() {
        Disk
    } else {
        Annulus
    })
}

/// Characteristic-equation value for azimuthal order `m` at `wavelength_nm`.
pub fn characteristic<T: Real>(
    geometry: &RingGeometry<T>,
    m: u32,
    wavelength_nm: T,
    polarization: Polarization,
    model: RadialModel,
) -> Result<T> {
    RadialProblem::new(geometry, m, wavelength_nm, polarization, model)?.characteristic()
}

fn bisect_root<T: Real>(
    f: impl Fn(T) -> Result<T>,
    mut a: T,
    mut b: T,
    mut fa: T,
    tolerance: T,
) -> Result<(T, T)> {
    // past the requested tolerance keep halving so the residual reaches round-off
    for _ in 0..200 {
        let mid = (a + b) / T::lit(2.0);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid)?;
        if fm == T::zero() {
            return Ok((mid, fm));
        }
        if (fm > T::zero()) == (fa > T::zero()) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
        if b - a < tolerance * T::lit(1e-6) {
            break;
        }
    }
    let fb = f(b)?;
    Ok(if fa.abs() <= fb.abs() { (a, fa) } else { (b, fb) })
}

fn wavelength_grid<T: Real>(band: (T, T), step: T) -> Vec<T> {
    let (lo, hi) = band;
    if !(hi > lo) {
        return Vec::new();
    }
    let n = ((hi - lo) / step).ceil().to_usize().unwrap_or(0).max(1);
    (0..=n)
        .map(|i| lo + (hi - lo) * T::from_count(i) / T::from_count(n))
        .collect()
}

fn roots_for_order<T: Real>(
    geometry: &RingGeometry<T>,
    m: u32,
    band: (T, T),
    polarization: Polarization,
    options: &SolverOptions<T>,
) -> Result<Vec<Resonance<T>>> {
    let centre = (band.0 + band.1) / T::lit(2.0);
    let model = choose_model(geometry, m, centre, polarization)?;
    let f = |lam: T| characteristic(geometry, m, lam, polarization, model);
    let grid = wavelength_grid(band, options.grid_step_nm);
    let values = grid.iter().map(|&l| f(l)).collect::<Result<Vec<_>>>()?;
    let mut found = Vec::new();
    for i in 0..grid.len().saturating_sub(1) {
        let (fa, fb) = (values[i], values[i + 1]);
        let root = if fa == T::zero() {
            (grid[i], fa)
        } else if (fa > T::zero()) != (fb > T::zero()) && fb != T::zero() {
            bisect_root(f, grid[i], grid[i + 1], fa, options.root_tolerance_nm)?
        } else {
            continue;
        };
        let (lambda, residual) = root;
        let problem = RadialProblem::new(geometry, m, lambda, polarization, model)?;
        let p = radial_order(&problem)?;
        let mut mode = CavityMode {
            wavelength_nm: lambda,
            quality_factor: options.quality_factor,
            mode_volume_cubic_lambda_over_n: T::nan(),
            polarization,
            azimuthal_number: m,
            radial_number: p,
        };
        if options.compute_volumes {
            let field = RadialField::from_problem(&problem, lambda, p, options.radial_points)?;
            mode.mode_volume_cubic_lambda_over_n =
                mode_volume_with(&field, geometry, options.vertical_points)?;
        }
        found.push(Resonance {
            mode,
            standing_wave_volume: mode.mode_volume_cubic_lambda_over_n / T::lit(2.0),
            effective_index: problem.n_ring,
            model,
            residual,
        });
    }
    Ok(found)
}

/// All resonances of one polarization with vacuum wavelength inside `band_nm`,
/// sorted by wavelength. Only azimuthal orders whose exterior field is
/// evanescent across the whole band are considered.
pub fn find_resonances<T: Real>(
    geometry: &RingGeometry<T>,
    band_nm: (T, T),
    polarization: Polarization,
    options: &SolverOptions<T>,
) -> Result<Vec<Resonance<T>>> {
    geometry.validate()?;
    let (lo, hi) = band_nm;
    if !(hi > lo) {
        return Ok(Vec::new());
    }
    if !(lo > T::zero()) {
        return Err(Error::invalid("band_nm", "wavelengths must be positive"));
    }
    // surface cutoff for the whole band before spawning work
    solve_slab(geometry, hi, polarization)?;
    let k_max = wavenumber_per_um(lo);
    let r = geometry.outer_radius_um();
    let m_lo = (geometry.cladding_index_top * k_max * r).floor().to_u32().unwrap_or(0) + 1;
    let m_hi = (geometry.core_index * k_max * r).ceil().to_u32().unwrap_or(0);
    let per_order: Vec<Result<Vec<Resonance<T>>>> = (m_lo..=m_hi)
        .into_par_iter()
        .map(|m| roots_for_order(geometry, m, band_nm, polarization, options))
        .collect();
    let mut all = Vec::new();
    for r in per_order {
        all.extend(r?);
    }
    all.sort_by(|a, b| {
        a.mode
            .wavelength_nm
            .partial_cmp(&b.mode.wavelength_nm)
            .expect("finite wavelengths")
    });
    Ok(all)
}
