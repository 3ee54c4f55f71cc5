//! Radial field profiles and the energy-weighted mode volume
//! V = ∫ε|E|² dV / max(ε|E|²), evaluated on an (r, z) trapezoid grid with the
//! in-plane profile extended vertically by the slab mode.

use serde::{Deserialize, Serialize};

use super::resonance::RadialProblem;
use super::slab::{solve_slab, SlabProfile};
use crate::error::{Error, Result};
use crate::model::{Polarization, RingGeometry};
use crate::scalar::Real;

/// In-plane electric-field magnitude of one resonance on a radial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialField<T> {
    pub radius_grid_um: Vec<T>,
    /// |E|(r) scaled so that its largest magnitude is 1 (signed E_z for TM).
    pub amplitude: Vec<T>,
    pub wavelength_nm: T,
    pub polarization: Polarization,
    pub azimuthal_number: u32,
    pub radial_number: u32,
}

impl<T: Real> RadialField<T> {
    pub(crate) fn from_problem(
        problem: &RadialProblem<T>,
        wavelength_nm: T,
        radial_number: u32,
        points_per_region: usize,
    ) -> Result<Self> {
        let grid = problem.grid(points_per_region, problem.field_extent());
        let s = problem.sample(&grid)?;
        let m = T::from_count(problem.m as usize);
        let mut amplitude: Vec<T> = (0..grid.len())
            .map(|i| match problem.polarization {
                Polarization::TM => s.psi[i],
                Polarization::TE => {
                    let eps = s.index[i] * s.index[i];
                    let r = s.radius[i];
                    let e_r = if r > T::zero() {
                        m * s.psi[i] / r
                    } else if problem.m == 1 {
                        s.dpsi[i]
                    } else {
                        T::zero()
                    };
                    (e_r / eps).hypot(s.dpsi[i] / eps)
                }
            })
            .collect();
        let peak = amplitude.iter().fold(T::zero(), |acc, a| acc.max(a.abs()));
        if !(peak > T::zero()) {
            return Err(Error::Domain("radial field vanishes everywhere".into()));
        }
        for a in &mut amplitude {
            *a = *a / peak;
        }
        Ok(RadialField {
            radius_grid_um: grid,
            amplitude,
            wavelength_nm,
            polarization: problem.polarization,
            azimuthal_number: problem.m,
            radial_number,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.radius_grid_um.len() != self.amplitude.len() {
            return Err(Error::LengthMismatch {
                what: "radial field grid and amplitude",
                left: self.radius_grid_um.len(),
                right: self.amplitude.len(),
            });
        }
        if self.radius_grid_um.len() < 2 {
            return Err(Error::invalid("radius_grid_um", "needs at least two nodes"));
        }
        if self.radius_grid_um.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("radius_grid_um", "must be strictly increasing"));
        }
        Ok(())
    }
}

/// Profile of a resonance on its radial grid; see [`RadialProblem::field_extent`].
pub fn radial_field<T: Real>(
    geometry: &RingGeometry<T>,
    resonance: &super::Resonance<T>,
    points_per_region: usize,
) -> Result<RadialField<T>> {
    let problem = RadialProblem::new(
        geometry,
        resonance.mode.azimuthal_number,
        resonance.mode.wavelength_nm,
        resonance.mode.polarization,
        resonance.model,
    )?;
    RadialField::from_problem(
        &problem,
        resonance.mode.wavelength_nm,
        resonance.mode.radial_number,
        points_per_region,
    )
}

fn trapezoid_weights<T: Real>(x: &[T]) -> Vec<T> {
    let mut w = vec![T::zero(); x.len()];
    for i in 0..x.len().saturating_sub(1) {
        let h = (x[i + 1] - x[i]) / T::lit(2.0);
        w[i] = w[i] + h;
        w[i + 1] = w[i + 1] + h;
    }
    w
}

/// 2π∫∫ ε(r,z) f(r) g(z) r dr dz divided by the peak of ε f g, in μm³ when the
/// grids are in μm. `radial_sq` and `vertical_sq` are |E|² factors on `radius`
/// and `z`.
pub fn energy_volume_um3<T: Real>(
    radius: &[T],
    radial_sq: &[T],
    z: &[T],
    vertical_sq: &[T],
    eps: impl Fn(T, T) -> T,
) -> T {
    let wr = trapezoid_weights(radius);
    let wz = trapezoid_weights(z);
    let mut total = T::zero();
    let mut peak = T::zero();
    for (i, &r) in radius.iter().enumerate() {
        let mut column = T::zero();
        for (j, &zz) in z.iter().enumerate() {
            let density = eps(r, zz) * radial_sq[i] * vertical_sq[j];
            peak = peak.max(density);
            column = column + wz[j] * density;
        }
        total = total + wr[i] * r * column;
    }
    T::lit(2.0) * T::PI() * total / peak
}

/// Keeps every other node plus both nodes of every interface pair and the last node.
fn coarsen<T: Real>(x: &[T]) -> Vec<usize> {
    let tight = T::lit(1e-6);
    let n = x.len();
    (0..n)
        .filter(|&i| {
            i % 2 == 0
                || i + 1 == n
                || (i + 1 < n && x[i + 1] - x[i] < tight)
                || (i > 0 && x[i] - x[i - 1] < tight)
        })
        .collect()
}

fn vertical_grid<T: Real>(profile: &SlabProfile<T>, points: usize) -> Vec<T> {
    let n = points.max(4);
    let gap = T::lit(1e-9);
    let (below, above) = profile.tail_extent_um(T::lit(8.0));
    let t = profile.thickness_um;
    let segments = [(-below, -gap), (gap, t - gap), (t + gap, t + above)];
    let mut z = Vec::with_capacity(3 * n);
    for (a, b) in segments {
        for j in 0..n {
            z.push(a + (b - a) * T::from_count(j) / T::from_count(n - 1));
        }
    }
    z
}

/// Mode volume in (λ/n_core)³ using `vertical_points` samples per vertical layer.
/// Fails with [`Error::GridTooCoarse`] when halving both grids moves the result by more than 1%.
pub fn mode_volume_with<T: Real>(
    field: &RadialField<T>,
    geometry: &RingGeometry<T>,
    vertical_points: usize,
) -> Result<T> {
    field.validate()?;
    geometry.validate()?;
    let slab = solve_slab(geometry, field.wavelength_nm, field.polarization)?;
    let profile = SlabProfile::new(geometry, field.wavelength_nm, &slab);
    let z = vertical_grid(&profile, vertical_points);
    let vertical_sq: Vec<T> = z.iter().map(|&zz| profile.electric_sq(zz)).collect();
    let radial_sq: Vec<T> = field.amplitude.iter().map(|a| *a * *a).collect();
    let (a, rr) = (geometry.inner_radius_um(), geometry.outer_radius_um());
    let t = geometry.membrane_thickness_um;
    let core = geometry.core_index * geometry.core_index;
    let top = geometry.cladding_index_top * geometry.cladding_index_top;
    let bottom = geometry.cladding_index_bottom * geometry.cladding_index_bottom;
    let eps = |r: T, zz: T| {
        if zz < T::zero() {
            bottom
        } else if zz > t {
            top
        } else if r >= a && r <= rr {
            core
        } else {
            top
        }
    };
    let r = &field.radius_grid_um;
    let fine = energy_volume_um3(r, &radial_sq, &z, &vertical_sq, eps);

    let ri = coarsen(r);
    let zi = coarsen(&z);
    let pick = |v: &[T], idx: &[usize]| idx.iter().map(|&i| v[i]).collect::<Vec<T>>();
    let coarse = energy_volume_um3(
        &pick(r, &ri),
        &pick(&radial_sq, &ri),
        &pick(&z, &zi),
        &pick(&vertical_sq, &zi),
        eps,
    );
    let change = ((fine - coarse) / fine).abs();
    if !(change <= T::lit(0.01)) {
        return Err(Error::GridTooCoarse(change.as_f64() * 100.0));
    }
    let unit = field.wavelength_nm * T::lit(1e-3) / geometry.core_index;
    Ok(fine / (unit * unit * unit))
}

/// Traveling-wave mode volume in (λ/n_core)³ with the default vertical sampling.
pub fn mode_volume<T: Real>(field: &RadialField<T>, geometry: &RingGeometry<T>) -> Result<T> {
    mode_volume_with(field, geometry, 200)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn uniform_field_fills_its_box() {
        let r = linspace(0.0, 1.3, 17);
        let z = linspace(-0.2, 0.5, 9);
        let v = energy_volume_um3(&r, &vec![1.0; r.len()], &z, &vec![1.0; z.len()], |_, _| 5.76);
        let exact = std::f64::consts::PI * 1.3 * 1.3 * 0.7;
        assert!((v - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn coarsening_keeps_interface_pairs() {
        let x = [0.0, 0.1, 0.2, 0.3, 0.3 + 1e-9, 0.4, 0.5];
        let idx = coarsen(&x);
        assert!(idx.contains(&3) && idx.contains(&4));
        assert_eq!(*idx.last().unwrap(), 6);
        assert_eq!(idx[0], 0);
    }

    #[test]
    fn rejects_unsorted_grid() {
        let f = RadialField {
            radius_grid_um: vec![0.0, 0.2, 0.1],
            amplitude: vec![0.0, 1.0, 0.5],
            wavelength_nm: 637.0,
            polarization: Polarization::TE,
            azimuthal_number: 1,
            radial_number: 1,
        };
        assert!(f.validate().is_err());
    }

    #[test]
    fn coarse_grid_is_reported() {
        let g = RingGeometry::diamond_microring();
        // a sharply peaked profile sampled too sparsely to converge
        let r = linspace(0.0, 3.0, 7);
        let amplitude = vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        let f = RadialField {
            radius_grid_um: r,
            amplitude,
            wavelength_nm: 637.0,
            polarization: Polarization::TM,
            azimuthal_number: 46,
            radial_number: 1,
        };
        assert!(matches!(
            mode_volume_with(&f, &g, 200),
            Err(Error::GridTooCoarse(_))
        ));
    }
}
