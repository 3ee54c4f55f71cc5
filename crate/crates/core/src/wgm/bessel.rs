//! Integer-order cylinder functions J_m and Y_m for real positive arguments.
//!
//! J is evaluated by Miller's downward recurrence normalised with the
//! identity J₀ + 2ΣJ₂ₖ = 1; the same sweep feeds the Neumann series for Y₀
//! and Y₁, from which Y_m follows by upward recurrence (stable for Y).

use crate::error::{Error, Result};
use crate::scalar::Real;

/// J_m, J'_m, Y_m, Y'_m at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderPair<T> {
    pub j: T,
    pub jp: T,
    pub y: T,
    pub yp: T,
}

/// Highest order the downward sweep starts from for orders ≤ `order` at `x`.
fn start_order<T: Real>(order: u32, x: T) -> usize {
    let top = (order as f64).max(x.as_f64().ceil());
    let n = top as usize + 30 + (80.0 * top).sqrt().ceil() as usize;
    n + (n & 1)
}

/// J₀(x)..=J_N(x) for N ≥ `order`, where N is the sweep start order.
fn j_sequence<T: Real>(order: u32, x: T) -> Vec<T> {
    let n = start_order(order, x);
    let mut f = vec![T::zero(); n + 2];
    if x == T::zero() {
        f[0] = T::one();
        return f;
    }
    let big = T::max_value().sqrt();
    let two_over_x = T::lit(2.0) / x;
    f[n] = T::min_positive_value().sqrt();
    for k in (1..=n).rev() {
        let next = T::from_count(k) * two_over_x * f[k] - f[k + 1];
        f[k - 1] = next;
        if next.abs() > big {
            let scale = big.recip();
            for v in &mut f[k - 1..] {
                *v = *v * scale;
            }
        }
    }
    let norm = f[0] + T::lit(2.0) * f.iter().skip(2).step_by(2).copied().sum::<T>();
    for v in &mut f {
        *v = *v / norm;
    }
    f
}

/// Y₀ and Y₁ from the Neumann expansions over an already-normalised J sweep.
fn y0_y1<T: Real>(x: T, j: &[T]) -> (T, T) {
    let two_over_pi = T::FRAC_2_PI();
    let log_term = (x / T::lit(2.0)).ln() + T::euler_gamma();
    let mut s0 = T::zero();
    let mut s1 = T::zero();
    let mut k = 1usize;
    while 2 * k + 1 < j.len() {
        let sign = if k.is_multiple_of(2) { T::one() } else { -T::one() };
        let kk = T::from_count(k);
        s0 = s0 + sign * j[2 * k] / kk;
        s1 = s1 + sign * (j[2 * k - 1] - j[2 * k + 1]) / kk;
        k += 1;
    }
    let y0 = two_over_pi * (log_term * j[0] - T::lit(2.0) * s0);
    let y1 = two_over_pi * (log_term * j[1] - j[0] / x + s1);
    (y0, y1)
}

/// Bessel function of the first kind J_m(x), x ≥ 0.
pub fn bessel_j<T: Real>(order: u32, x: T) -> T {
    debug_assert!(x >= T::zero(), "bessel_j needs x >= 0");
    j_sequence(order, x)[order as usize]
}

/// Bessel function of the second kind Y_m(x); domain error unless x > 0.
pub fn bessel_y<T: Real>(order: u32, x: T) -> Result<T> {
    Ok(bessel_jy(order, x)?.y)
}

/// J_m, Y_m and their derivatives from one recurrence sweep.
pub fn bessel_jy<T: Real>(order: u32, x: T) -> Result<CylinderPair<T>> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "cylinder functions of the second kind need x > 0, got {x}"
        )));
    }
    let j = j_sequence(order.max(1), x);
    let (mut y_prev, mut y) = y0_y1(x, &j);
    // y_prev = Y_{k-1}, y = Y_k while walking k upward
    let two_over_x = T::lit(2.0) / x;
    if order == 0 {
        return Ok(CylinderPair {
            j: j[0],
            jp: -j[1],
            y: y_prev,
            yp: -y,
        });
    }
    for k in 1..order {
        let next = T::from_count(k as usize) * two_over_x * y - y_prev;
        y_prev = y;
        y = next;
    }
    let m = order as usize;
    let m_over_x = T::from_count(m) / x;
    Ok(CylinderPair {
        j: j[m],
        jp: j[m - 1] - m_over_x * j[m],
        y,
        yp: y_prev - m_over_x * y,
    })
}

/// Derivative J'_m(x) for x ≥ 0.
pub fn bessel_j_prime<T: Real>(order: u32, x: T) -> T {
    if order == 0 {
        return -bessel_j(1, x);
    }
    let j = j_sequence(order, x);
    let m = order as usize;
    if x == T::zero() {
        return if m == 1 { T::lit(0.5) } else { T::zero() };
    }
    j[m - 1] - T::from_count(m) / x * j[m]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel_j(0, 0.0f64), 1.0);
        assert_eq!(bessel_j(1, 0.0f64), 0.0);
        assert_eq!(bessel_j(46, 0.0f64), 0.0);
        assert_eq!(bessel_j_prime(1, 0.0f64), 0.5);
    }

    #[test]
    fn y_rejects_non_positive_argument() {
        assert!(matches!(bessel_y(0, 0.0f64), Err(Error::Domain(_))));
        assert!(matches!(bessel_y(3, -1.0f64), Err(Error::Domain(_))));
        assert!(bessel_y(3, f64::NAN).is_err());
    }

    #[test]
    fn y0_envelope_for_large_argument() {
        let mut x = 50.0f64;
        while x <= 200.0 {
            let bound = 1.01 * (2.0 / (std::f64::consts::PI * x)).sqrt();
            assert!(bessel_y(0, x).unwrap().abs() <= bound, "x = {x}");
            x += 0.37;
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let h = 1e-5;
        for &(m, x) in &[(0u32, 3.3f64), (5, 7.0), (46, 52.0)] {
            let p = bessel_jy(m, x).unwrap();
            let dj = (bessel_j(m, x + h) - bessel_j(m, x - h)) / (2.0 * h);
            let dy = (bessel_y(m, x + h).unwrap() - bessel_y(m, x - h).unwrap()) / (2.0 * h);
            assert!((p.jp - dj).abs() < 1e-8, "J' m={m} x={x}");
            assert!((p.yp - dy).abs() < 1e-8 * dy.abs().max(1.0), "Y' m={m} x={x}");
            assert!((bessel_j_prime(m, x) - p.jp).abs() < 1e-15);
        }
    }

    #[test]
    fn single_precision_low_orders() {
        let j0 = bessel_j(0, 1.0f32);
        assert!((j0 - 0.765_197_7).abs() < 1e-5);
        let y1 = bessel_y(1, 1.0f32).unwrap();
        assert!((y1 + 0.781_212_8).abs() < 1e-4);
    }
}
