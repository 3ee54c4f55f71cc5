//! Damped Gauss–Newton (Levenberg–Marquardt) for small dense problems.
//!
//! Jacobians are taken by central differences (one-sided next to a bound).
//! Damping follows Nielsen's gain-ratio rule on a Marquardt-scaled diagonal.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport<T> {
    pub parameters: BTreeMap<String, T>,
    pub sigmas: BTreeMap<String, T>,
    pub reduced_chi2: T,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Real> FitReport<T> {
    /// Estimate by name; panics on an unknown name.
    pub fn get(&self, name: &str) -> T {
        self.parameters[name]
    }

    pub fn sigma(&self, name: &str) -> T {
        self.sigmas[name]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bounds<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Real> Bounds<T> {
    pub fn unbounded(n: usize) -> Self {
        Bounds {
            lower: vec![T::neg_infinity(); n],
            upper: vec![T::infinity(); n],
        }
    }

    fn clamp(&self, p: &mut [T]) {
        for ((x, &lo), &hi) in p.iter_mut().zip(&self.lower).zip(&self.upper) {
            *x = x.max(lo).min(hi);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions<T> {
    pub max_iterations: usize,
    /// Stop once an accepted step lowers the cost by less than this fraction.
    pub cost_tolerance: T,
    /// Convergence test on the cosine between residual and Jacobian columns.
    pub gradient_tolerance: T,
    pub initial_damping: T,
}

impl<T: Real> Default for MinimizeOptions<T> {
    fn default() -> Self {
        MinimizeOptions {
            max_iterations: 200,
            cost_tolerance: T::lit(1e-10),
            gradient_tolerance: T::lit(1e-6),
            initial_damping: T::lit(1e-6),
        }
    }
}

/// Raw minimizer output, parameters in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum<T> {
    pub params: Vec<T>,
    pub sigmas: Vec<T>,
    /// ½ Σ r² at the solution.
    pub cost: T,
    pub reduced_chi2: T,
    pub iterations: usize,
    pub converged: bool,
    /// Cost after the start and after each accepted step.
    pub cost_history: Vec<T>,
}

impl<T: Real> Minimum<T> {
    pub fn into_report(self, names: &[&str]) -> FitReport<T> {
        let parameters = names.iter().map(|n| n.to_string()).zip(self.params).collect();
        let sigmas = names.iter().map(|n| n.to_string()).zip(self.sigmas).collect();
        FitReport {
            parameters,
            sigmas,
            reduced_chi2: self.reduced_chi2,
            iterations: self.iterations,
            converged: self.converged,
        }
    }
}

fn half_sum_sq<T: Real>(r: &[T]) -> T {
    r.iter().map(|&x| x * x).sum::<T>() / T::lit(2.0)
}

fn all_finite<T: Real>(r: &[T]) -> bool {
    r.iter().all(|x| x.is_finite())
}

fn jacobian<T: Real, F: Fn(&[T]) -> Vec<T>>(
    f: &F,
    p: &[T],
    bounds: &Bounds<T>,
    m: usize,
) -> Result<Vec<Vec<T>>> {
    let eps = T::epsilon().cbrt();
    let mut cols = Vec::with_capacity(p.len());
    let mut q = p.to_vec();
    for j in 0..p.len() {
        let h = eps * p[j].abs().max(T::one());
        let up = p[j] + h <= bounds.upper[j];
        let down = p[j] - h >= bounds.lower[j];
        let (a, b) = match (down, up) {
            (true, true) => (p[j] - h, p[j] + h),
            (false, true) => (p[j], p[j] + h),
            (true, false) => (p[j] - h, p[j]),
            (false, false) => (p[j], p[j]),
        };
        if !(b > a) {
            return Err(Error::SingularNormalEquations);
        }
        q[j] = a;
        let ra = f(&q);
        q[j] = b;
        let rb = f(&q);
        q[j] = p[j];
        if ra.len() != m || rb.len() != m || !all_finite(&ra) || !all_finite(&rb) {
            return Err(Error::Domain(format!(
                "residuals not finite near parameter {j} = {}",
                p[j]
            )));
        }
        cols.push(ra.iter().zip(&rb).map(|(&x, &y)| (y - x) / (b - a)).collect());
    }
    Ok(cols)
}

fn normal_equations<T: Real>(cols: &[Vec<T>], r: &[T]) -> (Vec<Vec<T>>, Vec<T>) {
    let n = cols.len();
    let mut a = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s = cols[i].iter().zip(&cols[j]).map(|(&x, &y)| x * y).sum::<T>();
            a[i][j] = s;
            a[j][i] = s;
        }
    }
    let g = cols
        .iter()
        .map(|c| c.iter().zip(r).map(|(&x, &y)| x * y).sum::<T>())
        .collect();
    (a, g)
}

/// Lower-triangular factor of a symmetric positive-definite matrix.
fn cholesky<T: Real>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut l = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for (&p, &q) in l[i][..j].iter().zip(&l[j][..j]) {
                s = s - p * q;
            }
            if i == j {
                if !(s > T::zero()) || !s.is_finite() {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve<T: Real>(l: &[Vec<T>], b: &[T]) -> Vec<T> {
    let n = l.len();
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] = y[i] - l[i][k] * y[k];
        }
        y[i] = y[i] / l[i][i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] = y[i] - l[k][i] * y[k];
        }
        y[i] = y[i] / l[i][i];
    }
    y
}

/// Largest cosine between the residual vector and any Jacobian column.
fn gradient_cosine<T: Real>(a: &[Vec<T>], g: &[T], r: &[T]) -> T {
    let rn = r.iter().map(|&x| x * x).sum::<T>().sqrt();
    if rn == T::zero() {
        return T::zero();
    }
    g.iter()
        .enumerate()
        .map(|(i, &gi)| (gi / (a[i][i].sqrt() * rn)).abs())
        .fold(T::zero(), T::max)
}

/// Minimizes ½ Σ rᵢ(p)² starting from `initial`.
///
/// Non-convergence within the iteration budget is reported through
/// `converged`, not as an error. A Jacobian column that vanishes identically
/// yields [`Error::SingularNormalEquations`].
pub fn least_squares<T, F>(
    residual_fn: F,
    initial: &[T],
    bounds: Option<&Bounds<T>>,
    opts: &MinimizeOptions<T>,
) -> Result<Minimum<T>>
where
    T: Real,
    F: Fn(&[T]) -> Vec<T>,
{
    let n = initial.len();
    if n == 0 {
        return Err(Error::invalid("initial", "no parameters to fit"));
    }
    let bounds = match bounds {
        Some(b) if b.lower.len() != n || b.upper.len() != n => {
            return Err(Error::LengthMismatch {
                what: "bounds and parameters",
                left: b.lower.len().min(b.upper.len()),
                right: n,
            })
        }
        Some(b) => b.clone(),
        None => Bounds::unbounded(n),
    };
    for (j, &x) in initial.iter().enumerate() {
        if !(x >= bounds.lower[j] && x <= bounds.upper[j]) {
            return Err(Error::invalid("initial", "starting point lies outside the bounds"));
        }
    }

    let mut p = initial.to_vec();
    let mut r = residual_fn(&p);
    let m = r.len();
    if m < n {
        return Err(Error::InsufficientData(format!(
            "{m} residuals for {n} parameters"
        )));
    }
    if !all_finite(&r) {
        return Err(Error::Domain("residuals not finite at the starting point".into()));
    }
    let mut cost = half_sum_sq(&r);
    let initial_cost = cost;
    let mut history = vec![cost];
    let exact = |c: T| c <= initial_cost * T::lit(1e-20) || c == T::zero();

    let mut mu = opts.initial_damping;
    let mut nu = T::lit(2.0);
    let mut iterations = 0;

    while iterations < opts.max_iterations && !exact(cost) {
        let cols = jacobian(&residual_fn, &p, &bounds, m)?;
        let (a, g) = normal_equations(&cols, &r);
        if a.iter().enumerate().any(|(i, row)| row[i] == T::zero()) {
            return Err(Error::SingularNormalEquations);
        }
        if gradient_cosine(&a, &g, &r) < opts.gradient_tolerance {
            break;
        }

        let mut accepted = None;
        for _ in 0..60 {
            let mut damped = a.clone();
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] = row[i] * (T::one() + mu);
            }
            let Some(l) = cholesky(&damped) else {
                mu = mu * nu;
                nu = nu * T::lit(2.0);
                continue;
            };
            let neg_g: Vec<T> = g.iter().map(|&x| -x).collect();
            let delta = cholesky_solve(&l, &neg_g);
            let mut trial: Vec<T> = p.iter().zip(&delta).map(|(&x, &d)| x + d).collect();
            bounds.clamp(&mut trial);
            let step: Vec<T> = trial.iter().zip(&p).map(|(&x, &y)| x - y).collect();
            if step.iter().all(|&s| s == T::zero()) {
                break;
            }
            let rt = residual_fn(&trial);
            let ct = if rt.len() == m && all_finite(&rt) {
                half_sum_sq(&rt)
            } else {
                T::infinity()
            };
            // predicted decrease of the local quadratic model
            let a_step: Vec<T> = a
                .iter()
                .map(|row| row.iter().zip(&step).map(|(&x, &y)| x * y).sum::<T>())
                .collect();
            let gs = g.iter().zip(&step).map(|(&x, &y)| x * y).sum::<T>();
            let sas = step.iter().zip(&a_step).map(|(&x, &y)| x * y).sum::<T>();
            let predicted = -(gs + sas / T::lit(2.0));
            if ct < cost {
                let rho = if predicted > T::zero() {
                    (cost - ct) / predicted
                } else {
                    T::one()
                };
                let t = T::lit(2.0) * rho - T::one();
                mu = mu * T::lit(1.0 / 3.0).max(T::one() - t * t * t);
                nu = T::lit(2.0);
                accepted = Some((trial, rt, ct));
                break;
            }
            mu = mu * nu;
            nu = nu * T::lit(2.0);
        }

        // damping exhausted without a downhill step
        let Some((trial, rt, ct)) = accepted else {
            break;
        };
        let drop = (cost - ct) / cost;
        p = trial;
        r = rt;
        cost = ct;
        history.push(cost);
        iterations += 1;
        if drop < opts.cost_tolerance {
            break;
        }
    }

    let cols = jacobian(&residual_fn, &p, &bounds, m)?;
    let (a, g) = normal_equations(&cols, &r);
    if a.iter().enumerate().any(|(i, row)| row[i] == T::zero()) {
        return Err(Error::SingularNormalEquations);
    }
    let converged = exact(cost) || gradient_cosine(&a, &g, &r) < opts.gradient_tolerance;

    let dof = T::from_count((m - n).max(1));
    let reduced_chi2 = T::lit(2.0) * cost / dof;
    let l = cholesky(&a).ok_or(Error::SingularNormalEquations)?;
    let sigmas = (0..n)
        .map(|i| {
            let mut e = vec![T::zero(); n];
            e[i] = T::one();
            let col = cholesky_solve(&l, &e);
            (col[i].max(T::zero()) * reduced_chi2).sqrt()
        })
        .collect();

    Ok(Minimum {
        params: p,
        sigmas,
        cost,
        reduced_chi2,
        iterations,
        converged,
        cost_history: history,
    })
}

/// [`least_squares`] with named parameters.
pub fn minimize<T, F>(
    residual_fn: F,
    names: &[&str],
    initial: &[T],
    bounds: Option<&Bounds<T>>,
) -> Result<FitReport<T>>
where
    T: Real,
    F: Fn(&[T]) -> Vec<T>,
{
    if names.len() != initial.len() {
        return Err(Error::LengthMismatch {
            what: "parameter names and values",
            left: names.len(),
            right: initial.len(),
        });
    }
    least_squares(residual_fn, initial, bounds, &MinimizeOptions::default())
        .map(|m| m.into_report(names))
}
