//! One-dimensional minimisation and root bracketing.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Golden-section search for a minimum of `f` on `[a, b]`.
///
/// Stops once the bracket is narrower than `x_tol`. Returns `(x_min, f_min,
/// evaluations)`.
pub fn golden_section_min<T, F>(f: F, mut a: T, mut b: T, x_tol: T, max_evals: usize) -> (T, T, usize)
where
    T: Real,
    F: Fn(T) -> T,
{
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;

    while evals < max_evals && (b - a).abs() > x_tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
        evals += 1;
    }

    if f1 <= f2 {
        (x1, f1, evals)
    } else {
        (x2, f2, evals)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Root<T> {
    pub x: T,
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Bisection for a sign change of `g` on `[lo, hi]`.
pub fn bisect<T, G>(g: G, mut lo: T, mut hi: T, x_tol: T, max_iter: usize) -> Result<Root<T>>
where
    T: Real,
    G: Fn(T) -> Result<T>,
{
    let mut g_lo = g(lo)?;
    let g_hi = g(hi)?;
    if g_lo == T::zero() {
        return Ok(Root { x: lo, residual: g_lo, iterations: 0, converged: true });
    }
    if g_hi == T::zero() {
        return Ok(Root { x: hi, residual: g_hi, iterations: 0, converged: true });
    }
    if (g_lo > T::zero()) == (g_hi > T::zero()) {
        return Err(Error::Bracketing(format!(
            "no sign change on [{}, {}] (g = {:e}, {:e})",
            lo.as_f64(),
            hi.as_f64(),
            g_lo.as_f64(),
            g_hi.as_f64()
        )));
    }
    let mut iterations = 0;
    let mut mid = T::half() * (lo + hi);
    let mut g_mid = g(mid)?;
    while iterations < max_iter && (hi - lo).abs() > x_tol && g_mid != T::zero() {
        if (g_mid > T::zero()) == (g_lo > T::zero()) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
        mid = T::half() * (lo + hi);
        g_mid = g(mid)?;
        iterations += 1;
    }
    Ok(Root { x: mid, residual: g_mid, iterations, converged: (hi - lo).abs() <= x_tol || g_mid == T::zero() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, fx, _) = golden_section_min(|x: f64| (x - 1.3).powi(2) + 0.5, -4.0, 4.0, 1e-10, 500);
        assert!((x - 1.3).abs() < 1e-8);
        assert!((fx - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bisect_finds_cube_root() {
        let r = bisect(|x: f64| Ok(x * x * x - 2.0), 0.0, 2.0, 1e-13, 200).unwrap();
        assert!(r.converged);
        assert!((r.x - 2f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn bisect_reports_missing_bracket() {
        let err = bisect(|x: f64| Ok(x * x + 1.0), -1.0, 1.0, 1e-10, 100).unwrap_err();
        assert!(matches!(err, Error::Bracketing(_)));
    }
}
