//! Selection of the phase constant `D`: SES minimisation, equal pulse
//! maxima, and landscape scans.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::search::{bisect, golden_section_min};
use crate::pulses::{peak_amplitudes, ProtocolParams};
use crate::scalar::Real;
use crate::ses::{ses_m_domain, SesVariant};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TuneResult<T> {
    pub d_star: T,
    pub objective_value: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Settings shared by the SES-based tuners.
#[derive(Clone, Copy, Debug)]
pub struct SesTuneOptions<T> {
    /// Absolute tolerance on `q_s`.
    pub tol: T,
    /// Seeding grid size; raised to [`MIN_SEED_POINTS`] if smaller.
    pub grid_points: usize,
    pub variant: SesVariant,
    pub beta_start: T,
    pub beta_end: T,
}

pub const MIN_SEED_POINTS: usize = 201;

impl<T: Real> Default for SesTuneOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10),
            grid_points: 401,
            variant: SesVariant::Compact,
            beta_start: T::zero(),
            beta_end: T::FRAC_PI_2(),
        }
    }
}

fn check_range<T: Real>(lo: T, hi: T) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && lo < hi {
        Ok(())
    } else {
        Err(Error::Argument(format!("empty or invalid D range [{}, {}]", lo.as_f64(), hi.as_f64())))
    }
}

fn linspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * T::from_count(i) / T::from_count(n - 1) }).collect()
}

/// Uniform `(D, q_s)` scan over `[lo, hi]` with `n` points.
pub fn scan_qs<T: Real>(b: T, lo: T, hi: T, n: usize, opts: &SesTuneOptions<T>) -> Result<Vec<(T, T)>> {
    if n < 2 {
        return Err(Error::Argument(format!("scan needs at least 2 points, got {n}")));
    }
    check_range(lo, hi)?;
    linspace(lo, hi, n)
        .into_par_iter()
        .map(|d| ses_m_domain(b, d, opts.beta_start, opts.beta_end, opts.tol, opts.variant).map(|r| (d, r.q_s)))
        .collect()
}

/// Minimises `q_s(D)` over `[lo, hi]`: grid seeding, then golden-section
/// refinement around the best grid point.
pub fn find_min_ses_d<T: Real>(b: T, lo: T, hi: T, opts: &SesTuneOptions<T>) -> Result<TuneResult<T>> {
    if !(opts.tol > T::zero()) {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    let n = opts.grid_points.max(MIN_SEED_POINTS);
    let grid = scan_qs(b, lo, hi, n, opts)?;
    let best = best_grid_index(&grid, opts.tol);
    let a = grid[best.saturating_sub(1)].0;
    let c = grid[(best + 1).min(n - 1)].0;
    let q = |d: T| {
        ses_m_domain(b, d, opts.beta_start, opts.beta_end, opts.tol, opts.variant)
            .map(|r| r.q_s)
            .unwrap_or(T::infinity())
    };
    let x_tol = (hi - lo) * T::lit(1e-10);
    let max_evals = 200;
    let (x, fx, evals) = golden_section_min(q, a, c, x_tol, max_evals);
    let (d_star, objective_value) = if fx <= grid[best].1 { (x, fx) } else { grid[best] };
    Ok(TuneResult { d_star, objective_value, iterations: evals, converged: evals < max_evals })
}

/// Index of the grid minimum; values within `tol` of it count as ties and
/// go to the smallest `|D|`.
fn best_grid_index<T: Real>(grid: &[(T, T)], tol: T) -> usize {
    let min = grid.iter().map(|g| g.1).fold(T::infinity(), T::min);
    grid.iter()
        .enumerate()
        .filter(|(_, g)| g.1 <= min + tol)
        .min_by(|x, y| x.1 .0.abs().partial_cmp(&y.1 .0.abs()).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Grid used to isolate sign changes of the peak gap before bisection.
pub const EQUAL_MAXIMA_SCAN_POINTS: usize = 241;

/// Root of `max|Ω_p| - max|Ω_s|` in `D` by bisection; `rel_tol` is relative
/// to the larger magnitude of the range ends.
///
/// The gap oscillates in `D` and has several roots, some only a few
/// hundredths apart where the location of a peak jumps between lobes. The
/// mirror-symmetric value `D = (β₁ - β₀)/(2(1 - cos B))` (which makes `F = -D`)
/// is tried first; otherwise the range is scanned and the sign change nearest
/// `D = 0` is bisected.
pub fn find_equal_maxima_d<T: Real>(
    b: T,
    duration: T,
    lo: T,
    hi: T,
    rel_tol: T,
    beta_start: T,
    beta_end: T,
) -> Result<TuneResult<T>> {
    check_range(lo, hi)?;
    if !(rel_tol > T::zero()) {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    let base = ProtocolParams::with_endpoints(b, lo, duration, beta_start, beta_end)?;
    let gap = |d: T| -> Result<T> {
        let (p, s) = peak_amplitudes(&base.with_d(d)?)?;
        Ok(p - s)
    };
    let mirror = (beta_end - beta_start) / (T::two() * (T::one() - b.cos()));
    if mirror >= lo && mirror <= hi {
        let (p, s) = peak_amplitudes(&base.with_d(mirror)?)?;
        if (p - s).abs() <= T::lit(1e-9) * p.max(s) {
            return Ok(TuneResult { d_star: mirror, objective_value: (p - s).abs(), iterations: 1, converged: true });
        }
    }
    let grid = linspace(lo, hi, EQUAL_MAXIMA_SCAN_POINTS);
    let values = grid.par_iter().map(|&d| gap(d)).collect::<Result<Vec<_>>>()?;
    let bracket = (0..grid.len() - 1)
        .filter(|&i| values[i] == T::zero() || (values[i] < T::zero()) != (values[i + 1] < T::zero()))
        .min_by(|&i, &j| {
            let mid = |k: usize| (grid[k] + grid[k + 1]).abs();
            mid(i).partial_cmp(&mid(j)).unwrap_or(std::cmp::Ordering::Equal)
        })
        .ok_or_else(|| {
            Error::Bracketing(format!(
                "peak gap keeps one sign on [{}, {}] (ends {:e}, {:e})",
                lo.as_f64(),
                hi.as_f64(),
                values[0].as_f64(),
                values[values.len() - 1].as_f64()
            ))
        })?;
    let x_tol = rel_tol * lo.abs().max(hi.abs()).max(T::one());
    let root = bisect(gap, grid[bracket], grid[bracket + 1], x_tol, 200)?;
    Ok(TuneResult {
        d_star: root.x,
        objective_value: root.residual.abs(),
        iterations: root.iterations,
        converged: root.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn scan_landscape_for_b_pi_6() {
        let opts = SesTuneOptions::default();
        let scan = scan_qs(PI / 6.0, -40.0, 40.0, 801, &opts).unwrap();
        assert_eq!(scan.len(), 801);
        assert_eq!(scan[0].0, -40.0);
        assert_eq!(scan[800].0, 40.0);
        let max = scan.iter().map(|x| x.1).fold(0.0, f64::max);
        assert!((max - 0.0107).abs() < 5e-4, "{max}");
        assert!(scan.iter().all(|x| x.1 >= 0.0 && x.1 < 0.015));
        assert!(scan_qs(PI / 6.0, -1.0, 1.0, 1, &opts).is_err());
    }

    #[test]
    fn minimiser_never_worse_than_grid() {
        let opts = SesTuneOptions::default();
        for &(b, lo, hi) in &[(PI / 6.0, -40.0, 0.0), (PI / 8.0, -60.0, 60.0), (PI / 6.0, 0.0, 40.0)] {
            let r = find_min_ses_d(b, lo, hi, &opts).unwrap();
            let grid = scan_qs(b, lo, hi, 401, &opts).unwrap();
            let grid_min = grid.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
            assert!(r.objective_value <= grid_min);
            assert!(r.d_star >= lo && r.d_star <= hi);
            assert!(r.converged);
        }
    }

    #[test]
    fn minimiser_is_deterministic() {
        let opts = SesTuneOptions::default();
        let a = find_min_ses_d(PI / 8.0, -60.0, 60.0, &opts).unwrap();
        let b = find_min_ses_d(PI / 8.0, -60.0, 60.0, &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.objective_value < 0.002);
    }

    #[test]
    fn minimiser_finds_interior_minimum() {
        // the propagated landscape at B = pi/6 has an interior zero-approaching dip
        let opts = SesTuneOptions { variant: SesVariant::Propagated, ..SesTuneOptions::default() };
        let r = find_min_ses_d(PI / 6.0, -40.0, 40.0, &opts).unwrap();
        let left = ses_m_domain(PI / 6.0, r.d_star - 1e-3, 0.0, FRAC_PI_2, 1e-10, SesVariant::Propagated).unwrap();
        let right = ses_m_domain(PI / 6.0, r.d_star + 1e-3, 0.0, FRAC_PI_2, 1e-10, SesVariant::Propagated).unwrap();
        assert!(r.objective_value <= left.q_s && r.objective_value <= right.q_s);
    }

    #[test]
    fn ties_prefer_small_magnitude() {
        let grid = [(-3.0, 0.5), (-1.0, 0.1), (0.5, 0.1), (2.0, 0.3)];
        assert_eq!(best_grid_index(&grid, 1e-12), 2);
    }

    #[test]
    fn empty_range_rejected() {
        let opts = SesTuneOptions::default();
        assert!(matches!(find_min_ses_d(PI / 6.0, 1.0, 1.0, &opts), Err(Error::Argument(_))));
        assert!(matches!(find_min_ses_d(PI / 6.0, 2.0, 1.0, &opts), Err(Error::Argument(_))));
    }

    #[test]
    fn equal_maxima_matches_symmetric_value() {
        for &b in &[PI / 16.0, PI / 8.0, PI / 6.0, PI / 4.0, PI / 3.0] {
            let r = find_equal_maxima_d(b, 0.1, 0.5, 60.0, 1e-6, 0.0, FRAC_PI_2).unwrap();
            let exact = ProtocolParams::symmetric_d(b);
            assert!((r.d_star - exact).abs() < 1e-6 * 60.0 * 2.0, "B = {b}: {} vs {exact}", r.d_star);
            assert!(r.converged);
        }
        let r = find_equal_maxima_d(PI / 6.0, 0.1, 0.5, 60.0, 1e-6, 0.0, FRAC_PI_2).unwrap();
        assert!((r.d_star - 5.8624).abs() < 1e-3 && (r.d_star - 5.85).abs() < 0.005 * 5.85);
    }

    #[test]
    fn equal_maxima_independent_of_duration() {
        let a = find_equal_maxima_d(PI / 6.0, 0.1, 0.5, 60.0, 1e-8, 0.0, FRAC_PI_2).unwrap();
        let b = find_equal_maxima_d(PI / 6.0, 0.37, 0.5, 60.0, 1e-8, 0.0, FRAC_PI_2).unwrap();
        assert!((a.d_star - b.d_star).abs() < 1e-6);
    }

    #[test]
    fn equal_maxima_without_mirror_seed() {
        // endpoints with no mirror symmetry fall back to scan and bisection
        let r = find_equal_maxima_d(PI / 6.0, 0.1, 0.5, 30.0, 1e-9, 0.3, 1.2).unwrap();
        let p = ProtocolParams::with_endpoints(PI / 6.0, r.d_star, 0.1, 0.3, 1.2).unwrap();
        let (a, b) = peak_amplitudes(&p).unwrap();
        assert!((a - b).abs() < 1e-4 * a, "{a} {b}");
        assert!(r.iterations > 1);
    }

    #[test]
    fn equal_maxima_requires_bracket() {
        let r = find_equal_maxima_d(PI / 6.0, 0.1, 10.0, 20.0, 1e-6, 0.0, FRAC_PI_2);
        assert!(matches!(r, Err(Error::Bracketing(_))));
    }
}
