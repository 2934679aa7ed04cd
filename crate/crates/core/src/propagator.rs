//! Schrödinger evolution `i dψ/dt = (1 + λ)H(t)ψ` under any pulse source.

use std::cell::RefCell;
use std::path::Path;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::io::CsvSink;
use crate::numeric::dopri::{self, DopriOptions};
use crate::numeric::search::bisect;
use crate::pulses::{AdiabaticReference, MixingSchedule, PulseSource};
use crate::qstate::{StateVector3, C};
use crate::scalar::Real;
use crate::ses::{Perturbation, SesMethod, SesReport};

/// Smallest number of uniform output times in a trajectory.
pub const MIN_OUTPUT_POINTS: usize = 501;

#[derive(Clone, Copy, Debug)]
pub struct IntegratorConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Zero selects the first step automatically.
    pub initial_step: T,
    /// Zero leaves the step unbounded.
    pub max_step: T,
    /// Uniform output samples; raised to [`MIN_OUTPUT_POINTS`] if smaller.
    pub output_points: usize,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-10),
            abs_tol: T::lit(1e-12),
            initial_step: T::zero(),
            max_step: T::zero(),
            output_points: MIN_OUTPUT_POINTS,
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    pub fn validate(&self, duration: T) -> Result<()> {
        if !(self.rel_tol > T::zero() && self.abs_tol > T::zero()) {
            return Err(Error::Argument("integrator tolerances must be positive".into()));
        }
        if self.max_step < T::zero() || self.max_step > duration {
            return Err(domain("max_step", self.max_step.as_f64(), format!("[0, {}]", duration.as_f64())));
        }
        if self.initial_step < T::zero() {
            return Err(domain("initial_step", self.initial_step.as_f64(), "[0, inf)"));
        }
        Ok(())
    }

    fn dopri(&self) -> DopriOptions<T> {
        DopriOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            initial_step: self.initial_step,
            max_step: self.max_step,
            ..DopriOptions::default()
        }
    }
}

/// Header of the trajectory CSV.
pub const TRAJECTORY_HEADER: [&str; 10] = ["t_us", "p1", "p2", "p3", "re1", "im1", "re2", "im2", "re3", "im3"];

#[derive(Clone, Debug)]
pub struct StateTrajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<StateVector3<T>>,
    /// `populations[k][i]` is the population of level `k + 1` at `times[i]`.
    pub populations: [Vec<T>; 3],
}

impl<T: Real> StateTrajectory<T> {
    fn from_samples(mut samples: Vec<(T, StateVector3<T>)>) -> Self {
        samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        samples.dedup_by(|a, b| a.0 == b.0);
        let times = samples.iter().map(|s| s.0).collect();
        let states: Vec<_> = samples.into_iter().map(|s| s.1).collect();
        let populations = [0, 1, 2].map(|k| states.iter().map(|s| s[k].norm_sqr()).collect());
        Self { times, states, populations }
    }

    pub fn final_state(&self) -> &StateVector3<T> {
        &self.states[self.states.len() - 1]
    }

    pub fn max_norm_error(&self) -> T {
        self.states.iter().map(|s| (s.norm() - T::one()).abs()).fold(T::zero(), T::max)
    }

    /// Largest population of level `level` (1-based) and the time it occurs.
    pub fn peak_population(&self, level: usize) -> Result<(T, T)> {
        if !(1..=3).contains(&level) {
            return Err(domain("level", level as f64, "{1, 2, 3}"));
        }
        let p = &self.populations[level - 1];
        let (i, v) =
            p.iter().enumerate().fold((0, T::neg_infinity()), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        Ok((self.times[i], v))
    }

    pub fn write_csv(&self, path: &Path, metadata: &[String]) -> Result<()> {
        let mut sink = CsvSink::create(path, metadata, &TRAJECTORY_HEADER)?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let mut row = vec![t.as_f64()];
            row.extend(s.populations().iter().map(|p| p.as_f64()));
            for k in 0..3 {
                row.push(s[k].re.as_f64());
                row.push(s[k].im.as_f64());
            }
            sink.row(&row)?;
        }
        sink.finish()
    }
}

fn check_initial<T: Real>(psi0: &StateVector3<T>) -> Result<()> {
    let n = psi0.norm();
    if (n - T::one()).abs() > T::lit(1e-10).max(T::epsilon() * T::lit(16.0)) {
        return Err(domain("|psi0|", n.as_f64(), "1"));
    }
    Ok(())
}

/// Runs the integrator and hands every accepted step's dense segment to
/// `on_step`. Source evaluation errors abort with the first error seen.
fn run<T, S, F>(
    source: &S,
    psi0: &StateVector3<T>,
    lambda: T,
    cfg: &IntegratorConfig<T>,
    on_step: F,
) -> Result<StateVector3<T>>
where
    T: Real,
    S: PulseSource<T> + ?Sized,
    F: FnMut(&dopri::DenseSegment<T>),
{
    let duration = source.duration();
    cfg.validate(duration)?;
    check_initial(psi0)?;
    let factor = Perturbation::new(lambda).factor() * T::half();
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    // dψ/dt = -i (1+λ) H ψ,  H = ½ [[0, Ωp, 0], [Ωp, 0, Ωs], [0, Ωs, 0]]
    let rhs = |t: T, y: &StateVector3<T>| -> StateVector3<T> {
        let (wp, ws) = match source.rabi_at(t) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                (T::zero(), T::zero())
            }
        };
        let (a, b) = (factor * wp, factor * ws);
        let minus_i = Complex::new(T::zero(), -T::one());
        StateVector3::new(y[1] * a * minus_i, (y[0] * a + y[2] * b) * minus_i, y[1] * b * minus_i)
    };
    let (psi, _) = dopri::integrate(rhs, T::zero(), duration, *psi0, &cfg.dopri(), on_step)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(psi)
}

/// Evolves `psi0` over the source's duration, sampling at uniform output
/// times plus every accepted step boundary.
pub fn evolve<T, S>(
    source: &S,
    psi0: &StateVector3<T>,
    lambda: T,
    cfg: &IntegratorConfig<T>,
) -> Result<StateTrajectory<T>>
where
    T: Real,
    S: PulseSource<T> + ?Sized,
{
    let duration = source.duration();
    let n = cfg.output_points.max(MIN_OUTPUT_POINTS);
    let outputs: Vec<T> = (0..n)
        .map(|i| if i + 1 == n { duration } else { duration * T::from_count(i) / T::from_count(n - 1) })
        .collect();
    let mut samples = vec![(T::zero(), *psi0)];
    let mut next = 1;
    let final_state = run(source, psi0, lambda, cfg, |seg| {
        let t1 = seg.t1();
        while next < outputs.len() && outputs[next] <= t1 {
            samples.push((outputs[next], seg.eval(outputs[next])));
            next += 1;
        }
        samples.push((t1, seg.eval(t1)));
    })?;
    // the last step lands on `duration` up to rounding
    samples.retain(|s| s.0 < duration);
    samples.push((duration, final_state));
    Ok(StateTrajectory::from_samples(samples))
}

/// Terminal state only, without storing a trajectory.
pub fn final_state<T, S>(
    source: &S,
    psi0: &StateVector3<T>,
    lambda: T,
    cfg: &IntegratorConfig<T>,
) -> Result<StateVector3<T>>
where
    T: Real,
    S: PulseSource<T> + ?Sized,
{
    run(source, psi0, lambda, cfg, |_| {})
}

/// Final population of `|3>` starting from `|1>`.
pub fn final_p3<T, S>(source: &S, lambda: T, cfg: &IntegratorConfig<T>) -> Result<T>
where
    T: Real,
    S: PulseSource<T> + ?Sized,
{
    let psi0 = StateVector3::basis(1)?;
    Ok(final_state(source, &psi0, lambda, cfg)?[2].norm_sqr())
}

/// SES by the central second difference `-(P₃(δ) - 2P₃(0) + P₃(-δ))/(2δ²)`.
pub fn ses_finite_difference<T, S>(source: &S, delta: T, cfg: &IntegratorConfig<T>) -> Result<SesReport<T>>
where
    T: Real,
    S: PulseSource<T> + Sync + ?Sized,
{
    if !(delta > T::zero() && delta <= T::lit(0.05)) {
        return Err(domain("delta_lambda", delta.as_f64(), "(0, 0.05]"));
    }
    let p = [delta, T::zero(), -delta].into_par_iter().map(|l| final_p3(source, l, cfg)).collect::<Result<Vec<_>>>()?;
    let denom = T::two() * delta * delta;
    let q_s = -(p[0] - T::two() * p[1] + p[2]) / denom;
    // integrator noise only; the O(δ²) truncation term is not included
    let error = T::lit(4.0) * cfg.rel_tol.max(cfg.abs_tol) / denom;
    Ok(SesReport { q1: None, q2: None, q_s, method: SesMethod::FiniteDifference, error })
}

/// Settings for [`min_adiabatic_time`].
#[derive(Clone, Copy, Debug)]
pub struct AdiabaticScan<T> {
    pub t_lo: T,
    pub t_hi: T,
    /// Spacing of the coarse duration grid in µs.
    pub grid_step: T,
    pub schedule: MixingSchedule,
}

impl<T: Real> Default for AdiabaticScan<T> {
    fn default() -> Self {
        Self { t_lo: T::lit(0.05), t_hi: T::lit(1.5), grid_step: T::lit(0.005), schedule: MixingSchedule::default() }
    }
}

/// Shortest duration beyond which the adiabatic reference keeps `P₃(T) >=
/// target` for every longer duration in the scanned range.
///
/// `P₃(T)` of the reference oscillates as it approaches one, so it crosses any
/// high threshold several times. The range is sampled on a uniform grid, the
/// last failing grid point is located, and the crossing between it and its
/// successor is bisected. If no grid point fails, `t_lo` is returned.
pub fn min_adiabatic_time<T: Real>(
    omega_m: T,
    target: T,
    scan: &AdiabaticScan<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<T> {
    if !(target > T::zero() && target < T::one()) {
        return Err(domain("fidelity_target", target.as_f64(), "(0, 1)"));
    }
    if !(scan.t_lo > T::zero() && scan.t_lo < scan.t_hi && scan.grid_step > T::zero()) {
        return Err(Error::Argument(format!(
            "invalid duration range [{}, {}] with step {}",
            scan.t_lo.as_f64(),
            scan.t_hi.as_f64(),
            scan.grid_step.as_f64()
        )));
    }
    let margin = |t_f: T| -> Result<T> {
        let reference = AdiabaticReference::new(omega_m, t_f, scan.schedule)?;
        Ok(final_p3(&reference, T::zero(), cfg)? - target)
    };
    let n = ((scan.t_hi - scan.t_lo) / scan.grid_step).ceil().to_usize().unwrap_or(1).max(1) + 1;
    let grid: Vec<T> = (0..n)
        .map(|i| {
            if i + 1 == n {
                scan.t_hi
            } else {
                scan.t_lo + (scan.t_hi - scan.t_lo) * T::from_count(i) / T::from_count(n - 1)
            }
        })
        .collect();
    let values = grid.par_iter().map(|&t| margin(t)).collect::<Result<Vec<_>>>()?;
    if values[n - 1] < T::zero() {
        return Err(Error::Bracketing(format!(
            "target {} not reached at the top of the duration range ({} us)",
            target.as_f64(),
            scan.t_hi.as_f64()
        )));
    }
    let Some(last_fail) = values.iter().rposition(|&v| v < T::zero()) else {
        return Ok(scan.t_lo);
    };
    let root = bisect(margin, grid[last_fail], grid[last_fail + 1], T::lit(1e-7), 100)?;
    Ok(root.x)
}

/// Overlap `|<φ₀|ψ>|²` with a reference state, for tracking checks.
pub fn overlap<T: Real>(a: &StateVector3<T>, b: &StateVector3<T>) -> T {
    let ip: C<T> = a.inner(b);
    ip.norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::eigenvectors;
    use crate::pulses::{AngleSource, OptimalProtocol, ProtocolParams};
    use crate::ses::{ses_m_domain, SesVariant};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn canonical() -> OptimalProtocol<f64> {
        OptimalProtocol::new(ProtocolParams::new(PI / 6.0, 5.85, 0.1).unwrap())
    }

    struct Dark(f64);
    impl PulseSource<f64> for Dark {
        fn duration(&self) -> f64 {
            self.0
        }
        fn rabi_at(&self, _t: f64) -> Result<(f64, f64)> {
            Ok((0.0, 0.0))
        }
    }

    #[test]
    fn zero_pulses_leave_state_unchanged() {
        let psi0 = StateVector3::new(C::new(0.6, 0.0), C::new(0.0, 0.8), C::new(0.0, 0.0));
        let tr = evolve(&Dark(1.0), &psi0, 0.3, &IntegratorConfig::default()).unwrap();
        assert_eq!(*tr.final_state(), psi0);
        assert!(tr.times.len() >= MIN_OUTPUT_POINTS);
    }

    #[test]
    fn canonical_transfer_and_intermediate_peak() {
        let tr = evolve(&canonical(), &StateVector3::basis(1).unwrap(), 0.0, &IntegratorConfig::default()).unwrap();
        assert!(tr.populations[2][tr.times.len() - 1] >= 0.9999);
        let (t_peak, p2) = tr.peak_population(2).unwrap();
        assert!((p2 - 0.25).abs() < 0.005 && (t_peak - 0.05).abs() < 0.005, "{p2} at {t_peak}");
        assert!(tr.max_norm_error() < 1e-8);
        for i in 0..tr.times.len() {
            let s: f64 = (0..3).map(|k| tr.populations[k][i]).sum();
            assert!((s - 1.0).abs() < 1e-8);
        }
        assert_eq!(tr.times[0], 0.0);
        assert_eq!(tr.times[tr.times.len() - 1], 0.1);
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn evolution_follows_dark_mode() {
        let proto = canonical();
        let tr = evolve(&proto, &StateVector3::basis(1).unwrap(), 0.0, &IntegratorConfig::default()).unwrap();
        for (t, s) in tr.times.iter().zip(&tr.states) {
            let a = proto.angles_at(*t).unwrap();
            let phi0 = eigenvectors(a.theta, a.beta)[0];
            assert!(overlap(&phi0, s) > 0.9999, "t = {t}");
        }
    }

    #[test]
    fn tolerance_convergence() {
        let cfg = IntegratorConfig::default();
        let tight = IntegratorConfig { rel_tol: 1e-11, abs_tol: 1e-13, ..cfg };
        let a = final_p3(&canonical(), 0.05, &cfg).unwrap();
        let b = final_p3(&canonical(), 0.05, &tight).unwrap();
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn finite_difference_matches_propagated_quadrature() {
        let fd = ses_finite_difference(&canonical(), 0.01, &IntegratorConfig::default()).unwrap();
        let quad = ses_m_domain(PI / 6.0, 5.85, 0.0, FRAC_PI_2, 1e-10, SesVariant::Propagated).unwrap();
        assert_eq!(fd.method, SesMethod::FiniteDifference);
        // second-difference truncation is O(δ²) relative to the quartic term
        assert!((fd.q_s - quad.q_s).abs() < 1e-3 * quad.q_s, "{} vs {}", fd.q_s, quad.q_s);
        let d0 = OptimalProtocol::new(ProtocolParams::new(PI / 6.0, 0.0, 0.1).unwrap());
        let fd0 = ses_finite_difference(&d0, 0.01, &IntegratorConfig::default()).unwrap();
        let q0 = ses_m_domain(PI / 6.0, 0.0, 0.0, FRAC_PI_2, 1e-10, SesVariant::Propagated).unwrap();
        assert!((fd0.q_s - q0.q_s).abs() < 1e-3 * q0.q_s);
    }

    #[test]
    fn finite_difference_step_order() {
        let cfg = IntegratorConfig { rel_tol: 1e-12, abs_tol: 1e-14, ..IntegratorConfig::default() };
        let q1 = ses_finite_difference(&canonical(), 0.04, &cfg).unwrap().q_s;
        let q2 = ses_finite_difference(&canonical(), 0.02, &cfg).unwrap().q_s;
        let q3 = ses_finite_difference(&canonical(), 0.01, &cfg).unwrap().q_s;
        let ratio = (q1 - q2) / (q2 - q3);
        assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn finite_difference_rejects_large_step() {
        assert!(ses_finite_difference(&canonical(), 0.1, &IntegratorConfig::default()).is_err());
        assert!(ses_finite_difference(&canonical(), 0.0, &IntegratorConfig::default()).is_err());
    }

    #[test]
    fn rejects_unnormalised_start_and_bad_config() {
        let psi = StateVector3::new(C::new(1.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0));
        assert!(evolve(&canonical(), &psi, 0.0, &IntegratorConfig::default()).is_err());
        let bad = IntegratorConfig { rel_tol: 0.0, ..IntegratorConfig::default() };
        assert!(final_p3(&canonical(), 0.0, &bad).is_err());
        let bad = IntegratorConfig { max_step: 1.0, ..IntegratorConfig::default() };
        assert!(final_p3(&canonical(), 0.0, &bad).is_err());
    }

    #[test]
    fn step_underflow_reports_time() {
        let cfg = IntegratorConfig { rel_tol: 1e-16, abs_tol: 1e-300, ..IntegratorConfig::default() };
        match final_p3(&canonical(), 0.0, &cfg) {
            Err(Error::IntegrationFailure { t_reached, .. }) => assert!((0.0..0.1).contains(&t_reached)),
            other => panic!("expected integration failure, got {other:?}"),
        }
    }

    #[test]
    fn perturbation_parity() {
        let cfg = IntegratorConfig::default();
        let diffs: Vec<f64> = [0.02, 0.01]
            .iter()
            .map(|&l| final_p3(&canonical(), l, &cfg).unwrap() - final_p3(&canonical(), -l, &cfg).unwrap())
            .collect();
        // odd part is cubic: halving λ divides it by eight
        assert!((diffs[0] / diffs[1] - 8.0).abs() < 0.5, "{diffs:?}");
    }

    #[test]
    fn adiabatic_time_monotone_in_target() {
        let cfg = IntegratorConfig::default();
        let scan = AdiabaticScan { t_lo: 0.1, t_hi: 1.0, grid_step: 0.01, schedule: MixingSchedule::Smoothstep };
        let w = 2.0 * PI * 28.5;
        let a = min_adiabatic_time(w, 0.99, &scan, &cfg).unwrap();
        let b = min_adiabatic_time(w, 0.9999, &scan, &cfg).unwrap();
        assert!(a < b, "{a} {b}");
        let ref_b = AdiabaticReference::new(w, b, scan.schedule).unwrap();
        assert!((final_p3(&ref_b, 0.0, &cfg).unwrap() - 0.9999).abs() < 1e-6);
        assert!(min_adiabatic_time(w, 1.5, &scan, &cfg).is_err());
        let short = AdiabaticScan { t_hi: 0.12, ..scan };
        assert!(matches!(min_adiabatic_time(w, 0.9999, &short, &cfg), Err(Error::Bracketing(_))));
    }

    #[test]
    fn trajectory_csv_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        let tr = evolve(&canonical(), &StateVector3::basis(1).unwrap(), 0.0, &IntegratorConfig::default()).unwrap();
        tr.write_csv(&path, &["B = pi/6".into()]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# B = pi/6");
        assert_eq!(lines.next().unwrap(), TRAJECTORY_HEADER.join(","));
        assert_eq!(lines.count(), tr.times.len());
    }
}
