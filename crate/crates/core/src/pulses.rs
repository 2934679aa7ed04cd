//! Pulse synthesis: the inverse-engineered shortcut, the polynomial
//! comparison protocol, the adiabatic reference, and sampled schedules.

use std::path::Path;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::invariant::InvariantAngles;
use crate::io::{read_numeric_csv, CsvSink};
use crate::numeric::linsolve::solve;
use crate::numeric::search::{bisect, golden_section_min};
use crate::scalar::Real;

/// Converts an angular frequency in rad/µs to ×2π MHz.
pub fn to_two_pi_mhz<T: Real>(omega: T) -> T {
    omega / (T::two() * T::PI())
}

/// Converts ×2π MHz to rad/µs.
pub fn from_two_pi_mhz<T: Real>(omega: T) -> T {
    omega * T::two() * T::PI()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceKind {
    /// Closed-form waveform evaluated exactly.
    Analytic,
    /// Cubic interpolation of sampled data.
    Interpolated,
}

/// A pair of resonant Rabi waveforms `t -> (Ω_p, Ω_s)` on `[0, duration]`.
pub trait PulseSource<T: Real> {
    fn duration(&self) -> T;
    fn rabi_at(&self, t: T) -> Result<(T, T)>;
    fn kind(&self) -> SourceKind {
        SourceKind::Analytic
    }
}

/// A pulse source derived from invariant angles.
pub trait AngleSource<T: Real>: PulseSource<T> {
    fn angles_at(&self, t: T) -> Result<InvariantAngles<T>>;
}

impl<T: Real, S: PulseSource<T> + ?Sized> PulseSource<T> for &S {
    fn duration(&self) -> T {
        (**self).duration()
    }
    fn rabi_at(&self, t: T) -> Result<(T, T)> {
        (**self).rabi_at(t)
    }
    fn kind(&self) -> SourceKind {
        (**self).kind()
    }
}

impl<T: Real, S: PulseSource<T> + ?Sized> PulseSource<T> for Box<S> {
    fn duration(&self) -> T {
        (**self).duration()
    }
    fn rabi_at(&self, t: T) -> Result<(T, T)> {
        (**self).rabi_at(t)
    }
    fn kind(&self) -> SourceKind {
        (**self).kind()
    }
}

fn check_time<T: Real>(t: T, duration: T) -> Result<()> {
    if t >= T::zero() && t <= duration {
        Ok(())
    } else {
        Err(domain("t", t.as_f64(), format!("[0, {}]", duration.as_f64())))
    }
}

/// Rabi frequencies from invariant angles by direct evaluation, with the
/// `β̇ cotθ` term taken literally. Diverges as θ -> 0 unless β̇ vanishes faster.
pub fn rabi_from_angles<T: Real>(a: &InvariantAngles<T>) -> (T, T) {
    let (sb, cb) = a.beta.sin_cos();
    let k = a.beta_dot / a.theta.tan();
    (T::two() * (a.theta_dot * cb + k * sb), T::two() * (k * cb - a.theta_dot * sb))
}

/// Which half of the protocol a time (or `m` value) belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Segment {
    /// `0 <= t <= T/2`, θ rising.
    First,
    /// `T/2 < t <= T`, θ falling.
    Second,
}

/// `F = D - (β₁ - β₀)/(1 - cos B)`.
pub fn slope_f<T: Real>(b: T, d: T, beta_start: T, beta_end: T) -> Result<T> {
    let gap = T::one() - b.cos();
    if gap == T::zero() {
        return Err(Error::SingularParameter(format!("1 - cos B vanishes at B = {}", b.as_f64())));
    }
    Ok(d - (beta_end - beta_start) / gap)
}

/// Parameters of the shortcut protocol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolParams<T> {
    b: T,
    d: T,
    duration: T,
    beta_start: T,
    beta_end: T,
}

impl<T: Real> ProtocolParams<T> {
    /// Transfer `|1> -> |3>` (β from 0 to π/2).
    pub fn new(b: T, d: T, duration: T) -> Result<Self> {
        Self::with_endpoints(b, d, duration, T::zero(), T::FRAC_PI_2())
    }

    pub fn with_endpoints(b: T, d: T, duration: T, beta_start: T, beta_end: T) -> Result<Self> {
        if !(b > T::zero() && b < T::FRAC_PI_2()) {
            return Err(domain("B", b.as_f64(), "(0, pi/2)"));
        }
        if !(duration > T::zero() && duration.is_finite()) {
            return Err(domain("T", duration.as_f64(), "(0, inf)"));
        }
        if !d.is_finite() {
            return Err(domain("D", d.as_f64(), "finite"));
        }
        if !(beta_start.is_finite() && beta_end.is_finite()) {
            return Err(Error::Argument("beta endpoints must be finite".into()));
        }
        Ok(Self { b, d, duration, beta_start, beta_end })
    }

    pub fn with_d(&self, d: T) -> Result<Self> {
        Self::with_endpoints(self.b, d, self.duration, self.beta_start, self.beta_end)
    }

    pub fn with_duration(&self, duration: T) -> Result<Self> {
        Self::with_endpoints(self.b, self.d, duration, self.beta_start, self.beta_end)
    }

    pub fn b(&self) -> T {
        self.b
    }
    pub fn d(&self) -> T {
        self.d
    }
    pub fn duration(&self) -> T {
        self.duration
    }
    pub fn beta_start(&self) -> T {
        self.beta_start
    }
    pub fn beta_end(&self) -> T {
        self.beta_end
    }

    pub fn slope_f(&self) -> T {
        slope_f(self.b, self.d, self.beta_start, self.beta_end).expect("B validated positive")
    }

    /// `A = D(1 - cos B) + β₀`, the value of β at `t = T/2`.
    pub fn junction(&self) -> T {
        self.d * (T::one() - self.b.cos()) + self.beta_start
    }

    /// `R = arcsin(cos B)`.
    pub fn r_const(&self) -> T {
        self.b.cos().asin()
    }

    /// `D` making the two peak amplitudes equal for the `|1> -> |3>` transfer.
    pub fn symmetric_d(b: T) -> T {
        T::PI() / (T::lit(4.0) * (T::one() - b.cos()))
    }

    pub fn segment_of(&self, t: T) -> Segment {
        if t <= T::half() * self.duration {
            Segment::First
        } else {
            Segment::Second
        }
    }

    /// `θ = (B/2)(1 - cos 2πt/T)` and its derivative.
    pub fn theta_of_t(&self, t: T) -> Result<(T, T)> {
        check_time(t, self.duration)?;
        let w = T::two() * T::PI() / self.duration;
        let (s, c) = (w * t).sin_cos();
        Ok((T::half() * self.b * (T::one() - c), T::half() * self.b * w * s))
    }

    fn check_m(&self, m: T) -> Result<T> {
        let lo = -T::one();
        let hi = -self.b.cos();
        let slack = T::lit(8.0) * T::epsilon();
        if m < lo - slack || m > hi + slack || m.is_nan() {
            return Err(domain("m", m.as_f64(), format!("[-1, {}]", hi.as_f64())));
        }
        Ok(m.max(lo).min(hi))
    }

    /// Slope `b'(m)` of the linear ansatz on a segment.
    pub fn ansatz_slope(&self, segment: Segment) -> T {
        match segment {
            Segment::First => self.d,
            Segment::Second => self.slope_f(),
        }
    }

    /// `b₁(m) = Dm + D + β₀`, `b₂(m) = Fm + F + β₁`.
    pub fn ansatz_b(&self, m: T, segment: Segment) -> Result<T> {
        let m = self.check_m(m)?;
        Ok(match segment {
            Segment::First => self.d * (m + T::one()) + self.beta_start,
            Segment::Second => self.slope_f() * (m + T::one()) + self.beta_end,
        })
    }

    /// `r₁(m) = D arcsin m`, `r₂(m) = F arcsin m + FR - DR`.
    pub fn ansatz_r(&self, m: T, segment: Segment) -> Result<T> {
        if !(m >= -T::one() && m <= T::one()) {
            return Err(domain("m", m.as_f64(), "[-1, 1]"));
        }
        let u = m.asin();
        Ok(match segment {
            Segment::First => self.d * u,
            Segment::Second => {
                let f = self.slope_f();
                f * u + (f - self.d) * self.r_const()
            }
        })
    }

    pub fn angles_at(&self, t: T) -> Result<InvariantAngles<T>> {
        let (theta, theta_dot) = self.theta_of_t(t)?;
        let (st, ct) = theta.sin_cos();
        let m = -ct;
        let segment = self.segment_of(t);
        let slope = self.ansatz_slope(segment);
        Ok(InvariantAngles {
            theta,
            beta: self.ansatz_b(m, segment)?,
            gamma: self.ansatz_r(m, segment)?,
            theta_dot,
            beta_dot: slope * st * theta_dot,
            gamma_dot: slope * theta_dot,
        })
    }

    /// `Ω_p = 2θ̇(b' cosθ sinβ + cosβ)`, `Ω_s = 2θ̇(b' cosθ cosβ - sinβ)`.
    pub fn rabi_at(&self, t: T) -> Result<(T, T)> {
        let a = self.angles_at(t)?;
        let slope = self.ansatz_slope(self.segment_of(t));
        let ct = a.theta.cos();
        let (sb, cb) = a.beta.sin_cos();
        let k = T::two() * a.theta_dot;
        Ok((k * (slope * ct * sb + cb), k * (slope * ct * cb - sb)))
    }
}

impl<T: Real> PulseSource<T> for ProtocolParams<T> {
    fn duration(&self) -> T {
        self.duration
    }
    fn rabi_at(&self, t: T) -> Result<(T, T)> {
        ProtocolParams::rabi_at(self, t)
    }
}

impl<T: Real> AngleSource<T> for ProtocolParams<T> {
    fn angles_at(&self, t: T) -> Result<InvariantAngles<T>> {
        ProtocolParams::angles_at(self, t)
    }
}

/// The inverse-engineered shortcut protocol as a pulse source.
#[derive(Clone, Copy, Debug)]
pub struct OptimalProtocol<T> {
    params: ProtocolParams<T>,
}

impl<T: Real> OptimalProtocol<T> {
    pub fn new(params: ProtocolParams<T>) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &ProtocolParams<T> {
        &self.params
    }
}

impl<T: Real> PulseSource<T> for OptimalProtocol<T> {
    fn duration(&self) -> T {
        self.params.duration
    }
    fn rabi_at(&self, t: T) -> Result<(T, T)> {
        self.params.rabi_at(t)
    }
}

impl<T: Real> AngleSource<T> for OptimalProtocol<T> {
    fn angles_at(&self, t: T) -> Result<InvariantAngles<T>> {
        self.params.angles_at(t)
    }
}

/// Grid size of the coarse scan in [`peak_amplitudes`].
pub const PEAK_SCAN_POINTS: usize = 4096;

/// Global maxima of `|Ω_p|` and `|Ω_s|` over the source's duration.
pub fn peak_amplitudes<T: Real, S: PulseSource<T> + ?Sized>(source: &S) -> Result<(T, T)> {
    let duration = source.duration();
    let n = PEAK_SCAN_POINTS;
    let times: Vec<T> = (0..=n).map(|i| grid_time(duration, i, n)).collect();
    let values = times.iter().map(|&t| source.rabi_at(t)).collect::<Result<Vec<_>>>()?;
    let refine = |pick: fn(&(T, T)) -> T| -> T {
        let (best, peak) = values
            .iter()
            .enumerate()
            .map(|(i, v)| (i, pick(v).abs()))
            .fold((0, T::neg_infinity()), |acc, x| if x.1 > acc.1 { x } else { acc });
        let lo = times[best.saturating_sub(1)];
        let hi = times[(best + 1).min(n)];
        let objective = |t: T| source.rabi_at(t).map(|v| -pick(&v).abs()).unwrap_or(T::infinity());
        let (_, f, _) = golden_section_min(objective, lo, hi, duration * T::lit(1e-12), 200);
        peak.max(-f)
    };
    Ok((refine(|v| v.0), refine(|v| v.1)))
}

fn grid_time<T: Real>(duration: T, i: usize, n: usize) -> T {
    if i == n {
        duration
    } else {
        duration * T::from_count(i) / T::from_count(n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSample<T> {
    pub t: T,
    pub omega_p: T,
    pub omega_s: T,
}

/// Header of the schedule CSV.
pub const SCHEDULE_HEADER: [&str; 3] = ["t_us", "omega_p_rad_per_us", "omega_s_rad_per_us"];

/// Rabi frequencies sampled on an increasing time grid, in rad/µs.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSchedule<T> {
    pub samples: Vec<PulseSample<T>>,
    pub duration: T,
    pub units: &'static str,
}

impl<T: Real> PulseSchedule<T> {
    pub fn from_samples(samples: Vec<PulseSample<T>>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Format("a schedule needs at least two samples".into()));
        }
        if samples[0].t != T::zero() {
            return Err(Error::Format(format!("schedule must start at t = 0, not {}", samples[0].t.as_f64())));
        }
        if let Some(w) = samples.windows(2).find(|w| !(w[1].t > w[0].t)) {
            return Err(Error::Format(format!("sample times not increasing at t = {}", w[1].t.as_f64())));
        }
        let duration = samples[samples.len() - 1].t;
        Ok(Self { samples, duration, units: "rad/us" })
    }

    pub fn peak_abs(&self) -> (T, T) {
        self.samples.iter().fold((T::zero(), T::zero()), |(p, s), x| (p.max(x.omega_p.abs()), s.max(x.omega_s.abs())))
    }

    pub fn write_csv(&self, path: &Path, metadata: &[String]) -> Result<()> {
        let mut sink = CsvSink::create(path, metadata, &SCHEDULE_HEADER)?;
        for s in &self.samples {
            sink.row(&[s.t.as_f64(), s.omega_p.as_f64(), s.omega_s.as_f64()])?;
        }
        sink.finish()
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let rows = read_numeric_csv(path, &SCHEDULE_HEADER)?;
        let samples = rows
            .into_iter()
            .map(|r| PulseSample { t: T::lit(r[0]), omega_p: T::lit(r[1]), omega_s: T::lit(r[2]) })
            .collect();
        Self::from_samples(samples)
    }
}

/// Samples `source` on `n` uniform times over `[0, T]`, endpoints included.
pub fn sample_schedule<T, S>(source: &S, n: usize) -> Result<PulseSchedule<T>>
where
    T: Real,
    S: PulseSource<T> + Sync + ?Sized,
{
    if n < 2 {
        return Err(Error::Argument(format!("sample count must be at least 2, got {n}")));
    }
    let duration = source.duration();
    let samples = (0..n)
        .into_par_iter()
        .map(|i| {
            let t = grid_time(duration, i, n - 1);
            source.rabi_at(t).map(|(omega_p, omega_s)| PulseSample { t, omega_p, omega_s })
        })
        .collect::<Result<Vec<_>>>()?;
    PulseSchedule::from_samples(samples)
}

/// Piecewise-cubic Hermite interpolation of a schedule, with Catmull–Rom
/// tangents adapted to a non-uniform grid.
#[derive(Clone, Debug)]
pub struct InterpolatedSchedule<T> {
    times: Vec<T>,
    values: Vec<[T; 2]>,
    tangents: Vec<[T; 2]>,
}

impl<T: Real> InterpolatedSchedule<T> {
    pub fn new(schedule: &PulseSchedule<T>) -> Self {
        let times: Vec<T> = schedule.samples.iter().map(|s| s.t).collect();
        let values: Vec<[T; 2]> = schedule.samples.iter().map(|s| [s.omega_p, s.omega_s]).collect();
        let n = times.len();
        let tangents = (0..n)
            .map(|i| {
                let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
                let dt = times[b] - times[a];
                [0, 1].map(|k| (values[b][k] - values[a][k]) / dt)
            })
            .collect();
        Self { times, values, tangents }
    }
}

impl<T: Real> PulseSource<T> for InterpolatedSchedule<T> {
    fn duration(&self) -> T {
        self.times[self.times.len() - 1]
    }

    fn rabi_at(&self, t: T) -> Result<(T, T)> {
        check_time(t, self.duration())?;
        let i = self.times.partition_point(|&x| x <= t).clamp(1, self.times.len() - 1) - 1;
        let h = self.times[i + 1] - self.times[i];
        let s = (t - self.times[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let two = T::two();
        let three = T::lit(3.0);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        let v = [0, 1].map(|k| {
            h00 * self.values[i][k]
                + h10 * h * self.tangents[i][k]
                + h01 * self.values[i + 1][k]
                + h11 * h * self.tangents[i + 1][k]
        });
        Ok((v[0], v[1]))
    }

    fn kind(&self) -> SourceKind {
        SourceKind::Interpolated
    }
}

/// Polynomial comparison protocol: quartic θ(t) and cubic β(t) matched to
/// boundary conditions, Rabi frequencies by direct evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OriginalProtocolParams<T> {
    pub epsilon: T,
    pub theta_mid: T,
    pub duration: T,
    /// θ(t) = Σ a_j t^j.
    pub theta_coeffs: [T; 5],
    /// β(t) = Σ b_j t^j.
    pub beta_coeffs: [T; 4],
}

impl<T: Real> OriginalProtocolParams<T> {
    /// Solves the polynomial coefficients from
    /// `θ(0) = θ(T) = ε`, `θ̇(0) = θ̇(T) = 0`, `θ(T/2) = theta_mid`,
    /// `β(0) = 0`, `β(T) = π/2`, `β̇(0) = β̇(T) = 0`.
    pub fn solve(epsilon: T, theta_mid: T, duration: T) -> Result<Self> {
        if !(epsilon > T::zero()) {
            return Err(Error::SingularParameter(format!(
                "boundary angle must be positive for the cot-theta terms, got {}",
                epsilon.as_f64()
            )));
        }
        if !(theta_mid > T::zero() && theta_mid < T::PI()) {
            return Err(domain("theta_mid", theta_mid.as_f64(), "(0, pi)"));
        }
        if !(duration > T::zero() && duration.is_finite()) {
            return Err(domain("T", duration.as_f64(), "(0, inf)"));
        }
        // Solve on s = t/T, then rescale.
        let (z, o, h) = (T::zero(), T::one(), T::half());
        let row = |s: T| [o, s, s * s, s * s * s, s * s * s * s];
        let drow = |s: T| [z, o, T::two() * s, T::lit(3.0) * s * s, T::lit(4.0) * s * s * s];
        let a_s = solve([row(z), row(o), drow(z), drow(o), row(h)], [epsilon, epsilon, z, z, theta_mid])?;
        let row3 = |s: T| [o, s, s * s, s * s * s];
        let drow3 = |s: T| [z, o, T::two() * s, T::lit(3.0) * s * s];
        let b_s = solve([row3(z), row3(o), drow3(z), drow3(o)], [z, T::FRAC_PI_2(), z, z])?;
        let mut scale = T::one();
        let mut theta_coeffs = [T::zero(); 5];
        let mut beta_coeffs = [T::zero(); 4];
        for j in 0..5 {
            theta_coeffs[j] = a_s[j] / scale;
            if j < 4 {
                beta_coeffs[j] = b_s[j] / scale;
            }
            scale *= duration;
        }
        let p = Self { epsilon, theta_mid, duration, theta_coeffs, beta_coeffs };
        p.check_boundaries()?;
        Ok(p)
    }

    fn check_boundaries(&self) -> Result<()> {
        let (th0, thd0, b0, bd0) = self.eval(T::zero());
        let (th1, thd1, b1, bd1) = self.eval(self.duration);
        let (thm, ..) = self.eval(T::half() * self.duration);
        let tol = T::lit(1e-10) * T::one().max(self.theta_mid.abs());
        let rate = T::one() / self.duration;
        let ok = (th0 - self.epsilon).abs() <= tol
            && (th1 - self.epsilon).abs() <= tol
            && (thm - self.theta_mid).abs() <= tol
            && thd0.abs() <= tol * rate
            && thd1.abs() <= tol * rate
            && b0.abs() <= tol
            && (b1 - T::FRAC_PI_2()).abs() <= tol
            && bd0.abs() <= tol * rate
            && bd1.abs() <= tol * rate;
        if ok {
            Ok(())
        } else {
            Err(Error::SingularParameter("polynomial boundary solve lost accuracy".into()))
        }
    }

    /// `(θ, θ̇, β, β̇)` at `t`.
    pub fn eval(&self, t: T) -> (T, T, T, T) {
        let horner = |c: &[T]| c.iter().rev().fold(T::zero(), |acc, &x| acc * t + x);
        let deriv =
            |c: &[T]| c.iter().enumerate().skip(1).rev().fold(T::zero(), |acc, (j, &x)| acc * t + T::from_count(j) * x);
        (horner(&self.theta_coeffs), deriv(&self.theta_coeffs), horner(&self.beta_coeffs), deriv(&self.beta_coeffs))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OriginalProtocol<T> {
    params: OriginalProtocolParams<T>,
}

impl<T: Real> OriginalProtocol<T> {
    pub fn new(params: OriginalProtocolParams<T>) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &OriginalProtocolParams<T> {
        &self.params
    }

    /// Solves for the midpoint angle whose larger peak amplitude equals
    /// `target_peak` (rad/µs), searching `theta_mid` in `(epsilon, 1.5]`.
    pub fn tuned_to_peak(epsilon: T, duration: T, target_peak: T) -> Result<Self> {
        let peak_gap = |theta_mid: T| -> Result<T> {
            let p = OriginalProtocol::new(OriginalProtocolParams::solve(epsilon, theta_mid, duration)?);
            let (a, b) = peak_amplitudes(&p)?;
            Ok(a.max(b) - target_peak)
        };
        // Peak amplitude falls as theta_mid grows; scan for the first sign change.
        let lo = epsilon + T::lit(0.01);
        let hi = T::lit(1.5);
        let steps = 30;
        let mut prev = (lo, peak_gap(lo)?);
        let mut bracket = None;
        for i in 1..=steps {
            let x = lo + (hi - lo) * T::from_count(i) / T::from_count(steps);
            let g = peak_gap(x)?;
            if (prev.1 < T::zero()) != (g < T::zero()) {
                bracket = Some((prev.0, x));
                break;
            }
            prev = (x, g);
        }
        let (a, b) = bracket.ok_or_else(|| {
            Error::Bracketing(format!(
                "no midpoint angle in ({}, {}] reaches peak {}",
                lo.as_f64(),
                hi.as_f64(),
                target_peak.as_f64()
            ))
        })?;
        let root = bisect(peak_gap, a, b, T::lit(1e-12).max(T::epsilon() * T::lit(16.0)), 200)?;
        Ok(Self::new(OriginalProtocolParams::solve(epsilon, root.x, duration)?))
    }

    pub fn angles_at(&self, t: T) -> Result<InvariantAngles<T>> {
        check_time(t, self.params.duration)?;
        let (theta, theta_dot, beta, beta_dot) = self.params.eval(t);
        Ok(InvariantAngles { theta, beta, gamma: T::zero(), theta_dot, beta_dot, gamma_dot: beta_dot / theta.sin() })
    }
}

impl<T: Real> PulseSource<T> for OriginalProtocol<T> {
    fn duration(&self) -> T {
        self.params.duration
    }
    fn rabi_at(&self, t: T) -> Result<(T, T)> {
        Ok(rabi_from_angles(&self.angles_at(t)?))
    }
}

/// Time dependence of the mixing angle β in the adiabatic reference.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MixingSchedule {
    /// `β = (π/2)(3s² - 2s³)`, `s = t/T`: smooth switch-on and switch-off.
    #[default]
    Smoothstep,
    /// `β = (π/2)s`.
    Linear,
}

impl MixingSchedule {
    fn beta<T: Real>(self, s: T) -> T {
        match self {
            MixingSchedule::Smoothstep => T::FRAC_PI_2() * s * s * (T::lit(3.0) - T::two() * s),
            MixingSchedule::Linear => T::FRAC_PI_2() * s,
        }
    }
}

/// `Ω_p = Ω_m sin β(t)`, `Ω_s = Ω_m cos β(t)`.
#[derive(Clone, Copy, Debug)]
pub struct AdiabaticReference<T> {
    pub omega_m: T,
    pub duration: T,
    pub schedule: MixingSchedule,
}

impl<T: Real> AdiabaticReference<T> {
    pub fn new(omega_m: T, duration: T, schedule: MixingSchedule) -> Result<Self> {
        if !(omega_m > T::zero() && omega_m.is_finite()) {
            return Err(domain("omega_m", omega_m.as_f64(), "(0, inf)"));
        }
        if !(duration > T::zero() && duration.is_finite()) {
            return Err(domain("T", duration.as_f64(), "(0, inf)"));
        }
        Ok(Self { omega_m, duration, schedule })
    }
}

impl<T: Real> PulseSource<T> for AdiabaticReference<T> {
    fn duration(&self) -> T {
        self.duration
    }
    fn rabi_at(&self, t: T) -> Result<(T, T)> {
        check_time(t, self.duration)?;
        let (sb, cb) = self.schedule.beta(t / self.duration).sin_cos();
        Ok((self.omega_m * sb, self.omega_m * cb))
    }
}
