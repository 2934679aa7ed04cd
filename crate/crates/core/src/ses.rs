//! Systematic error sensitivity (SES) of the shortcut protocol to a
//! proportional amplitude error `H -> (1 + λ)H`.
//!
//! Two sign conventions exist for the `β̇ cosθ` term of the integrand:
//!
//! * [`SesVariant::Compact`] uses `e^{-iγ}(-iθ̇ - β̇ cosθ)`, i.e. the compact
//!   `Q₁ + Q₂` landscape with `i - D sin u cos u` in the arcsin variable.
//! * [`SesVariant::Propagated`] uses `e^{-iγ}(-iθ̇ + β̇ cosθ)`, which is what
//!   `⟨φ₀|H|ψ₁,₂⟩` evaluates to and what direct propagation reproduces
//!   (see [`crate::propagator::ses_finite_difference`]).

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{domain, Error, Result};
use crate::numeric::quadrature::{integrate, QuadOptions};
use crate::pulses::{slope_f, ProtocolParams};
use crate::qstate::C;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SesVariant {
    #[default]
    Compact,
    Propagated,
}

impl SesVariant {
    /// Sign `σ` multiplying the `β̇ cosθ` contribution in the compact layout.
    fn sigma<T: Real>(self) -> T {
        match self {
            SesVariant::Compact => T::one(),
            SesVariant::Propagated => -T::one(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SesVariant::Compact => "compact",
            SesVariant::Propagated => "propagated",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SesMethod {
    TimeDomain,
    MDomain,
    FiniteDifference,
}

impl SesMethod {
    pub fn label(self) -> &'static str {
        match self {
            SesMethod::TimeDomain => "time_domain",
            SesMethod::MDomain => "m_domain",
            SesMethod::FiniteDifference => "finite_difference",
        }
    }
}

/// SES value with its two segment contributions.
///
/// For the m-domain method `q1`, `q2` are the compact segment integrals; for
/// the time-domain method they are the integrals over `[0, T/2]` and
/// `[T/2, T]`, which equal `-q1`, `-q2` of the m-domain form. Finite
/// differences carry no segment split.
#[derive(Clone, Copy, Debug)]
pub struct SesReport<T: Real> {
    pub q1: Option<C<T>>,
    pub q2: Option<C<T>>,
    pub q_s: T,
    pub method: SesMethod,
    /// Estimated absolute error of `q_s`.
    pub error: T,
}

impl<T: Real> SesReport<T> {
    fn from_segments(q1: C<T>, q2: C<T>, seg_error: T, method: SesMethod) -> Self {
        let total = q1 + q2;
        let q_s = total.norm_sqr();
        let error = T::two() * total.norm() * seg_error + seg_error * seg_error;
        Self { q1: Some(q1), q2: Some(q2), q_s, method, error }
    }
}

/// Relative amplitude error `λ`; the perturbed Hamiltonian is `(1 + λ)H`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Perturbation<T> {
    pub lambda: T,
}

impl<T: Real> Perturbation<T> {
    pub fn new(lambda: T) -> Self {
        Self { lambda }
    }

    pub fn factor(&self) -> T {
        T::one() + self.lambda
    }
}

fn check_inputs<T: Real>(b: T, tol: T) -> Result<()> {
    if !(tol > T::zero()) {
        return Err(Error::Argument(format!("tolerance must be positive, got {}", tol.as_f64())));
    }
    if !(b > T::zero() && b < T::FRAC_PI_2()) {
        return Err(domain("B", b.as_f64(), "(0, pi/2)"));
    }
    Ok(())
}

/// Segment description in the arcsin variable `u`: integrate from `u_from`
/// to `u_to` with phase `slope·u + offset`.
#[derive(Clone, Copy)]
struct USegment<T> {
    u_from: T,
    u_to: T,
    slope: T,
    offset: T,
}

fn u_segments<T: Real>(b: T, d: T, beta_start: T, beta_end: T) -> Result<[USegment<T>; 2]> {
    let f = slope_f(b, d, beta_start, beta_end)?;
    let r = b.cos().asin();
    let bottom = -T::FRAC_PI_2();
    let top = -r;
    Ok([
        USegment { u_from: bottom, u_to: top, slope: d, offset: T::zero() },
        USegment { u_from: top, u_to: bottom, slope: f, offset: (f - d) * r },
    ])
}

fn segment_integrand<T: Real>(seg: USegment<T>, sigma: T) -> impl Fn(T) -> C<T> {
    move |u: T| {
        let phase = Complex::from_polar(T::one(), -(seg.slope * u + seg.offset));
        let (s, c) = u.sin_cos();
        phase * Complex::new(-sigma * seg.slope * s * c, T::one())
    }
}

/// SES from the compact segment integrals `Q₁ + Q₂` evaluated by adaptive
/// quadrature in `u = arcsin m`. Independent of the protocol duration.
pub fn ses_m_domain<T: Real>(
    b: T,
    d: T,
    beta_start: T,
    beta_end: T,
    tol: T,
    variant: SesVariant,
) -> Result<SesReport<T>> {
    check_inputs(b, tol)?;
    let sigma = variant.sigma::<T>();
    let opts = QuadOptions::abs(T::half() * tol);
    let segs = u_segments(b, d, beta_start, beta_end)?;
    let r1 = integrate(segment_integrand(segs[0], sigma), segs[0].u_from, segs[0].u_to, &opts)?;
    let r2 = integrate(segment_integrand(segs[1], sigma), segs[1].u_from, segs[1].u_to, &opts)?;
    Ok(SesReport::from_segments(r1.value, r2.value, r1.error + r2.error, SesMethod::MDomain))
}

/// `∫_a^b e^{-iku} du`, stable as `k -> 0`.
fn exp_integral<T: Real>(k: T, a: T, b: T) -> C<T> {
    let c = T::half() * (a + b);
    let h = T::half() * (b - a);
    let x = k * h;
    let sinc = if x.abs() < T::lit(1e-4) { T::one() - x * x / T::lit(6.0) } else { x.sin() / x };
    Complex::from_polar(T::one(), -k * c) * (T::two() * h * sinc)
}

/// Closed-form evaluation of [`ses_m_domain`] for the linear ansatz.
pub fn ses_m_domain_closed_form<T: Real>(
    b: T,
    d: T,
    beta_start: T,
    beta_end: T,
    variant: SesVariant,
) -> Result<SesReport<T>> {
    if !(b > T::zero() && b < T::FRAC_PI_2()) {
        return Err(domain("B", b.as_f64(), "(0, pi/2)"));
    }
    let sigma = variant.sigma::<T>();
    let segs = u_segments(b, d, beta_start, beta_end)?;
    let two = T::two();
    let [q1, q2] = segs.map(|s| {
        let (a, e, k) = (s.u_from, s.u_to, s.slope);
        // sin u cos u = (e^{2iu} - e^{-2iu}) / 4i
        let sin2 = (exp_integral(k - two, a, e) - exp_integral(k + two, a, e)) / Complex::new(T::zero(), two * two);
        let body = exp_integral(k, a, e) * Complex::new(T::zero(), T::one()) - sin2 * (sigma * k);
        body * Complex::from_polar(T::one(), -s.offset)
    });
    Ok(SesReport::from_segments(q1, q2, T::zero(), SesMethod::MDomain))
}

/// SES from the time-domain integral over the synthesized protocol, split
/// at `T/2` where the ansatz slope changes.
pub fn ses_time_domain<T: Real>(params: &ProtocolParams<T>, tol: T, variant: SesVariant) -> Result<SesReport<T>> {
    check_inputs(params.b(), tol)?;
    let sigma = variant.sigma::<T>();
    let integrand = |t: T| -> C<T> {
        match params.angles_at(t) {
            Ok(a) => {
                let phase = Complex::from_polar(T::one(), -a.gamma);
                phase * Complex::new(-sigma * a.beta_dot * a.theta.cos(), -a.theta_dot)
            }
            Err(_) => Complex::new(T::nan(), T::nan()),
        }
    };
    let opts = QuadOptions::abs(T::half() * tol);
    let mid = T::half() * params.duration();
    let r1 = integrate(integrand, T::zero(), mid, &opts)?;
    let r2 = integrate(integrand, mid, params.duration(), &opts)?;
    let (q1, q2) = (r1.value, r2.value);
    if !(q1 + q2).re.is_finite() {
        return Err(Error::Argument("time-domain SES integrand left the protocol domain".into()));
    }
    Ok(SesReport::from_segments(q1, q2, r1.error + r2.error, SesMethod::TimeDomain))
}

/// Quadratic prediction `1 - q_s λ²`, clamped to `[0, 1]`.
pub fn p3_second_order<T: Real>(q_s: T, lambda: T) -> T {
    (T::one() - q_s * lambda * lambda).max(T::zero()).min(T::one())
}

/// Segment contributions combined; zero for an empty report.
pub fn total_amplitude<T: Real>(report: &SesReport<T>) -> C<T> {
    report.q1.unwrap_or_else(C::zero) + report.q2.unwrap_or_else(C::zero)
}
