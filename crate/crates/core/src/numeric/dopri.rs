//! Dormand–Prince 5(4) embedded Runge–Kutta pair with PI step-size control
//! and the standard 4th-order continuous extension.
//!
//! Specialised to three-component complex state vectors.

use crate::error::{Error, Result};
use crate::qstate::{re, StateVector3};
use crate::scalar::Real;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - BETA * 0.75;

type V<T> = StateVector3<T>;

#[derive(Clone, Copy, Debug)]
pub struct DopriOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Zero selects an automatic first step.
    pub initial_step: T,
    /// Zero means unbounded (the whole interval).
    pub max_step: T,
    pub max_steps: usize,
}

impl<T: Real> Default for DopriOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-10),
            abs_tol: T::lit(1e-12),
            initial_step: T::zero(),
            max_step: T::zero(),
            max_steps: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct DopriStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Continuous extension over one accepted step `[t0, t0 + h]`.
#[derive(Clone, Copy, Debug)]
pub struct DenseSegment<T: Real> {
    pub t0: T,
    pub h: T,
    rc: [V<T>; 5],
}

impl<T: Real> DenseSegment<T> {
    pub fn t1(&self) -> T {
        self.t0 + self.h
    }

    pub fn eval(&self, t: T) -> V<T> {
        let s = (t - self.t0) / self.h;
        let s1 = T::one() - s;
        let [r1, r2, r3, r4, r5] = self.rc;
        let inner = r4 + r5.scale(re(s1));
        let inner = r3 + inner.scale(re(s));
        let inner = r2 + inner.scale(re(s1));
        r1 + inner.scale(re(s))
    }
}

#[inline]
fn axpy<T: Real>(y: &V<T>, terms: &[(f64, &V<T>)], h: T) -> V<T> {
    let mut out = *y;
    for (c, k) in terms {
        if *c != 0.0 {
            out = out + k.scale(re(h * T::lit(*c)));
        }
    }
    out
}

fn error_norm<T: Real>(err: &V<T>, y0: &V<T>, y1: &V<T>, opts: &DopriOptions<T>) -> T {
    let mut acc = T::zero();
    for i in 0..3 {
        let sc = opts.abs_tol + opts.rel_tol * y0[i].norm().max(y1[i].norm());
        let r = err[i].norm() / sc;
        acc += r * r;
    }
    (acc / T::lit(3.0)).sqrt()
}

fn initial_step<T: Real, F>(f: &F, t0: T, y0: &V<T>, f0: &V<T>, span: T, opts: &DopriOptions<T>) -> T
where
    F: Fn(T, &V<T>) -> V<T>,
{
    // Hairer–Wanner starting-step heuristic.
    let scale = |v: &V<T>| {
        let mut acc = T::zero();
        for i in 0..3 {
            let sc = opts.abs_tol + opts.rel_tol * y0[i].norm();
            let r = v[i].norm() / sc;
            acc += r * r;
        }
        (acc / T::lit(3.0)).sqrt()
    };
    let d0 = scale(y0);
    let d1 = scale(f0);
    let tiny = T::lit(1e-5);
    let mut h0 = if d0 < tiny || d1 < tiny { T::lit(1e-6) * span } else { T::lit(0.01) * d0 / d1 };
    h0 = h0.min(span);
    let y1 = axpy(y0, &[(1.0, f0)], h0);
    let f1 = f(t0 + h0, &y1);
    let d2 = scale(&(f1 - *f0)) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= T::lit(1e-15) {
        (T::lit(1e-6)).max(h0 * T::lit(1e-3))
    } else {
        (T::lit(0.01) / dmax).powf(T::lit(0.2))
    };
    (T::lit(100.0) * h0).min(h1).min(span)
}

/// Integrates `dy/dt = f(t, y)` from `t0` to `t1 > t0`, handing every accepted
/// step's continuous extension to `on_step`. Returns the terminal state.
pub fn integrate<T, F, S>(
    f: F,
    t0: T,
    t1: T,
    y0: V<T>,
    opts: &DopriOptions<T>,
    mut on_step: S,
) -> Result<(V<T>, DopriStats)>
where
    T: Real,
    F: Fn(T, &V<T>) -> V<T>,
    S: FnMut(&DenseSegment<T>),
{
    if !(t1 > t0) {
        return Err(Error::Argument("integration interval must have t1 > t0".into()));
    }
    if !(opts.rel_tol > T::zero() && opts.abs_tol > T::zero()) {
        return Err(Error::Argument("integrator tolerances must be positive".into()));
    }
    let span = t1 - t0;
    let max_step = if opts.max_step > T::zero() { opts.max_step.min(span) } else { span };
    let mut stats = DopriStats::default();

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    stats.evaluations += 1;
    let mut h = if opts.initial_step > T::zero() {
        opts.initial_step
    } else {
        stats.evaluations += 1;
        initial_step(&f, t0, &y0, &k1, span, opts)
    }
    .min(max_step);
    let mut err_old = T::lit(1e-4);
    let mut last_rejected = false;
    let min_step = span * T::epsilon() * T::lit(16.0);

    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::IntegrationFailure {
                t_reached: t.as_f64(),
                reason: format!("exceeded {} steps", opts.max_steps),
            });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        if h < min_step && !last {
            return Err(Error::IntegrationFailure {
                t_reached: t.as_f64(),
                reason: format!("step size underflow (h = {:e})", h.as_f64()),
            });
        }

        let k2 = f(t + h * T::lit(C2), &axpy(&y, &[(A21, &k1)], h));
        let k3 = f(t + h * T::lit(C3), &axpy(&y, &[(A31, &k1), (A32, &k2)], h));
        let k4 = f(t + h * T::lit(C4), &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
        let k5 = f(t + h * T::lit(C5), &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
        let k6 = f(t + h, &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h));
        let y_new = axpy(&y, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)], h);
        let t_new = if last { t1 } else { t + h };
        let k7 = f(t_new, &y_new);
        stats.evaluations += 6;

        let err_vec = axpy(&V::zero(), &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)], h);
        let err = error_norm(&err_vec, &y, &y_new, opts);

        if err <= T::one() {
            let ydiff = y_new - y;
            let bspl = k1.scale(re(h)) - ydiff;
            let rc5 = axpy(&V::zero(), &[(D1, &k1), (D3, &k3), (D4, &k4), (D5, &k5), (D6, &k6), (D7, &k7)], h);
            let seg = DenseSegment { t0: t, h, rc: [y, ydiff, bspl, ydiff - k7.scale(re(h)) - bspl, rc5] };
            on_step(&seg);
            stats.accepted += 1;

            let err_c = err.max(T::lit(1e-10));
            let mut fac = T::lit(SAFETY) * err_c.powf(-T::lit(EXPO)) * err_old.powf(T::lit(BETA));
            fac = fac.max(T::lit(FAC_MIN)).min(T::lit(FAC_MAX));
            if last_rejected {
                fac = fac.min(T::one());
            }
            err_old = err.max(T::lit(1e-4));
            last_rejected = false;

            t = t_new;
            y = y_new;
            k1 = k7;
            if last {
                return Ok((y, stats));
            }
            h = (h * fac).min(max_step);
        } else {
            stats.rejected += 1;
            last_rejected = true;
            let fac = if err.is_finite() {
                (T::lit(SAFETY) * err.powf(-T::lit(0.2))).max(T::lit(FAC_MIN))
            } else {
                T::lit(FAC_MIN)
            };
            h *= fac;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::C;
    use num_traits::Zero;

    // Uncoupled phase rotations: y_k(t) = e^{-i w_k t} y_k(0).
    fn rotation(w: [f64; 3]) -> impl Fn(f64, &V<f64>) -> V<f64> {
        move |_t, y| V::new(y[0] * C::new(0.0, -w[0]), y[1] * C::new(0.0, -w[1]), y[2] * C::new(0.0, -w[2]))
    }

    #[test]
    fn phase_rotation_accuracy() {
        let w = [3.0, -7.5, 20.0];
        let y0 = V::new(C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(0.6, -0.8));
        let (y, stats) = integrate(rotation(w), 0.0, 2.0, y0, &DopriOptions::default(), |_| {}).unwrap();
        for k in 0..3 {
            let exact = y0[k] * C::new(0.0, -w[k] * 2.0).exp();
            assert!((y[k] - exact).norm() < 1e-8, "component {k}");
        }
        assert!(stats.accepted > 10);
    }

    #[test]
    fn dense_output_tracks_exact_solution() {
        let w = [5.0, 1.0, -2.0];
        let y0 = V::new(C::new(1.0, 0.0), C::new(1.0, 0.0), C::new(1.0, 0.0));
        let mut worst = 0f64;
        integrate(rotation(w), 0.0, 3.0, y0, &DopriOptions::default(), |seg| {
            for j in 0..=4 {
                let t = seg.t0 + seg.h * j as f64 / 4.0;
                let y = seg.eval(t);
                for k in 0..3 {
                    let exact = C::new(0.0, -w[k] * t).exp();
                    worst = worst.max((y[k] - exact).norm());
                }
            }
        })
        .unwrap();
        assert!(worst < 1e-7, "dense error {worst}");
    }

    #[test]
    fn reports_step_exhaustion() {
        let opts = DopriOptions { max_steps: 3, ..DopriOptions::default() };
        let y0 = V::new(C::new(1.0, 0.0), C::zero(), C::zero());
        let err = integrate(rotation([500.0, 0.0, 0.0]), 0.0, 10.0, y0, &opts, |_| {}).unwrap_err();
        assert!(matches!(err, Error::IntegrationFailure { .. }));
    }

    #[test]
    fn rejects_empty_interval() {
        let y0 = V::new(C::new(1.0, 0.0), C::zero(), C::zero());
        assert!(integrate(rotation([1.0; 3]), 1.0, 1.0, y0, &DopriOptions::default(), |_| {}).is_err());
    }
}
