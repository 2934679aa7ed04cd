//! Dynamical invariant of the Λ-system Hamiltonian: the invariant matrix,
//! its closed-form eigensystem, Lewis–Riesenfeld phases, and the residual of
//! the invariant's defining equation.

use num_complex::Complex;

use crate::error::{domain, Error, Result};
use crate::pulses::AngleSource;
use crate::qstate::{commutator, hamiltonian, im, re, Matrix3, Spin1Generators, StateVector3, C};
use crate::scalar::Real;

/// Invariant parametrisation (θ, β, γ) and rates at one instant.
///
/// `gamma` is the phase of mode 2; mode 1 carries `-gamma` and mode 0 none.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantAngles<T> {
    pub theta: T,
    pub beta: T,
    pub gamma: T,
    pub theta_dot: T,
    pub beta_dot: T,
    pub gamma_dot: T,
}

impl<T: Real> InvariantAngles<T> {
    /// Checks `γ̇ sinθ = β̇` to relative tolerance `rel_tol` (scaled by the
    /// larger of |β̇| and |γ̇ sinθ|, floored at one ulp-scale).
    pub fn satisfies_constraint(&self, rel_tol: T) -> bool {
        let lhs = self.gamma_dot * self.theta.sin();
        let scale = lhs.abs().max(self.beta_dot.abs()).max(T::min_positive_value());
        (lhs - self.beta_dot).abs() <= rel_tol * scale
    }
}

/// Magnitude `B₀` of the invariant. Only scales eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantSpec<T> {
    pub b0: T,
}

impl<T: Real> InvariantSpec<T> {
    pub fn new(b0: T) -> Result<Self> {
        if b0 > T::zero() && b0.is_finite() {
            Ok(Self { b0 })
        } else {
            Err(domain("B0", b0.as_f64(), "(0, inf)"))
        }
    }

    /// Eigenvalues in mode order 0, 1, 2: `{0, +B₀/2, -B₀/2}`.
    pub fn eigenvalues(&self) -> [T; 3] {
        let h = T::half() * self.b0;
        [T::zero(), h, -h]
    }
}

impl<T: Real> Default for InvariantSpec<T> {
    fn default() -> Self {
        Self { b0: T::one() }
    }
}

/// `(B₀/2)(cosθ sinβ J1 + cosθ cosβ J2 + sinθ J3)`.
pub fn invariant_matrix<T: Real>(theta: T, beta: T, spec: &InvariantSpec<T>) -> Matrix3<T> {
    let g = Spin1Generators::<T>::new();
    let (st, ct) = theta.sin_cos();
    let (sb, cb) = beta.sin_cos();
    (g.j1.scale_real(ct * sb) + g.j2.scale_real(ct * cb) + g.j3.scale_real(st)).scale_real(T::half() * spec.b0)
}

/// Eigenvectors `(φ0, φ1, φ2)` with eigenvalues `0, +B₀/2, -B₀/2`.
pub fn eigenvectors<T: Real>(theta: T, beta: T) -> [StateVector3<T>; 3] {
    let (st, ct) = theta.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let r = T::FRAC_1_SQRT_2();
    let phi0 = StateVector3::new(re(ct * cb), im(-st), re(-ct * sb));
    let phi1 = StateVector3::new(C::new(st * cb, sb), im(ct), C::new(-st * sb, cb)).scale(re(r));
    let phi2 = StateVector3::new(C::new(st * cb, -sb), im(ct), C::new(-st * sb, -cb)).scale(re(r));
    [phi0, phi1, phi2]
}

/// Rate of the mode-2 LR phase,
/// `γ̇ = β̇ sinθ + ½(Ω_p sinβ + Ω_s cosβ) cosθ`.
pub fn lr_phase_rate<T: Real>(angles: &InvariantAngles<T>, omega_p: T, omega_s: T) -> T {
    let (st, ct) = angles.theta.sin_cos();
    let (sb, cb) = angles.beta.sin_cos();
    angles.beta_dot * st + T::half() * (omega_p * sb + omega_s * cb) * ct
}

/// LR phases of the three modes given the mode-2 phase `gamma`.
pub fn lr_phases<T: Real>(gamma: T) -> [T; 3] {
    [T::zero(), -gamma, gamma]
}

/// Expansion of a state in the invariant's dynamical modes,
/// `ψ = Σ c_n e^{iγ_n} φ_n`.
#[derive(Clone, Copy, Debug)]
pub struct DynamicalModeDecomposition<T: Real> {
    pub coefficients: [C<T>; 3],
    pub phases: [T; 3],
}

impl<T: Real> DynamicalModeDecomposition<T> {
    pub fn decompose(state: &StateVector3<T>, angles: &InvariantAngles<T>) -> Self {
        let modes = eigenvectors(angles.theta, angles.beta);
        let phases = lr_phases(angles.gamma);
        let coefficients = [0, 1, 2].map(|n| Complex::from_polar(T::one(), -phases[n]) * modes[n].inner(state));
        Self { coefficients, phases }
    }

    pub fn reconstruct(&self, angles: &InvariantAngles<T>) -> StateVector3<T> {
        let modes = eigenvectors(angles.theta, angles.beta);
        (0..3).fold(StateVector3::zero(), |acc, n| {
            acc + modes[n].scale(self.coefficients[n] * Complex::from_polar(T::one(), self.phases[n]))
        })
    }

    pub fn weight_sum(&self) -> T {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Max-entry modulus of `(1/i)[I, H] + ∂I/∂t` at time `t`, with `∂I/∂t` taken
/// by a central difference of half-width `dt`.
pub fn invariant_residual<T, S>(source: &S, spec: &InvariantSpec<T>, t: T, dt: T) -> Result<T>
where
    T: Real,
    S: AngleSource<T> + ?Sized,
{
    let duration = source.duration();
    if !(t > T::zero() && t < duration) {
        return Err(domain("t", t.as_f64(), format!("(0, {})", duration.as_f64())));
    }
    if !(dt > T::zero()) || t - dt <= T::zero() || t + dt >= duration {
        return Err(Error::Argument(format!(
            "difference stencil [t - dt, t + dt] must lie inside (0, T); t = {}, dt = {}",
            t.as_f64(),
            dt.as_f64()
        )));
    }
    let at = |s: T| -> Result<Matrix3<T>> {
        let a = source.angles_at(s)?;
        Ok(invariant_matrix(a.theta, a.beta, spec))
    };
    let d_inv = (at(t + dt)? - at(t - dt)?).scale_real(T::one() / (T::two() * dt));
    let (wp, ws) = source.rabi_at(t)?;
    let comm = commutator(&at(t)?, &hamiltonian(wp, ws));
    // 1/i = -i
    let resid = comm.scale(im(-T::one())) + d_inv;
    Ok(resid.max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::{OptimalProtocol, ProtocolParams, PulseSource};
    use num_traits::One;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn canonical() -> OptimalProtocol<f64> {
        OptimalProtocol::new(ProtocolParams::new(PI / 6.0, 5.85, 0.1).unwrap())
    }

    #[test]
    fn invariant_special_angles() {
        let spec = InvariantSpec::default();
        let g = Spin1Generators::<f64>::new();
        let m = invariant_matrix(0.0, 0.0, &spec);
        assert_eq!(m, g.j2.scale_real(0.5));
        let m = invariant_matrix(FRAC_PI_2, 1.234, &spec);
        assert!((m - g.j3.scale_real(0.5)).max_abs() < 1e-16);
    }

    #[test]
    fn eigenvectors_at_special_angles() {
        let [phi0, _, _] = eigenvectors(0.0f64, 0.0);
        assert_eq!(phi0, StateVector3::basis(1).unwrap());
        let [phi0, _, _] = eigenvectors(0.0f64, FRAC_PI_2);
        assert!(phi0[0].norm() < 1e-16 && phi0[1].norm() < 1e-16);
        assert!((phi0[2] + Complex::one()).norm() < 1e-16);
    }

    #[test]
    fn eigen_decomposition_random_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let spec = InvariantSpec::new(2.5).unwrap();
        for _ in 0..1000 {
            let theta = rng.gen_range(-PI..PI);
            let beta = rng.gen_range(-PI..PI);
            let inv = invariant_matrix(theta, beta, &spec);
            assert!(inv.is_hermitian());
            let modes = eigenvectors(theta, beta);
            let lams = spec.eigenvalues();
            for n in 0..3 {
                let r = inv.apply(&modes[n]) - modes[n].scale(re(lams[n]));
                assert!(r.max_abs() < 1e-14, "mode {n} at ({theta}, {beta})");
                for m in 0..3 {
                    let ip = modes[m].inner(&modes[n]);
                    let expect = if m == n { 1.0 } else { 0.0 };
                    assert!((ip - re(expect)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn spec_rejects_nonpositive_b0() {
        assert!(InvariantSpec::new(0.0).is_err());
        assert!(InvariantSpec::new(-1.0).is_err());
    }

    #[test]
    fn lr_phase_rate_trivial() {
        let a = InvariantAngles { theta: 0.3, beta: 0.2, gamma: 0.0, theta_dot: 0.0, beta_dot: 0.0, gamma_dot: 0.0 };
        assert_eq!(lr_phase_rate(&a, 0.0, 0.0), 0.0);
    }

    #[test]
    fn lr_phase_rate_matches_constraint_on_synthesised_pulses() {
        let proto = canonical();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let t = rng.gen_range(1e-4..0.1 - 1e-4);
            let a = proto.angles_at(t).unwrap();
            let (wp, ws) = proto.rabi_at(t).unwrap();
            let rate = lr_phase_rate(&a, wp, ws);
            let expected = a.beta_dot / a.theta.sin();
            assert!((rate - expected).abs() <= 1e-8 * expected.abs().max(1e-12), "t = {t}");
            assert!(a.satisfies_constraint(1e-9));
        }
    }

    #[test]
    fn integrated_phase_rate_matches_closed_form() {
        use crate::numeric::quadrature::{integrate_real, QuadOptions};
        let proto = canonical();
        let p = proto.params();
        let f = |t: f64| {
            let a = proto.angles_at(t).unwrap();
            let (wp, ws) = proto.rabi_at(t).unwrap();
            lr_phase_rate(&a, wp, ws)
        };
        let opts = QuadOptions::abs(1e-11);
        let (first, _) = integrate_real(f, 0.0, 0.05, &opts).unwrap();
        let (second, _) = integrate_real(f, 0.05, 0.1, &opts).unwrap();
        let closed = p.ansatz_r(-1.0, crate::pulses::Segment::Second).unwrap()
            - p.ansatz_r(-1.0, crate::pulses::Segment::First).unwrap();
        assert!((first + second - closed).abs() < 1e-8, "{} vs {closed}", first + second);
    }

    #[test]
    fn residual_vanishes_for_static_invariant() {
        struct Frozen;
        impl PulseSource<f64> for Frozen {
            fn duration(&self) -> f64 {
                1.0
            }
            fn rabi_at(&self, _t: f64) -> Result<(f64, f64)> {
                Ok((0.0, 0.0))
            }
        }
        impl AngleSource<f64> for Frozen {
            fn angles_at(&self, _t: f64) -> Result<InvariantAngles<f64>> {
                Ok(InvariantAngles { theta: 0.4, beta: 1.1, gamma: 0.0, theta_dot: 0.0, beta_dot: 0.0, gamma_dot: 0.0 })
            }
        }
        let r = invariant_residual(&Frozen, &InvariantSpec::default(), 0.5, 1e-3).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn residual_small_and_second_order() {
        let proto = canonical();
        let spec = InvariantSpec::default();
        // b' jumps at T/2, so the stencil is only first order there.
        for &t in &[0.013, 0.0371, 0.062, 0.081] {
            let r1 = invariant_residual(&proto, &spec, t, 1e-4).unwrap();
            let r2 = invariant_residual(&proto, &spec, t, 5e-5).unwrap();
            let ratio = r1 / r2;
            assert!((ratio - 4.0).abs() < 0.1, "t = {t}: ratio {ratio}");
        }
        let r = invariant_residual(&proto, &spec, 0.049, 1e-5).unwrap();
        assert!(r < 1e-4 * spec.b0, "residual {r}");
    }

    #[test]
    fn residual_first_order_at_junction() {
        let proto = canonical();
        let spec = InvariantSpec::default();
        let r1 = invariant_residual(&proto, &spec, 0.05, 1e-5).unwrap();
        let r2 = invariant_residual(&proto, &spec, 0.05, 5e-6).unwrap();
        assert!((r1 / r2 - 2.0).abs() < 0.05, "ratio {}", r1 / r2);
        assert!(invariant_residual(&proto, &spec, 0.05, 1e-8).unwrap() < 1e-4 * spec.b0);
    }

    #[test]
    fn residual_domain_checks() {
        let proto = canonical();
        let spec = InvariantSpec::default();
        assert!(invariant_residual(&proto, &spec, 0.0, 1e-5).is_err());
        assert!(invariant_residual(&proto, &spec, 0.2, 1e-5).is_err());
        assert!(invariant_residual(&proto, &spec, 1e-6, 1e-5).is_err());
    }

    #[test]
    fn decomposition_roundtrip_and_phase_convention() {
        let a = InvariantAngles { theta: 0.3, beta: 0.7, gamma: 1.9, theta_dot: 0.0, beta_dot: 0.0, gamma_dot: 0.0 };
        let psi = StateVector3::new(C::new(0.3, 0.1), C::new(-0.5, 0.2), C::new(0.4, -0.6)).normalized();
        let d: DynamicalModeDecomposition<f64> = DynamicalModeDecomposition::decompose(&psi, &a);
        assert_eq!(d.phases[0], 0.0);
        assert_eq!(d.phases[1], -d.phases[2]);
        assert!((d.weight_sum() - 1.0).abs() < 1e-12);
        assert!((d.reconstruct(&a) - psi).max_abs() < 1e-14);
    }
}
