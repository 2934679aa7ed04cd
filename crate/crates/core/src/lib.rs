//! Inverse-engineered shortcuts to adiabaticity for three-level STIRAP.
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the aliases at the crate root fix it to `f64`.
//! [`bench`] is an `f64` reporting layer on top.

// Validation is written as `!(x > 0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod invariant;
pub mod io;
pub mod numeric;
pub mod propagator;
pub mod pulses;
pub mod qstate;
pub mod scalar;
pub mod ses;
pub mod tuner;

pub use error::{Error, Result};
pub use invariant::{eigenvectors, invariant_matrix, invariant_residual, lr_phase_rate};
pub use propagator::{evolve, final_p3, min_adiabatic_time, ses_finite_difference};
pub use pulses::{peak_amplitudes, sample_schedule, AngleSource, MixingSchedule, PulseSource, Segment, SourceKind};
pub use scalar::Real;
pub use ses::{p3_second_order, ses_m_domain, ses_time_domain, SesMethod, SesVariant};
pub use tuner::{find_equal_maxima_d, find_min_ses_d, scan_qs};

pub type StateVector3 = qstate::StateVector3<f64>;
pub type Matrix3 = qstate::Matrix3<f64>;
pub type InvariantAngles = invariant::InvariantAngles<f64>;
pub type InvariantSpec = invariant::InvariantSpec<f64>;
pub type DynamicalModeDecomposition = invariant::DynamicalModeDecomposition<f64>;
pub type ProtocolParams = pulses::ProtocolParams<f64>;
pub type OptimalProtocol = pulses::OptimalProtocol<f64>;
pub type OriginalProtocol = pulses::OriginalProtocol<f64>;
pub type OriginalProtocolParams = pulses::OriginalProtocolParams<f64>;
pub type AdiabaticReference = pulses::AdiabaticReference<f64>;
pub type PulseSchedule = pulses::PulseSchedule<f64>;
pub type PulseSample = pulses::PulseSample<f64>;
pub type InterpolatedSchedule = pulses::InterpolatedSchedule<f64>;
pub type SesReport = ses::SesReport<f64>;
pub type Perturbation = ses::Perturbation<f64>;
pub type TuneResult = tuner::TuneResult<f64>;
pub type SesTuneOptions = tuner::SesTuneOptions<f64>;
pub type IntegratorConfig = propagator::IntegratorConfig<f64>;
pub type StateTrajectory = propagator::StateTrajectory<f64>;
pub type AdiabaticScan = propagator::AdiabaticScan<f64>;

/// Single-precision aliases for the core types.
pub mod f32 {
    pub type StateVector3 = crate::qstate::StateVector3<f32>;
    pub type ProtocolParams = crate::pulses::ProtocolParams<f32>;
    pub type SesReport = crate::ses::SesReport<f32>;
    pub type IntegratorConfig = crate::propagator::IntegratorConfig<f32>;
}
