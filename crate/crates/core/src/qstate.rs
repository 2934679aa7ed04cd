//! Fixed-size complex linear algebra for a three-level system.
//!
//! Everything here is a `Copy` value type. Matrices representing `H` or the
//! invariant `I` carry angular-frequency units (rad/µs); state amplitudes are
//! dimensionless.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{domain, Result};
use crate::scalar::Real;

pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn re<T: Real>(x: T) -> C<T> {
    C::new(x, T::zero())
}

#[inline]
pub(crate) fn im<T: Real>(x: T) -> C<T> {
    C::new(T::zero(), x)
}

/// Amplitudes on |1⟩, |2⟩, |3⟩.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateVector3<T: Real> {
    pub amplitudes: [C<T>; 3],
}

impl<T: Real> StateVector3<T> {
    pub fn new(a1: C<T>, a2: C<T>, a3: C<T>) -> Self {
        Self { amplitudes: [a1, a2, a3] }
    }

    pub fn zero() -> Self {
        Self::new(C::zero(), C::zero(), C::zero())
    }

    /// Basis state |k⟩ for k in 1..=3.
    pub fn basis(k: usize) -> Result<Self> {
        check_level(k)?;
        let mut s = Self::zero();
        s.amplitudes[k - 1] = C::one();
        Ok(s)
    }

    /// ⟨self|other⟩, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> C<T> {
        self.amplitudes.iter().zip(other.amplitudes.iter()).fold(C::zero(), |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        self.scale(re(T::one() / n))
    }

    pub fn scale(&self, k: C<T>) -> Self {
        Self { amplitudes: self.amplitudes.map(|a| a * k) }
    }

    /// Largest component modulus.
    pub fn max_abs(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm()).fold(T::zero(), T::max)
    }

    pub fn populations(&self) -> [T; 3] {
        self.amplitudes.map(|a| a.norm_sqr())
    }
}

impl<T: Real> Add for StateVector3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self { amplitudes: [0, 1, 2].map(|i| self.amplitudes[i] + rhs.amplitudes[i]) }
    }
}

impl<T: Real> Sub for StateVector3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self { amplitudes: [0, 1, 2].map(|i| self.amplitudes[i] - rhs.amplitudes[i]) }
    }
}

impl<T: Real> Index<usize> for StateVector3<T> {
    type Output = C<T>;
    fn index(&self, i: usize) -> &C<T> {
        &self.amplitudes[i]
    }
}

impl<T: Real> IndexMut<usize> for StateVector3<T> {
    fn index_mut(&mut self, i: usize) -> &mut C<T> {
        &mut self.amplitudes[i]
    }
}

fn check_level(k: usize) -> Result<()> {
    if (1..=3).contains(&k) {
        Ok(())
    } else {
        Err(domain("level index", k as f64, "1..=3"))
    }
}

/// Population of level `k` (1-based).
pub fn population<T: Real>(state: &StateVector3<T>, k: usize) -> Result<T> {
    check_level(k)?;
    Ok(state.amplitudes[k - 1].norm_sqr())
}

/// Dense 3×3 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix3<T: Real> {
    pub entries: [[C<T>; 3]; 3],
}

impl<T: Real> Matrix3<T> {
    pub fn zero() -> Self {
        Self { entries: [[C::zero(); 3]; 3] }
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            m.entries[i][i] = C::one();
        }
        m
    }

    pub fn from_fn(f: impl Fn(usize, usize) -> C<T>) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.entries[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn scale(&self, k: C<T>) -> Self {
        Self::from_fn(|i, j| self.entries[i][j] * k)
    }

    pub fn scale_real(&self, k: T) -> Self {
        self.scale(re(k))
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(|i, j| self.entries[j][i].conj())
    }

    pub fn is_hermitian(&self) -> bool {
        (0..3).all(|i| (0..3).all(|j| self.entries[i][j] == self.entries[j][i].conj()))
    }

    pub fn apply(&self, v: &StateVector3<T>) -> StateVector3<T> {
        let mut out = StateVector3::zero();
        for i in 0..3 {
            out.amplitudes[i] = (0..3).fold(C::zero(), |acc, j| acc + self.entries[i][j] * v.amplitudes[j]);
        }
        out
    }

    /// ⟨a|M|b⟩.
    pub fn expectation(&self, a: &StateVector3<T>, b: &StateVector3<T>) -> C<T> {
        a.inner(&self.apply(b))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.entries.iter().flat_map(|row| row.iter()).map(|z| z.norm()).fold(T::zero(), T::max)
    }
}

impl<T: Real> Add for Matrix3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.entries[i][j] + rhs.entries[i][j])
    }
}

impl<T: Real> Sub for Matrix3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.entries[i][j] - rhs.entries[i][j])
    }
}

impl<T: Real> Neg for Matrix3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_fn(|i, j| -self.entries[i][j])
    }
}

impl<T: Real> Mul for Matrix3<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| (0..3).fold(C::zero(), |acc, k| acc + self.entries[i][k] * rhs.entries[k][j]))
    }
}

/// `ab - ba`.
pub fn commutator<T: Real>(a: &Matrix3<T>, b: &Matrix3<T>) -> Matrix3<T> {
    *a * *b - *b * *a
}

/// Generators closing `[J1, J2] = iJ3` (and cyclic) in the representation
/// where J1 couples |1⟩–|2⟩ (pump), J2 couples |2⟩–|3⟩ (Stokes) and J3
/// couples |1⟩–|3⟩ with entries -i at (1,3) and +i at (3,1).
#[derive(Clone, Copy, Debug)]
pub struct Spin1Generators<T: Real> {
    pub j1: Matrix3<T>,
    pub j2: Matrix3<T>,
    pub j3: Matrix3<T>,
}

impl<T: Real> Spin1Generators<T> {
    pub fn new() -> Self {
        let one = C::<T>::one();
        let mut j1 = Matrix3::zero();
        j1.entries[0][1] = one;
        j1.entries[1][0] = one;
        let mut j2 = Matrix3::zero();
        j2.entries[1][2] = one;
        j2.entries[2][1] = one;
        let mut j3 = Matrix3::zero();
        j3.entries[0][2] = im(-T::one());
        j3.entries[2][0] = im(T::one());
        let gens = Self { j1, j2, j3 };
        debug_assert!(gens.closes());
        gens
    }

    /// Exact check of the cyclic commutation relations.
    pub fn closes(&self) -> bool {
        let i = C::<T>::i();
        commutator(&self.j1, &self.j2) == self.j3.scale(i)
            && commutator(&self.j2, &self.j3) == self.j1.scale(i)
            && commutator(&self.j3, &self.j1) == self.j2.scale(i)
    }
}

impl<T: Real> Default for Spin1Generators<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Resonant Λ-system Hamiltonian `½(Ω_p J1 + Ω_s J2)`.
pub fn hamiltonian<T: Real>(omega_p: T, omega_s: T) -> Matrix3<T> {
    let h = T::half();
    let mut m = Matrix3::zero();
    m.entries[0][1] = re(h * omega_p);
    m.entries[1][0] = re(h * omega_p);
    m.entries[1][2] = re(h * omega_s);
    m.entries[2][1] = re(h * omega_s);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    type M = Matrix3<f64>;

    #[test]
    fn self_commutator_vanishes() {
        let g = Spin1Generators::<f64>::new();
        assert_eq!(commutator(&g.j1, &g.j1), M::zero());
    }

    #[test]
    fn su2_closure_entrywise() {
        let g = Spin1Generators::<f64>::new();
        assert!(g.closes());
        assert_eq!(commutator(&g.j1, &g.j2), g.j3.scale(C::i()));
        assert!(Spin1Generators::<f32>::new().closes());
    }

    #[test]
    fn diagonal_matrices_commute() {
        let a = M::from_fn(|i, j| if i == j { C::new(i as f64 + 1.0, 0.5) } else { C::zero() });
        let b = M::from_fn(|i, j| if i == j { C::new(-2.0, i as f64) } else { C::zero() });
        assert_eq!(commutator(&a, &b), M::zero());
    }

    #[test]
    fn basis_populations() {
        let one = StateVector3::<f64>::basis(1).unwrap();
        assert_eq!(population(&one, 1).unwrap(), 1.0);
        assert_eq!(population(&one, 3).unwrap(), 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let sup = StateVector3::new(re(s), C::zero(), re(s));
        assert_abs_diff_eq!(population(&sup, 3).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn population_rejects_bad_level() {
        let one = StateVector3::<f64>::basis(1).unwrap();
        assert!(population(&one, 0).is_err());
        assert!(population(&one, 4).is_err());
        assert!(StateVector3::<f64>::basis(7).is_err());
    }

    #[test]
    fn hamiltonian_examples() {
        assert_eq!(hamiltonian(0.0, 0.0), M::zero());
        let h = hamiltonian(2.0, 0.0);
        let mut expected = M::zero();
        expected.entries[0][1] = re(1.0);
        expected.entries[1][0] = re(1.0);
        assert_eq!(h, expected);
    }

    #[test]
    fn hamiltonian_matches_generator_form() {
        let g = Spin1Generators::<f64>::new();
        let (wp, ws) = (3.7, -1.2);
        let via_gens = (g.j1.scale_real(wp) + g.j2.scale_real(ws)).scale_real(0.5);
        assert_eq!(hamiltonian(wp, ws), via_gens);
    }

    proptest! {
        #[test]
        fn hamiltonian_hermitian_zero_diagonal(wp in -500.0f64..500.0, ws in -500.0f64..500.0) {
            let h = hamiltonian(wp, ws);
            prop_assert!(h.is_hermitian());
            for i in 0..3 {
                prop_assert_eq!(h.entries[i][i], C::zero());
            }
        }

        // Eigenvalues {0, ±½√(Ω_p²+Ω_s²)}: check H v = λ v for the closed-form
        // eigenvectors of the tridiagonal matrix.
        #[test]
        fn hamiltonian_spectrum(wp in -300.0f64..300.0, ws in -300.0f64..300.0) {
            prop_assume!(wp.hypot(ws) > 1e-6);
            let h = hamiltonian(wp, ws);
            let r = wp.hypot(ws);
            let dark = StateVector3::new(re(ws / r), C::zero(), re(-wp / r));
            prop_assert!(h.apply(&dark).max_abs() < 1e-12 * r);
            for sign in [1.0, -1.0] {
                let v = StateVector3::new(re(wp / r), re(sign), re(ws / r));
                let lam = sign * 0.5 * r;
                let resid = h.apply(&v) - v.scale(re(lam));
                prop_assert!(resid.max_abs() < 1e-12 * r);
            }
        }

        #[test]
        fn populations_sum_to_one(a in prop::array::uniform6(-1.0f64..1.0)) {
            let s = StateVector3::new(C::new(a[0], a[1]), C::new(a[2], a[3]), C::new(a[4], a[5]));
            prop_assume!(s.norm() > 1e-3);
            let s = s.normalized();
            let total: f64 = (1..=3).map(|k| population(&s, k).unwrap()).sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
        }
    }
}
