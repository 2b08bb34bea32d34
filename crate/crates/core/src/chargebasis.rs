//! Operators on the truncated charge basis |k>, k = -N..=N.
//!
//! Row/column index `i = k + N`. The raising operator e^{i m phi} maps
//! |k> to |k + m>; states pushed past the cutoff are dropped, so identities
//! such as cos^2 + sin^2 = 1 hold only away from the truncation edge.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::Real;

/// Dense complex operator on the (2N+1)-dimensional charge basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeOperator<T> {
    n_trunc: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ChargeOperator<T> {
    pub fn zeros(n_trunc: usize) -> Self {
        let dim = 2 * n_trunc + 1;
        Self { n_trunc, data: vec![Complex::new(T::zero(), T::zero()); dim * dim] }
    }

    pub fn identity(n_trunc: usize) -> Self {
        let mut op = Self::zeros(n_trunc);
        let dim = op.dim();
        for i in 0..dim {
            op.data[i * dim + i] = Complex::new(T::one(), T::zero());
        }
        op
    }

    /// Build from a row-major buffer of length (2N+1)^2.
    pub fn from_row_major(n_trunc: usize, data: Vec<Complex<T>>) -> Result<Self> {
        let dim = 2 * n_trunc + 1;
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: data.len() });
        }
        Ok(Self { n_trunc, data })
    }

    #[inline]
    pub fn n_trunc(&self) -> usize {
        self.n_trunc
    }

    #[inline]
    pub fn dim(&self) -> usize {
        2 * self.n_trunc + 1
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[row * self.dim() + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex<T>) {
        let dim = self.dim();
        self.data[row * dim + col] = value;
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    /// Charge eigenvalue labelling row `i`.
    #[inline]
    pub fn charge_of(&self, i: usize) -> isize {
        i as isize - self.n_trunc as isize
    }

    pub fn adjoint(&self) -> Self {
        let dim = self.dim();
        let mut out = Self::zeros(self.n_trunc);
        for r in 0..dim {
            for c in 0..dim {
                out.data[c * dim + r] = self.data[r * dim + c].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        Self { n_trunc: self.n_trunc, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_complex(&self, s: Complex<T>) -> Self {
        Self { n_trunc: self.n_trunc, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: T, other: &Self) {
        assert_eq!(self.n_trunc, other.n_trunc, "operator truncations differ");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n_trunc, other.n_trunc, "operator truncations differ");
        let dim = self.dim();
        let mut out = Self::zeros(self.n_trunc);
        for r in 0..dim {
            for k in 0..dim {
                let a = self.data[r * dim + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let row = &other.data[k * dim..(k + 1) * dim];
                for (o, b) in out.data[r * dim..(r + 1) * dim].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let dim = self.dim();
        assert_eq!(v.len(), dim, "vector length does not match operator");
        (0..dim)
            .map(|r| self.data[r * dim..(r + 1) * dim].iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }

    /// <u| self |v>.
    pub fn matrix_element(&self, u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
        self.apply(v).iter().zip(u).map(|(av, u)| u.conj() * av).sum()
    }

    /// Real part of <v| self |v>; exact for Hermitian operators.
    pub fn expectation(&self, v: &[Complex<T>]) -> T {
        self.matrix_element(v, v).re
    }

    pub fn max_abs(&self) -> T {
        crate::linalg::max_abs(&self.data)
    }

    /// Largest |A_ij - conj(A_ji)|.
    pub fn hermiticity_defect(&self) -> T {
        let dim = self.dim();
        let mut worst = T::zero();
        for r in 0..dim {
            for c in 0..=r {
                worst = worst.max((self.data[r * dim + c] - self.data[c * dim + r].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Largest |k - l| with a non-zero entry (k, l).
    pub fn bandwidth(&self) -> usize {
        let dim = self.dim();
        let mut band = 0;
        for r in 0..dim {
            for c in 0..dim {
                let z = self.data[r * dim + c];
                if z.re != T::zero() || z.im != T::zero() {
                    band = band.max(r.abs_diff(c));
                }
            }
        }
        band
    }
}

impl<T: Real> Add for &ChargeOperator<T> {
    type Output = ChargeOperator<T>;
    fn add(self, rhs: Self) -> ChargeOperator<T> {
        let mut out = self.clone();
        out.axpy(T::one(), rhs);
        out
    }
}

impl<T: Real> Sub for &ChargeOperator<T> {
    type Output = ChargeOperator<T>;
    fn sub(self, rhs: Self) -> ChargeOperator<T> {
        let mut out = self.clone();
        out.axpy(-T::one(), rhs);
        out
    }
}

impl<T: Real> Mul for &ChargeOperator<T> {
    type Output = ChargeOperator<T>;
    fn mul(self, rhs: Self) -> ChargeOperator<T> {
        self.matmul(rhs)
    }
}

fn check_cutoff(n_trunc: usize, m: usize) -> Result<()> {
    if n_trunc == 0 {
        return Err(invalid("n_trunc", "N = 0 leaves a single charge state"));
    }
    if m == 0 || m > n_trunc {
        return Err(invalid("m", format!("harmonic order {m} must lie in 1..={n_trunc}")));
    }
    Ok(())
}

/// Cooper-pair number operator diag(-N..=N).
pub fn charge_number_operator<T: Real>(n_trunc: usize) -> Result<ChargeOperator<T>> {
    if n_trunc == 0 {
        return Err(invalid("n_trunc", "N = 0 leaves a single charge state"));
    }
    Ok(number_operator(n_trunc, T::zero()))
}

/// Offset charge operator n - n_g (diagonal).
pub fn number_operator<T: Real>(n_trunc: usize, ng: T) -> ChargeOperator<T> {
    let mut op = ChargeOperator::zeros(n_trunc);
    for i in 0..op.dim() {
        let k = T::from_isize_lossy(op.charge_of(i));
        op.set(i, i, Complex::new(k - ng, T::zero()));
    }
    op
}

/// e^{i m phi}: |k> -> |k + m>, truncated at the cutoff.
pub fn raise<T: Real>(n_trunc: usize, m: usize) -> ChargeOperator<T> {
    let mut op = ChargeOperator::zeros(n_trunc);
    let dim = op.dim();
    for i in 0..dim.saturating_sub(m) {
        op.set(i + m, i, Complex::new(T::one(), T::zero()));
    }
    op
}

/// cos(m phi) = (R^m + R^-m) / 2.
pub fn cos_m_phi_operator<T: Real>(n_trunc: usize, m: usize) -> Result<ChargeOperator<T>> {
    check_cutoff(n_trunc, m)?;
    let r = raise::<T>(n_trunc, m);
    Ok((&r + &r.adjoint()).scale(T::lit(0.5)))
}

/// sin(m phi) = (R^m - R^-m) / 2i.
pub fn sin_m_phi_operator<T: Real>(n_trunc: usize, m: usize) -> Result<ChargeOperator<T>> {
    check_cutoff(n_trunc, m)?;
    let r = raise::<T>(n_trunc, m);
    Ok((&r - &r.adjoint()).scale_complex(Complex::new(T::zero(), -T::lit(0.5))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn interior_close(a: &ChargeOperator<f64>, b: &ChargeOperator<f64>, edge: usize) -> bool {
        let dim = a.dim();
        (edge..dim - edge).all(|r| (edge..dim - edge).all(|c| (a.get(r, c) - b.get(r, c)).norm() < 1e-14))
    }

    #[test]
    fn raise_moves_charge_up() {
        let r = raise::<f64>(3, 2);
        // |k=0> (index 3) -> |k=2> (index 5)
        assert_eq!(r.get(5, 3), Complex::new(1.0, 0.0));
        assert_eq!(r.get(3, 5), Complex::new(0.0, 0.0));
        assert_eq!(r.bandwidth(), 2);
    }

    #[test]
    fn number_diagonal() {
        let n = number_operator(2, 0.25_f64);
        let diag: Vec<f64> = (0..5).map(|i| n.get(i, i).re).collect();
        assert_eq!(diag, vec![-2.25, -1.25, -0.25, 0.75, 1.75]);
        let n0 = charge_number_operator::<f64>(1).unwrap();
        assert_eq!((0..3).map(|i| n0.get(i, i).re).collect::<Vec<_>>(), vec![-1.0, 0.0, 1.0]);
        assert!(charge_number_operator::<f64>(0).is_err());
    }

    #[test]
    fn cutoff_errors() {
        assert!(cos_m_phi_operator::<f64>(1, 2).is_err());
        assert!(sin_m_phi_operator::<f64>(3, 0).is_err());
        assert!(cos_m_phi_operator::<f64>(0, 1).is_err());
        let c = cos_m_phi_operator::<f64>(2, 2).unwrap();
        assert_eq!(c.get(0, 2), Complex::new(0.5, 0.0));
        assert_eq!(c.get(1, 3), Complex::new(0.5, 0.0));
        assert_eq!(c.bandwidth(), 2);
    }

    #[test]
    fn commutator_with_raise() {
        // [n, R^m] = m R^m holds exactly, even at the edge.
        let n = number_operator(6, 0.3_f64);
        for m in [1, 2] {
            let r = raise::<f64>(6, m);
            let comm = &(&n * &r) - &(&r * &n);
            assert!(interior_close(&comm, &r.scale(m as f64), 0));
        }
    }

    #[test]
    fn commutator_with_sine() {
        // With e^{i phi} raising the charge, [n, sin phi] = -i cos phi.
        let n = charge_number_operator::<f64>(10).unwrap();
        let s = sin_m_phi_operator::<f64>(10, 1).unwrap();
        let c = cos_m_phi_operator::<f64>(10, 1).unwrap();
        let comm = &(&n * &s) - &(&s * &n);
        assert!(interior_close(&comm, &c.scale_complex(Complex::new(0.0, -1.0)), 1));
    }

    #[test]
    fn cos_spectrum_approaches_one() {
        let c = cos_m_phi_operator::<f64>(20, 1).unwrap();
        let eig = crate::linalg::eigh(c.as_slice(), c.dim(), 0).unwrap();
        let top = *eig.values.last().unwrap();
        assert!(top >= 0.95 && top <= 1.0, "{top}");
    }

    #[test]
    fn double_angle_identity_in_interior() {
        let nt = 8;
        let c1 = cos_m_phi_operator::<f64>(nt, 1).unwrap();
        let s1 = sin_m_phi_operator::<f64>(nt, 1).unwrap();
        let c2 = cos_m_phi_operator::<f64>(nt, 2).unwrap();
        let s2 = sin_m_phi_operator::<f64>(nt, 2).unwrap();
        let lhs = &(&c1 * &c1) - &(&s1 * &s1);
        assert!(interior_close(&lhs, &c2, 1));
        let cs = (&c1 * &s1).scale(2.0);
        assert!(interior_close(&cs, &s2, 1));
        let one = &(&c1 * &c1) + &(&s1 * &s1);
        assert!(interior_close(&one, &ChargeOperator::identity(nt), 1));
        let one2 = &(&c2 * &c2) + &(&s2 * &s2);
        assert!(interior_close(&one2, &ChargeOperator::identity(nt), 2));
        // but not at the edge
        assert!((one.get(0, 0).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn wrong_buffer_length() {
        let r = ChargeOperator::<f64>::from_row_major(1, vec![Complex::new(0.0, 0.0); 4]);
        assert!(matches!(r, Err(Error::DimensionMismatch { expected: 9, got: 4 })));
    }

    proptest! {
        #[test]
        fn trig_operators_hermitian(nt in 1usize..30, m in 1usize..3, ng in -2.0f64..2.0) {
            prop_assume!(m <= nt);
            let c = cos_m_phi_operator::<f64>(nt, m).unwrap();
            let s = sin_m_phi_operator::<f64>(nt, m).unwrap();
            prop_assert!(c.is_hermitian(0.0) && s.is_hermitian(0.0));
            prop_assert!(c.bandwidth() == m && s.bandwidth() == m);
            prop_assert!((0..c.dim()).all(|i| c.get(i, i).norm() == 0.0));
            prop_assert!(number_operator(nt, ng).is_hermitian(0.0));
        }
    }
}
