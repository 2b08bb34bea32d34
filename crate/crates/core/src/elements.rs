//! Relaxation figures of merit between the two lowest states and
//! charge-parity diagnostics of individual eigenstates.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::chargebasis::{cos_m_phi_operator, number_operator, sin_m_phi_operator};
use crate::circuit::CircuitParams;
use crate::error::Result;
use crate::spectrum::{solve, Spectrum};
use crate::Real;

/// |<0|O|1>| for the operators entering decay, plus the raw amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixElementReport<T> {
    /// |<0|n|1>|.
    pub m_n: T,
    /// |<0|cos phi|1> cos(pi dphi) + <0|sin phi|1> d1 sin(pi dphi)|.
    pub m_1phi: T,
    /// |-<0|cos 2phi|1> sin(2 pi dphi) + <0|sin 2phi|1> d2 cos(2 pi dphi)|.
    pub m_2phi: T,
    /// <0|cos phi|1>, <0|sin phi|1>, <0|cos 2phi|1>, <0|sin 2phi|1>.
    pub components: [Complex<T>; 4],
    pub dphi: T,
    pub d1: T,
    pub d2: T,
    /// f01 is below the degeneracy floor; elements are then basis-dependent.
    pub degenerate: bool,
}

impl<T: Real> MatrixElementReport<T> {
    pub fn m_1phi_from_components(&self) -> T {
        let pi = T::PI();
        let [c1, s1, _, _] = self.components;
        (c1 * (pi * self.dphi).cos() + s1 * (self.d1 * (pi * self.dphi).sin())).norm()
    }

    pub fn m_2phi_from_components(&self) -> T {
        let two_pi = T::lit(2.0) * T::PI();
        let [_, _, c2, s2] = self.components;
        (-c2 * (two_pi * self.dphi).sin() + s2 * (self.d2 * (two_pi * self.dphi).cos())).norm()
    }
}

pub fn matrix_elements<T: Real>(p: &CircuitParams<T>) -> Result<MatrixElementReport<T>> {
    let s = solve(p, 2)?;
    matrix_elements_from(&s, p)
}

pub fn matrix_elements_from<T: Real>(s: &Spectrum<T>, p: &CircuitParams<T>) -> Result<MatrixElementReport<T>> {
    let nt = p.n_trunc;
    let (v0, v1) = (s.state(0)?, s.state(1)?);
    let m_n = number_operator(nt, T::zero()).matrix_element(v0, v1).norm();
    let components = [
        cos_m_phi_operator(nt, 1)?.matrix_element(v0, v1),
        sin_m_phi_operator(nt, 1)?.matrix_element(v0, v1),
        cos_m_phi_operator(nt, 2)?.matrix_element(v0, v1),
        sin_m_phi_operator(nt, 2)?.matrix_element(v0, v1),
    ];
    let mut report = MatrixElementReport {
        m_n,
        m_1phi: T::zero(),
        m_2phi: T::zero(),
        components,
        dphi: p.dphi,
        d1: p.d1,
        d2: p.d2,
        degenerate: s.is_degenerate(0, 1),
    };
    report.m_1phi = report.m_1phi_from_components();
    report.m_2phi = report.m_2phi_from_components();
    Ok(report)
}

/// Squared-amplitude weight on even and odd charge states.
pub fn parity_weights_of<T: Real>(state: &[Complex<T>], n_trunc: usize) -> (T, T) {
    let mut even = T::zero();
    let mut odd = T::zero();
    for (i, c) in state.iter().enumerate() {
        let k = i as isize - n_trunc as isize;
        if k.rem_euclid(2) == 0 {
            even += c.norm_sqr();
        } else {
            odd += c.norm_sqr();
        }
    }
    let total = even + odd;
    (even / total, odd / total)
}

pub fn parity_weights<T: Real>(p: &CircuitParams<T>, level: usize) -> Result<(T, T)> {
    let s = solve(p, level + 1)?;
    Ok(parity_weights_of(s.state(level)?, p.n_trunc))
}

/// Normalized overlap of one parity sector with its mirror image k -> 2c - k,
/// maximized in modulus over the integer centres floor(n_g) and ceil(n_g).
/// `None` when the sector carries less than 1e-6 of the weight.
///
/// The odd-sector sign is gauge dependent: with the wells at phi = 0 and pi
/// (the gauge of the Hamiltonian here) both sectors come out symmetric; a
/// quarter-period shift, see [`quarter_period_shift`], flips the odd one.
pub fn symmetry_metric_of<T: Real>(state: &[Complex<T>], n_trunc: usize, ng: T) -> (Option<T>, Option<T>) {
    let n = n_trunc as isize;
    let lo = ng.floor().to_isize().unwrap_or(0);
    let hi = ng.ceil().to_isize().unwrap_or(0);
    let sector = |parity: isize| -> Option<T> {
        let in_sector = |k: isize| k.rem_euclid(2) == parity;
        let weight: T = (-n..=n)
            .filter(|&k| in_sector(k))
            .map(|k| state[(k + n) as usize].norm_sqr())
            .sum();
        let total: T = state.iter().map(|c| c.norm_sqr()).sum();
        if weight < T::lit(1e-6) * total {
            return None;
        }
        let overlap = |c: isize| -> T {
            (-n..=n)
                .filter(|&k| in_sector(k))
                .filter_map(|k| {
                    let m = 2 * c - k;
                    (m.abs() <= n).then(|| (state[(k + n) as usize].conj() * state[(m + n) as usize]).re)
                })
                .sum::<T>()
                / weight
        };
        let a = overlap(lo);
        let b = overlap(hi);
        Some(if b.abs() > a.abs() { b } else { a })
    };
    (sector(0), sector(1))
}

/// Gauge change phi -> phi + pi/2: amplitudes pick up i^k.
pub fn quarter_period_shift<T: Real>(state: &[Complex<T>], n_trunc: usize) -> Vec<Complex<T>> {
    let (zero, one) = (T::zero(), T::one());
    let powers = [
        Complex::new(one, zero),
        Complex::new(zero, one),
        Complex::new(-one, zero),
        Complex::new(zero, -one),
    ];
    state
        .iter()
        .enumerate()
        .map(|(i, c)| c * powers[(i as isize - n_trunc as isize).rem_euclid(4) as usize])
        .collect()
}

pub fn symmetry_metric<T: Real>(p: &CircuitParams<T>, level: usize) -> Result<(Option<T>, Option<T>)> {
    let s = solve(p, level + 1)?;
    Ok(symmetry_metric_of(s.state(level)?, p.n_trunc, p.ng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pure(ec: f64, r: f64, ng: f64, nt: usize) -> CircuitParams<f64> {
        CircuitParams { ec, ejs1: 0.0, ejs2: r * ec, d1: 0.0, d2: 0.0, dphi: 0.0, ng, n_trunc: nt }
    }

    #[test]
    fn pure_case_has_no_charge_element() {
        let r = matrix_elements(&pure(1.0, 20.0, 0.25, 30)).unwrap();
        assert!(r.m_n < 1e-12);
        assert!(!r.degenerate);
    }

    #[test]
    fn transmon_reference_element() {
        // Harmonic limit: |<0|n|1>| = (E_J / 8 E_C)^(1/4) / sqrt 2.
        let ec = 0.2;
        let p = CircuitParams { ec, ejs1: -50.0 * ec, ejs2: 0.0, d1: 0.0, d2: 0.0, dphi: -0.5, ng: 0.25, n_trunc: 30 };
        let r = matrix_elements(&p).unwrap();
        let want = (50.0_f64 / 8.0).powf(0.25) / 2f64.sqrt();
        assert!((r.m_n / want - 1.0).abs() < 0.1, "{} vs {want}", r.m_n);
    }

    #[test]
    fn reconstruction_from_components() {
        let p = CircuitParams::<f64>::from_ratio(0.5, 10.0, -0.1, 0.01, 3e-4, 0.25, 30);
        let r = matrix_elements(&p).unwrap();
        assert!((r.m_1phi - r.m_1phi_from_components()).abs() <= 1e-12);
        assert!((r.m_2phi - r.m_2phi_from_components()).abs() <= 1e-12);
    }

    #[test]
    fn parity_of_pure_states() {
        let p = CircuitParams { dphi: 1e-6, ..pure(1.0, 20.0, 0.25, 30) };
        let (e0, o0) = parity_weights(&p, 0).unwrap();
        let (e1, o1) = parity_weights(&p, 1).unwrap();
        assert!((e0 + o0 - 1.0).abs() < 1e-10);
        assert!(e0 > 0.99 && o1 > 0.99, "{e0} {o1}");
        assert!(e1 < 0.01);
    }

    #[test]
    fn symmetric_ground_state_at_zero_offset() {
        let (even, odd) = symmetry_metric(&pure(1.0, 20.0, 0.0, 30), 0).unwrap();
        assert!((even.unwrap() - 1.0).abs() < 1e-6);
        assert!(odd.is_none());
    }

    #[test]
    fn mixed_parity_yet_small_charge_element() {
        let ec = 0.5;
        let p = CircuitParams::<f64>::from_ratio(ec, 40.0 * ec, -0.1, 0.01, 1e-4, 0.25, 40);
        for level in 0..2 {
            let (we, wo) = parity_weights(&p, level).unwrap();
            assert!((0.2..=0.8).contains(&we) && (0.2..=0.8).contains(&wo), "{we} {wo}");
            let (se, so) = symmetry_metric(&p, level).unwrap();
            assert!(se.unwrap() > 0.9 && so.unwrap() > 0.9, "{se:?} {so:?}");
            // Symmetric even / antisymmetric odd after the quarter-period shift.
            let s = solve(&p, 2).unwrap();
            let shifted = quarter_period_shift(s.state(level).unwrap(), p.n_trunc);
            let (se, so) = symmetry_metric_of(&shifted, p.n_trunc, p.ng);
            assert!(se.unwrap() > 0.9 && so.unwrap() < -0.9, "{se:?} {so:?}");
        }
        assert!(matrix_elements(&p).unwrap().m_n < 0.1);
    }

    #[test]
    fn single_precision_agrees() {
        let p = CircuitParams::<f64>::from_ratio(0.5, 5.0, -0.1, 0.01, 1e-2, 0.25, 20);
        let q = CircuitParams::<f32>::from_ratio(0.5, 5.0, -0.1, 0.01, 1e-2, 0.25, 20);
        let a = matrix_elements(&p).unwrap();
        let b = matrix_elements(&q).unwrap();
        assert!((a.m_n - b.m_n as f64).abs() < 1e-3);
    }
}
