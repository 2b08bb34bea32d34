//! Circuit parameters and the charge-basis Hamiltonian
//!
//! H = 4 E_C (n - n_g)^2
//!   + E_J1 [cos(phi) cos(pi x) + d1 sin(phi) sin(pi x)]
//!   + E_J2 [cos(2 phi) cos(2 pi x) + d2 sin(2 phi) sin(2 pi x)],   x = dphi + 1/2
//!
//! with all energies in GHz and the flux offset `dphi` in flux quanta,
//! measured from half a flux quantum.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::chargebasis::{number_operator, ChargeOperator};
use crate::error::{invalid, Result};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitParams<T> {
    /// Charging energy E_C.
    pub ec: T,
    /// First-harmonic amplitude E_J1 (signed).
    pub ejs1: T,
    /// Second-harmonic amplitude E_J2.
    pub ejs2: T,
    /// Asymmetry of the first harmonic.
    pub d1: T,
    /// Asymmetry of the second harmonic.
    pub d2: T,
    /// Flux offset from half flux quantum.
    pub dphi: T,
    /// Offset charge in Cooper pairs.
    pub ng: T,
    /// Charge cutoff N: the basis spans -N..=N.
    pub n_trunc: usize,
}

/// Which external knob a derivative is taken with respect to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Knob {
    Flux,
    Charge,
}

impl<T: Real> CircuitParams<T> {
    /// Parametrize by `ratio = E_J2 / E_J1` and a common asymmetry `d`.
    pub fn from_ratio(ec: T, ejs2: T, ratio: T, d: T, dphi: T, ng: T, n_trunc: usize) -> Self {
        Self { ec, ejs1: ejs2 / ratio, ejs2, d1: d, d2: d, dphi, ng, n_trunc }
    }

    pub fn ratio(&self) -> T {
        self.ejs2 / self.ejs1
    }

    pub fn dim(&self) -> usize {
        2 * self.n_trunc + 1
    }

    pub fn with_truncation(self, n_trunc: usize) -> Self {
        Self { n_trunc, ..self }
    }

    pub fn with_knob(self, knob: Knob, value: T) -> Self {
        match knob {
            Knob::Flux => Self { dphi: value, ..self },
            Knob::Charge => Self { ng: value, ..self },
        }
    }

    pub fn knob(&self, knob: Knob) -> T {
        match knob {
            Knob::Flux => self.dphi,
            Knob::Charge => self.ng,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name, x: T| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, "must be finite"))
            }
        };
        finite("ec", self.ec)?;
        finite("ejs1", self.ejs1)?;
        finite("ejs2", self.ejs2)?;
        finite("dphi", self.dphi)?;
        finite("ng", self.ng)?;
        if self.ec <= T::zero() {
            return Err(invalid("ec", format!("must be positive, got {}", self.ec)));
        }
        if self.ejs2 < T::zero() {
            return Err(invalid("ejs2", format!("must be non-negative, got {}", self.ejs2)));
        }
        for (name, d) in [("d1", self.d1), ("d2", self.d2)] {
            if !(d.abs() < T::one()) {
                return Err(invalid(name, format!("asymmetry must lie in (-1, 1), got {d}")));
            }
        }
        if self.n_trunc < 2 {
            return Err(invalid("n_trunc", format!("cos(2 phi) needs N >= 2, got {}", self.n_trunc)));
        }
        Ok(())
    }
}

/// Adds a * cos(m phi) + b * sin(m phi) to `op` without forming products.
fn add_harmonic<T: Real>(op: &mut ChargeOperator<T>, m: usize, a: T, b: T) {
    let half = T::lit(0.5);
    let up = Complex::new(a * half, -b * half);
    for i in 0..op.dim().saturating_sub(m) {
        op.set(i + m, i, op.get(i + m, i) + up);
        op.set(i, i + m, op.get(i, i + m) + up.conj());
    }
}

/// Coefficients (a1, b1, a2, b2) of the Josephson part and their flux
/// derivatives: `order` 0 gives the potential, 1 its d/d(dphi).
fn josephson_coefficients<T: Real>(p: &CircuitParams<T>, order: u32) -> [T; 4] {
    let pi = T::PI();
    let x = p.dphi + T::lit(0.5);
    let two = T::lit(2.0);
    let (c1, s1) = ((pi * x).cos(), (pi * x).sin());
    let (c2, s2) = ((two * pi * x).cos(), (two * pi * x).sin());
    match order {
        0 => [p.ejs1 * c1, p.ejs1 * p.d1 * s1, p.ejs2 * c2, p.ejs2 * p.d2 * s2],
        _ => [
            -pi * p.ejs1 * s1,
            pi * p.ejs1 * p.d1 * c1,
            -two * pi * p.ejs2 * s2,
            two * pi * p.ejs2 * p.d2 * c2,
        ],
    }
}

pub fn build_hamiltonian<T: Real>(p: &CircuitParams<T>) -> Result<ChargeOperator<T>> {
    p.validate()?;
    let mut h = ChargeOperator::zeros(p.n_trunc);
    let four_ec = T::lit(4.0) * p.ec;
    for i in 0..h.dim() {
        let q = T::from_isize_lossy(h.charge_of(i)) - p.ng;
        h.set(i, i, Complex::new(four_ec * q * q, T::zero()));
    }
    let [a1, b1, a2, b2] = josephson_coefficients(p, 0);
    add_harmonic(&mut h, 1, a1, b1);
    add_harmonic(&mut h, 2, a2, b2);
    Ok(h)
}

/// dH/d(dphi) in GHz per flux quantum.
pub fn flux_coupling_operator<T: Real>(p: &CircuitParams<T>) -> Result<ChargeOperator<T>> {
    p.validate()?;
    let mut op = ChargeOperator::zeros(p.n_trunc);
    let [a1, b1, a2, b2] = josephson_coefficients(p, 1);
    add_harmonic(&mut op, 1, a1, b1);
    add_harmonic(&mut op, 2, a2, b2);
    Ok(op)
}

/// dH/dn_g = -8 E_C (n - n_g), in GHz per Cooper pair.
pub fn charge_coupling_operator<T: Real>(p: &CircuitParams<T>) -> Result<ChargeOperator<T>> {
    p.validate()?;
    Ok(number_operator(p.n_trunc, p.ng).scale(-T::lit(8.0) * p.ec))
}

pub fn coupling_operator<T: Real>(p: &CircuitParams<T>, knob: Knob) -> Result<ChargeOperator<T>> {
    match knob {
        Knob::Flux => flux_coupling_operator(p),
        Knob::Charge => charge_coupling_operator(p),
    }
}
