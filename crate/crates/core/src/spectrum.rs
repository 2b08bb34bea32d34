//! Diagonalization and derived spectral observables.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::chargebasis::ChargeOperator;
use crate::circuit::{build_hamiltonian, coupling_operator, CircuitParams, Knob};
use crate::error::{invalid, Error, Result};
use crate::linalg::eigh;
use crate::Real;

/// Lowest eigenpairs of one Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum<T> {
    /// Ascending energies in GHz; at least three whenever the basis allows.
    pub energies: Vec<T>,
    /// Orthonormal eigenvectors in the charge basis, `states[i]` for `energies[i]`.
    pub states: Vec<Vec<Complex<T>>>,
    /// Fingerprint of the generating parameters, if built from `CircuitParams`.
    pub params_hash: Option<u64>,
    /// Largest |eigenvalue| of the full matrix; sets the round-off scale.
    pub scale: T,
}

impl<T: Real> Spectrum<T> {
    pub fn level_count(&self) -> usize {
        self.states.len()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn state(&self, i: usize) -> Result<&[Complex<T>]> {
        self.states
            .get(i)
            .map(Vec::as_slice)
            .ok_or(Error::LevelOutOfRange { index: i, available: self.states.len() })
    }

    /// E_j - E_i in GHz.
    pub fn transition_frequency(&self, i: usize, j: usize) -> Result<T> {
        let available = self.energies.len();
        if i >= j {
            return Err(invalid("level_pair", format!("need i < j, got ({i}, {j})")));
        }
        if j >= available {
            return Err(Error::LevelOutOfRange { index: j, available });
        }
        Ok(self.energies[j] - self.energies[i])
    }

    pub fn f01(&self) -> T {
        self.energies[1] - self.energies[0]
    }

    /// Splittings below this are treated as exact degeneracies.
    pub fn degeneracy_floor(&self) -> T {
        let gap = match self.energies.get(2) {
            Some(&e2) => e2 - self.energies[0],
            None => self.scale,
        };
        (T::lit(1e-10) * gap).max(T::lit(1e3) * T::epsilon() * self.scale)
    }

    pub fn is_degenerate(&self, i: usize, j: usize) -> bool {
        match (self.energies.get(i), self.energies.get(j)) {
            (Some(&a), Some(&b)) => (b - a).abs() <= self.degeneracy_floor(),
            _ => false,
        }
    }

    /// Error if levels `i` and `j` are degenerate.
    pub fn require_split(&self, i: usize, j: usize) -> Result<T> {
        let f = self.transition_frequency(i.min(j), i.max(j))?;
        if f.abs() <= self.degeneracy_floor() {
            return Err(Error::Degenerate { lower: i.min(j), upper: i.max(j), splitting: f.as_f64() });
        }
        Ok(f)
    }
}

pub fn params_hash<T: Real>(p: &CircuitParams<T>) -> u64 {
    // FNV-1a over the f64 bit patterns; stable across runs and platforms.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let words = [p.ec, p.ejs1, p.ejs2, p.d1, p.d2, p.dphi, p.ng]
        .map(|x| x.as_f64().to_bits())
        .into_iter()
        .chain(std::iter::once(p.n_trunc as u64));
    for w in words {
        for b in w.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// The `k` lowest eigenpairs (at least three when the dimension allows).
pub fn eigensystem<T: Real>(h: &ChargeOperator<T>, k: usize) -> Result<Spectrum<T>> {
    let dim = h.dim();
    if k > dim {
        return Err(invalid("k", format!("requested {k} levels from a {dim}-dimensional basis")));
    }
    let keep = k.max(3).min(dim);
    let eig = eigh(h.as_slice(), dim, keep)?;
    let scale = eig.values.iter().fold(T::zero(), |m, e| m.max(e.abs()));
    Ok(Spectrum {
        energies: eig.values[..keep].to_vec(),
        states: eig.vectors,
        params_hash: None,
        scale,
    })
}

pub fn solve<T: Real>(p: &CircuitParams<T>, k: usize) -> Result<Spectrum<T>> {
    let mut s = eigensystem(&build_hamiltonian(p)?, k)?;
    s.params_hash = Some(params_hash(p));
    Ok(s)
}

/// f_ij(n_g) maximum minus minimum over n_g in [0, 1/2], 51 samples
/// including both endpoints.
pub fn charge_dispersion<T: Real>(p: &CircuitParams<T>, pair: (usize, usize)) -> Result<T> {
    let (i, j) = pair;
    let samples = 51;
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for s in 0..samples {
        let ng = T::lit(0.5) * T::from_usize_lossy(s) / T::from_usize_lossy(samples - 1);
        let f = solve(&CircuitParams { ng, ..*p }, j + 1)?.transition_frequency(i, j)?;
        lo = lo.min(f);
        hi = hi.max(f);
    }
    Ok(hi - lo)
}

/// <j|O|j> - <i|O|i>.
pub fn hellmann_feynman<T: Real>(s: &Spectrum<T>, op: &ChargeOperator<T>, i: usize, j: usize) -> Result<T> {
    Ok(op.expectation(s.state(j)?) - op.expectation(s.state(i)?))
}

/// d f01 / d knob from an existing spectrum; errors at a degeneracy.
pub fn gradient_from_spectrum<T: Real>(s: &Spectrum<T>, p: &CircuitParams<T>, knob: Knob) -> Result<T> {
    s.require_split(0, 1)?;
    hellmann_feynman(s, &coupling_operator(p, knob)?, 0, 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGradient<T> {
    pub knob: Knob,
    /// Expectation-value difference, GHz per unit knob.
    pub hellmann_feynman: T,
    /// Richardson-extrapolated central difference.
    pub finite_difference: T,
    /// Agreement threshold that was applied.
    pub tolerance: T,
}

impl<T: Real> FrequencyGradient<T> {
    pub fn value(&self) -> T {
        self.hellmann_feynman
    }
}

pub(crate) fn fd_step<T: Real>(p: &CircuitParams<T>, f01: T, knob: Knob) -> T {
    match knob {
        // Two-level picture: curvature sets in on the scale f01 / |dH/dphi|.
        Knob::Flux => {
            let slope = T::PI() * (p.ejs1.abs() + T::lit(2.0) * p.ejs2.abs());
            let h = T::lit(0.01) * f01 / slope.max(T::min_positive_value());
            h.max(T::lit(1e-9)).min(T::lit(1e-5))
        }
        Knob::Charge => T::lit(1e-4),
    }
}

/// Gradient of f01 by Hellmann-Feynman, cross-checked against finite
/// differences: relative 1e-4, or absolute 1e-8 GHz plus the round-off
/// resolution of the difference quotient.
pub fn frequency_gradient<T: Real>(p: &CircuitParams<T>, knob: Knob) -> Result<FrequencyGradient<T>> {
    let s = solve(p, 2)?;
    let hf = gradient_from_spectrum(&s, p, knob)?;
    let f01 = s.f01();
    let h = fd_step(p, f01, knob);
    let x = p.knob(knob);
    let f_at = |dx: T| -> Result<T> { Ok(solve(&p.with_knob(knob, x + dx), 2)?.f01()) };
    let central = |h: T| -> Result<T> { Ok((f_at(h)? - f_at(-h)?) / (T::lit(2.0) * h)) };
    let d1 = central(h)?;
    let d2 = central(h * T::lit(0.5))?;
    let fd = (T::lit(4.0) * d2 - d1) / T::lit(3.0);

    let roundoff = T::lit(20.0) * T::epsilon() * s.scale / h;
    let tolerance = T::lit(1e-4) * hf.abs().max(fd.abs()) + T::lit(1e-8).max(roundoff);
    if (hf - fd).abs() > tolerance {
        return Err(Error::GradientMismatch { analytic: hf.as_f64(), numeric: fd.as_f64(), f01: f01.as_f64() });
    }
    Ok(FrequencyGradient { knob, hellmann_feynman: hf, finite_difference: fd, tolerance })
}

/// Starting cutoff ceil(4 (E_J2/E_C)^(1/4) + 10).
pub fn initial_truncation<T: Real>(ec: T, ejs2: T) -> usize {
    let r = (ejs2.abs() / ec).as_f64();
    (4.0 * r.powf(0.25) + 10.0).ceil() as usize
}

pub const MAX_TRUNCATION: usize = 400;

/// Smallest N from the starting guess such that f01 and f12 change by less
/// than 1e-8 relative (or round-off) on going to N + 10.
pub fn converge_truncation<T: Real>(p: &CircuitParams<T>) -> Result<usize> {
    p.validate()?;
    let mut cache: BTreeMap<usize, (T, T, T)> = BTreeMap::new();
    let mut eval = |n: usize| -> Result<(T, T, T)> {
        if let Some(v) = cache.get(&n) {
            return Ok(*v);
        }
        let s = solve(&p.with_truncation(n), 3)?;
        let v = (s.f01(), s.energies[2] - s.energies[1], s.scale);
        cache.insert(n, v);
        Ok(v)
    };
    let start = initial_truncation(p.ec, p.ejs2).max(2);
    let mut last_delta = f64::INFINITY;
    for n in start..=MAX_TRUNCATION {
        let (a01, a12, _) = eval(n)?;
        let (b01, b12, scale) = eval(n + 10)?;
        let floor = T::lit(1e3) * T::epsilon() * scale;
        let ok01 = (a01 - b01).abs() <= T::lit(1e-8) * b01.abs() + floor;
        let ok12 = (a12 - b12).abs() <= T::lit(1e-8) * b12.abs() + floor;
        if ok01 && ok12 {
            return Ok(n);
        }
        last_delta = (a01 - b01).abs().as_f64();
    }
    Err(Error::TruncationNotConverged { max_n: MAX_TRUNCATION, last_delta })
}
