//! Current-phase relations of the Josephson elements that realise a
//! cos(2 phi) potential, and their cosine-harmonic content.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::Real;

/// Grid used by the model constructors.
pub const DEFAULT_POINTS: usize = 4096;

/// U(phi) = sum_m coefficients[m] cos(m phi).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSeries<T> {
    pub coefficients: Vec<T>,
    pub model: String,
}

impl<T: Real> HarmonicSeries<T> {
    pub fn harmonic(&self, m: usize) -> T {
        self.coefficients.get(m).copied().unwrap_or_else(T::zero)
    }

    /// E_J2 / E_J1.
    pub fn ratio(&self) -> Result<T> {
        let e1 = self.harmonic(1);
        let scale = self.coefficients.iter().fold(T::zero(), |m, c| m.max(c.abs()));
        if e1.abs() <= T::epsilon() * T::lit(100.0) * scale || e1 == T::zero() {
            return Err(Error::VanishingFirstHarmonic);
        }
        Ok(self.harmonic(2) / e1)
    }

    pub fn evaluate(&self, phi: T) -> T {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(m, c)| *c * (T::from_usize_lossy(m) * phi).cos())
            .sum()
    }
}

/// Cosine projection of `u` sampled at phi_j = 2 pi j / L, j = 0..L.
///
/// Trapezoid on the periodic grid: E_0 is the mean, E_m = (2/L) sum u_j cos(m phi_j).
pub fn fourier_harmonics<T: Real>(u: &[T], max_harmonic: usize, model: &str) -> Result<HarmonicSeries<T>> {
    let l = u.len();
    if max_harmonic == 0 || l < 8 * max_harmonic {
        return Err(invalid("grid", format!("{l} samples cannot resolve {max_harmonic} harmonics (need 8 per harmonic)")));
    }
    if u.iter().any(|x| !x.is_finite()) {
        return Err(invalid("potential", "non-finite sample"));
    }
    let scale = u.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let tol = T::lit(1e-8).max(T::lit(100.0) * T::epsilon() * scale);
    let asym = (1..l).map(|j| (u[j] - u[l - j]).abs() * T::lit(0.5)).fold(T::zero(), T::max);
    if asym > tol {
        return Err(Error::NotEven { asymmetry: asym.to_f64().unwrap_or(f64::NAN) });
    }
    let lf = T::from_usize_lossy(l);
    let step = T::lit(2.0) * T::PI() / lf;
    let mut coefficients = Vec::with_capacity(max_harmonic + 1);
    coefficients.push(u.iter().copied().sum::<T>() / lf);
    for m in 1..=max_harmonic {
        // Index arithmetic keeps cos(m phi_j) exact at the grid symmetry points.
        let s: T = u
            .iter()
            .enumerate()
            .map(|(j, x)| *x * (step * T::from_usize_lossy((m * j) % l)).cos())
            .sum();
        coefficients.push(T::lit(2.0) * s / lf);
    }
    Ok(HarmonicSeries { coefficients, model: model.to_string() })
}

pub fn sample<T: Real>(f: impl Fn(T) -> T, points: usize) -> Vec<T> {
    let step = T::lit(2.0) * T::PI() / T::from_usize_lossy(points);
    (0..points).map(|j| f(step * T::from_usize_lossy(j))).collect()
}

/// -sqrt(1 - tau sin^2(phi/2)), per channel in units of the gap.
pub fn transparent_junction_potential<T: Real>(tau: T, phi: T) -> T {
    let s = (phi * T::lit(0.5)).sin();
    -(T::one() - tau * s * s).max(T::zero()).sqrt()
}

/// -2 sqrt(cos^2(phi/2) + eta^2 sin^2(phi/2)), in units of the mean E_J.
pub fn rhombus_potential<T: Real>(eta: T, phi: T) -> T {
    let (s, c) = (phi * T::lit(0.5)).sin_cos();
    -T::lit(2.0) * (c * c + eta * eta * s * s).sqrt()
}

pub fn transparent_junction_harmonics_on<T: Real>(tau: T, max_harmonic: usize, points: usize) -> Result<HarmonicSeries<T>> {
    if !(tau >= T::zero() && tau <= T::one()) {
        return Err(invalid("tau", "transparency must lie in [0, 1]"));
    }
    let u = sample(|phi| transparent_junction_potential(tau, phi), points);
    fourier_harmonics(&u, max_harmonic, "transparent")
}

pub fn transparent_junction_harmonics<T: Real>(tau: T, max_harmonic: usize) -> Result<HarmonicSeries<T>> {
    transparent_junction_harmonics_on(tau, max_harmonic, DEFAULT_POINTS)
}

pub fn rhombus_harmonics_on<T: Real>(eta: T, max_harmonic: usize, points: usize) -> Result<HarmonicSeries<T>> {
    if !(eta >= T::zero() && eta < T::one()) {
        return Err(invalid("eta", "asymmetry must lie in [0, 1)"));
    }
    let u = sample(|phi| rhombus_potential(eta, phi), points);
    fourier_harmonics(&u, max_harmonic, "rhombus")
}

pub fn rhombus_harmonics<T: Real>(eta: T, max_harmonic: usize) -> Result<HarmonicSeries<T>> {
    rhombus_harmonics_on(eta, max_harmonic, DEFAULT_POINTS)
}

/// Small-asymmetry expansion of the rhombus harmonics E_0, E_1, E_2 to order eta^2.
pub fn rhombus_small_eta<T: Real>(eta: T) -> [T; 3] {
    let pi = T::PI();
    let e2 = eta * eta;
    let ln = |x: f64| T::lit(x.ln());
    [
        -T::lit(2.0) * (T::lit(2.0) + e2 * (ln(4.0) - T::one())) / pi,
        -T::lit(4.0) * (T::lit(2.0) - e2 * (ln(64.0) - T::lit(5.0))) / (T::lit(3.0) * pi),
        T::lit(2.0) * (T::lit(4.0) - T::lit(3.0) * e2 * (T::lit(5.0) * ln(16.0) - T::lit(26.0))) / (T::lit(15.0) * pi),
    ]
}

/// Born-Oppenheimer ratio of a KITE with E_L >> E_J.
pub fn kite_small_inductance_ratio<T: Real>(ej: T, el: T) -> Result<T> {
    if !(el > T::zero()) {
        return Err(invalid("el", "inductive energy must be positive"));
    }
    Ok(-ej / (T::lit(4.0) * el))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowermonRatio<T> {
    /// Signed ratio; infinite at the pole.
    pub ratio: T,
    /// cos(2 theta) vanished (theta = 45 degrees).
    pub pole: bool,
}

pub fn flowermon_ratio<T: Real>(theta: T, ek_over_ej: T) -> FlowermonRatio<T> {
    let c = (T::lit(2.0) * theta).cos();
    if c.abs() <= T::lit(1e-12) {
        let sign = if ek_over_ej < T::zero() { -T::one() } else { T::one() };
        return FlowermonRatio { ratio: sign * T::infinity(), pole: true };
    }
    FlowermonRatio { ratio: ek_over_ej / c, pole: false }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RowValue {
    Computed { ratio: f64 },
    ComputedRange { low: f64, high: f64, symmetric_sign: bool },
    Literature { low: f64, high: f64 },
    OutOfScope { literature: f64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub name: String,
    pub value: RowValue,
    pub note: String,
}

/// Transparencies spanned by the pinhole row.
pub const PINHOLE_TAU: (f64, f64) = (0.85, 0.95);
/// Twist-angle accuracy assumed for the flowermon row, degrees.
pub const FLOWERMON_ANGLE_ACCURACY_DEG: f64 = 0.2;

pub fn implementation_table() -> Result<Vec<TableRow>> {
    let row = |name: &str, value, note: &str| TableRow { name: name.into(), value, note: note.into() };
    let rhombus = rhombus_harmonics::<f64>(0.0, 4)?.ratio()?;
    let (t_lo, t_hi) = PINHOLE_TAU;
    let p_lo = transparent_junction_harmonics::<f64>(t_lo, 4)?.ratio()?;
    let p_hi = transparent_junction_harmonics::<f64>(t_hi, 4)?.ratio()?;
    let kite = kite_small_inductance_ratio(0.1, 1.0)?;
    let near = flowermon_ratio::<f64>((45.0 - FLOWERMON_ANGLE_ACCURACY_DEG).to_radians(), 0.1).ratio;
    let far = flowermon_ratio(0.0f64, 0.1).ratio;
    Ok(vec![
        row("Rhombus", RowValue::Computed { ratio: rhombus }, "symmetric junctions, eta = 0"),
        row(
            "Pinhole JJ",
            RowValue::ComputedRange { low: p_lo.min(p_hi), high: p_lo.max(p_hi), symmetric_sign: false },
            "single transparent channel, tau in [0.85, 0.95]",
        ),
        row("KITE (low inductance)", RowValue::Computed { ratio: kite }, "E_J/E_L = 0.1"),
        row(
            "KITE (high inductance)",
            RowValue::OutOfScope { literature: -0.04, reason: "requires spectrum fitting of a multi-mode circuit".into() },
            "",
        ),
        row("Germanium", RowValue::Literature { low: -0.1, high: -0.1 }, "not computed"),
        row("Graphene", RowValue::Literature { low: -0.1, high: -0.1 }, "not computed"),
        row("InAs", RowValue::Literature { low: -0.2, high: -0.1 }, "not computed"),
        row(
            "Flowermon",
            RowValue::ComputedRange { low: far.min(near), high: far.max(near), symmetric_sign: true },
            "E_k/E_J = 0.1, theta from 0 to 45 deg - 0.2 deg; sign follows cos(2 theta)",
        ),
    ])
}
