//! Coherence estimates: 1/f flux and charge dephasing, 1/f flux and
//! dielectric relaxation, and their combination into T1, Tphi and T2.

use serde::{Deserialize, Serialize};

use crate::chargebasis::number_operator;
use crate::circuit::{flux_coupling_operator, CircuitParams, Knob};
use crate::error::{invalid, Result};
use crate::spectrum::{fd_step, gradient_from_spectrum, solve, Spectrum};
use crate::thermal::{effective_qubit_rates, rate_matrix_from_spectrum};
use crate::units::{bose, ghz_to_rad_per_s};
use crate::Real;

/// Times longer than this are reported as this value (seconds).
pub const TIME_CAP_S: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargeUnits {
    /// `a_ng` counts Cooper pairs, like n_g.
    #[default]
    CooperPairs,
    /// `a_ng` counts electrons; halved before use.
    Electrons,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSpec<T> {
    /// 1/f flux amplitude in flux quanta.
    pub a_phi: T,
    /// 1/f charge amplitude, units per `charge_units`.
    pub a_ng: T,
    pub charge_units: ChargeUnits,
    /// Dielectric quality factor of the shunt capacitance.
    pub q_cap: T,
    /// Kelvin.
    pub temperature: T,
    /// Infrared cutoff, rad/s.
    pub omega_ir: T,
    /// Measurement time entering the 1/f log, s.
    pub t_exp: T,
    /// Add the second-order (curvature) 1/f dephasing term.
    pub second_order: bool,
}

impl<T: Real> Default for NoiseSpec<T> {
    fn default() -> Self {
        Self {
            a_phi: T::lit(1e-6),
            a_ng: T::lit(1e-4),
            charge_units: ChargeUnits::CooperPairs,
            q_cap: T::lit(1e6),
            temperature: T::lit(0.05),
            omega_ir: T::lit(2.0) * T::PI(),
            t_exp: T::lit(1e-5),
            second_order: false,
        }
    }
}

impl<T: Real> NoiseSpec<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("a_phi", self.a_phi),
            ("a_ng", self.a_ng),
            ("q_cap", self.q_cap),
            ("temperature", self.temperature),
            ("omega_ir", self.omega_ir),
            ("t_exp", self.t_exp),
        ] {
            if !(x.is_finite() && x > T::zero()) {
                return Err(invalid(name, format!("must be positive and finite, got {x}")));
            }
        }
        Ok(())
    }

    /// Amplitude in the knob's own units (flux quanta or Cooper pairs).
    pub fn amplitude(&self, knob: Knob) -> T {
        match (knob, self.charge_units) {
            (Knob::Flux, _) => self.a_phi,
            (Knob::Charge, ChargeUnits::CooperPairs) => self.a_ng,
            (Knob::Charge, ChargeUnits::Electrons) => self.a_ng * T::lit(0.5),
        }
    }

    /// |ln(omega_ir t_exp)|.
    pub fn log_factor(&self) -> T {
        (self.omega_ir * self.t_exp).ln().abs()
    }

    /// Infrared cutoff expressed in GHz.
    pub fn f_ir_ghz(&self) -> T {
        self.omega_ir / (T::lit(2.0e9) * T::PI())
    }
}

/// Golden-rule rates (down, up) in 1/s for one pair through 1/f flux noise.
///
/// `coupling` is |<j|dH/dphi|i>| in GHz per flux quantum and `f_ghz` the
/// transition frequency. The 1/f density S(w) = 2 pi A^2 / |w| is taken as
/// the symmetrized classical spectrum and split between emission and
/// absorption in detailed-balance proportion (n+1 : n).
pub fn flux_pair_rates<T: Real>(coupling: T, f_ghz: T, noise: &NoiseSpec<T>) -> (T, T) {
    let f = f_ghz.abs().max(noise.f_ir_ghz());
    let omega = ghz_to_rad_per_s(f);
    let s_phi = T::lit(2.0) * T::PI() * noise.a_phi * noise.a_phi / omega;
    let g = ghz_to_rad_per_s(coupling);
    let total = T::lit(2.0) * g * g * s_phi;
    let n = bose(f, noise.temperature);
    let denom = T::lit(2.0) * n + T::one();
    (total * (n + T::one()) / denom, total * n / denom)
}

/// Golden-rule rates (down, up) in 1/s through dielectric loss of the shunt
/// capacitance, for |<j|n|i>| = `n_element`.
pub fn dielectric_pair_rates<T: Real>(n_element: T, f_ghz: T, ec: T, noise: &NoiseSpec<T>) -> (T, T) {
    let f = f_ghz.abs().max(noise.f_ir_ghz());
    let base = ghz_to_rad_per_s(T::lit(16.0) * ec) * n_element * n_element / noise.q_cap;
    let n = bose(f, noise.temperature);
    (base * (n + T::one()), base * n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    FluxDecay,
    DielectricDecay,
    FluxDephasing,
    ChargeDephasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoherenceOptions {
    /// Replace the two-level T1 by the multilevel thermal reduction over
    /// this many levels.
    pub thermal_levels: Option<usize>,
    /// In thermal mode, use the thermal Gamma2 in place of Gamma1_eff / 2.
    pub thermal_dephasing: bool,
}

impl Default for CoherenceOptions {
    fn default() -> Self {
        Self { thermal_levels: None, thermal_dephasing: true }
    }
}

impl CoherenceOptions {
    pub fn thermal(levels: usize) -> Self {
        Self { thermal_levels: Some(levels), thermal_dephasing: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalSummary<T> {
    pub n_levels: usize,
    /// Effective qubit relaxation rate, 1/s.
    pub gamma1_eff: T,
    /// Decoherence rate from all transitions out of |0> and |1>, 1/s.
    pub gamma2_eff: T,
    /// Whether `gamma2_eff` replaced gamma1_eff / 2 in T2.
    pub gamma2_in_t2: bool,
    /// Number of level pairs that needed the infrared regularization.
    pub regularized_pairs: usize,
}

/// Times in seconds; frequencies in GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport<T> {
    pub f01_ghz: T,
    pub t1_flux: T,
    pub t1_dielectric: T,
    pub t1_total: T,
    pub tphi_flux: T,
    pub tphi_charge: T,
    pub tphi_total: T,
    pub t2: T,
    pub limiting_channel: Channel,
    pub thermal: Option<ThermalSummary<T>>,
}

fn capped<T: Real>(rate: T) -> T {
    let cap = T::lit(TIME_CAP_S);
    if rate <= T::one() / cap {
        cap
    } else {
        T::one() / rate
    }
}

/// Pure-dephasing rate (1/s) for one knob from first (and optionally
/// second) derivatives of f01 in GHz per unit knob.
pub fn dephasing_rate<T: Real>(first: T, second: Option<T>, knob: Knob, noise: &NoiseSpec<T>) -> T {
    let a = noise.amplitude(knob);
    let mut rate = a * ghz_to_rad_per_s(first.abs()) * (T::lit(2.0) * noise.log_factor()).sqrt();
    if let Some(c) = second {
        rate += a * a * ghz_to_rad_per_s(c.abs()) * noise.log_factor();
    }
    rate
}

fn second_derivative<T: Real>(p: &CircuitParams<T>, knob: Knob, f01: T) -> Result<T> {
    let h = fd_step(p, f01, knob);
    let x = p.knob(knob);
    let g = |dx: T| -> Result<T> {
        let q = p.with_knob(knob, x + dx);
        gradient_from_spectrum(&solve(&q, 2)?, &q, knob)
    };
    Ok((g(h)? - g(-h)?) / (T::lit(2.0) * h))
}

fn dephasing_from<T: Real>(s: &Spectrum<T>, p: &CircuitParams<T>, noise: &NoiseSpec<T>, knob: Knob) -> Result<T> {
    let first = gradient_from_spectrum(s, p, knob)?;
    let second = if noise.second_order { Some(second_derivative(p, knob, s.f01())?) } else { None };
    Ok(dephasing_rate(first, second, knob, noise))
}

/// 1/f pure-dephasing time for one knob, capped at [`TIME_CAP_S`].
pub fn tphi_1f<T: Real>(p: &CircuitParams<T>, noise: &NoiseSpec<T>, knob: Knob) -> Result<T> {
    noise.validate()?;
    let s = solve(p, 2)?;
    Ok(capped(dephasing_from(&s, p, noise, knob)?))
}

struct TwoLevelRates<T> {
    flux: T,
    dielectric: T,
}

fn two_level_rates<T: Real>(s: &Spectrum<T>, p: &CircuitParams<T>, noise: &NoiseSpec<T>) -> Result<TwoLevelRates<T>> {
    let f01 = s.require_split(0, 1)?;
    let (v0, v1) = (s.state(0)?, s.state(1)?);
    let m_flux = flux_coupling_operator(p)?.matrix_element(v0, v1).norm();
    let m_n = number_operator(p.n_trunc, T::zero()).matrix_element(v0, v1).norm();
    let (fd, fu) = flux_pair_rates(m_flux, f01, noise);
    let (dd, du) = dielectric_pair_rates(m_n, f01, p.ec, noise);
    Ok(TwoLevelRates { flux: fd + fu, dielectric: dd + du })
}

/// T1 from 1/f flux noise alone (two-level, both directions).
pub fn t1_flux<T: Real>(p: &CircuitParams<T>, noise: &NoiseSpec<T>) -> Result<T> {
    noise.validate()?;
    Ok(capped(two_level_rates(&solve(p, 2)?, p, noise)?.flux))
}

/// T1 from dielectric loss alone (two-level, both directions).
pub fn t1_dielectric<T: Real>(p: &CircuitParams<T>, noise: &NoiseSpec<T>) -> Result<T> {
    noise.validate()?;
    Ok(capped(two_level_rates(&solve(p, 2)?, p, noise)?.dielectric))
}

pub fn coherence_report<T: Real>(p: &CircuitParams<T>, noise: &NoiseSpec<T>) -> Result<CoherenceReport<T>> {
    coherence_report_with(p, noise, &CoherenceOptions::default())
}

pub fn coherence_report_with<T: Real>(
    p: &CircuitParams<T>,
    noise: &NoiseSpec<T>,
    opts: &CoherenceOptions,
) -> Result<CoherenceReport<T>> {
    noise.validate()?;
    let levels = opts.thermal_levels.unwrap_or(2);
    if levels < 2 {
        return Err(invalid("thermal_levels", "need at least the two qubit levels"));
    }
    let s = solve(p, levels)?;
    let f01 = s.require_split(0, 1)?;
    let two = two_level_rates(&s, p, noise)?;
    let g_phi_flux = dephasing_from(&s, p, noise, Knob::Flux)?;
    let g_phi_charge = dephasing_from(&s, p, noise, Knob::Charge)?;
    let g_phi = g_phi_flux + g_phi_charge;

    let (gamma1, decoherence, thermal) = match opts.thermal_levels {
        None => {
            let g1 = two.flux + two.dielectric;
            (g1, g1 * T::lit(0.5), None)
        }
        Some(n_levels) => {
            let r = rate_matrix_from_spectrum(&s, p, noise, n_levels)?;
            let eff = effective_qubit_rates(&r)?;
            let half = if opts.thermal_dephasing { eff.gamma2 } else { eff.gamma1 * T::lit(0.5) };
            let summary = ThermalSummary {
                n_levels,
                gamma1_eff: eff.gamma1,
                gamma2_eff: eff.gamma2,
                gamma2_in_t2: opts.thermal_dephasing,
                regularized_pairs: r.regularized_pairs.len(),
            };
            (eff.gamma1, half, Some(summary))
        }
    };

    let t1_flux = capped(two.flux);
    let t1_dielectric = capped(two.dielectric);
    let tphi_flux = capped(g_phi_flux);
    let tphi_charge = capped(g_phi_charge);
    let candidates = [
        (Channel::FluxDecay, t1_flux),
        (Channel::DielectricDecay, t1_dielectric),
        (Channel::FluxDephasing, tphi_flux),
        (Channel::ChargeDephasing, tphi_charge),
    ];
    let limiting_channel = candidates
        .iter()
        .fold(candidates[0], |best, &c| if c.1 < best.1 { c } else { best })
        .0;

    Ok(CoherenceReport {
        f01_ghz: f01,
        t1_flux,
        t1_dielectric,
        t1_total: capped(gamma1),
        tphi_flux,
        tphi_charge,
        tphi_total: capped(g_phi),
        t2: capped(decoherence + g_phi),
        limiting_channel,
        thermal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::thermal_ghz;

    fn fig8(ratio_ej2_ec: f64, dphi: f64) -> CircuitParams<f64> {
        let ec = 0.5;
        CircuitParams::<f64>::from_ratio(ec, ratio_ej2_ec * ec, -0.1, 0.01, dphi, 0.25, 40)
    }

    #[test]
    fn detailed_balance_per_channel() {
        let noise = NoiseSpec::<f64>::default();
        for f in [0.05, 0.5, 3.0] {
            let boltz = (-f / thermal_ghz(noise.temperature)).exp();
            let (d, u) = flux_pair_rates(10.0, f, &noise);
            assert!((u / d - boltz).abs() < 1e-12 * boltz.max(1e-300));
            let (d, u) = dielectric_pair_rates(0.3, f, 0.5, &noise);
            assert!((u / d - boltz).abs() < 1e-12 * boltz.max(1e-300));
        }
    }

    #[test]
    fn zero_temperature_kills_absorption() {
        let noise = NoiseSpec { temperature: 1e-9, ..NoiseSpec::<f64>::default() };
        assert_eq!(flux_pair_rates(1.0, 0.5, &noise).1, 0.0);
        assert_eq!(dielectric_pair_rates(1.0, 0.5, 0.5, &noise).1, 0.0);
    }

    #[test]
    fn amplitude_scaling_laws() {
        let p = fig8(20.0, 1e-4);
        let n1 = NoiseSpec::<f64>::default();
        let n2 = NoiseSpec { a_phi: 2e-6, a_ng: 2e-4, ..n1 };
        let r1 = coherence_report(&p, &n1).unwrap();
        let r2 = coherence_report(&p, &n2).unwrap();
        assert!((r1.t1_flux / r2.t1_flux - 4.0).abs() < 1e-9);
        assert!((r1.tphi_flux / r2.tphi_flux - 2.0).abs() < 1e-9);
        assert!((r1.tphi_charge / r2.tphi_charge - 2.0).abs() < 1e-9);
        assert_eq!(r1.t1_dielectric, r2.t1_dielectric);
    }

    #[test]
    fn charge_units_switch_halves_amplitude() {
        let p = fig8(1.0, 1e-3);
        let cp = NoiseSpec::<f64>::default();
        let el = NoiseSpec { charge_units: ChargeUnits::Electrons, ..cp };
        let a = tphi_1f(&p, &cp, Knob::Charge).unwrap();
        let b = tphi_1f(&p, &el, Knob::Charge).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rates_add_up() {
        let p = fig8(20.0, 1e-4);
        let r = coherence_report(&p, &NoiseSpec::default()).unwrap();
        let g1 = 1.0 / r.t1_flux + 1.0 / r.t1_dielectric;
        assert!((1.0 / r.t1_total - g1).abs() < 1e-12 * g1);
        let gphi = 1.0 / r.tphi_flux + 1.0 / r.tphi_charge;
        assert!((1.0 / r.tphi_total - gphi).abs() < 1e-12 * gphi);
        let g2 = 0.5 / r.t1_total + 1.0 / r.tphi_total;
        assert!((1.0 / r.t2 - g2).abs() < 1e-12 * g2);
        assert!(r.t2 <= 2.0 * r.t1_total && r.t2 <= r.tphi_total);
    }

    #[test]
    fn sweet_spot_hits_cap() {
        let p = CircuitParams { ec: 1.0, ejs1: 0.0, ejs2: 10.0, d1: 0.0, d2: 0.0, dphi: 0.0, ng: 0.0, n_trunc: 25 };
        let t = tphi_1f(&p, &NoiseSpec::default(), Knob::Flux).unwrap();
        assert_eq!(t, TIME_CAP_S);
        assert_eq!(t1_dielectric(&p, &NoiseSpec::default()).unwrap(), TIME_CAP_S);
    }

    #[test]
    fn transmon_dielectric_scaling() {
        // Gamma ~ 2 pi f01 / Q for a harmonic transmon.
        let ec = 0.25;
        let p = CircuitParams { ec, ejs1: -50.0 * ec, ejs2: 0.0, d1: 0.0, d2: 0.0, dphi: -0.5, ng: 0.25, n_trunc: 30 };
        let noise = NoiseSpec::<f64>::default();
        let f01 = solve(&p, 2).unwrap().f01();
        let t1 = t1_dielectric(&p, &noise).unwrap();
        let reference = noise.q_cap / (2.0 * std::f64::consts::PI * f01 * 1e9);
        assert!((t1 / reference) > 0.5 && (t1 / reference) < 2.0, "{t1} vs {reference}");
    }

    #[test]
    fn flux_dominates_decay_in_protected_regime() {
        for dphi in [1e-5, 1e-4, 1e-3] {
            let r = coherence_report(&fig8(20.0, dphi), &NoiseSpec::default()).unwrap();
            assert!(r.t1_dielectric > r.t1_flux, "dphi {dphi}");
        }
    }

    #[test]
    fn second_order_only_adds() {
        let p = fig8(20.0, 1e-5);
        let n1 = NoiseSpec::<f64>::default();
        let n2 = NoiseSpec { second_order: true, ..n1 };
        let a = tphi_1f(&p, &n1, Knob::Flux).unwrap();
        let b = tphi_1f(&p, &n2, Knob::Flux).unwrap();
        assert!(b <= a);
    }

    #[test]
    fn degenerate_point_is_an_error() {
        let p = CircuitParams { ec: 1.0, ejs1: 0.0, ejs2: 20.0, d1: 0.0, d2: 0.0, dphi: 0.0, ng: 0.5, n_trunc: 30 };
        assert!(matches!(coherence_report(&p, &NoiseSpec::default()), Err(crate::Error::Degenerate { .. })));
    }

    #[test]
    fn report_round_trips_through_json() {
        let r = coherence_report_with(&fig8(20.0, 1e-4), &NoiseSpec::default(), &CoherenceOptions::thermal(4)).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        let back: CoherenceReport<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn noise_spec_rejects_unknown_and_nonpositive() {
        assert!(serde_json::from_str::<NoiseSpec<f64>>(r#"{"a_flux": 1e-6}"#).is_err());
        let n: NoiseSpec<f64> = serde_json::from_str(r#"{"temperature": 0.02}"#).unwrap();
        assert_eq!(n.a_phi, 1e-6);
        assert!(NoiseSpec { q_cap: 0.0, ..n }.validate().is_err());
    }
}
