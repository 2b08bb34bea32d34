//! Physical constants and unit helpers. Energies are carried in GHz
//! (E/h), flux in units of the flux quantum, rates in 1/s.

use crate::Real;

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Angular frequency in rad/s for a frequency given in GHz.
#[inline]
pub fn ghz_to_rad_per_s<T: Real>(f_ghz: T) -> T {
    f_ghz * T::lit(2.0e9) * T::PI()
}

/// Thermal energy k_B T / h expressed in GHz.
#[inline]
pub fn thermal_ghz<T: Real>(temperature_k: T) -> T {
    temperature_k * T::lit(BOLTZMANN / PLANCK * 1e-9)
}

/// Bose occupation n(f) = 1 / (exp(h f / k_B T) - 1) for `f` in GHz.
///
/// Returns zero at vanishing temperature and saturates to zero instead of
/// overflowing far above k_B T.
pub fn bose<T: Real>(f_ghz: T, temperature_k: T) -> T {
    let f = f_ghz.abs();
    if temperature_k <= T::zero() {
        return T::zero();
    }
    let x = f / thermal_ghz(temperature_k);
    if x > T::lit(700.0) || !x.is_finite() {
        return T::zero();
    }
    if x <= T::zero() {
        return T::infinity();
    }
    T::one() / x.exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thermal_energy_at_50mk() {
        let t = thermal_ghz(0.05_f64);
        assert!((t - 1.041_838).abs() < 1e-5, "{t}");
    }

    #[test]
    fn bose_limits() {
        assert_eq!(bose(5.0_f64, 0.0), 0.0);
        assert_eq!(bose(1e4_f64, 1e-3), 0.0);
        // classical limit n ~ kT/hf
        let n = bose(1e-6_f64, 0.05);
        assert!((n * 1e-6 / thermal_ghz(0.05) - 1.0).abs() < 1e-5);
    }
}
