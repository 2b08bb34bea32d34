//! WKB-level inter-well physics of the cos(2 phi) potential: the tunnelling
//! coupling between the wells at 0 and pi, the flux window over which they
//! stay hybridized, and the resulting two-level dispersion.

use serde::{Deserialize, Serialize};

use crate::circuit::CircuitParams;
use crate::error::{Error, Result};
use crate::Real;

/// f01 = 2 sqrt(kappa^2 + (alpha dphi)^2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelModel<T> {
    /// |kappa| in GHz.
    pub kappa: T,
    /// Sign of cos(pi n_g), +1 or -1 (0 at half-integer offset).
    pub kappa_sign: T,
    /// pi |E_JS1|, GHz per flux quantum.
    pub alpha: T,
    /// kappa / alpha in flux quanta; infinite when alpha = 0.
    pub dphi_max: T,
}

/// Signed inter-well coupling,
/// 8 E_C sqrt(2/pi) (2 E_JS2/E_C)^(3/4) exp(-sqrt(2 E_JS2/E_C)) cos(pi n_g).
pub fn kappa<T: Real>(ec: T, ejs2: T, ng: T) -> T {
    let x = T::lit(2.0) * ejs2 / ec;
    let mut c = (T::PI() * ng).cos();
    // cos(pi/2) rounds to ~1e-16; keep the half-integer zero exact.
    if c.abs() <= T::lit(4.0) * T::epsilon() {
        c = T::zero();
    }
    T::lit(8.0) * ec * (T::lit(2.0) / T::PI()).sqrt() * x.powf(T::lit(0.75)) * (-x.sqrt()).exp() * c
}

pub fn two_level_model<T: Real>(p: &CircuitParams<T>) -> Result<TwoLevelModel<T>> {
    p.validate()?;
    let k = kappa(p.ec, p.ejs2, p.ng);
    let alpha = T::PI() * p.ejs1.abs();
    let kappa_sign = if k > T::zero() {
        T::one()
    } else if k < T::zero() {
        -T::one()
    } else {
        T::zero()
    };
    Ok(TwoLevelModel { kappa: k.abs(), kappa_sign, alpha, dphi_max: k.abs() / alpha })
}

/// kappa / (pi |E_JS1|) in flux quanta.
pub fn sweetness<T: Real>(p: &CircuitParams<T>) -> Result<T> {
    if p.ejs1 == T::zero() {
        return Err(Error::VanishingFirstHarmonic);
    }
    Ok(two_level_model(p)?.dphi_max)
}

pub fn two_level_f01<T: Real>(m: &TwoLevelModel<T>, dphi: T) -> T {
    T::lit(2.0) * m.kappa.hypot(m.alpha * dphi)
}
