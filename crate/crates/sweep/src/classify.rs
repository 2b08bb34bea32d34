use std::fmt;
use std::str::FromStr;

use cos2phi::units::thermal_ghz;
use cos2phi::{CircuitParams64, CoherenceReport64, NoiseSpec64};
use serde::{Deserialize, Serialize};

/// Dephasing times below this mark a channel as limiting, seconds.
pub const DEPHASING_LIMIT_S: f64 = 100e-6;

/// Which mechanisms limit a point. Several may hold at once.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Limits {
    pub temperature: bool,
    pub charge: bool,
    pub flux: bool,
}

impl Limits {
    pub fn is_none(&self) -> bool {
        !(self.temperature || self.charge || self.flux)
    }
}

/// `temperature+charge+flux` in that order, or `none`.
impl fmt::Display for Limits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tags: Vec<&str> = [(self.temperature, "temperature"), (self.charge, "charge"), (self.flux, "flux")]
            .into_iter()
            .filter_map(|(on, tag)| on.then_some(tag))
            .collect();
        if tags.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&tags.join("+"))
        }
    }
}

impl FromStr for Limits {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut l = Limits::default();
        if s == "none" {
            return Ok(l);
        }
        for tag in s.split('+') {
            match tag {
                "temperature" => l.temperature = true,
                "charge" => l.charge = true,
                "flux" => l.flux = true,
                other => return Err(format!("unknown mechanism {other:?}")),
            }
        }
        Ok(l)
    }
}

/// The second harmonic sets the inter-well barrier; below k_B T / h the
/// wells are thermally mixed.
pub fn temperature_limited(ejs2_ghz: f64, noise: &NoiseSpec64) -> bool {
    2.0 * ejs2_ghz.abs() < thermal_ghz(noise.temperature)
}

pub fn classify_limiting_mechanism(report: &CoherenceReport64, params: &CircuitParams64, noise: &NoiseSpec64) -> Limits {
    Limits {
        temperature: temperature_limited(params.ejs2, noise),
        charge: report.tphi_charge < DEPHASING_LIMIT_S,
        flux: report.tphi_flux < DEPHASING_LIMIT_S,
    }
}
