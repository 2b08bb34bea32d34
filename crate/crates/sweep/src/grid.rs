use cos2phi::NoiseSpec64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Result, SweepError};

/// Lowest charging energy considered realistic, GHz.
pub const MIN_EC_GHZ: f64 = 1e-3;
/// Default lower bound on the flux offset, flux quanta.
pub const MIN_DPHI: f64 = 1e-5;

/// `points` values log-spaced from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogAxis {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl LogAxis {
    pub const fn new(start: f64, stop: f64, points: usize) -> Self {
        Self { start, stop, points }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let (a, b) = (self.start.log10(), self.stop.log10());
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| match i {
                0 => self.start,
                i if i == self.points - 1 => self.stop,
                i => 10f64.powf(a + (b - a) * i as f64 / n),
            })
            .collect()
    }

    fn validate(&self, name: &'static str) -> Result<()> {
        let ok = self.points >= 1
            && self.start.is_finite()
            && self.stop.is_finite()
            && self.start > 0.0
            && (self.stop > self.start || (self.points == 1 && self.stop == self.start));
        if !ok {
            return Err(SweepError::Grid(format!(
                "{name}: need 0 < start < stop with points >= 2, or start == stop with one point (got {self:?})"
            )));
        }
        Ok(())
    }
}

/// A three-axis sweep with everything else held fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub ejs2: LogAxis,
    pub ec: LogAxis,
    pub dphi: LogAxis,
    /// E_JS2 / E_JS1.
    pub ratio: f64,
    pub d: f64,
    pub ng: f64,
    #[serde(default)]
    pub noise: NoiseSpec64,
    /// Levels in the thermal reduction; `None` for the plain two-level rates.
    #[serde(default = "default_thermal_levels")]
    pub thermal_levels: Option<usize>,
    /// Permit E_C below 1 MHz or dphi below 1e-5.
    #[serde(default)]
    pub allow_outside_envelope: bool,
}

fn default_thermal_levels() -> Option<usize> {
    Some(4)
}

impl SweepGrid {
    /// 21 x 21 x 11 desk-scale grid.
    pub fn reduced(ratio: f64) -> Self {
        Self {
            ejs2: LogAxis::new(0.05, 50.0, 21),
            ec: LogAxis::new(1e-3, 20.0, 21),
            dphi: LogAxis::new(1e-5, 9e-3, 11),
            ratio,
            d: 0.01,
            ng: 0.25,
            noise: NoiseSpec64::default(),
            thermal_levels: default_thermal_levels(),
            allow_outside_envelope: false,
        }
    }

    /// The 401 x 401 x 101 resolution of the original maps. Hours of CPU.
    pub fn full(ratio: f64) -> Self {
        let mut g = Self::reduced(ratio);
        g.ejs2.points = 401;
        g.ec.points = 401;
        g.dphi.points = 101;
        g
    }

    pub fn validate(&self) -> Result<()> {
        self.ejs2.validate("ejs2")?;
        self.ec.validate("ec")?;
        self.dphi.validate("dphi")?;
        if !(self.ratio.is_finite() && self.ratio != 0.0) {
            return Err(SweepError::Grid("ratio must be finite and non-zero".into()));
        }
        if !(self.d.abs() < 1.0 && self.ng.is_finite()) {
            return Err(SweepError::Grid("need |d| < 1 and finite n_g".into()));
        }
        if matches!(self.thermal_levels, Some(n) if n < 2) {
            return Err(SweepError::Grid("thermal_levels must be at least 2".into()));
        }
        self.noise.validate()?;
        if !self.allow_outside_envelope {
            if self.ec.start < MIN_EC_GHZ {
                return Err(SweepError::Grid(format!("E_C below {MIN_EC_GHZ} GHz; set allow_outside_envelope")));
            }
            if self.dphi.start < MIN_DPHI {
                return Err(SweepError::Grid(format!("dphi below {MIN_DPHI}; set allow_outside_envelope")));
            }
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.ejs2.points * self.ec.points
    }

    /// (E_JS2, E_C) of cell `i`, E_C running fastest.
    pub fn cell(&self, i: usize, ejs2: &[f64], ec: &[f64]) -> (f64, f64) {
        (ejs2[i / self.ec.points], ec[i % self.ec.points])
    }

    /// Hex SHA-256 of the canonical JSON encoding, truncated to 16 digits.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("grid serializes");
        hex::encode(&Sha256::digest(json.as_bytes())[..8])
    }
}
