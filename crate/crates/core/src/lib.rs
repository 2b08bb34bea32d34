//! Numerics for interference-based cos(2 phi) superconducting qubits:
//! charge-basis Hamiltonians, spectra, matrix elements, 1/f and dielectric
//! coherence estimates, multilevel thermal rate reduction, semiclassical
//! inter-well formulas and Josephson current-phase harmonics.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below are what most callers want.

pub mod chargebasis;
pub mod cpr;
pub mod circuit;
pub mod elements;
pub mod error;
pub mod linalg;
pub mod noise;
mod scalar;
pub mod semiclassics;
pub mod spectrum;
pub mod thermal;
pub mod units;

pub use chargebasis::ChargeOperator;
pub use circuit::{build_hamiltonian, CircuitParams, Knob};
pub use error::{Error, Result};
pub use scalar::Real;
pub use cpr::HarmonicSeries;
pub use elements::MatrixElementReport;
pub use noise::{CoherenceReport, NoiseSpec};
pub use semiclassics::TwoLevelModel;
pub use spectrum::Spectrum;
pub use thermal::RateMatrix;

pub type ChargeOperator64 = ChargeOperator<f64>;
pub type CircuitParams64 = CircuitParams<f64>;
pub type Spectrum64 = Spectrum<f64>;
pub type MatrixElementReport64 = MatrixElementReport<f64>;
pub type NoiseSpec64 = NoiseSpec<f64>;
pub type CoherenceReport64 = CoherenceReport<f64>;
pub type RateMatrix64 = RateMatrix<f64>;
pub type TwoLevelModel64 = TwoLevelModel<f64>;
pub type HarmonicSeries64 = HarmonicSeries<f64>;

pub type ChargeOperator32 = ChargeOperator<f32>;
pub type CircuitParams32 = CircuitParams<f32>;
pub type Spectrum32 = Spectrum<f32>;
pub type MatrixElementReport32 = MatrixElementReport<f32>;
pub type NoiseSpec32 = NoiseSpec<f32>;
pub type CoherenceReport32 = CoherenceReport<f32>;
pub type RateMatrix32 = RateMatrix<f32>;
pub type TwoLevelModel32 = TwoLevelModel<f32>;
pub type HarmonicSeries32 = HarmonicSeries<f32>;
