//! Fully resolved run description. Flags and input files are merged into a
//! [`RunConfig`] before anything is computed; `--print-config` writes it out
//! and `cos2phi run <file>` executes one.

use std::fmt;
use std::path::PathBuf;

use cos2phi::{CircuitParams64, NoiseSpec64};
use cos2phi_sweep::{OptimizeSpec, SweepGrid};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    /// Circuit for single-point tasks.
    #[serde(default)]
    pub params: Option<CircuitParams64>,
    /// Replace `params.n_trunc` by the converged truncation before solving.
    #[serde(default = "yes")]
    pub auto_truncation: bool,
    #[serde(default)]
    pub noise: NoiseSpec64,
    /// Destination file; standard output when absent.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
    /// Also write a plotting script next to the output.
    #[serde(default)]
    pub plot: bool,
    #[serde(default)]
    pub allow_degenerate: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    Spectrum {
        levels: usize,
    },
    Elements {
        #[serde(default)]
        scan: Option<Scan>,
    },
    Coherence {
        #[serde(default)]
        thermal_levels: Option<usize>,
        #[serde(default)]
        scan: Option<Scan>,
    },
    Thermal {
        levels: usize,
    },
    Semiclassics,
    Cpr {
        model: CprModel,
    },
    Sweep {
        grid: SweepGrid,
        run: SweepRun,
    },
    Optimize {
        spec: OptimizeSpec,
    },
    Figures {
        figure: Figure,
        #[serde(default)]
        ejs2_over_ec: Option<f64>,
        #[serde(default)]
        ratio: Option<f64>,
        #[serde(default)]
        workers: Option<usize>,
    },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Spectrum { .. } => "spectrum",
            Task::Elements { .. } => "elements",
            Task::Coherence { .. } => "coherence",
            Task::Thermal { .. } => "thermal",
            Task::Semiclassics => "semiclassics",
            Task::Cpr { .. } => "cpr",
            Task::Sweep { .. } => "sweep",
            Task::Optimize { .. } => "optimize",
            Task::Figures { .. } => "figures",
        }
    }

    /// Tabular tasks default to CSV, single points to JSON.
    pub fn default_format(&self) -> Format {
        match self {
            Task::Sweep { .. } | Task::Figures { .. } => Format::Csv,
            Task::Elements { scan: Some(_) } | Task::Coherence { scan: Some(_), .. } => Format::Csv,
            _ => Format::Json,
        }
    }

    pub fn needs_params(&self) -> bool {
        matches!(
            self,
            Task::Spectrum { .. } | Task::Elements { .. } | Task::Coherence { .. } | Task::Thermal { .. } | Task::Semiclassics
        )
    }
}

/// One-dimensional scan of a circuit knob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scan {
    pub knob: ScanKnob,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    /// Log spacing; needs start and stop of the same sign.
    pub log: bool,
}

impl Scan {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / n;
                match i {
                    0 => self.start,
                    i if i == self.points - 1 => self.stop,
                    _ if self.log => self.start * (self.stop / self.start).powf(t),
                    _ => self.start + (self.stop - self.start) * t,
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        if self.points == 0 {
            return Err(UsageError::field("scan.points", "must be at least 1"));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(UsageError::field("scan", "start and stop must be finite"));
        }
        if self.log && !(self.start * self.stop > 0.0) {
            return Err(UsageError::field("scan", "log spacing needs start and stop of the same sign, both non-zero"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ScanKnob {
    Dphi,
    /// Common asymmetry d1 = d2.
    D,
    Ng,
}

impl ScanKnob {
    pub fn column(self) -> &'static str {
        match self {
            ScanKnob::Dphi => "dphi",
            ScanKnob::D => "d",
            ScanKnob::Ng => "ng",
        }
    }

    pub fn apply(self, p: CircuitParams64, v: f64) -> CircuitParams64 {
        match self {
            ScanKnob::Dphi => CircuitParams64 { dphi: v, ..p },
            ScanKnob::D => CircuitParams64 { d1: v, d2: v, ..p },
            ScanKnob::Ng => CircuitParams64 { ng: v, ..p },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum CprModel {
    Transparent { tau: f64, max_harmonic: usize },
    Rhombus { eta: f64, max_harmonic: usize },
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRun {
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub checkpoint_dir: Option<PathBuf>,
    pub chunk_cells: usize,
    #[serde(default)]
    pub stop_after_chunks: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    /// Lowest three levels against n_g, pure and interference cases.
    Fig4,
    /// f01 and relaxation figures of merit against asymmetry.
    Fig5,
    /// f01 and figures of merit over (dphi, E_JS2/E_C).
    Fig6,
    /// Flux dispersion around the sweet spot at n_g = 0 and 1/2.
    Fig7,
    /// T_phi and T1 per channel against dphi.
    Fig8,
    /// Best T2 and limiting mechanisms over (E_C, E_JS2).
    Fig9,
}

impl Figure {
    pub fn tag(self) -> &'static str {
        match self {
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Fig8 => "fig8",
            Figure::Fig9 => "fig9",
        }
    }
}

/// Bad input, reported with the offending field; exit status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl UsageError {
    pub fn field(name: &str, reason: impl fmt::Display) -> Self {
        UsageError(format!("{name}: {reason}"))
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

impl RunConfig {
    pub fn new(task: Task) -> Self {
        Self {
            task,
            params: None,
            auto_truncation: true,
            noise: NoiseSpec64::default(),
            output: None,
            format: None,
            plot: false,
            allow_degenerate: false,
        }
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_else(|| self.task.default_format())
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        if self.task.needs_params() {
            let p = self.params.as_ref().ok_or_else(|| UsageError::field("params", "required by this subcommand"))?;
            p.validate().map_err(|e| UsageError::field("params", e))?;
        }
        self.noise.validate().map_err(|e| UsageError::field("noise", e))?;
        match &self.task {
            Task::Spectrum { levels } if *levels < 2 => return Err(UsageError::field("levels", "need at least 2")),
            Task::Thermal { levels } if *levels < 2 => return Err(UsageError::field("levels", "need at least 2")),
            Task::Coherence { thermal_levels: Some(n), .. } if *n < 2 => {
                return Err(UsageError::field("thermal_levels", "need at least 2"))
            }
            Task::Elements { scan: Some(s) } | Task::Coherence { scan: Some(s), .. } => s.validate()?,
            Task::Sweep { grid, run } => {
                grid.validate().map_err(|e| UsageError::field("grid", e))?;
                if run.chunk_cells == 0 {
                    return Err(UsageError::field("run.chunk_cells", "must be positive"));
                }
            }
            Task::Cpr { model: CprModel::Transparent { max_harmonic: 0, .. } | CprModel::Rhombus { max_harmonic: 0, .. } } => {
                return Err(UsageError::field("max_harmonic", "must be at least 1"))
            }
            _ => {}
        }
        if self.plot && self.output.is_none() && !matches!(self.task, Task::Figures { .. }) {
            return Err(UsageError::field("plot", "a plot script needs --output so it can reference the data file"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_endpoints_exact() {
        let s = Scan { knob: ScanKnob::Dphi, start: 1e-6, stop: 1e-2, points: 5, log: true };
        let v = s.values();
        assert_eq!((v[0], v[4]), (1e-6, 1e-2));
        assert!((v[2] / 1e-4 - 1.0).abs() < 1e-12);
        assert!(Scan { log: true, start: 0.0, ..s }.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut c = RunConfig::new(Task::Figures { figure: Figure::Fig8, ejs2_over_ec: Some(20.0), ratio: None, workers: None });
        c.plot = true;
        let text = serde_json::to_string_pretty(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
    }

    #[test]
    fn unknown_fields_are_named() {
        let err = serde_json::from_str::<RunConfig>(r#"{"task":{"subcommand":"semiclassics"},"nosie":{}}"#).unwrap_err();
        assert!(err.to_string().contains("nosie"), "{err}");
    }
}
