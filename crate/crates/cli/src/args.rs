//! Command-line surface. Every subcommand resolves to a [`RunConfig`]:
//! JSON inputs first, then individual flags on top.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use cos2phi::noise::ChargeUnits;
use cos2phi::{CircuitParams64, NoiseSpec64};
use cos2phi_sweep::{LogAxis, OptimizeSpec, SweepGrid};
use serde::de::DeserializeOwned;

use crate::config::{CprModel, Figure, Format, RunConfig, Scan, ScanKnob, SweepRun, Task, UsageError};
use crate::figures::DEFAULT_RATIO;

#[derive(Debug, Parser)]
#[command(name = "cos2phi", version, about = "Spectra, coherence estimates and parameter sweeps for cos(2phi) qubits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lowest eigenenergies of one circuit.
    Spectrum {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Number of levels to report.
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Relaxation matrix elements, at one point or along a scan.
    Elements {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// T1, T_phi and T2 with per-channel breakdown.
    Coherence {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Use the multilevel thermal reduction over this many levels.
        #[arg(long)]
        thermal_levels: Option<usize>,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Multilevel rate matrix and effective qubit rates.
    Thermal {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Inter-well coupling, sweet-spot width and the two-level f01 model.
    Semiclassics {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Josephson harmonics of junction models, or the implementation table.
    Cpr {
        #[arg(long, value_enum, default_value = "table")]
        model: CprKind,
        /// Channel transparency for `transparent`.
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        /// Junction asymmetry for `rhombus`.
        #[arg(long, default_value_t = 0.0)]
        eta: f64,
        #[arg(long, default_value_t = 4)]
        max_harmonic: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Best-T2 map over (E_JS2, E_C), optimizing dphi per cell.
    Sweep {
        /// SweepGrid JSON; the reduced 21 x 21 x 11 grid when absent.
        #[arg(long)]
        grid: Option<PathBuf>,
        /// E_JS2 / E_JS1.
        #[arg(long, allow_hyphen_values = true)]
        ratio: Option<f64>,
        /// 401 x 401 x 101 points. Hours of CPU.
        #[arg(long)]
        full: bool,
        #[arg(long, allow_hyphen_values = true)]
        ng: Option<f64>,
        #[arg(long)]
        d: Option<f64>,
        #[arg(long)]
        thermal_levels: Option<usize>,
        /// Plain two-level rates instead of the thermal reduction.
        #[arg(long, conflicts_with = "thermal_levels")]
        no_thermal: bool,
        #[arg(long)]
        checkpoint_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 21)]
        chunk_cells: usize,
        #[arg(long)]
        stop_after_chunks: Option<usize>,
        #[arg(long, env = "COS2PHI_WORKERS")]
        workers: Option<usize>,
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Maximize T2 inside a parameter box.
    Optimize {
        /// OptimizeSpec JSON.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        ratio: Option<f64>,
        /// Hold f01 at this value (GHz).
        #[arg(long)]
        target_f01: Option<f64>,
        #[arg(long, num_args = 2, value_names = ["LOW", "HIGH"])]
        ejs2_bounds: Option<Vec<f64>>,
        #[arg(long, num_args = 2, value_names = ["LOW", "HIGH"])]
        ec_bounds: Option<Vec<f64>>,
        #[arg(long, num_args = 2, value_names = ["LOW", "HIGH"])]
        dphi_bounds: Option<Vec<f64>>,
        #[arg(long)]
        thermal_levels: Option<usize>,
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Data table (and optionally a plot script) for one figure.
    Figures {
        #[arg(value_enum)]
        figure: Figure,
        /// Restrict to one E_JS2/E_C.
        #[arg(long)]
        ejs2_over_ec: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        ratio: Option<f64>,
        #[arg(long, env = "COS2PHI_WORKERS")]
        workers: Option<usize>,
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Execute a saved run configuration (see --print-config).
    Run {
        config: PathBuf,
        /// Overrides the configured output path.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CprKind {
    Transparent,
    Rhombus,
    Table,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CircuitArgs {
    /// CircuitParams JSON; flags below override its fields.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Charging energy, GHz.
    #[arg(long, allow_hyphen_values = true)]
    pub ec: Option<f64>,
    /// First-harmonic amplitude, GHz.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "ratio")]
    pub ejs1: Option<f64>,
    /// Second-harmonic amplitude, GHz.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "ejs2_over_ec")]
    pub ejs2: Option<f64>,
    #[arg(long)]
    pub ejs2_over_ec: Option<f64>,
    /// E_JS2 / E_JS1.
    #[arg(long, allow_hyphen_values = true)]
    pub ratio: Option<f64>,
    /// Common asymmetry d1 = d2.
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub d1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub d2: Option<f64>,
    /// Flux offset from half a flux quantum.
    #[arg(long, allow_hyphen_values = true)]
    pub dphi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub ng: Option<f64>,
    /// Fixed charge cutoff; converged automatically otherwise.
    #[arg(long, conflicts_with = "auto_truncation")]
    pub n_trunc: Option<usize>,
    /// Converge the cutoff even when the params file sets one.
    #[arg(long)]
    pub auto_truncation: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct NoiseArgs {
    /// NoiseSpec JSON; flags below override its fields.
    #[arg(long)]
    pub noise: Option<PathBuf>,
    /// 1/f flux amplitude, flux quanta.
    #[arg(long)]
    pub a_phi: Option<f64>,
    /// 1/f charge amplitude.
    #[arg(long)]
    pub a_ng: Option<f64>,
    #[arg(long, value_enum)]
    pub charge_units: Option<ChargeUnitsArg>,
    #[arg(long)]
    pub q_cap: Option<f64>,
    /// Kelvin.
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub second_order: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ChargeUnitsArg {
    CooperPairs,
    Electrons,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScanArgs {
    /// Scan this knob instead of evaluating a single point.
    #[arg(long, value_enum, requires_all = ["from", "to"])]
    pub scan: Option<ScanKnob>,
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 41)]
    pub points: usize,
    /// Evenly spaced instead of log spaced.
    #[arg(long)]
    pub linear: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also write a matplotlib script next to the output.
    #[arg(long)]
    pub plot: bool,
    /// Exit successfully even if degenerate points were flagged.
    #[arg(long)]
    pub allow_degenerate: bool,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long)]
    pub print_config: bool,
}

pub fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T, UsageError> {
    let text = fs::read_to_string(path).map_err(|e| UsageError::field(what, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| UsageError::field(what, format!("{}: {e}", path.display())))
}

/// Default circuit: E_C = 0.5 GHz, E_JS2/E_C = 20, ratio -0.1,
/// d = 1%, dphi = 1e-5, n_g = 0.25.
pub fn default_params() -> CircuitParams64 {
    CircuitParams64::from_ratio(0.5, 10.0, DEFAULT_RATIO, 0.01, 1e-5, 0.25, 2)
}

impl CircuitArgs {
    /// Returns the params and whether the cutoff should be converged.
    pub fn resolve(&self) -> Result<(CircuitParams64, bool), UsageError> {
        let (mut p, mut auto) = match &self.params {
            Some(path) => (read_json::<CircuitParams64>(path, "params")?, false),
            None => (default_params(), true),
        };
        // The harmonic ratio is kept fixed when E_JS2 moves, unless E_JS1 is given.
        let ratio = self.ratio.or((p.ejs1 != 0.0).then(|| p.ratio()));
        if let Some(ec) = self.ec {
            p.ec = ec;
        }
        if let Some(e) = self.ejs2 {
            p.ejs2 = e;
        }
        if let Some(r) = self.ejs2_over_ec {
            p.ejs2 = r * p.ec;
        }
        match (self.ejs1, ratio) {
            (Some(e), _) => p.ejs1 = e,
            (None, Some(r)) if r == 0.0 => return Err(UsageError::field("ratio", "must be non-zero")),
            (None, Some(r)) => p.ejs1 = p.ejs2 / r,
            (None, None) => {}
        }
        if let Some(d) = self.d {
            p.d1 = d;
            p.d2 = d;
        }
        if let Some(d) = self.d1 {
            p.d1 = d;
        }
        if let Some(d) = self.d2 {
            p.d2 = d;
        }
        if let Some(x) = self.dphi {
            p.dphi = x;
        }
        if let Some(x) = self.ng {
            p.ng = x;
        }
        if let Some(n) = self.n_trunc {
            p.n_trunc = n;
            auto = false;
        }
        if self.auto_truncation {
            auto = true;
        }
        Ok((p, auto))
    }
}

impl NoiseArgs {
    pub fn resolve(&self, base: NoiseSpec64) -> Result<NoiseSpec64, UsageError> {
        let mut n = match &self.noise {
            Some(path) => read_json(path, "noise")?,
            None => base,
        };
        if let Some(x) = self.a_phi {
            n.a_phi = x;
        }
        if let Some(x) = self.a_ng {
            n.a_ng = x;
        }
        if let Some(u) = self.charge_units {
            n.charge_units = match u {
                ChargeUnitsArg::CooperPairs => ChargeUnits::CooperPairs,
                ChargeUnitsArg::Electrons => ChargeUnits::Electrons,
            };
        }
        if let Some(x) = self.q_cap {
            n.q_cap = x;
        }
        if let Some(x) = self.temperature {
            n.temperature = x;
        }
        if self.second_order {
            n.second_order = true;
        }
        Ok(n)
    }
}

impl ScanArgs {
    fn resolve(&self) -> Option<Scan> {
        let knob = self.scan?;
        Some(Scan { knob, start: self.from?, stop: self.to?, points: self.points, log: !self.linear })
    }
}

fn apply_output(cfg: &mut RunConfig, out: &OutputArgs) {
    cfg.output = out.output.clone();
    cfg.format = out.format;
    cfg.plot = out.plot;
    cfg.allow_degenerate = out.allow_degenerate;
}

fn pair(v: &Option<Vec<f64>>, base: (f64, f64)) -> (f64, f64) {
    v.as_ref().map_or(base, |v| (v[0], v[1]))
}

/// What `main` should do after parsing.
pub enum Resolved {
    Run(RunConfig),
    Print(RunConfig),
}

impl Command {
    pub fn resolve(&self) -> Result<Resolved, UsageError> {
        let with_params = |task, circuit: &CircuitArgs| -> Result<RunConfig, UsageError> {
            let (p, auto) = circuit.resolve()?;
            let mut cfg = RunConfig::new(task);
            cfg.params = Some(p);
            cfg.auto_truncation = auto;
            Ok(cfg)
        };
        let (cfg, out) = match self {
            Command::Spectrum { circuit, levels, out } => (with_params(Task::Spectrum { levels: *levels }, circuit)?, out),
            Command::Elements { circuit, scan, out } => (with_params(Task::Elements { scan: scan.resolve() }, circuit)?, out),
            Command::Coherence { circuit, noise, thermal_levels, scan, out } => {
                let mut cfg = with_params(Task::Coherence { thermal_levels: *thermal_levels, scan: scan.resolve() }, circuit)?;
                cfg.noise = noise.resolve(NoiseSpec64::default())?;
                (cfg, out)
            }
            Command::Thermal { circuit, noise, levels, out } => {
                let mut cfg = with_params(Task::Thermal { levels: *levels }, circuit)?;
                cfg.noise = noise.resolve(NoiseSpec64::default())?;
                (cfg, out)
            }
            Command::Semiclassics { circuit, out } => (with_params(Task::Semiclassics, circuit)?, out),
            Command::Cpr { model, tau, eta, max_harmonic, out } => {
                let model = match model {
                    CprKind::Transparent => CprModel::Transparent { tau: *tau, max_harmonic: *max_harmonic },
                    CprKind::Rhombus => CprModel::Rhombus { eta: *eta, max_harmonic: *max_harmonic },
                    CprKind::Table => CprModel::Table,
                };
                (RunConfig::new(Task::Cpr { model }), out)
            }
            Command::Sweep {
                grid,
                ratio,
                full,
                ng,
                d,
                thermal_levels,
                no_thermal,
                checkpoint_dir,
                chunk_cells,
                stop_after_chunks,
                workers,
                noise,
                out,
            } => {
                let mut g = match grid {
                    Some(path) => read_json::<SweepGrid>(path, "grid")?,
                    None => SweepGrid::reduced(DEFAULT_RATIO),
                };
                if *full {
                    let f = SweepGrid::full(g.ratio);
                    g.ejs2 = LogAxis { points: f.ejs2.points, ..g.ejs2 };
                    g.ec = LogAxis { points: f.ec.points, ..g.ec };
                    g.dphi = LogAxis { points: f.dphi.points, ..g.dphi };
                }
                if let Some(r) = ratio {
                    g.ratio = *r;
                }
                if let Some(x) = ng {
                    g.ng = *x;
                }
                if let Some(x) = d {
                    g.d = *x;
                }
                if thermal_levels.is_some() {
                    g.thermal_levels = *thermal_levels;
                }
                if *no_thermal {
                    g.thermal_levels = None;
                }
                g.noise = noise.resolve(g.noise)?;
                let run = SweepRun {
                    workers: *workers,
                    checkpoint_dir: checkpoint_dir.clone(),
                    chunk_cells: *chunk_cells,
                    stop_after_chunks: *stop_after_chunks,
                };
                let mut cfg = RunConfig::new(Task::Sweep { grid: g.clone(), run });
                cfg.noise = g.noise;
                (cfg, out)
            }
            Command::Optimize { spec, ratio, target_f01, ejs2_bounds, ec_bounds, dphi_bounds, thermal_levels, noise, out } => {
                let mut s = match spec {
                    Some(path) => read_json::<OptimizeSpec>(path, "spec")?,
                    None => OptimizeSpec::new(DEFAULT_RATIO),
                };
                if let Some(r) = ratio {
                    s.ratio = *r;
                }
                if target_f01.is_some() {
                    s.target_f01 = *target_f01;
                }
                s.ejs2 = pair(ejs2_bounds, s.ejs2);
                s.ec = pair(ec_bounds, s.ec);
                s.dphi = pair(dphi_bounds, s.dphi);
                if thermal_levels.is_some() {
                    s.thermal_levels = *thermal_levels;
                }
                s.noise = noise.resolve(s.noise)?;
                let mut cfg = RunConfig::new(Task::Optimize { spec: s.clone() });
                cfg.noise = s.noise;
                (cfg, out)
            }
            Command::Figures { figure, ejs2_over_ec, ratio, workers, noise, out } => {
                let mut cfg = RunConfig::new(Task::Figures { figure: *figure, ejs2_over_ec: *ejs2_over_ec, ratio: *ratio, workers: *workers });
                cfg.noise = noise.resolve(NoiseSpec64::default())?;
                (cfg, out)
            }
            Command::Run { config, output } => {
                let mut cfg: RunConfig = read_json(config, "config")?;
                if output.is_some() {
                    cfg.output = output.clone();
                }
                cfg.validate()?;
                return Ok(Resolved::Run(cfg));
            }
        };
        let mut cfg = cfg;
        apply_output(&mut cfg, out);
        cfg.validate()?;
        Ok(if out.print_config { Resolved::Print(cfg) } else { Resolved::Run(cfg) })
    }
}
