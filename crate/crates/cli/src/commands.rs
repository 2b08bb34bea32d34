use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cos2phi::cpr::{implementation_table, rhombus_harmonics, transparent_junction_harmonics, TableRow};
use cos2phi::elements::matrix_elements_from;
use cos2phi::noise::{coherence_report_with, CoherenceOptions};
use cos2phi::semiclassics::{two_level_f01, two_level_model};
use cos2phi::spectrum::{charge_dispersion, solve};
use cos2phi::thermal::{build_rate_matrix, effective_qubit_rates, EffectiveRates};
use cos2phi::{
    CircuitParams64, CoherenceReport64, Error as CoreError, HarmonicSeries64, MatrixElementReport64, NoiseSpec64,
    RateMatrix64, TwoLevelModel64,
};
use cos2phi_sweep::{optimize_t2, run_sweep, RunOptions};
use serde::{Deserialize, Serialize};

use crate::config::{CprModel, Figure, Format, RunConfig, ScanKnob, Task, UsageError};
use crate::figures::{self, coherence_columns, coherence_scan, truncation_for, FigureOptions};
use crate::plot::emit_plot_script;
use crate::table::Table;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOutput {
    pub params: CircuitParams64,
    pub energies_ghz: Vec<f64>,
    pub f01_ghz: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementsOutput {
    pub params: CircuitParams64,
    pub f01_ghz: f64,
    pub report: MatrixElementReport64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceOutput {
    pub params: CircuitParams64,
    pub noise: NoiseSpec64,
    pub options: CoherenceOptions,
    /// Absent when f01 is degenerate.
    pub report: Option<CoherenceReport64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalOutput {
    pub params: CircuitParams64,
    pub noise: NoiseSpec64,
    pub rates: RateMatrix64,
    pub effective: EffectiveRates<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicsOutput {
    pub params: CircuitParams64,
    pub model: TwoLevelModel64,
    pub f01_model_ghz: f64,
    pub f01_numeric_ghz: f64,
    pub charge_dispersion_ghz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CprOutput {
    Series { series: HarmonicSeries64, ratio: f64 },
    Table { table: Vec<TableRow> },
}

/// What a run produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub degenerate: usize,
    pub files: Vec<PathBuf>,
    /// False when a sweep stopped early on request.
    pub complete: bool,
}

enum Payload {
    Json(String),
    Table(Table, Option<Figure>),
}

fn json<T: Serialize>(value: &T) -> Result<Payload> {
    Ok(Payload::Json(serde_json::to_string_pretty(value)? + "\n"))
}

fn prepared(cfg: &RunConfig) -> Result<CircuitParams64> {
    let p = cfg.params.ok_or_else(|| UsageError::field("params", "required by this subcommand"))?;
    if cfg.auto_truncation {
        Ok(p.with_truncation(truncation_for(&[p])?))
    } else {
        Ok(p)
    }
}

/// Truncation valid across a scan: converged at both ends.
fn prepared_scan(cfg: &RunConfig, knob: ScanKnob, values: &[f64]) -> Result<CircuitParams64> {
    let p = cfg.params.ok_or_else(|| UsageError::field("params", "required by this subcommand"))?;
    if !cfg.auto_truncation {
        return Ok(p);
    }
    let ends = [knob.apply(p, values[0]), knob.apply(p, values[values.len() - 1])];
    Ok(p.with_truncation(truncation_for(&ends)?))
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let mut outcome = Outcome { complete: true, ..Default::default() };
    let payload = match &cfg.task {
        Task::Spectrum { levels } => {
            let p = prepared(cfg)?;
            let s = solve(&p, *levels)?;
            let degenerate = s.is_degenerate(0, 1);
            outcome.degenerate += degenerate as usize;
            json(&SpectrumOutput { params: p, energies_ghz: s.energies.clone(), f01_ghz: s.f01(), degenerate })?
        }
        Task::Elements { scan: None } => {
            let p = prepared(cfg)?;
            let s = solve(&p, 2)?;
            let report = matrix_elements_from(&s, &p)?;
            outcome.degenerate += report.degenerate as usize;
            json(&ElementsOutput { params: p, f01_ghz: s.f01(), report })?
        }
        Task::Elements { scan: Some(scan) } => {
            let values = scan.values();
            let p = prepared_scan(cfg, scan.knob, &values)?;
            let mut t = Table::new(&["ejs2_over_ec", scan.knob.column(), "f01_ghz", "m_n", "m_1phi", "m_2phi"]);
            for &v in &values {
                let q = scan.knob.apply(p, v);
                let s = solve(&q, 2)?;
                let m = matrix_elements_from(&s, &q)?;
                outcome.degenerate += m.degenerate as usize;
                t.push_nums(&[q.ejs2 / q.ec, v, s.f01(), m.m_n, m.m_1phi, m.m_2phi]);
            }
            let fig = (scan.knob == ScanKnob::D).then_some(Figure::Fig5);
            Payload::Table(t, fig)
        }
        Task::Coherence { thermal_levels, scan } => {
            let options = match thermal_levels {
                Some(n) => CoherenceOptions::thermal(*n),
                None => CoherenceOptions::default(),
            };
            match scan {
                None => {
                    let p = prepared(cfg)?;
                    let (report, degenerate) = match coherence_report_with(&p, &cfg.noise, &options) {
                        Ok(r) => (Some(r), false),
                        Err(CoreError::Degenerate { .. }) => (None, true),
                        Err(e) => return Err(e.into()),
                    };
                    outcome.degenerate += degenerate as usize;
                    json(&CoherenceOutput { params: p, noise: cfg.noise, options, report, degenerate })?
                }
                Some(scan) => {
                    let values = scan.values();
                    let p = prepared_scan(cfg, scan.knob, &values)?;
                    let mut t = Table::new(&coherence_columns(scan.knob));
                    outcome.degenerate += coherence_scan(&p, scan.knob, &values, &cfg.noise, &options, &mut t)?;
                    let fig = (scan.knob == ScanKnob::Dphi).then_some(Figure::Fig8);
                    Payload::Table(t, fig)
                }
            }
        }
        Task::Thermal { levels } => {
            let p = prepared(cfg)?;
            let rates = build_rate_matrix(&p, &cfg.noise, *levels)?;
            let effective = effective_qubit_rates(&rates)?;
            json(&ThermalOutput { params: p, noise: cfg.noise, rates, effective })?
        }
        Task::Semiclassics => {
            let p = prepared(cfg)?;
            let model = two_level_model(&p)?;
            let s = solve(&p, 2)?;
            outcome.degenerate += s.is_degenerate(0, 1) as usize;
            json(&SemiclassicsOutput {
                params: p,
                model,
                f01_model_ghz: two_level_f01(&model, p.dphi),
                f01_numeric_ghz: s.f01(),
                charge_dispersion_ghz: charge_dispersion(&p, (0, 1))?,
            })?
        }
        Task::Cpr { model } => match *model {
            CprModel::Transparent { tau, max_harmonic } => {
                let series = transparent_junction_harmonics(tau, max_harmonic)?;
                json(&CprOutput::Series { ratio: series.ratio()?, series })?
            }
            CprModel::Rhombus { eta, max_harmonic } => {
                let series = rhombus_harmonics(eta, max_harmonic)?;
                json(&CprOutput::Series { ratio: series.ratio()?, series })?
            }
            CprModel::Table => json(&CprOutput::Table { table: implementation_table()? })?,
        },
        Task::Sweep { grid, run } => {
            let mut grid = grid.clone();
            grid.noise = cfg.noise;
            let opts = RunOptions {
                workers: run.workers,
                chunk_cells: run.chunk_cells,
                checkpoint_dir: run.checkpoint_dir.clone(),
                stop_after_chunks: run.stop_after_chunks,
            };
            let res = run_sweep(&grid, &opts)?;
            if let Some(dir) = &run.checkpoint_dir {
                outcome.files.push(cos2phi_sweep::run::sidecar_path(dir, &res.config_hash));
            }
            outcome.complete = res.is_complete();
            outcome.degenerate += figures::degenerate_rows(&res.rows);
            Payload::Table(figures::sweep_table(&res.rows), Some(Figure::Fig9))
        }
        Task::Optimize { spec } => {
            let mut spec = spec.clone();
            spec.noise = cfg.noise;
            json(&optimize_t2(&spec)?)?
        }
        Task::Figures { figure, ejs2_over_ec, ratio, workers } => {
            let opts = FigureOptions { ejs2_over_ec: *ejs2_over_ec, ratio: *ratio, noise: cfg.noise, workers: *workers };
            let data = figures::generate(*figure, &opts)?;
            outcome.degenerate += data.degenerate;
            Payload::Table(data.table, Some(*figure))
        }
    };
    outcome.files.extend(emit(cfg, payload)?);
    Ok(outcome)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn emit(cfg: &RunConfig, payload: Payload) -> Result<Vec<PathBuf>> {
    let format = cfg.format();
    let (bytes, table) = match payload {
        Payload::Json(text) => {
            if format == Format::Csv {
                bail!(UsageError::field("format", format!("{} writes JSON only", cfg.task.name())));
            }
            (text.into_bytes(), None)
        }
        Payload::Table(t, fig) => {
            let bytes = match format {
                Format::Csv => t.to_csv_string().into_bytes(),
                Format::Json => (serde_json::to_string_pretty(&t)? + "\n").into_bytes(),
            };
            (bytes, Some((t, fig)))
        }
    };

    let output = match (&cfg.output, &cfg.task) {
        (Some(p), _) => Some(p.clone()),
        (None, Task::Figures { figure, .. }) if cfg.plot => Some(PathBuf::from(format!("{}.csv", figure.tag()))),
        _ => None,
    };
    let mut written = Vec::new();
    match &output {
        Some(path) => {
            write_file(path, &bytes)?;
            written.push(path.clone());
        }
        None => std::io::stdout().lock().write_all(&bytes)?,
    }

    if cfg.plot {
        let path = output.expect("validated: plot has an output path");
        let Some((t, Some(fig))) = table else {
            bail!(UsageError::field("plot", format!("no plot template for {} output", cfg.task.name())));
        };
        if format != Format::Csv {
            bail!(UsageError::field("plot", "plot scripts read CSV; drop --format json"));
        }
        let name = path.file_name().and_then(|n| n.to_str()).context("output file name is not valid UTF-8")?;
        let script = emit_plot_script(&t.columns, fig, name).map_err(|e| UsageError::field("plot", e))?;
        let script_path = path.with_extension("py");
        write_file(&script_path, script.as_bytes())?;
        written.push(script_path);
    }
    Ok(written)
}
