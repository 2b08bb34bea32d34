use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use cos2phi::noise::{coherence_report_with, CoherenceOptions};
use cos2phi::spectrum::{converge_truncation, MAX_TRUNCATION};
use cos2phi::{CircuitParams64, Error as CoreError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{classify_limiting_mechanism, temperature_limited, Limits};
use crate::grid::SweepGrid;
use crate::{Result, SweepError};

pub const COLUMNS: [&str; 11] = [
    "ejs2_ghz",
    "ec_ghz",
    "dphi",
    "f01_ghz",
    "t1_s",
    "tphi_s",
    "t2_s",
    "tphi_charge_s",
    "tphi_flux_s",
    "limiting",
    "flags",
];

/// Environment variable read by [`workers_from_env`].
pub const WORKERS_ENV: &str = "COS2PHI_WORKERS";

pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Best-T2 point of one (E_JS2, E_C) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub ejs2_ghz: f64,
    pub ec_ghz: f64,
    /// Optimal flux offset; NaN when no point of the cell could be evaluated.
    pub dphi: f64,
    pub f01_ghz: f64,
    pub t1_s: f64,
    pub tphi_s: f64,
    pub t2_s: f64,
    pub tphi_charge_s: f64,
    pub tphi_flux_s: f64,
    pub limiting: Limits,
    pub flags: Vec<String>,
}

impl SweepRow {
    pub fn is_valid(&self) -> bool {
        self.t2_s.is_finite() && self.dphi.is_finite()
    }

    fn failed(ejs2: f64, ec: f64, grid: &SweepGrid, flags: Vec<String>) -> Self {
        Self {
            ejs2_ghz: ejs2,
            ec_ghz: ec,
            dphi: f64::NAN,
            f01_ghz: f64::NAN,
            t1_s: f64::NAN,
            tphi_s: f64::NAN,
            t2_s: f64::NAN,
            tphi_charge_s: f64::NAN,
            tphi_flux_s: f64::NAN,
            limiting: Limits { temperature: temperature_limited(ejs2, &grid.noise), ..Default::default() },
            flags,
        }
    }

    fn record(&self) -> Vec<String> {
        let num = |x: f64| format!("{x:e}");
        vec![
            num(self.ejs2_ghz),
            num(self.ec_ghz),
            num(self.dphi),
            num(self.f01_ghz),
            num(self.t1_s),
            num(self.tphi_s),
            num(self.t2_s),
            num(self.tphi_charge_s),
            num(self.tphi_flux_s),
            self.limiting.to_string(),
            self.flags.join(";"),
        ]
    }

    fn from_record(r: &csv::StringRecord) -> Result<Self> {
        if r.len() != COLUMNS.len() {
            return Err(SweepError::Checkpoint(format!("expected {} fields, got {}", COLUMNS.len(), r.len())));
        }
        let num = |i: usize| -> Result<f64> {
            r[i].parse().map_err(|_| SweepError::Checkpoint(format!("bad number {:?} in {}", &r[i], COLUMNS[i])))
        };
        Ok(Self {
            ejs2_ghz: num(0)?,
            ec_ghz: num(1)?,
            dphi: num(2)?,
            f01_ghz: num(3)?,
            t1_s: num(4)?,
            tphi_s: num(5)?,
            t2_s: num(6)?,
            tphi_charge_s: num(7)?,
            tphi_flux_s: num(8)?,
            limiting: r[9].parse().map_err(SweepError::Checkpoint)?,
            flags: if r[10].is_empty() { vec![] } else { r[10].split(';').map(str::to_string).collect() },
        })
    }
}

pub fn write_rows<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(COLUMNS)?;
    for row in rows {
        out.write_record(row.record())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_rows(path: &Path) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    if rdr.headers()?.iter().ne(COLUMNS) {
        return Err(SweepError::Checkpoint(format!("{}: unexpected header", path.display())));
    }
    rdr.records().map(|r| SweepRow::from_record(&r?)).collect()
}

/// Truncations keyed on the dimensionless circuit: (E_JS2/E_C, ratio, d, n_g, dphi).
///
/// Each entry is computed at E_C = 1, so a value depends only on its key and
/// not on which cell asked first.
#[derive(Debug, Default)]
pub struct TruncationCache {
    map: Mutex<HashMap<[u64; 5], Option<usize>>>,
}

impl TruncationCache {
    /// `None` when the truncation did not converge below the cap.
    pub fn get(&self, p: &CircuitParams64) -> std::result::Result<Option<usize>, CoreError> {
        let r = p.ejs2 / p.ec;
        let key = [r.to_bits(), p.ratio().to_bits(), p.d1.to_bits(), p.ng.to_bits(), p.dphi.to_bits()];
        if let Some(v) = self.map.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        let canonical = CircuitParams64 { ec: 1.0, ejs1: r / p.ratio(), ejs2: r, ..*p };
        let value = match converge_truncation(&canonical) {
            Ok(n) => Some(n),
            Err(CoreError::TruncationNotConverged { .. }) => None,
            Err(e) => return Err(e),
        };
        self.map.lock().unwrap().insert(key, value);
        Ok(value)
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn options(grid: &SweepGrid) -> CoherenceOptions {
    match grid.thermal_levels {
        Some(n) => CoherenceOptions::thermal(n),
        None => CoherenceOptions::default(),
    }
}

/// Scans the flux axis of one cell and keeps the largest T2; ties go to the
/// smaller dphi.
pub fn evaluate_cell(grid: &SweepGrid, ejs2: f64, ec: f64, dphis: &[f64], cache: &TruncationCache) -> SweepRow {
    let base = CircuitParams64::from_ratio(ec, ejs2, grid.ratio, grid.d, dphis[0], grid.ng, 2);
    let mut flags = Vec::new();
    let n_trunc = match cache.get(&base) {
        Ok(Some(n)) => n,
        Ok(None) => {
            flags.push("truncation_not_converged".to_string());
            MAX_TRUNCATION
        }
        Err(e) => return SweepRow::failed(ejs2, ec, grid, vec![format!("error: {e}")]),
    };
    let opts = options(grid);
    let mut best: Option<(CircuitParams64, cos2phi::CoherenceReport64)> = None;
    let (mut degenerate, mut failed) = (0, 0);
    for &dphi in dphis {
        let p = CircuitParams64 { dphi, ..base.with_truncation(n_trunc) };
        match coherence_report_with(&p, &grid.noise, &opts) {
            Ok(r) => {
                if best.as_ref().map_or(true, |(_, b)| r.t2 > b.t2) {
                    best = Some((p, r));
                }
            }
            Err(CoreError::Degenerate { .. }) => degenerate += 1,
            Err(_) => failed += 1,
        }
    }
    if degenerate > 0 {
        flags.push(format!("degenerate:{degenerate}"));
    }
    if failed > 0 {
        flags.push(format!("failed:{failed}"));
    }
    let Some((p, r)) = best else {
        flags.push("no_valid_point".into());
        return SweepRow::failed(ejs2, ec, grid, flags);
    };
    if r.thermal.is_some_and(|t| t.regularized_pairs > 0) {
        flags.push("infrared_regularized".into());
    }
    SweepRow {
        ejs2_ghz: ejs2,
        ec_ghz: ec,
        dphi: p.dphi,
        f01_ghz: r.f01_ghz,
        t1_s: r.t1_total,
        tphi_s: r.tphi_total,
        t2_s: r.t2,
        tphi_charge_s: r.tphi_charge,
        tphi_flux_s: r.tphi_flux,
        limiting: classify_limiting_mechanism(&r, &p, &grid.noise),
        flags,
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Worker threads; `None` uses [`workers_from_env`] or rayon's default.
    pub workers: Option<usize>,
    /// (E_JS2, E_C) cells per checkpoint chunk.
    pub chunk_cells: usize,
    /// Where `<hash>.part<k>.csv` chunks and the `<hash>.json` sidecar live.
    pub checkpoint_dir: Option<PathBuf>,
    /// Stop after computing this many new chunks (for staged runs).
    pub stop_after_chunks: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { workers: None, chunk_cells: 21, checkpoint_dir: None, stop_after_chunks: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config_hash: String,
    pub grid: SweepGrid,
    /// Cell order: E_JS2 outer, E_C inner.
    pub rows: Vec<SweepRow>,
    pub chunks_total: usize,
    pub chunks_done: usize,
    /// Chunks loaded from checkpoints rather than computed.
    pub chunks_resumed: usize,
}

impl SweepResult {
    pub fn is_complete(&self) -> bool {
        self.chunks_done == self.chunks_total
    }

    /// Largest T2 among valid cells not excluded by temperature; ties go to
    /// the smaller E_JS2.
    pub fn best(&self) -> Option<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.is_valid() && !r.limiting.temperature)
            .fold(None, |best: Option<&SweepRow>, r| match best {
                Some(b) if r.t2_s < b.t2_s || (r.t2_s == b.t2_s && r.ejs2_ghz >= b.ejs2_ghz) => Some(b),
                _ => Some(r),
            })
    }

    /// Fraction of valid cells whose optimal dphi is an end of the flux axis.
    pub fn boundary_fraction(&self) -> f64 {
        let axis = self.grid.dphi.values();
        let (lo, hi) = (axis[0], axis[axis.len() - 1]);
        let valid: Vec<_> = self.rows.iter().filter(|r| r.is_valid()).collect();
        if valid.is_empty() {
            return f64::NAN;
        }
        valid.iter().filter(|r| r.dphi == lo || r.dphi == hi).count() as f64 / valid.len() as f64
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        write_rows(&mut buf, &self.rows)?;
        atomic_write(path, &buf)
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    config_hash: &'a str,
    grid: &'a SweepGrid,
    ejs2_axis: Vec<f64>,
    ec_axis: Vec<f64>,
    dphi_axis: Vec<f64>,
    chunk_cells: usize,
    chunks_total: usize,
    columns: [&'static str; 11],
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn chunk_path(dir: &Path, hash: &str, k: usize) -> PathBuf {
    dir.join(format!("{hash}.part{k}.csv"))
}

pub fn sidecar_path(dir: &Path, hash: &str) -> PathBuf {
    dir.join(format!("{hash}.json"))
}

/// A checkpoint is reused only if it covers exactly the expected cells.
fn load_chunk(path: &Path, cells: &[(f64, f64)]) -> Option<Vec<SweepRow>> {
    let rows = read_rows(path).ok()?;
    let matches = rows.len() == cells.len()
        && rows.iter().zip(cells).all(|(r, &(a, b))| r.ejs2_ghz == a && r.ec_ghz == b);
    matches.then_some(rows)
}

pub fn run_sweep(grid: &SweepGrid, opts: &RunOptions) -> Result<SweepResult> {
    run_sweep_with_cache(grid, opts, &TruncationCache::default())
}

pub fn run_sweep_with_cache(grid: &SweepGrid, opts: &RunOptions, cache: &TruncationCache) -> Result<SweepResult> {
    grid.validate()?;
    if opts.chunk_cells == 0 {
        return Err(SweepError::Grid("chunk_cells must be positive".into()));
    }
    let hash = grid.config_hash();
    let (ejs2, ec, dphi) = (grid.ejs2.values(), grid.ec.values(), grid.dphi.values());
    let n_cells = grid.cells();
    let chunks_total = n_cells.div_ceil(opts.chunk_cells);

    if let Some(dir) = &opts.checkpoint_dir {
        fs::create_dir_all(dir)?;
        let sidecar = Sidecar {
            config_hash: &hash,
            grid,
            ejs2_axis: ejs2.clone(),
            ec_axis: ec.clone(),
            dphi_axis: dphi.clone(),
            chunk_cells: opts.chunk_cells,
            chunks_total,
            columns: COLUMNS,
        };
        atomic_write(&sidecar_path(dir, &hash), serde_json::to_string_pretty(&sidecar)?.as_bytes())?;
    }

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.workers.or_else(workers_from_env) {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| SweepError::Pool(e.to_string()))?;

    let mut rows = Vec::with_capacity(n_cells);
    let (mut done, mut resumed, mut computed) = (0, 0, 0);
    for k in 0..chunks_total {
        let range = k * opts.chunk_cells..((k + 1) * opts.chunk_cells).min(n_cells);
        let cells: Vec<(f64, f64)> = range.map(|i| grid.cell(i, &ejs2, &ec)).collect();
        let path = opts.checkpoint_dir.as_ref().map(|d| chunk_path(d, &hash, k));
        if let Some(chunk) = path.as_deref().filter(|p| p.exists()).and_then(|p| load_chunk(p, &cells)) {
            rows.extend(chunk);
            done += 1;
            resumed += 1;
            continue;
        }
        if opts.stop_after_chunks.is_some_and(|n| computed >= n) {
            break;
        }
        let chunk: Vec<SweepRow> =
            pool.install(|| cells.par_iter().map(|&(a, b)| evaluate_cell(grid, a, b, &dphi, cache)).collect());
        if let Some(path) = &path {
            let mut buf = Vec::new();
            write_rows(&mut buf, &chunk)?;
            atomic_write(path, &buf)?;
        }
        rows.extend(chunk);
        done += 1;
        computed += 1;
    }

    Ok(SweepResult { config_hash: hash, grid: grid.clone(), rows, chunks_total, chunks_done: done, chunks_resumed: resumed })
}
