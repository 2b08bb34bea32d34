//! Data behind each figure, one long-format table per figure.

use anyhow::{Context, Result};
use cos2phi::elements::matrix_elements_from;
use cos2phi::noise::{coherence_report_with, CoherenceOptions};
use cos2phi::semiclassics::{two_level_f01, two_level_model};
use cos2phi::spectrum::{converge_truncation, solve, MAX_TRUNCATION};
use cos2phi::{CircuitParams64, Error as CoreError, NoiseSpec64};
use cos2phi_sweep::run::{SweepRow, COLUMNS};
use cos2phi_sweep::{run_sweep, RunOptions, SweepGrid};

use crate::config::{Figure, ScanKnob};
use crate::table::{Cell, Table};

pub const DEFAULT_RATIO: f64 = -0.1;

#[derive(Debug, Clone, Default)]
pub struct FigureOptions {
    /// Restrict to a single E_JS2/E_C where the figure has several.
    pub ejs2_over_ec: Option<f64>,
    /// E_JS2/E_JS1; -0.1 when absent.
    pub ratio: Option<f64>,
    pub noise: NoiseSpec64,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub table: Table,
    /// Points whose qubit splitting fell below the degeneracy floor.
    pub degenerate: usize,
}

pub fn generate(figure: Figure, opts: &FigureOptions) -> Result<Dataset> {
    match figure {
        Figure::Fig4 => fig4(opts),
        Figure::Fig5 => fig5(opts),
        Figure::Fig6 => fig6(opts),
        Figure::Fig7 => fig7(opts),
        Figure::Fig8 => fig8(opts),
        Figure::Fig9 => fig9(opts),
    }
}

/// Converged truncation valid at every probe point (max over probes).
pub fn truncation_for(probes: &[CircuitParams64]) -> Result<usize> {
    let mut n = 2;
    for p in probes {
        let m = match converge_truncation(p) {
            Ok(m) => m,
            Err(CoreError::TruncationNotConverged { .. }) => MAX_TRUNCATION,
            Err(e) => return Err(e).context("choosing the charge truncation"),
        };
        n = n.max(m);
    }
    Ok(n)
}

fn ratios(opts: &FigureOptions, default: &[f64]) -> Vec<f64> {
    opts.ejs2_over_ec.map_or_else(|| default.to_vec(), |r| vec![r])
}

fn log_axis(start: f64, stop: f64, points: usize) -> Vec<f64> {
    cos2phi_sweep::LogAxis::new(start, stop, points).values()
}

fn fig4(opts: &FigureOptions) -> Result<Dataset> {
    let ratio = opts.ratio.unwrap_or(DEFAULT_RATIO);
    let ngs: Vec<f64> = (0..=80).map(|i| i as f64 / 40.0 - 1.0).collect();
    let mut t = Table::new(&["ejs2_over_ec", "dphi", "d", "ng", "e0", "e1", "e2"]);
    for r in ratios(opts, &[1.0, 20.0, 150.0]) {
        let at = |dphi, d, ng| CircuitParams64::from_ratio(1.0, r, ratio, d, dphi, ng, 2);
        let n = truncation_for(&[at(0.0, 0.0, 0.0), at(0.0, 0.0, 0.25), at(1e-3, 0.01, 0.0)])?;
        // Unit: f01 of the pure case at n_g = 0.
        let unit = solve(&at(0.0, 0.0, 0.0).with_truncation(n), 3)?.f01();
        for (dphi, d) in [(0.0, 0.0), (1e-3, 0.01)] {
            let levels = ngs
                .iter()
                .map(|&ng| Ok(solve(&at(dphi, d, ng).with_truncation(n), 3)?.energies.clone()))
                .collect::<Result<Vec<_>>>()?;
            let floor = levels.iter().map(|e| e[0]).fold(f64::INFINITY, f64::min);
            for (ng, e) in ngs.iter().zip(&levels) {
                t.push_nums(&[r, dphi, d, *ng, (e[0] - floor) / unit, (e[1] - floor) / unit, (e[2] - floor) / unit]);
            }
        }
    }
    Ok(Dataset { table: t, degenerate: 0 })
}

const ELEMENT_COLUMNS: [&str; 4] = ["f01_ghz", "m_n", "m_1phi", "m_2phi"];

fn element_row(p: &CircuitParams64, degenerate: &mut usize) -> Result<[f64; 4]> {
    let s = solve(p, 2)?;
    let m = matrix_elements_from(&s, p)?;
    if m.degenerate {
        *degenerate += 1;
    }
    Ok([s.f01(), m.m_n, m.m_1phi, m.m_2phi])
}

fn fig5(opts: &FigureOptions) -> Result<Dataset> {
    let ratio = opts.ratio.unwrap_or(DEFAULT_RATIO);
    let mut t = Table::new(&["ejs2_over_ec", "d", ELEMENT_COLUMNS[0], ELEMENT_COLUMNS[1], ELEMENT_COLUMNS[2], ELEMENT_COLUMNS[3]]);
    let mut degenerate = 0;
    let ds = log_axis(1e-4, 0.3, 31);
    for r in ratios(opts, &[1.0, 50.0, 150.0]) {
        let at = |d| CircuitParams64::from_ratio(1.0, r, ratio, d, 1e-5, 0.25, 2);
        let n = truncation_for(&[at(1e-4), at(0.3)])?;
        for &d in &ds {
            let [f, mn, m1, m2] = element_row(&at(d).with_truncation(n), &mut degenerate)?;
            t.push_nums(&[r, d, f, mn, m1, m2]);
        }
    }
    Ok(Dataset { table: t, degenerate })
}

fn fig6(opts: &FigureOptions) -> Result<Dataset> {
    let ratio = opts.ratio.unwrap_or(DEFAULT_RATIO);
    let mut t = Table::new(&["ejs2_over_ec", "dphi", ELEMENT_COLUMNS[0], ELEMENT_COLUMNS[1], ELEMENT_COLUMNS[2], ELEMENT_COLUMNS[3]]);
    let mut degenerate = 0;
    let rs = opts.ejs2_over_ec.map_or_else(|| log_axis(1.0, 150.0, 16), |r| vec![r]);
    let dphis = log_axis(1e-6, 1e-1, 26);
    for r in rs {
        let at = |dphi| CircuitParams64::from_ratio(1.0, r, ratio, 0.01, dphi, 0.25, 2);
        let n = truncation_for(&[at(1e-6), at(1e-1)])?;
        for &dphi in &dphis {
            let [f, mn, m1, m2] = element_row(&at(dphi).with_truncation(n), &mut degenerate)?;
            t.push_nums(&[r, dphi, f, mn, m1, m2]);
        }
    }
    Ok(Dataset { table: t, degenerate })
}

fn fig7(opts: &FigureOptions) -> Result<Dataset> {
    let ratio = opts.ratio.unwrap_or(DEFAULT_RATIO);
    let r = opts.ejs2_over_ec.unwrap_or(40.0);
    let ec = 0.5;
    let at = |dphi, ng| CircuitParams64::from_ratio(ec, r * ec, ratio, 0.0, dphi, ng, 2);
    let n = truncation_for(&[at(0.0, 0.0), at(0.0, 0.5)])?;
    let centre = {
        let s = solve(&at(0.0, 0.0).with_truncation(n), 2)?;
        0.5 * (s.energies[0] + s.energies[1])
    };
    let span = 5.0 * two_level_model(&at(0.0, 0.0))?.dphi_max;
    let mut t = Table::new(&["ng", "dphi", "e0_ghz", "e1_ghz", "f01_ghz", "f01_model_ghz"]);
    for ng in [0.0, 0.5] {
        let model = two_level_model(&at(0.0, ng))?;
        for i in 0..=80 {
            let dphi = span * (i as f64 / 40.0 - 1.0);
            let s = solve(&at(dphi, ng).with_truncation(n), 2)?;
            let (e0, e1) = (s.energies[0] - centre, s.energies[1] - centre);
            t.push_nums(&[ng, dphi, e0, e1, e1 - e0, two_level_f01(&model, dphi)]);
        }
    }
    Ok(Dataset { table: t, degenerate: 0 })
}

pub const FIG8_COLUMNS: [&str; 10] = [
    "ejs2_over_ec",
    "dphi",
    "f01_ghz",
    "tphi_s",
    "tphi_charge_s",
    "tphi_flux_s",
    "t1_s",
    "t1_flux_s",
    "t1_dielectric_s",
    "t2_s",
];

/// [`FIG8_COLUMNS`] with the scanned knob in second place.
pub fn coherence_columns(knob: ScanKnob) -> Vec<&'static str> {
    let mut c = FIG8_COLUMNS.to_vec();
    c[1] = knob.column();
    c
}

/// Coherence along one knob at otherwise fixed circuit; rows follow
/// [`coherence_columns`]. Returns the number of degenerate points.
pub fn coherence_scan(
    base: &CircuitParams64,
    knob: ScanKnob,
    values: &[f64],
    noise: &NoiseSpec64,
    opts: &CoherenceOptions,
    t: &mut Table,
) -> Result<usize> {
    let r = base.ejs2 / base.ec;
    let mut degenerate = 0;
    for &v in values {
        let p = knob.apply(*base, v);
        match coherence_report_with(&p, noise, opts) {
            Ok(c) => t.push_nums(&[r, v, c.f01_ghz, c.tphi_total, c.tphi_charge, c.tphi_flux, c.t1_total, c.t1_flux, c.t1_dielectric, c.t2]),
            Err(CoreError::Degenerate { .. }) => {
                degenerate += 1;
                let mut row = vec![r, v];
                row.resize(FIG8_COLUMNS.len(), f64::NAN);
                t.push_nums(&row);
            }
            Err(e) => return Err(e).with_context(|| format!("coherence at {} = {v:e}", knob.column())),
        }
    }
    Ok(degenerate)
}

fn fig8(opts: &FigureOptions) -> Result<Dataset> {
    let ratio = opts.ratio.unwrap_or(DEFAULT_RATIO);
    let ec = 0.5;
    let dphis = log_axis(1e-6, 3e-2, 41);
    let mut t = Table::new(&FIG8_COLUMNS);
    let mut degenerate = 0;
    for r in ratios(opts, &[1.0, 20.0, 80.0]) {
        let at = |dphi| CircuitParams64::from_ratio(ec, r * ec, ratio, 0.01, dphi, 0.25, 2);
        let n = truncation_for(&[at(1e-6), at(3e-2)])?;
        degenerate += coherence_scan(&at(1e-6).with_truncation(n), ScanKnob::Dphi, &dphis, &opts.noise, &CoherenceOptions::default(), &mut t)?;
    }
    Ok(Dataset { table: t, degenerate })
}

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(&COLUMNS);
    for r in rows {
        let mut cells: Vec<Cell> = [r.ejs2_ghz, r.ec_ghz, r.dphi, r.f01_ghz, r.t1_s, r.tphi_s, r.t2_s, r.tphi_charge_s, r.tphi_flux_s]
            .into_iter()
            .map(Cell::Num)
            .collect();
        cells.push(Cell::Text(r.limiting.to_string()));
        cells.push(Cell::Text(r.flags.join(";")));
        t.push(cells);
    }
    t
}

pub fn degenerate_rows(rows: &[SweepRow]) -> usize {
    rows.iter().filter(|r| r.flags.iter().any(|f| f.starts_with("degenerate"))).count()
}

fn fig9(opts: &FigureOptions) -> Result<Dataset> {
    let mut grid = SweepGrid::reduced(opts.ratio.unwrap_or(DEFAULT_RATIO));
    grid.noise = opts.noise;
    let res = run_sweep(&grid, &RunOptions { workers: opts.workers, ..Default::default() })?;
    Ok(Dataset { table: sweep_table(&res.rows), degenerate: degenerate_rows(&res.rows) })
}
