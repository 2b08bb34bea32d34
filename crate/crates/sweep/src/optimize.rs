//! T2 maximization: a coarse log-spaced grid followed by compass search in
//! log coordinates.

use cos2phi::noise::{coherence_report_with, CoherenceOptions};
use cos2phi::spectrum::solve;
use cos2phi::{CircuitParams64, CoherenceReport64, NoiseSpec64};
use serde::{Deserialize, Serialize};

use crate::classify::temperature_limited;
use crate::run::TruncationCache;
use crate::{Result, SweepError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSpec {
    /// Inclusive (low, high) bounds; equal ends pin a coordinate.
    pub ejs2: (f64, f64),
    pub ec: (f64, f64),
    pub dphi: (f64, f64),
    pub ratio: f64,
    pub d: f64,
    pub ng: f64,
    #[serde(default)]
    pub noise: NoiseSpec64,
    #[serde(default)]
    pub thermal_levels: Option<usize>,
    /// Fix f01 (GHz): E_C then follows from E_JS2/E_C and dphi by scaling.
    #[serde(default)]
    pub target_f01: Option<f64>,
    #[serde(default = "default_coarse")]
    pub coarse_points: usize,
    /// Refinement stops once every step is below this, in decades.
    #[serde(default = "default_min_step")]
    pub min_step: f64,
    #[serde(default = "default_max_evaluations")]
    pub max_evaluations: usize,
}

fn default_coarse() -> usize {
    11
}
fn default_min_step() -> f64 {
    1e-3
}
fn default_max_evaluations() -> usize {
    2000
}

impl OptimizeSpec {
    /// Realistic envelope: E_JS2 in [0.5, 50] GHz, E_C in [1 MHz, 20 GHz],
    /// dphi in [1e-5, 9e-3].
    pub fn new(ratio: f64) -> Self {
        Self {
            ejs2: (0.5, 50.0),
            ec: (1e-3, 20.0),
            dphi: (1e-5, 9e-3),
            ratio,
            d: 0.01,
            ng: 0.25,
            noise: NoiseSpec64::default(),
            thermal_levels: None,
            target_f01: None,
            coarse_points: default_coarse(),
            min_step: default_min_step(),
            max_evaluations: default_max_evaluations(),
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("ejs2", self.ejs2), ("ec", self.ec), ("dphi", self.dphi)] {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(SweepError::Grid(format!("{name} bounds must satisfy 0 < low <= high")));
            }
        }
        if self.coarse_points < 2 {
            return Err(SweepError::Grid("coarse_points must be at least 2".into()));
        }
        if matches!(self.target_f01, Some(f) if !(f > 0.0 && f.is_finite())) {
            return Err(SweepError::Grid("target_f01 must be positive".into()));
        }
        self.noise.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub params: CircuitParams64,
    pub report: CoherenceReport64,
    /// Best T2 found on the coarse grid alone.
    pub coarse_best_t2: f64,
    pub evaluations: usize,
}

/// Search coordinates, log10 of each.
struct Space {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Space {
    fn clamp(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lo[i], self.hi[i]);
        }
    }
}

struct Objective<'a> {
    spec: &'a OptimizeSpec,
    cache: TruncationCache,
    opts: CoherenceOptions,
    evaluations: usize,
}

impl Objective<'_> {
    fn truncated(&self, p: CircuitParams64) -> Option<CircuitParams64> {
        let n = self.cache.get(&p).ok()??;
        Some(p.with_truncation(n))
    }

    /// Coordinates to circuit; `None` outside the feasible set.
    fn params(&self, x: &[f64]) -> Option<CircuitParams64> {
        let s = self.spec;
        let within = |v: f64, (lo, hi): (f64, f64)| v >= lo * (1.0 - 1e-12) && v <= hi * (1.0 + 1e-12);
        let p = match s.target_f01 {
            None => {
                let (ejs2, ec, dphi) = (10f64.powf(x[0]), 10f64.powf(x[1]), 10f64.powf(x[2]));
                self.truncated(CircuitParams64::from_ratio(ec, ejs2, s.ratio, s.d, dphi, s.ng, 2))?
            }
            Some(target) => {
                // f01 is linear in the overall energy scale at fixed E_JS2/E_C.
                let (r, dphi) = (10f64.powf(x[0]), 10f64.powf(x[1]));
                let unit = self.truncated(CircuitParams64::from_ratio(1.0, r, s.ratio, s.d, dphi, s.ng, 2))?;
                let g = solve(&unit, 2).ok()?.f01();
                let ec = target / g;
                CircuitParams64 { ec, ejs1: unit.ejs1 * ec, ejs2: r * ec, ..unit }
            }
        };
        let ok = within(p.ejs2, s.ejs2) && within(p.ec, s.ec) && !temperature_limited(p.ejs2, &s.noise);
        ok.then_some(p)
    }

    fn eval(&mut self, x: &[f64]) -> Option<(CircuitParams64, CoherenceReport64)> {
        self.evaluations += 1;
        let p = self.params(x)?;
        let r = coherence_report_with(&p, &self.spec.noise, &self.opts).ok()?;
        Some((p, r))
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if hi == lo {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

pub fn optimize_t2(spec: &OptimizeSpec) -> Result<Optimum> {
    spec.validate()?;
    let l = |(a, b): (f64, f64)| (a.log10(), b.log10());
    let space = match spec.target_f01 {
        None => {
            let (e2, ec, dp) = (l(spec.ejs2), l(spec.ec), l(spec.dphi));
            Space { lo: vec![e2.0, ec.0, dp.0], hi: vec![e2.1, ec.1, dp.1] }
        }
        Some(_) => {
            let r = l((spec.ejs2.0 / spec.ec.1, spec.ejs2.1 / spec.ec.0));
            let dp = l(spec.dphi);
            Space { lo: vec![r.0, dp.0], hi: vec![r.1, dp.1] }
        }
    };
    let opts = match spec.thermal_levels {
        Some(n) => CoherenceOptions::thermal(n),
        None => CoherenceOptions::default(),
    };
    let mut obj = Objective { spec, cache: TruncationCache::default(), opts, evaluations: 0 };

    let axes: Vec<Vec<f64>> = (0..space.lo.len()).map(|i| linspace(space.lo[i], space.hi[i], spec.coarse_points)).collect();
    let mut best: Option<(Vec<f64>, CircuitParams64, CoherenceReport64)> = None;
    let mut index = vec![0usize; axes.len()];
    'grid: loop {
        let x: Vec<f64> = index.iter().enumerate().map(|(d, &i)| axes[d][i]).collect();
        if let Some((p, r)) = obj.eval(&x) {
            if best.as_ref().map_or(true, |b| r.t2 > b.2.t2) {
                best = Some((x, p, r));
            }
        }
        for d in (0..axes.len()).rev() {
            index[d] += 1;
            if index[d] < axes[d].len() {
                continue 'grid;
            }
            index[d] = 0;
        }
        break;
    }
    let Some((mut x, mut p, mut r)) = best else {
        return Err(SweepError::Infeasible(
            "no feasible point: bounds, target frequency or the temperature limit exclude the whole search box".into(),
        ));
    };
    let coarse_best_t2 = r.t2;

    let mut step: Vec<f64> = axes.iter().map(|a| if a.len() > 1 { a[1] - a[0] } else { 0.0 }).collect();
    while step.iter().any(|&s| s >= spec.min_step) && obj.evaluations < spec.max_evaluations {
        let mut improved = None;
        for d in 0..x.len() {
            if step[d] == 0.0 {
                continue;
            }
            for sign in [-1.0, 1.0] {
                let mut y = x.clone();
                y[d] += sign * step[d];
                space.clamp(&mut y);
                if y == x {
                    continue;
                }
                if let Some((q, s)) = obj.eval(&y) {
                    let bar = improved.as_ref().map_or(r.t2, |(_, _, b): &(Vec<f64>, CircuitParams64, CoherenceReport64)| b.t2);
                    if s.t2 > bar {
                        improved = Some((y, q, s));
                    }
                }
            }
        }
        match improved {
            Some((y, q, s)) => (x, p, r) = (y, q, s),
            None => step.iter_mut().for_each(|s| *s *= 0.5),
        }
    }
    Ok(Optimum { params: p, report: r, coarse_best_t2, evaluations: obj.evaluations })
}
