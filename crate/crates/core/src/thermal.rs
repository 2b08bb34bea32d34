//! Multilevel thermal rates and their reduction to effective qubit rates.
//!
//! Populations evolve as dp/dt = G p with G[k][i] = Gamma_{i->k} off the
//! diagonal and G[i][i] = -sum_k Gamma_{i->k}. Splitting the levels into the
//! qubit pair and the rest, the steady-state elimination of the higher block
//! gives Lambda = A - B D^-1 C on the qubit pair.

use serde::{Deserialize, Serialize};

use crate::chargebasis::number_operator;
use crate::circuit::{flux_coupling_operator, CircuitParams};
use crate::error::{invalid, Error, Result};
use crate::noise::{dielectric_pair_rates, flux_pair_rates, NoiseSpec};
use crate::spectrum::{solve, Spectrum};
use crate::Real;

/// Transition rates Gamma_{i->j} in 1/s; the diagonal is unused and zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateMatrix<T> {
    pub n_levels: usize,
    /// `gamma[i][j]` = Gamma_{i->j}.
    pub gamma: Vec<Vec<T>>,
    /// Pairs whose splitting fell below the infrared cutoff and were evaluated there.
    pub regularized_pairs: Vec<(usize, usize)>,
}

impl<T: Real> RateMatrix<T> {
    pub fn zeros(n_levels: usize) -> Self {
        Self { n_levels, gamma: vec![vec![T::zero(); n_levels]; n_levels], regularized_pairs: vec![] }
    }

    /// Validates shape and signs; the diagonal is cleared.
    pub fn from_rates(gamma: Vec<Vec<T>>) -> Result<Self> {
        let n = gamma.len();
        if n < 2 {
            return Err(invalid("n_levels", "need at least two levels"));
        }
        let mut gamma = gamma;
        for (i, row) in gamma.iter_mut().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            row[i] = T::zero();
            if row.iter().any(|g| !(g.is_finite() && *g >= T::zero())) {
                return Err(invalid("gamma", format!("rates out of level {i} must be finite and non-negative")));
            }
        }
        Ok(Self { n_levels: n, gamma, regularized_pairs: vec![] })
    }

    #[inline]
    pub fn rate(&self, from: usize, to: usize) -> T {
        self.gamma[from][to]
    }

    pub fn total_out(&self, from: usize) -> T {
        self.gamma[from].iter().copied().sum()
    }

    /// Population generator G with dp/dt = G p.
    pub fn generator(&self) -> Vec<Vec<T>> {
        let n = self.n_levels;
        let mut g = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            for k in 0..n {
                if i != k {
                    g[k][i] = self.gamma[i][k];
                }
            }
            g[i][i] = -self.total_out(i);
        }
        g
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            gamma: self.gamma.iter().map(|r| r.iter().map(|g| *g * c).collect()).collect(),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.n_levels != self.n_levels {
            return Err(Error::DimensionMismatch { expected: self.n_levels, got: other.n_levels });
        }
        let gamma = self
            .gamma
            .iter()
            .zip(&other.gamma)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| *x + *y).collect())
            .collect();
        let mut pairs = self.regularized_pairs.clone();
        pairs.extend(other.regularized_pairs.iter().filter(|p| !self.regularized_pairs.contains(p)));
        Ok(Self { n_levels: self.n_levels, gamma, regularized_pairs: pairs })
    }
}

/// Per-channel rate tables; [`build_rate_matrix`] returns their sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRates<T> {
    pub flux: RateMatrix<T>,
    pub dielectric: RateMatrix<T>,
}

pub fn channel_rates_from_spectrum<T: Real>(
    s: &Spectrum<T>,
    p: &CircuitParams<T>,
    noise: &NoiseSpec<T>,
    n_levels: usize,
) -> Result<ChannelRates<T>> {
    if n_levels < 2 {
        return Err(invalid("n_levels", "need at least two levels"));
    }
    if s.level_count() < n_levels {
        return Err(Error::LevelOutOfRange { index: n_levels - 1, available: s.level_count() });
    }
    let flux_op = flux_coupling_operator(p)?;
    let n_op = number_operator(p.n_trunc, T::zero());
    let mut flux = RateMatrix::zeros(n_levels);
    let mut diel = RateMatrix::zeros(n_levels);
    let f_ir = noise.f_ir_ghz();
    for hi in 1..n_levels {
        for lo in 0..hi {
            let (vl, vh) = (s.state(lo)?, s.state(hi)?);
            let f = s.energies[hi] - s.energies[lo];
            if f.abs() <= f_ir || s.is_degenerate(lo, hi) {
                flux.regularized_pairs.push((lo, hi));
                diel.regularized_pairs.push((lo, hi));
            }
            let (fd, fu) = flux_pair_rates(flux_op.matrix_element(vl, vh).norm(), f, noise);
            let (dd, du) = dielectric_pair_rates(n_op.matrix_element(vl, vh).norm(), f, p.ec, noise);
            flux.gamma[hi][lo] = fd;
            flux.gamma[lo][hi] = fu;
            diel.gamma[hi][lo] = dd;
            diel.gamma[lo][hi] = du;
        }
    }
    Ok(ChannelRates { flux, dielectric: diel })
}

pub fn rate_matrix_from_spectrum<T: Real>(
    s: &Spectrum<T>,
    p: &CircuitParams<T>,
    noise: &NoiseSpec<T>,
    n_levels: usize,
) -> Result<RateMatrix<T>> {
    let c = channel_rates_from_spectrum(s, p, noise, n_levels)?;
    c.flux.add(&c.dielectric)
}

pub fn build_channel_rates<T: Real>(p: &CircuitParams<T>, noise: &NoiseSpec<T>, n_levels: usize) -> Result<ChannelRates<T>> {
    noise.validate()?;
    channel_rates_from_spectrum(&solve(p, n_levels)?, p, noise, n_levels)
}

pub fn build_rate_matrix<T: Real>(p: &CircuitParams<T>, noise: &NoiseSpec<T>, n_levels: usize) -> Result<RateMatrix<T>> {
    noise.validate()?;
    rate_matrix_from_spectrum(&solve(p, n_levels)?, p, noise, n_levels)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRates<T> {
    /// Lambda_10 + Lambda_01.
    pub gamma1: T,
    /// (sum_j Gamma_{0->j} + sum_j Gamma_{1->j}) / 2.
    pub gamma2: T,
}

/// Gaussian elimination with partial pivoting; solves D X = C in place.
/// On a vanishing pivot returns the offending column.
fn solve_in_place<T: Real>(d: &mut [Vec<T>], c: &mut [Vec<T>]) -> std::result::Result<(), usize> {
    let n = d.len();
    let scale = d.iter().flatten().fold(T::zero(), |m, x| m.max(x.abs()));
    let tiny = scale * T::epsilon() * T::from_usize_lossy(n.max(1)) * T::lit(16.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| d[a][col].abs().partial_cmp(&d[b][col].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(col);
        if d[piv][col].abs() <= tiny {
            return Err(col);
        }
        d.swap(col, piv);
        c.swap(col, piv);
        for r in col + 1..n {
            let f = d[r][col] / d[col][col];
            if f == T::zero() {
                continue;
            }
            for k in col..n {
                let v = d[col][k];
                d[r][k] -= f * v;
            }
            for k in 0..c[r].len() {
                let v = c[col][k];
                c[r][k] -= f * v;
            }
        }
    }
    for col in (0..n).rev() {
        for k in 0..c[col].len() {
            let mut acc = c[col][k];
            for j in col + 1..n {
                acc -= d[col][j] * c[j][k];
            }
            c[col][k] = acc / d[col][col];
        }
    }
    Ok(())
}

/// Block elimination of levels >= 2.
///
/// Higher levels with no rates in or out are dropped. A higher level that
/// can be entered but never left makes D singular and is reported.
pub fn effective_qubit_rates<T: Real>(r: &RateMatrix<T>) -> Result<EffectiveRates<T>> {
    let n = r.n_levels;
    if n < 2 {
        return Err(invalid("n_levels", "need at least two levels"));
    }
    let gamma2 = T::lit(0.5) * (r.total_out(0) + r.total_out(1));
    let g = r.generator();

    let higher: Vec<usize> = (2..n)
        .filter(|&k| {
            let out = r.total_out(k);
            let inc: T = (0..n).map(|i| r.gamma[i][k]).sum();
            out > T::zero() || inc > T::zero()
        })
        .collect();

    let mut lambda = [[g[0][0], g[0][1]], [g[1][0], g[1][1]]];
    if !higher.is_empty() {
        let mut d: Vec<Vec<T>> = higher.iter().map(|&a| higher.iter().map(|&b| g[a][b]).collect()).collect();
        // X = D^-1 C, C[a][q] = G[higher a][q].
        let mut x: Vec<Vec<T>> = higher.iter().map(|&a| vec![g[a][0], g[a][1]]).collect();
        if let Err(col) = solve_in_place(&mut d, &mut x) {
            return Err(Error::SingularReduction { level: higher[col] });
        }
        for q in 0..2 {
            for s in 0..2 {
                let bdc: T = higher.iter().enumerate().map(|(a, &lvl)| g[q][lvl] * x[a][s]).sum();
                lambda[q][s] -= bdc;
            }
        }
    }
    Ok(EffectiveRates { gamma1: lambda[1][0] + lambda[0][1], gamma2 })
}
