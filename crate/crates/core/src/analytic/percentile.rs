use rayon::prelude::*;

use super::{Analysis, LoadModel};
use crate::error::{Error, Result};
use crate::model::Network;

/// Coverage tolerance at which bisection stops.
const COVERAGE_TOL: f64 = 1e-7;
const MAX_BRACKET_DOUBLINGS: usize = 200;
const MAX_BISECTIONS: usize = 300;

/// Coarse grid spacing of the bias search.
pub const BIAS_GRID_STEP_DB: f64 = 1.0;
/// Width of the final golden-section bracket.
pub const BIAS_REFINE_TOL_DB: f64 = 0.05;
/// Percentile rates within this relative distance count as ties.
const TIE_REL_TOL: f64 = 1e-9;

impl Analysis {
    /// Rate `T*` exceeded by a fraction `1 - p` of users, i.e. the solution of
    /// `coverage(T*) = 1 - p`.
    pub fn percentile_rate(&self, p: f64, model: LoadModel) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("percentile must lie in (0, 1), got {p}")));
        }
        let target = 1.0 - p;
        let mut lo = 0.0;
        let mut hi = self.network.bandwidth_hz;
        let mut cov_hi = self.coverage(hi, model)?;
        let mut doublings = 0;
        while cov_hi >= target {
            if (cov_hi - target).abs() <= COVERAGE_TOL {
                return Ok(hi);
            }
            lo = hi;
            hi *= 2.0;
            cov_hi = self.coverage(hi, model)?;
            doublings += 1;
            if doublings > MAX_BRACKET_DOUBLINGS {
                return Err(Error::domain("could not bracket the percentile rate"));
            }
        }
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..MAX_BISECTIONS {
            mid = 0.5 * (lo + hi);
            let c = self.coverage(mid, model)?;
            if (c - target).abs() <= COVERAGE_TOL {
                break;
            }
            if c > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        Ok(mid)
    }
}

pub fn percentile_rate(n: &Network, p: f64) -> Result<f64> {
    Analysis::new(n)?.percentile_rate(p, LoadModel::Distribution)
}

/// Result of a single-tier bias search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalBias {
    pub bias_db: f64,
    pub percentile_rate: f64,
    /// The maximiser sits on an end of the search range, so the true optimum
    /// may lie outside it.
    pub at_endpoint: bool,
}

fn with_bias(n: &Network, k: usize, bias_db: f64) -> Network {
    let mut out = n.clone();
    out.tiers[k].bias_db = bias_db;
    out
}

/// Percentile rate of `n` with tier `k`'s bias replaced by each entry of
/// `biases_db`. Grid points are evaluated in parallel.
pub fn percentile_rate_sweep(
    n: &Network,
    k: usize,
    p: f64,
    biases_db: &[f64],
    model: LoadModel,
) -> Result<Vec<f64>> {
    n.ensure_valid()?;
    n.check_tier(k)?;
    biases_db
        .par_iter()
        .map(|&b| Analysis::new(&with_bias(n, k, b))?.percentile_rate(p, model))
        .collect()
}

fn bias_grid(lo: f64, hi: f64) -> Vec<f64> {
    let steps = ((hi - lo) / BIAS_GRID_STEP_DB).floor() as usize;
    let mut grid: Vec<f64> = (0..=steps).map(|i| lo + i as f64 * BIAS_GRID_STEP_DB).collect();
    if hi - grid[grid.len() - 1] > 1e-9 {
        grid.push(hi);
    }
    grid
}

fn better(candidate: f64, incumbent: f64) -> bool {
    candidate > incumbent * (1.0 + TIE_REL_TOL)
}

/// Bias of tier `k` in `range_db` that maximises the `p`-percentile rate:
/// a 1 dB grid followed by golden-section refinement to 0.05 dB. Ties go to
/// the smaller bias.
pub fn optimal_bias(n: &Network, k: usize, p: f64, range_db: (f64, f64)) -> Result<OptimalBias> {
    optimal_bias_with(n, k, p, range_db, LoadModel::Distribution)
}

pub fn optimal_bias_with(
    n: &Network,
    k: usize,
    p: f64,
    (lo, hi): (f64, f64),
    model: LoadModel,
) -> Result<OptimalBias> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::domain(format!("invalid bias range [{lo}, {hi}]")));
    }
    let grid = bias_grid(lo, hi);
    let rates = percentile_rate_sweep(n, k, p, &grid, model)?;
    let mut best = 0;
    for i in 1..rates.len() {
        if better(rates[i], rates[best]) {
            best = i;
        }
    }
    let mut bias = grid[best];
    let mut rate = rates[best];

    let eval = |b: f64| -> Result<f64> { Analysis::new(&with_bias(n, k, b))?.percentile_rate(p, model) };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = ((bias - BIAS_GRID_STEP_DB).max(lo), (bias + BIAS_GRID_STEP_DB).min(hi));
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (eval(x1)?, eval(x2)?);
    while b - a > BIAS_REFINE_TOL_DB {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = eval(x2)?;
        }
    }
    let (xr, fr) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    if better(fr, rate) {
        bias = xr;
        rate = fr;
    }
    let at_endpoint = bias - lo <= BIAS_REFINE_TOL_DB || hi - bias <= BIAS_REFINE_TOL_DB;
    Ok(OptimalBias {
        bias_db: bias,
        percentile_rate: rate,
        at_endpoint,
    })
}
