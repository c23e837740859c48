use std::f64::consts::LN_2;

use super::load::load_term;
use super::{Analysis, LoadModel, LoadPmf};
use crate::error::{Error, Result};

/// Load sums stop once this much probability mass is left in the tail.
pub const LOAD_TAIL_MASS: f64 = 1e-9;
/// Hard cap on the number of load terms per tier.
pub const LOAD_MAX_TERMS: usize = 10_000;
/// Remaining terms are dropped once `ccdf · tail` falls below this.
const NEGLIGIBLE: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq)]
pub struct RateCoverageResult {
    pub rate_threshold_bps: f64,
    pub coverage: f64,
    /// Contribution of each serving tier; sums to `coverage`.
    pub per_tier_contribution: Vec<f64>,
    /// Upper bound on the probability mass dropped by truncating the load
    /// sums. The exact coverage lies in `[coverage, coverage + bound]`.
    pub truncation_bound: f64,
}

impl Analysis {
    /// SIR threshold reached when `load` users share the BS and the UE needs
    /// `rate_bps`: `2^(rate·load/W) - 1`.
    fn sir_target(&self, rate_bps: f64, load: f64) -> f64 {
        (LN_2 * rate_bps * load / self.network.bandwidth_hz).exp_m1()
    }

    /// Load PMF truncated where the tail mass drops below 1e-9.
    pub fn load_pmf_auto(&self, k: usize) -> Result<LoadPmf> {
        let c = self.load_ratio(k)?;
        let mut probabilities = Vec::new();
        let mut cum = 0.0;
        while probabilities.len() < LOAD_MAX_TERMS && 1.0 - cum > LOAD_TAIL_MASS {
            let p = load_term(c, probabilities.len());
            cum += p;
            probabilities.push(p);
        }
        Ok(LoadPmf {
            probabilities,
            truncation_mass: (1.0 - cum).max(0.0),
            mean_exact: 1.0 + 9.0 / 7.0 * c,
        })
    }

    /// `P(rate > rate_bps)` with SIR and load treated as independent.
    pub fn rate_coverage(&self, rate_bps: f64) -> Result<RateCoverageResult> {
        check_rate(rate_bps)?;
        let selection = self.selection_probabilities();
        if rate_bps == 0.0 {
            return Ok(RateCoverageResult {
                rate_threshold_bps: 0.0,
                coverage: 1.0,
                per_tier_contribution: selection,
                truncation_bound: 0.0,
            });
        }
        let mut per_tier = Vec::with_capacity(self.num_tiers());
        let mut bound = 0.0;
        for (k, &p_sel) in selection.iter().enumerate() {
            let c = self.load_ratio(k)?;
            let mut contribution = 0.0;
            let mut cum = 0.0;
            let mut n = 0;
            let mut last_ccdf;
            loop {
                let p = load_term(c, n);
                let ccdf = self.conditional_sir_ccdf(k, self.sir_target(rate_bps, (n + 1) as f64))?;
                contribution += p_sel * ccdf * p;
                cum += p;
                last_ccdf = ccdf;
                n += 1;
                let tail = (1.0 - cum).max(0.0);
                if tail <= LOAD_TAIL_MASS || n >= LOAD_MAX_TERMS || ccdf * tail < NEGLIGIBLE {
                    break;
                }
            }
            // Later CCDF terms are no larger than the last one evaluated.
            bound += p_sel * last_ccdf * (1.0 - cum).max(0.0);
            per_tier.push(contribution);
        }
        let coverage = per_tier.iter().sum::<f64>().clamp(0.0, 1.0);
        Ok(RateCoverageResult {
            rate_threshold_bps: rate_bps,
            coverage,
            per_tier_contribution: per_tier,
            truncation_bound: bound,
        })
    }

    /// Rate coverage with each tier's load pinned at `ceil(E[Ψ_k])`.
    pub fn rate_coverage_mean_load(&self, rate_bps: f64) -> Result<f64> {
        check_rate(rate_bps)?;
        if rate_bps == 0.0 {
            return Ok(1.0);
        }
        let mut total = 0.0;
        for (k, p_sel) in self.selection_probabilities().into_iter().enumerate() {
            let load = self.mean_load(k)?.ceil();
            total += p_sel * self.conditional_sir_ccdf(k, self.sir_target(rate_bps, load))?;
        }
        Ok(total.clamp(0.0, 1.0))
    }

    pub fn coverage(&self, rate_bps: f64, model: LoadModel) -> Result<f64> {
        match model {
            LoadModel::Distribution => Ok(self.rate_coverage(rate_bps)?.coverage),
            LoadModel::Mean => self.rate_coverage_mean_load(rate_bps),
        }
    }
}

fn check_rate(rate_bps: f64) -> Result<()> {
    if !(rate_bps >= 0.0) || !rate_bps.is_finite() {
        return Err(Error::domain(format!(
            "rate threshold must be finite and >= 0, got {rate_bps}"
        )));
    }
    Ok(())
}
