//! Closed-form rate analysis.
//!
//! [`Analysis`] validates a [`Network`] once and caches the per-tier terms
//! `λ_k E[X_k^(2/α)] P_k^(2/α)` and `B_k^(2/α)` shared by every formula. The
//! free functions are thin wrappers for one-off evaluations.
//!
//! Tier indices are zero based.

mod coverage;
mod load;
mod percentile;

pub use coverage::RateCoverageResult;
pub use load::{load_pmf_for_ratio, LoadPmf};
pub use percentile::{
    optimal_bias, optimal_bias_with, percentile_rate, percentile_rate_sweep, OptimalBias,
    BIAS_GRID_STEP_DB, BIAS_REFINE_TOL_DB,
};
pub use coverage::{LOAD_MAX_TERMS, LOAD_TAIL_MASS};

use crate::error::{Error, Result};
use crate::model::Network;
use crate::numerics::{fractional_moment, interference_f};

/// Which load model feeds the rate coverage sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadModel {
    /// Full tagged-cell load distribution.
    #[default]
    Distribution,
    /// Load fixed at its mean, rounded up to an integer.
    Mean,
}

#[derive(Debug, Clone)]
struct TierTerms {
    density: f64,
    bias_db: f64,
    /// `λ E[X^(2/α)] P^(2/α)`
    base: f64,
    /// `B^(2/α)`
    bias_pow: f64,
    /// `base * bias_pow`
    weight: f64,
}

/// Precomputed analytic view of a validated network.
#[derive(Debug, Clone)]
pub struct Analysis {
    network: Network,
    tiers: Vec<TierTerms>,
    total_weight: f64,
}

impl Analysis {
    pub fn new(network: &Network) -> Result<Self> {
        network.ensure_valid()?;
        let alpha = network.alpha;
        let delta = 2.0 / alpha;
        let tiers = network
            .tiers
            .iter()
            .map(|t| {
                let moment = fractional_moment(&t.shadowing, alpha)?;
                let base = t.density * moment * 10f64.powf(t.power_db * delta / 10.0);
                let bias_pow = 10f64.powf(t.bias_db * delta / 10.0);
                Ok(TierTerms {
                    density: t.density,
                    bias_db: t.bias_db,
                    base,
                    bias_pow,
                    weight: base * bias_pow,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let total_weight = tiers.iter().map(|t| t.weight).sum();
        Ok(Analysis {
            network: network.clone(),
            tiers,
            total_weight,
        })
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn num_tiers(&self) -> usize {
        self.tiers.len()
    }

    fn check_tier(&self, k: usize) -> Result<()> {
        self.network.check_tier(k)
    }

    /// Probability that the typical UE is served by tier `k`.
    pub fn selection_probability(&self, k: usize) -> Result<f64> {
        self.check_tier(k)?;
        Ok(self.tiers[k].weight / self.total_weight)
    }

    pub fn selection_probabilities(&self) -> Vec<f64> {
        self.tiers
            .iter()
            .map(|t| t.weight / self.total_weight)
            .collect()
    }

    /// `P(SIR > threshold | tier k serves)` with `threshold` linear.
    pub fn conditional_sir_ccdf(&self, k: usize, threshold: f64) -> Result<f64> {
        self.check_tier(k)?;
        if !(threshold >= 0.0) {
            return Err(Error::domain(format!(
                "SIR threshold must be >= 0, got {threshold}"
            )));
        }
        if threshold.is_infinite() {
            return Ok(0.0);
        }
        let alpha = self.network.alpha;
        let serving = &self.tiers[k];
        let mut denominator = 0.0;
        for t in &self.tiers {
            let ratio = 10f64.powf((t.bias_db - serving.bias_db) / 10.0);
            let f = interference_f(threshold, alpha, ratio)?;
            denominator += t.base * (t.bias_pow + serving.bias_pow * f);
        }
        Ok(self.total_weight / denominator)
    }

    /// Ratio `λ_u P_k / λ_k`: mean number of other UEs in a tier-k cell.
    pub fn load_ratio(&self, k: usize) -> Result<f64> {
        let p = self.selection_probability(k)?;
        Ok(self.network.ue_density * p / self.tiers[k].density)
    }

    /// Mean tagged-cell load `1 + (9/7) λ_u P_k / λ_k`.
    pub fn mean_load(&self, k: usize) -> Result<f64> {
        Ok(1.0 + 9.0 / 7.0 * self.load_ratio(k)?)
    }

    pub fn load_pmf(&self, k: usize, n_max: usize) -> Result<LoadPmf> {
        load_pmf_for_ratio(self.load_ratio(k)?, n_max)
    }
}

pub fn selection_probability(n: &Network, k: usize) -> Result<f64> {
    Analysis::new(n)?.selection_probability(k)
}

pub fn conditional_sir_ccdf(n: &Network, k: usize, threshold: f64) -> Result<f64> {
    Analysis::new(n)?.conditional_sir_ccdf(k, threshold)
}

pub fn load_pmf(n: &Network, k: usize, n_max: usize) -> Result<LoadPmf> {
    Analysis::new(n)?.load_pmf(k, n_max)
}

pub fn mean_load(n: &Network, k: usize) -> Result<f64> {
    Analysis::new(n)?.mean_load(k)
}

pub fn rate_coverage(n: &Network, rate_bps: f64) -> Result<RateCoverageResult> {
    Analysis::new(n)?.rate_coverage(rate_bps)
}

pub fn rate_coverage_mean_load(n: &Network, rate_bps: f64) -> Result<f64> {
    Analysis::new(n)?.rate_coverage_mean_load(rate_bps)
}
