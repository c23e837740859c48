//! Stochastic-geometry simulator for cross-checking the analytic results.
//!
//! Each realization places the typical UE at the origin, draws every tier as
//! an independent PPP, selects the serving station by biased long-term
//! received power (no fading), then draws fresh unit-mean exponential fading
//! on every link to evaluate the SIR. For load, a UE PPP is drawn on the same
//! window and every UE is associated by the same rule.
//!
//! Two geometries are supported:
//!
//! * [`SimMode::Physical`]: stations at their true density with a shadowing
//!   draw per (station, receiver) pair. The disk is widened to
//!   `R q^(1/α)`, `q` being the `generation_margin_quantile` of the gain, so
//!   stations whose displaced image lands in the window are rarely missed.
//! * [`SimMode::Equivalent`]: no shadowing, tier powers scaled by
//!   `E[X^(2/α)]^(α/2)`. Per-UE statistics match the displaced process of
//!   density `λ E[X^(2/α)]`; keeping the true density also keeps the number
//!   of UEs per station, so load is comparable across modes.
//!
//! Realization `i` draws from ChaCha8 stream `i` of the run seed, so results
//! do not depend on scheduling or thread count; all reductions are integer
//! counts.

mod engine;
mod ppp;

use std::f64::consts::PI;

use rayon::prelude::*;

pub use ppp::sample_ppp;

use crate::analytic::LoadPmf;
use crate::error::{Error, Result};
use crate::model::Network;
use engine::{Needs, Outcome, Scenario, Scratch};

/// Default expected number of equivalent stations per tier inside the window.
pub const DEFAULT_POINTS_PER_TIER: f64 = 200.0;
/// Below this expected count a config is flagged.
pub const MIN_POINTS_PER_TIER: f64 = 50.0;
pub const DEFAULT_MARGIN_QUANTILE: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimMode {
    #[default]
    Physical,
    Equivalent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub realizations: u64,
    pub seed: u64,
    /// Radius of the observation window, in the equivalent geometry.
    pub window_radius_m: f64,
    pub generation_margin_quantile: f64,
    pub mode: SimMode,
    pub sir_thresholds_db: Vec<f64>,
    pub rate_thresholds_bps: Vec<f64>,
}

impl SimConfig {
    /// Defaults for `n`: window sized for 200 equivalent stations in the
    /// sparsest tier, 10^4 realizations, physical mode.
    pub fn for_network(n: &Network) -> Result<Self> {
        Ok(SimConfig {
            realizations: 10_000,
            seed: 0,
            window_radius_m: default_window_radius(n)?,
            generation_margin_quantile: DEFAULT_MARGIN_QUANTILE,
            mode: SimMode::Physical,
            sir_thresholds_db: vec![-5.0, 0.0, 5.0, 10.0],
            rate_thresholds_bps: Vec::new(),
        })
    }

    pub fn with_mode(mut self, mode: SimMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_realizations(mut self, realizations: u64) -> Self {
        self.realizations = realizations;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn check(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::domain("at least one realization is required"));
        }
        if !(self.window_radius_m > 0.0) || !self.window_radius_m.is_finite() {
            return Err(Error::domain("window radius must be finite and > 0"));
        }
        let q = self.generation_margin_quantile;
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain("generation margin quantile must lie in (0, 1)"));
        }
        if self.sir_thresholds_db.iter().any(|t| t.is_nan()) {
            return Err(Error::domain("SIR thresholds must not be NaN"));
        }
        if self.rate_thresholds_bps.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::domain("rate thresholds must be >= 0"));
        }
        Ok(())
    }

    /// Human-readable notes about settings likely to bias the estimates.
    pub fn warnings(&self, n: &Network) -> Vec<String> {
        let mut out = Vec::new();
        if let Ok(dens) = window_densities(n) {
            for (k, l) in dens.iter().enumerate() {
                let expected = l * PI * self.window_radius_m.powi(2);
                if expected < MIN_POINTS_PER_TIER {
                    out.push(format!(
                        "tier {}: only {expected:.1} expected stations in the window (< {MIN_POINTS_PER_TIER})",
                        k + 1
                    ));
                }
            }
        }
        out
    }
}

/// Smallest window radius giving [`DEFAULT_POINTS_PER_TIER`] expected
/// stations of every tier, counted both at the true and at the effective
/// density.
pub fn default_window_radius(n: &Network) -> Result<f64> {
    n.ensure_valid()?;
    let min = window_densities(n)?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok((DEFAULT_POINTS_PER_TIER / (PI * min)).sqrt())
}

/// Per tier, the smaller of the true and the effective density.
fn window_densities(n: &Network) -> Result<Vec<f64>> {
    Ok(n
        .effective_densities()?
        .into_iter()
        .zip(&n.tiers)
        .map(|(e, t)| e.min(t.density))
        .collect())
}

/// A Monte Carlo proportion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEstimate {
    pub value: f64,
    pub std_error: f64,
    pub realizations_used: u64,
}

impl SimEstimate {
    pub fn from_counts(hits: u64, trials: u64) -> Self {
        if trials == 0 {
            return SimEstimate {
                value: f64::NAN,
                std_error: f64::NAN,
                realizations_used: 0,
            };
        }
        let p = hits as f64 / trials as f64;
        SimEstimate {
            value: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            realizations_used: trials,
        }
    }

    /// `|self - other| / sqrt(se1² + se2²)`.
    pub fn z_score(&self, other: &SimEstimate) -> f64 {
        let se = self.std_error.hypot(other.std_error);
        let diff = (self.value - other.value).abs();
        if se == 0.0 {
            if diff == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            diff / se
        }
    }
}

/// Realizations whose results may be affected by the finite window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Diagnostics {
    /// Serving station in the outer 10% shell of the window.
    pub edge_events: u64,
    /// No station generated at all; excluded from every estimate.
    pub empty_realizations: u64,
}

/// Empirical distribution of the tagged-cell load for one serving tier.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmpiricalLoad {
    /// `counts[i]` = realizations with load `i + 1`.
    pub counts: Vec<u64>,
    pub total: u64,
}

impl EmpiricalLoad {
    fn add(&mut self, load: u32) {
        let i = load as usize - 1;
        if self.counts.len() <= i {
            self.counts.resize(i + 1, 0);
        }
        self.counts[i] += 1;
        self.total += 1;
    }

    fn merge(&mut self, other: &EmpiricalLoad) {
        if self.counts.len() < other.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
    }

    pub fn pmf(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.total as f64)
            .collect()
    }

    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0;
        self.counts
            .iter()
            .map(|&c| {
                acc += c;
                acc as f64 / self.total as f64
            })
            .collect()
    }

    /// Empirical CDF at `load` (0 below 1, 1 past the largest observation).
    pub fn cdf_at(&self, load: usize) -> f64 {
        if load == 0 || self.total == 0 {
            return 0.0;
        }
        let n = load.min(self.counts.len());
        self.counts[..n].iter().sum::<u64>() as f64 / self.total as f64
    }

    pub fn mean(&self) -> f64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (i + 1) as f64 * c as f64)
            .sum::<f64>()
            / self.total as f64
    }

    /// Kolmogorov–Smirnov distance to an analytic load PMF.
    pub fn ks_distance(&self, analytic: &LoadPmf) -> f64 {
        let upto = self.counts.len().max(analytic.max_load());
        let mut emp = 0u64;
        let mut ana = 0.0;
        let mut worst: f64 = 0.0;
        for n in 1..=upto {
            emp += self.counts.get(n - 1).copied().unwrap_or(0);
            ana += analytic.pmf(n);
            worst = worst.max((emp as f64 / self.total as f64 - ana).abs());
        }
        worst
    }
}

/// Which quantities a joint run should collect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Quantities {
    pub sir: bool,
    pub load: bool,
    pub rate: bool,
}

/// Everything a joint run produces; fields not requested stay empty.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimReport {
    /// Per tier: empirical selection probability.
    pub selection: Vec<SimEstimate>,
    /// Per tier, per SIR threshold: `P(SIR > T | tier serves)`.
    pub sir: Vec<Vec<SimEstimate>>,
    /// Per serving tier.
    pub load: Vec<EmpiricalLoad>,
    /// Per rate threshold: `P(rate > T)`.
    pub rate: Vec<SimEstimate>,
    pub diagnostics: Diagnostics,
    pub realizations: u64,
}

#[derive(Clone)]
struct Tally {
    served: Vec<u64>,
    sir_hits: Vec<Vec<u64>>,
    load: Vec<EmpiricalLoad>,
    rate_hits: Vec<u64>,
    edge: u64,
    empty: u64,
}

impl Tally {
    fn new(k: usize, sir_len: usize, rate_len: usize) -> Self {
        Tally {
            served: vec![0; k],
            sir_hits: vec![vec![0; sir_len]; k],
            load: vec![EmpiricalLoad::default(); k],
            rate_hits: vec![0; rate_len],
            edge: 0,
            empty: 0,
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.served.iter_mut().zip(&other.served) {
            *a += b;
        }
        for (ra, rb) in self.sir_hits.iter_mut().zip(&other.sir_hits) {
            for (a, b) in ra.iter_mut().zip(rb) {
                *a += b;
            }
        }
        for (a, b) in self.load.iter_mut().zip(&other.load) {
            a.merge(b);
        }
        for (a, b) in self.rate_hits.iter_mut().zip(&other.rate_hits) {
            *a += b;
        }
        self.edge += other.edge;
        self.empty += other.empty;
        self
    }
}

/// Runs `cfg.realizations` realizations and collects the requested
/// quantities. Selection frequencies are always collected.
pub fn simulate(n: &Network, cfg: &SimConfig, what: Quantities) -> Result<SimReport> {
    n.ensure_valid()?;
    cfg.check()?;
    let scenario = Scenario::new(n, cfg)?;
    let k = n.num_tiers();
    let sir_lin: Vec<f64> = cfg
        .sir_thresholds_db
        .iter()
        .map(|db| 10f64.powf(db / 10.0))
        .collect();
    let rates = &cfg.rate_thresholds_bps;
    let needs = Needs {
        sir: what.sir || what.rate,
        load: what.load || what.rate,
    };
    let bandwidth = n.bandwidth_hz;

    let tally = (0..cfg.realizations)
        .into_par_iter()
        .map_init(Scratch::default, |scratch, i| scenario.realize(i, needs, scratch))
        .fold(
            || Tally::new(k, sir_lin.len(), rates.len()),
            |mut t, outcome: Option<Outcome>| {
                let Some(o) = outcome else {
                    t.empty += 1;
                    return t;
                };
                t.served[o.tier] += 1;
                if o.edge {
                    t.edge += 1;
                }
                if what.sir {
                    for (hit, &thr) in t.sir_hits[o.tier].iter_mut().zip(&sir_lin) {
                        if o.sir > thr {
                            *hit += 1;
                        }
                    }
                }
                if what.load {
                    t.load[o.tier].add(o.load);
                }
                if what.rate {
                    let rate = bandwidth / o.load as f64 * o.sir.ln_1p() / std::f64::consts::LN_2;
                    for (hit, &thr) in t.rate_hits.iter_mut().zip(rates) {
                        if rate > thr {
                            *hit += 1;
                        }
                    }
                }
                t
            },
        )
        .reduce(|| Tally::new(k, sir_lin.len(), rates.len()), Tally::merge);

    let used: u64 = tally.served.iter().sum();
    Ok(SimReport {
        selection: tally
            .served
            .iter()
            .map(|&s| SimEstimate::from_counts(s, used))
            .collect(),
        sir: if what.sir {
            tally
                .sir_hits
                .iter()
                .zip(&tally.served)
                .map(|(hits, &s)| hits.iter().map(|&h| SimEstimate::from_counts(h, s)).collect())
                .collect()
        } else {
            Vec::new()
        },
        load: if what.load { tally.load } else { Vec::new() },
        rate: if what.rate {
            tally
                .rate_hits
                .iter()
                .map(|&h| SimEstimate::from_counts(h, used))
                .collect()
        } else {
            Vec::new()
        },
        diagnostics: Diagnostics {
            edge_events: tally.edge,
            empty_realizations: tally.empty,
        },
        realizations: cfg.realizations,
    })
}

/// Empirical selection probability of each tier.
pub fn run_selection(n: &Network, cfg: &SimConfig) -> Result<SimReport> {
    simulate(n, cfg, Quantities::default())
}

/// Conditional SIR CCDF per tier at `cfg.sir_thresholds_db`.
pub fn run_sir(n: &Network, cfg: &SimConfig) -> Result<SimReport> {
    simulate(
        n,
        cfg,
        Quantities {
            sir: true,
            ..Default::default()
        },
    )
}

/// Tagged-cell load distribution per serving tier.
pub fn run_load(n: &Network, cfg: &SimConfig) -> Result<SimReport> {
    simulate(
        n,
        cfg,
        Quantities {
            load: true,
            ..Default::default()
        },
    )
}

/// Rate coverage at `cfg.rate_thresholds_bps`, with SIR and load taken from
/// the same realization.
pub fn run_rate(n: &Network, cfg: &SimConfig) -> Result<SimReport> {
    simulate(
        n,
        cfg,
        Quantities {
            rate: true,
            ..Default::default()
        },
    )
}
