//! Network and tier description, validation, and the two transforms that act
//! on whole networks: effective densities and the shadowing-free equivalent.
//!
//! Units: densities are base stations per square meter, bandwidth in Hz,
//! powers and biases in dB. Absolute power levels never matter because the
//! model is interference limited; only per-tier ratios enter any formula.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::numerics::ShadowingModel;
use crate::numerics::fractional_moment;

/// One class of base stations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tier {
    pub power_db: f64,
    /// Base stations per square meter.
    pub density: f64,
    pub bias_db: f64,
    pub shadowing: ShadowingModel,
}

impl Tier {
    pub fn new(power_db: f64, density: f64, bias_db: f64, shadowing: ShadowingModel) -> Self {
        Tier {
            power_db,
            density,
            bias_db,
            shadowing,
        }
    }

    pub fn power_linear(&self) -> f64 {
        db_to_linear(self.power_db)
    }

    pub fn bias_linear(&self) -> f64 {
        db_to_linear(self.bias_db)
    }
}

/// A K-tier network. The order of `tiers` is the tier index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    /// Path-loss exponent, must exceed 2.
    pub alpha: f64,
    pub bandwidth_hz: f64,
    /// User equipments per square meter.
    pub ue_density: f64,
    pub tiers: Vec<Tier>,
}

/// A violated invariant together with the path of the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl Network {
    pub fn num_tiers(&self) -> usize {
        self.tiers.len()
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        validate(self)
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        validate(self).map_err(Error::InvalidNetwork)
    }

    pub(crate) fn check_tier(&self, k: usize) -> Result<()> {
        if k < self.tiers.len() {
            Ok(())
        } else {
            Err(Error::TierIndex {
                index: k,
                tiers: self.tiers.len(),
            })
        }
    }

    pub fn effective_densities(&self) -> Result<Vec<f64>> {
        self.tiers
            .iter()
            .map(|t| effective_density(t, self.alpha))
            .collect()
    }
}

/// Checks every invariant and reports all violations, not just the first.
pub fn validate(n: &Network) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let mut push = |path: String, message: &str| {
        out.push(Violation {
            path,
            message: message.to_string(),
        })
    };
    if !(n.alpha > 2.0) || !n.alpha.is_finite() {
        push("alpha".into(), "alpha must exceed 2");
    }
    if !(n.bandwidth_hz > 0.0) || !n.bandwidth_hz.is_finite() {
        push("bandwidth_hz".into(), "bandwidth must be finite and > 0");
    }
    if !(n.ue_density >= 0.0) || !n.ue_density.is_finite() {
        push("ue_density".into(), "UE density must be finite and >= 0");
    }
    if n.tiers.is_empty() {
        push("tiers".into(), "K >= 1 required");
    }
    for (i, t) in n.tiers.iter().enumerate() {
        if !t.power_db.is_finite() {
            push(format!("tiers[{i}].power_db"), "power must be finite");
        }
        if !(t.density > 0.0) || !t.density.is_finite() {
            push(format!("tiers[{i}].density"), "density must be finite and > 0");
        }
        if !t.bias_db.is_finite() {
            push(format!("tiers[{i}].bias_db"), "bias must be finite");
        }
        if let Err(msg) = t.shadowing.check() {
            push(format!("tiers[{i}].shadowing"), &msg);
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Density of the tier after its points are displaced by their shadowing,
/// `λ E[X^(2/α)]`.
pub fn effective_density(t: &Tier, alpha: f64) -> Result<f64> {
    Ok(t.density * fractional_moment(&t.shadowing, alpha)?)
}

/// The shadowing-free network whose tier powers are scaled by
/// `E[X^(2/α)]^(α/2)`. Every analytic output is unchanged by this map.
pub fn equivalent_network(n: &Network) -> Result<Network> {
    n.ensure_valid()?;
    let tiers = n
        .tiers
        .iter()
        .map(|t| {
            let moment = fractional_moment(&t.shadowing, n.alpha)?;
            Ok(Tier {
                power_db: t.power_db + 5.0 * n.alpha * moment.log10(),
                shadowing: ShadowingModel::NONE,
                ..*t
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Network {
        tiers,
        ..n.clone()
    })
}
