#![allow(dead_code)]

use hetnet_rate::{Network, ShadowingModel, Tier};

pub const LAMBDA1: f64 = 1e-6;
pub const P1_DB: f64 = 43.0;
pub const P2_DB: f64 = P1_DB - 23.0;
pub const BANDWIDTH: f64 = 1e7;

/// Two-tier network with lognormal shadowing (zero dB mean).
pub fn two_tier(sigma: [f64; 2], lambda2_ratio: f64, ue_ratio: f64, bias2_db: f64) -> Network {
    Network {
        alpha: 4.0,
        bandwidth_hz: BANDWIDTH,
        ue_density: ue_ratio * LAMBDA1,
        tiers: vec![
            Tier::new(P1_DB, LAMBDA1, 0.0, ShadowingModel::lognormal(0.0, sigma[0])),
            Tier::new(
                P2_DB,
                lambda2_ratio * LAMBDA1,
                bias2_db,
                ShadowingModel::lognormal(0.0, sigma[1]),
            ),
        ],
    }
}

pub fn fig1(sigma2: f64, bias2_db: f64) -> Network {
    two_tier([4.0, sigma2], 2.0, 20.0, bias2_db)
}

pub fn fig2_rate() -> Network {
    two_tier([4.0, 8.0], 5.0, 10.0, 5.0)
}

pub fn fig2_bias(sigma2: f64) -> Network {
    two_tier([4.0, sigma2], 5.0, 40.0, 0.0)
}

pub fn single_tier(ue_density: f64) -> Network {
    Network {
        alpha: 4.0,
        bandwidth_hz: BANDWIDTH,
        ue_density,
        tiers: vec![Tier::new(P1_DB, LAMBDA1, 0.0, ShadowingModel::NONE)],
    }
}

pub fn log_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| (min.ln() + (max.ln() - min.ln()) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Power series of 2F1, |z| < 1.
pub fn series_2f1(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..200_000 {
        let n = n as f64;
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Series oracle on all of z <= 0: direct for z >= -1/2, Pfaff transform
/// `(1-z)^-b 2F1(c-a, b; c; z/(z-1))` below.
pub fn oracle_2f1(a: f64, b: f64, c: f64, z: f64) -> f64 {
    if z >= -0.5 {
        series_2f1(a, b, c, z)
    } else {
        (1.0 - z).powf(-b) * series_2f1(c - a, b, c, z / (z - 1.0))
    }
}
