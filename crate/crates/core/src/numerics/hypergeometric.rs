use statrs::function::gamma::ln_gamma;

use super::quadrature::integrate;
use crate::error::{Error, Result};

const QUAD_REL_TOL: f64 = 1e-12;

/// Panels on the left of the Euler integral grow geometrically by this ratio
/// once `|z| > 1`, so each panel sees a bounded change in `(1 - tz)^-a`.
const PANEL_RATIO: f64 = 4.0;

/// Gauss hypergeometric function `2F1(a, b; c; z)` for `c > b > 0`, `z <= 0`.
///
/// Evaluated from the Euler integral
/// `Γ(c)/(Γ(b)Γ(c-b)) ∫_0^1 t^(b-1) (1-t)^(c-b-1) (1-tz)^(-a) dt`.
/// Endpoint singularities (`b < 1` at `t = 0`, `c - b < 1` at `t = 1`) are
/// removed with power substitutions, and for large `|z|` the left half of
/// the interval is cut into geometric panels around the `t ~ 1/|z|` knee.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::domain(format!("2F1 requires b > 0, got b = {b}")));
    }
    if !(c > b) || !c.is_finite() {
        return Err(Error::domain(format!(
            "2F1 requires c > b, got b = {b}, c = {c}"
        )));
    }
    if !(z <= 0.0) || !z.is_finite() {
        return Err(Error::domain(format!(
            "2F1 is only supported for finite z <= 0, got z = {z}"
        )));
    }
    if !a.is_finite() {
        return Err(Error::domain(format!("2F1 requires finite a, got {a}")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let norm = (ln_gamma(c) - ln_gamma(b) - ln_gamma(c - b)).exp();
    Ok(norm * euler_integral(a, b, c, z))
}

fn euler_integral(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let d = c - b;
    let s = -z;
    let kernel = |t: f64| (1.0 + t * s).powf(-a);

    // Breakpoints on [0, 1/2].
    let mut cuts = vec![0.0];
    if s > 2.0 {
        let mut t = 1.0 / s;
        while t < 0.5 {
            cuts.push(t);
            t *= PANEL_RATIO;
        }
    }
    cuts.push(0.5);

    let mut total = 0.0;

    // First panel [0, t1]: t = t1 * u^(1/b) absorbs t^(b-1).
    let t1 = cuts[1];
    total += if b < 1.0 {
        let inv_b = 1.0 / b;
        let scale = t1.powf(b) / b;
        scale
            * integrate(
                |u: f64| {
                    let t = t1 * u.powf(inv_b);
                    (1.0 - t).powf(d - 1.0) * kernel(t)
                },
                0.0,
                1.0,
                QUAD_REL_TOL,
            )
    } else {
        integrate(
            |t: f64| t.powf(b - 1.0) * (1.0 - t).powf(d - 1.0) * kernel(t),
            0.0,
            t1,
            QUAD_REL_TOL,
        )
    };

    for w in cuts[1..].windows(2) {
        total += integrate(
            |t: f64| t.powf(b - 1.0) * (1.0 - t).powf(d - 1.0) * kernel(t),
            w[0],
            w[1],
            QUAD_REL_TOL,
        );
    }

    // Last panel [1/2, 1]: 1 - t = v^(1/d) / 2 absorbs (1-t)^(d-1).
    total += if d < 1.0 {
        let inv_d = 1.0 / d;
        let scale = 0.5f64.powf(d) / d;
        scale
            * integrate(
                |v: f64| {
                    let t = 1.0 - 0.5 * v.powf(inv_d);
                    t.powf(b - 1.0) * kernel(t)
                },
                0.0,
                1.0,
                QUAD_REL_TOL,
            )
    } else {
        integrate(
            |t: f64| t.powf(b - 1.0) * (1.0 - t).powf(d - 1.0) * kernel(t),
            0.5,
            1.0,
            QUAD_REL_TOL,
        )
    };
    total
}

/// Interference integral `F(T, α, z) = 2 T z^(2/α - 1) / (α - 2) ·
/// 2F1(1, 1 - 2/α; 2 - 2/α; -T/z)`.
///
/// `z` is the bias ratio of the interfering tier to the serving tier.
pub fn interference_f(threshold: f64, alpha: f64, z: f64) -> Result<f64> {
    if !(alpha > 2.0) || !alpha.is_finite() {
        return Err(Error::domain(format!(
            "path-loss exponent must exceed 2, got {alpha}"
        )));
    }
    if !(threshold >= 0.0) || !threshold.is_finite() {
        return Err(Error::domain(format!(
            "SIR threshold must be finite and non-negative, got {threshold}"
        )));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("bias ratio must be positive, got {z}")));
    }
    if threshold == 0.0 {
        return Ok(0.0);
    }
    let delta = 2.0 / alpha;
    let lead = 2.0 * threshold * z.powf(delta - 1.0) / (alpha - 2.0);
    Ok(lead * gauss_2f1(1.0, 1.0 - delta, 2.0 - delta, -threshold / z)?)
}
