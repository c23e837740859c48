use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Shape of the gamma law fitted to Poisson–Voronoi cell areas.
const SHAPE: f64 = 3.5;

/// Truncated distribution of the number of UEs sharing the tagged BS.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadPmf {
    /// `probabilities[i] = P(Ψ = i + 1)`.
    pub probabilities: Vec<f64>,
    /// `1 - Σ probabilities`, never negative.
    pub truncation_mass: f64,
    /// Mean of the untruncated law.
    pub mean_exact: f64,
}

impl LoadPmf {
    /// `P(Ψ = load)`, zero outside the retained support.
    pub fn pmf(&self, load: usize) -> f64 {
        if load == 0 {
            return 0.0;
        }
        self.probabilities.get(load - 1).copied().unwrap_or(0.0)
    }

    pub fn cdf(&self) -> Vec<f64> {
        self.probabilities
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }

    pub fn max_load(&self) -> usize {
        self.probabilities.len()
    }
}

/// `P(Ψ = n + 1)` for `c = λ_u P_k / λ_k`, evaluated in log space:
/// `3.5^3.5 / n! · Γ(n + 4.5) / Γ(3.5) · c^n (3.5 + c)^-(n + 4.5)`.
pub(crate) fn load_term(c: f64, n: usize) -> f64 {
    if c == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    let ln_p = SHAPE * SHAPE.ln() + ln_gamma(nf + SHAPE + 1.0)
        - ln_gamma(nf + 1.0)
        - ln_gamma(SHAPE)
        + nf * c.ln()
        - (nf + SHAPE + 1.0) * (SHAPE + c).ln();
    ln_p.exp()
}

pub(crate) fn check_ratio(c: f64) -> Result<()> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::domain(format!(
            "load ratio λu·P/λ must be finite and >= 0, got {c}"
        )));
    }
    Ok(())
}

/// Load PMF for a given ratio `c`, keeping loads `1..=n_max`.
pub fn load_pmf_for_ratio(c: f64, n_max: usize) -> Result<LoadPmf> {
    check_ratio(c)?;
    if n_max == 0 {
        return Err(Error::domain("n_max must be >= 1"));
    }
    let probabilities: Vec<f64> = (0..n_max).map(|n| load_term(c, n)).collect();
    let total: f64 = probabilities.iter().sum();
    Ok(LoadPmf {
        probabilities,
        truncation_mass: (1.0 - total).max(0.0),
        mean_exact: 1.0 + 9.0 / 7.0 * c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent recurrence: p(n+1)/p(n) = (n + 4.5)/(n + 1) · c/(3.5 + c),
    /// p(0) = (3.5/(3.5 + c))^4.5.
    fn recurrence(c: f64, n_max: usize) -> Vec<f64> {
        let q = c / (3.5 + c);
        let mut p = (3.5 / (3.5 + c)).powf(4.5);
        let mut out = Vec::with_capacity(n_max);
        for n in 0..n_max {
            out.push(p);
            p *= (n as f64 + 4.5) / (n as f64 + 1.0) * q;
        }
        out
    }

    #[test]
    fn no_other_users() {
        let pmf = load_pmf_for_ratio(0.0, 5).unwrap();
        assert_eq!(pmf.probabilities, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(pmf.mean_exact, 1.0);
        assert_eq!(pmf.truncation_mass, 0.0);
    }

    #[test]
    fn first_term_collapses() {
        let pmf = load_pmf_for_ratio(3.5, 1).unwrap();
        assert!((pmf.probabilities[0] - 2f64.powf(-4.5)).abs() < 1e-15);
        assert!((pmf.probabilities[0] - 0.044194).abs() < 1e-6);
    }

    #[test]
    fn matches_recurrence() {
        for &c in &[0.1, 1.0, 10.0, 100.0] {
            let pmf = load_pmf_for_ratio(c, 3000).unwrap();
            let oracle = recurrence(c, 3000);
            for (a, b) in pmf.probabilities.iter().zip(&oracle) {
                if *b > 1e-300 {
                    assert!(((a - b) / b).abs() < 1e-10, "c={c}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn mean_matches_summation() {
        let pmf = load_pmf_for_ratio(10.0, 2000).unwrap();
        let mean: f64 = recurrence(10.0, 2000)
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1) as f64 * p)
            .sum();
        assert!((mean - pmf.mean_exact).abs() < 1e-10 * mean);
        assert!((pmf.mean_exact - 13.857).abs() < 1e-3);
    }

    #[test]
    fn mass_accounting() {
        let pmf = load_pmf_for_ratio(10.0, 20).unwrap();
        let s: f64 = pmf.probabilities.iter().sum();
        assert!((s + pmf.truncation_mass - 1.0).abs() < 1e-12);
        assert!(pmf.truncation_mass > 0.1);
        assert_eq!(pmf.pmf(0), 0.0);
        assert_eq!(pmf.pmf(21), 0.0);
        assert!(load_pmf_for_ratio(-1.0, 5).is_err());
        assert!(load_pmf_for_ratio(1.0, 0).is_err());
    }
}
