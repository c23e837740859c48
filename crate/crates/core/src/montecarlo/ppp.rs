use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

/// Expected number of points per generation ring.
const POINTS_PER_RING: f64 = 64.0;

/// Draws a homogeneous Poisson point process of `density` on the disk of
/// `radius` centred at the origin.
///
/// Points are generated ring by ring over equal-area annuli whose radii
/// depend only on `density`. With the same stream, a larger radius therefore
/// reproduces every point of a smaller one except those in the last partial
/// ring, which keeps windows of different size directly comparable.
pub fn sample_ppp<R: Rng + ?Sized>(density: f64, radius: f64, rng: &mut R) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    sample_ppp_into(density, radius, rng, &mut out);
    out
}

pub fn sample_ppp_into<R: Rng + ?Sized>(
    density: f64,
    radius: f64,
    rng: &mut R,
    out: &mut Vec<[f64; 2]>,
) {
    out.clear();
    if !(density > 0.0) || !(radius > 0.0) {
        return;
    }
    let ring_area = POINTS_PER_RING / density;
    let total_area = PI * radius * radius;
    let mut inner_sq = 0.0;
    let mut j = 0u64;
    loop {
        j += 1;
        let outer_area = (j as f64 * ring_area).min(total_area);
        let outer_sq = outer_area / PI;
        let mean = density * PI * (outer_sq - inner_sq);
        if mean > 0.0 {
            let count = Poisson::new(mean).map(|p| p.sample(rng)).unwrap_or(0.0) as usize;
            out.reserve(count);
            for _ in 0..count {
                let r = (inner_sq + rng.random::<f64>() * (outer_sq - inner_sq)).sqrt();
                let theta = 2.0 * PI * rng.random::<f64>();
                let (s, c) = theta.sin_cos();
                out.push([r * c, r * s]);
            }
        }
        if outer_area >= total_area {
            break;
        }
        inner_sq = outer_sq;
    }
}
