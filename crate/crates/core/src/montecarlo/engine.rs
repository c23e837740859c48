//! One network realization around the typical UE at the origin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::ppp::sample_ppp_into;
use super::{SimConfig, SimMode};
use crate::model::{Network, ShadowingModel};

/// Standard-normal quantile used to cap a single link's shadowing gain when
/// deciding that no farther station can win a UE. Exceeded with probability
/// ~1e-9 per link.
const SHADOWING_CAP_SIGMAS: f64 = 6.0;

/// Candidates inside this fraction of the window radius are free of edge
/// effects.
const EDGE_FRACTION: f64 = 0.9;

// Offsets into the ChaCha word space of one realization's stream.
const PURPOSE_POINTS: u128 = 0;
const PURPOSE_SHADOWING: u128 = 1;
const PURPOSE_FADING: u128 = 2;
const PURPOSE_UES: u128 = 3;
const PURPOSE_UE_LINKS: u128 = 4;
const PURPOSES: u128 = 5;

fn substream(seed: u64, realization: u64, purpose: u128) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(realization);
    rng.set_word_pos(purpose << 48);
    rng
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Needs {
    pub sir: bool,
    pub load: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Outcome {
    pub tier: usize,
    pub sir: f64,
    pub load: u32,
    pub edge: bool,
}

#[derive(Debug, Clone)]
struct TierSetup {
    shadowing: ShadowingModel,
    /// Shadowing is drawn per link (physical mode with a random law).
    random: bool,
    /// `ln X` when not random.
    ln_fixed: f64,
    ln_power: f64,
    ln_biased_power: f64,
    density: f64,
    radius: f64,
    /// Upper bound on `ln(B P X)` for one link, used to stop UE scans.
    ln_biased_cap: f64,
}

/// Per-network constants shared by all realizations.
#[derive(Debug, Clone)]
pub(crate) struct Scenario {
    tiers: Vec<TierSetup>,
    half_alpha: f64,
    inv_alpha: f64,
    window: f64,
    ue_density: f64,
    seed: u64,
    ln_biased_cap: f64,
    cell: f64,
    extent: f64,
}

#[derive(Debug, Clone, Copy)]
struct Station {
    x: f64,
    y: f64,
    tier: usize,
    /// `ln X` towards the typical UE.
    ln_shadow: f64,
    /// `ln r²` to the origin.
    ln_r2: f64,
}

#[derive(Default)]
pub(crate) struct Scratch {
    points: Vec<[f64; 2]>,
    stations: Vec<Station>,
    ues: Vec<[f64; 2]>,
    cell_start: Vec<u32>,
    cell_items: Vec<u32>,
}

impl Scenario {
    pub fn new(n: &Network, cfg: &SimConfig) -> crate::Result<Self> {
        let alpha = n.alpha;
        let window = cfg.window_radius_m;
        let tiers = n
            .tiers
            .iter()
            .zip(n.effective_densities()?)
            .map(|(t, eff)| {
                let physical = cfg.mode == SimMode::Physical;
                let random = physical && t.shadowing.is_random();
                // Equivalent geometry: true density, power scaled by E[X^(2/α)]^(α/2).
                let ln_scale = if physical {
                    0.0
                } else {
                    alpha / 2.0 * (eff / t.density).ln()
                };
                let ln_power = t.power_db * std::f64::consts::LN_10 / 10.0 + ln_scale;
                let ln_biased_power =
                    (t.power_db + t.bias_db) * std::f64::consts::LN_10 / 10.0 + ln_scale;
                let radius = if physical {
                    let ln_q = t.shadowing.ln_quantile(cfg.generation_margin_quantile);
                    window * (ln_q / alpha).exp().max(1.0)
                } else {
                    window
                };
                let density = t.density;
                let ln_fixed = if physical { t.shadowing.ln_gain(0.0) } else { 0.0 };
                let ln_cap = if random {
                    t.shadowing.ln_gain(SHADOWING_CAP_SIGMAS)
                } else {
                    ln_fixed
                };
                TierSetup {
                    shadowing: t.shadowing,
                    random,
                    ln_fixed,
                    ln_power,
                    ln_biased_power,
                    density,
                    radius,
                    ln_biased_cap: ln_biased_power + ln_cap,
                }
            })
            .collect::<Vec<_>>();
        let ln_biased_cap = tiers
            .iter()
            .map(|t| t.ln_biased_cap)
            .fold(f64::NEG_INFINITY, f64::max);
        let extent = tiers.iter().map(|t| t.radius).fold(window, f64::max);
        let expected: f64 = tiers
            .iter()
            .map(|t| t.density * std::f64::consts::PI * t.radius * t.radius)
            .sum();
        // about four stations per grid cell
        let cell = (4.0 * (2.0 * extent).powi(2) / expected.max(1.0)).sqrt();
        Ok(Scenario {
            tiers,
            half_alpha: alpha / 2.0,
            inv_alpha: 1.0 / alpha,
            window,
            ue_density: n.ue_density,
            seed: cfg.seed,
            ln_biased_cap,
            cell: cell.min(2.0 * extent),
            extent,
        })
    }

    /// Simulates realization `index`. `None` if no station was generated.
    pub fn realize(&self, index: u64, needs: Needs, s: &mut Scratch) -> Option<Outcome> {
        let stream = |purpose: u128, k: u128| substream(self.seed, index, purpose + PURPOSES * k);

        // Stations with shadowing towards the typical UE; serving = argmax of
        // biased long-term power.
        s.stations.clear();
        let mut best: Option<(usize, f64)> = None;
        for (k, t) in self.tiers.iter().enumerate() {
            let mut pts_rng = stream(PURPOSE_POINTS, k as u128);
            sample_ppp_into(t.density, t.radius, &mut pts_rng, &mut s.points);
            let mut shadow_rng = stream(PURPOSE_SHADOWING, k as u128);
            for p in &s.points {
                let ln_shadow = if t.random {
                    t.shadowing.ln_gain(shadow_rng.sample(StandardNormal))
                } else {
                    t.ln_fixed
                };
                let ln_r2 = (p[0] * p[0] + p[1] * p[1]).ln();
                let score = t.ln_biased_power + ln_shadow - self.half_alpha * ln_r2;
                let idx = s.stations.len();
                s.stations.push(Station {
                    x: p[0],
                    y: p[1],
                    tier: k,
                    ln_shadow,
                    ln_r2,
                });
                // Strict comparison keeps the lower tier on exact ties; within
                // a tier the nearer station wins.
                let take = match best {
                    None => true,
                    Some((b, bs)) => {
                        score > bs
                            || (score == bs && s.stations[b].tier == k && ln_r2 < s.stations[b].ln_r2)
                    }
                };
                if take {
                    best = Some((idx, score));
                }
            }
        }
        let (serving, _) = best?;
        let srv = s.stations[serving];
        // displaced distance² = r² X^(-2/α)
        let ln_disp2 = srv.ln_r2 - 2.0 * self.inv_alpha * srv.ln_shadow;
        let edge = ln_disp2 >= 2.0 * (EDGE_FRACTION * self.window).ln();

        let sir = if needs.sir {
            let mut signal = 0.0;
            let mut interference = 0.0;
            let mut offset = 0;
            for (k, t) in self.tiers.iter().enumerate() {
                let mut fading_rng = stream(PURPOSE_FADING, k as u128);
                let end = offset
                    + s.stations[offset..]
                        .iter()
                        .take_while(|st| st.tier == k)
                        .count();
                for (i, st) in s.stations[offset..end].iter().enumerate() {
                    let h = -(1.0 - fading_rng.random::<f64>()).ln();
                    let rx = h * (t.ln_power + st.ln_shadow - self.half_alpha * st.ln_r2).exp();
                    if offset + i == serving {
                        signal = rx;
                    } else {
                        interference += rx;
                    }
                }
                offset = end;
            }
            if interference > 0.0 {
                signal / interference
            } else {
                f64::INFINITY
            }
        } else {
            f64::NAN
        };

        let load = if needs.load && self.ue_density > 0.0 {
            1 + self.count_attached(index, serving, s)
        } else {
            1
        };

        Some(Outcome {
            tier: srv.tier,
            sir,
            load,
            edge,
        })
    }

    fn grid_dim(&self) -> usize {
        ((2.0 * self.extent / self.cell).ceil() as usize).max(1)
    }

    fn cell_of(&self, x: f64, y: f64) -> (i64, i64) {
        let d = self.grid_dim() as i64;
        let cx = (((x + self.extent) / self.cell).floor() as i64).clamp(0, d - 1);
        let cy = (((y + self.extent) / self.cell).floor() as i64).clamp(0, d - 1);
        (cx, cy)
    }

    fn build_grid(&self, s: &mut Scratch) {
        let d = self.grid_dim();
        s.cell_start.clear();
        s.cell_start.resize(d * d + 1, 0);
        for st in &s.stations {
            let (cx, cy) = self.cell_of(st.x, st.y);
            s.cell_start[cy as usize * d + cx as usize + 1] += 1;
        }
        for i in 0..d * d {
            s.cell_start[i + 1] += s.cell_start[i];
        }
        let mut fill = s.cell_start.clone();
        s.cell_items.clear();
        s.cell_items.resize(s.stations.len(), 0);
        for (i, st) in s.stations.iter().enumerate() {
            let (cx, cy) = self.cell_of(st.x, st.y);
            let c = cy as usize * d + cx as usize;
            s.cell_items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
    }

    /// Number of other UEs whose biased long-term power is highest from the
    /// tagged station.
    fn count_attached(&self, index: u64, tagged: usize, s: &mut Scratch) -> u32 {
        let mut ue_rng = substream(self.seed, index, PURPOSE_UES);
        sample_ppp_into(self.ue_density, self.window, &mut ue_rng, &mut s.ues);
        if s.ues.is_empty() {
            return 0;
        }
        self.build_grid(s);
        let mut link_rng = substream(self.seed, index, PURPOSE_UE_LINKS);
        let d = self.grid_dim() as i64;
        let tag = s.stations[tagged];
        let tag_tier = &self.tiers[tag.tier];
        let mut attached = 0;

        for u in &s.ues {
            let dx = tag.x - u[0];
            let dy = tag.y - u[1];
            let tag_d2 = dx * dx + dy * dy;
            let tag_score = tag_tier.ln_biased_power + self.link_shadow(tag_tier, &mut link_rng)
                - self.half_alpha * tag_d2.ln();
            let (cx, cy) = self.cell_of(u[0], u[1]);
            let mut beaten = false;
            let mut m: i64 = 0;
            'rings: loop {
                // Cells in ring m are at Chebyshev distance m from the UE's cell.
                let mut visited_any = false;
                for gy in (cy - m)..=(cy + m) {
                    if gy < 0 || gy >= d {
                        continue;
                    }
                    let edge_row = gy == cy - m || gy == cy + m;
                    let mut gx = cx - m;
                    while gx <= cx + m {
                        if gx >= 0 && gx < d {
                            visited_any = true;
                            let c = (gy * d + gx) as usize;
                            let (a, b) = (s.cell_start[c] as usize, s.cell_start[c + 1] as usize);
                            for &j in &s.cell_items[a..b] {
                                let j = j as usize;
                                if j == tagged {
                                    continue;
                                }
                                let st = &s.stations[j];
                                let t = &self.tiers[st.tier];
                                let ex = st.x - u[0];
                                let ey = st.y - u[1];
                                let d2 = ex * ex + ey * ey;
                                let score = t.ln_biased_power + self.link_shadow(t, &mut link_rng)
                                    - self.half_alpha * d2.ln();
                                let wins = score > tag_score
                                    || (score == tag_score
                                        && (st.tier < tag.tier || (st.tier == tag.tier && d2 < tag_d2)));
                                if wins {
                                    beaten = true;
                                    break 'rings;
                                }
                            }
                        }
                        gx += if edge_row || m == 0 { 1 } else { 2 * m };
                    }
                }
                if !visited_any && m > 0 {
                    break;
                }
                // Stations outside ring m are at least m·cell away.
                if m > 0 {
                    let reach = self.ln_biased_cap - self.half_alpha * 2.0 * (m as f64 * self.cell).ln();
                    if reach < tag_score {
                        break;
                    }
                }
                m += 1;
                if m > d {
                    break;
                }
            }
            if !beaten {
                attached += 1;
            }
        }
        attached
    }

    #[inline]
    fn link_shadow(&self, t: &TierSetup, rng: &mut ChaCha8Rng) -> f64 {
        if t.random {
            t.shadowing.ln_gain(rng.sample(StandardNormal))
        } else {
            t.ln_fixed
        }
    }
}
