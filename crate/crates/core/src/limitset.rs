//! Limit-set approximation: rendering an orbit segment into a raster, and
//! checking that the picture does not depend on the starting point or on a
//! longer burn-in.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{Point, SystemConfig};
use crate::orbit::{collect_orbit, iterate_burn, random_initial};
use crate::raster::{compare, ComparisonReport, OccupancyBitmap, Raster};

pub const DEFAULT_THRESHOLD: f64 = 0.95;
pub const DEFAULT_DILATION: usize = 1;
pub const DEFAULT_TRIALS: usize = 5;

/// Burn in `n_burn` steps from `initial`, then rasterize the next
/// `m_collect` points.
pub fn render_orbit(
    config: &SystemConfig,
    initial: Point,
    n_burn: u64,
    m_collect: u64,
    width: usize,
    height: usize,
) -> Result<Raster> {
    let mut raster = Raster::new(width, height)?;
    let z = iterate_burn(config, initial, n_burn);
    raster.accumulate(collect_orbit(config, z, m_collect));
    Ok(raster)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
}

/// Settings shared by every run of a stability check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySettings {
    pub trials: usize,
    pub dilation: usize,
    pub threshold: f64,
}

impl Default for StabilitySettings {
    fn default() -> Self {
        StabilitySettings {
            trials: DEFAULT_TRIALS,
            dilation: DEFAULT_DILATION,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRun {
    pub label: String,
    pub seed: Option<u64>,
    pub initial: Point,
    pub n_burn: u64,
    pub occupied_pixels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub first: usize,
    pub second: usize,
    pub report: ComparisonReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub verdict: Verdict,
    pub threshold: f64,
    pub dilation: usize,
    pub min_dilated_jaccard: f64,
    pub runs: Vec<TrialRun>,
    pub pairs: Vec<PairComparison>,
}

/// Renders one bitmap per seed plus one more from the first seed's point at
/// twice the burn-in, and compares every pair. Stable iff each pair's
/// dilated Jaccard score reaches `threshold`.
#[allow(clippy::too_many_arguments)]
pub fn stability_check(
    config: &SystemConfig,
    n_burn: u64,
    m_collect: u64,
    width: usize,
    height: usize,
    seeds: &[u64],
    dilation: usize,
    threshold: f64,
) -> Result<StabilityReport> {
    if seeds.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "stability check needs at least 2 trials, got {}",
            seeds.len()
        )));
    }
    let mut plan: Vec<(String, Option<u64>, Point, u64)> = seeds
        .iter()
        .map(|&s| (format!("seed {s}"), Some(s), random_initial(s), n_burn))
        .collect();
    let (_, first_seed, first_point, _) = plan[0].clone();
    plan.push((
        format!("seed {} at 2N", first_seed.unwrap_or_default()),
        first_seed,
        first_point,
        n_burn.saturating_mul(2),
    ));

    let bitmaps: Vec<OccupancyBitmap> = plan
        .par_iter()
        .map(|(_, _, initial, burn)| {
            render_orbit(config, *initial, *burn, m_collect, width, height).map(|r| r.occupancy())
        })
        .collect::<Result<_>>()?;

    let index_pairs: Vec<(usize, usize)> = (0..bitmaps.len())
        .flat_map(|i| (i + 1..bitmaps.len()).map(move |j| (i, j)))
        .collect();
    let pairs: Vec<PairComparison> = index_pairs
        .par_iter()
        .map(|&(i, j)| {
            compare(&bitmaps[i], &bitmaps[j], dilation).map(|report| PairComparison {
                first: i,
                second: j,
                report,
            })
        })
        .collect::<Result<_>>()?;

    let min_dilated_jaccard = pairs
        .iter()
        .map(|p| p.report.dilated_jaccard)
        .fold(1.0, f64::min);
    let verdict = if min_dilated_jaccard >= threshold {
        Verdict::Stable
    } else {
        Verdict::Unstable
    };
    let runs = plan
        .into_iter()
        .zip(&bitmaps)
        .map(|((label, seed, initial, n_burn), bm)| TrialRun {
            label,
            seed,
            initial,
            n_burn,
            occupied_pixels: bm.population(),
        })
        .collect();
    Ok(StabilityReport {
        verdict,
        threshold,
        dilation,
        min_dilated_jaccard,
        runs,
        pairs,
    })
}
