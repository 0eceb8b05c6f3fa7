//! Orbit iteration: burn-in, streaming collection, cycle detection and
//! reproducible random initial points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::maps::{Point, SystemConfig};

/// Default burn-in length N.
pub const DEFAULT_BURN: u64 = 1_000_000;
/// Default number of plotted orbit points M.
pub const DEFAULT_PLOT: u64 = 100_000;

/// Lower and upper bound (exclusive) of a random initial coordinate.
pub const TYPICAL_LOW: f64 = 0.01;
pub const TYPICAL_HIGH: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitSpec {
    pub initial: Point,
    pub n_burn: u64,
    pub m_collect: u64,
}

impl OrbitSpec {
    pub fn new(initial: Point) -> Self {
        OrbitSpec {
            initial,
            n_burn: DEFAULT_BURN,
            m_collect: DEFAULT_PLOT,
        }
    }
}

/// Returns `z_n` with `z_0 = initial`.
pub fn iterate_burn(config: &SystemConfig, initial: Point, n: u64) -> Point {
    let mut z = initial;
    for _ in 0..n {
        z = config.step(z);
    }
    z
}

/// Like [`iterate_burn`], calling `progress(done, n)` after each tenth of
/// the work. Produces the same point bit for bit.
pub fn iterate_burn_reporting(
    config: &SystemConfig,
    initial: Point,
    n: u64,
    mut progress: impl FnMut(u64, u64),
) -> Point {
    let mut z = initial;
    let mut done = 0;
    for tenth in 1..=10u64 {
        let target = n / 10 * tenth + if tenth == 10 { n % 10 } else { 0 };
        z = iterate_burn(config, z, target - done);
        done = target;
        progress(done, n);
    }
    z
}

/// Infinite forward orbit `step(start), step²(start), ...`.
#[derive(Debug, Clone)]
pub struct Orbit {
    config: SystemConfig,
    current: Point,
}

impl Orbit {
    pub fn new(config: SystemConfig, start: Point) -> Self {
        Orbit {
            config,
            current: start,
        }
    }
}

impl Iterator for Orbit {
    type Item = Point;

    #[inline]
    fn next(&mut self) -> Option<Point> {
        self.current = self.config.step(self.current);
        Some(self.current)
    }
}

/// The next `m` orbit points after `start` (not including `start`).
pub fn collect_orbit(config: &SystemConfig, start: Point, m: u64) -> std::iter::Take<Orbit> {
    Orbit::new(*config, start).take(m as usize)
}

/// Tuning knobs for [`detect_cycle`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleSettings {
    pub epsilon: f64,
    pub max_period: usize,
    pub confirmations: usize,
}

impl Default for CycleSettings {
    fn default() -> Self {
        CycleSettings {
            epsilon: 1e-9,
            max_period: 4096,
            confirmations: 3,
        }
    }
}

/// A finite periodic attractor found after burn-in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleReport {
    pub period: usize,
    /// `z_n, z_{n+1}, ..., z_{n+period-1}`.
    pub points: Vec<Point>,
    pub epsilon: f64,
    pub confirmed_loops: usize,
}

/// Burns in for `n_burn` steps, then looks for the smallest period.
pub fn detect_cycle(
    config: &SystemConfig,
    initial: Point,
    n_burn: u64,
    settings: &CycleSettings,
) -> Option<CycleReport> {
    let z = iterate_burn(config, initial, n_burn);
    detect_cycle_from(config, z, settings)
}

/// Cycle search starting at an already burned-in point.
///
/// For each `k` in `1..=max_period` with `|z_{n+k} - z_n| < epsilon`
/// (max-norm), the candidate is accepted only if every point of the next
/// `confirmations` loops stays within `epsilon` of its counterpart in the
/// first loop. The first accepted `k` is returned, so no smaller period
/// passed the same test.
pub fn detect_cycle_from(
    config: &SystemConfig,
    start: Point,
    settings: &CycleSettings,
) -> Option<CycleReport> {
    let eps = settings.epsilon;
    if eps.is_nan() || eps <= 0.0 || settings.max_period == 0 || settings.confirmations == 0 {
        return None;
    }
    let mut trajectory = Vec::with_capacity(settings.max_period.min(1 << 16) + 1);
    trajectory.push(start);
    for k in 1..=settings.max_period {
        let next = config.step(trajectory[k - 1]);
        trajectory.push(next);
        if next.chebyshev(&start) < eps
            && loops_repeat(config, &trajectory[..k], next, settings.confirmations, eps)
        {
            trajectory.truncate(k);
            return Some(CycleReport {
                period: k,
                points: trajectory,
                epsilon: eps,
                confirmed_loops: settings.confirmations,
            });
        }
    }
    None
}

fn loops_repeat(
    config: &SystemConfig,
    first_loop: &[Point],
    mut z: Point,
    loops: usize,
    eps: f64,
) -> bool {
    for _ in 0..loops {
        for reference in first_loop {
            if z.chebyshev(reference) >= eps {
                return false;
            }
            z = config.step(z);
        }
    }
    true
}

/// A reproducible "typical" starting point, uniform on `(0.01, 0.99)²`.
///
/// Uses ChaCha8 from `rand_chacha` keyed through
/// `SeedableRng::seed_from_u64`, so a seed yields the same point on every
/// platform.
pub fn random_initial(seed: u64) -> Point {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coord = || loop {
        let u: f64 = rng.random();
        let v = TYPICAL_LOW + (TYPICAL_HIGH - TYPICAL_LOW) * u;
        if v > TYPICAL_LOW && v < TYPICAL_HIGH {
            return v;
        }
    };
    let x = coord();
    let y = coord();
    Point { x, y }
}
