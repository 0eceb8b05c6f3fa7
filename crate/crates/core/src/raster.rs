//! Pixel rasters of orbit segments, occupancy bitmaps and their comparison,
//! and grayscale rendering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::Point;
use crate::orbit::CycleReport;

pub const EXPLORER_SIZE: usize = 400;
pub const STILL_SIZE: usize = 800;
pub const DEFAULT_ENLARGEMENT: usize = 5;

/// Pixel containing `point`. Row 0 is the top of the image (`y = 1`);
/// coordinates equal to 1 fall into the last column/row.
#[inline]
pub fn to_pixel(point: Point, width: usize, height: usize) -> (usize, usize) {
    let col = ((point.x * width as f64) as usize).min(width - 1);
    let row_up = ((point.y * height as f64) as usize).min(height - 1);
    (col, height - 1 - row_up)
}

/// Per-pixel visit counts, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    counts: Vec<u64>,
}

impl Raster {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Raster {
            width,
            height,
            counts: vec![0; width * height],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count_at(&self, col: usize, row: usize) -> u64 {
        self.counts[row * self.width + col]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn max_count(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    #[inline]
    pub fn add(&mut self, point: Point) {
        let (c, r) = to_pixel(point, self.width, self.height);
        // u64 counters; overflow is out of reach and left unchecked.
        self.counts[r * self.width + c] += 1;
    }

    /// Adds every point of `points`, streaming.
    pub fn accumulate<I: IntoIterator<Item = Point>>(&mut self, points: I) {
        for p in points {
            self.add(p);
        }
    }

    pub fn occupancy(&self) -> OccupancyBitmap {
        OccupancyBitmap {
            width: self.width,
            height: self.height,
            bits: self.counts.iter().map(|&c| c > 0).collect(),
        }
    }
}

pub fn accumulate<I: IntoIterator<Item = Point>>(mut raster: Raster, points: I) -> Raster {
    raster.accumulate(points);
    raster
}

pub fn occupancy(raster: &Raster) -> OccupancyBitmap {
    raster.occupancy()
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument(format!(
            "raster dimensions must be at least 1x1, got {width}x{height}"
        )));
    }
    Ok(())
}

/// Visited / not visited per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyBitmap {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl OccupancyBitmap {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        check_dims(width, height)?;
        Ok(OccupancyBitmap {
            width,
            height,
            bits: vec![false; width * height],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn population(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Square-structuring-element dilation of the given radius.
    pub fn dilate(&self, radius: usize) -> OccupancyBitmap {
        if radius == 0 {
            return self.clone();
        }
        let (w, h) = (self.width, self.height);
        let mut rows = vec![false; w * h];
        let mut prefix = vec![0u32; w.max(h) + 1];
        for r in 0..h {
            for c in 0..w {
                prefix[c + 1] = prefix[c] + self.bits[r * w + c] as u32;
            }
            for c in 0..w {
                let lo = c.saturating_sub(radius);
                let hi = (c + radius + 1).min(w);
                rows[r * w + c] = prefix[hi] > prefix[lo];
            }
        }
        let mut out = vec![false; w * h];
        for c in 0..w {
            for r in 0..h {
                prefix[r + 1] = prefix[r] + rows[r * w + c] as u32;
            }
            for r in 0..h {
                let lo = r.saturating_sub(radius);
                let hi = (r + radius + 1).min(h);
                out[r * w + c] = prefix[hi] > prefix[lo];
            }
        }
        OccupancyBitmap {
            width: w,
            height: h,
            bits: out,
        }
    }

    /// Chessboard distance from every pixel to the nearest set pixel
    /// (`u32::MAX` everywhere when nothing is set).
    fn distance_to_set(&self) -> Vec<u32> {
        const INF: u32 = u32::MAX / 2;
        let (w, h) = (self.width, self.height);
        let mut d: Vec<u32> = self.bits.iter().map(|&b| if b { 0 } else { INF }).collect();
        for r in 0..h {
            for c in 0..w {
                let mut best = d[r * w + c];
                if c > 0 {
                    best = best.min(d[r * w + c - 1] + 1);
                }
                if r > 0 {
                    let up = (r - 1) * w;
                    best = best.min(d[up + c] + 1);
                    if c > 0 {
                        best = best.min(d[up + c - 1] + 1);
                    }
                    if c + 1 < w {
                        best = best.min(d[up + c + 1] + 1);
                    }
                }
                d[r * w + c] = best;
            }
        }
        for r in (0..h).rev() {
            for c in (0..w).rev() {
                let mut best = d[r * w + c];
                if c + 1 < w {
                    best = best.min(d[r * w + c + 1] + 1);
                }
                if r + 1 < h {
                    let down = (r + 1) * w;
                    best = best.min(d[down + c] + 1);
                    if c > 0 {
                        best = best.min(d[down + c - 1] + 1);
                    }
                    if c + 1 < w {
                        best = best.min(d[down + c + 1] + 1);
                    }
                }
                d[r * w + c] = best;
            }
        }
        if d.first().is_some_and(|&v| v >= INF) {
            d.iter_mut().for_each(|v| *v = u32::MAX);
        }
        d
    }
}

/// Agreement between two occupancy bitmaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub jaccard: f64,
    pub dilated_jaccard: f64,
    /// Symmetric Hausdorff distance in chessboard pixels. When exactly one
    /// bitmap is empty this is `max(width, height)`, one more than any
    /// attainable distance.
    pub pixel_hausdorff: u32,
}

pub fn compare(a: &OccupancyBitmap, b: &OccupancyBitmap, dilation: usize) -> Result<ComparisonReport> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::DimensionMismatch {
            left_width: a.width,
            left_height: a.height,
            right_width: b.width,
            right_height: b.height,
        });
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.bits.iter().zip(&b.bits) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    let jaccard = if union == 0 { 1.0 } else { inter as f64 / union as f64 };

    let (pop_a, pop_b) = (a.population(), b.population());
    let dilated_jaccard = if pop_a + pop_b == 0 {
        1.0
    } else {
        let (da, db) = (a.dilate(dilation), b.dilate(dilation));
        let hits_a = a.bits.iter().zip(&db.bits).filter(|(x, y)| **x && **y).count();
        let hits_b = b.bits.iter().zip(&da.bits).filter(|(x, y)| **x && **y).count();
        (hits_a + hits_b) as f64 / (pop_a + pop_b) as f64
    };

    let pixel_hausdorff = match (pop_a, pop_b) {
        (0, 0) => 0,
        (0, _) | (_, 0) => a.width.max(a.height) as u32,
        _ => directed_hausdorff(a, &b.distance_to_set()).max(directed_hausdorff(b, &a.distance_to_set())),
    };

    Ok(ComparisonReport {
        jaccard,
        dilated_jaccard,
        pixel_hausdorff,
    })
}

fn directed_hausdorff(from: &OccupancyBitmap, distance_to_other: &[u32]) -> u32 {
    from.bits
        .iter()
        .zip(distance_to_other)
        .filter(|(b, _)| **b)
        .map(|(_, &d)| d)
        .max()
        .unwrap_or(0)
}

/// 8-bit grayscale image, row-major, row 0 at the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        if pixels.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(GrayImage { width, height, pixels })
    }

    pub fn get(&self, col: usize, row: usize) -> u8 {
        self.pixels[row * self.width + col]
    }
}

/// White background, log-scaled darkening by visit count, and optionally
/// each cycle point drawn as a black `enlargement`-sided square.
pub fn render_image(raster: &Raster, cycle: Option<&CycleReport>, enlargement: usize) -> Result<GrayImage> {
    if enlargement == 0 || enlargement.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "enlargement must be a positive odd number, got {enlargement}"
        )));
    }
    let max = raster.max_count();
    let pixels = if max == 0 {
        vec![255u8; raster.counts.len()]
    } else {
        let denom = (max as f64).ln_1p();
        raster
            .counts
            .iter()
            .map(|&c| {
                if c == 0 {
                    255
                } else {
                    let shade = (255.0 * (c as f64).ln_1p() / denom).floor().clamp(0.0, 255.0);
                    255 - shade as u8
                }
            })
            .collect()
    };
    let mut image = GrayImage {
        width: raster.width,
        height: raster.height,
        pixels,
    };
    if let Some(cycle) = cycle {
        let half = enlargement / 2;
        for p in &cycle.points {
            let (c, r) = to_pixel(*p, image.width, image.height);
            let rows = r.saturating_sub(half)..(r + half + 1).min(image.height);
            let cols = c.saturating_sub(half)..(c + half + 1).min(image.width);
            for rr in rows {
                image.pixels[rr * image.width + cols.start..rr * image.width + cols.end].fill(0);
            }
        }
    }
    Ok(image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bitmap(w: usize, h: usize, set: &[(usize, usize)]) -> OccupancyBitmap {
        let mut b = OccupancyBitmap::new(w, h).unwrap();
        for &(c, r) in set {
            b.set(c, r, true);
        }
        b
    }

    #[test]
    fn pixel_examples() {
        assert_eq!(to_pixel(Point::ORIGIN, 400, 400), (0, 399));
        assert_eq!(to_pixel(Point { x: 1.0, y: 1.0 }, 400, 400), (399, 0));
        assert_eq!(to_pixel(Point { x: 0.5, y: 0.5 }, 400, 400), (200, 199));
    }

    #[test]
    fn accumulate_examples() {
        let r = accumulate(Raster::new(4, 4).unwrap(), [Point::ORIGIN]);
        assert_eq!(r.count_at(0, 3), 1);
        assert_eq!(r.total(), 1);
        let empty = accumulate(Raster::new(4, 4).unwrap(), std::iter::empty());
        assert_eq!(empty, Raster::new(4, 4).unwrap());
        assert!(Raster::new(0, 4).is_err());
    }

    #[test]
    fn occupancy_examples() {
        let r = Raster::new(3, 3).unwrap();
        assert_eq!(r.occupancy().population(), 0);
        let r = accumulate(r, [Point { x: 0.5, y: 0.5 }; 3]);
        assert_eq!(r.occupancy().population(), 1);
    }

    #[test]
    fn compare_examples() {
        let x = bitmap(5, 5, &[(1, 1), (2, 3), (4, 4)]);
        let rep = compare(&x, &x, 2).unwrap();
        assert_eq!((rep.jaccard, rep.dilated_jaccard, rep.pixel_hausdorff), (1.0, 1.0, 0));

        let a = bitmap(2, 2, &[(0, 0)]);
        let b = bitmap(2, 2, &[(1, 1)]);
        let rep = compare(&a, &b, 1).unwrap();
        assert_eq!(rep.jaccard, 0.0);
        assert_eq!(rep.dilated_jaccard, 1.0);
        assert_eq!(rep.pixel_hausdorff, 1);

        let e = OccupancyBitmap::new(3, 3).unwrap();
        let rep = compare(&e, &e, 1).unwrap();
        assert_eq!((rep.jaccard, rep.dilated_jaccard, rep.pixel_hausdorff), (1.0, 1.0, 0));

        let one = bitmap(3, 3, &[(0, 0)]);
        assert_eq!(compare(&e, &one, 0).unwrap().pixel_hausdorff, 3);

        assert!(matches!(
            compare(&e, &OccupancyBitmap::new(3, 4).unwrap(), 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn render_examples() {
        let blank = render_image(&Raster::new(4, 3).unwrap(), None, 1).unwrap();
        assert!(blank.pixels.iter().all(|&g| g == 255));

        let r = accumulate(Raster::new(4, 3).unwrap(), [Point { x: 0.6, y: 0.1 }]);
        let img = render_image(&r, None, 1).unwrap();
        assert_eq!(img.pixels.iter().filter(|&&g| g == 0).count(), 1);
        assert_eq!(img.pixels.iter().filter(|&&g| g == 255).count(), 11);
        assert_eq!(img.get(2, 2), 0);

        let cycle = CycleReport {
            period: 1,
            points: vec![Point { x: 0.5, y: 0.5 }],
            epsilon: 1e-9,
            confirmed_loops: 3,
        };
        let img = render_image(&Raster::new(400, 400).unwrap(), Some(&cycle), 5).unwrap();
        let black: Vec<(usize, usize)> = (0..400)
            .flat_map(|r| (0..400).map(move |c| (c, r)))
            .filter(|&(c, r)| img.get(c, r) == 0)
            .collect();
        assert_eq!(black.len(), 25);
        assert!(black.iter().all(|&(c, r)| (198..=202).contains(&c) && (197..=201).contains(&r)));

        // clipped at the corner
        let corner = CycleReport {
            points: vec![Point::ORIGIN],
            ..cycle
        };
        let img = render_image(&Raster::new(10, 10).unwrap(), Some(&corner), 5).unwrap();
        assert_eq!(img.pixels.iter().filter(|&&g| g == 0).count(), 9);

        assert!(render_image(&r, None, 4).is_err());
        assert!(render_image(&r, None, 0).is_err());
    }

    #[test]
    fn log_scale_is_monotone() {
        let mut r = Raster::new(3, 1).unwrap();
        r.accumulate([Point { x: 0.1, y: 0.5 }]);
        r.accumulate([Point { x: 0.5, y: 0.5 }; 10]);
        r.accumulate([Point { x: 0.9, y: 0.5 }; 100]);
        let img = render_image(&r, None, 1).unwrap();
        assert!(img.get(0, 0) > img.get(1, 0) && img.get(1, 0) > img.get(2, 0));
        assert_eq!(img.get(2, 0), 0);
        // 255 - floor(255 ln 2 / ln 101)
        assert_eq!(img.get(0, 0), 255 - 38);
    }

    fn brute_hausdorff(a: &OccupancyBitmap, b: &OccupancyBitmap) -> u32 {
        let pts = |m: &OccupancyBitmap| -> Vec<(i64, i64)> {
            (0..m.height)
                .flat_map(|r| (0..m.width).map(move |c| (c, r)))
                .filter(|&(c, r)| m.get(c, r))
                .map(|(c, r)| (c as i64, r as i64))
                .collect()
        };
        let (pa, pb) = (pts(a), pts(b));
        let directed = |from: &[(i64, i64)], to: &[(i64, i64)]| {
            from.iter()
                .map(|p| to.iter().map(|q| (p.0 - q.0).abs().max((p.1 - q.1).abs())).min().unwrap())
                .max()
                .unwrap_or(0)
        };
        directed(&pa, &pb).max(directed(&pb, &pa)) as u32
    }

    fn brute_dilate(a: &OccupancyBitmap, radius: usize) -> OccupancyBitmap {
        let mut out = OccupancyBitmap::new(a.width, a.height).unwrap();
        for r in 0..a.height {
            for c in 0..a.width {
                let hit = (0..a.height).any(|rr| {
                    (0..a.width).any(|cc| a.get(cc, rr) && c.abs_diff(cc) <= radius && r.abs_diff(rr) <= radius)
                });
                out.set(c, r, hit);
            }
        }
        out
    }

    fn arb_pair() -> impl Strategy<Value = (OccupancyBitmap, OccupancyBitmap)> {
        (1usize..9, 1usize..9).prop_flat_map(|(w, h)| {
            (
                prop::collection::vec(prop::bool::weighted(0.3), w * h),
                prop::collection::vec(prop::bool::weighted(0.3), w * h),
            )
                .prop_map(move |(x, y)| {
                    (
                        OccupancyBitmap { width: w, height: h, bits: x },
                        OccupancyBitmap { width: w, height: h, bits: y },
                    )
                })
        })
    }

    proptest! {
        #[test]
        fn compare_properties((a, b) in arb_pair(), radius in 0usize..4) {
            let ab = compare(&a, &b, radius).unwrap();
            let ba = compare(&b, &a, radius).unwrap();
            prop_assert_eq!(ab.jaccard, ba.jaccard);
            prop_assert_eq!(ab.pixel_hausdorff, ba.pixel_hausdorff);
            prop_assert!(ab.jaccard <= ab.dilated_jaccard + 1e-15);
            prop_assert!((0.0..=1.0).contains(&ab.dilated_jaccard));
            let wider = compare(&a, &b, radius + 1).unwrap();
            prop_assert!(wider.dilated_jaccard >= ab.dilated_jaccard);
            if a.population() > 0 && b.population() > 0 {
                prop_assert_eq!(ab.pixel_hausdorff, brute_hausdorff(&a, &b));
            }
            prop_assert_eq!(a.dilate(radius), brute_dilate(&a, radius));
            let aa = compare(&a, &a, radius).unwrap();
            prop_assert_eq!((aa.jaccard, aa.dilated_jaccard, aa.pixel_hausdorff), (1.0, 1.0, 0));
            prop_assert_eq!(ab.jaccard == 1.0, a == b || (a.population() == 0 && b.population() == 0));
        }

        #[test]
        fn conservation(points in prop::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), 0..200), w in 1usize..50, h in 1usize..50) {
            let mut r = Raster::new(w, h).unwrap();
            r.accumulate(points.iter().map(|&(x, y)| Point { x, y }));
            prop_assert_eq!(r.total(), points.len() as u64);
            let occ = r.occupancy();
            for row in 0..h {
                for col in 0..w {
                    prop_assert_eq!(occ.get(col, row), r.count_at(col, row) > 0);
                }
            }
        }
    }
}
