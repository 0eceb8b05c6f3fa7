//! The single-render pipeline shared by the CLI, serve mode and sweeps.

use crate::error::Result;
use crate::io::config::RunConfigDocument;
use crate::maps::Point;
use crate::orbit::{collect_orbit, detect_cycle_from, iterate_burn_reporting, CycleReport};
use crate::raster::{render_image, GrayImage, Raster};

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOutcome {
    pub initial: Point,
    /// `z_N`, the first point after burn-in.
    pub burned: Point,
    pub raster: Raster,
    pub cycle: Option<CycleReport>,
    /// Density image, with cycle points enlarged when a cycle was found.
    pub image: GrayImage,
}

impl RenderOutcome {
    /// The density image without cycle enlargement.
    pub fn density_image(&self) -> Result<GrayImage> {
        render_image(&self.raster, None, 1)
    }
}

/// Burn-in, cycle search from `z_N`, then rasterize `z_{N+1} ..= z_{N+M}`.
pub fn render_run(doc: &RunConfigDocument, progress: impl FnMut(u64, u64)) -> Result<RenderOutcome> {
    let system = doc.system.validated()?;
    let initial = doc.initial.resolve();
    let burned = iterate_burn_reporting(&system, initial, doc.n_burn, progress);
    let cycle = detect_cycle_from(&system, burned, &doc.cycle);
    let mut raster = Raster::new(doc.width, doc.height)?;
    raster.accumulate(collect_orbit(&system, burned, doc.m_collect));
    let image = render_image(&raster, cycle.as_ref(), doc.enlargement)?;
    Ok(RenderOutcome {
        initial,
        burned,
        raster,
        cycle,
        image,
    })
}
