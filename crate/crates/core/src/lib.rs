//! Coupled one-dimensional maps on the unit square.
//!
//! Two interval families (logistic `4px(1-x)`, tent `p(1-|2x-1|)`) are tied
//! together by linear+ couplers `c(x) = b + rx`. The coupled map updates
//! both coordinates from the previous state ([`Scheme::Simultaneous`]) or
//! feeds the freshly updated `x` into the coupler for `y`
//! ([`Scheme::Sequential`]). This crate iterates those maps, detects
//! periodic cycles, rasterizes orbit segments as limit-set images, checks
//! that the images are stable, and sweeps them along parameter curves.

pub mod error;
pub mod io;
pub mod limitset;
pub mod maps;
pub mod orbit;
pub mod raster;
pub mod run;
pub mod sweep;

pub use error::{Error, Result};
pub use limitset::{render_orbit, stability_check, StabilityReport, StabilitySettings, Verdict};
pub use maps::{
    eval_coupler, eval_family, step, validate_config, LinearPlusCoupler, MapFamily, Point, Scheme, SystemConfig,
    UnitValue, Violation,
};
pub use orbit::{collect_orbit, detect_cycle, iterate_burn, random_initial, CycleReport, CycleSettings, OrbitSpec};
pub use raster::{compare, render_image, to_pixel, ComparisonReport, GrayImage, OccupancyBitmap, Raster};
pub use run::{render_run, RenderOutcome};
pub use sweep::{run_sweep, sample_curve, FrameManifest, FrameRecord, ParamVector, ParameterCurve, SweepSpec};
