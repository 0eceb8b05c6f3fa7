//! Parameter sweeps: sample a curve in `(b, r, b', r')` space and render one
//! limit-set frame per sample.
//!
//! Frame `i` depends only on the spec and `i` (its initial point comes from
//! `seed ^ i`), so frames can be computed in any order or in parallel.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::config::{InitialPoint, RunConfigDocument};
use crate::io::manifest::write_manifest;
use crate::io::pgm::write_pgm;
use crate::io::png::write_png;
use crate::limitset::{stability_check, StabilitySettings, Verdict};
use crate::maps::{CouplerRole, LinearPlusCoupler, MapFamily, Scheme, SystemConfig, Violation};
use crate::orbit::{CycleReport, CycleSettings, DEFAULT_BURN, DEFAULT_PLOT};
use crate::raster::{DEFAULT_ENLARGEMENT, EXPLORER_SIZE};
use crate::run::render_run;

pub const GALLERY_GRID: usize = 21;
pub const FINE_GRID: usize = 1000;
pub const MANIFEST_FILE: &str = "manifest.json";

/// A point `(b, r, b', r')` of parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamVector {
    pub b: f64,
    pub r: f64,
    pub b_prime: f64,
    pub r_prime: f64,
}

impl ParamVector {
    pub fn new(b: f64, r: f64, b_prime: f64, r_prime: f64) -> Self {
        ParamVector { b, r, b_prime, r_prime }
    }

    pub fn coupler_c(&self) -> LinearPlusCoupler {
        LinearPlusCoupler::new(self.b, self.r)
    }

    pub fn coupler_d(&self) -> LinearPlusCoupler {
        LinearPlusCoupler::new(self.b_prime, self.r_prime)
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut v = self.coupler_c().violations(CouplerRole::C);
        v.extend(self.coupler_d().violations(CouplerRole::D));
        v
    }

    pub fn system(&self, scheme: Scheme, family_f: MapFamily, family_g: MapFamily) -> SystemConfig {
        SystemConfig {
            scheme,
            family_f,
            family_g,
            coupler_c: self.coupler_c(),
            coupler_d: self.coupler_d(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ParameterCurve {
    /// Straight line from `from` (s = 0) to `to` (s = 1).
    Segment { from: ParamVector, to: ParamVector },
    /// `s -> (s, 1 - s, b', r')`.
    Canonical { b_prime: f64, r_prime: f64 },
}

impl ParameterCurve {
    pub fn at(&self, s: f64) -> ParamVector {
        match *self {
            ParameterCurve::Canonical { b_prime, r_prime } => ParamVector::new(s, 1.0 - s, b_prime, r_prime),
            ParameterCurve::Segment { from, to } => {
                let lerp = |a: f64, b: f64| a + s * (b - a);
                let mut p = ParamVector::new(
                    lerp(from.b, to.b),
                    lerp(from.r, to.r),
                    lerp(from.b_prime, to.b_prime),
                    lerp(from.r_prime, to.r_prime),
                );
                snap_rounding(&mut p.b, &mut p.r);
                snap_rounding(&mut p.b_prime, &mut p.r_prime);
                p
            }
        }
    }
}

/// Interpolating between two valid endpoints can overshoot `b + r <= 1` by a
/// few ulps; pull the rate back onto the constraint in that case only.
fn snap_rounding(base: &mut f64, rate: &mut f64) {
    let excess = *base + *rate - 1.0;
    if excess > 0.0 && excess <= 4.0 * f64::EPSILON {
        *rate = (1.0 - *base).max(0.0);
    }
}

/// Uniform samples `s_i = i / (grid_count - 1)` along `curve`.
pub fn sample_curve(curve: &ParameterCurve, grid_count: usize) -> Result<Vec<(f64, ParamVector)>> {
    if grid_count < 2 {
        return Err(Error::InvalidArgument(format!("grid_count must be at least 2, got {grid_count}")));
    }
    let last = (grid_count - 1) as f64;
    (0..grid_count)
        .map(|i| {
            let s = i as f64 / last;
            let p = curve.at(s);
            let v = p.violations();
            if v.is_empty() {
                Ok((s, p))
            } else {
                Err(Error::Config(v))
            }
        })
        .collect()
}

/// Everything that determines a sweep's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub curve: ParameterCurve,
    pub grid_count: usize,
    pub scheme: Scheme,
    pub fx: MapFamily,
    pub gy: MapFamily,
    pub n_burn: u64,
    pub m_collect: u64,
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub cycle: CycleSettings,
    pub enlargement: usize,
    pub png: bool,
    pub stability: Option<StabilitySettings>,
}

impl SweepSpec {
    /// Gallery sweep along `s -> (s, 1 - s, b', r')`.
    pub fn canonical(b_prime: f64, r_prime: f64, scheme: Scheme) -> Self {
        SweepSpec {
            curve: ParameterCurve::Canonical { b_prime, r_prime },
            grid_count: GALLERY_GRID,
            scheme,
            fx: MapFamily::Logistic,
            gy: MapFamily::Logistic,
            n_burn: DEFAULT_BURN,
            m_collect: DEFAULT_PLOT,
            seed: 0,
            width: EXPLORER_SIZE,
            height: EXPLORER_SIZE,
            cycle: CycleSettings::default(),
            enlargement: DEFAULT_ENLARGEMENT,
            png: false,
            stability: None,
        }
    }

    /// Run document for frame `index` at parameters `params`.
    pub fn frame_config(&self, index: usize, params: &ParamVector) -> RunConfigDocument {
        RunConfigDocument {
            system: params.system(self.scheme, self.fx, self.gy),
            n_burn: self.n_burn,
            m_collect: self.m_collect,
            initial: InitialPoint::Seed(self.frame_seed(index)),
            width: self.width,
            height: self.height,
            cycle: self.cycle,
            enlargement: self.enlargement,
        }
    }

    pub fn frame_seed(&self, index: usize) -> u64 {
        self.seed ^ index as u64
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let mut bad = |field: &str, message: &str| {
            problems.push(Violation::Setting {
                field: field.into(),
                message: message.into(),
            })
        };
        if self.grid_count < 2 {
            bad("grid_count", "must be at least 2");
        }
        if self.width == 0 || self.height == 0 {
            bad("width/height", "must be at least 1");
        }
        if self.enlargement.is_multiple_of(2) {
            bad("enlargement", "must be a positive odd number");
        }
        if self.cycle.epsilon.is_nan() || self.cycle.epsilon <= 0.0 || self.cycle.max_period == 0 || self.cycle.confirmations == 0 {
            bad("cycle", "epsilon must be positive, max_period and confirmations at least 1");
        }
        if let Some(st) = &self.stability {
            if st.trials < 2 {
                bad("stability.trials", "must be at least 2");
            }
        }
        if !problems.is_empty() {
            return Err(Error::Config(problems));
        }
        match self.curve {
            ParameterCurve::Segment { from, to } => {
                let mut v = from.violations();
                v.extend(to.violations());
                if !v.is_empty() {
                    return Err(Error::Config(v));
                }
            }
            ParameterCurve::Canonical { b_prime, r_prime } => {
                let v = LinearPlusCoupler::new(b_prime, r_prime).violations(CouplerRole::D);
                if !v.is_empty() {
                    return Err(Error::Config(v));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameStability {
    pub verdict: Verdict,
    pub min_dilated_jaccard: f64,
}

/// One rendered sample of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRecord {
    pub index: usize,
    pub s: f64,
    pub params: ParamVector,
    /// Primary frame, enlarged cycle points when a cycle was found.
    pub image: String,
    /// Plain density variant, kept alongside cycle frames.
    pub density_image: Option<String>,
    pub png_image: Option<String>,
    pub cycle: Option<CycleReport>,
    pub stability: Option<FrameStability>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameManifest {
    pub sweep: SweepSpec,
    pub frames: Vec<FrameRecord>,
}

impl FrameManifest {
    pub fn failed_frames(&self) -> impl Iterator<Item = &FrameRecord> {
        self.frames.iter().filter(|f| f.error.is_some())
    }
}

pub fn frame_filename(index: usize, suffix: &str, ext: &str) -> String {
    format!("frame_{index:05}{suffix}.{ext}")
}

/// Renders and writes a single frame; errors are folded into the record.
pub fn render_frame(spec: &SweepSpec, index: usize, s: f64, params: ParamVector, out_dir: &Path) -> FrameRecord {
    let mut record = FrameRecord {
        index,
        s,
        params,
        image: frame_filename(index, "", "pgm"),
        density_image: None,
        png_image: None,
        cycle: None,
        stability: None,
        error: None,
    };
    if let Err(e) = fill_frame(spec, &mut record, out_dir) {
        record.error = Some(e.to_string());
    }
    record
}

fn fill_frame(spec: &SweepSpec, record: &mut FrameRecord, out_dir: &Path) -> Result<()> {
    let doc = spec.frame_config(record.index, &record.params);
    let outcome = render_run(&doc, |_, _| {})?;
    write_pgm(&outcome.image, out_dir.join(&record.image))?;
    if outcome.cycle.is_some() {
        let name = frame_filename(record.index, "_density", "pgm");
        write_pgm(&outcome.density_image()?, out_dir.join(&name))?;
        record.density_image = Some(name);
    }
    if spec.png {
        let name = frame_filename(record.index, "", "png");
        write_png(&outcome.image, out_dir.join(&name))?;
        record.png_image = Some(name);
    }
    record.cycle = outcome.cycle;
    if let Some(st) = &spec.stability {
        let base = spec.frame_seed(record.index);
        let seeds: Vec<u64> = (0..st.trials as u64).map(|k| base.wrapping_add(k)).collect();
        let report = stability_check(
            &doc.system,
            spec.n_burn,
            spec.m_collect,
            spec.width,
            spec.height,
            &seeds,
            st.dilation,
            st.threshold,
        )?;
        record.stability = Some(FrameStability {
            verdict: report.verdict,
            min_dilated_jaccard: report.min_dilated_jaccard,
        });
    }
    Ok(())
}

/// Renders every frame into `out_dir` using `jobs` worker threads
/// (0 = rayon's default), then writes `manifest.json`.
///
/// A frame that fails is recorded with its error and the others still run.
/// The manifest is written only after all frames finish.
pub fn run_sweep(spec: &SweepSpec, out_dir: &Path, jobs: usize) -> Result<FrameManifest> {
    spec.validate()?;
    let samples = sample_curve(&spec.curve, spec.grid_count)?;
    prepare_dir(out_dir)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let frames: Vec<FrameRecord> = pool.install(|| {
        samples
            .par_iter()
            .enumerate()
            .map(|(i, &(s, p))| render_frame(spec, i, s, p, out_dir))
            .collect()
    });

    let manifest = FrameManifest {
        sweep: spec.clone(),
        frames,
    };
    write_manifest(&manifest, out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe: PathBuf = dir.join(".write-probe");
    fs::write(&probe, b"").map_err(|e| Error::io(dir, e))?;
    fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}
