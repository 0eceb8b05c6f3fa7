//! Command-line flags and their layering: built-in defaults, then the
//! `--config` file, then explicit flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use coupled_core::io::config::{parse_patch, InitialPoint, RunConfigDocument, RunConfigPatch};
use coupled_core::raster::{EXPLORER_SIZE, STILL_SIZE};
use coupled_core::sweep::GALLERY_GRID;
use coupled_core::{Error, StabilitySettings};

#[derive(Debug, Parser)]
#[command(name = "coupled", version, about = "Limit sets of coupled logistic/tent maps on the unit square")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render one limit-set image (plus a `.run.json` record of the resolved parameters).
    Render(RenderArgs),
    /// Render frames along a parameter curve and write a manifest.
    Sweep(SweepArgs),
    /// Look for a finite periodic cycle after burn-in; JSON report on stdout.
    Cycle(CycleArgs),
    /// Check that the image does not depend on the initial point or on N; JSON report on stdout.
    Stability(StabilityArgs),
    /// Serve the length-prefixed request/response protocol.
    Serve(ServeArgs),
}

/// Flags shared by every engine command. Unset flags fall back to the
/// config file, then to the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct SystemArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Coupling scheme [default: simultaneous]
    #[arg(long, value_parser = ["simultaneous", "sequential"])]
    pub scheme: Option<String>,
    /// Family for x [default: logistic]
    #[arg(long, value_parser = ["logistic", "tent"])]
    pub fx: Option<String>,
    /// Family for y [default: logistic]
    #[arg(long, value_parser = ["logistic", "tent"])]
    pub gy: Option<String>,
    /// Base of coupler c [default: 0.4]
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Rate of coupler c [default: 0.6]
    #[arg(long, allow_negative_numbers = true)]
    pub r: Option<f64>,
    /// Base of coupler d [default: 0.4]
    #[arg(long, allow_negative_numbers = true)]
    pub bp: Option<f64>,
    /// Rate of coupler d [default: 0.6]
    #[arg(long, allow_negative_numbers = true)]
    pub rp: Option<f64>,
    /// Burn-in steps N [default: 1000000]
    #[arg(long)]
    pub burn: Option<u64>,
    /// Plotted steps M [default: 100000]
    #[arg(long)]
    pub plot: Option<u64>,
    /// Seed for a random initial point in (0.01, 0.99)²
    #[arg(long, conflicts_with_all = ["x0", "y0"])]
    pub seed: Option<u64>,
    /// Initial x [default: 0.7 for render and cycle]
    #[arg(long, requires = "y0")]
    pub x0: Option<f64>,
    /// Initial y [default: 0.6 for render and cycle]
    #[arg(long, requires = "x0")]
    pub y0: Option<f64>,
    /// Raster width [default: 800 for render, 400 otherwise]
    #[arg(long)]
    pub width: Option<usize>,
    /// Raster height [default: 800 for render, 400 otherwise]
    #[arg(long)]
    pub height: Option<usize>,
    /// Cycle tolerance (max-norm) [default: 1e-9]
    #[arg(long)]
    pub eps: Option<f64>,
    /// Longest period searched [default: 4096]
    #[arg(long)]
    pub max_period: Option<usize>,
    /// Extra loops a cycle must repeat [default: 3]
    #[arg(long)]
    pub confirmations: Option<usize>,
    /// Side of the square drawn per cycle point, odd [default: 5]
    #[arg(long)]
    pub enlargement: Option<usize>,
}

impl SystemArgs {
    pub fn to_patch(&self) -> RunConfigPatch {
        RunConfigPatch {
            scheme: self.scheme.clone(),
            fx: self.fx.clone(),
            gy: self.gy.clone(),
            b: self.b,
            r: self.r,
            b_prime: self.bp,
            r_prime: self.rp,
            n_burn: self.burn,
            m_collect: self.plot,
            seed: self.seed,
            x0: self.x0,
            y0: self.y0,
            width: self.width,
            height: self.height,
            epsilon: self.eps,
            max_period: self.max_period,
            confirmations: self.confirmations,
            enlargement: self.enlargement,
        }
    }

    /// `base`, overlaid with the config file (if any), overlaid with flags.
    pub fn resolve(&self, base: RunConfigDocument) -> Result<RunConfigDocument, Error> {
        let doc = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                base.apply(&parse_patch(&text, &path.display().to_string())?)?
            }
            None => base,
        };
        doc.apply(&self.to_patch())
    }
}

/// Defaults for stills: 800×800 from (0.7, 0.6).
pub fn still_defaults() -> RunConfigDocument {
    RunConfigDocument {
        width: STILL_SIZE,
        height: STILL_SIZE,
        ..RunConfigDocument::default()
    }
}

/// Defaults for seeded multi-run commands: 400×400 from seed 0.
pub fn seeded_defaults() -> RunConfigDocument {
    RunConfigDocument {
        width: EXPLORER_SIZE,
        height: EXPLORER_SIZE,
        initial: InitialPoint::Seed(0),
        ..RunConfigDocument::default()
    }
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Output image; `.png` writes PNG, anything else PGM.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a PNG next to a PGM output.
    #[arg(long)]
    pub png: bool,
    /// No progress lines on stderr.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Args)]
pub struct StabilityFlags {
    /// Random initial points compared [default: 5]
    #[arg(long)]
    pub trials: Option<usize>,
    /// Minimum pairwise dilated Jaccard score [default: 0.95]
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Dilation radius in pixels [default: 1]
    #[arg(long)]
    pub dilation: Option<usize>,
}

impl StabilityFlags {
    pub fn settings(&self) -> Result<StabilitySettings, Error> {
        let d = StabilitySettings::default();
        let s = StabilitySettings {
            trials: self.trials.unwrap_or(d.trials),
            threshold: self.threshold.unwrap_or(d.threshold),
            dilation: self.dilation.unwrap_or(d.dilation),
        };
        if s.trials < 2 {
            return Err(Error::InvalidArgument("--trials must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&s.threshold) {
            return Err(Error::InvalidArgument("--threshold must lie in [0, 1]".into()));
        }
        Ok(s)
    }

    pub fn any_set(&self) -> bool {
        self.trials.is_some() || self.threshold.is_some() || self.dilation.is_some()
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Output directory for frames and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Number of samples along the curve [default: 21]
    #[arg(long, default_value_t = GALLERY_GRID)]
    pub grid: usize,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Segment start `b,r,b',r'` instead of the canonical curve s -> (s, 1-s, b', r').
    #[arg(long, requires = "to", value_parser = parse_param_vector)]
    pub from: Option<[f64; 4]>,
    /// Segment end `b,r,b',r'`.
    #[arg(long, requires = "from", value_parser = parse_param_vector)]
    pub to: Option<[f64; 4]>,
    /// Also write PNG frames.
    #[arg(long)]
    pub png: bool,
    /// Run the stability check on every frame.
    #[arg(long)]
    pub stability: bool,
    #[command(flatten)]
    pub checks: StabilityFlags,
}

fn parse_param_vector(s: &str) -> Result<[f64; 4], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!("expected b,r,b',r' but got {s:?}"));
    }
    let mut out = [0.0; 4];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = part.parse().map_err(|_| format!("not a number: {part:?}"))?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Args)]
pub struct CycleArgs {
    #[command(flatten)]
    pub system: SystemArgs,
}

#[derive(Debug, Clone, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub checks: StabilityFlags,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    /// Listen on 127.0.0.1:PORT.
    #[arg(long, conflicts_with = "stdio", required_unless_present = "stdio")]
    pub port: Option<u16>,
    /// Speak the protocol over stdin/stdout.
    #[arg(long)]
    pub stdio: bool,
}
