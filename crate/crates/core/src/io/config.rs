//! Run configuration documents (JSON).
//!
//! On disk a document is a flat JSON object; every key is optional and falls
//! back to the defaults below, unknown keys are rejected. A document written
//! by [`write_config`] always carries every key.
//!
//! | key | default |
//! |-----|---------|
//! | `scheme` | `"simultaneous"` (`"sequential"`) |
//! | `fx`, `gy` | `"logistic"` (`"tent"`) |
//! | `b`, `r`, `b_prime`, `r_prime` | `0.4`, `0.6`, `0.4`, `0.6` |
//! | `n_burn`, `m_collect` | `1000000`, `100000` |
//! | `seed` or `x0` + `y0` | `x0 = 0.7`, `y0 = 0.6` |
//! | `width`, `height` | `800`, `800` |
//! | `epsilon`, `max_period`, `confirmations` | `1e-9`, `4096`, `3` |
//! | `enlargement` | `5` |

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{validate_config, LinearPlusCoupler, MapFamily, Point, Scheme, SystemConfig, Violation};
use crate::orbit::{random_initial, CycleSettings, DEFAULT_BURN, DEFAULT_PLOT};
use crate::raster::{DEFAULT_ENLARGEMENT, STILL_SIZE};

/// Where the orbit starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialPoint {
    Seed(u64),
    Explicit(Point),
}

impl InitialPoint {
    pub fn resolve(&self) -> Point {
        match *self {
            InitialPoint::Seed(s) => random_initial(s),
            InitialPoint::Explicit(p) => p,
        }
    }
}

/// Every parameter of a single render, fully resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfigDocument {
    pub system: SystemConfig,
    pub n_burn: u64,
    pub m_collect: u64,
    pub initial: InitialPoint,
    pub width: usize,
    pub height: usize,
    pub cycle: CycleSettings,
    pub enlargement: usize,
}

impl Default for RunConfigDocument {
    fn default() -> Self {
        RunConfigDocument {
            system: SystemConfig::logistic(Scheme::Simultaneous, 0.4, 0.6, 0.4, 0.6),
            n_burn: DEFAULT_BURN,
            m_collect: DEFAULT_PLOT,
            initial: InitialPoint::Explicit(Point { x: 0.7, y: 0.6 }),
            width: STILL_SIZE,
            height: STILL_SIZE,
            cycle: CycleSettings::default(),
            enlargement: DEFAULT_ENLARGEMENT,
        }
    }
}

/// Partial document: the on-disk and on-wire shape.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigPatch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fx: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_prime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_prime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_burn: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_collect: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_period: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confirmations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enlargement: Option<usize>,
}

fn setting(field: &str, message: impl Into<String>) -> Violation {
    Violation::Setting {
        field: field.into(),
        message: message.into(),
    }
}

impl RunConfigDocument {
    /// Overlays `patch` on `self` and validates the result, reporting every
    /// violation at once.
    pub fn apply(&self, patch: &RunConfigPatch) -> Result<RunConfigDocument> {
        let mut doc = *self;
        let mut violations = Vec::new();

        if let Some(name) = &patch.scheme {
            match name.parse::<Scheme>() {
                Ok(s) => doc.system.scheme = s,
                Err(v) => violations.push(v),
            }
        }
        if let Some(name) = &patch.fx {
            match name.parse::<MapFamily>() {
                Ok(f) => doc.system.family_f = f,
                Err(v) => violations.push(v),
            }
        }
        if let Some(name) = &patch.gy {
            match name.parse::<MapFamily>() {
                Ok(f) => doc.system.family_g = f,
                Err(v) => violations.push(v),
            }
        }
        let c = &mut doc.system.coupler_c;
        *c = LinearPlusCoupler::new(patch.b.unwrap_or(c.base), patch.r.unwrap_or(c.rate));
        let d = &mut doc.system.coupler_d;
        *d = LinearPlusCoupler::new(patch.b_prime.unwrap_or(d.base), patch.r_prime.unwrap_or(d.rate));
        if let Err(v) = validate_config(&doc.system) {
            violations.extend(v);
        }

        doc.n_burn = patch.n_burn.unwrap_or(doc.n_burn);
        doc.m_collect = patch.m_collect.unwrap_or(doc.m_collect);

        match (patch.seed, patch.x0, patch.y0) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                violations.push(setting("seed", "give either seed or x0/y0, not both"))
            }
            (Some(s), None, None) => doc.initial = InitialPoint::Seed(s),
            (None, Some(x), Some(y)) => match Point::new(x, y) {
                Ok(p) => doc.initial = InitialPoint::Explicit(p),
                Err(_) => violations.push(setting("x0/y0", format!("({x}, {y}) is outside the unit square"))),
            },
            (None, Some(_), None) | (None, None, Some(_)) => {
                violations.push(setting("x0/y0", "x0 and y0 must be given together"))
            }
            (None, None, None) => {}
        }

        doc.width = patch.width.unwrap_or(doc.width);
        doc.height = patch.height.unwrap_or(doc.height);
        if doc.width == 0 {
            violations.push(setting("width", "must be at least 1"));
        }
        if doc.height == 0 {
            violations.push(setting("height", "must be at least 1"));
        }

        doc.cycle.epsilon = patch.epsilon.unwrap_or(doc.cycle.epsilon);
        doc.cycle.max_period = patch.max_period.unwrap_or(doc.cycle.max_period);
        doc.cycle.confirmations = patch.confirmations.unwrap_or(doc.cycle.confirmations);
        if !(doc.cycle.epsilon > 0.0 && doc.cycle.epsilon.is_finite()) {
            violations.push(setting("epsilon", "must be a positive finite number"));
        }
        if doc.cycle.max_period == 0 {
            violations.push(setting("max_period", "must be at least 1"));
        }
        if doc.cycle.confirmations == 0 {
            violations.push(setting("confirmations", "must be at least 1"));
        }

        doc.enlargement = patch.enlargement.unwrap_or(doc.enlargement);
        if doc.enlargement.is_multiple_of(2) {
            violations.push(setting("enlargement", "must be a positive odd number"));
        }

        if violations.is_empty() {
            Ok(doc)
        } else {
            Err(Error::Config(violations))
        }
    }

    /// The complete document as a patch carrying every key.
    pub fn to_patch(&self) -> RunConfigPatch {
        let (seed, x0, y0) = match self.initial {
            InitialPoint::Seed(s) => (Some(s), None, None),
            InitialPoint::Explicit(p) => (None, Some(p.x), Some(p.y)),
        };
        RunConfigPatch {
            scheme: Some(self.system.scheme.name().into()),
            fx: Some(self.system.family_f.name().into()),
            gy: Some(self.system.family_g.name().into()),
            b: Some(self.system.coupler_c.base),
            r: Some(self.system.coupler_c.rate),
            b_prime: Some(self.system.coupler_d.base),
            r_prime: Some(self.system.coupler_d.rate),
            n_burn: Some(self.n_burn),
            m_collect: Some(self.m_collect),
            seed,
            x0,
            y0,
            width: Some(self.width),
            height: Some(self.height),
            epsilon: Some(self.cycle.epsilon),
            max_period: Some(self.cycle.max_period),
            confirmations: Some(self.cycle.confirmations),
            enlargement: Some(self.enlargement),
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_patch()).expect("patch serializes");
        s.push('\n');
        s
    }

    /// Single-line JSON, for log lines.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&self.to_patch()).expect("patch serializes")
    }
}

pub(crate) fn parse_error(context: &str, e: &serde_json::Error) -> Error {
    Error::Parse {
        context: context.into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn parse_patch(text: &str, context: &str) -> Result<RunConfigPatch> {
    serde_json::from_str(text).map_err(|e| parse_error(context, &e))
}

/// Parses a document, filling absent keys from the defaults.
pub fn parse_config(text: &str) -> Result<RunConfigDocument> {
    RunConfigDocument::default().apply(&parse_patch(text, "config")?)
}

pub fn read_config(path: impl AsRef<Path>) -> Result<RunConfigDocument> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let patch = parse_patch(&text, &path.display().to_string())?;
    RunConfigDocument::default().apply(&patch)
}

pub fn write_config(doc: &RunConfigDocument, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, doc.to_json()).map_err(|e| Error::io(path, e))
}
