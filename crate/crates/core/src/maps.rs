//! Map families, linear+ couplers and the two coupling schemes.
//!
//! Every evaluation runs in `f64` and follows the explicit product order
//! `4 * p * x * (1 - x)` left to right, so two implementations that write the
//! formulas the same way agree bit for bit. Family and coupler outputs are
//! clamped into `[0, 1]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A real number in the closed unit interval.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
#[repr(transparent)]
pub struct UnitValue(f64);

impl UnitValue {
    pub const ZERO: UnitValue = UnitValue(0.0);
    pub const ONE: UnitValue = UnitValue(1.0);

    /// Returns `None` for values outside `[0, 1]` (including NaN).
    pub fn new(value: f64) -> Option<Self> {
        (0.0..=1.0).contains(&value).then_some(UnitValue(value))
    }

    /// Clamps into `[0, 1]`. NaN maps to 0.
    #[inline]
    pub fn clamped(value: f64) -> Self {
        UnitValue(clamp_unit(value))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for UnitValue {
    type Error = String;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        UnitValue::new(value).ok_or_else(|| format!("{value} is outside [0, 1]"))
    }
}

impl From<UnitValue> for f64 {
    fn from(v: UnitValue) -> f64 {
        v.0
    }
}

#[inline]
#[allow(clippy::manual_clamp)]
fn clamp_unit(v: f64) -> f64 {
    // `max` returns the non-NaN operand, so NaN collapses to 0.
    v.max(0.0).min(1.0)
}

/// A state `(x, y)` of the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    /// Builds a point, rejecting coordinates outside `[0, 1]`.
    pub fn new(x: f64, y: f64) -> Result<Self, Error> {
        match (UnitValue::new(x), UnitValue::new(y)) {
            (Some(x), Some(y)) => Ok(Point::from_units(x, y)),
            _ => Err(Error::InvalidArgument(format!(
                "point ({x}, {y}) is outside the unit square"
            ))),
        }
    }

    pub fn from_units(x: UnitValue, y: UnitValue) -> Self {
        Point { x: x.get(), y: y.get() }
    }

    pub fn in_unit_square(&self) -> bool {
        (0.0..=1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y)
    }

    /// Max-norm distance.
    pub fn chebyshev(&self, other: &Point) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

/// One-parameter family of self-maps of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapFamily {
    /// `4 p x (1 - x)`
    Logistic,
    /// `p (1 - |2x - 1|)`
    Tent,
}

impl MapFamily {
    pub const ALL: [MapFamily; 2] = [MapFamily::Logistic, MapFamily::Tent];

    pub fn name(self) -> &'static str {
        match self {
            MapFamily::Logistic => "logistic",
            MapFamily::Tent => "tent",
        }
    }

    #[inline]
    pub fn eval(self, p: UnitValue, x: UnitValue) -> UnitValue {
        UnitValue(self.eval_raw(p.get(), x.get()))
    }

    #[inline(always)]
    fn eval_raw(self, p: f64, x: f64) -> f64 {
        let v = match self {
            MapFamily::Logistic => 4.0 * p * x * (1.0 - x),
            MapFamily::Tent => p * (1.0 - (2.0 * x - 1.0).abs()),
        };
        clamp_unit(v)
    }
}

impl fmt::Display for MapFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MapFamily {
    type Err = Violation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "logistic" => Ok(MapFamily::Logistic),
            "tent" => Ok(MapFamily::Tent),
            other => Err(Violation::UnknownFamily(other.to_string())),
        }
    }
}

/// Free function form of [`MapFamily::eval`].
pub fn eval_family(family: MapFamily, p: UnitValue, x: UnitValue) -> UnitValue {
    family.eval(p, x)
}

/// The coupler `c(x) = base + rate * x`, valid when `base, rate >= 0` and
/// `base + rate <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearPlusCoupler {
    pub base: f64,
    pub rate: f64,
}

impl LinearPlusCoupler {
    pub fn new(base: f64, rate: f64) -> Self {
        LinearPlusCoupler { base, rate }
    }

    #[inline]
    pub fn eval(&self, x: UnitValue) -> UnitValue {
        UnitValue(self.eval_raw(x.get()))
    }

    #[inline(always)]
    fn eval_raw(&self, x: f64) -> f64 {
        clamp_unit(self.base + self.rate * x)
    }

    /// Every constraint this coupler breaks, tagged with `role`.
    pub fn violations(&self, role: CouplerRole) -> Vec<Violation> {
        let mut out = Vec::new();
        if !self.base.is_finite() || !self.rate.is_finite() {
            out.push(Violation::NonFinite(role));
            return out;
        }
        if self.base < 0.0 {
            out.push(Violation::NegativeBase(role));
        }
        if self.rate < 0.0 {
            out.push(Violation::NegativeRate(role));
        }
        if self.base + self.rate > 1.0 {
            out.push(Violation::SumExceedsOne(role));
        }
        out
    }
}

pub fn eval_coupler(coupler: &LinearPlusCoupler, x: UnitValue) -> UnitValue {
    coupler.eval(x)
}

/// How the two coordinates are updated within one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// `h`: both coordinates read the previous state.
    Simultaneous,
    /// `h'`: the second coordinate's parameter reads the updated first coordinate.
    Sequential,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Simultaneous, Scheme::Sequential];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Simultaneous => "simultaneous",
            Scheme::Sequential => "sequential",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Violation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simultaneous" => Ok(Scheme::Simultaneous),
            "sequential" => Ok(Scheme::Sequential),
            other => Err(Violation::UnknownScheme(other.to_string())),
        }
    }
}

/// Which coupler a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplerRole {
    /// `c`, drives the first family from `y`.
    C,
    /// `d`, drives the second family from `x`.
    D,
}

impl fmt::Display for CouplerRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplerRole::C => f.write_str("coupler c (b, r)"),
            CouplerRole::D => f.write_str("coupler d (b', r')"),
        }
    }
}

/// A single broken configuration constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NegativeBase(CouplerRole),
    NegativeRate(CouplerRole),
    SumExceedsOne(CouplerRole),
    NonFinite(CouplerRole),
    UnknownFamily(String),
    UnknownScheme(String),
    /// Any other out-of-range setting, e.g. a zero raster width.
    Setting { field: String, message: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeBase(c) => write!(f, "{c}: base ≥ 0 failed"),
            Violation::NegativeRate(c) => write!(f, "{c}: rate ≥ 0 failed"),
            Violation::SumExceedsOne(c) => write!(f, "{c}: base + rate ≤ 1 failed"),
            Violation::NonFinite(c) => write!(f, "{c}: base and rate must be finite"),
            Violation::UnknownFamily(name) => {
                write!(f, "unknown family {name:?} (expected logistic or tent)")
            }
            Violation::UnknownScheme(name) => {
                write!(f, "unknown scheme {name:?} (expected simultaneous or sequential)")
            }
            Violation::Setting { field, message } => write!(f, "{field}: {message}"),
        }
    }
}

/// A fully specified coupled system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub scheme: Scheme,
    pub family_f: MapFamily,
    pub family_g: MapFamily,
    pub coupler_c: LinearPlusCoupler,
    pub coupler_d: LinearPlusCoupler,
}

impl SystemConfig {
    /// Logistic/logistic with linear+ couplers `(b, r)` and `(b', r')`.
    pub fn logistic(scheme: Scheme, b: f64, r: f64, bp: f64, rp: f64) -> Self {
        SystemConfig {
            scheme,
            family_f: MapFamily::Logistic,
            family_g: MapFamily::Logistic,
            coupler_c: LinearPlusCoupler::new(b, r),
            coupler_d: LinearPlusCoupler::new(bp, rp),
        }
    }

    /// Validates, returning the config or every violated constraint.
    pub fn validated(self) -> Result<Self, Error> {
        validate_config(&self).map(|()| self).map_err(Error::Config)
    }

    /// One application of `h` or `h'`.
    #[inline]
    pub fn step(&self, p: Point) -> Point {
        let x_next = self
            .family_f
            .eval_raw(self.coupler_c.eval_raw(p.y), p.x);
        let driver = match self.scheme {
            Scheme::Simultaneous => p.x,
            Scheme::Sequential => x_next,
        };
        let y_next = self
            .family_g
            .eval_raw(self.coupler_d.eval_raw(driver), p.y);
        Point { x: x_next, y: y_next }
    }
}

pub fn step(config: &SystemConfig, point: Point) -> Point {
    config.step(point)
}

/// Checks both couplers; `Ok` or the full list of violations.
pub fn validate_config(config: &SystemConfig) -> Result<(), Vec<Violation>> {
    let mut v = config.coupler_c.violations(CouplerRole::C);
    v.extend(config.coupler_d.violations(CouplerRole::D));
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}
