//! Domain types shared by every module: light boxes and states, owned RGB
//! rasters, labeled images, the twelve transformation kinds and their
//! parameters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("degenerate box ({x1}, {y1}, {x2}, {y2}): need x1 < x2 and y1 < y2 with finite coordinates")]
    DegenerateBox { x1: f64, y1: f64, x2: f64, y2: f64 },
    #[error("raster {width}x{height} needs {expected} bytes, got {actual}")]
    RasterSize {
        width: u32,
        height: u32,
        expected: usize,
        actual: usize,
    },
    #[error("raster dimensions must be at least 1x1, got {width}x{height}")]
    EmptyRaster { width: u32, height: u32 },
    #[error("unknown transformation kind `{0}`")]
    UnknownKind(String),
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },
}

/// Canonical traffic-light state taxonomy. Dataset tags map onto these five
/// variants through the tables in `dataset::tags`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LightState {
    Stop,
    Go,
    Warning,
    StopLeft,
    GoLeft,
}

impl LightState {
    pub const ALL: [LightState; 5] = [
        LightState::Stop,
        LightState::Go,
        LightState::Warning,
        LightState::StopLeft,
        LightState::GoLeft,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LightState::Stop => "stop",
            LightState::Go => "go",
            LightState::Warning => "warning",
            LightState::StopLeft => "stop_left",
            LightState::GoLeft => "go_left",
        }
    }

    /// Red and green swap, arrows are kept, yellow stays yellow.
    pub fn opposite(self) -> LightState {
        match self {
            LightState::Stop => LightState::Go,
            LightState::Go => LightState::Stop,
            LightState::StopLeft => LightState::GoLeft,
            LightState::GoLeft => LightState::StopLeft,
            LightState::Warning => LightState::Warning,
        }
    }

    /// Drops the arrow: a rotated arrow light no longer points left.
    pub fn without_arrow(self) -> LightState {
        match self {
            LightState::StopLeft => LightState::Stop,
            LightState::GoLeft => LightState::Go,
            other => other,
        }
    }
}

impl fmt::Display for LightState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LightState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LightState::ALL
            .into_iter()
            .find(|state| state.as_str() == s)
            .ok_or_else(|| s.to_string())
    }
}

/// Axis-aligned light box in pixel coordinates: `(x1, y1)` is the top-left
/// corner, `(x2, y2)` the bottom-right one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LightBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub state: LightState,
}

impl LightBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64, state: LightState) -> Result<Self, ModelError> {
        let b = LightBox {
            x1,
            y1,
            x2,
            y2,
            state,
        };
        if b.is_valid() {
            Ok(b)
        } else {
            Err(ModelError::DegenerateBox { x1, y1, x2, y2 })
        }
    }

    pub fn is_valid(&self) -> bool {
        [self.x1, self.y1, self.x2, self.y2]
            .iter()
            .all(|v| v.is_finite())
            && self.x1 < self.x2
            && self.y1 < self.y2
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        box_center(self)
    }

    pub fn with_state(self, state: LightState) -> Self {
        LightBox { state, ..self }
    }

    pub fn translated(self, dx: f64, dy: f64) -> Self {
        LightBox {
            x1: self.x1 + dx,
            y1: self.y1 + dy,
            x2: self.x2 + dx,
            y2: self.y2 + dy,
            ..self
        }
    }

    pub fn within(&self, width: u32, height: u32) -> bool {
        self.x1 >= 0.0 && self.y1 >= 0.0 && self.x2 <= width as f64 && self.y2 <= height as f64
    }

    /// Integer pixel columns/rows covered by the box, clipped to the image:
    /// `(x0, y0, x1, y1)` half-open.
    pub fn pixel_span(&self, width: u32, height: u32) -> (u32, u32, u32, u32) {
        let clip = |v: f64, max: u32| v.max(0.0).min(max as f64);
        let x0 = clip(self.x1.floor(), width) as u32;
        let y0 = clip(self.y1.floor(), height) as u32;
        let x1 = clip(self.x2.ceil(), width) as u32;
        let y1 = clip(self.y2.ceil(), height) as u32;
        (x0, y0, x1, y1)
    }
}

pub fn box_center(b: &LightBox) -> (f64, f64) {
    ((b.x1 + b.x2) / 2.0, (b.y1 + b.y2) / 2.0)
}

/// Intersects `b` with `[0, width] x [0, height]`. `None` means the box left
/// the image entirely.
pub fn clamp_box(b: &LightBox, width: u32, height: u32) -> Option<LightBox> {
    let clamped = LightBox {
        x1: b.x1.clamp(0.0, width as f64),
        y1: b.y1.clamp(0.0, height as f64),
        x2: b.x2.clamp(0.0, width as f64),
        y2: b.y2.clamp(0.0, height as f64),
        state: b.state,
    };
    clamped.is_valid().then_some(clamped)
}

/// Owned row-major RGB8 raster.
#[derive(Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RasterImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl RasterImage {
    pub fn new(width: u32, height: u32) -> Result<Self, ModelError> {
        Self::filled(width, height, [0, 0, 0])
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Result<Self, ModelError> {
        if width == 0 || height == 0 {
            return Err(ModelError::EmptyRaster { width, height });
        }
        let data = rgb
            .iter()
            .copied()
            .cycle()
            .take(width as usize * height as usize * 3)
            .collect();
        Ok(RasterImage {
            width,
            height,
            data,
        })
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self, ModelError> {
        if width == 0 || height == 0 {
            return Err(ModelError::EmptyRaster { width, height });
        }
        let expected = width as usize * height as usize * 3;
        if data.len() != expected {
            return Err(ModelError::RasterSize {
                width,
                height,
                expected,
                actual: data.len(),
            });
        }
        Ok(RasterImage {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = self.offset(x, y);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = self.offset(x, y);
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.data.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }

    /// Mean Rec.601 luma over the whole image, in 8-bit units.
    pub fn mean_luma(&self) -> f64 {
        let sum: f64 = self
            .pixels()
            .map(|[r, g, b]| 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64)
            .sum();
        sum / (self.width as f64 * self.height as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    pub id: String,
    pub pixels: RasterImage,
    pub lights: Vec<LightBox>,
}

impl LabeledImage {
    pub fn labels(&self) -> ImageLabels {
        ImageLabels {
            id: self.id.clone(),
            width: self.pixels.width(),
            height: self.pixels.height(),
            lights: self.lights.clone(),
        }
    }
}

/// Annotation-only view of an image, as stored in `annotations.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageLabels {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub lights: Vec<LightBox>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Weather,
    Camera,
    Light,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TransformKind {
    Rn,
    Sw,
    Fg,
    Lf,
    Oe,
    Ue,
    Mb,
    Cc,
    Mp,
    Ad,
    Rt,
    Sc,
}

impl TransformKind {
    pub const ALL: [TransformKind; 12] = [
        TransformKind::Rn,
        TransformKind::Sw,
        TransformKind::Fg,
        TransformKind::Lf,
        TransformKind::Oe,
        TransformKind::Ue,
        TransformKind::Mb,
        TransformKind::Cc,
        TransformKind::Mp,
        TransformKind::Ad,
        TransformKind::Rt,
        TransformKind::Sc,
    ];

    pub fn code(self) -> &'static str {
        match self {
            TransformKind::Rn => "RN",
            TransformKind::Sw => "SW",
            TransformKind::Fg => "FG",
            TransformKind::Lf => "LF",
            TransformKind::Oe => "OE",
            TransformKind::Ue => "UE",
            TransformKind::Mb => "MB",
            TransformKind::Cc => "CC",
            TransformKind::Mp => "MP",
            TransformKind::Ad => "AD",
            TransformKind::Rt => "RT",
            TransformKind::Sc => "SC",
        }
    }

    pub fn family(self) -> Family {
        use TransformKind::*;
        match self {
            Rn | Sw | Fg | Lf => Family::Weather,
            Oe | Ue | Mb => Family::Camera,
            Cc | Mp | Ad | Rt | Sc => Family::Light,
        }
    }

    pub fn is_light(self) -> bool {
        self.family() == Family::Light
    }

    /// Name of the augmented dataset directory, e.g. `RN+`.
    pub fn dataset_name(self) -> String {
        format!("{}+", self.code())
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for TransformKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim_end_matches('+').to_ascii_uppercase();
        TransformKind::ALL
            .into_iter()
            .find(|k| k.code() == upper)
            .ok_or_else(|| ModelError::UnknownKind(s.to_string()))
    }
}

/// Closed interval `[lo, hi]`, serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn is_degenerate_zero(&self) -> bool {
        self.lo == 0.0 && self.hi == 0.0
    }
}

impl From<[f64; 2]> for Interval {
    fn from([lo, hi]: [f64; 2]) -> Self {
        Interval { lo, hi }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformParams {
    pub rain_drop_size: Interval,
    pub rain_speed: Interval,
    pub snow_severity: u8,
    pub fog_severity: u8,
    pub oe_severity: u8,
    pub ue_severity: u8,
    pub mb_kernel: u32,
    pub sc_pad_w: u32,
    pub sc_pad_h: u32,
    /// Keep each box center fixed under SC instead of mapping it through the
    /// canvas resample. Off by default.
    pub sc_fixed_center: bool,
}

impl Default for TransformParams {
    fn default() -> Self {
        TransformParams {
            rain_drop_size: Interval::new(0.1, 0.2),
            rain_speed: Interval::new(0.2, 0.3),
            snow_severity: 2,
            fog_severity: 2,
            oe_severity: 4,
            ue_severity: 1,
            mb_kernel: 15,
            sc_pad_w: 320,
            sc_pad_h: 180,
            sc_fixed_center: false,
        }
    }
}

impl TransformParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let interval = |field: &'static str, i: Interval| {
            if !(i.lo.is_finite() && i.hi.is_finite()) || i.lo < 0.0 || i.lo > i.hi {
                Err(ModelError::InvalidParam {
                    field,
                    reason: format!("need 0 <= lo <= hi, got [{}, {}]", i.lo, i.hi),
                })
            } else {
                Ok(())
            }
        };
        let severity = |field: &'static str, s: u8| {
            if (1..=5).contains(&s) {
                Ok(())
            } else {
                Err(ModelError::InvalidParam {
                    field,
                    reason: format!("severity must be in 1..=5, got {s}"),
                })
            }
        };
        interval("rain_drop_size", self.rain_drop_size)?;
        interval("rain_speed", self.rain_speed)?;
        severity("snow_severity", self.snow_severity)?;
        severity("fog_severity", self.fog_severity)?;
        severity("oe_severity", self.oe_severity)?;
        severity("ue_severity", self.ue_severity)?;
        if self.mb_kernel < 3 || self.mb_kernel.is_multiple_of(2) {
            return Err(ModelError::InvalidParam {
                field: "mb_kernel",
                reason: format!("kernel must be odd and >= 3, got {}", self.mb_kernel),
            });
        }
        Ok(())
    }
}
