//! The twelve transformations. Weather and camera kinds change pixels only;
//! traffic-light kinds also rewrite the labels, and record what they did to
//! each light so the new labels can be recomputed from the old ones.

mod labels;
mod light;
mod scale;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{
    adjust_lightness_hsl, convolve_motion_blur, flare_center, render_flare, render_fog,
    render_rain, render_snow, Exposure, ImagingError,
};
use crate::model::{LabeledImage, ModelError, TransformKind, TransformParams};

pub use labels::{label_transform, rotate_box, sc_map_box};
pub use light::{ad_add_lights, cc_change_color, mp_move_position, rt_rotate, swap_bulb_hue};
pub use scale::sc_scale;

/// Largest motion-blur angle off the horizontal, in degrees.
pub const MB_MAX_ANGLE: f64 = 15.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("image has no traffic lights")]
    NoLights,
    #[error(transparent)]
    Params(#[from] ModelError),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error("notes do not account for the labels: {0}")]
    InconsistentNotes(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shift {
    Right,
    Left,
}

impl Shift {
    pub fn offset(self, distance: f64) -> f64 {
        match self {
            Shift::Right => distance,
            Shift::Left => -distance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    /// Both candidate positions overlap another light.
    Blocked,
    /// Both candidate positions leave the frame.
    LeftFrame,
    /// The transformed box clamps to zero area.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum NoteAction {
    Unchanged,
    Recolored,
    Moved { shift: Shift },
    Rotated { clamped: bool },
    /// A copy of the source light placed one box width away.
    Added { shift: Shift },
    Scaled,
    /// The light was selected but left in place.
    Skipped { reason: SkipReason },
    /// A copy was attempted but had nowhere to go.
    NotAdded { reason: SkipReason },
}

impl NoteAction {
    /// Whether the output light differs from its source.
    pub fn touched(&self) -> bool {
        matches!(
            self,
            NoteAction::Recolored
                | NoteAction::Moved { .. }
                | NoteAction::Rotated { .. }
                | NoteAction::Added { .. }
                | NoteAction::Scaled
        )
    }
}

/// What happened to one light. `source` indexes the input lights, `output`
/// the output lights (`None` when nothing was emitted).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LightNote {
    pub source: usize,
    pub output: Option<usize>,
    pub action: NoteAction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformOutcome {
    pub image: LabeledImage,
    pub kind: TransformKind,
    pub seed: u64,
    /// Empty for weather and camera kinds.
    pub notes: Vec<LightNote>,
}

impl TransformOutcome {
    /// Output light indices whose box or state was changed by the transform.
    pub fn touched_outputs(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .notes
            .iter()
            .filter(|n| n.action.touched())
            .filter_map(|n| n.output)
            .collect();
        out.sort_unstable();
        out
    }
}

pub fn motion_angle(seed: u64) -> f64 {
    ChaCha8Rng::seed_from_u64(seed).random_range(-MB_MAX_ANGLE..=MB_MAX_ANGLE)
}

/// Applies `kind` to `input`. Traffic-light kinds refuse images without
/// lights.
pub fn apply(
    kind: TransformKind,
    input: &LabeledImage,
    params: &TransformParams,
    seed: u64,
) -> Result<TransformOutcome, TransformError> {
    params.validate()?;
    if kind.is_light() && input.lights.is_empty() {
        return Err(TransformError::NoLights);
    }
    let img = &input.pixels;
    let pixels = match kind {
        TransformKind::Rn => render_rain(img, params.rain_drop_size, params.rain_speed, seed),
        TransformKind::Sw => render_snow(img, params.snow_severity, seed),
        TransformKind::Fg => render_fog(img, params.fog_severity, seed),
        TransformKind::Lf => render_flare(img, flare_center(img.width(), img.height(), seed), seed),
        TransformKind::Oe => adjust_lightness_hsl(img, params.oe_severity, Exposure::Brighten),
        TransformKind::Ue => adjust_lightness_hsl(img, params.ue_severity, Exposure::Darken),
        TransformKind::Mb => convolve_motion_blur(img, params.mb_kernel, motion_angle(seed)),
        TransformKind::Cc => return cc_change_color(input, seed),
        TransformKind::Mp => return mp_move_position(input, seed),
        TransformKind::Ad => return ad_add_lights(input, seed),
        TransformKind::Rt => return rt_rotate(input, seed),
        TransformKind::Sc => {
            let mut outcome = sc_scale(input, params)?;
            outcome.seed = seed;
            return Ok(outcome);
        }
    };
    Ok(TransformOutcome {
        image: LabeledImage {
            id: input.id.clone(),
            pixels,
            lights: input.lights.clone(),
        },
        kind,
        seed,
        notes: Vec::new(),
    })
}

#[cfg(test)]
mod tests;
