use crate::model::{clamp_box, LightBox, LightState, TransformKind, TransformParams};

use super::{LightNote, NoteAction, TransformError};

/// Quarter turn about the box center: width and height swap, the center
/// stays put, arrows are dropped. Not clamped.
pub fn rotate_box(b: &LightBox) -> LightBox {
    let (xc, yc) = b.center();
    let (half_w, half_h) = (b.width() / 2.0, b.height() / 2.0);
    LightBox {
        x1: xc - half_h,
        y1: yc - half_w,
        x2: xc + half_h,
        y2: yc + half_w,
        state: b.state.without_arrow(),
    }
}

/// Where a box lands after the canvas is padded by `sc_pad_w x sc_pad_h` and
/// shrunk back to `width x height`: `x' = (x + pad_w/2) * W / (W + pad_w)`,
/// likewise for `y`. With `sc_fixed_center` the center is kept and only the
/// half-extents shrink.
pub fn sc_map_box(b: &LightBox, width: u32, height: u32, params: &TransformParams) -> LightBox {
    let (w, h) = (width as f64, height as f64);
    let (pw, ph) = (params.sc_pad_w as f64, params.sc_pad_h as f64);
    if params.sc_fixed_center {
        let (xc, yc) = b.center();
        let half_w = b.width() / 2.0 * w / (w + pw);
        let half_h = b.height() / 2.0 * h / (h + ph);
        return LightBox {
            x1: xc - half_w,
            y1: yc - half_h,
            x2: xc + half_w,
            y2: yc + half_h,
            state: b.state,
        };
    }
    let fx = |x: f64| (x + pw / 2.0) * w / (w + pw);
    let fy = |y: f64| (y + ph / 2.0) * h / (h + ph);
    LightBox {
        x1: fx(b.x1),
        y1: fy(b.y1),
        x2: fx(b.x2),
        y2: fy(b.y2),
        state: b.state,
    }
}

fn inconsistent(msg: impl Into<String>) -> TransformError {
    TransformError::InconsistentNotes(msg.into())
}

/// Recomputes the output labels of a transform from its input labels and
/// notes alone. Weather and camera kinds return the input unchanged.
pub fn label_transform(
    kind: TransformKind,
    input: &[LightBox],
    notes: &[LightNote],
    params: &TransformParams,
    width: u32,
    height: u32,
) -> Result<Vec<LightBox>, TransformError> {
    if !kind.is_light() {
        if !notes.is_empty() {
            return Err(inconsistent(format!("{kind} takes no notes")));
        }
        return Ok(input.to_vec());
    }

    let mut accounted = vec![false; input.len()];
    let mut slots: Vec<Option<LightBox>> = vec![None; notes.len()];
    for note in notes {
        let src = input
            .get(note.source)
            .ok_or_else(|| inconsistent(format!("source {} out of range", note.source)))?;
        let adds = matches!(note.action, NoteAction::Added { .. } | NoteAction::NotAdded { .. });
        if !adds {
            if accounted[note.source] {
                return Err(inconsistent(format!("light {} noted twice", note.source)));
            }
            accounted[note.source] = true;
        }

        let out = match (kind, note.action) {
            (_, NoteAction::Unchanged) if kind != TransformKind::Sc => {
                if kind == TransformKind::Cc && src.state != LightState::Warning {
                    return Err(inconsistent(format!("light {} kept its color", note.source)));
                }
                Some(*src)
            }
            (TransformKind::Mp | TransformKind::Rt | TransformKind::Sc, NoteAction::Skipped { .. }) => {
                Some(*src)
            }
            (TransformKind::Cc, NoteAction::Recolored) => {
                if src.state == LightState::Warning {
                    return Err(inconsistent("warning lights are not recolored"));
                }
                Some(src.with_state(src.state.opposite()))
            }
            (TransformKind::Mp, NoteAction::Moved { shift }) => {
                Some(src.translated(shift.offset(src.width()), 0.0))
            }
            (TransformKind::Ad, NoteAction::Added { shift }) => {
                Some(src.translated(shift.offset(src.width()), 0.0))
            }
            (TransformKind::Ad, NoteAction::NotAdded { .. }) => None,
            (TransformKind::Rt, NoteAction::Rotated { clamped }) => {
                let turned = rotate_box(src);
                let fitted = clamp_box(&turned, width, height)
                    .ok_or_else(|| inconsistent(format!("light {} rotates out of frame", note.source)))?;
                if clamped != (fitted != turned) {
                    return Err(inconsistent(format!("light {} clamp flag disagrees", note.source)));
                }
                Some(fitted)
            }
            (TransformKind::Sc, NoteAction::Scaled) => Some(
                clamp_box(&sc_map_box(src, width, height, params), width, height)
                    .ok_or_else(|| inconsistent(format!("light {} scales out of frame", note.source)))?,
            ),
            (_, action) => return Err(inconsistent(format!("{kind} cannot record {action:?}"))),
        };

        match (out, note.output) {
            (Some(b), Some(slot)) => {
                let entry = slots
                    .get_mut(slot)
                    .ok_or_else(|| inconsistent(format!("output {slot} out of range")))?;
                if entry.replace(b).is_some() {
                    return Err(inconsistent(format!("output {slot} written twice")));
                }
            }
            (None, None) => {}
            _ => return Err(inconsistent(format!("light {} has a wrong output slot", note.source))),
        }
    }

    if let Some(missing) = accounted.iter().position(|a| !a) {
        return Err(inconsistent(format!("light {missing} has no note")));
    }
    let emitted = slots.iter().take_while(|s| s.is_some()).count();
    if slots[emitted..].iter().any(Option::is_some) {
        return Err(inconsistent("output slots are not contiguous"));
    }
    Ok(slots.into_iter().flatten().collect())
}
