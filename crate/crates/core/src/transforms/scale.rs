use crate::imaging::raster::{paste, resample_bilinear};
use crate::imaging::{inpaint_with, InpaintOptions, Mask};
use crate::model::{clamp_box, LabeledImage, RasterImage, TransformKind, TransformParams};

use super::{label_transform, sc_map_box, LightNote, NoteAction, SkipReason, TransformError, TransformOutcome};

/// The onion-peel fill already extends edges smoothly; a few relaxation
/// sweeps are enough for the wide border band.
const BAND_INPAINT: InpaintOptions = InpaintOptions {
    max_sweeps: 8,
    tolerance: 0.5,
};

/// Simulates viewing from farther away: pad the canvas, fill the padding
/// from the image edges, and shrink back to the original size.
pub fn sc_scale(input: &LabeledImage, params: &TransformParams) -> Result<TransformOutcome, TransformError> {
    params.validate()?;
    let src = &input.pixels;
    let (w, h) = (src.width(), src.height());
    let (pw, ph) = (params.sc_pad_w, params.sc_pad_h);

    let pixels = if pw == 0 && ph == 0 {
        src.clone()
    } else {
        let (cw, ch) = (w + pw, h + ph);
        let mut canvas = RasterImage::new(cw, ch)?;
        paste(&mut canvas, src, (pw / 2) as i64, (ph / 2) as i64);
        let mut band = Mask::from_rect(cw, ch, 0, 0, cw, ch);
        for y in ph / 2..ph / 2 + h {
            for x in pw / 2..pw / 2 + w {
                band.set(x, y, false);
            }
        }
        let filled = inpaint_with(&canvas, &band, BAND_INPAINT)?;
        resample_bilinear(&filled, w, h)
    };

    let notes: Vec<LightNote> = input
        .lights
        .iter()
        .enumerate()
        .map(|(i, b)| LightNote {
            source: i,
            output: Some(i),
            action: match clamp_box(&sc_map_box(b, w, h, params), w, h) {
                Some(_) => NoteAction::Scaled,
                None => NoteAction::Skipped {
                    reason: SkipReason::Degenerate,
                },
            },
        })
        .collect();
    let lights = label_transform(TransformKind::Sc, &input.lights, &notes, params, w, h)?;
    Ok(TransformOutcome {
        image: LabeledImage {
            id: input.id.clone(),
            pixels,
            lights,
        },
        kind: TransformKind::Sc,
        seed: 0,
        notes,
    })
}
