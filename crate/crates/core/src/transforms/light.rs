use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::imaging::raster::{crop, flip_horizontal, flip_vertical, paste, rotate_ccw, rotate_cw};
use crate::imaging::{hsv_to_rgb, inpaint, poisson_blend, rgb_to_hsv, Mask, Patch};
use crate::metrics::iou;
use crate::model::{clamp_box, LabeledImage, LightBox, LightState, RasterImage, TransformKind, TransformParams};

use super::{label_transform, rotate_box, LightNote, NoteAction, Shift, SkipReason, TransformError, TransformOutcome};

/// Known pixels kept around each hole when inpainting it locally.
const HOLE_CONTEXT: u32 = 6;

type Span = (u32, u32, u32, u32);

fn span(b: &LightBox, img: &RasterImage) -> Span {
    b.pixel_span(img.width(), img.height())
}

fn extract(img: &RasterImage, s: Span) -> RasterImage {
    crop(img, s.0, s.1, s.2 - s.0, s.3 - s.1)
}

/// Each light independently with probability 1/2, redrawn until non-empty.
fn pick_subset(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
    loop {
        let picked: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        if picked.iter().any(|&p| p) {
            return picked;
        }
    }
}

/// First of `+width`, `-width` that keeps `b` inside the frame without
/// overlapping any box in `others` (except `ignore`).
fn place(
    b: &LightBox,
    others: &[LightBox],
    ignore: Option<usize>,
    width: u32,
    height: u32,
) -> Result<(Shift, LightBox), SkipReason> {
    let mut blocked = false;
    for shift in [Shift::Right, Shift::Left] {
        let candidate = b.translated(shift.offset(b.width()), 0.0);
        if !candidate.within(width, height) {
            continue;
        }
        let overlaps = others
            .iter()
            .enumerate()
            .any(|(j, o)| Some(j) != ignore && iou(&candidate, o) > 0.0);
        if overlaps {
            blocked = true;
            continue;
        }
        return Ok((shift, candidate));
    }
    Err(if blocked {
        SkipReason::Blocked
    } else {
        SkipReason::LeftFrame
    })
}

/// Inpaints every span, each within a small window of surrounding context.
fn fill_holes(img: &RasterImage, holes: &[Span]) -> Result<RasterImage, TransformError> {
    let (w, h) = (img.width(), img.height());
    let mut out = img.clone();
    for &(x0, y0, x1, y1) in holes {
        let (cx0, cy0) = (x0.saturating_sub(HOLE_CONTEXT), y0.saturating_sub(HOLE_CONTEXT));
        let (cx1, cy1) = ((x1 + HOLE_CONTEXT).min(w), (y1 + HOLE_CONTEXT).min(h));
        let mut mask = Mask::new(cx1 - cx0, cy1 - cy0);
        for &(a0, b0, a1, b1) in holes {
            if a1 > cx0 && a0 < cx1 && b1 > cy0 && b0 < cy1 {
                mask.fill_rect(
                    a0.max(cx0) - cx0,
                    b0.max(cy0) - cy0,
                    a1.min(cx1) - cx0,
                    b1.min(cy1) - cy0,
                );
            }
        }
        if mask.count() == mask.width() as usize * mask.height() as usize {
            // holes fill the whole window; fall back to the full image
            let mut full = Mask::new(w, h);
            for &(a0, b0, a1, b1) in holes {
                full.fill_rect(a0, b0, a1, b1);
            }
            return Ok(inpaint(img, &full)?);
        }
        let window = crop(&out, cx0, cy0, cx1 - cx0, cy1 - cy0);
        let filled = inpaint(&window, &mask)?;
        paste(&mut out, &filled, cx0 as i64, cy0 as i64);
    }
    Ok(out)
}

/// Rotates the hue of lit red pixels to green and lit green pixels to red;
/// dim or unsaturated pixels (housing, background) pass through.
pub fn swap_bulb_hue(rgb: [u8; 3]) -> [u8; 3] {
    let (h, s, v) = rgb_to_hsv(rgb);
    if s < 0.3 || v < 0.25 {
        return rgb;
    }
    if !(30.0..330.0).contains(&h) {
        hsv_to_rgb(h + 120.0, s, v)
    } else if (75.0..165.0).contains(&h) {
        hsv_to_rgb(h - 120.0, s, v)
    } else {
        rgb
    }
}

fn finish(
    kind: TransformKind,
    input: &LabeledImage,
    pixels: RasterImage,
    notes: Vec<LightNote>,
    seed: u64,
) -> Result<TransformOutcome, TransformError> {
    let lights = label_transform(
        kind,
        &input.lights,
        &notes,
        &TransformParams::default(),
        pixels.width(),
        pixels.height(),
    )?;
    Ok(TransformOutcome {
        image: LabeledImage {
            id: input.id.clone(),
            pixels,
            lights,
        },
        kind,
        seed,
        notes,
    })
}

fn require_lights(input: &LabeledImage) -> Result<(), TransformError> {
    if input.lights.is_empty() {
        Err(TransformError::NoLights)
    } else {
        Ok(())
    }
}

/// Swaps red and green on every non-warning light: the bulb colors are
/// remapped, the light is flipped so the red bulb stays on top (or left),
/// and the result is blended back in place.
pub fn cc_change_color(input: &LabeledImage, seed: u64) -> Result<TransformOutcome, TransformError> {
    require_lights(input)?;
    let src = &input.pixels;
    let (w, h) = (src.width(), src.height());
    let recolor: Vec<usize> = (0..input.lights.len())
        .filter(|&i| input.lights[i].state != LightState::Warning)
        .collect();
    let holes: Vec<Span> = recolor.iter().map(|&i| span(&input.lights[i], src)).collect();
    let mut img = fill_holes(src, &holes)?;

    for (&i, &s) in recolor.iter().zip(&holes) {
        let b = &input.lights[i];
        let mut body = extract(src, s);
        for px in body.data_mut().chunks_exact_mut(3) {
            let [r, g, bl] = swap_bulb_hue([px[0], px[1], px[2]]);
            px.copy_from_slice(&[r, g, bl]);
        }
        let body = if b.height() >= b.width() {
            flip_vertical(&body)
        } else {
            flip_horizontal(&body)
        };
        // one pixel of surrounding context gives the seam its guidance
        let (ex0, ey0) = (s.0.saturating_sub(1), s.1.saturating_sub(1));
        let (ex1, ey1) = ((s.2 + 1).min(w), (s.3 + 1).min(h));
        let mut framed = crop(&img, ex0, ey0, ex1 - ex0, ey1 - ey0);
        paste(&mut framed, &body, (s.0 - ex0) as i64, (s.1 - ey0) as i64);
        let alpha = (ey0..ey1)
            .flat_map(|y| {
                (ex0..ex1).map(move |x| {
                    if x >= s.0 && x < s.2 && y >= s.1 && y < s.3 {
                        1.0
                    } else {
                        0.0
                    }
                })
            })
            .collect();
        let patch = Patch::new(framed, (ex0, ey0), alpha).expect("alpha matches patch");
        img = poisson_blend(&img, &patch)?.0;
    }

    let notes = (0..input.lights.len())
        .map(|i| LightNote {
            source: i,
            output: Some(i),
            action: if input.lights[i].state == LightState::Warning {
                NoteAction::Unchanged
            } else {
                NoteAction::Recolored
            },
        })
        .collect();
    finish(TransformKind::Cc, input, img, notes, seed)
}

/// Moves a random non-empty subset of lights sideways by their own width.
pub fn mp_move_position(input: &LabeledImage, seed: u64) -> Result<TransformOutcome, TransformError> {
    require_lights(input)?;
    let src = &input.pixels;
    let (w, h) = (src.width(), src.height());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let selected = pick_subset(&mut rng, input.lights.len());

    let mut current = input.lights.clone();
    let mut notes = Vec::with_capacity(current.len());
    let mut moves = Vec::new();
    for (i, &pick) in selected.iter().enumerate() {
        let action = if !pick {
            NoteAction::Unchanged
        } else {
            match place(&input.lights[i], &current, Some(i), w, h) {
                Ok((shift, moved)) => {
                    current[i] = moved;
                    moves.push((i, shift));
                    NoteAction::Moved { shift }
                }
                Err(reason) => NoteAction::Skipped { reason },
            }
        };
        notes.push(LightNote {
            source: i,
            output: Some(i),
            action,
        });
    }

    let holes: Vec<Span> = moves.iter().map(|&(i, _)| span(&input.lights[i], src)).collect();
    let mut img = fill_holes(src, &holes)?;
    for (&(i, shift), &s) in moves.iter().zip(&holes) {
        let body = extract(src, s);
        let dx = shift.offset(input.lights[i].width());
        paste(&mut img, &body, (s.0 as f64 + dx).round() as i64, s.1 as i64);
    }
    finish(TransformKind::Mp, input, img, notes, seed)
}

/// Pastes copies of randomly chosen lights next to their sources. The
/// originals stay where they are.
pub fn ad_add_lights(input: &LabeledImage, seed: u64) -> Result<TransformOutcome, TransformError> {
    require_lights(input)?;
    let src = &input.pixels;
    let (w, h) = (src.width(), src.height());
    let n = input.lights.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(1..=n.div_ceil(2).max(1));

    let mut current = input.lights.clone();
    let mut notes: Vec<LightNote> = (0..n)
        .map(|i| LightNote {
            source: i,
            output: Some(i),
            action: NoteAction::Unchanged,
        })
        .collect();
    let mut img = src.clone();
    for _ in 0..k {
        let from = rng.random_range(0..n);
        let b = &input.lights[from];
        match place(b, &current, None, w, h) {
            Ok((shift, copy)) => {
                let s = span(b, src);
                let dx = shift.offset(b.width());
                paste(&mut img, &extract(src, s), (s.0 as f64 + dx).round() as i64, s.1 as i64);
                notes.push(LightNote {
                    source: from,
                    output: Some(current.len()),
                    action: NoteAction::Added { shift },
                });
                current.push(copy);
            }
            Err(reason) => notes.push(LightNote {
                source: from,
                output: None,
                action: NoteAction::NotAdded { reason },
            }),
        }
    }
    finish(TransformKind::Ad, input, img, notes, seed)
}

/// Turns a random non-empty subset of lights by a quarter about their
/// centers: horizontal lights clockwise, the rest counterclockwise. Arrow
/// states lose the arrow.
pub fn rt_rotate(input: &LabeledImage, seed: u64) -> Result<TransformOutcome, TransformError> {
    require_lights(input)?;
    let src = &input.pixels;
    let (w, h) = (src.width(), src.height());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let selected = pick_subset(&mut rng, input.lights.len());

    let mut notes = Vec::with_capacity(selected.len());
    let mut turned = Vec::new();
    for (i, &pick) in selected.iter().enumerate() {
        let b = &input.lights[i];
        let action = if !pick {
            NoteAction::Unchanged
        } else {
            let rotated = rotate_box(b);
            match clamp_box(&rotated, w, h) {
                Some(fitted) => {
                    turned.push(i);
                    NoteAction::Rotated {
                        clamped: fitted != rotated,
                    }
                }
                None => NoteAction::Skipped {
                    reason: SkipReason::Degenerate,
                },
            }
        };
        notes.push(LightNote {
            source: i,
            output: Some(i),
            action,
        });
    }

    let holes: Vec<Span> = turned.iter().map(|&i| span(&input.lights[i], src)).collect();
    let mut img = fill_holes(src, &holes)?;
    for (&i, &s) in turned.iter().zip(&holes) {
        let b = &input.lights[i];
        let body = extract(src, s);
        let body = if b.width() > b.height() {
            rotate_cw(&body)
        } else {
            rotate_ccw(&body)
        };
        let (xc, yc) = b.center();
        let x = (xc - body.width() as f64 / 2.0).round() as i64;
        let y = (yc - body.height() as f64 / 2.0).round() as i64;
        paste(&mut img, &body, x, y);
    }
    finish(TransformKind::Rt, input, img, notes, seed)
}
