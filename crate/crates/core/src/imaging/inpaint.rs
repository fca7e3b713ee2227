use crate::model::RasterImage;

use super::{ImagingError, Mask};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InpaintOptions {
    /// Gauss-Seidel relaxation sweeps after the inward march.
    pub max_sweeps: u32,
    /// Stop relaxing once no pixel moves by more than this (8-bit units).
    pub tolerance: f32,
}

impl Default for InpaintOptions {
    fn default() -> Self {
        InpaintOptions {
            max_sweeps: 60,
            tolerance: 0.05,
        }
    }
}

pub fn inpaint(img: &RasterImage, region: &Mask) -> Result<RasterImage, ImagingError> {
    inpaint_with(img, region, InpaintOptions::default())
}

/// Diffusion fill of the masked pixels.
///
/// Masked pixels are first filled layer by layer from the region boundary
/// inward, each taking the mean of its already-known 8-neighbors, then
/// smoothed with Laplace relaxation (4-neighbor mean). Unmasked pixels are
/// copied through untouched.
pub fn inpaint_with(
    img: &RasterImage,
    region: &Mask,
    opts: InpaintOptions,
) -> Result<RasterImage, ImagingError> {
    region.check_matches(img)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let masked = region.raw();
    let holes: Vec<usize> = (0..w * h).filter(|&i| masked[i]).collect();
    if holes.is_empty() {
        return Ok(img.clone());
    }
    if holes.len() == w * h {
        return Err(ImagingError::MaskCoversImage);
    }

    let mut value: Vec<[f32; 3]> = vec![[0.0; 3]; w * h];
    let mut known: Vec<bool> = masked.iter().map(|m| !m).collect();
    for &i in &holes {
        // neighbors of holes are the only known pixels ever read
        for j in neighbors8(i, w, h) {
            if known[j] {
                let p = &img.data()[j * 3..j * 3 + 3];
                value[j] = [p[0] as f32, p[1] as f32, p[2] as f32];
            }
        }
    }

    // inward march, one ring at a time
    let mut queued = vec![false; w * h];
    let mut frontier: Vec<usize> = holes
        .iter()
        .copied()
        .filter(|&i| neighbors8(i, w, h).any(|j| known[j]))
        .collect();
    for &i in &frontier {
        queued[i] = true;
    }
    while !frontier.is_empty() {
        let fills: Vec<[f32; 3]> = frontier
            .iter()
            .map(|&i| {
                let mut acc = [0.0f32; 3];
                let mut n = 0.0f32;
                for j in neighbors8(i, w, h).filter(|&j| known[j]) {
                    for c in 0..3 {
                        acc[c] += value[j][c];
                    }
                    n += 1.0;
                }
                acc.map(|a| a / n)
            })
            .collect();
        for (&i, v) in frontier.iter().zip(fills) {
            value[i] = v;
            known[i] = true;
        }
        let mut next = Vec::new();
        for &i in &frontier {
            for j in neighbors8(i, w, h) {
                if !known[j] && !queued[j] {
                    queued[j] = true;
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        frontier = next;
    }

    for _ in 0..opts.max_sweeps {
        let mut max_delta = 0.0f32;
        for &i in &holes {
            let mut acc = [0.0f32; 3];
            let mut n = 0.0f32;
            for j in neighbors4(i, w, h) {
                for c in 0..3 {
                    acc[c] += value[j][c];
                }
                n += 1.0;
            }
            for c in 0..3 {
                let next = acc[c] / n;
                max_delta = max_delta.max((next - value[i][c]).abs());
                value[i][c] = next;
            }
        }
        if max_delta < opts.tolerance {
            break;
        }
    }

    let mut out = img.clone();
    let data = out.data_mut();
    for &i in &holes {
        for c in 0..3 {
            data[i * 3 + c] = value[i][c].round().clamp(0.0, 255.0) as u8;
        }
    }
    Ok(out)
}

#[inline]
fn neighbors8(i: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (x, y) = ((i % w) as i64, (i / w) as i64);
    const OFFSETS: [(i64, i64); 8] = [
        (-1, -1),
        (0, -1),
        (1, -1),
        (-1, 0),
        (1, 0),
        (-1, 1),
        (0, 1),
        (1, 1),
    ];
    OFFSETS.into_iter().filter_map(move |(dx, dy)| {
        let (nx, ny) = (x + dx, y + dy);
        (nx >= 0 && ny >= 0 && nx < w as i64 && ny < h as i64).then(|| ny as usize * w + nx as usize)
    })
}

#[inline]
fn neighbors4(i: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (x, y) = ((i % w) as i64, (i / w) as i64);
    [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)]
        .into_iter()
        .filter_map(move |(dx, dy)| {
            let (nx, ny) = (x + dx, y + dy);
            (nx >= 0 && ny >= 0 && nx < w as i64 && ny < h as i64)
                .then(|| ny as usize * w + nx as usize)
        })
}
