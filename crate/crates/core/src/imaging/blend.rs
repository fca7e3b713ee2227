use crate::model::RasterImage;

use super::{ImagingError, Patch};

const MAX_SWEEPS: u32 = 500;
const TOLERANCE: f32 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonStats {
    /// Gauss-Seidel sweeps used per channel.
    pub sweeps: [u32; 3],
    /// Largest per-pixel update in the final sweep, per channel.
    pub final_delta: [f32; 3],
}

/// Gradient-domain paste of `patch` into `dst`.
///
/// Solves the discrete Poisson equation over the pixels the patch mask
/// selects, with the patch Laplacian as guidance and the surrounding `dst`
/// pixels as Dirichlet boundary values. Pixels outside the mask are not
/// touched. Gauss-Seidel in row-major order, per channel, until the largest
/// update drops below `1e-3` or 500 sweeps.
pub fn poisson_blend(
    dst: &RasterImage,
    patch: &Patch,
) -> Result<(RasterImage, PoissonStats), ImagingError> {
    let (ox, oy) = patch.origin();
    let (pw, ph) = (patch.pixels().width(), patch.pixels().height());
    if ox as u64 + pw as u64 > dst.width() as u64 || oy as u64 + ph as u64 > dst.height() as u64 {
        return Err(ImagingError::PatchOutOfBounds {
            x: ox,
            y: oy,
            patch_w: pw,
            patch_h: ph,
            width: dst.width(),
            height: dst.height(),
        });
    }

    // unknown index per patch pixel
    let mut index = vec![usize::MAX; pw as usize * ph as usize];
    let mut unknowns = Vec::new();
    for y in 0..ph {
        for x in 0..pw {
            if patch.selects(x, y) {
                index[(y * pw + x) as usize] = unknowns.len();
                unknowns.push((x, y));
            }
        }
    }
    let mut out = dst.clone();
    let mut stats = PoissonStats {
        sweeps: [0; 3],
        final_delta: [0.0; 3],
    };
    if unknowns.is_empty() {
        return Ok((out, stats));
    }

    let (dw, dh) = (dst.width() as i64, dst.height() as i64);
    let src = patch.pixels();

    // Per unknown: neighbor links (either another unknown or a fixed value
    // channel triple), the guidance term and the neighbor count.
    enum Link {
        Unknown(usize),
        Fixed([f32; 3]),
    }
    struct Row {
        links: Vec<Link>,
        guidance: [f32; 3],
    }
    let rows: Vec<Row> = unknowns
        .iter()
        .map(|&(px, py)| {
            let gx = src.pixel(px, py).map(|v| v as f32);
            let mut links = Vec::with_capacity(4);
            let mut guidance = [0.0f32; 3];
            for (dx, dy) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let (qx, qy) = (ox as i64 + px as i64 + dx, oy as i64 + py as i64 + dy);
                if qx < 0 || qy < 0 || qx >= dw || qy >= dh {
                    continue;
                }
                let (lx, ly) = (px as i64 + dx, py as i64 + dy);
                let in_patch = lx >= 0 && ly >= 0 && lx < pw as i64 && ly < ph as i64;
                if in_patch {
                    let gq = src.pixel(lx as u32, ly as u32);
                    for c in 0..3 {
                        guidance[c] += gx[c] - gq[c] as f32;
                    }
                    let j = index[(ly as u32 * pw + lx as u32) as usize];
                    if j != usize::MAX {
                        links.push(Link::Unknown(j));
                        continue;
                    }
                }
                links.push(Link::Fixed(dst.pixel(qx as u32, qy as u32).map(|v| v as f32)));
            }
            Row { links, guidance }
        })
        .collect();

    for c in 0..3 {
        // Start from the patch shifted by the mean boundary mismatch.
        let mut boundary_diff = 0.0f64;
        let mut boundary_n = 0usize;
        for (k, row) in rows.iter().enumerate() {
            let (px, py) = unknowns[k];
            for link in &row.links {
                if let Link::Fixed(v) = link {
                    boundary_diff += (v[c] - src.pixel(px, py)[c] as f32) as f64;
                    boundary_n += 1;
                }
            }
        }
        let shift = if boundary_n > 0 {
            (boundary_diff / boundary_n as f64) as f32
        } else {
            0.0
        };
        let mut f: Vec<f32> = unknowns
            .iter()
            .map(|&(px, py)| src.pixel(px, py)[c] as f32 + shift)
            .collect();

        let mut sweeps = 0;
        let mut max_delta = f32::INFINITY;
        while sweeps < MAX_SWEEPS && max_delta >= TOLERANCE {
            max_delta = 0.0;
            for (k, row) in rows.iter().enumerate() {
                if row.links.is_empty() {
                    continue;
                }
                let mut sum = row.guidance[c];
                for link in &row.links {
                    sum += match link {
                        Link::Unknown(j) => f[*j],
                        Link::Fixed(v) => v[c],
                    };
                }
                let next = sum / row.links.len() as f32;
                max_delta = max_delta.max((next - f[k]).abs());
                f[k] = next;
            }
            sweeps += 1;
        }
        stats.sweeps[c] = sweeps;
        stats.final_delta[c] = max_delta;

        let w = out.width() as usize;
        let data = out.data_mut();
        for (k, &(px, py)) in unknowns.iter().enumerate() {
            let i = ((oy + py) as usize * w + (ox + px) as usize) * 3 + c;
            data[i] = f[k].round().clamp(0.0, 255.0) as u8;
        }
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::raster::crop;

    fn textured(w: u32, h: u32) -> RasterImage {
        let data = (0..w * h)
            .flat_map(|i| {
                let (x, y) = (i % w, i / w);
                [(x * 7 + y * 3) as u8, (x * x + y) as u8, (200 - y * 2) as u8]
            })
            .collect();
        RasterImage::from_raw(w, h, data).unwrap()
    }

    #[test]
    fn identical_patch_is_a_fixed_point() {
        let dst = textured(40, 30);
        let patch = Patch::with_margin(crop(&dst, 10, 8, 12, 9), (10, 8), 1);
        let (out, _) = poisson_blend(&dst, &patch).unwrap();
        for (a, b) in out.data().iter().zip(dst.data()) {
            assert!((*a as i32 - *b as i32).abs() <= 1);
        }
    }

    #[test]
    fn single_unknown_takes_neighbor_mean() {
        let dst = RasterImage::filled(5, 5, [90, 30, 200]).unwrap();
        let mut alpha = vec![0.0; 9];
        alpha[4] = 1.0;
        let src = RasterImage::filled(3, 3, [7, 7, 7]).unwrap();
        let patch = Patch::new(src, (1, 1), alpha).unwrap();
        let (out, _) = poisson_blend(&dst, &patch).unwrap();
        assert_eq!(out.pixel(2, 2), [90, 30, 200]);
    }

    #[test]
    fn constant_patch_matches_boundary() {
        let dst = RasterImage::filled(30, 30, [200, 10, 10]).unwrap();
        let src = RasterImage::filled(12, 12, [10, 220, 10]).unwrap();
        let patch = Patch::with_margin(src, (9, 9), 1);
        let (out, _) = poisson_blend(&dst, &patch).unwrap();
        // zero guidance with constant Dirichlet data: the solution is the
        // boundary color everywhere in the region
        for y in 10..20 {
            for x in 10..20 {
                assert_eq!(out.pixel(x, y), [200, 10, 10]);
            }
        }
    }

    #[test]
    fn pixels_outside_mask_untouched() {
        let dst = textured(32, 24);
        let src = RasterImage::filled(10, 10, [255, 0, 255]).unwrap();
        let patch = Patch::with_margin(src, (5, 6), 2);
        let (out, _) = poisson_blend(&dst, &patch).unwrap();
        for y in 0..24 {
            for x in 0..32 {
                let inside = (7..13).contains(&x) && (8..14).contains(&y);
                if !inside {
                    assert_eq!(out.pixel(x, y), dst.pixel(x, y));
                }
            }
        }
    }

    #[test]
    fn out_of_bounds_patch_rejected() {
        let dst = RasterImage::filled(10, 10, [0, 0, 0]).unwrap();
        let patch = Patch::opaque(RasterImage::filled(4, 4, [1, 1, 1]).unwrap(), (8, 2));
        assert!(matches!(
            poisson_blend(&dst, &patch),
            Err(ImagingError::PatchOutOfBounds { .. })
        ));
    }
}
