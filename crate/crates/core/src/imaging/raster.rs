//! Geometry helpers: crop, flip, quarter-turn rotation, paste and bilinear
//! resampling.

use crate::model::RasterImage;

/// Copies the `w x h` region at `(x, y)`. The region must lie inside `img`.
pub fn crop(img: &RasterImage, x: u32, y: u32, w: u32, h: u32) -> RasterImage {
    assert!(x + w <= img.width() && y + h <= img.height(), "crop out of bounds");
    let stride = img.width() as usize * 3;
    let mut data = Vec::with_capacity(w as usize * h as usize * 3);
    for row in y..y + h {
        let start = row as usize * stride + x as usize * 3;
        data.extend_from_slice(&img.data()[start..start + w as usize * 3]);
    }
    RasterImage::from_raw(w, h, data).expect("crop size")
}

pub fn flip_vertical(img: &RasterImage) -> RasterImage {
    let stride = img.width() as usize * 3;
    let data = img
        .data()
        .chunks_exact(stride)
        .rev()
        .flatten()
        .copied()
        .collect();
    RasterImage::from_raw(img.width(), img.height(), data).expect("flip size")
}

pub fn flip_horizontal(img: &RasterImage) -> RasterImage {
    let stride = img.width() as usize * 3;
    let data = img
        .data()
        .chunks_exact(stride)
        .flat_map(|row| row.chunks_exact(3).rev().flatten().copied())
        .collect();
    RasterImage::from_raw(img.width(), img.height(), data).expect("flip size")
}

/// Quarter turn clockwise: a `w x h` image becomes `h x w`.
pub fn rotate_cw(img: &RasterImage) -> RasterImage {
    let (w, h) = (img.width(), img.height());
    let mut out = RasterImage::new(h, w).expect("rotate size");
    for y in 0..h {
        for x in 0..w {
            out.set_pixel(h - 1 - y, x, img.pixel(x, y));
        }
    }
    out
}

pub fn rotate_ccw(img: &RasterImage) -> RasterImage {
    let (w, h) = (img.width(), img.height());
    let mut out = RasterImage::new(h, w).expect("rotate size");
    for y in 0..h {
        for x in 0..w {
            out.set_pixel(y, w - 1 - x, img.pixel(x, y));
        }
    }
    out
}

/// Hard paste of `src` with its top-left at `(x, y)`; parts falling outside
/// `dst` are clipped.
pub fn paste(dst: &mut RasterImage, src: &RasterImage, x: i64, y: i64) {
    let (dw, dh) = (dst.width() as i64, dst.height() as i64);
    for sy in 0..src.height() as i64 {
        let ty = y + sy;
        if ty < 0 || ty >= dh {
            continue;
        }
        for sx in 0..src.width() as i64 {
            let tx = x + sx;
            if tx < 0 || tx >= dw {
                continue;
            }
            dst.set_pixel(tx as u32, ty as u32, src.pixel(sx as u32, sy as u32));
        }
    }
}

/// Bilinear resize with pixel-center alignment and edge clamping.
pub fn resample_bilinear(src: &RasterImage, width: u32, height: u32) -> RasterImage {
    let sx = src.width() as f64 / width as f64;
    let sy = src.height() as f64 / height as f64;
    let max_x = src.width() as f64 - 1.0;
    let max_y = src.height() as f64 - 1.0;
    let columns: Vec<(u32, u32, f32)> = (0..width)
        .map(|u| {
            let fx = ((u as f64 + 0.5) * sx - 0.5).clamp(0.0, max_x);
            let x0 = fx.floor();
            (x0 as u32, (x0 + 1.0).min(max_x) as u32, (fx - x0) as f32)
        })
        .collect();
    let mut data = Vec::with_capacity(width as usize * height as usize * 3);
    for v in 0..height {
        let fy = ((v as f64 + 0.5) * sy - 0.5).clamp(0.0, max_y);
        let y0 = fy.floor();
        let (y0, y1, ty) = (y0 as u32, (y0 + 1.0).min(max_y) as u32, (fy - y0) as f32);
        for &(x0, x1, tx) in &columns {
            let (a, b) = (src.pixel(x0, y0), src.pixel(x1, y0));
            let (c, d) = (src.pixel(x0, y1), src.pixel(x1, y1));
            for ch in 0..3 {
                let top = a[ch] as f32 + (b[ch] as f32 - a[ch] as f32) * tx;
                let bottom = c[ch] as f32 + (d[ch] as f32 - c[ch] as f32) * tx;
                data.push((top + (bottom - top) * ty).round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    RasterImage::from_raw(width, height, data).expect("resample size")
}
