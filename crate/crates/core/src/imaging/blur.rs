use std::collections::BTreeSet;

use crate::model::RasterImage;

/// Uniform line kernel: equal weights on the listed offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotionKernel {
    size: u32,
    taps: Vec<(i32, i32)>,
}

impl MotionKernel {
    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn taps(&self) -> &[(i32, i32)] {
        &self.taps
    }
}

/// 1-pixel-wide line through the center of a `k x k` grid at `angle_deg`
/// (counterclockwise from horizontal).
pub fn motion_kernel(k: u32, angle_deg: f64) -> MotionKernel {
    let half = (k / 2) as i32;
    let (sin, cos) = angle_deg.to_radians().sin_cos();
    let samples = (k * 8).max(2);
    let mut taps = BTreeSet::new();
    for i in 0..samples {
        let t = -(half as f64) + 2.0 * half as f64 * i as f64 / (samples - 1) as f64;
        let dx = (t * cos).round() as i32;
        let dy = (-t * sin).round() as i32;
        taps.insert((dy.clamp(-half, half), dx.clamp(-half, half)));
    }
    MotionKernel {
        size: k,
        taps: taps.into_iter().map(|(dy, dx)| (dx, dy)).collect(),
    }
}

/// Convolves every channel with a normalized motion kernel, replicating
/// edge pixels beyond the border.
pub fn convolve_motion_blur(img: &RasterImage, k: u32, angle_deg: f64) -> RasterImage {
    let kernel = motion_kernel(k, angle_deg);
    let (w, h) = (img.width() as i64, img.height() as i64);
    let n = kernel.taps.len() as u32;
    let src = img.data();
    let mut out = img.clone();
    let dst = out.data_mut();
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0u32; 3];
            for &(dx, dy) in &kernel.taps {
                let sx = (x + dx as i64).clamp(0, w - 1);
                let sy = (y + dy as i64).clamp(0, h - 1);
                let i = ((sy * w + sx) * 3) as usize;
                acc[0] += src[i] as u32;
                acc[1] += src[i + 1] as u32;
                acc[2] += src[i + 2] as u32;
            }
            let o = ((y * w + x) * 3) as usize;
            for c in 0..3 {
                dst[o + c] = ((acc[c] + n / 2) / n) as u8;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizontal_kernel_is_a_row() {
        let k = motion_kernel(15, 0.0);
        assert_eq!(k.taps().len(), 15);
        assert!(k.taps().iter().all(|&(_, dy)| dy == 0));
    }

    #[test]
    fn kernels_stay_inside_the_grid() {
        for angle in [-15.0, -7.5, 0.0, 3.0, 15.0, 45.0, 90.0] {
            let k = motion_kernel(15, angle);
            assert!(k.taps().contains(&(0, 0)));
            assert!(k.taps().iter().all(|&(dx, dy)| dx.abs() <= 7 && dy.abs() <= 7));
        }
    }

    #[test]
    fn three_tap_row() {
        let img = RasterImage::from_raw(3, 1, vec![0, 0, 0, 255, 255, 255, 0, 0, 0]).unwrap();
        let out = convolve_motion_blur(&img, 3, 0.0);
        assert_eq!(out.pixel(1, 0), [85, 85, 85]);
    }

    #[test]
    fn constant_image_is_fixed() {
        let img = RasterImage::filled(20, 11, [17, 140, 251]).unwrap();
        for angle in [-15.0, 0.0, 12.0] {
            assert_eq!(convolve_motion_blur(&img, 15, angle), img);
        }
    }

    #[test]
    fn mean_is_preserved_on_periodic_rows() {
        // 15-periodic rows: every horizontal window sees one full period
        let w = 45u32;
        let data: Vec<u8> = (0..w * 4)
            .flat_map(|i| {
                let v = ((i % w) % 15 * 17) as u8;
                [v, v, v]
            })
            .collect();
        let img = RasterImage::from_raw(w, 4, data).unwrap();
        let out = convolve_motion_blur(&img, 15, 0.0);
        let interior = |im: &RasterImage| {
            let mut s = 0.0;
            for y in 0..4 {
                for x in 15..30 {
                    s += im.pixel(x, y)[0] as f64;
                }
            }
            s / 60.0
        };
        assert!((interior(&out) - interior(&img)).abs() <= 1.0);
    }
}
