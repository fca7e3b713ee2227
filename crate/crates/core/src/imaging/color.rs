//! HSV and HSL conversions over 8-bit RGB.

use crate::model::RasterImage;

/// Hexcone HSV. Hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
/// Grays have no hue; by convention they report `h = 0`.
pub fn rgb_to_hsv(rgb: [u8; 3]) -> (f64, f64, f64) {
    let [r, g, b] = rgb.map(|c| c as f64 / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    (normalize_hue(h), s, v)
}

pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let h = normalize_hue(h);
    let s = s.clamp(0.0, 1.0);
    let v = v.clamp(0.0, 1.0);
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [r, g, b].map(|ch| to_u8((ch + m) * 255.0))
}

/// HSL with hue in degrees and saturation/lightness in `[0, 1]`.
pub fn rgb_to_hsl(rgb: [u8; 3]) -> (f64, f64, f64) {
    let [r, g, b] = rgb.map(|c| c as f64 / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let l = (max + min) / 2.0;
    let delta = max - min;
    if delta == 0.0 {
        return (0.0, 0.0, l);
    }
    let s = delta / (1.0 - (2.0 * l - 1.0).abs());
    let (h, _, _) = rgb_to_hsv(rgb);
    (h, s.clamp(0.0, 1.0), l)
}

pub fn hsl_to_rgb(h: f64, s: f64, l: f64) -> [u8; 3] {
    let h = normalize_hue(h);
    let s = s.clamp(0.0, 1.0);
    let l = l.clamp(0.0, 1.0);
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    [r, g, b].map(|ch| to_u8((ch + m) * 255.0))
}

fn normalize_hue(h: f64) -> f64 {
    let h = h.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if h >= 360.0 {
        0.0
    } else {
        h
    }
}

#[inline]
fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exposure {
    Brighten,
    Darken,
}

/// Lightness offset applied for an exposure severity in `1..=5`.
pub fn lightness_gain(severity: u8) -> f64 {
    0.1 * severity as f64 + 0.1
}

/// Shifts the HSL lightness of one pixel, keeping hue and saturation.
pub fn shift_lightness(rgb: [u8; 3], delta: f64) -> [u8; 3] {
    let (h, s, l) = rgb_to_hsl(rgb);
    hsl_to_rgb(h, s, (l + delta).clamp(0.0, 1.0))
}

pub fn adjust_lightness_hsl(img: &RasterImage, severity: u8, direction: Exposure) -> RasterImage {
    let sign = match direction {
        Exposure::Brighten => 1.0,
        Exposure::Darken => -1.0,
    };
    let delta = sign * lightness_gain(severity);
    let mut out = img.clone();
    // Many pixels repeat in real frames; a tiny memo avoids redundant
    // conversions on flat regions.
    let mut last: Option<([u8; 3], [u8; 3])> = None;
    for px in out.data_mut().chunks_exact_mut(3) {
        let rgb = [px[0], px[1], px[2]];
        let mapped = match last {
            Some((src, dst)) if src == rgb => dst,
            _ => {
                let dst = shift_lightness(rgb, delta);
                last = Some((rgb, dst));
                dst
            }
        };
        px.copy_from_slice(&mapped);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hsv_primaries() {
        assert_eq!(rgb_to_hsv([255, 0, 0]), (0.0, 1.0, 1.0));
        assert_eq!(rgb_to_hsv([0, 255, 0]), (120.0, 1.0, 1.0));
        let (h, s, v) = rgb_to_hsv([128, 128, 128]);
        assert_eq!((h, s), (0.0, 0.0));
        assert!((v - 128.0 / 255.0).abs() < 1e-12);
        assert_eq!(hsv_to_rgb(240.0, 1.0, 1.0), [0, 0, 255]);
    }

    #[test]
    fn mid_gray_severity_four_saturates_to_white() {
        // L = 0.5 plus gain 0.5 clamps to 1.0
        let (_, _, l) = rgb_to_hsl(hsl_to_rgb(0.0, 0.0, (0.5 + lightness_gain(4)).min(1.0)));
        assert_eq!(l, 1.0);
        let img = RasterImage::filled(4, 4, [128, 128, 128]).unwrap();
        let out = adjust_lightness_hsl(&img, 4, Exposure::Brighten);
        assert!(out.pixels().all(|p| p == [255, 255, 255]));
    }

    #[test]
    fn brighten_black_and_white() {
        let black = RasterImage::filled(3, 3, [0, 0, 0]).unwrap();
        for s in 1..=5 {
            let out = adjust_lightness_hsl(&black, s, Exposure::Brighten);
            assert!(out.mean_luma() > black.mean_luma());
        }
        let white = RasterImage::filled(3, 3, [255, 255, 255]).unwrap();
        assert_eq!(adjust_lightness_hsl(&white, 3, Exposure::Brighten), white);
    }

    #[test]
    fn darken_lowers_lightness() {
        let img = RasterImage::filled(2, 2, [200, 60, 60]).unwrap();
        let out = adjust_lightness_hsl(&img, 1, Exposure::Darken);
        let (h0, s0, l0) = rgb_to_hsl(img.pixel(0, 0));
        let (h1, s1, l1) = rgb_to_hsl(out.pixel(0, 0));
        assert!((l0 - 0.2 - l1).abs() < 0.01);
        assert!((h0 - h1).abs() < 2.0);
        assert!((s0 - s1).abs() < 0.02);
    }

    proptest! {
        #[test]
        fn hsv_round_trip(r: u8, g: u8, b: u8) {
            let (h, s, v) = rgb_to_hsv([r, g, b]);
            prop_assert!((0.0..360.0).contains(&h));
            let back = hsv_to_rgb(h, s, v);
            for (a, b) in back.iter().zip([r, g, b]) {
                prop_assert!((*a as i32 - b as i32).abs() <= 1);
            }
        }

        #[test]
        fn hsl_round_trip(r: u8, g: u8, b: u8) {
            let (h, s, l) = rgb_to_hsl([r, g, b]);
            let back = hsl_to_rgb(h, s, l);
            for (a, b) in back.iter().zip([r, g, b]) {
                prop_assert!((*a as i32 - b as i32).abs() <= 1);
            }
        }
    }
}
