//! Procedurally drawn street scenes with traffic lights, for tests, demos
//! and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::metrics::iou;
use crate::model::{LabeledImage, LightBox, LightState, RasterImage};

const HOUSING: [u8; 3] = [28, 30, 32];
const UNLIT: [u8; 3] = [58, 60, 58];
const RED: [u8; 3] = [235, 40, 30];
const YELLOW: [u8; 3] = [240, 190, 40];
const GREEN: [u8; 3] = [40, 225, 110];

/// Draws a three-bulb light filling `b`. Bulbs run along the long axis,
/// red first (top or left). Arrow states get a dark notch in the lit bulb.
pub fn draw_light(img: &mut RasterImage, b: &LightBox) {
    let (x0, y0, x1, y1) = b.pixel_span(img.width(), img.height());
    for y in y0..y1 {
        for x in x0..x1 {
            img.set_pixel(x, y, HOUSING);
        }
    }
    let vertical = b.height() >= b.width();
    let (long, short) = if vertical {
        (b.height(), b.width())
    } else {
        (b.width(), b.height())
    };
    let lit = match b.state {
        LightState::Stop | LightState::StopLeft => 0,
        LightState::Warning => 1,
        LightState::Go | LightState::GoLeft => 2,
    };
    let arrow = matches!(b.state, LightState::StopLeft | LightState::GoLeft);
    let radius = (short * 0.38).min(long / 6.0 * 0.9);
    for bulb in 0..3 {
        let along = long * (bulb as f64 * 2.0 + 1.0) / 6.0;
        let (cx, cy) = if vertical {
            (b.x1 + short / 2.0, b.y1 + along)
        } else {
            (b.x1 + along, b.y1 + short / 2.0)
        };
        let color = match (bulb == lit, bulb) {
            (true, 0) => RED,
            (true, 1) => YELLOW,
            (true, _) => GREEN,
            (false, _) => UNLIT,
        };
        for y in y0..y1 {
            for x in x0..x1 {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                if dx * dx + dy * dy > radius * radius {
                    continue;
                }
                let notch = arrow && bulb == lit && dx > 0.0 && dy.abs() < radius * 0.25;
                img.set_pixel(x, y, if notch { HOUSING } else { color });
            }
        }
    }
}

fn background(width: u32, height: u32, rng: &mut ChaCha8Rng) -> RasterImage {
    let top: [f64; 3] = [rng.random_range(90.0..160.0), rng.random_range(120.0..180.0), 210.0];
    let bottom: [f64; 3] = [rng.random_range(60.0..110.0); 3];
    let horizon = rng.random_range(0.55..0.75) * height as f64;
    let mut img = RasterImage::new(width, height).expect("non-empty scene");
    for y in 0..height {
        let t = y as f64 / height as f64;
        let base: [f64; 3] = if (y as f64) < horizon {
            std::array::from_fn(|c| top[c] + (bottom[c] - top[c]) * t * 0.5)
        } else {
            bottom
        };
        for x in 0..width {
            let grain = rng.random_range(-6.0..6.0);
            let px = base.map(|v| (v + grain).clamp(0.0, 255.0) as u8);
            img.set_pixel(x, y, px);
        }
    }
    img
}

/// One scene with up to `max_lights` non-overlapping lights at integer
/// coordinates, spaced so each has room to move sideways.
pub fn scene(id: &str, width: u32, height: u32, max_lights: usize, seed: u64) -> LabeledImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pixels = background(width, height, &mut rng);
    let count = rng.random_range(0..=max_lights);
    let unit = (height as f64 / 36.0).max(3.0);
    let mut lights: Vec<LightBox> = Vec::new();
    let mut attempts = 0;
    while lights.len() < count && attempts < 200 {
        attempts += 1;
        let short = (unit * rng.random_range(1.0..1.6)).round();
        let long = (short * rng.random_range(2.4..3.0)).round();
        let (bw, bh) = if rng.random_bool(0.25) {
            (long, short)
        } else {
            (short, long)
        };
        if bw * 3.0 >= width as f64 || bh * 2.0 >= height as f64 {
            continue;
        }
        let x = rng.random_range(0..(width as f64 - bw) as u32) as f64;
        let y = rng.random_range(0..(height as f64 * 0.6 - bh).max(1.0) as u32) as f64;
        let state = LightState::ALL[rng.random_range(0..LightState::ALL.len())];
        let b = LightBox::new(x, y, x + bw, y + bh, state).expect("positive size");
        // keep a box-width of clearance on both sides
        let zone = LightBox::new(x - bw, y, x + 2.0 * bw, y + bh, state).expect("positive size");
        if lights.iter().any(|o| iou(&zone, o) > 0.0) {
            continue;
        }
        lights.push(b);
    }
    for b in &lights {
        draw_light(&mut pixels, b);
    }
    LabeledImage {
        id: id.to_string(),
        pixels,
        lights,
    }
}

/// `n` scenes named `scene_000`, `scene_001`, ... Every fifth scene has no
/// lights; the rest have between one and four.
pub fn mini_dataset(n: usize, width: u32, height: u32, seed: u64) -> Dataset {
    let images = (0..n)
        .map(|i| {
            let id = format!("scene_{i:03}");
            let image_seed = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i as u64);
            if i % 5 == 4 {
                return scene(&id, width, height, 0, image_seed);
            }
            let mut img = scene(&id, width, height, 4, image_seed);
            let mut retry = image_seed;
            while img.lights.is_empty() {
                retry = retry.wrapping_add(0x1000);
                img = scene(&id, width, height, 4, retry);
            }
            img
        })
        .collect();
    Dataset::new("synthetic", images)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenes_are_deterministic_and_valid() {
        let a = mini_dataset(12, 320, 180, 5);
        assert_eq!(a, mini_dataset(12, 320, 180, 5));
        for img in &a.images {
            for b in &img.lights {
                assert!(b.is_valid() && b.within(320, 180));
                assert_eq!(b.x1.fract(), 0.0);
            }
            for (i, p) in img.lights.iter().enumerate() {
                for q in &img.lights[i + 1..] {
                    assert_eq!(iou(p, q), 0.0);
                }
            }
        }
        assert!(a.images[4].lights.is_empty());
        assert!(!a.images[0].lights.is_empty());
    }

    #[test]
    fn lit_bulb_is_drawn_red_first() {
        let mut img = RasterImage::filled(20, 40, [0, 0, 0]).unwrap();
        let b = LightBox::new(5.0, 5.0, 15.0, 35.0, LightState::Stop).unwrap();
        draw_light(&mut img, &b);
        assert_eq!(img.pixel(10, 10), RED);
        assert_eq!(img.pixel(10, 30), UNLIT);
    }
}
