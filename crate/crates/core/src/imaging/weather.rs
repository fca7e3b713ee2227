//! Procedural weather and lens overlays. Each renderer draws from its own
//! ChaCha stream seeded by the caller; nothing reads global state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Interval, RasterImage};

/// Multiplicative brightness lift applied to the flare half of the frame.
pub const FLARE_BRIGHTNESS_LIFT: f32 = 1.10;

fn sample(rng: &mut ChaCha8Rng, range: Interval) -> f64 {
    range.lo + (range.hi - range.lo) * rng.random::<f64>()
}

#[inline]
fn blend_px(px: &mut [u8], color: [f32; 3], alpha: f32) {
    for c in 0..3 {
        let v = px[c] as f32 * (1.0 - alpha) + color[c] * alpha;
        px[c] = v.round().clamp(0.0, 255.0) as u8;
    }
}

/// Rain streaks. Drop count and streak length grow with the sampled speed;
/// streak thickness grows with the sampled drop size. A zero speed draws
/// nothing.
pub fn render_rain(img: &RasterImage, drop_size: Interval, speed: Interval, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let speed = sample(&mut rng, speed);
    let drop = sample(&mut rng, drop_size);
    let (w, h) = (img.width() as f64, img.height() as f64);
    let count = (speed * w * h / 500.0).round() as usize;
    let mut out = img.clone();
    if count == 0 {
        return out;
    }
    let scale = h / 720.0;
    let thickness = (1.0 + drop * 10.0 * scale).round().max(1.0) as i64;
    let base_len = speed * h * 0.12;
    // shared slant for the whole frame, radians off vertical
    let slant: f64 = rng.random_range(-0.25..=0.25);
    let (sin, cos) = slant.sin_cos();
    let color = [205.0, 208.0, 215.0];
    let width = out.width() as i64;
    let height = out.height() as i64;
    for _ in 0..count {
        let x0 = rng.random::<f64>() * w;
        let y0 = rng.random::<f64>() * h;
        let len = base_len * rng.random_range(0.6..1.4);
        let alpha = rng.random_range(0.25f32..0.55);
        let steps = len.ceil().max(1.0) as usize;
        let mut last = (i64::MIN, i64::MIN);
        for s in 0..=steps {
            let t = s as f64;
            let px = (x0 + t * sin).round() as i64;
            let py = (y0 + t * cos).round() as i64;
            if (px, py) == last {
                continue;
            }
            last = (px, py);
            for dx in 0..thickness {
                let (x, y) = (px + dx, py);
                if x >= 0 && y >= 0 && x < width && y < height {
                    let i = ((y * width + x) * 3) as usize;
                    blend_px(&mut out.data_mut()[i..i + 3], color, alpha);
                }
            }
        }
    }
    out
}

/// Soft white flakes plus a faint haze. Flake count and radius grow with
/// severity.
pub fn render_snow(img: &RasterImage, severity: u8, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sev = severity as f64;
    let (w, h) = (img.width() as f64, img.height() as f64);
    let mut out = img.clone();
    let haze = 0.03 * sev as f32;
    for px in out.data_mut().chunks_exact_mut(3) {
        blend_px(px, [235.0, 238.0, 245.0], haze);
    }
    let count = (w * h * 0.0012 * sev).round() as usize;
    let scale = h / 720.0;
    let width = out.width() as i64;
    let height = out.height() as i64;
    for _ in 0..count {
        let cx = rng.random::<f64>() * w;
        let cy = rng.random::<f64>() * h;
        let r = (0.6 + 0.5 * sev) * scale * rng.random_range(0.5..1.5);
        let peak = rng.random_range(0.55f32..0.9);
        let reach = r.ceil() as i64;
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                let (x, y) = (cx as i64 + dx, cy as i64 + dy);
                if x < 0 || y < 0 || x >= width || y >= height {
                    continue;
                }
                let d = ((x as f64 + 0.5 - cx).powi(2) + (y as f64 + 0.5 - cy).powi(2)).sqrt();
                if d >= r.max(0.5) {
                    continue;
                }
                let a = peak * (1.0 - (d / r.max(0.5)) as f32).powf(0.7);
                let i = ((y * width + x) * 3) as usize;
                blend_px(&mut out.data_mut()[i..i + 3], [250.0, 250.0, 252.0], a);
            }
        }
    }
    out
}

/// Smooth 2-D value noise in `[0, 1]` on a seeded lattice.
struct ValueNoise {
    cols: usize,
    rows: usize,
    cell: f64,
    lattice: Vec<f32>,
}

impl ValueNoise {
    fn new(rng: &mut ChaCha8Rng, width: f64, height: f64, cell: f64) -> Self {
        let cols = (width / cell).ceil() as usize + 2;
        let rows = (height / cell).ceil() as usize + 2;
        let lattice = (0..cols * rows).map(|_| rng.random::<f32>()).collect();
        ValueNoise {
            cols,
            rows,
            cell,
            lattice,
        }
    }

    fn at(&self, x: f64, y: f64) -> f32 {
        let gx = x / self.cell;
        let gy = y / self.cell;
        let (ix, iy) = (gx.floor() as usize, gy.floor() as usize);
        let ix = ix.min(self.cols - 2);
        let iy = iy.min(self.rows - 2);
        let smooth = |t: f64| (t * t * (3.0 - 2.0 * t)) as f32;
        let (tx, ty) = (smooth(gx - ix as f64), smooth(gy - iy as f64));
        let v = |cx: usize, cy: usize| self.lattice[cy * self.cols + cx];
        let top = v(ix, iy) + (v(ix + 1, iy) - v(ix, iy)) * tx;
        let bottom = v(ix, iy + 1) + (v(ix + 1, iy + 1) - v(ix, iy + 1)) * tx;
        top + (bottom - top) * ty
    }
}

/// White fog layer with opacity modulated by three octaves of value noise
/// and scaled by severity. Every non-white pixel gets lighter.
pub fn render_fog(img: &RasterImage, severity: u8, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (img.width() as f64, img.height() as f64);
    let base_cell = (w.max(h) / 3.0).max(4.0);
    let octaves = [
        (ValueNoise::new(&mut rng, w, h, base_cell), 0.57f32),
        (ValueNoise::new(&mut rng, w, h, base_cell / 2.0), 0.29),
        (ValueNoise::new(&mut rng, w, h, base_cell / 4.0), 0.14),
    ];
    let strength = 0.15 * severity as f32;
    let mut out = img.clone();
    let width = img.width() as usize;
    for (i, px) in out.data_mut().chunks_exact_mut(3).enumerate() {
        let (x, y) = ((i % width) as f64 + 0.5, (i / width) as f64 + 0.5);
        let n: f32 = octaves.iter().map(|(o, amp)| o.at(x, y) * amp).sum();
        let alpha = (strength * (0.4 + 0.6 * n)).min(0.95);
        blend_px(px, [255.0, 255.0, 255.0], alpha);
    }
    out
}

/// Flare source location for a given seed: upper half of the frame.
pub fn flare_center(width: u32, height: u32, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = rng.random_range(0.1..0.9) * width as f64;
    let y = rng.random_range(0.05..0.45) * height as f64;
    (x, y)
}

/// Additive lens flare: a warm radial glare at `center`, a row of ghost
/// discs along the line through the frame center, and a fixed brightness
/// lift on the half of the frame that holds the flare.
pub fn render_flare(img: &RasterImage, center: (f64, f64), seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (img.width() as f64, img.height() as f64);
    let diag = (w * w + h * h).sqrt();
    let (cx, cy) = center;
    let core = 0.05 * diag;
    let halo = 0.18 * diag;

    struct Ghost {
        x: f64,
        y: f64,
        r: f64,
        tint: [f32; 3],
        strength: f32,
    }
    let (mx, my) = (w / 2.0, h / 2.0);
    let ghosts: Vec<Ghost> = [0.45, 1.25, 1.6, 2.1]
        .into_iter()
        .map(|t| Ghost {
            x: cx + t * (mx - cx),
            y: cy + t * (my - cy),
            r: rng.random_range(0.015..0.05) * diag,
            tint: [
                rng.random_range(0.5f32..1.0),
                rng.random_range(0.6f32..1.0),
                rng.random_range(0.7f32..1.0),
            ],
            strength: rng.random_range(0.08f32..0.2),
        })
        .collect();

    let lift_top = cy < h / 2.0;
    let mut out = img.clone();
    let width = img.width() as usize;
    for (i, px) in out.data_mut().chunks_exact_mut(3).enumerate() {
        let (x, y) = ((i % width) as f64 + 0.5, (i / width) as f64 + 0.5);
        let in_flare_half = (y < h / 2.0) == lift_top;
        let gain = if in_flare_half { FLARE_BRIGHTNESS_LIFT } else { 1.0 };
        let d2 = (x - cx).powi(2) + (y - cy).powi(2);
        let glare = 0.9 * (-d2 / (core * core)).exp() + 0.25 * (-d2 / (halo * halo)).exp();
        let mut add = [
            255.0 * glare as f32,
            245.0 * glare as f32,
            215.0 * glare as f32,
        ];
        for g in &ghosts {
            let d = ((x - g.x).powi(2) + (y - g.y).powi(2)).sqrt();
            if d < g.r {
                let edge = (1.0 - d / g.r) as f32;
                let a = g.strength * edge.sqrt();
                for (acc, tint) in add.iter_mut().zip(g.tint) {
                    *acc += 255.0 * tint * a;
                }
            }
        }
        for c in 0..3 {
            px[c] = (px[c] as f32 * gain + add[c]).round().clamp(0.0, 255.0) as u8;
        }
    }
    out
}
