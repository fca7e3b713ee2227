use crate::model::RasterImage;

use super::ImagingError;

/// Binary per-pixel selection over an image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: u32,
    height: u32,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(width: u32, height: u32) -> Self {
        Mask {
            width,
            height,
            data: vec![false; width as usize * height as usize],
        }
    }

    /// Mask selecting the half-open rectangle `[x0, x1) x [y0, y1)`, clipped.
    pub fn from_rect(width: u32, height: u32, x0: u32, y0: u32, x1: u32, y1: u32) -> Self {
        let mut mask = Mask::new(width, height);
        mask.fill_rect(x0, y0, x1, y1);
        mask
    }

    pub fn fill_rect(&mut self, x0: u32, y0: u32, x1: u32, y1: u32) {
        for y in y0.min(self.height)..y1.min(self.height) {
            for x in x0.min(self.width)..x1.min(self.width) {
                self.set(x, y, true);
            }
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, on: bool) {
        self.data[y as usize * self.width as usize + x as usize] = on;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&m| m).count()
    }

    pub(crate) fn raw(&self) -> &[bool] {
        &self.data
    }

    pub(crate) fn check_matches(&self, img: &RasterImage) -> Result<(), ImagingError> {
        if self.width != img.width() || self.height != img.height() {
            return Err(ImagingError::MaskSize {
                mask_w: self.width,
                mask_h: self.height,
                width: img.width(),
                height: img.height(),
            });
        }
        Ok(())
    }
}

/// Pixels to composite into a destination image at `origin`, with a
/// per-pixel alpha mask of the same dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pixels: RasterImage,
    origin: (u32, u32),
    alpha: Vec<f32>,
}

impl Patch {
    pub fn new(pixels: RasterImage, origin: (u32, u32), alpha: Vec<f32>) -> Option<Self> {
        let n = pixels.width() as usize * pixels.height() as usize;
        (alpha.len() == n && alpha.iter().all(|a| (0.0..=1.0).contains(a))).then_some(Patch {
            pixels,
            origin,
            alpha,
        })
    }

    /// Patch whose mask selects every pixel.
    pub fn opaque(pixels: RasterImage, origin: (u32, u32)) -> Self {
        let n = pixels.width() as usize * pixels.height() as usize;
        Patch {
            pixels,
            origin,
            alpha: vec![1.0; n],
        }
    }

    /// Patch whose mask selects everything except a `margin`-pixel frame,
    /// which then serves as guidance context around the blended region.
    pub fn with_margin(pixels: RasterImage, origin: (u32, u32), margin: u32) -> Self {
        let (w, h) = (pixels.width(), pixels.height());
        let alpha = (0..h)
            .flat_map(|y| {
                (0..w).map(move |x| {
                    let inside = x >= margin && y >= margin && x + margin < w && y + margin < h;
                    if inside {
                        1.0
                    } else {
                        0.0
                    }
                })
            })
            .collect();
        Patch {
            pixels,
            origin,
            alpha,
        }
    }

    pub fn pixels(&self) -> &RasterImage {
        &self.pixels
    }

    pub fn origin(&self) -> (u32, u32) {
        self.origin
    }

    #[inline]
    pub fn alpha(&self, x: u32, y: u32) -> f32 {
        self.alpha[y as usize * self.pixels.width() as usize + x as usize]
    }

    #[inline]
    pub fn selects(&self, x: u32, y: u32) -> bool {
        self.alpha(x, y) >= 0.5
    }
}
