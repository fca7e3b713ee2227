//! Raster primitives composed by the transformations: color-space
//! conversion, motion-blur convolution, Poisson blending, diffusion
//! inpainting, procedural weather overlays and basic geometry.
//!
//! Every function here is pure and preserves the dimensions of its input
//! image. Randomized renderers take an explicit seed.

mod blend;
mod blur;
pub mod color;
mod inpaint;
mod mask;
pub mod raster;
mod weather;

use thiserror::Error;

pub use blend::{poisson_blend, PoissonStats};
pub use blur::{convolve_motion_blur, motion_kernel, MotionKernel};
pub use color::{adjust_lightness_hsl, hsv_to_rgb, lightness_gain, rgb_to_hsv, Exposure};
pub use inpaint::{inpaint, inpaint_with, InpaintOptions};
pub use mask::{Mask, Patch};
pub use weather::{
    flare_center, render_flare, render_fog, render_rain, render_snow, FLARE_BRIGHTNESS_LIFT,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImagingError {
    #[error("patch {patch_w}x{patch_h} at ({x}, {y}) does not fit in a {width}x{height} image")]
    PatchOutOfBounds {
        x: u32,
        y: u32,
        patch_w: u32,
        patch_h: u32,
        width: u32,
        height: u32,
    },
    #[error("mask leaves no known pixels to fill from")]
    MaskCoversImage,
    #[error("mask is {mask_w}x{mask_h} but image is {width}x{height}")]
    MaskSize {
        mask_w: u32,
        mask_h: u32,
        width: u32,
        height: u32,
    },
}
