//! Salt-and-pepper noise injection and impulse detection.
//!
//! Injection draws one uniform `f64` per pixel, in row-major order, from a
//! ChaCha8 stream seeded with the 64-bit seed (`rand_chacha::ChaCha8Rng::
//! seed_from_u64`). A draw below `pepper` sets the pixel to 0, a draw below
//! `pepper + salt` sets it to 255, anything else keeps the original value. The
//! stream and the mapping are platform independent, so a seed fully determines
//! the corrupted image.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::{Image, PixelCoord, MAX_INTENSITY};

const PROB_SLACK: f64 = 1e-12;

/// Salt (255) and pepper (0) probabilities plus the generator seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    salt: f64,
    pepper: f64,
    seed: u64,
}

impl NoiseParams {
    pub fn new(salt: f64, pepper: f64, seed: u64) -> Result<Self> {
        if !(salt >= 0.0 && pepper >= 0.0) {
            return Err(Error::NoiseParams(format!(
                "probabilities must be non-negative (salt {salt}, pepper {pepper})"
            )));
        }
        if salt + pepper > 1.0 + PROB_SLACK {
            return Err(Error::NoiseParams(format!(
                "salt + pepper = {} exceeds 1",
                salt + pepper
            )));
        }
        Ok(NoiseParams { salt, pepper, seed })
    }

    /// Symmetric corruption at `density_pct` percent: salt = pepper = density / 200.
    pub fn symmetric(density_pct: f64, seed: u64) -> Result<Self> {
        if !(0.0..=100.0).contains(&density_pct) {
            return Err(Error::NoiseParams(format!(
                "density {density_pct}% is outside [0, 100]"
            )));
        }
        let half = density_pct / 200.0;
        NoiseParams::new(half, half, seed)
    }

    pub fn salt(&self) -> f64 {
        self.salt
    }

    pub fn pepper(&self) -> f64 {
        self.pepper
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn density(&self) -> f64 {
        self.salt + self.pepper
    }
}

pub fn inject(img: &Image, params: &NoiseParams) -> Result<Image> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let pepper = params.pepper;
    let salt_or_pepper = params.pepper + params.salt;
    let pixels = img
        .pixels()
        .iter()
        .map(|&v| {
            let u: f64 = rng.random();
            if u < pepper {
                0.0
            } else if u < salt_or_pepper {
                MAX_INTENSITY
            } else {
                v
            }
        })
        .collect();
    Ok(img.with_pixels(pixels))
}

/// Per-pixel impulse flags; `true` marks a pixel whose intensity is 0 or 255.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoiseMask {
    width: usize,
    height: usize,
    flags: Vec<bool>,
}

impl NoiseMask {
    pub fn new(width: usize, height: usize, flags: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        if flags.len() != width * height {
            return Err(Error::PixelCount {
                expected: width * height,
                found: flags.len(),
            });
        }
        Ok(NoiseMask { width, height, flags })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    #[inline]
    pub fn is_noisy(&self, p: PixelCoord) -> bool {
        self.flags[p.row * self.width + p.col]
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn fraction(&self) -> f64 {
        self.count() as f64 / self.flags.len() as f64
    }

    /// Noisy coordinates in row-major order.
    pub fn noisy_coords(&self) -> impl Iterator<Item = PixelCoord> + '_ {
        self.flags
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(move |(i, _)| PixelCoord::new(i / self.width, i % self.width))
    }

    pub fn matches(&self, img: &Image) -> bool {
        self.width == img.width() && self.height == img.height()
    }
}

/// Flags every pixel at an impulse extreme. Clean pixels that are natively 0
/// or 255 are flagged too.
pub fn detect(img: &Image) -> NoiseMask {
    let flags = img.pixels().iter().map(|&v| v == 0.0 || v == MAX_INTENSITY).collect();
    NoiseMask {
        width: img.width(),
        height: img.height(),
        flags,
    }
}
