//! Grayscale image container.
//!
//! Intensities are stored as `f64` so restoration stages can carry fractional
//! estimates between passes. Values are always finite and within `[0, 255]`;
//! quantization to 8 bits happens in [`Image::to_u8`] and [`Image::quantized`].

use crate::error::{Error, Result};

pub const MAX_INTENSITY: f64 = 255.0;

/// A row/column position in an image.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PixelCoord {
    pub row: usize,
    pub col: usize,
}

impl PixelCoord {
    pub const fn new(row: usize, col: usize) -> Self {
        PixelCoord { row, col }
    }

    /// Euclidean distance on the integer grid.
    #[inline]
    pub fn distance(self, other: PixelCoord) -> f64 {
        let dr = self.row as f64 - other.row as f64;
        let dc = self.col as f64 - other.col as f64;
        (dr * dr + dc * dc).sqrt()
    }
}

/// Row-major grayscale image with intensities in `[0, 255]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        if pixels.len() != width * height {
            return Err(Error::PixelCount {
                expected: width * height,
                found: pixels.len(),
            });
        }
        if let Some((index, &value)) = pixels
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=MAX_INTENSITY).contains(*v))
        {
            return Err(Error::IntensityOutOfRange { index, value });
        }
        Ok(Image { width, height, pixels })
    }

    pub fn from_u8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        check_dims(width, height)?;
        if bytes.len() != width * height {
            return Err(Error::PixelCount {
                expected: width * height,
                found: bytes.len(),
            });
        }
        Ok(Image {
            width,
            height,
            pixels: bytes.iter().map(|&b| f64::from(b)).collect(),
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        check_dims(width, height)?;
        Image::new(width, height, vec![value; width * height])
    }

    /// Builds an image by evaluating `f` at every pixel in row-major order.
    pub fn from_fn<F>(width: usize, height: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(PixelCoord) -> f64,
    {
        check_dims(width, height)?;
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(PixelCoord { row, col }));
            }
        }
        Image::new(width, height, pixels)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    #[inline]
    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn index(&self, p: PixelCoord) -> usize {
        p.row * self.width + p.col
    }

    #[inline]
    pub fn get(&self, p: PixelCoord) -> f64 {
        self.pixels[self.index(p)]
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    /// Returns the coordinate if it lies inside the image.
    pub fn coord(&self, row: usize, col: usize) -> Option<PixelCoord> {
        (row < self.height && col < self.width).then_some(PixelCoord { row, col })
    }

    pub fn same_dims(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_same_dims(&self, other: &Image) -> Result<()> {
        if self.same_dims(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ))
        }
    }

    /// Copy of this image with `pixels` replaced. Values are clamped into range.
    pub(crate) fn with_pixels(&self, mut pixels: Vec<f64>) -> Image {
        debug_assert_eq!(pixels.len(), self.pixels.len());
        for v in &mut pixels {
            *v = v.clamp(0.0, MAX_INTENSITY);
        }
        Image {
            width: self.width,
            height: self.height,
            pixels,
        }
    }

    /// 8-bit samples: nearest integer (halves away from zero), clamped.
    pub fn to_u8(&self) -> Vec<u8> {
        self.pixels.iter().map(|&v| quantize(v)).collect()
    }

    pub fn quantized(&self) -> Image {
        Image {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&v| f64::from(quantize(v))).collect(),
        }
    }

    pub fn is_integer_valued(&self) -> bool {
        self.pixels.iter().all(|v| v.fract() == 0.0)
    }
}

#[inline]
pub fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, MAX_INTENSITY) as u8
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 || width.checked_mul(height).is_none() {
        return Err(Error::InvalidDimensions { width, height });
    }
    Ok(())
}
