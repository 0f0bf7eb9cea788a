//! Median-type reference filters.

use crate::error::{Error, Result};
use crate::image::{Image, PixelCoord, MAX_INTENSITY};
use crate::restore::WindowBounds;

fn lower_median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values[(values.len() - 1) / 2]
}

/// 3×3 median over the in-bounds neighborhood of every pixel. Border pixels
/// with an even neighbor count take the lower middle value.
pub fn median3x3(img: &Image) -> Image {
    let (w, h) = (img.width(), img.height());
    let mut buf = Vec::with_capacity(9);
    let mut out = Vec::with_capacity(img.len());
    for row in 0..h {
        for col in 0..w {
            buf.clear();
            let bounds = WindowBounds::clipped(PixelCoord { row, col }, 1, w, h);
            buf.extend(bounds.coords().map(|p| img.get(p)));
            out.push(lower_median(&mut buf));
        }
    }
    img.with_pixels(out)
}

#[inline]
fn is_impulse(v: f64) -> bool {
    v == 0.0 || v == MAX_INTENSITY
}

/// Adaptive median filter for salt-and-pepper noise.
///
/// Pixels that are not at 0 or 255 are kept. For an impulse pixel the window
/// grows from 3×3 until its median lies strictly between the window minimum
/// and maximum (level A); that median replaces the pixel. If the window
/// reaches `s_max` first, the median of the `s_max` window is used.
pub fn adaptive_median(img: &Image, s_max: usize) -> Result<Image> {
    if s_max < 3 || s_max.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "adaptive median window must be odd and >= 3, got {s_max}"
        )));
    }
    let (w, h) = (img.width(), img.height());
    let mut out = img.pixels().to_vec();
    let mut buf = Vec::with_capacity(s_max * s_max);
    for row in 0..h {
        for col in 0..w {
            let center = PixelCoord { row, col };
            if !is_impulse(img.get(center)) {
                continue;
            }
            let mut half = 1;
            out[row * w + col] = loop {
                buf.clear();
                buf.extend(WindowBounds::clipped(center, half, w, h).coords().map(|p| img.get(p)));
                let med = lower_median(&mut buf);
                let (zmin, zmax) = (buf[0], buf[buf.len() - 1]);
                if (zmin < med && med < zmax) || 2 * half + 1 >= s_max {
                    break med;
                }
                half += 1;
            };
        }
    }
    Ok(img.with_pixels(out))
}
