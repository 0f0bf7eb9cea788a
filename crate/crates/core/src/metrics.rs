//! MSE, PSNR and SSIM between a reference image and a test image.
//!
//! Both images are quantized to 8 bits before any statistic is computed.

use crate::error::{Error, Result};
use crate::image::{quantize, Image};

const PEAK: f64 = 255.0;
const K1: f64 = 0.01;
const K2: f64 = 0.03;
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SsimMode {
    /// Mean of local SSIM over every valid 11×11 Gaussian window (σ = 1.5).
    #[default]
    Windowed,
    /// One evaluation with whole-image statistics.
    Global,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QualityReport {
    pub mse: f64,
    /// Decibels; `+inf` when `mse == 0`.
    pub psnr: f64,
    pub ssim: f64,
}

impl QualityReport {
    pub fn compute(reference: &Image, test: &Image, mode: SsimMode) -> Result<Self> {
        let mse = mse(reference, test)?;
        Ok(QualityReport {
            mse,
            psnr: psnr_from_mse(mse),
            ssim: ssim(reference, test, mode)?,
        })
    }
}

fn quantized_pair(reference: &Image, test: &Image) -> Result<(Vec<f64>, Vec<f64>)> {
    reference.check_same_dims(test)?;
    let q = |img: &Image| img.pixels().iter().map(|&v| f64::from(quantize(v))).collect();
    Ok((q(reference), q(test)))
}

pub fn mse(reference: &Image, test: &Image) -> Result<f64> {
    let (x, y) = quantized_pair(reference, test)?;
    let sum: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / x.len() as f64)
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (PEAK * PEAK / mse).log10()
    }
}

pub fn psnr(reference: &Image, test: &Image) -> Result<f64> {
    Ok(psnr_from_mse(mse(reference, test)?))
}

pub fn ssim(reference: &Image, test: &Image, mode: SsimMode) -> Result<f64> {
    let (x, y) = quantized_pair(reference, test)?;
    match mode {
        SsimMode::Global => Ok(ssim_global(&x, &y)),
        SsimMode::Windowed => {
            let (width, height) = (reference.width(), reference.height());
            if width < SSIM_WINDOW || height < SSIM_WINDOW {
                return Err(Error::ImageTooSmall {
                    width,
                    height,
                    window: SSIM_WINDOW,
                });
            }
            Ok(ssim_windowed(&x, &y, width, height))
        }
    }
}

fn constants() -> (f64, f64) {
    ((K1 * PEAK).powi(2), (K2 * PEAK).powi(2))
}

#[inline]
fn ssim_formula(mx: f64, my: f64, vx: f64, vy: f64, cxy: f64) -> f64 {
    let (c1, c2) = constants();
    ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
}

fn ssim_global(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
        cxy += (a - mx) * (b - my);
    }
    ssim_formula(mx, my, vx / n, vy / n, cxy / n)
}

fn gaussian_taps() -> [f64; SSIM_WINDOW] {
    let mut taps = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, t) in taps.iter_mut().enumerate() {
        let d = i as f64 - half;
        *t = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Separable "valid" Gaussian filtering of `src` (width × height).
fn filter_valid(src: &[f64], width: usize, height: usize, taps: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = width - SSIM_WINDOW + 1;
    let oh = height - SSIM_WINDOW + 1;
    let mut horizontal = vec![0.0; ow * height];
    for row in 0..height {
        let line = &src[row * width..(row + 1) * width];
        for col in 0..ow {
            horizontal[row * ow + col] = taps.iter().zip(&line[col..col + SSIM_WINDOW]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for row in 0..oh {
        for col in 0..ow {
            out[row * ow + col] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * horizontal[(row + k) * ow + col])
                .sum();
        }
    }
    out
}

fn ssim_windowed(x: &[f64], y: &[f64], width: usize, height: usize) -> f64 {
    let taps = gaussian_taps();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let mu_x = filter_valid(x, width, height, &taps);
    let mu_y = filter_valid(y, width, height, &taps);
    let e_xx = filter_valid(&xx, width, height, &taps);
    let e_yy = filter_valid(&yy, width, height, &taps);
    let e_xy = filter_valid(&xy, width, height, &taps);
    let total: f64 = (0..mu_x.len())
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            ssim_formula(mx, my, e_xx[i] - mx * mx, e_yy[i] - my * my, e_xy[i] - mx * my)
        })
        .sum();
    total / mu_x.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn texture(w: usize, h: usize, seed: u64) -> Image {
        Image::from_fn(w, h, |p| {
            let v = (p.row as u64 * 31 + p.col as u64 * 17 + seed * 101) % 256;
            v as f64
        })
        .unwrap()
    }

    #[test]
    fn mse_cases() {
        let zero = Image::filled(4, 4, 0.0).unwrap();
        let full = Image::filled(4, 4, 255.0).unwrap();
        assert_eq!(mse(&zero, &zero).unwrap(), 0.0);
        assert_eq!(mse(&zero, &full).unwrap(), 65025.0);
        let a = Image::from_u8(2, 2, &[1, 2, 3, 4]).unwrap();
        let b = Image::from_u8(2, 2, &[1, 2, 3, 5]).unwrap();
        assert_eq!(mse(&a, &b).unwrap(), 0.25);
        assert!(matches!(
            mse(&a, &Image::filled(2, 3, 0.0).unwrap()),
            Err(Error::DimensionMismatch(..))
        ));
    }

    #[test]
    fn psnr_cases() {
        let zero = Image::filled(4, 4, 0.0).unwrap();
        let full = Image::filled(4, 4, 255.0).unwrap();
        assert_eq!(psnr(&zero, &zero).unwrap(), f64::INFINITY);
        assert_abs_diff_eq!(psnr(&zero, &full).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(psnr_from_mse(65.025), 30.0, epsilon = 1e-12);
    }

    #[test]
    fn psnr_of_constructed_difference_image() {
        // 254 pixels off by 16 and one off by 1: (254 * 256 + 1) / 1000 = 65.025
        let reference = Image::filled(40, 25, 100.0).unwrap();
        let mut px = vec![100.0; 1000];
        for v in px.iter_mut().take(254) {
            *v = 116.0;
        }
        px[254] = 101.0;
        let test = Image::new(40, 25, px).unwrap();
        assert_abs_diff_eq!(mse(&reference, &test).unwrap(), 65.025, epsilon = 1e-12);
        assert_abs_diff_eq!(psnr(&reference, &test).unwrap(), 30.0, epsilon = 1e-9);
    }

    #[test]
    fn ssim_identity_and_constants() {
        let img = texture(24, 20, 3);
        assert_abs_diff_eq!(ssim(&img, &img, SsimMode::Windowed).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ssim(&img, &img, SsimMode::Global).unwrap(), 1.0, epsilon = 1e-12);

        let zero = Image::filled(16, 16, 0.0).unwrap();
        let full = Image::filled(16, 16, 255.0).unwrap();
        let c1 = 6.5025;
        let expected = c1 / (255.0 * 255.0 + c1);
        let g = ssim(&zero, &full, SsimMode::Global).unwrap();
        assert_abs_diff_eq!(g, expected, epsilon = 1e-15);
        assert!((g - 1e-4).abs() < 1e-6);
    }

    #[test]
    fn windowed_needs_eleven_pixels() {
        let img = Image::filled(10, 30, 5.0).unwrap();
        assert!(matches!(
            ssim(&img, &img, SsimMode::Windowed),
            Err(Error::ImageTooSmall { .. })
        ));
        assert!(ssim(&img, &img, SsimMode::Global).is_ok());
    }

    #[test]
    fn windowed_matches_direct_window_sum() {
        // brute force: explicit 2-D Gaussian weights over each valid window
        let x = texture(14, 13, 1);
        let y = texture(14, 13, 2);
        let taps = gaussian_taps();
        let (c1, c2) = constants();
        let mut acc = 0.0;
        let mut count = 0.0;
        for r in 0..=(13 - 11) {
            for c in 0..=(14 - 11) {
                let (mut mx, mut my) = (0.0, 0.0);
                for i in 0..11 {
                    for j in 0..11 {
                        let w = taps[i] * taps[j];
                        mx += w * x.at(r + i, c + j);
                        my += w * y.at(r + i, c + j);
                    }
                }
                let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
                for i in 0..11 {
                    for j in 0..11 {
                        let w = taps[i] * taps[j];
                        let (a, b) = (x.at(r + i, c + j) - mx, y.at(r + i, c + j) - my);
                        vx += w * a * a;
                        vy += w * b * b;
                        cxy += w * a * b;
                    }
                }
                acc += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
                count += 1.0;
            }
        }
        assert_abs_diff_eq!(ssim(&x, &y, SsimMode::Windowed).unwrap(), acc / count, epsilon = 1e-9);
    }

    proptest! {
        #[test]
        fn ssim_bounded_and_symmetric(a in proptest::collection::vec(0u8..=255, 12 * 12), b in proptest::collection::vec(0u8..=255, 12 * 12)) {
            let x = Image::from_u8(12, 12, &a).unwrap();
            let y = Image::from_u8(12, 12, &b).unwrap();
            for mode in [SsimMode::Windowed, SsimMode::Global] {
                let s = ssim(&x, &y, mode).unwrap();
                prop_assert!((-1.0..=1.0).contains(&s), "{s}");
                prop_assert!((s - ssim(&y, &x, mode).unwrap()).abs() < 1e-12);
            }
            prop_assert_eq!(mse(&x, &y).unwrap(), mse(&y, &x).unwrap());
        }
    }
}
