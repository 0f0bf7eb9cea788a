//! The three-stage restoration pipeline.
//!
//! 1. Every pixel at 0 or 255 is treated as noisy. For each one the smallest
//!    odd window (3×3, 5×5, …, clipped at the borders) holding at least one
//!    clean pixel is recorded.
//! 2. The noisy pixel is estimated by RBF interpolation over the clean pixels
//!    of its window. Only pixels that were clean in the input are used as
//!    centers; estimates never feed other estimates.
//! 3. Optionally, each estimate is replaced by an `exp(-α r)` weighted mean of
//!    its window, and estimates lying outside `μ ± kσ` of the window are
//!    replaced by the window median when that median is itself inside the band.
//!
//! Every stage reads one complete buffer and writes a fresh one, so the result
//! does not depend on scan order or on the number of worker threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{Image, PixelCoord};
use crate::noise::{detect, NoiseMask};
use crate::rbf::{shape_parameter_with, InterpolationSystem, DEFAULT_EPSILON_COEFFICIENT, NORMALIZED_UNIT};

/// What `w` means in the shape-parameter heuristic `ε = c·√n / w`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EpsilonWindow {
    /// Side length of the nominal window (3 for 3×3).
    SideLength,
    /// Pixel count of the nominal window (9 for 3×3).
    #[default]
    PixelCount,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RestorationConfig {
    /// Distance decay of the smoothing weights.
    pub alpha: f64,
    pub epsilon_coefficient: f64,
    /// Outlier band half-width in standard deviations.
    pub outlier_sigma: f64,
    /// `false` stops after interpolation (the "without smoothing" variant).
    pub smoothing_enabled: bool,
    /// Largest window half-width searched; `None` searches up to the whole image.
    pub max_half_width: Option<usize>,
    pub epsilon_window: EpsilonWindow,
    /// Intensity unit of the exponential transform `Y = exp(-y / unit)`.
    pub intensity_unit: f64,
}

impl Default for RestorationConfig {
    fn default() -> Self {
        RestorationConfig {
            alpha: 1.0,
            epsilon_coefficient: DEFAULT_EPSILON_COEFFICIENT,
            outlier_sigma: 2.0,
            smoothing_enabled: true,
            max_half_width: None,
            epsilon_window: EpsilonWindow::PixelCount,
            intensity_unit: NORMALIZED_UNIT,
        }
    }
}

impl RestorationConfig {
    pub fn without_smoothing() -> Self {
        RestorationConfig {
            smoothing_enabled: false,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("alpha", self.alpha)?;
        positive("epsilon coefficient", self.epsilon_coefficient)?;
        positive("outlier sigma", self.outlier_sigma)?;
        positive("intensity unit", self.intensity_unit)?;
        if self.max_half_width == Some(0) {
            return Err(Error::InvalidParameter("max half-width must be at least 1".into()));
        }
        Ok(())
    }
}

/// Inclusive rectangle `[row0, row1] × [col0, col1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowBounds {
    pub row0: usize,
    pub row1: usize,
    pub col0: usize,
    pub col1: usize,
}

impl WindowBounds {
    /// Square of half-width `half_width` around `center`, clipped to the image.
    pub fn clipped(center: PixelCoord, half_width: usize, width: usize, height: usize) -> Self {
        WindowBounds {
            row0: center.row.saturating_sub(half_width),
            row1: (center.row + half_width).min(height - 1),
            col0: center.col.saturating_sub(half_width),
            col1: (center.col + half_width).min(width - 1),
        }
    }

    pub fn contains(&self, p: PixelCoord) -> bool {
        (self.row0..=self.row1).contains(&p.row) && (self.col0..=self.col1).contains(&p.col)
    }

    pub fn area(&self) -> usize {
        (self.row1 - self.row0 + 1) * (self.col1 - self.col0 + 1)
    }

    pub fn coords(&self) -> impl Iterator<Item = PixelCoord> {
        let (col0, col1) = (self.col0, self.col1);
        (self.row0..=self.row1).flat_map(move |row| (col0..=col1).map(move |col| PixelCoord { row, col }))
    }
}

/// Window chosen for one noisy pixel during interpolation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowRecord {
    pub center: PixelCoord,
    pub half_width: usize,
    pub bounds: WindowBounds,
}

impl WindowRecord {
    /// Nominal (unclipped) side length.
    pub fn side(&self) -> usize {
        2 * self.half_width + 1
    }
}

/// Summed-area table of clean pixels for O(1) window counts.
struct CleanCounts {
    stride: usize,
    width: usize,
    height: usize,
    table: Vec<u32>,
}

impl CleanCounts {
    fn new(mask: &NoiseMask) -> Self {
        let (width, height) = (mask.width(), mask.height());
        let stride = width + 1;
        let mut table = vec![0u32; stride * (height + 1)];
        for row in 0..height {
            let mut run = 0u32;
            for col in 0..width {
                run += u32::from(!mask.flags()[row * width + col]);
                table[(row + 1) * stride + col + 1] = table[row * stride + col + 1] + run;
            }
        }
        CleanCounts {
            stride,
            width,
            height,
            table,
        }
    }

    fn count(&self, b: &WindowBounds) -> u32 {
        let s = self.stride;
        let (r0, r1, c0, c1) = (b.row0, b.row1 + 1, b.col0, b.col1 + 1);
        self.table[r1 * s + c1] + self.table[r0 * s + c0] - self.table[r0 * s + c1] - self.table[r1 * s + c0]
    }

    fn find(&self, center: PixelCoord, max_half_width: Option<usize>) -> Result<WindowRecord> {
        let reach = self.width.max(self.height);
        let limit = max_half_width.map_or(reach, |m| m.min(reach));
        for half_width in 1..=limit {
            let bounds = WindowBounds::clipped(center, half_width, self.width, self.height);
            if self.count(&bounds) > 0 {
                return Ok(WindowRecord {
                    center,
                    half_width,
                    bounds,
                });
            }
        }
        Err(Error::Unrestorable {
            row: center.row,
            col: center.col,
        })
    }
}

/// Smallest odd window around `center` containing at least one clean pixel.
pub fn find_window(mask: &NoiseMask, center: PixelCoord, max_half_width: Option<usize>) -> Result<WindowRecord> {
    CleanCounts::new(mask).find(center, max_half_width)
}

fn check_mask(img: &Image, mask: &NoiseMask) -> Result<()> {
    if mask.matches(img) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(
            img.width(),
            img.height(),
            mask.width(),
            mask.height(),
        ))
    }
}

fn estimate_in_window(img: &Image, mask: &NoiseMask, record: &WindowRecord, cfg: &RestorationConfig) -> f64 {
    let (centers, values): (Vec<PixelCoord>, Vec<f64>) = record
        .bounds
        .coords()
        .filter(|&p| !mask.is_noisy(p))
        .map(|p| (p, img.get(p)))
        .unzip();
    let n = centers.len();
    let side = record.side() as f64;
    let w = match cfg.epsilon_window {
        EpsilonWindow::SideLength => side,
        EpsilonWindow::PixelCount => side * side,
    };
    let params = shape_parameter_with(cfg.epsilon_coefficient, n, w);
    let estimate =
        InterpolationSystem::with_unit(centers, values.clone(), params, cfg.intensity_unit).and_then(|mut system| {
            system.solve()?;
            Ok(system.estimate(record.center).expect("solved"))
        });
    match estimate {
        Ok(v) => v,
        Err(err) => {
            let mean = values.iter().sum::<f64>() / n as f64;
            log::warn!(
                "RBF fit failed at ({}, {}) with {n} centers: {err}; using window mean {mean:.3}",
                record.center.row,
                record.center.col
            );
            mean
        }
    }
}

/// Estimates every masked pixel from the clean pixels of its adaptive window.
///
/// Returns the interpolated image and one record per masked pixel, in
/// row-major order.
pub fn interpolate_noisy_pixels(
    img: &Image,
    mask: &NoiseMask,
    cfg: &RestorationConfig,
) -> Result<(Image, Vec<WindowRecord>)> {
    check_mask(img, mask)?;
    cfg.validate()?;
    let noisy: Vec<PixelCoord> = mask.noisy_coords().collect();
    if noisy.is_empty() {
        return Ok((img.clone(), Vec::new()));
    }
    let counts = CleanCounts::new(mask);
    let records = noisy
        .par_iter()
        .map(|&p| counts.find(p, cfg.max_half_width))
        .collect::<Result<Vec<_>>>()?;
    let estimates: Vec<f64> = records
        .par_iter()
        .map(|record| estimate_in_window(img, mask, record, cfg))
        .collect();

    let mut out = img.pixels().to_vec();
    for (record, v) in records.iter().zip(estimates) {
        out[img.index(record.center)] = v;
    }
    Ok((img.with_pixels(out), records))
}

fn apply_per_record<F>(img: &Image, mask: &NoiseMask, records: &[WindowRecord], f: F) -> Image
where
    F: Fn(&WindowRecord) -> f64 + Sync,
{
    debug_assert!(records.iter().all(|r| mask.is_noisy(r.center)));
    let updates: Vec<f64> = records.par_iter().map(&f).collect();
    let mut out = img.pixels().to_vec();
    for (record, v) in records.iter().zip(updates) {
        out[img.index(record.center)] = v;
    }
    img.with_pixels(out)
}

/// Replaces each recorded pixel by the `exp(-α r)` weighted mean of its window,
/// the pixel itself included with weight 1.
pub fn smooth_noisy_pixels(img: &Image, mask: &NoiseMask, records: &[WindowRecord], cfg: &RestorationConfig) -> Image {
    let alpha = cfg.alpha;
    apply_per_record(img, mask, records, |record| {
        let (mut num, mut den) = (0.0, 0.0);
        for p in record.bounds.coords() {
            let weight = (-alpha * record.center.distance(p)).exp();
            num += weight * img.get(p);
            den += weight;
        }
        num / den
    })
}

/// Replaces recorded pixels lying strictly outside `μ ± kσ` of their window by
/// the window median, unless the median is itself outside the band.
///
/// `σ` is the population standard deviation. For even pixel counts (clipped
/// windows) the lower of the two middle values is the median.
pub fn replace_outliers(img: &Image, mask: &NoiseMask, records: &[WindowRecord], cfg: &RestorationConfig) -> Image {
    let k = cfg.outlier_sigma;
    apply_per_record(img, mask, records, |record| {
        let value = img.get(record.center);
        let mut window: Vec<f64> = record.bounds.coords().map(|p| img.get(p)).collect();
        let n = window.len() as f64;
        let mean = window.iter().sum::<f64>() / n;
        let var = window.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let (lo, hi) = (mean - k * var.sqrt(), mean + k * var.sqrt());
        if value > hi || value < lo {
            window.sort_by(f64::total_cmp);
            let median = window[(window.len() - 1) / 2];
            if (lo..=hi).contains(&median) {
                return median;
            }
        }
        value
    })
}

/// Full restoration; the result is quantized to 8 bits.
pub fn restore(img: &Image, cfg: &RestorationConfig) -> Result<Image> {
    cfg.validate()?;
    let mask = detect(img);
    let (interpolated, records) = interpolate_noisy_pixels(img, &mask, cfg)?;
    let out = if cfg.smoothing_enabled {
        let smoothed = smooth_noisy_pixels(&interpolated, &mask, &records, cfg);
        replace_outliers(&smoothed, &mask, &records, cfg)
    } else {
        interpolated
    };
    Ok(out.quantized())
}
