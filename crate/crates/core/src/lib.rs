//! Restoration of grayscale images corrupted by salt-and-pepper impulse noise.
//!
//! Noisy pixels (intensity 0 or 255) are re-estimated from the clean pixels of
//! the smallest odd window around them that contains any, using inverse-quadric
//! radial basis function interpolation of `exp(-intensity / 255)`. An optional second
//! pass smooths the estimates with distance weights and replaces window outliers
//! by the window median.
//!
//! ```
//! use rbf_restore::{detect, inject, restore, Image, NoiseParams, RestorationConfig};
//!
//! let clean = Image::from_fn(32, 32, |p| (40 + 3 * p.row + 2 * p.col) as f64).unwrap();
//! let noisy = inject(&clean, &NoiseParams::symmetric(50.0, 7).unwrap()).unwrap();
//! let restored = restore(&noisy, &RestorationConfig::default()).unwrap();
//! assert!(detect(&restored).count() < detect(&noisy).count());
//! ```

pub mod baselines;
mod error;
pub mod harness;
pub mod image;
pub mod linalg;
pub mod metrics;
pub mod noise;
pub mod pgm;
pub mod rbf;
pub mod restore;

pub use crate::baselines::{adaptive_median, median3x3};
pub use crate::error::{Error, PgmError, Result};
pub use crate::harness::{run_benchmark, BenchReport, BenchRow, BenchmarkSpec, Method};
pub use crate::image::{Image, PixelCoord};
pub use crate::metrics::{mse, psnr, ssim, QualityReport, SsimMode};
pub use crate::noise::{detect, inject, NoiseMask, NoiseParams};
pub use crate::pgm::{read_pgm, read_pgm_file, write_pgm, write_pgm_file};
pub use crate::rbf::{
    assemble_matrix, estimate_intensity, estimate_intensity_with_unit, inverse_quadric, shape_parameter,
    solve_coefficients, InterpolationSystem, KernelParams, NORMALIZED_UNIT, RAW_UNIT,
};
pub use crate::restore::{
    find_window, interpolate_noisy_pixels, replace_outliers, restore, smooth_noisy_pixels, EpsilonWindow,
    RestorationConfig, WindowBounds, WindowRecord,
};
