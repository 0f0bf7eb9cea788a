//! Deterministic inputs shared by the benchmarks.

use rbf_restore::{inject, Image, NoiseParams};

/// Smooth-plus-texture test pattern with no 0/255 pixels.
pub fn test_pattern(width: usize, height: usize) -> Image {
    Image::from_fn(width, height, |p| {
        let (r, c) = (p.row as f64, p.col as f64);
        let v = 128.0 + 50.0 * (r / 11.0).sin() + 40.0 * (c / 7.0).cos() + 20.0 * ((r + c) / 3.0).sin();
        v.clamp(1.0, 254.0)
    })
    .expect("valid dimensions")
    .quantized()
}

/// `test_pattern` corrupted at `density_pct` with seed 0.
pub fn noisy_pattern(width: usize, height: usize, density_pct: f64) -> Image {
    let params = NoiseParams::symmetric(density_pct, 0).expect("valid density");
    inject(&test_pattern(width, height), &params).expect("valid image")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_is_clean() {
        let img = test_pattern(64, 48);
        assert_eq!(rbf_restore::detect(&img).count(), 0);
        assert!(rbf_restore::detect(&noisy_pattern(64, 48, 50.0)).count() > 0);
    }
}
