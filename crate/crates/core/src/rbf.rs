//! Inverse-quadric RBF interpolation of a single window.
//!
//! Clean pixel intensities `y` are mapped to `exp(-y / s)` before fitting, the
//! interpolant `F(x) = Σ c_j K(|x - x_j|)` is evaluated at the noisy pixel and
//! the estimate is recovered as `-s · ln F(x)`. The intensity unit `s` is 1 for
//! raw 8-bit intensities and 255 for intensities normalized to `[0, 1]`. With
//! `s = 1` the fitted values span `[e^-255, 1]`, which double precision still
//! represents without underflow.

use crate::error::{Error, Result};
use crate::image::{PixelCoord, MAX_INTENSITY};
use crate::linalg::{Cholesky, Matrix};

/// Relative bound on `‖Q·C − Y‖∞` accepted after a solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Diagonal shifts tried, in order, when the plain factorization fails.
pub const RIDGE_LADDER: [f64; 3] = [1e-12, 1e-9, 1e-6];

pub const DEFAULT_EPSILON_COEFFICIENT: f64 = 0.8;

/// Raw 8-bit intensities: `Y = exp(-y)`.
pub const RAW_UNIT: f64 = 1.0;
/// Intensities normalized to `[0, 1]`: `Y = exp(-y / 255)`.
pub const NORMALIZED_UNIT: f64 = MAX_INTENSITY;

/// Smallest value `F(x)` may take before the logarithm, `exp(-255 / unit)`.
fn min_transformed(unit: f64) -> f64 {
    (-MAX_INTENSITY / unit).exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelParams {
    epsilon: f64,
}

impl KernelParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "shape parameter must be positive and finite, got {epsilon}"
            )));
        }
        Ok(KernelParams { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// `1 / (1 + (ε r)²)`.
#[inline]
pub fn inverse_quadric(r: f64, params: KernelParams) -> f64 {
    let er = params.epsilon * r;
    1.0 / (1.0 + er * er)
}

/// Shape parameter `0.8·√n / w` for `n` centers in a window of side `w`.
pub fn shape_parameter(n: usize, w: usize) -> KernelParams {
    shape_parameter_with(DEFAULT_EPSILON_COEFFICIENT, n, w as f64)
}

pub fn shape_parameter_with(coefficient: f64, n: usize, w: f64) -> KernelParams {
    debug_assert!(n >= 1 && w > 0.0);
    KernelParams {
        epsilon: coefficient * (n as f64).sqrt() / w,
    }
}

/// Pairwise kernel matrix over `centers`. Centers must be distinct.
pub fn assemble_matrix(centers: &[PixelCoord], params: KernelParams) -> Result<Matrix> {
    let n = centers.len();
    let mut q = Matrix::zeros(n);
    for i in 0..n {
        q[(i, i)] = 1.0;
        for j in 0..i {
            let r = centers[i].distance(centers[j]);
            if r == 0.0 {
                return Err(Error::DuplicateCenter {
                    row: centers[i].row,
                    col: centers[i].col,
                });
            }
            let k = inverse_quadric(r, params);
            q[(i, j)] = k;
            q[(j, i)] = k;
        }
    }
    Ok(q)
}

/// Clean-pixel centers of one window together with the fitted system.
#[derive(Clone, Debug)]
pub struct InterpolationSystem {
    centers: Vec<PixelCoord>,
    values: Vec<f64>,
    params: KernelParams,
    unit: f64,
    matrix: Matrix,
    transformed: Vec<f64>,
    coefficients: Option<Vec<f64>>,
}

impl InterpolationSystem {
    /// System over raw intensities (`Y = exp(-y)`).
    pub fn new(centers: Vec<PixelCoord>, values: Vec<f64>, params: KernelParams) -> Result<Self> {
        InterpolationSystem::with_unit(centers, values, params, RAW_UNIT)
    }

    /// System with intensities measured in `unit` (`Y = exp(-y / unit)`).
    pub fn with_unit(centers: Vec<PixelCoord>, values: Vec<f64>, params: KernelParams, unit: f64) -> Result<Self> {
        if !(unit > 0.0 && unit.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "intensity unit must be positive, got {unit}"
            )));
        }
        if centers.is_empty() {
            return Err(Error::EmptySystem);
        }
        if centers.len() != values.len() {
            return Err(Error::PixelCount {
                expected: centers.len(),
                found: values.len(),
            });
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=MAX_INTENSITY).contains(*v))
        {
            return Err(Error::IntensityOutOfRange { index, value });
        }
        let matrix = assemble_matrix(&centers, params)?;
        let transformed = values.iter().map(|&y| (-y / unit).exp()).collect();
        Ok(InterpolationSystem {
            centers,
            values,
            params,
            unit,
            matrix,
            transformed,
            coefficients: None,
        })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[PixelCoord] {
        &self.centers
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn params(&self) -> KernelParams {
        self.params
    }

    pub fn unit(&self) -> f64 {
        self.unit
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// `exp(-y / unit)` for every center value.
    pub fn transformed_values(&self) -> &[f64] {
        &self.transformed
    }

    pub fn coefficients(&self) -> Option<&[f64]> {
        self.coefficients.as_deref()
    }

    /// Solves for the coefficients and caches them.
    pub fn solve(&mut self) -> Result<&[f64]> {
        if self.coefficients.is_none() {
            self.coefficients = Some(solve_coefficients(self)?);
        }
        Ok(self.coefficients.as_deref().unwrap())
    }

    /// `‖Q·C − Y‖∞` for the cached coefficients.
    pub fn residual(&self) -> Option<f64> {
        self.coefficients
            .as_ref()
            .map(|c| self.matrix.residual_inf(c, &self.transformed))
    }

    /// Raw interpolant `F(x)` in the transformed domain. Requires [`solve`](Self::solve).
    pub fn evaluate(&self, target: PixelCoord) -> Option<f64> {
        let coefficients = self.coefficients.as_ref()?;
        Some(
            self.centers
                .iter()
                .zip(coefficients)
                .map(|(&x, c)| c * inverse_quadric(target.distance(x), self.params))
                .sum(),
        )
    }

    /// Intensity estimate `-unit · ln F(x)`, with `F` clamped so the result
    /// stays in `[0, 255]`.
    ///
    /// At a center the interpolation condition `F(x_j) = Y_j` holds by
    /// construction and `y_j` is returned directly. Evaluating the sum there
    /// would lose the value whenever `Y_j` is far below the largest transformed
    /// value, because rounding in the solve is relative to that.
    pub fn estimate(&self, target: PixelCoord) -> Option<f64> {
        if let Some(j) = self.centers.iter().position(|&c| c == target) {
            return Some(self.values[j]);
        }
        let f = self.evaluate(target)?;
        Some(intensity_from_transformed(f, self.unit))
    }
}

/// Inverse of the exponential transform, clamped so the result lies in `[0, 255]`.
pub fn intensity_from_transformed(f: f64, unit: f64) -> f64 {
    let floor = min_transformed(unit);
    let f = if f.is_nan() { floor } else { f.clamp(floor, 1.0) };
    (-unit * f.ln()).clamp(0.0, MAX_INTENSITY)
}

/// Solves `Q·C = Y` by Cholesky factorization.
///
/// If the factorization fails or the residual bound is missed, the solve is
/// retried on `Q + λI` for each λ in [`RIDGE_LADDER`]; the residual is then
/// measured against the shifted system.
pub fn solve_coefficients(system: &InterpolationSystem) -> Result<Vec<f64>> {
    let rhs = &system.transformed;
    let scale = rhs.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    let tolerance = RESIDUAL_TOLERANCE * scale;

    for ridge in std::iter::once(0.0).chain(RIDGE_LADDER) {
        let mut q = system.matrix.clone();
        if ridge > 0.0 {
            q.add_ridge(ridge);
        }
        let Ok(chol) = Cholesky::factor(&q) else {
            continue;
        };
        let mut c = chol.solve(rhs);
        // one step of iterative refinement
        let r: Vec<f64> = q.mul_vec(&c).iter().zip(rhs).map(|(qc, y)| y - qc).collect();
        let d = chol.solve(&r);
        for (ci, di) in c.iter_mut().zip(&d) {
            *ci += di;
        }
        let residual = q.residual_inf(&c, rhs);
        if residual <= tolerance && c.iter().all(|v| v.is_finite()) {
            if ridge > 0.0 {
                log::debug!("window system of {} centers solved with ridge {ridge:e}", system.len());
            }
            return Ok(c);
        }
    }
    Err(Error::SolveFailed)
}

/// Fits the window system over raw intensities and returns the estimate at `target`.
pub fn estimate_intensity(
    target: PixelCoord,
    centers: &[PixelCoord],
    values: &[f64],
    params: KernelParams,
) -> Result<f64> {
    estimate_intensity_with_unit(target, centers, values, params, RAW_UNIT)
}

pub fn estimate_intensity_with_unit(
    target: PixelCoord,
    centers: &[PixelCoord],
    values: &[f64],
    params: KernelParams,
    unit: f64,
) -> Result<f64> {
    let mut system = InterpolationSystem::with_unit(centers.to_vec(), values.to_vec(), params, unit)?;
    system.solve()?;
    Ok(system.estimate(target).expect("solved above"))
}
