//! Single-window fixtures checked against values computed outside this crate
//! (40-digit mpmath and numpy), plus a dense LU cross-check of the solver.

use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbf_restore::restore::{find_window, replace_outliers, smooth_noisy_pixels, EpsilonWindow};
use rbf_restore::{
    assemble_matrix, detect, estimate_intensity, estimate_intensity_with_unit, inverse_quadric, shape_parameter,
    solve_coefficients, Image, InterpolationSystem, KernelParams, NoiseMask, PixelCoord, RestorationConfig,
    NORMALIZED_UNIT, RAW_UNIT,
};

fn pc(row: usize, col: usize) -> PixelCoord {
    PixelCoord::new(row, col)
}

#[test]
fn kernel_fixture() {
    let k = inverse_quadric(2f64.sqrt(), KernelParams::new(0.8).unwrap());
    assert_abs_diff_eq!(k, 0.438_596_491_228_070_15, epsilon = 1e-12);
    assert_abs_diff_eq!(
        shape_parameter(8, 3).epsilon(),
        0.754_247_233_265_650_8,
        epsilon = 1e-12
    );
    assert_abs_diff_eq!(shape_parameter(9, 9).epsilon(), 0.8 / 3.0, epsilon = 1e-15);
}

#[test]
fn one_center_estimate() {
    let est = estimate_intensity(pc(1, 1), &[pc(1, 2)], &[100.0], shape_parameter(1, 3)).unwrap();
    assert_abs_diff_eq!(est, 100.068_696_531_286_23, epsilon = 1e-4);
}

#[test]
fn two_center_coefficients() {
    let params = KernelParams::new(1.0).unwrap();
    let mut sys = InterpolationSystem::new(vec![pc(0, 0), pc(0, 1)], vec![100.0, 100.0], params).unwrap();
    let c = sys.solve().unwrap().to_vec();
    let expected = 2.480_050_650_680_557_3e-44;
    for ci in c {
        assert!((ci - expected).abs() <= 1e-4 * expected, "{ci:e}");
    }
    assert!(sys.residual().unwrap() <= 1e-10 * (-100f64).exp());
}

#[test]
fn three_collinear_matrix() {
    let q = assemble_matrix(&[pc(0, 0), pc(0, 1), pc(0, 2)], KernelParams::new(1.0).unwrap()).unwrap();
    assert_abs_diff_eq!(q[(0, 2)], 0.2, epsilon = 1e-15);
    assert_abs_diff_eq!(q[(0, 1)], 0.5, epsilon = 1e-15);
    assert!(q.is_symmetric());
}

#[test]
fn smoothing_fixture() {
    // center 10, all eight neighbours 20; center noisy, ring clean
    let mut px = vec![20.0; 9];
    px[4] = 10.0;
    let img = Image::new(3, 3, px).unwrap();
    let mask = NoiseMask::new(3, 3, (0..9).map(|i| i == 4).collect()).unwrap();
    let records = vec![find_window(&mask, pc(1, 1), None).unwrap()];
    let out = smooth_noisy_pixels(&img, &mask, &records, &RestorationConfig::default());
    assert_abs_diff_eq!(out.at(1, 1), 17.096_386_638_138_773, epsilon = 1e-4);
}

#[test]
fn outlier_fixture() {
    let mut px = vec![100.0; 9];
    px[4] = 200.0;
    let img = Image::new(3, 3, px).unwrap();
    let mask = NoiseMask::new(3, 3, (0..9).map(|i| i == 4).collect()).unwrap();
    let records = vec![find_window(&mask, pc(1, 1), None).unwrap()];
    let out = replace_outliers(&img, &mask, &records, &RestorationConfig::default());
    assert_eq!(out.at(1, 1), 100.0);
}

/// `v - unit·ln(qᵀ Q⁻¹ 1)` with `Q⁻¹` from nalgebra's LU.
fn constant_value_oracle(target: PixelCoord, centers: &[PixelCoord], v: f64, eps: f64, unit: f64) -> f64 {
    let n = centers.len();
    let k = |a: PixelCoord, b: PixelCoord| {
        let r = a.distance(b);
        1.0 / (1.0 + (eps * r).powi(2))
    };
    let q = DMatrix::from_fn(n, n, |i, j| k(centers[i], centers[j]));
    let rhs = DVector::from_element(n, 1.0);
    let weights = q.lu().solve(&rhs).unwrap();
    let s: f64 = centers.iter().zip(weights.iter()).map(|(&c, w)| w * k(target, c)).sum();
    (v - unit * s.ln()).clamp(0.0, 255.0)
}

#[test]
fn constant_values_match_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.random_range(1..=8);
        let mut centers = Vec::new();
        while centers.len() < n {
            let c = pc(rng.random_range(0..5), rng.random_range(0..5));
            if c != pc(2, 2) && !centers.contains(&c) {
                centers.push(c);
            }
        }
        let v = rng.random_range(1.0..254.0);
        let eps = shape_parameter(n, 5).epsilon();
        for unit in [RAW_UNIT, NORMALIZED_UNIT] {
            let got =
                estimate_intensity_with_unit(pc(2, 2), &centers, &vec![v; n], shape_parameter(n, 5), unit).unwrap();
            let want = constant_value_oracle(pc(2, 2), &centers, v, eps, unit);
            assert_abs_diff_eq!(got, want, epsilon = 1e-6 * unit.max(1.0));
        }
    }
}

/// Solves with our Cholesky path and checks the fit against nalgebra's LU.
/// Returns `false` when our solve reports failure, which is only allowed for
/// numerically singular systems.
fn check_against_lu(centers: Vec<PixelCoord>, values: Vec<f64>, params: KernelParams, unit: f64) -> bool {
    let sys = InterpolationSystem::with_unit(centers, values, params, unit).unwrap();
    let n = sys.len();
    let q = DMatrix::from_fn(n, n, |i, j| sys.matrix()[(i, j)]);
    let y = DVector::from_column_slice(sys.transformed_values());
    let y_max = y.amax();
    match solve_coefficients(&sys) {
        Ok(c) => {
            let c = DVector::from_column_slice(&c);
            assert!((&q * &c - &y).amax() <= 1e-10 * y_max);
            let reference = q.clone().lu().solve(&y).unwrap();
            let cond = {
                let sv = q.singular_values();
                sv.max() / sv.min()
            };
            // forward agreement, scaled by conditioning
            let scale = reference.amax().max(y_max);
            assert!((c - reference).amax() <= 1e-12 * cond * scale);
            true
        }
        Err(_) => {
            let sv = q.singular_values();
            let cond = sv.max() / sv.min();
            assert!(cond > 1e8, "solve failed with condition number {cond:e}");
            false
        }
    }
}

fn random_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.0..=255.0)).collect()
}

#[test]
fn side_length_systems_match_dense_lu() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let side = 2 * rng.random_range(1..=3) + 1;
        let cells: Vec<_> = (0..side * side).map(|i| pc(i / side, i % side)).collect();
        let centers: Vec<_> = cells.into_iter().filter(|_| rng.random_bool(0.5)).collect();
        if centers.is_empty() {
            continue;
        }
        let values = random_values(&mut rng, centers.len());
        let params = shape_parameter(centers.len(), side);
        for unit in [RAW_UNIT, NORMALIZED_UNIT] {
            assert!(check_against_lu(centers.clone(), values.clone(), params, unit));
        }
    }
}

#[test]
fn pipeline_reachable_systems_match_dense_lu() {
    // a window of half-width h is only chosen when the smaller one was empty,
    // so its centers all lie on the outer ring
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..300 {
        let h = rng.random_range(1..=2);
        let side = 2 * h + 1;
        let ring: Vec<_> = (0..side * side)
            .map(|i| pc(i / side, i % side))
            .filter(|p| p.row.abs_diff(h).max(p.col.abs_diff(h)) == h)
            .collect();
        let centers: Vec<_> = ring.into_iter().filter(|_| rng.random_bool(0.7)).collect();
        if centers.is_empty() {
            continue;
        }
        let values = random_values(&mut rng, centers.len());
        let params = rbf_restore::rbf::shape_parameter_with(0.8, centers.len(), (side * side) as f64);
        assert!(check_against_lu(centers, values, params, NORMALIZED_UNIT));
    }
}

#[test]
fn config_default_uses_normalized_area_reading() {
    let cfg = RestorationConfig::default();
    assert_eq!(cfg.epsilon_window, EpsilonWindow::PixelCount);
    assert_eq!(cfg.intensity_unit, NORMALIZED_UNIT);
    let img = Image::filled(3, 3, 50.0).unwrap();
    assert_eq!(detect(&img).count(), 0);
}
