//! Small-grid cross-checks of every operator against an explicitly
//! assembled measurement matrix. The Fourier step of the matrix route uses a
//! naive O(n^2) centered DFT written here from the definition, so agreement
//! is evidence of correctness, not of shared code.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use csmri::density::{infnorm_map, k_of_density, optimal_density};
use csmri::gridops::{
    a0_adjoint, a0_apply, dwt2, idwt2, ImageGrid, KSpaceGrid, MeasurementOperator, WaveletCoeffs,
};
use csmri::wavelet::WaveletSpec;

/// Centered unitary 2D DFT straight from the definition: frequency (kr, kc)
/// is measured relative to the grid center, with a 1/N factor per direction.
fn naive_centered_dft(image: &Array2<f64>) -> Array2<Complex64> {
    let n = image.dim().0;
    let half = n as isize / 2;
    Array2::from_shape_fn((n, n), |(kr, kc)| {
        let fr = kr as isize - half;
        let fc = kc as isize - half;
        let mut acc = Complex64::default();
        for r in 0..n {
            for c in 0..n {
                let phase = -2.0 * std::f64::consts::PI
                    * ((fr * r as isize + fc * c as isize) as f64)
                    / n as f64;
                acc += image[(r, c)] * Complex64::new(phase.cos(), phase.sin());
            }
        }
        acc / n as f64
    })
}

/// Full n x n measurement matrix: column j is the naive DFT of the j-th
/// synthesized atom.
fn assemble_matrix(spec: &WaveletSpec, side: usize) -> Array2<Complex64> {
    let n = side * side;
    let mut matrix = Array2::default((n, n));
    for j in 0..n {
        let mut coeffs = WaveletCoeffs::zeros(side, *spec).unwrap();
        coeffs.values_mut()[(j / side, j % side)] = 1.0;
        let atom = idwt2(&coeffs).unwrap();
        let column = naive_centered_dft(atom.values());
        for (i, v) in column.iter().enumerate() {
            matrix[(i, j)] = *v;
        }
    }
    matrix
}

fn random_coeffs(spec: &WaveletSpec, side: usize, seed: u64) -> WaveletCoeffs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    WaveletCoeffs::new(
        Array2::from_shape_fn((side, side), |_| rng.gen::<f64>() * 2.0 - 1.0),
        *spec,
    )
    .unwrap()
}

fn flat(coeffs: &WaveletCoeffs) -> Array1<Complex64> {
    Array1::from_iter(coeffs.values().iter().map(|&v| Complex64::new(v, 0.0)))
}

fn specs_under_test(side: usize) -> Vec<WaveletSpec> {
    let levels = if side >= 16 { 2 } else { 1 };
    vec![
        WaveletSpec::symmlet(10, levels).unwrap(),
        WaveletSpec::shannon(levels),
    ]
}

#[test]
fn matrix_is_unitary() {
    for side in [8usize, 16] {
        for spec in specs_under_test(side) {
            let a = assemble_matrix(&spec, side);
            let n = side * side;
            for i in 0..n {
                for j in 0..n {
                    let gram: Complex64 =
                        (0..n).map(|k| a[(k, i)].conj() * a[(k, j)]).sum();
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (gram - expected).norm() < 1e-10,
                        "{spec:?} side {side} gram ({i},{j}) = {gram}"
                    );
                }
            }
        }
    }
}

#[test]
fn forward_operator_matches_matrix() {
    let side = 16;
    for spec in specs_under_test(side) {
        let a = assemble_matrix(&spec, side);
        for seed in 0..3 {
            let x = random_coeffs(&spec, side, seed);
            let fast = a0_apply(&x).unwrap();
            let slow = a.dot(&flat(&x));
            for (i, expected) in slow.iter().enumerate() {
                let got = fast.at_index(i);
                assert!((got - expected).norm() < 1e-10, "{spec:?} row {i}");
            }
        }
    }
}

#[test]
fn adjoint_operator_matches_matrix() {
    let side = 16;
    for spec in specs_under_test(side) {
        let a = assemble_matrix(&spec, side);
        let n = side * side;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        // adjoint of a real random image's spectrum (keeps the result real)
        let img = ImageGrid::new(Array2::from_shape_fn((side, side), |_| rng.gen::<f64>()))
            .unwrap();
        let y = naive_centered_dft(img.values());
        let kspace = KSpaceGrid::new(y.clone()).unwrap();
        let (fast, imag) = a0_adjoint(&kspace, &spec).unwrap();
        assert!(imag < 1e-10);
        let y_flat = Array1::from_iter(y.iter().cloned());
        for j in 0..n {
            let slow: Complex64 = (0..n).map(|i| a[(i, j)].conj() * y_flat[i]).sum();
            assert!(slow.im.abs() < 1e-10);
            let got = fast.values()[(j / side, j % side)];
            assert!((got - slow.re).abs() < 1e-10, "{spec:?} entry {j}");
        }
    }
}

#[test]
fn masked_operator_matches_matrix_rows() {
    let side = 16;
    let n = side * side;
    for spec in specs_under_test(side) {
        let a = assemble_matrix(&spec, side);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut indices: Vec<usize> = (0..n).collect();
        indices.shuffle(&mut rng);
        indices.truncate(40);
        let op = MeasurementOperator::new(indices.clone(), spec, side).unwrap();
        let x = random_coeffs(&spec, side, 7);
        let fast = op.apply(&x).unwrap();
        let x_flat = flat(&x);
        for (pos, &i) in indices.iter().enumerate() {
            let slow: Complex64 = (0..n).map(|j| a[(i, j)] * x_flat[j]).sum();
            assert!((fast[pos] - slow).norm() < 1e-10, "{spec:?} row {i}");
        }
    }
}

#[test]
fn row_infinity_norms_match_matrix() {
    let side = 16;
    for spec in specs_under_test(side) {
        let a = assemble_matrix(&spec, side);
        let n = side * side;
        let map = infnorm_map(&spec, side).unwrap();
        for i in 0..n {
            let slow = (0..n).map(|j| a[(i, j)].norm()).fold(0.0f64, f64::max);
            let got = map.values()[(i / side, i % side)];
            assert!((got - slow).abs() < 1e-10, "{spec:?} row {i}: {got} vs {slow}");
        }
    }
}

#[test]
fn normalizer_and_k_match_matrix() {
    let side = 16;
    for spec in specs_under_test(side) {
        let a = assemble_matrix(&spec, side);
        let n = side * side;
        let slow_l: f64 = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| a[(i, j)].norm())
                    .fold(0.0f64, f64::max)
                    .powi(2)
            })
            .sum();
        let map = infnorm_map(&spec, side).unwrap();
        let pi = optimal_density(&map);
        let l = pi.normalizer().unwrap();
        assert!((l - slow_l).abs() < 1e-9, "{spec:?}: {l} vs {slow_l}");
        let k = k_of_density(&map, &pi).unwrap();
        assert!((k * k - slow_l).abs() < 1e-9, "{spec:?}: K^2 {}", k * k);
    }
}

#[test]
fn round_trip_through_image_domain_matches_matrix_inverse() {
    // A0 unitary: A0* A0 = I, so adjoint(apply(x)) must return x; checked
    // against the matrix route on the same data.
    let side = 16;
    for spec in specs_under_test(side) {
        let x = random_coeffs(&spec, side, 31);
        let y = a0_apply(&x).unwrap();
        let (back, imag) = a0_adjoint(&y, &spec).unwrap();
        assert!(imag < 1e-10);
        for (a, b) in x.values().iter().zip(back.values().iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        // and the image-domain composition agrees
        let img = idwt2(&x).unwrap();
        let again = dwt2(&img, &spec).unwrap();
        for (a, b) in x.values().iter().zip(again.values().iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
