//! Unitary centered 2D Fourier transforms.
//!
//! Convention: the k-space entry at (row r, col c) holds frequency
//! (ky, kx) = (r - N/2, c - N/2), so DC sits at (N/2, N/2) zero-based.
//! Both directions carry a 1/N scale, making the 2D transform unitary.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_all_rows(values: &mut Array2<Complex64>, inverse: bool) {
    let side = values.nrows();
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(side)
        } else {
            p.plan_fft_forward(side)
        }
    });
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    for mut row in values.rows_mut() {
        let slice = row.as_slice_mut().expect("row-major layout");
        fft.process_with_scratch(slice, &mut scratch);
    }
}

fn transpose_in_place(values: &mut Array2<Complex64>) {
    let side = values.nrows();
    for r in 0..side {
        for c in (r + 1)..side {
            let tmp = values[(r, c)];
            values[(r, c)] = values[(c, r)];
            values[(c, r)] = tmp;
        }
    }
}

/// Swap quadrants so that DC moves between index 0 and index N/2.
/// For even N this shift is its own inverse.
fn fftshift(values: &mut Array2<Complex64>) {
    let side = values.nrows();
    let half = side / 2;
    for r in 0..half {
        for c in 0..side {
            let r2 = r + half;
            let c2 = (c + half) % side;
            let tmp = values[(r, c)];
            values[(r, c)] = values[(r2, c2)];
            values[(r2, c2)] = tmp;
        }
    }
}

/// Unitary forward 2D FFT, output centered.
pub fn fft2_unitary(values: &Array2<Complex64>) -> Array2<Complex64> {
    let side = values.nrows();
    let mut out = values.clone();
    fft_all_rows(&mut out, false);
    transpose_in_place(&mut out);
    fft_all_rows(&mut out, false);
    transpose_in_place(&mut out);
    let scale = 1.0 / side as f64;
    out.mapv_inplace(|v| v * scale);
    fftshift(&mut out);
    out
}

/// Unitary inverse 2D FFT of a centered k-space grid (adjoint of
/// [`fft2_unitary`]).
pub fn ifft2_unitary(values: &Array2<Complex64>) -> Array2<Complex64> {
    let side = values.nrows();
    let mut out = values.clone();
    fftshift(&mut out);
    fft_all_rows(&mut out, true);
    transpose_in_place(&mut out);
    fft_all_rows(&mut out, true);
    transpose_in_place(&mut out);
    let scale = 1.0 / side as f64;
    out.mapv_inplace(|v| v * scale);
    out
}

pub fn to_complex(values: &Array2<f64>) -> Array2<Complex64> {
    values.mapv(|v| Complex64::new(v, 0.0))
}

/// Real part plus the l2 norm of the discarded imaginary part.
pub fn real_part_with_residual(values: &Array2<Complex64>) -> (Array2<f64>, f64) {
    let real = values.mapv(|v| v.re);
    let imag_norm = values.iter().map(|v| v.im * v.im).sum::<f64>().sqrt();
    (real, imag_norm)
}
