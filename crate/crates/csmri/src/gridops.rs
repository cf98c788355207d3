//! Fixed-convention grids and the matrix-free unitary operators between the
//! wavelet (representation) and k-space (acquisition) domains.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{CsError, Result};
use crate::fourier;
use crate::wavelet::{self, WaveletSpec};

/// Real N x N spatial image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    side: usize,
    values: Array2<f64>,
}

impl ImageGrid {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let side = values.nrows();
        wavelet::check_side(side)?;
        if values.ncols() != side {
            return Err(CsError::SideMismatch(side, values.ncols()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CsError::NonFinite("image values"));
        }
        Ok(ImageGrid { side, values })
    }

    pub fn zeros(side: usize) -> Result<Self> {
        wavelet::check_side(side)?;
        Ok(ImageGrid {
            side,
            values: Array2::zeros((side, side)),
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Complex N x N Fourier samples on the centered frequency grid: entry
/// (r, c) holds frequency (ky, kx) = (r - N/2, c - N/2).
#[derive(Debug, Clone, PartialEq)]
pub struct KSpaceGrid {
    side: usize,
    values: Array2<Complex64>,
}

impl KSpaceGrid {
    pub fn new(values: Array2<Complex64>) -> Result<Self> {
        let side = values.nrows();
        wavelet::check_side(side)?;
        if values.ncols() != side {
            return Err(CsError::SideMismatch(side, values.ncols()));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(CsError::NonFinite("k-space values"));
        }
        Ok(KSpaceGrid { side, values })
    }

    pub fn zeros(side: usize) -> Result<Self> {
        wavelet::check_side(side)?;
        Ok(KSpaceGrid {
            side,
            values: Array2::default((side, side)),
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Entry at a linear frequency index (row-major over the centered grid).
    pub fn at_index(&self, index: usize) -> Complex64 {
        let (r, c) = split_index(self.side, index);
        self.values[(r, c)]
    }
}

/// Real N x N orthogonal wavelet coefficients in the standard pyramidal
/// layout, tied to the spec that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoeffs {
    side: usize,
    values: Array2<f64>,
    spec: WaveletSpec,
}

impl WaveletCoeffs {
    pub fn new(values: Array2<f64>, spec: WaveletSpec) -> Result<Self> {
        let side = values.nrows();
        spec.validate_for(side)?;
        if values.ncols() != side {
            return Err(CsError::SideMismatch(side, values.ncols()));
        }
        Ok(WaveletCoeffs { side, values, spec })
    }

    pub fn zeros(side: usize, spec: WaveletSpec) -> Result<Self> {
        spec.validate_for(side)?;
        Ok(WaveletCoeffs {
            side,
            values: Array2::zeros((side, side)),
            spec,
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn spec(&self) -> &WaveletSpec {
        &self.spec
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Linear index over the centered frequency grid, row-major.
pub fn linear_index(side: usize, row: usize, col: usize) -> usize {
    row * side + col
}

pub fn split_index(side: usize, index: usize) -> (usize, usize) {
    (index / side, index % side)
}

/// Forward orthogonal wavelet transform of an image.
pub fn dwt2(image: &ImageGrid, spec: &WaveletSpec) -> Result<WaveletCoeffs> {
    spec.validate_for(image.side)?;
    let mut values = image.values.clone();
    wavelet::dwt2_raw(&mut values, spec)?;
    WaveletCoeffs::new(values, *spec)
}

/// Inverse (synthesis) wavelet transform.
pub fn idwt2(coeffs: &WaveletCoeffs) -> Result<ImageGrid> {
    let mut values = coeffs.values.clone();
    wavelet::idwt2_raw(&mut values, &coeffs.spec)?;
    ImageGrid::new(values)
}

/// Unitary centered 2D FFT of a real image.
pub fn fft2_unitary(image: &ImageGrid) -> KSpaceGrid {
    let values = fourier::fft2_unitary(&fourier::to_complex(&image.values));
    KSpaceGrid {
        side: image.side,
        values,
    }
}

/// A0 = F* Psi: synthesize the image from wavelet coefficients, then take
/// its unitary Fourier transform.
pub fn a0_apply(coeffs: &WaveletCoeffs) -> Result<KSpaceGrid> {
    Ok(fft2_unitary(&idwt2(coeffs)?))
}

/// Adjoint of [`a0_apply`] restricted to real images: inverse FFT, drop the
/// imaginary part (its l2 norm is returned as a diagnostic), then analyze.
pub fn a0_adjoint(kspace: &KSpaceGrid, spec: &WaveletSpec) -> Result<(WaveletCoeffs, f64)> {
    spec.validate_for(kspace.side)?;
    let spatial = fourier::ifft2_unitary(&kspace.values);
    let (mut real, imag_norm) = fourier::real_part_with_residual(&spatial);
    wavelet::dwt2_raw(&mut real, spec)?;
    Ok((WaveletCoeffs::new(real, *spec)?, imag_norm))
}

/// A0 over complex coefficient grids (no real-part projection). The solver
/// iterates in C^n so that AA* = I holds exactly on duplicate-free masks.
pub fn a0_apply_complex(coeffs: &Array2<Complex64>, spec: &WaveletSpec) -> Result<Array2<Complex64>> {
    let mut spatial = coeffs.clone();
    wavelet::idwt2_raw(&mut spatial, spec)?;
    Ok(fourier::fft2_unitary(&spatial))
}

/// Exact adjoint (= inverse) of [`a0_apply_complex`].
pub fn a0_adjoint_complex(kspace: &Array2<Complex64>, spec: &WaveletSpec) -> Result<Array2<Complex64>> {
    let mut coeffs = fourier::ifft2_unitary(kspace);
    wavelet::dwt2_raw(&mut coeffs, spec)?;
    Ok(coeffs)
}

/// Row subset of A0: gathers k-space entries at a fixed list of frequency
/// indices (in order, duplicates allowed).
#[derive(Debug, Clone)]
pub struct MeasurementOperator {
    indices: Vec<usize>,
    spec: WaveletSpec,
    side: usize,
    has_duplicates: bool,
}

impl MeasurementOperator {
    pub fn new(indices: Vec<usize>, spec: WaveletSpec, side: usize) -> Result<Self> {
        spec.validate_for(side)?;
        if indices.is_empty() {
            return Err(CsError::EmptyMask);
        }
        let n = side * side;
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(CsError::IndexOutOfRange { index: bad, side });
        }
        let mut seen = vec![false; n];
        let mut has_duplicates = false;
        for &i in &indices {
            if seen[i] {
                has_duplicates = true;
                break;
            }
            seen[i] = true;
        }
        Ok(MeasurementOperator {
            indices,
            spec,
            side,
            has_duplicates,
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn spec(&self) -> &WaveletSpec {
        &self.spec
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn has_duplicates(&self) -> bool {
        self.has_duplicates
    }

    /// A x: transform and gather at the mask indices, in mask order.
    pub fn apply(&self, coeffs: &WaveletCoeffs) -> Result<Vec<Complex64>> {
        if coeffs.side != self.side {
            return Err(CsError::SideMismatch(coeffs.side, self.side));
        }
        let kspace = a0_apply(coeffs)?;
        Ok(self.gather(&kspace))
    }

    /// Gather entries of an existing k-space grid at the mask indices.
    pub fn gather(&self, kspace: &KSpaceGrid) -> Vec<Complex64> {
        self.indices.iter().map(|&i| kspace.at_index(i)).collect()
    }

    /// A* y: scatter measurements back onto the frequency grid (summing
    /// duplicates) and apply the adjoint transform.
    pub fn adjoint(&self, measurements: &[Complex64]) -> Result<WaveletCoeffs> {
        if measurements.len() != self.indices.len() {
            return Err(CsError::MeasurementLength {
                got: measurements.len(),
                expected: self.indices.len(),
            });
        }
        let mut kspace = KSpaceGrid::zeros(self.side)?;
        for (&i, &v) in self.indices.iter().zip(measurements) {
            let (r, c) = split_index(self.side, i);
            kspace.values[(r, c)] += v;
        }
        let (coeffs, _) = a0_adjoint(&kspace, &self.spec)?;
        Ok(coeffs)
    }

    /// A over a complex coefficient grid.
    pub fn apply_complex(&self, coeffs: &Array2<Complex64>) -> Result<Vec<Complex64>> {
        if coeffs.nrows() != self.side {
            return Err(CsError::SideMismatch(coeffs.nrows(), self.side));
        }
        let kspace = a0_apply_complex(coeffs, &self.spec)?;
        Ok(self
            .indices
            .iter()
            .map(|&i| {
                let (r, c) = split_index(self.side, i);
                kspace[(r, c)]
            })
            .collect())
    }

    /// Exact complex adjoint A*: scatter (summing duplicates) then invert.
    pub fn adjoint_complex(&self, measurements: &[Complex64]) -> Result<Array2<Complex64>> {
        if measurements.len() != self.indices.len() {
            return Err(CsError::MeasurementLength {
                got: measurements.len(),
                expected: self.indices.len(),
            });
        }
        let mut kspace: Array2<Complex64> = Array2::default((self.side, self.side));
        for (&i, &v) in self.indices.iter().zip(measurements) {
            let (r, c) = split_index(self.side, i);
            kspace[(r, c)] += v;
        }
        a0_adjoint_complex(&kspace, &self.spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::WaveletSpec;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn spec() -> WaveletSpec {
        WaveletSpec::symmlet(10, 3).unwrap()
    }

    fn random_coeffs(side: usize, seed: u64) -> WaveletCoeffs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = Array2::from_shape_fn((side, side), |_| rng.gen::<f64>() - 0.5);
        WaveletCoeffs::new(values, spec()).unwrap()
    }

    #[test]
    fn a0_is_isometric() {
        for seed in 0..20 {
            let x = random_coeffs(32, seed);
            let y = a0_apply(&x).unwrap();
            assert!((y.norm() - x.norm()).abs() < 1e-10 * x.norm());
        }
    }

    #[test]
    fn a0_adjoint_inverts_apply() {
        let x = random_coeffs(32, 4);
        let y = a0_apply(&x).unwrap();
        let (back, imag) = a0_adjoint(&y, &spec()).unwrap();
        assert!(imag < 1e-9);
        let max_diff = x
            .values()
            .iter()
            .zip(back.values().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(max_diff < 1e-10);
    }

    #[test]
    fn adjoint_inner_product_identity() {
        let side = 32;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let x = random_coeffs(side, rng.gen());
            let n = side * side;
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            idx.truncate(200);
            let op = MeasurementOperator::new(idx, spec(), side).unwrap();
            let u: Vec<Complex64> = (0..op.len())
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let ax = op.apply(&x).unwrap();
            let lhs: Complex64 = ax.iter().zip(&u).map(|(a, b)| a * b.conj()).sum();
            let au = op.adjoint(&u).unwrap();
            let rhs: f64 = x
                .values()
                .iter()
                .zip(au.values().iter())
                .map(|(a, b)| a * b)
                .sum();
            // x is real, so <x, A*u> keeps only the real part of A*u.
            assert!((lhs.re - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn full_mask_equals_a0() {
        let side = 16;
        let spec = WaveletSpec::symmlet(10, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = WaveletCoeffs::new(
            Array2::from_shape_fn((side, side), |_| rng.gen::<f64>() - 0.5),
            spec,
        )
        .unwrap();
        let op = MeasurementOperator::new((0..side * side).collect(), spec, side).unwrap();
        let y = op.apply(&x).unwrap();
        let full = a0_apply(&x).unwrap();
        for (i, &v) in y.iter().enumerate() {
            assert!((v - full.at_index(i)).norm() < 1e-12);
        }
    }

    #[test]
    fn single_index_mask() {
        let side = 16;
        let spec = WaveletSpec::symmlet(10, 2).unwrap();
        let x = {
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            WaveletCoeffs::new(
                Array2::from_shape_fn((side, side), |_| rng.gen::<f64>() - 0.5),
                spec,
            )
            .unwrap()
        };
        let op = MeasurementOperator::new(vec![37], spec, side).unwrap();
        let y = op.apply(&x).unwrap();
        assert_eq!(y.len(), 1);
        assert!((y[0] - a0_apply(&x).unwrap().at_index(37)).norm() < 1e-12);
    }

    #[test]
    fn row_orthonormality_on_distinct_masks() {
        let side = 16;
        let spec = WaveletSpec::symmlet(10, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let n = side * side;
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        idx.truncate(60);
        let op = MeasurementOperator::new(idx, spec, side).unwrap();
        let u: Vec<Complex64> = (0..op.len())
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let back = op.apply_complex(&op.adjoint_complex(&u).unwrap()).unwrap();
        for (a, b) in back.iter().zip(&u) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn out_of_range_index_rejected() {
        let spec = WaveletSpec::symmlet(10, 2).unwrap();
        assert!(matches!(
            MeasurementOperator::new(vec![16 * 16], spec, 16),
            Err(CsError::IndexOutOfRange { .. })
        ));
    }
}
