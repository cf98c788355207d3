//! Deterministic analytic reference images.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gridops::ImageGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhantomVariant {
    /// Piecewise-ellipse head phantom (Shepp-Logan style intensities) with a
    /// mild smooth gradient inside the skull, so the wavelet representation
    /// carries realistic dense low-frequency content.
    Ellipses,
    /// 4 x 4 grid of constant blocks with linearly increasing intensity.
    Blocks,
}

/// (additive value, semi-axis a, semi-axis b, center x, center y, angle deg)
const ELLIPSES: [(f64, f64, f64, f64, f64, f64); 10] = [
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0),
    (-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0),
    (-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0),
    (0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0),
    (0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0),
    (0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0),
    (0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0),
];

// golden angle, for incommensurate texture orientations
const GOLDEN: f64 = 2.399_963_229_728_653;

/// `pixel` is the sample spacing in [-1, 1] coordinates; ellipse boundaries
/// are softened over about two pixels, as in a band-limited acquisition, so
/// the spectrum decays instead of ringing out to the grid edge.
fn ellipse_value(x: f64, y: f64, pixel: f64) -> f64 {
    let mut v = 0.0;
    for &(value, a, b, x0, y0, deg) in &ELLIPSES {
        let phi = deg.to_radians();
        let (s, c) = phi.sin_cos();
        let dx = x - x0;
        let dy = y - y0;
        let xr = dx * c + dy * s;
        let yr = -dx * s + dy * c;
        let t = 1.0 - (xr / a).powi(2) - (yr / b).powi(2);
        // algebraic-distance gradient near the boundary is ~2/min(a, b)
        let width = 2.0 * pixel * 2.0 / a.min(b);
        v += value * 0.5 * (1.0 + (t / width).tanh());
    }
    let inner = (x / 0.6624).powi(2) + ((y + 0.0184) / 0.8740).powi(2);
    if inner <= 1.0 {
        // smooth bias field, as in shaded MR acquisitions
        v += 0.15 * (1.0 - inner) * (1.5 * x + 2.0 * y).sin().mul_add(0.5, 1.0) * 0.5;
        // anatomical texture: a 1/f-weighted sum of oriented sinusoids, so
        // the image is compressible rather than exactly sparse
        const TEX_FREQS: [f64; 12] = [
            2.0, 3.0, 4.5, 6.8, 10.1, 15.2, 22.8, 34.2, 51.3, 76.9, 120.0, 220.0,
        ];
        let mut tex = 0.0;
        for (k, &freq) in (1..).zip(TEX_FREQS.iter()) {
            let ang = GOLDEN * k as f64;
            let (s, c) = ang.sin_cos();
            let u = c * x + s * y;
            let w = -s * x + c * y;
            tex += ((freq * u + 0.7 * k as f64).sin() + (freq * 0.63 * w + 1.3 * k as f64).cos())
                / freq.powf(0.7);
        }
        v += 0.22 * (1.0 - inner).sqrt() * tex;
        // mid-band structure (vessels / folds): most anatomical energy sits
        // in this annulus of the spectrum
        let mut band = 0.0;
        for k in 1..=10 {
            let ang = GOLDEN * k as f64 * 1.7 + 0.9;
            let (s, c) = ang.sin_cos();
            let f = 12.0 + 6.0 * k as f64;
            band += (f * (c * x + s * y) + 2.1 * k as f64).sin();
        }
        v += 0.08 * (1.0 - inner).sqrt() * band;
    }
    v.clamp(0.0, 1.0)
}

/// splitmix64; drives the deterministic acquisition-noise component.
fn hash_noise(state: u64) -> f64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}

/// Deterministic analytic phantom: same N always yields the same image.
pub fn phantom(side: usize, variant: PhantomVariant) -> Result<ImageGrid> {
    let values = match variant {
        PhantomVariant::Ellipses => Array2::from_shape_fn((side, side), |(r, c)| {
            // pixel centers on [-1, 1]^2, row 0 at y = +1 (image convention)
            let x = (c as f64 + 0.5) / side as f64 * 2.0 - 1.0;
            let y = 1.0 - (r as f64 + 0.5) / side as f64 * 2.0;
            let clean = ellipse_value(x, y, 2.0 / side as f64);
            // broadband acquisition noise: present in any measured image,
            // and deliberately incompressible
            (clean + 0.04 * hash_noise((r * side + c) as u64)).clamp(0.0, 1.0)
        }),
        PhantomVariant::Blocks => Array2::from_shape_fn((side, side), |(r, c)| {
            let br = r * 4 / side;
            let bc = c * 4 / side;
            (br * 4 + bc) as f64 / 15.0
        }),
    };
    ImageGrid::new(values)
}
