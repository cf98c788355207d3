//! On-disk formats: CSA1 arrays, CSM1 masks (with a JSON sidecar), and
//! binary PGM images.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{CsError, Result};
use crate::gridops::{self, ImageGrid};
use crate::masks::{SamplingMask, SchemeDescriptor};

const ARRAY_MAGIC: &[u8; 4] = b"CSA1";
const MASK_MAGIC: &[u8; 4] = b"CSM1";

fn format_err(msg: impl Into<String>) -> CsError {
    CsError::Format(msg.into())
}

fn read_exact_at<'a>(buf: &'a [u8], offset: usize, len: usize) -> Result<&'a [u8]> {
    buf.get(offset..offset + len)
        .ok_or_else(|| format_err("unexpected end of file"))
}

fn read_u32(buf: &[u8], offset: usize) -> Result<u32> {
    let bytes = read_exact_at(buf, offset, 4)?;
    Ok(u32::from_le_bytes(bytes.try_into().unwrap()))
}

// ---------------------------------------------------------------------------
// CSA1 arrays

/// Little-endian binary array container. Layout: magic `CSA1`, dtype byte
/// (0 = f64 real, 1 = f64 complex interleaved re/im), u32 rows, u32 cols,
/// then the row-major payload.
pub fn save_array_real(path: &Path, values: &Array2<f64>) -> Result<()> {
    let (rows, cols) = values.dim();
    let mut file = fs::File::create(path)?;
    file.write_all(ARRAY_MAGIC)?;
    file.write_all(&[0u8])?;
    file.write_all(&(rows as u32).to_le_bytes())?;
    file.write_all(&(cols as u32).to_le_bytes())?;
    let mut payload = Vec::with_capacity(rows * cols * 8);
    for &v in values.iter() {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    file.write_all(&payload)?;
    Ok(())
}

pub fn save_array_complex(path: &Path, values: &Array2<Complex64>) -> Result<()> {
    let (rows, cols) = values.dim();
    let mut file = fs::File::create(path)?;
    file.write_all(ARRAY_MAGIC)?;
    file.write_all(&[1u8])?;
    file.write_all(&(rows as u32).to_le_bytes())?;
    file.write_all(&(cols as u32).to_le_bytes())?;
    let mut payload = Vec::with_capacity(rows * cols * 16);
    for v in values.iter() {
        payload.extend_from_slice(&v.re.to_le_bytes());
        payload.extend_from_slice(&v.im.to_le_bytes());
    }
    file.write_all(&payload)?;
    Ok(())
}

fn load_array_header(buf: &[u8]) -> Result<(u8, usize, usize)> {
    if read_exact_at(buf, 0, 4)? != ARRAY_MAGIC {
        return Err(format_err("bad array magic, expected CSA1"));
    }
    let dtype = read_exact_at(buf, 4, 1)?[0];
    let rows = read_u32(buf, 5)? as usize;
    let cols = read_u32(buf, 9)? as usize;
    Ok((dtype, rows, cols))
}

pub fn load_array_real(path: &Path) -> Result<Array2<f64>> {
    let buf = fs::read(path)?;
    let (dtype, rows, cols) = load_array_header(&buf)?;
    if dtype != 0 {
        return Err(format_err(format!("expected real dtype 0, found {dtype}")));
    }
    let payload = read_exact_at(&buf, 13, rows * cols * 8)?;
    let data: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Array2::from_shape_vec((rows, cols), data).map_err(|e| format_err(e.to_string()))
}

pub fn load_array_complex(path: &Path) -> Result<Array2<Complex64>> {
    let buf = fs::read(path)?;
    let (dtype, rows, cols) = load_array_header(&buf)?;
    if dtype != 1 {
        return Err(format_err(format!("expected complex dtype 1, found {dtype}")));
    }
    let payload = read_exact_at(&buf, 13, rows * cols * 16)?;
    let data: Vec<Complex64> = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Array2::from_shape_vec((rows, cols), data).map_err(|e| format_err(e.to_string()))
}

// ---------------------------------------------------------------------------
// CSM1 masks

/// Human-readable companion to a binary mask file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaskSidecar {
    pub scheme: SchemeDescriptor,
    pub seed: u64,
    pub budget_fraction: f64,
    pub distinct: usize,
    pub draws_total: usize,
    pub omega_size: usize,
}

/// Binary mask: magic `CSM1`, u32 grid side, u32 index count, then the
/// sorted distinct u32 linear indices. A JSON sidecar at `<path>.json`
/// records how the mask was generated.
pub fn save_mask(path: &Path, mask: &SamplingMask) -> Result<()> {
    let mut indices: Vec<u32> = mask.indices().iter().map(|&i| i as u32).collect();
    indices.sort_unstable();
    let mut file = fs::File::create(path)?;
    file.write_all(MASK_MAGIC)?;
    file.write_all(&(mask.side() as u32).to_le_bytes())?;
    file.write_all(&(indices.len() as u32).to_le_bytes())?;
    let mut payload = Vec::with_capacity(indices.len() * 4);
    for i in &indices {
        payload.extend_from_slice(&i.to_le_bytes());
    }
    file.write_all(&payload)?;

    let sidecar = MaskSidecar {
        scheme: mask.scheme().clone(),
        seed: mask.seed(),
        budget_fraction: mask.budget_fraction(),
        distinct: mask.distinct_count(),
        draws_total: mask.draws_total(),
        omega_size: mask.omega_prefix(),
    };
    let mut json_path = path.as_os_str().to_owned();
    json_path.push(".json");
    let json = serde_json::to_string_pretty(&sidecar)?;
    fs::write(json_path, json + "\n")?;
    Ok(())
}

/// Loads the binary part only; returns (side, sorted indices).
pub fn load_mask(path: &Path) -> Result<(usize, Vec<usize>)> {
    let buf = fs::read(path)?;
    if read_exact_at(&buf, 0, 4)? != MASK_MAGIC {
        return Err(format_err("bad mask magic, expected CSM1"));
    }
    let side = read_u32(&buf, 4)? as usize;
    let count = read_u32(&buf, 8)? as usize;
    let payload = read_exact_at(&buf, 12, count * 4)?;
    let mut indices = Vec::with_capacity(count);
    let mut prev: Option<usize> = None;
    for chunk in payload.chunks_exact(4) {
        let idx = u32::from_le_bytes(chunk.try_into().unwrap()) as usize;
        if idx >= side * side {
            return Err(CsError::IndexOutOfRange { index: idx, side });
        }
        if let Some(p) = prev {
            if idx <= p {
                return Err(format_err("mask indices must be strictly increasing"));
            }
        }
        prev = Some(idx);
        indices.push(idx);
    }
    Ok((side, indices))
}

// ---------------------------------------------------------------------------
// PGM images

/// Binary (P5) PGM. `depth` is 8 or 16 bits; values are scaled from [0, 1]
/// to the full range, 16-bit samples big-endian per the format.
pub fn save_pgm(path: &Path, image: &ImageGrid, depth: u8) -> Result<()> {
    let maxval: u32 = match depth {
        8 => 255,
        16 => 65535,
        other => return Err(CsError::BadBitDepth(other)),
    };
    let side = image.side();
    let mut out = Vec::new();
    write!(out, "P5\n{side} {side}\n{maxval}\n")?;
    for &v in image.values().iter() {
        let q = (v.clamp(0.0, 1.0) * maxval as f64).round() as u32;
        if depth == 8 {
            out.push(q as u8);
        } else {
            out.extend_from_slice(&(q as u16).to_be_bytes());
        }
    }
    fs::write(path, out)?;
    Ok(())
}

fn pgm_tokens(buf: &[u8]) -> Result<(usize, usize, u32, usize)> {
    // header is whitespace-separated ASCII: magic, width, height, maxval,
    // then exactly one whitespace byte before the raster
    let mut pos = 0;
    let mut fields = Vec::new();
    while fields.len() < 4 {
        while pos < buf.len() && buf[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < buf.len() && buf[pos] == b'#' {
            while pos < buf.len() && buf[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < buf.len() && !buf[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(format_err("truncated pgm header"));
        }
        fields.push(
            std::str::from_utf8(&buf[start..pos]).map_err(|_| format_err("non-ascii pgm header"))?,
        );
    }
    if fields[0] != "P5" {
        return Err(format_err("only binary P5 pgm is supported"));
    }
    let width: usize = fields[1].parse().map_err(|_| format_err("bad pgm width"))?;
    let height: usize = fields[2].parse().map_err(|_| format_err("bad pgm height"))?;
    let maxval: u32 = fields[3].parse().map_err(|_| format_err("bad pgm maxval"))?;
    if maxval == 0 || maxval > 65535 {
        return Err(format_err("pgm maxval out of range"));
    }
    pos += 1; // the single whitespace after maxval
    Ok((width, height, maxval, pos))
}

/// Loads a P5 PGM and scales samples to [0, 1].
pub fn load_pgm(path: &Path) -> Result<ImageGrid> {
    let buf = fs::read(path)?;
    let (width, height, maxval, offset) = pgm_tokens(&buf)?;
    if width != height {
        return Err(format_err(format!("pgm must be square, got {width}x{height}")));
    }
    let scale = 1.0 / maxval as f64;
    let values = if maxval < 256 {
        let raster = read_exact_at(&buf, offset, width * height)?;
        Array2::from_shape_vec(
            (height, width),
            raster.iter().map(|&b| b as f64 * scale).collect(),
        )
        .map_err(|e| format_err(e.to_string()))?
    } else {
        let raster = read_exact_at(&buf, offset, width * height * 2)?;
        Array2::from_shape_vec(
            (height, width),
            raster
                .chunks_exact(2)
                .map(|c| u16::from_be_bytes(c.try_into().unwrap()) as f64 * scale)
                .collect(),
        )
        .map_err(|e| format_err(e.to_string()))?
    };
    ImageGrid::new(values)
}

/// White-on-black visualization of the sampled k-space locations.
pub fn mask_to_image(side: usize, indices: &[usize]) -> Result<ImageGrid> {
    let mut values = Array2::zeros((side, side));
    for &idx in indices {
        if idx >= side * side {
            return Err(CsError::IndexOutOfRange { index: idx, side });
        }
        let (r, c) = gridops::split_index(side, idx);
        values[(r, c)] = 1.0;
    }
    ImageGrid::new(values)
}

/// Loads a reference image from either format, dispatching on the magic.
pub fn load_image(path: &Path) -> Result<ImageGrid> {
    let mut magic = [0u8; 4];
    {
        let mut file = fs::File::open(path)?;
        file.read_exact(&mut magic)
            .map_err(|_| format_err("file too short"))?;
    }
    if &magic == ARRAY_MAGIC {
        ImageGrid::new(load_array_real(path)?)
    } else if magic.starts_with(b"P5") {
        load_pgm(path)
    } else {
        Err(format_err("unrecognized image format (expected CSA1 or P5)"))
    }
}
