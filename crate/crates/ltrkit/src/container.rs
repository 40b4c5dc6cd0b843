//! Dense matrix containers: a 4-byte magic, little-endian `u32` rows and
//! cols, then `rows * cols` little-endian `f32` values in row-major order.
//!
//! `FBK1` holds feature matrices, `PST1` posterior grids.

use std::fs;
use std::path::Path;

use ltrkit_core::features::FeatureError;
use ltrkit_core::scoring::ScoringError;
use ltrkit_core::{FeatureMatrix, PosteriorGrid};

pub const FEATURE_MAGIC: [u8; 4] = *b"FBK1";
pub const POSTERIOR_MAGIC: [u8; 4] = *b"PST1";

#[derive(Debug, thiserror::Error)]
pub enum ContainerError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("bad magic {found:?}, expected {expected:?}")]
    BadMagic { expected: String, found: String },
    #[error("expected {expected} bytes, found {found}")]
    Length { expected: usize, found: usize },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Grid(#[from] ScoringError),
}

pub fn encode_matrix(magic: [u8; 4], rows: usize, cols: usize, values: impl Iterator<Item = f32>) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + rows * cols * 4);
    out.extend_from_slice(&magic);
    out.extend_from_slice(&(rows as u32).to_le_bytes());
    out.extend_from_slice(&(cols as u32).to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Returns `(rows, cols, values)`.
pub fn decode_matrix(magic: [u8; 4], bytes: &[u8]) -> Result<(usize, usize, Vec<f32>), ContainerError> {
    if bytes.len() < 12 {
        return Err(ContainerError::Length {
            expected: 12,
            found: bytes.len(),
        });
    }
    if bytes[..4] != magic {
        return Err(ContainerError::BadMagic {
            expected: String::from_utf8_lossy(&magic).into_owned(),
            found: String::from_utf8_lossy(&bytes[..4]).into_owned(),
        });
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected = 12 + rows * cols * 4;
    if bytes.len() != expected {
        return Err(ContainerError::Length {
            expected,
            found: bytes.len(),
        });
    }
    let values = bytes[12..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((rows, cols, values))
}

fn read(path: &Path) -> Result<Vec<u8>, ContainerError> {
    fs::read(path).map_err(|source| ContainerError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, bytes: Vec<u8>) -> Result<(), ContainerError> {
    fs::write(path, bytes).map_err(|source| ContainerError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn encode_features(m: &FeatureMatrix) -> Vec<u8> {
    encode_matrix(
        FEATURE_MAGIC,
        m.frames(),
        m.dims(),
        m.values().iter().map(|&v| v as f32),
    )
}

pub fn decode_features(bytes: &[u8]) -> Result<FeatureMatrix, ContainerError> {
    let (rows, cols, values) = decode_matrix(FEATURE_MAGIC, bytes)?;
    Ok(FeatureMatrix::new(
        values.into_iter().map(f64::from).collect(),
        rows,
        cols,
    )?)
}

pub fn write_features(path: impl AsRef<Path>, m: &FeatureMatrix) -> Result<(), ContainerError> {
    write(path.as_ref(), encode_features(m))
}

pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureMatrix, ContainerError> {
    decode_features(&read(path.as_ref())?)
}

pub fn encode_grid(g: &PosteriorGrid) -> Vec<u8> {
    encode_matrix(
        POSTERIOR_MAGIC,
        g.frames(),
        g.classes(),
        g.values().iter().map(|&v| v as f32),
    )
}

/// Decodes a grid, rejecting rows that do not sum to one within 1e-6.
pub fn decode_grid(bytes: &[u8]) -> Result<PosteriorGrid, ContainerError> {
    let (rows, cols, values) = decode_matrix(POSTERIOR_MAGIC, bytes)?;
    Ok(PosteriorGrid::new(
        values.into_iter().map(f64::from).collect(),
        rows,
        cols,
    )?)
}

pub fn write_grid(path: impl AsRef<Path>, g: &PosteriorGrid) -> Result<(), ContainerError> {
    write(path.as_ref(), encode_grid(g))
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<PosteriorGrid, ContainerError> {
    decode_grid(&read(path.as_ref())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_layout() {
        let m = FeatureMatrix::new(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 2, 3).unwrap();
        let bytes = encode_features(&m);
        assert_eq!(&bytes[..4], b"FBK1");
        assert_eq!(&bytes[4..12], &[2, 0, 0, 0, 3, 0, 0, 0]);
        assert_eq!(&bytes[12..16], &1.0f32.to_le_bytes());
        assert_eq!(&bytes[32..36], &6.0f32.to_le_bytes());
        assert_eq!(decode_features(&bytes).unwrap(), m);
    }

    #[test]
    fn grid_rows_are_validated() {
        let bad = encode_matrix(POSTERIOR_MAGIC, 1, 2, [0.5f32, 0.6].into_iter());
        assert!(matches!(decode_grid(&bad), Err(ContainerError::Grid(_))));
        let good = encode_matrix(POSTERIOR_MAGIC, 1, 2, [0.25f32, 0.75].into_iter());
        assert_eq!(decode_grid(&good).unwrap().prob(0, 1), 0.75);
    }

    #[test]
    fn rejects_wrong_magic_and_length() {
        let m = FeatureMatrix::new(vec![0.0; 4], 2, 2).unwrap();
        let bytes = encode_features(&m);
        assert!(matches!(decode_grid(&bytes), Err(ContainerError::BadMagic { .. })));
        assert!(matches!(
            decode_features(&bytes[..bytes.len() - 1]),
            Err(ContainerError::Length { .. })
        ));
        assert!(matches!(decode_features(b"FBK"), Err(ContainerError::Length { .. })));
    }
}
