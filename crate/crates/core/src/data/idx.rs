//! IDX files (the MNIST distribution format): a 4-byte magic number
//! `0x00 0x00 <type> <ndims>`, then `ndims` big-endian u32 dimensions, then
//! the row-major payload. Only unsigned-byte payloads (`type = 0x08`) are
//! supported.

use std::path::Path;

use super::{LabeledDataset, Normalization, RowMerger};
use crate::error::{Error, Result};

const UBYTE: u8 = 0x08;

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: message.into(),
    }
}

fn parse_header(path: &Path, bytes: &[u8]) -> Result<(Vec<usize>, usize)> {
    if bytes.len() < 4 || bytes[0] != 0 || bytes[1] != 0 {
        return Err(parse_err(path, "not an IDX file (bad magic)"));
    }
    if bytes[2] != UBYTE {
        return Err(parse_err(
            path,
            format!("unsupported IDX element type 0x{:02x}", bytes[2]),
        ));
    }
    let ndims = bytes[3] as usize;
    let header_len = 4 + 4 * ndims;
    if bytes.len() < header_len {
        return Err(parse_err(path, "truncated IDX header"));
    }
    let dims: Vec<usize> = (0..ndims)
        .map(|k| {
            let o = 4 + 4 * k;
            u32::from_be_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]]) as usize
        })
        .collect();
    let payload: usize = dims.iter().product();
    if bytes.len() != header_len + payload {
        return Err(parse_err(
            path,
            format!(
                "payload has {} bytes, header promises {payload}",
                bytes.len() - header_len
            ),
        ));
    }
    Ok((dims, header_len))
}

/// Raw image tensor from an IDX file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    /// Bytes per image (product of the trailing dimensions).
    pub features: usize,
    pub pixels: Vec<u8>,
}

pub fn read_idx_images(path: &Path) -> Result<IdxImages> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let (dims, header) = parse_header(path, &bytes)?;
    let (&count, rest) = dims
        .split_first()
        .ok_or_else(|| parse_err(path, "IDX image file without dimensions"))?;
    let features = rest.iter().product::<usize>().max(1);
    Ok(IdxImages {
        count,
        features,
        pixels: bytes[header..].to_vec(),
    })
}

pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let (dims, header) = parse_header(path, &bytes)?;
    if dims.len() != 1 {
        return Err(parse_err(
            path,
            format!("label file has {} dimensions, expected 1", dims.len()),
        ));
    }
    Ok(bytes[header..].to_vec())
}

/// Empirical distribution of an IDX image/label pair.
pub fn load_idx(images: &Path, labels: &Path, normalization: Normalization) -> Result<LabeledDataset> {
    let imgs = read_idx_images(images)?;
    let labs = read_idx_labels(labels)?;
    if labs.len() != imgs.count {
        return Err(Error::InvalidDataset(format!(
            "{} images but {} labels",
            imgs.count,
            labs.len()
        )));
    }
    let mut merger = RowMerger::new();
    for (row, &label) in imgs.pixels.chunks_exact(imgs.features).zip(&labs) {
        merger.push(label as i64, row.iter().map(|&b| b as f64).collect());
    }
    merger.finish(normalization, &format!("idx {}", images.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn idx_bytes(dims: &[u32], payload: &[u8]) -> Vec<u8> {
        let mut v = vec![0, 0, UBYTE, dims.len() as u8];
        for d in dims {
            v.extend_from_slice(&d.to_be_bytes());
        }
        v.extend_from_slice(payload);
        v
    }

    fn tmp(bytes: &[u8]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(bytes).unwrap();
        f
    }

    #[test]
    fn reads_big_endian_dims() {
        let img = tmp(&idx_bytes(&[3, 1, 2], &[0, 255, 10, 20, 0, 255]));
        let lab = tmp(&idx_bytes(&[3], &[4, 1, 4]));
        let d = load_idx(img.path(), lab.path(), Normalization::DivideBy255).unwrap();
        // Rows 0 and 2 are identical with the same label.
        assert_eq!(d.len(), 2);
        assert_eq!(d.dim(), 2);
        assert_eq!(d.point(0), &[0.0, 1.0]);
        assert_eq!(d.class_names(), &["1".to_string(), "4".to_string()]);
        assert!((d.mass(0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_truncated_and_bad_magic() {
        let img = tmp(&idx_bytes(&[3, 1, 2], &[0, 1, 2]));
        assert!(read_idx_images(img.path()).is_err());
        let bad = tmp(&[1, 2, 3, 4]);
        assert!(read_idx_images(bad.path()).is_err());
        let lab = tmp(&idx_bytes(&[2, 1], &[1, 2]));
        assert!(read_idx_labels(lab.path()).is_err());
    }
}
