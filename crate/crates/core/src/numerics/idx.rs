//! Reader for the IDX format used by the MNIST family of datasets.
//!
//! Layout: two zero bytes, a type code (0x08 = unsigned byte), the number of
//! dimensions, then one big-endian `u32` per dimension followed by the raw
//! payload.

use std::path::Path;

use super::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxArray {
    pub dims: Vec<usize>,
    pub data: Vec<u8>,
}

pub fn parse_idx(bytes: &[u8]) -> Result<IdxArray> {
    if bytes.len() < 4 || bytes[0] != 0 || bytes[1] != 0 {
        return Err(Error::Idx("bad magic".into()));
    }
    if bytes[2] != 0x08 {
        return Err(Error::Idx(format!("unsupported element type 0x{:02x}", bytes[2])));
    }
    let ndim = bytes[3] as usize;
    let header = 4 + 4 * ndim;
    if bytes.len() < header {
        return Err(Error::Idx("truncated header".into()));
    }
    let dims: Vec<usize> = bytes[4..header]
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]]) as usize)
        .collect();
    let expected: usize = dims.iter().product();
    let data = &bytes[header..];
    if data.len() != expected {
        return Err(Error::Idx(format!(
            "payload has {} bytes, dimensions require {expected}",
            data.len()
        )));
    }
    Ok(IdxArray {
        dims,
        data: data.to_vec(),
    })
}

pub fn read_idx(path: &Path) -> Result<IdxArray> {
    parse_idx(&std::fs::read(path)?)
}

/// Pair an image file with a label file; pixels are scaled to `[0, 1]`.
pub fn load_idx_dataset(images: &Path, labels: &Path, classes: usize) -> Result<Dataset> {
    let imgs = read_idx(images)?;
    let labs = read_idx(labels)?;
    idx_to_dataset(&imgs, &labs, classes)
}

pub fn idx_to_dataset(imgs: &IdxArray, labs: &IdxArray, classes: usize) -> Result<Dataset> {
    if imgs.dims.is_empty() || labs.dims.len() != 1 || imgs.dims[0] != labs.dims[0] {
        return Err(Error::Idx("image and label counts differ".into()));
    }
    let n = imgs.dims[0];
    let dim = imgs.dims[1..].iter().product::<usize>().max(1);
    let features = imgs.data.iter().map(|&b| b as f64 / 255.0).collect();
    let labels = labs.data.iter().map(|&b| b as usize).collect();
    debug_assert_eq!(n * dim, imgs.data.len());
    Dataset::new(features, dim, labels, classes)
}
