//! Octant enumeration: octant `i` (1-based) has axis `k` negative exactly
//! when bit `k` of `i - 1` is set.
//!
//! Sign patterns multiply componentwise, which is XOR on the bit masks, so a
//! sign class is stored as the mask `(i - 1) ^ (j - 1)`.

use crate::error::{Error, Result};

/// A 1-based octant of `R^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OctantIndex(usize);

impl OctantIndex {
    pub fn new(index: usize, dim: usize) -> Result<Self> {
        if index == 0 || index > octant_count(dim) {
            return Err(Error::OutOfRange(format!(
                "octant index {index} outside 1..={} for dimension {dim}",
                octant_count(dim)
            )));
        }
        Ok(Self(index))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Bit mask of negative axes.
    pub fn mask(self) -> usize {
        self.0 - 1
    }

    pub fn signs(self, dim: usize) -> Vec<i8> {
        mask_signs(self.mask(), dim)
    }

    /// The octant whose negative axes are given by `mask`.
    pub fn from_mask(mask: usize) -> Self {
        Self(mask + 1)
    }
}

pub fn octant_count(dim: usize) -> usize {
    1 << dim
}

pub fn mask_signs(mask: usize, dim: usize) -> Vec<i8> {
    (0..dim).map(|k| if mask >> k & 1 == 1 { -1 } else { 1 }).collect()
}

/// Sign mask of a point; `None` when a coordinate is zero or not finite.
pub fn sign_mask(x: &[f64]) -> Option<usize> {
    let mut mask = 0;
    for (k, &v) in x.iter().enumerate() {
        if v < 0.0 {
            mask |= 1 << k;
        } else if !(v > 0.0) {
            return None;
        }
    }
    Some(mask)
}

/// `eps(i, j)`: the sign vector mapping octant `j` onto octant `i`.
pub fn octant_signature(i: usize, j: usize, dim: usize) -> Result<Vec<i8>> {
    Ok(mask_signs(pair_class(i, j, dim)?, dim))
}

/// Sign class of the pair `(i, j)` as a bit mask.
pub fn pair_class(i: usize, j: usize, dim: usize) -> Result<usize> {
    let i = OctantIndex::new(i, dim)?;
    let j = OctantIndex::new(j, dim)?;
    Ok(i.mask() ^ j.mask())
}
