//! Truncation dimension, tolerances, and the reserved index-block layout.
//!
//! All "infinite-dimensional" behavior is realized through index blocks
//! reserved far above the active support of data; operations reject indices
//! beyond the truncation dimension instead of resizing.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Numerical tolerances. Every threshold used by a certificate lives here.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    /// Fixed-point residual |F(a) - a|.
    pub fixed_point: f64,
    /// Smallest singular value accepted as a surjectivity certificate.
    pub rank: f64,
    /// Chart-consistency tolerance for the upper sphere.
    pub norm: f64,
    /// Proximity threshold for the deleted set of an extraction scheme.
    pub excluded: f64,
    /// Distance threshold operationalizing membership in a sampled closed set.
    pub set_membership: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            fixed_point: 1e-10,
            rank: 1e-6,
            norm: 1e-12,
            excluded: 1e-9,
            set_membership: 1e-9,
        }
    }
}

/// Construction-time configuration of the truncated sequence space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceConfig {
    /// Truncation dimension D; indices run over 1..=D.
    pub dim: usize,
    /// Lower bound on the height coordinate of the upper-sphere chart.
    pub equator_margin: f64,
    /// Series truncation for staircase and twin-function sums.
    pub series_terms: usize,
    pub tol: Tolerances,
}

impl Default for SpaceConfig {
    fn default() -> Self {
        SpaceConfig {
            dim: 64,
            equator_margin: 0.1,
            series_terms: 12,
            tol: Tolerances::default(),
        }
    }
}

impl SpaceConfig {
    pub fn with_dim(dim: usize) -> Self {
        SpaceConfig {
            dim,
            ..Default::default()
        }
    }
}

/// The standard disjoint index-block layout over 1..=D.
///
/// Data coordinates host sample supports; the extraction block hosts the
/// anchors of the deleting curve; the guarded block hosts the coordinate
/// blocks of the rank-m surjections. Keeping them disjoint is what makes the
/// "infinite codimension" bookkeeping checkable at finite truncation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockLayout {
    /// First data block (base of product decompositions), indices = 1 mod 4.
    pub data1: Vec<usize>,
    /// Second data block (fiber data coordinates), indices = 3 mod 4.
    pub data2: Vec<usize>,
    /// Anchor coordinates of the deleting curve, indices = 2 mod 4.
    pub extraction: Vec<usize>,
    /// Reserved block hosting the operator coordinate blocks, indices = 0 mod 4.
    pub guarded: Vec<usize>,
}

impl BlockLayout {
    /// The default mod-4 layout within dimension `dim`.
    pub fn standard(dim: usize) -> Result<Self> {
        if dim < 8 {
            return Err(CoreError::Domain {
                op: "BlockLayout::standard",
                detail: format!("dimension {dim} too small for a four-block layout"),
            });
        }
        let pick = |r: usize| (1..=dim).filter(|i| i % 4 == r).collect::<Vec<_>>();
        Ok(BlockLayout {
            data1: pick(1),
            data2: pick(3),
            extraction: pick(2),
            guarded: pick(0),
        })
    }

    /// All data coordinates (both blocks), ascending.
    pub fn data(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.data1.iter().chain(&self.data2).copied().collect();
        v.sort_unstable();
        v
    }

    /// Fiber coordinates of the product decomposition: extraction block first
    /// (in order), then the second data block. The ordering fixes the weight
    /// enumeration of the subadditive functional on the fiber.
    pub fn fiber(&self) -> Vec<usize> {
        let mut v = self.extraction.clone();
        v.extend(&self.data2);
        v
    }

    /// Base coordinates of the product decomposition.
    pub fn base(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.data1.iter().chain(&self.guarded).copied().collect();
        v.sort_unstable();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_layout_partitions_indices() {
        let layout = BlockLayout::standard(64).unwrap();
        let mut all: Vec<usize> = layout
            .data1
            .iter()
            .chain(&layout.data2)
            .chain(&layout.extraction)
            .chain(&layout.guarded)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (1..=64).collect::<Vec<_>>());
        assert_eq!(layout.extraction.len(), 16);
        assert_eq!(layout.guarded.len(), 16);
    }

    #[test]
    fn tiny_dimension_rejected() {
        assert!(BlockLayout::standard(4).is_err());
    }
}
