//! Rank-m coordinate surjections supported on disjoint sub-blocks of the
//! reserved index block, scaled per ball to a quarter of the local budget.

use crate::error::{CoreError, Result};
use crate::linalg::ColMatrix;
use crate::seqspace::SparseVec;
use crate::smoothing::cover::BallCover;

#[derive(Debug, Clone)]
pub struct BlockSurjections {
    pub target_dim: usize,
    /// Coordinate block I_n per ball, pairwise disjoint inside the reserved
    /// block and disjoint from every center's support.
    pub assignments: Vec<Vec<usize>>,
    /// Operator scale per ball: eps(center)/4.
    pub scales: Vec<f64>,
}

pub fn block_operators(
    target_dim: usize,
    cover: &BallCover,
    reserved: &[usize],
) -> Result<BlockSurjections> {
    if target_dim == 0 {
        return Err(CoreError::Domain {
            op: "block_operators",
            detail: "target dimension must be positive".into(),
        });
    }
    let forbidden: std::collections::BTreeSet<usize> = cover
        .balls
        .iter()
        .flat_map(|b| b.center.support())
        .collect();
    let pool: Vec<usize> = reserved
        .iter()
        .copied()
        .filter(|i| !forbidden.contains(i))
        .collect();
    let needed = cover.balls.len() * target_dim;
    if needed > pool.len() {
        return Err(CoreError::Capacity {
            needed,
            available: pool.len(),
        });
    }
    let assignments: Vec<Vec<usize>> = pool
        .chunks(target_dim)
        .take(cover.balls.len())
        .map(|c| c.to_vec())
        .collect();
    let scales: Vec<f64> = cover.balls.iter().map(|b| b.eps_center / 4.0).collect();
    Ok(BlockSurjections {
        target_dim,
        assignments,
        scales,
    })
}

impl BlockSurjections {
    /// T_n applied to a vector: scale * coordinate selection onto R^m.
    pub fn apply(&self, n: usize, v: &SparseVec) -> Vec<f64> {
        self.assignments[n]
            .iter()
            .map(|&i| self.scales[n] * v.get(i))
            .collect()
    }

    /// The unscaled selection S_n as a dense matrix over its block.
    pub fn selection_matrix(&self, n: usize) -> ColMatrix {
        let cols = self.assignments[n].clone();
        let mut m = ColMatrix::zeros(self.target_dim, cols.clone());
        for (r, &c) in cols.iter().enumerate() {
            m.add_at(r, c, 1.0);
        }
        m
    }

    /// Operator norm of T_n (a scaled selection's norm is its scale).
    pub fn operator_norm(&self, n: usize) -> f64 {
        self.scales[n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smoothing::cover::{build_ball_cover, CoverConfig, RmMap, ScalarField};
    use std::sync::Arc;

    fn small_cover(n_points: usize, spacing: f64) -> BallCover {
        let f: RmMap = Arc::new(|_: &SparseVec| vec![0.0]);
        let eps: ScalarField = Arc::new(|_| 0.8);
        let corpus: Vec<SparseVec> = (0..n_points)
            .map(|i| SparseVec::from_pairs(&[(1, i as f64 * spacing)]).unwrap())
            .collect();
        build_ball_cover(&f, &eps, &corpus, &[1, 3], &CoverConfig::default()).unwrap()
    }

    #[test]
    fn singleton_blocks_for_scalar_target() {
        let cover = small_cover(3, 10.0);
        assert_eq!(cover.balls.len(), 3);
        let reserved: Vec<usize> = (1..=16).map(|i| 4 * i).collect();
        let ops = block_operators(1, &cover, &reserved).unwrap();
        let mut all: Vec<usize> = ops.assignments.iter().flatten().copied().collect();
        let len = all.len();
        all.dedup();
        assert_eq!(all.len(), len, "blocks overlap");
        assert_eq!(ops.assignments.len(), 3);
    }

    #[test]
    fn operator_norm_is_quarter_eps() {
        let cover = small_cover(2, 10.0);
        let reserved: Vec<usize> = (1..=16).map(|i| 4 * i).collect();
        let ops = block_operators(2, &cover, &reserved).unwrap();
        for n in 0..2 {
            assert_eq!(ops.operator_norm(n), 0.8 / 4.0);
            // Norm attained on a unit basis vector of the block.
            let e = SparseVec::basis(ops.assignments[n][0]);
            let image = ops.apply(n, &e);
            let norm: f64 = image.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert_eq!(norm, 0.8 / 4.0);
        }
    }

    #[test]
    fn selections_have_full_rank() {
        let cover = small_cover(3, 10.0);
        let reserved: Vec<usize> = (1..=16).map(|i| 4 * i).collect();
        let ops = block_operators(2, &cover, &reserved).unwrap();
        for n in 0..3 {
            let sv = ops.selection_matrix(n).singular_values();
            assert_eq!(sv.len(), 2);
            for s in sv {
                assert!(s >= 1.0 - 1e-12);
            }
        }
    }

    #[test]
    fn capacity_exhaustion_detected() {
        let cover = small_cover(5, 10.0);
        let reserved: Vec<usize> = vec![4, 8, 12, 16];
        assert!(matches!(
            block_operators(1, &cover, &reserved),
            Err(CoreError::Capacity {
                needed: 5,
                available: 4
            })
        ));
    }
}
