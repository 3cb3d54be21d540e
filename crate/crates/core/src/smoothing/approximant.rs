//! The smooth approximant: partition-weighted sum of constants-plus-scaled
//! block selections, phi(x) = sum_n psi_n(x) (f(y_n) + T_n(x - y_n)), with
//! an analytic Jacobian over the active coordinates.

use crate::error::Result;
use crate::linalg::ColMatrix;
use crate::seqspace::SparseVec;
use crate::smoothing::cover::BallCover;
use crate::smoothing::operators::BlockSurjections;
use crate::smoothing::partition::{PartitionEval, PartitionOfUnity};

pub struct Approximant {
    pub cover: BallCover,
    pub partition: PartitionOfUnity,
    pub ops: BlockSurjections,
}

impl Approximant {
    pub fn new(cover: BallCover, ops: BlockSurjections) -> Result<Approximant> {
        let partition = PartitionOfUnity::new(&cover)?;
        Ok(Approximant {
            cover,
            partition,
            ops,
        })
    }

    pub fn target_dim(&self) -> usize {
        self.ops.target_dim
    }

    pub fn value(&self, x: &SparseVec) -> Result<Vec<f64>> {
        Ok(self.value_with_partition(x, &self.partition.eval(x)?))
    }

    fn value_with_partition(&self, x: &SparseVec, pe: &PartitionEval) -> Vec<f64> {
        let m = self.ops.target_dim;
        let mut out = vec![0.0; m];
        for (pos, &n) in pe.active.iter().enumerate() {
            let w = pe.weights[pos];
            if w == 0.0 {
                continue;
            }
            let ball = &self.cover.balls[n];
            let recentered = SparseVec::sub(x, &ball.center);
            let t = self.ops.apply(n, &recentered);
            for (r, o) in out.iter_mut().enumerate() {
                *o += w * (ball.f_center[r] + t[r]);
            }
        }
        out
    }

    /// Value and analytic Jacobian over the union of active operator blocks
    /// and partition-gradient supports.
    pub fn eval(&self, x: &SparseVec) -> Result<(Vec<f64>, ColMatrix)> {
        let pe = self.partition.eval(x)?;
        let value = self.value_with_partition(x, &pe);
        let m = self.ops.target_dim;

        let mut cols: std::collections::BTreeSet<usize> = std::collections::BTreeSet::new();
        for &n in &pe.active {
            cols.extend(self.ops.assignments[n].iter().copied());
        }
        for g in &pe.grads {
            cols.extend(g.support());
        }
        let mut jac = ColMatrix::zeros(m, cols.into_iter().collect());

        for (pos, &n) in pe.active.iter().enumerate() {
            let w = pe.weights[pos];
            let ball = &self.cover.balls[n];
            // Block-selection term: psi_n * T_n.
            if w != 0.0 {
                for (r, &col) in self.ops.assignments[n].iter().enumerate() {
                    jac.add_at(r, col, w * self.ops.scales[n]);
                }
            }
            // Partition-gradient term: (f(y_n) + T_n(x - y_n)) (x) grad psi_n.
            let recentered = SparseVec::sub(x, &ball.center);
            let t = self.ops.apply(n, &recentered);
            for (col, gv) in pe.grads[pos].iter() {
                for r in 0..m {
                    jac.add_at(r, col, (ball.f_center[r] + t[r]) * gv);
                }
            }
        }
        Ok((value, jac))
    }
}
