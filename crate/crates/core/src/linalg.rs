//! Small dense matrices over sparse column indices, singular values by
//! Jacobi iteration on the Gram matrix, and an orthonormalization ledger.

use crate::seqspace::SparseVec;

/// Row-major m x k matrix whose columns are labeled by basis indices.
#[derive(Debug, Clone)]
pub struct ColMatrix {
    pub rows: usize,
    pub cols: Vec<usize>,
    pub data: Vec<f64>,
}

impl ColMatrix {
    pub fn zeros(rows: usize, cols: Vec<usize>) -> ColMatrix {
        let data = vec![0.0; rows * cols.len()];
        ColMatrix { rows, cols, data }
    }

    pub fn col_pos(&self, index: usize) -> Option<usize> {
        self.cols.iter().position(|&c| c == index)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols.len() + c]
    }

    pub fn add_at(&mut self, r: usize, col_index: usize, v: f64) {
        let c = self
            .col_pos(col_index)
            .expect("column index not present in the matrix");
        self.data[r * self.cols.len() + c] += v;
    }

    /// Apply to a sparse vector; coordinates outside the column set
    /// contribute nothing.
    pub fn apply(&self, v: &SparseVec) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (i, x) in v.iter() {
            if let Some(c) = self.col_pos(i) {
                for (r, o) in out.iter_mut().enumerate() {
                    *o += self.data[r * self.cols.len() + c] * x;
                }
            }
        }
        out
    }

    /// All singular values, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        let m = self.rows;
        let k = self.cols.len();
        // Gram matrix A A^T (m x m).
        let mut gram = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                let mut acc = 0.0;
                for c in 0..k {
                    acc += self.data[i * k + c] * self.data[j * k + c];
                }
                gram[i * m + j] = acc;
            }
        }
        let mut eig = symmetric_eigenvalues(&mut gram, m);
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        eig.into_iter().map(|l| l.max(0.0).sqrt()).collect()
    }

    pub fn sigma_min(&self) -> f64 {
        if self.cols.len() < self.rows {
            return 0.0; // rank deficient by shape
        }
        *self
            .singular_values()
            .last()
            .expect("at least one singular value")
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
fn symmetric_eigenvalues(a: &mut [f64], n: usize) -> Vec<f64> {
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off < 1e-300 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let api = a[p * n + i];
                    let aqi = a[q * n + i];
                    a[p * n + i] = c * api - s * aqi;
                    a[q * n + i] = s * api + c * aqi;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Modified Gram-Schmidt ledger tracking the span of accepted vectors.
#[derive(Debug, Clone, Default)]
pub struct SpanLedger {
    ortho: Vec<SparseVec>,
    pub span_indices: std::collections::BTreeSet<usize>,
}

impl SpanLedger {
    pub fn rank(&self) -> usize {
        self.ortho.len()
    }

    /// Residual norm of `v` against the current span, relative to |v|.
    pub fn relative_residual(&self, v: &SparseVec) -> f64 {
        let norm = v.norm_l2();
        if norm == 0.0 {
            return 0.0;
        }
        let mut r = v.clone();
        for q in &self.ortho {
            let c = SparseVec::inner(&r, q);
            r = SparseVec::add_scaled(-c, q, &r);
        }
        r.norm_l2() / norm
    }

    /// Accept a vector into the ledger (orthonormalizing it); returns false
    /// when it is numerically dependent on the span.
    pub fn accept(&mut self, v: &SparseVec, residual_threshold: f64) -> bool {
        let mut r = v.clone();
        for q in &self.ortho {
            let c = SparseVec::inner(&r, q);
            r = SparseVec::add_scaled(-c, q, &r);
        }
        let norm = r.norm_l2();
        if norm <= residual_threshold * v.norm_l2().max(1e-300) {
            return false;
        }
        for i in v.support() {
            self.span_indices.insert(i);
        }
        self.ortho.push(r.scale(1.0 / norm));
        true
    }

    pub fn max_index(&self) -> usize {
        self.span_indices.iter().next_back().copied().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_values_of_scaled_selection() {
        // Rows select distinct columns with scale 0.3: all singular values 0.3.
        let mut m = ColMatrix::zeros(2, vec![4, 8, 12]);
        m.add_at(0, 4, 0.3);
        m.add_at(1, 8, 0.3);
        let sv = m.singular_values();
        assert!((sv[0] - 0.3).abs() < 1e-12);
        assert!((sv[1] - 0.3).abs() < 1e-12);
        assert!((m.sigma_min() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn singular_values_match_hand_case() {
        // [[3, 0], [4, 5]] has singular values sqrt(45 +- ...) known closed form.
        let mut m = ColMatrix::zeros(2, vec![1, 2]);
        m.add_at(0, 1, 3.0);
        m.add_at(1, 1, 4.0);
        m.add_at(1, 2, 5.0);
        let sv = m.singular_values();
        let (s1, s2) = (45f64.sqrt(), 5f64.sqrt());
        assert!((sv[0] - s1).abs() < 1e-10, "{} vs {s1}", sv[0]);
        assert!((sv[1] - s2).abs() < 1e-10, "{} vs {s2}", sv[1]);
    }

    #[test]
    fn wide_matrix_sigma_min_positive() {
        let mut m = ColMatrix::zeros(2, vec![1, 2, 3]);
        m.add_at(0, 1, 1.0);
        m.add_at(1, 2, 1.0);
        m.add_at(0, 3, 0.5);
        assert!(m.sigma_min() >= 1.0 - 1e-12);
    }

    #[test]
    fn ledger_detects_dependence() {
        let mut ledger = SpanLedger::default();
        let v1 = SparseVec::from_pairs(&[(1, 1.0), (2, 1.0)]).unwrap();
        let v2 = SparseVec::from_pairs(&[(1, 2.0), (2, 2.0)]).unwrap();
        let v3 = SparseVec::from_pairs(&[(2, 1.0)]).unwrap();
        assert!(ledger.accept(&v1, 1e-8));
        assert!(!ledger.accept(&v2, 1e-8));
        assert!(ledger.accept(&v3, 1e-8));
        assert_eq!(ledger.rank(), 2);
        assert_eq!(ledger.max_index(), 2);
    }
}
