//! The asymmetric-style subadditive functional on the fiber.
//!
//! Realized as `w(x) = |A x|_2` with `A = diag(4^-k)` over a declared index
//! enumeration. It is positively homogeneous, subadditive, definite, and
//! smooth away from 0; the geometric decay of the weights is what lets the
//! deleting curve stay bounded in `w` while escaping to infinity in norm.
//! (This realization happens to be symmetric; nothing downstream uses
//! asymmetry.)

use std::collections::BTreeMap;

use crate::error::{CoreError, Result};
use crate::seqspace::SparseVec;

#[derive(Debug, Clone)]
pub struct OmegaFunctional {
    ordered: Vec<usize>,
    weight: BTreeMap<usize, f64>,
}

impl OmegaFunctional {
    /// Weight 4^-(k) is assigned to the k-th index of the enumeration
    /// (1-based), so the first enumerated index carries weight 1/4.
    pub fn with_enumeration(ordered: Vec<usize>) -> Result<Self> {
        let mut weight = BTreeMap::new();
        for (pos, &idx) in ordered.iter().enumerate() {
            let w = 0.25f64.powi(pos as i32 + 1);
            if weight.insert(idx, w).is_some() {
                return Err(CoreError::Domain {
                    op: "OmegaFunctional::with_enumeration",
                    detail: format!("index {idx} enumerated twice"),
                });
            }
        }
        Ok(OmegaFunctional { ordered, weight })
    }

    /// The standard enumeration 1..=dim.
    pub fn standard(dim: usize) -> Self {
        Self::with_enumeration((1..=dim).collect()).expect("1..=dim has no duplicates")
    }

    pub fn enumeration(&self) -> &[usize] {
        &self.ordered
    }

    pub fn weight_of(&self, index: usize) -> Option<f64> {
        self.weight.get(&index).copied()
    }

    fn require_weight(&self, index: usize) -> Result<f64> {
        self.weight_of(index).ok_or_else(|| CoreError::Domain {
            op: "OmegaFunctional::eval",
            detail: format!("index {index} outside the weighted enumeration"),
        })
    }

    pub fn eval(&self, v: &SparseVec) -> Result<f64> {
        let mut acc = 0.0;
        for (i, x) in v.iter() {
            let w = self.require_weight(i)?;
            acc += (w * x) * (w * x);
        }
        Ok(acc.sqrt())
    }

    /// Gradient A^2 v / |A v|; undefined at 0.
    pub fn grad(&self, v: &SparseVec) -> Result<SparseVec> {
        if v.is_zero() {
            return Err(CoreError::SingularPoint {
                what: "omega functional",
            });
        }
        let norm = self.eval(v)?;
        let pairs: Vec<(usize, f64)> = v
            .iter()
            .map(|(i, x)| {
                let w = self.weight[&i];
                (i, w * w * x / norm)
            })
            .collect();
        SparseVec::from_pairs(&pairs)
    }
}
