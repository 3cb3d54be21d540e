//! Smoothness upgrade: swap a once-differentiable approximant for a
//! smoother one supplied by an oracle, provided the oracle stays within the
//! surjectivity-openness radius in both value and derivative.

use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::linalg::ColMatrix;
use crate::seqspace::SparseVec;
use crate::smoothing::cover::ScalarField;

/// A map with values in R^m and an explicit Jacobian evaluator.
#[derive(Clone)]
pub struct DifferentiableMap {
    pub value: Arc<dyn Fn(&SparseVec) -> Result<Vec<f64>> + Send + Sync>,
    pub jacobian: Arc<dyn Fn(&SparseVec) -> Result<ColMatrix> + Send + Sync>,
}

fn frobenius_diff(a: &ColMatrix, b: &ColMatrix) -> f64 {
    let mut cols: Vec<usize> = a.cols.clone();
    for c in &b.cols {
        if !cols.contains(c) {
            cols.push(*c);
        }
    }
    let mut acc = 0.0;
    for r in 0..a.rows {
        for &c in &cols {
            let va = a.col_pos(c).map(|p| a.get(r, p)).unwrap_or(0.0);
            let vb = b.col_pos(c).map(|p| b.get(r, p)).unwrap_or(0.0);
            acc += (va - vb) * (va - vb);
        }
    }
    acc.sqrt()
}

/// Check the oracle against the openness budget eta(x) = min(eps(x)/2,
/// sigma_min(Dphi(x))/4) (floored at 1e-8) on every corpus point, then hand
/// the oracle back as the upgraded map.
pub fn upgrade_smoothness(
    phi: &DifferentiableMap,
    oracle: &DifferentiableMap,
    eps: &ScalarField,
    corpus: &[SparseVec],
) -> Result<DifferentiableMap> {
    for (idx, x) in corpus.iter().enumerate() {
        let jac_phi = (phi.jacobian)(x)?;
        let sigma = jac_phi.sigma_min();
        let eta = (0.5 * eps(x)).min(0.25 * sigma).max(1e-8);

        let v_phi = (phi.value)(x)?;
        let v_orc = (oracle.value)(x)?;
        let value_gap: f64 = v_phi
            .iter()
            .zip(&v_orc)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if value_gap > eta {
            return Err(CoreError::Oracle {
                detail: format!("value gap {value_gap} above eta {eta} at corpus point {idx}"),
            });
        }
        let jac_orc = (oracle.jacobian)(x)?;
        let deriv_gap = frobenius_diff(&jac_phi, &jac_orc);
        if deriv_gap > eta {
            return Err(CoreError::Oracle {
                detail: format!(
                    "derivative gap {deriv_gap} above eta {eta} at corpus point {idx}"
                ),
            });
        }
    }
    Ok(oracle.clone())
}
