//! Scalar building blocks of the extraction machinery: smooth transition
//! profiles, the subadditive fiber functional, the deleting curve, and the
//! smooth-square gauge, each with value and derivative evaluators.

pub mod curve;
pub mod omega;
pub mod profile;
pub mod smoothstep;
pub mod square;

use serde::{Deserialize, Serialize};

pub use curve::DeletingCurve;
pub use omega::OmegaFunctional;
pub use smoothstep::SmoothStep;
pub use square::SmoothSquare;

use crate::error::{CoreError, Result};
use crate::seqspace::SparseVec;

/// Bundled evaluators shared by every extraction scheme: the step profile
/// theta, the fiber functional omega, the deleting curve gamma, and the
/// smooth-square gauge.
#[derive(Debug, Clone)]
pub struct GaugeKit {
    pub omega: OmegaFunctional,
    pub curve: DeletingCurve,
    pub square: SmoothSquare,
}

impl GaugeKit {
    /// Kit over a fiber whose enumeration starts with the extraction block
    /// (so curve anchors carry omega-weights 4^-k) and continues with the
    /// fiber's data coordinates.
    pub fn for_fiber(extraction: Vec<usize>, fiber_data: Vec<usize>) -> Result<Self> {
        if extraction.is_empty() {
            return Err(CoreError::Domain {
                op: "GaugeKit::for_fiber",
                detail: "extraction block must be nonempty".into(),
            });
        }
        let mut enumeration = extraction.clone();
        enumeration.extend(fiber_data);
        let omega = OmegaFunctional::with_enumeration(enumeration)?;
        let curve = DeletingCurve::new(extraction)?;
        Ok(GaugeKit {
            omega,
            curve,
            square: SmoothSquare::default(),
        })
    }

    /// The mixed gauge rho = mu_S(psi, omega(x2)). It equals omega(x2)
    /// exactly when psi = 0 and psi exactly when x2 = 0.
    pub fn rho(&self, psi_val: f64, x2: &SparseVec) -> Result<f64> {
        if psi_val < 0.0 {
            return Err(CoreError::Domain {
                op: "GaugeKit::rho",
                detail: format!("psi must be nonnegative, got {psi_val}"),
            });
        }
        Ok(self.square.mu(psi_val, self.omega.eval(x2)?))
    }
}

/// Serializable description of a gauge configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaugeConfig {
    pub omega_weights_base: u32,
    pub theta_bound: f64,
    pub square_arc_table: usize,
}

impl Default for GaugeConfig {
    fn default() -> Self {
        GaugeConfig {
            omega_weights_base: 4,
            theta_bound: 4.0,
            square_arc_table: 4096,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kit() -> GaugeKit {
        let extraction: Vec<usize> = (1..=16).map(|i| 4 * i - 2).collect();
        let data2: Vec<usize> = (1..=16).map(|i| 4 * i - 1).collect();
        GaugeKit::for_fiber(extraction, data2).unwrap()
    }

    #[test]
    fn rho_degenerate_slots() {
        let k = kit();
        assert_eq!(k.rho(0.0, &SparseVec::zero()).unwrap(), 0.0);
        // psi = 0 collapses to omega exactly.
        let v = SparseVec::from_pairs(&[(2, 1.0), (7, -0.5)]).unwrap();
        let w = k.omega.eval(&v).unwrap();
        assert_eq!(k.rho(0.0, &v).unwrap(), w);
        // x2 = 0 collapses to psi exactly.
        assert_eq!(k.rho(0.7, &SparseVec::zero()).unwrap(), 0.7);
    }

    #[test]
    fn rho_rejects_negative_psi() {
        assert!(kit().rho(-0.1, &SparseVec::zero()).is_err());
    }

    #[test]
    fn anchor_weights_follow_enumeration() {
        let k = kit();
        // First extraction index is 2 and carries the leading weight 1/4.
        assert_eq!(k.omega.weight_of(2), Some(0.25));
        assert_eq!(k.omega.weight_of(6), Some(0.0625));
        let y1 = k.curve.anchor_vec(1);
        assert_eq!(k.omega.eval(&y1).unwrap(), 0.0625); // (1/4) * (1/4)
    }

    #[test]
    fn rho_gradient_continuous_across_psi_axis() {
        // Finite-difference gradient of rho in x2 stays continuous at psi = 0
        // when omega(x2) > 0 (flatness of the square near the axes).
        let k = kit();
        let v = SparseVec::from_pairs(&[(2, 2.0)]).unwrap();
        let e = SparseVec::basis(2);
        let h = 1e-6;
        let grad_at = |psi: f64| {
            (k.rho(psi, &SparseVec::add_scaled(h, &e, &v)).unwrap()
                - k.rho(psi, &SparseVec::add_scaled(-h, &e, &v)).unwrap())
                / (2.0 * h)
        };
        let g0 = grad_at(0.0);
        let g1 = grad_at(1e-4);
        assert!((g0 - g1).abs() < 1e-5, "jump across the axis: {g0} vs {g1}");
    }
}
