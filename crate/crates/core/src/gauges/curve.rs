//! The deleting curve: a smooth path that escapes to infinity in norm as
//! t -> 0+ while staying Cauchy in the subadditive functional, and vanishes
//! identically for t >= 1. Point extraction rides on it.
//!
//! At finite truncation the curve's limit cannot literally leave the space;
//! the surrogate for "the limit lies outside" is the escape property: the
//! inverse-weighted norm of the truncated anchor sum grows strictly with
//! the truncation level (see `escape_property_across_truncations`). The
//! full positivity clause against every fixed vector holds only for vectors
//! supported below the anchor tail.

use crate::error::{CoreError, Result};
use crate::seqspace::SparseVec;

use super::omega::OmegaFunctional;
use super::smoothstep::SmoothStep;

/// `gamma(t) = sum_k theta(2^(k-1) t) y_k` with anchors `y_k = (1/4) e_{b(k)}`,
/// where b(k) enumerates the designated extraction block.
#[derive(Debug, Clone)]
pub struct DeletingCurve {
    theta: SmoothStep,
    anchors: Vec<usize>,
    amplitude: f64,
}

impl DeletingCurve {
    /// Anchors must be the leading indices of the omega enumeration, so that
    /// the k-th anchor has omega-value exactly 4^-(k+1).
    pub fn new(anchors: Vec<usize>) -> Result<Self> {
        if anchors.is_empty() {
            return Err(CoreError::Domain {
                op: "DeletingCurve::new",
                detail: "empty anchor block".into(),
            });
        }
        let theta = SmoothStep::falling(0.5, 1.0)?.verify_bound(4.0, 100_000)?;
        Ok(DeletingCurve {
            theta,
            anchors,
            amplitude: 0.25,
        })
    }

    pub fn theta(&self) -> &SmoothStep {
        &self.theta
    }

    pub fn anchors(&self) -> &[usize] {
        &self.anchors
    }

    /// k-th anchor vector (1-based).
    pub fn anchor_vec(&self, k: usize) -> SparseVec {
        SparseVec::basis(self.anchors[k - 1]).scale(self.amplitude)
    }

    /// Sum of all anchors available at truncation; the limit the curve
    /// approaches (in omega) as t -> 0+.
    pub fn limit_anchor_sum(&self) -> SparseVec {
        let pairs: Vec<(usize, f64)> = self.anchors.iter().map(|&i| (i, self.amplitude)).collect();
        SparseVec::from_pairs(&pairs).expect("anchors are distinct positive indices")
    }

    /// gamma(t). Defined on (0, infinity); identically zero for t >= 1.
    pub fn eval(&self, t: f64) -> Result<SparseVec> {
        if !(t > 0.0) {
            return Err(CoreError::Domain {
                op: "DeletingCurve::eval",
                detail: format!("curve is defined on (0, inf), got t = {t}"),
            });
        }
        let mut pairs = Vec::new();
        for (k, &idx) in self.anchors.iter().enumerate() {
            let arg = 2f64.powi(k as i32) * t; // 2^(k-1) t, k here 0-based
            if arg >= 1.0 {
                break; // theta vanishes here and for every later k
            }
            let factor = self.theta.eval(arg);
            if factor != 0.0 {
                pairs.push((idx, self.amplitude * factor));
            }
        }
        SparseVec::from_pairs(&pairs)
    }

    /// Check the semi-contraction inequality of the curve against `omega` on
    /// a pair beta >= alpha > 0; returns the measured gap.
    pub fn decay_gap(&self, omega: &OmegaFunctional, alpha: f64, beta: f64) -> Result<f64> {
        let ga = self.eval(alpha)?;
        let gb = self.eval(beta)?;
        omega.eval(&SparseVec::sub(&ga, &gb))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn curve_and_omega() -> (DeletingCurve, OmegaFunctional) {
        // Extraction block leads the enumeration.
        let block: Vec<usize> = (1..=16).collect();
        let omega = OmegaFunctional::with_enumeration((1..=64).collect()).unwrap();
        (DeletingCurve::new(block).unwrap(), omega)
    }

    #[test]
    fn vanishes_exactly_past_one() {
        let (c, _) = curve_and_omega();
        assert!(c.eval(1.0).unwrap().is_zero());
        assert!(c.eval(1.5).unwrap().is_zero());
        assert!(c.eval(100.0).unwrap().is_zero());
    }

    #[test]
    fn nonpositive_argument_rejected() {
        let (c, _) = curve_and_omega();
        assert!(c.eval(0.0).is_err());
        assert!(c.eval(-0.5).is_err());
    }

    #[test]
    fn single_anchor_survives_at_t_point_six() {
        // At t = 0.6 the k >= 2 terms vanish since 2 * 0.6 >= 1.
        let (c, _) = curve_and_omega();
        let g = c.eval(0.6).unwrap();
        assert_eq!(g.support_len(), 1);
        let expected = 0.25 * c.theta().eval(0.6);
        assert!((g.get(1) - expected).abs() < 1e-15);
    }

    #[test]
    fn support_grows_logarithmically() {
        let (c, _) = curve_and_omega();
        for &t in &[0.5, 0.25, 0.1, 0.01, 1e-3] {
            let support = c.eval(t).unwrap().support_len();
            let bound = (1.0 / t).log2().ceil() as usize + 1;
            assert!(support <= bound, "support {support} > bound {bound} at t={t}");
        }
    }

    #[test]
    fn anchor_values_are_exact_powers() {
        let (c, omega) = curve_and_omega();
        for k in 1..=16usize {
            let got = omega.eval(&c.anchor_vec(k)).unwrap();
            let expected = 0.25f64.powi(k as i32 + 1);
            assert_eq!(got, expected, "anchor {k}");
        }
    }

    #[test]
    fn semi_contraction_on_random_pairs() {
        let (c, omega) = curve_and_omega();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let a: f64 = rng.gen_range(1e-4..2.0);
            let b: f64 = rng.gen_range(a..2.0001);
            let gap = c.decay_gap(&omega, a, b).unwrap();
            assert!(
                gap <= 0.5 * (b - a) + 1e-12,
                "decay bound violated: gap {gap} for ({a}, {b})"
            );
        }
    }

    #[test]
    fn escape_property_across_truncations() {
        // The inverse-weighted norm of the truncated limit sum grows
        // monotonically with the truncation level, witnessing that the limit
        // lies outside the range of the weight operator.
        let mut prev = 0.0;
        for dim in [16usize, 32, 64] {
            let block: Vec<usize> = (1..=dim / 4).collect();
            let omega = OmegaFunctional::with_enumeration((1..=dim).collect()).unwrap();
            let curve = DeletingCurve::new(block).unwrap();
            let z = curve.limit_anchor_sum();
            let mut preimage_sq = 0.0;
            for (i, v) in z.iter() {
                let w = omega.weight_of(i).unwrap();
                preimage_sq += (v / w) * (v / w);
            }
            let preimage = preimage_sq.sqrt();
            assert!(
                preimage > prev,
                "no growth at dim {dim}: {preimage} <= {prev}"
            );
            prev = preimage;
        }
    }
}
