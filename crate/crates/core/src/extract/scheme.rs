//! The extraction scheme on a product: push the fiber along the deleting
//! curve, parametrized by the mixed gauge, deleting the zero set of the base
//! exponent. The inverse rides on the fixed point of a semi-contraction.

use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::extract::fixed_point::{solve_fixed_point, FixedPointProblem};
use crate::gauges::GaugeKit;
use crate::seqspace::{ProductPoint, ProductSplit, SparseVec};

pub type BaseExponent = Arc<dyn Fn(&SparseVec) -> f64 + Send + Sync>;

pub struct ExtractionScheme {
    /// Nonnegative exponent on base vectors; its zero set (paired with fiber
    /// zero) is the deleted set.
    pub psi: BaseExponent,
    pub kit: GaugeKit,
    pub split: ProductSplit,
    /// Proximity threshold for the deleted set.
    pub excluded_tol: f64,
    /// Fixed-point residual tolerance for the inverse.
    pub fp_tol: f64,
}

impl ExtractionScheme {
    /// The scheme deleting a single point: psi identically zero, so the
    /// deleted set is {0} in the fiber.
    pub fn point_deletion(kit: GaugeKit, split: ProductSplit) -> Self {
        ExtractionScheme {
            psi: Arc::new(|_| 0.0),
            kit,
            split,
            excluded_tol: 1e-9,
            fp_tol: 1e-10,
        }
    }

    pub fn rho(&self, p: &ProductPoint) -> Result<f64> {
        self.kit.rho((self.psi)(&p.x1), &p.x2)
    }

    /// Forward map: (x1, x2) -> (x1, x2 + gamma(rho)). Exact identity
    /// wherever rho >= 1; undefined on the deleted set.
    pub fn forward(&self, p: &ProductPoint) -> Result<ProductPoint> {
        self.split.validate(p)?;
        let psi_val = (self.psi)(&p.x1);
        if psi_val <= self.excluded_tol && p.x2.norm_l2() <= self.excluded_tol {
            return Err(CoreError::ExcludedSet {
                tol: self.excluded_tol,
            });
        }
        let rho = self.kit.rho(psi_val, &p.x2)?;
        if rho >= 1.0 {
            return Ok(p.clone());
        }
        let shift = self.kit.curve.eval(rho)?;
        Ok(ProductPoint::new(
            p.x1.clone(),
            SparseVec::add(&p.x2, &shift),
        ))
    }

    /// Inverse map with its fixed-point parameter: (y1, y2) ->
    /// (y1, y2 - gamma(alpha)) where rho(y1, y2 - gamma(alpha)) = alpha.
    pub fn inverse_with_alpha(&self, q: &ProductPoint) -> Result<(ProductPoint, f64)> {
        self.split.validate(q)?;
        let psi_val = (self.psi)(&q.x1);
        let rho_here = self.kit.rho(psi_val, &q.x2)?;
        if rho_here >= 1.0 {
            // gamma vanishes at and beyond 1, so alpha = rho and the map is
            // the exact identity here.
            return Ok((q.clone(), rho_here));
        }
        let residual = |alpha: f64| -> f64 {
            let shift = self
                .kit
                .curve
                .eval(alpha)
                .expect("alpha > 0 inside the solver bracket");
            let moved = SparseVec::sub(&q.x2, &shift);
            self.kit
                .rho(psi_val, &moved)
                .expect("rho is defined for nonnegative psi")
        };
        let problem = FixedPointProblem::new(&residual, (1e-6, 2.0), self.fp_tol);
        let alpha = solve_fixed_point(&problem)?;
        let shift = self.kit.curve.eval(alpha)?;
        Ok((
            ProductPoint::new(q.x1.clone(), SparseVec::sub(&q.x2, &shift)),
            alpha,
        ))
    }

    pub fn inverse(&self, q: &ProductPoint) -> Result<ProductPoint> {
        self.inverse_with_alpha(q).map(|(p, _)| p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::BlockLayout;
    use rand::{Rng, SeedableRng};

    fn setup() -> (ExtractionScheme, BlockLayout) {
        let layout = BlockLayout::standard(64).unwrap();
        let kit = GaugeKit::for_fiber(layout.extraction.clone(), layout.data2.clone()).unwrap();
        let split = ProductSplit::new(layout.base(), layout.fiber()).unwrap();
        (ExtractionScheme::point_deletion(kit, split), layout)
    }

    fn fiber_point(layout: &BlockLayout, seed: u64) -> ProductPoint {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut pairs = Vec::new();
        for _ in 0..6 {
            let idx = layout.data2[rng.gen_range(0..layout.data2.len())];
            pairs.push((idx, rng.gen_range(-2.0..2.0)));
        }
        ProductPoint::new(SparseVec::zero(), SparseVec::from_pairs(&pairs).unwrap())
    }

    #[test]
    fn identity_beyond_unit_gauge() {
        let (scheme, layout) = setup();
        // omega weight of the first data2 index (position 17) is 4^-17;
        // scale to make rho = 1.2 exactly.
        let idx = layout.data2[0];
        let w = scheme.kit.omega.weight_of(idx).unwrap();
        let x2 = SparseVec::basis(idx).scale(1.2 / w);
        let p = ProductPoint::new(SparseVec::zero(), x2);
        assert!((scheme.rho(&p).unwrap() - 1.2).abs() < 1e-12);
        let q = scheme.forward(&p).unwrap();
        assert_eq!(q, p, "forward must be the exact identity when rho >= 1");
        let (r, alpha) = scheme.inverse_with_alpha(&p).unwrap();
        assert_eq!(r, p);
        assert!((alpha - 1.2).abs() < 1e-12);
    }

    #[test]
    fn excluded_set_rejected() {
        let (scheme, _) = setup();
        let origin = ProductPoint::new(SparseVec::zero(), SparseVec::zero());
        assert!(matches!(
            scheme.forward(&origin),
            Err(CoreError::ExcludedSet { .. })
        ));
    }

    #[test]
    fn forward_adds_curve_at_half_gauge() {
        let (scheme, _) = setup();
        // First extraction index has weight 1/4; scale to omega = 0.5.
        let anchor_idx = scheme.kit.curve.anchors()[0];
        let x2 = SparseVec::basis(anchor_idx).scale(2.0);
        let p = ProductPoint::new(SparseVec::zero(), x2.clone());
        assert!((scheme.rho(&p).unwrap() - 0.5).abs() < 1e-14);
        let q = scheme.forward(&p).unwrap();
        let expected = SparseVec::add(&x2, &scheme.kit.curve.eval(0.5).unwrap());
        assert!(SparseVec::dist_l2(&q.x2, &expected) < 1e-12);
    }

    #[test]
    fn preimage_of_deleted_position() {
        // Inverting at the deleted point's position lands on the curve at the
        // fixed-point parameter, with omega-value equal to that parameter.
        let (scheme, _) = setup();
        let q = ProductPoint::new(SparseVec::zero(), SparseVec::zero());
        let (p, alpha) = scheme.inverse_with_alpha(&q).unwrap();
        let omega_val = scheme.kit.omega.eval(&p.x2).unwrap();
        assert!(
            (omega_val - alpha).abs() < 1e-8,
            "omega {omega_val} vs alpha {alpha}"
        );
        // The small-parameter limit of the residual map is the closed form
        // 1/(4 sqrt(15)).
        let limit = scheme
            .kit
            .omega
            .eval(&scheme.kit.curve.eval(1e-9).unwrap())
            .unwrap();
        assert!((limit - 0.25 / 15f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn roundtrips_both_directions() {
        let (scheme, layout) = setup();
        for seed in 0..200u64 {
            let p = fiber_point(&layout, seed);
            if scheme.rho(&p).unwrap() < 1e-6 {
                continue;
            }
            let q = scheme.forward(&p).unwrap();
            let back = scheme.inverse(&q).unwrap();
            assert!(
                ProductPoint::dist_l2(&p, &back) <= 1e-8,
                "inverse(forward) drift at seed {seed}"
            );
            let r = scheme.inverse(&p).unwrap();
            let fwd = scheme.forward(&r).unwrap();
            assert!(
                ProductPoint::dist_l2(&p, &fwd) <= 1e-8,
                "forward(inverse) drift at seed {seed}"
            );
        }
    }

    #[test]
    fn fixed_point_equals_rho_at_inverse_image() {
        let (scheme, layout) = setup();
        for seed in 200..260u64 {
            let q = fiber_point(&layout, seed);
            let (p, alpha) = scheme.inverse_with_alpha(&q).unwrap();
            let rho = scheme.rho(&p).unwrap();
            assert!(
                (rho - alpha).abs() <= 1e-8,
                "rho {rho} vs alpha {alpha} at seed {seed}"
            );
        }
    }

    #[test]
    fn first_coordinate_preserved_exactly() {
        let (scheme_pd, layout) = setup();
        // A scheme with nontrivial base exponent.
        let scheme = ExtractionScheme {
            psi: Arc::new(|x1: &SparseVec| x1.norm_l2()),
            ..scheme_pd
        };
        let x1 = SparseVec::basis(layout.data1[0]).scale(0.3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let idx = layout.data2[rng.gen_range(0..layout.data2.len())];
            let p = ProductPoint::new(
                x1.clone(),
                SparseVec::basis(idx).scale(rng.gen_range(-3.0..3.0)),
            );
            let q = scheme.forward(&p).unwrap();
            assert_eq!(q.x1, p.x1);
            let r = scheme.inverse(&q).unwrap();
            assert_eq!(r.x1, p.x1);
        }
    }
}
