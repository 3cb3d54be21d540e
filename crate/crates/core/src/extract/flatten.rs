//! The flattening pair: two fiber-preserving homeomorphisms built from the
//! staircase composed with the twin heights. The primary map carries the
//! sampled graph onto the zero section; the windowed map does the same off
//! the window only; the two agree bitwise outside the window; and their
//! inverses stay within the closeness budget of each other. Inverses are
//! Picard iterations with contraction ratio at most 1/4.

use crate::error::{CoreError, Result};
use crate::extract::extension::extend_function;
use crate::extract::staircase::Staircase;
use crate::extract::twin::{TwinHeights, TwinKind};
use crate::extract::window::Window;
use crate::seqspace::{ProductPoint, ProductSplit, SparseVec};

/// Convergence diagnostics of one Picard inverse.
#[derive(Debug, Clone)]
pub struct PicardStats {
    pub iterations: usize,
    /// Successive contraction ratios |delta_(k+1)| / |delta_k|.
    pub ratios: Vec<f64>,
    pub final_delta: f64,
}

pub struct FlattenMaps {
    staircase: Staircase,
    twin: TwinHeights,
    split: ProductSplit,
    closeness: f64,
    picard_tol: f64,
    picard_cap: usize,
}

impl FlattenMaps {
    /// Build both maps from graph samples over the split's base, a window,
    /// and a closeness budget. `corpus` certifies every internal
    /// approximant's sup error.
    pub fn build(
        samples: &[(SparseVec, SparseVec)],
        window: Window,
        split: ProductSplit,
        closeness: f64,
        series: usize,
        corpus: &[SparseVec],
    ) -> Result<FlattenMaps> {
        let staircase = Staircase::build(samples, corpus, series)
            .map_err(|e| e.in_stage("staircase"))?;
        let base = extend_function(samples, false)?;
        let twin = TwinHeights::build(samples, base, window, closeness, series, corpus)
            .map_err(|e| e.in_stage("twin-heights"))?;
        Ok(FlattenMaps {
            staircase,
            twin,
            split,
            closeness,
            picard_tol: 1e-10,
            picard_cap: 200,
        })
    }

    pub fn closeness(&self) -> f64 {
        self.closeness
    }

    pub fn staircase(&self) -> &Staircase {
        &self.staircase
    }

    pub fn twin(&self) -> &TwinHeights {
        &self.twin
    }

    pub fn split(&self) -> &ProductSplit {
        &self.split
    }

    /// The fiber shift d(x1, x2) = F(phi(x1, x2), x1) of the selected twin.
    pub fn shift(&self, p: &ProductPoint, kind: TwinKind) -> SparseVec {
        let height = self.twin.eval(p, kind);
        self.staircase.eval(height, &p.x1)
    }

    /// Forward map: (x1, x2) -> (x1, x2 - d(x1, x2)).
    pub fn forward(&self, p: &ProductPoint, kind: TwinKind) -> Result<ProductPoint> {
        self.split.validate(p)?;
        let d = self.shift(p, kind);
        Ok(ProductPoint::new(p.x1.clone(), SparseVec::sub(&p.x2, &d)))
    }

    /// Inverse map by Picard iteration y2 <- x2 + d(x1, y2); geometric with
    /// ratio at most 1/4.
    pub fn inverse_with_stats(
        &self,
        q: &ProductPoint,
        kind: TwinKind,
    ) -> Result<(ProductPoint, PicardStats)> {
        self.split.validate(q)?;
        let mut y2 = q.x2.clone();
        let mut ratios = Vec::new();
        let mut prev_delta = f64::INFINITY;
        for iteration in 1..=self.picard_cap {
            let probe = ProductPoint::new(q.x1.clone(), y2.clone());
            let next = SparseVec::add(&q.x2, &self.shift(&probe, kind));
            let delta = SparseVec::dist_l2(&next, &y2);
            y2 = next;
            if prev_delta.is_finite() && prev_delta > 0.0 {
                let ratio = delta / prev_delta;
                if delta > 10.0 * self.picard_tol {
                    ratios.push(ratio);
                    if ratio > 0.9 {
                        return Err(CoreError::ContractionViolation {
                            alpha: prev_delta,
                            beta: delta,
                            gap: ratio,
                        });
                    }
                }
            }
            if delta <= self.picard_tol {
                return Ok((
                    ProductPoint::new(q.x1.clone(), y2),
                    PicardStats {
                        iterations: iteration,
                        ratios,
                        final_delta: delta,
                    },
                ));
            }
            prev_delta = delta;
        }
        Err(CoreError::Optimization {
            iterations: self.picard_cap,
        })
    }

    pub fn inverse(&self, q: &ProductPoint, kind: TwinKind) -> Result<ProductPoint> {
        self.inverse_with_stats(q, kind).map(|(p, _)| p)
    }

    /// Spot-check the fiber contraction |d(x1,a) - d(x1,b)| <= |a-b| / 2 on
    /// sampled pairs.
    pub fn contraction_certificate(&self, pairs: &[(ProductPoint, SparseVec)]) -> Result<()> {
        for (p, other_x2) in pairs {
            let d1 = self.shift(p, TwinKind::Primary);
            let q = ProductPoint::new(p.x1.clone(), other_x2.clone());
            let d2 = self.shift(&q, TwinKind::Primary);
            let lhs = SparseVec::dist_l2(&d1, &d2);
            let rhs = 0.5 * SparseVec::dist_l2(&p.x2, other_x2);
            if lhs > rhs + 1e-12 {
                return Err(CoreError::ContractionViolation {
                    alpha: rhs,
                    beta: lhs,
                    gap: lhs - rhs,
                });
            }
        }
        Ok(())
    }
}
