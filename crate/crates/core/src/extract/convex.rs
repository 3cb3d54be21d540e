//! Radial diffeomorphisms between convex bodies given by their gauges.
//!
//! For bodies U inside V the map multiplies each ray by a smooth blend of
//! the gauge ratio: identity near the origin, boundary onto boundary. The
//! general case routes through the intermediate body with gauge
//! mu_U + mu_V, which sits inside both.

use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::gauges::{OmegaFunctional, SmoothStep};
use crate::seqspace::SparseVec;

/// A positively homogeneous nonnegative gauge with optional gradient.
#[derive(Clone)]
pub struct Gauge {
    pub eval: Arc<dyn Fn(&SparseVec) -> f64 + Send + Sync>,
    pub grad: Option<Arc<dyn Fn(&SparseVec) -> Result<SparseVec> + Send + Sync>>,
}

impl std::fmt::Debug for Gauge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Gauge")
    }
}

impl Gauge {
    pub fn l2() -> Gauge {
        Gauge {
            eval: Arc::new(|v: &SparseVec| v.norm_l2()),
            grad: Some(Arc::new(|v: &SparseVec| {
                let n = v.norm_l2();
                if n == 0.0 {
                    Err(CoreError::SingularPoint { what: "l2 norm" })
                } else {
                    Ok(v.scale(1.0 / n))
                }
            })),
        }
    }

    pub fn from_omega(omega: OmegaFunctional) -> Gauge {
        let o1 = omega.clone();
        let o2 = omega;
        Gauge {
            eval: Arc::new(move |v: &SparseVec| o1.eval(v).expect("omega domain")),
            grad: Some(Arc::new(move |v: &SparseVec| o2.grad(v))),
        }
    }

    /// Weighted l4 gauge on a fixed coordinate set; strictly convex and
    /// suppression-unconditional, used as the non-Hilbert surrogate norm.
    pub fn weighted_l4(weights: Vec<(usize, f64)>) -> Gauge {
        let w1 = weights.clone();
        let w2 = weights;
        Gauge {
            eval: Arc::new(move |v: &SparseVec| {
                let mut acc = 0.0;
                for &(i, c) in &w1 {
                    acc += c * v.get(i).powi(4);
                }
                acc.powf(0.25)
            }),
            grad: Some(Arc::new(move |v: &SparseVec| {
                let mut acc = 0.0;
                for &(i, c) in &w2 {
                    acc += c * v.get(i).powi(4);
                }
                if acc == 0.0 {
                    return Err(CoreError::SingularPoint {
                        what: "weighted l4 gauge",
                    });
                }
                let scale = acc.powf(-0.75);
                let pairs: Vec<(usize, f64)> = w2
                    .iter()
                    .map(|&(i, c)| (i, scale * c * v.get(i).powi(3)))
                    .collect();
                SparseVec::from_pairs(&pairs)
            })),
        }
    }

    pub fn value(&self, v: &SparseVec) -> f64 {
        (self.eval)(v)
    }
}

/// Radial map carrying the unit body of `mu_u` onto the unit body of
/// `mu_v` (which must contain it), fixing the origin and every ray.
#[derive(Debug, Clone)]
pub struct RadialMap {
    mu_u: Gauge,
    mu_v: Gauge,
    blend: SmoothStep,
    ray_tol: f64,
}

impl RadialMap {
    pub fn new(mu_u: Gauge, mu_v: Gauge) -> Result<RadialMap> {
        Ok(RadialMap {
            mu_u,
            mu_v,
            blend: SmoothStep::rising(0.5, 1.0)?,
            ray_tol: 1e-12,
        })
    }

    fn factor(&self, x: &SparseVec) -> Result<f64> {
        let ru = self.mu_u.value(x);
        if ru == 0.0 {
            return Err(CoreError::InvalidGauge);
        }
        let t = self.blend.eval(ru);
        if t == 0.0 {
            return Ok(1.0); // identity near the origin, exactly
        }
        let rv = self.mu_v.value(x);
        if rv == 0.0 {
            return Err(CoreError::InvalidGauge);
        }
        Ok(t * ru / rv + (1.0 - t))
    }

    /// g(x) = (blend(mu_U) mu_U/mu_V + 1 - blend(mu_U)) x, g(0) = 0.
    pub fn forward(&self, x: &SparseVec) -> Result<SparseVec> {
        if x.is_zero() {
            return Ok(SparseVec::zero());
        }
        Ok(x.scale(self.factor(x)?))
    }

    /// Inverse along the ray by bisection on the scaling parameter.
    pub fn inverse(&self, y: &SparseVec) -> Result<SparseVec> {
        if y.is_zero() {
            return Ok(SparseVec::zero());
        }
        // Find c > 0 with c * factor(c y) = 1; radial monotonicity makes the
        // left side strictly increasing in c.
        let residual = |c: f64| -> Result<f64> { Ok(c * self.factor(&y.scale(c))? - 1.0) };
        let mut lo = 1.0;
        while residual(lo)? > 0.0 {
            lo *= 0.5;
            if lo < 1e-12 {
                return Err(CoreError::InvalidGauge);
            }
        }
        let mut hi = lo.max(1.0);
        while residual(hi)? < 0.0 {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(CoreError::InvalidGauge);
            }
        }
        while hi - lo > self.ray_tol * hi {
            let mid = 0.5 * (lo + hi);
            if residual(mid)? > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(y.scale(0.5 * (lo + hi)))
    }
}

/// Map the unit body of `mu_u` onto the unit body of `mu_v`, fixing the
/// origin and carrying boundary to boundary. Routes through the body with
/// gauge mu_U + mu_V, which lies inside both, so no containment between the
/// two bodies is assumed. (`RadialMap` is the cheaper direct form for the
/// known-containment case.)
pub fn convex_body_diffeo(mu_u: &Gauge, mu_v: &Gauge, x: &SparseVec) -> Result<SparseVec> {
    if x.is_zero() {
        return Ok(SparseVec::zero());
    }
    if mu_u.value(x) == 0.0 || mu_v.value(x) == 0.0 {
        return Err(CoreError::InvalidGauge);
    }
    let (u1, u2) = (mu_u.clone(), mu_v.clone());
    let mid = Gauge {
        eval: Arc::new(move |v: &SparseVec| u1.value(v) + u2.value(v)),
        grad: None,
    };
    let g1 = RadialMap::new(mid.clone(), mu_u.clone())?;
    let g2 = RadialMap::new(mid, mu_v.clone())?;
    g2.forward(&g1.inverse(x)?)
}
