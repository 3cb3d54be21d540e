//! Open windows with signed margins, and the tube construction that fits a
//! fiber-radius function under a window.

use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::extract::extension::smoothed_sq_distance;
use crate::seqspace::{ProductPoint, SparseVec};

/// An open set given by a signed margin: positive inside, with the margin a
/// lower bound for the distance to the complement (1-Lipschitz).
#[derive(Clone)]
pub enum Window {
    /// The whole space; margin capped at 1.
    All,
    /// Cylinder over a base ball: {x : |x1 - center| < radius}. The margin
    /// does not depend on the fiber coordinate.
    Cylinder { center: SparseVec, radius: f64 },
    /// Arbitrary margin callback.
    Custom(Arc<dyn Fn(&ProductPoint) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Window::All => write!(f, "Window::All"),
            Window::Cylinder { radius, .. } => write!(f, "Window::Cylinder(r={radius})"),
            Window::Custom(_) => write!(f, "Window::Custom"),
        }
    }
}

impl Window {
    pub fn margin(&self, p: &ProductPoint) -> f64 {
        match self {
            Window::All => 1.0,
            Window::Cylinder { center, radius } => radius - SparseVec::dist_l2(&p.x1, center),
            Window::Custom(m) => m(p),
        }
    }

    pub fn contains(&self, p: &ProductPoint) -> bool {
        self.margin(p) > 0.0
    }

    /// True when the margin ignores the fiber coordinate, so the window is
    /// carried unchanged by fiber-only homeomorphisms.
    pub fn base_only(&self) -> bool {
        matches!(self, Window::All | Window::Cylinder { .. })
    }
}

/// Tube data under a window: a fiber-radius function strictly between a
/// quarter and a half of the available depth, and the smoothed squared
/// distance to the base sample cloud.
#[derive(Debug, Clone)]
pub struct TubeWindow {
    base_samples: Vec<SparseVec>,
    window: Window,
    budget: f64,
}

/// Build the tube: radius 3/8 of min(budget/2, window depth at (x1, 0)).
pub fn tube_window(base_samples: &[SparseVec], window: Window, budget: f64) -> Result<TubeWindow> {
    if !(budget > 0.0) {
        return Err(CoreError::Domain {
            op: "tube_window",
            detail: format!("budget must be positive, got {budget}"),
        });
    }
    Ok(TubeWindow {
        base_samples: base_samples.to_vec(),
        window,
        budget,
    })
}

impl TubeWindow {
    /// Available depth G(x1) = min(budget/2, margin at (x1, 0)), clamped.
    pub fn shadow_depth(&self, x1: &SparseVec) -> f64 {
        let at_zero = ProductPoint::new(x1.clone(), SparseVec::zero());
        (0.5 * self.budget).min(self.window.margin(&at_zero)).max(0.0)
    }

    /// Fiber radius of the tube; strictly inside (G/4, G/2) wherever G > 0.
    pub fn tube_radius(&self, x1: &SparseVec) -> f64 {
        0.375 * self.shadow_depth(x1)
    }

    /// Smoothed squared distance to the base cloud; zero exactly on it.
    pub fn eta(&self, x1: &SparseVec) -> f64 {
        smoothed_sq_distance(&self.base_samples, x1)
    }

    /// The scheme exponent psi = eta / tube_radius on the shadow.
    pub fn psi(&self, x1: &SparseVec) -> Option<f64> {
        let r = self.tube_radius(x1);
        if r > 0.0 {
            Some(self.eta(x1) / r)
        } else {
            None
        }
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn base_samples(&self) -> &[SparseVec] {
        &self.base_samples
    }

    /// Verify on a corpus that every point inside the tube lies inside the
    /// window.
    pub fn verify(&self, corpus: &[ProductPoint]) -> Result<()> {
        for p in corpus {
            let r = self.tube_radius(&p.x1);
            if p.x2.norm_l2() < r && !self.window.contains(p) {
                return Err(CoreError::WindowConsistency {
                    margin: self.window.margin(p),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(pairs: &[(usize, f64)]) -> SparseVec {
        SparseVec::from_pairs(pairs).unwrap()
    }

    #[test]
    fn tube_radius_between_quarter_and_half_depth() {
        // Window depth 1 at the probe, budget 2: radius must land in (1/4, 1/2).
        let w = Window::Cylinder {
            center: SparseVec::zero(),
            radius: 1.0,
        };
        let tube = tube_window(&[SparseVec::zero()], w, 2.0).unwrap();
        let r = tube.tube_radius(&SparseVec::zero());
        assert!(r > 0.25 && r < 0.5, "radius {r}");
    }

    #[test]
    fn eta_vanishes_exactly_on_samples() {
        let samples = vec![pt(&[(1, 1.0)]), pt(&[(1, -1.0), (5, 2.0)])];
        let tube = tube_window(&samples, Window::All, 1.0).unwrap();
        for s in &samples {
            assert_eq!(tube.eta(s), 0.0);
        }
        assert!(tube.eta(&pt(&[(1, 0.5)])) > 0.0);
    }

    #[test]
    fn radius_vanishes_outside_window_shadow() {
        let w = Window::Cylinder {
            center: SparseVec::zero(),
            radius: 1.0,
        };
        let tube = tube_window(&[SparseVec::zero()], w, 2.0).unwrap();
        let far = pt(&[(1, 5.0)]);
        assert_eq!(tube.tube_radius(&far), 0.0);
        assert!(tube.psi(&far).is_none());
    }

    #[test]
    fn tube_verification_catches_escapes() {
        // A window that excludes the probe even though the probe is in the tube
        // of a (deliberately inconsistent) margin.
        let bad = Window::Custom(Arc::new(|p: &ProductPoint| {
            if p.x2.is_zero() {
                1.0
            } else {
                -1.0
            }
        }));
        let tube = tube_window(&[SparseVec::zero()], bad, 2.0).unwrap();
        let inside_tube = ProductPoint::new(SparseVec::zero(), pt(&[(2, 0.01)]));
        assert!(tube.verify(&[inside_tube]).is_err());
    }
}
