//! Smooth transition profiles with exact plateaus.

use serde::{Deserialize, Serialize};

use super::profile::profile;
use crate::error::{CoreError, Result};

/// A C-infinity monotone step: exactly 0 on one plateau, exactly 1 on the
/// other, with a known sup bound on the derivative between them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmoothStep {
    lo: f64,
    hi: f64,
    rising: bool,
    deriv_bound: f64,
}

impl SmoothStep {
    /// 0 for t <= lo, 1 for t >= hi.
    pub fn rising(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, true)
    }

    /// 1 for t <= lo, 0 for t >= hi.
    pub fn falling(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, false)
    }

    fn new(lo: f64, hi: f64, rising: bool) -> Result<Self> {
        if !(lo < hi) {
            return Err(CoreError::Domain {
                op: "SmoothStep::new",
                detail: format!("plateau edges out of order: {lo} >= {hi}"),
            });
        }
        let deriv_bound = profile().step_slope_max() / (hi - lo);
        Ok(SmoothStep {
            lo,
            hi,
            rising,
            deriv_bound,
        })
    }

    /// Verify the declared derivative bound by a grid scan; construction of a
    /// curve with a violated bound fails here.
    pub fn verify_bound(self, required: f64, grid: usize) -> Result<Self> {
        let width = self.hi - self.lo;
        let mut worst: f64 = 0.0;
        for i in 0..=grid {
            let t = self.lo + width * i as f64 / grid as f64;
            worst = worst.max(self.deriv(t).abs());
        }
        if worst > required {
            return Err(CoreError::Certification {
                what: "smooth-step derivative bound",
                tol: required,
                achieved: worst,
            });
        }
        Ok(SmoothStep {
            deriv_bound: required,
            ..self
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.rising {
            if t <= self.lo {
                0.0
            } else if t >= self.hi {
                1.0
            } else {
                profile().step((t - self.lo) / (self.hi - self.lo))
            }
        } else if t <= self.lo {
            1.0
        } else if t >= self.hi {
            0.0
        } else {
            profile().step((self.hi - t) / (self.hi - self.lo))
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let w = self.hi - self.lo;
        if t <= self.lo || t >= self.hi {
            return 0.0;
        }
        if self.rising {
            profile().step_deriv((t - self.lo) / w) / w
        } else {
            -profile().step_deriv((self.hi - t) / w) / w
        }
    }

    pub fn deriv_bound(&self) -> f64 {
        self.deriv_bound
    }

    pub fn edges(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}
