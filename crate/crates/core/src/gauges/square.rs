//! The smooth square: a C-infinity symmetric convex body in the plane whose
//! boundary contains flat segments around the coordinate axes, so its
//! Minkowski gauge locally equals a single coordinate's absolute value.
//!
//! First-quadrant boundary: the segments [0,1/2] x {1} and {1} x [0,1/2]
//! joined by a convex corner arc with all-derivatives-flat contact. The arc
//! is built in 45-degree rotated coordinates (p along the diagonal, q across
//! it): its curvature is a compactly supported bump, so p'(q) sweeps from +1
//! to -1 and matches the straight segments to infinite order at both ends.

use crate::error::{CoreError, Result};

use super::profile::profile;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Half-width of the corner arc in the rotated chart: q in [-Q, Q].
fn q_half() -> f64 {
    1.0 / (2.0 * SQRT2)
}

/// p at the arc endpoints, the rotated image of (1, 1/2) and (1/2, 1).
fn p_end() -> f64 {
    3.0 / (2.0 * SQRT2)
}

/// Exact arc height: p(q) = p_end + (q+Q) - 4Q K((q+Q)/2Q) on [-Q, Q],
/// extended by the straight segments p = sqrt(2) - |q| beyond.
fn arc_exact(q: f64) -> f64 {
    let big_q = q_half();
    if q.abs() >= big_q {
        return SQRT2 - q.abs();
    }
    let u = (q + big_q) / (2.0 * big_q);
    p_end() + (q + big_q) - 4.0 * big_q * profile().basic_step_area(u)
}

/// Exact arc slope: p'(q) = 1 - 2 I((q+Q)/2Q), clamped to +-1 on segments.
fn arc_slope(q: f64) -> f64 {
    let big_q = q_half();
    if q <= -big_q {
        1.0
    } else if q >= big_q {
        -1.0
    } else {
        1.0 - 2.0 * profile().basic_step((q + big_q) / (2.0 * big_q))
    }
}

#[derive(Debug, Clone)]
pub struct SmoothSquare {
    /// Cached arc table: (p, p') at equally spaced q-knots over [-Q, Q].
    knots: Vec<(f64, f64)>,
    ray_tol: f64,
}

impl SmoothSquare {
    pub fn new(arc_table_len: usize) -> Self {
        let n = arc_table_len.max(16);
        let big_q = q_half();
        let knots = (0..=n)
            .map(|i| {
                let q = -big_q + 2.0 * big_q * i as f64 / n as f64;
                (arc_exact(q), arc_slope(q))
            })
            .collect();
        SmoothSquare {
            knots,
            ray_tol: 1e-12,
        }
    }

    pub fn arc_table_len(&self) -> usize {
        self.knots.len() - 1
    }

    /// Arc height from the cached table (Hermite between knots with exact
    /// endpoint slopes), segments exact beyond.
    fn arc(&self, q: f64) -> f64 {
        let big_q = q_half();
        if q.abs() >= big_q {
            return SQRT2 - q.abs();
        }
        let n = self.knots.len() - 1;
        let h = 2.0 * big_q / n as f64;
        let pos = (q + big_q) / h;
        let i = (pos as usize).min(n - 1);
        let u = pos - i as f64;
        let (p0, d0) = self.knots[i];
        let (p1, d1) = self.knots[i + 1];
        let u2 = u * u;
        let u3 = u2 * u;
        p0 * (2.0 * u3 - 3.0 * u2 + 1.0)
            + h * d0 * (u3 - 2.0 * u2 + u)
            + p1 * (-2.0 * u3 + 3.0 * u2)
            + h * d1 * (u3 - u2)
    }

    /// Minkowski gauge of the body.
    pub fn mu(&self, a: f64, b: f64) -> f64 {
        let (x, y) = (a.abs(), b.abs());
        if x == 0.0 && y == 0.0 {
            return 0.0;
        }
        // Flat-segment regions: exact single-coordinate values.
        if y <= 0.5 * x {
            return x;
        }
        if x <= 0.5 * y {
            return y;
        }
        // Corner region: intersect the ray with the arc. With s = 1/mu the
        // equation s*p0 = p(s*q0) has a unique root; the left side grows in s
        // and the right side has slope |p'| <= 1 < p0/|q0|.
        let p0 = (x + y) / SQRT2;
        let q0 = (x - y) / SQRT2;
        let mut lo = 0.0f64;
        let mut hi = (SQRT2 + 1.0) / p0;
        debug_assert!(hi * p0 - self.arc(hi * q0) > 0.0);
        while hi - lo > self.ray_tol * hi {
            let mid = 0.5 * (lo + hi);
            if mid * p0 - self.arc(mid * q0) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        2.0 / (lo + hi)
    }

    /// Gradient of the gauge by implicit differentiation of the
    /// ray-boundary intersection. Undefined at the origin.
    pub fn mu_grad(&self, a: f64, b: f64) -> Result<(f64, f64)> {
        let (x, y) = (a.abs(), b.abs());
        if x == 0.0 && y == 0.0 {
            return Err(CoreError::SingularPoint {
                what: "smooth-square gauge",
            });
        }
        let (gx, gy) = if y <= 0.5 * x {
            (1.0, 0.0)
        } else if x <= 0.5 * y {
            (0.0, 1.0)
        } else {
            let t = self.mu(x, y);
            let p0 = (x + y) / SQRT2;
            let q0 = (x - y) / SQRT2;
            let dp = arc_slope(q0 / t);
            let denom = SQRT2 * (p0 - dp * q0);
            (t * (1.0 - dp) / denom, t * (1.0 + dp) / denom)
        };
        Ok((gx * a.signum(), gy * b.signum()))
    }
}

impl Default for SmoothSquare {
    fn default() -> Self {
        SmoothSquare::new(4096)
    }
}
