//! Fixed points of semi-contractions on (0, infinity).
//!
//! For F with F(b) - F(a) <= (b-a)/2 on b >= a > 0 and positive limsup at
//! 0+, the residual G(a) = a - F(a) is strictly increasing with slope at
//! least 1/2, so the unique root is found by monotone-safe bisection with a
//! final secant polish.

use crate::error::{CoreError, Result};

pub struct FixedPointProblem<'a> {
    pub f: &'a dyn Fn(f64) -> f64,
    /// Initial bracket hint (expanded automatically when needed).
    pub bracket: (f64, f64),
    pub tol: f64,
}

impl<'a> FixedPointProblem<'a> {
    pub fn new(f: &'a dyn Fn(f64) -> f64, bracket: (f64, f64), tol: f64) -> Self {
        FixedPointProblem { f, bracket, tol }
    }
}

/// Solve F(a) = a. Returns the root with residual |F(a)-a| <= tol.
pub fn solve_fixed_point(p: &FixedPointProblem) -> Result<f64> {
    let f = p.f;
    let g = |a: f64| a - f(a);

    let (hint_lo, hint_hi) = p.bracket;
    let mut lo = hint_lo.max(1e-300);
    let mut tries = 0;
    while g(lo) > 0.0 {
        lo *= 0.25;
        tries += 1;
        if tries > 120 || lo < 1e-280 {
            return Err(CoreError::Bracket { lo, hi: hint_hi });
        }
    }
    // F is constant for a >= 1 when it comes from a scheme (the curve
    // vanishes there), so F(1) + 1 always clears the root.
    let mut hi = hint_hi.max(1.0).max(f(1.0) + 1.0);
    tries = 0;
    while g(hi) < 0.0 {
        hi = hi * 2.0 + 1.0;
        tries += 1;
        if tries > 64 {
            return Err(CoreError::Bracket { lo, hi });
        }
    }

    // Spot-check the semi-contraction property on the bracket.
    let samples = 6;
    for i in 0..samples {
        let a = lo + (hi - lo) * i as f64 / samples as f64;
        let b = lo + (hi - lo) * (i + 1) as f64 / samples as f64;
        let gap = f(b) - f(a);
        if gap > 0.5 * (b - a) + 1e-9 * (1.0 + b) {
            return Err(CoreError::ContractionViolation {
                alpha: a,
                beta: b,
                gap,
            });
        }
    }

    // G has slope >= 1/2, so |G(mid)| <= 1.5 * width bounds the residual.
    let mut glo = g(lo);
    let mut ghi = g(hi);
    let width_floor = (0.25 * p.tol).max(1e-15 * hi.max(1.0));
    while hi - lo > width_floor {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm >= 0.0 {
            hi = mid;
            ghi = gm;
        } else {
            lo = mid;
            glo = gm;
        }
        if glo == 0.0 {
            return Ok(lo);
        }
        if ghi == 0.0 {
            return Ok(hi);
        }
    }

    // One secant polish step.
    let mut root = if ghi != glo {
        lo - glo * (hi - lo) / (ghi - glo)
    } else {
        0.5 * (lo + hi)
    };
    if !(root > 0.0) || root.is_nan() {
        root = 0.5 * (lo + hi);
    }
    let residual = (f(root) - root).abs();
    if residual > p.tol {
        return Err(CoreError::Domain {
            op: "solve_fixed_point",
            detail: format!("residual {residual} above tolerance {}", p.tol),
        });
    }
    Ok(root)
}

/// Independent zooming grid-scan oracle at a given effective resolution.
///
/// Scans stages of `stage_points` points, brackets the sign change of
/// a - F(a), and recurses; strict monotonicity of the residual (validated
/// along every stage) makes the zoom equivalent to one flat scan at the
/// product resolution.
pub fn grid_scan_root(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    stage_points: usize,
    stages: usize,
) -> Result<f64> {
    let g = |a: f64| a - f(a);
    let mut a = lo;
    let mut b = hi;
    for _ in 0..stages {
        let mut prev_val = f64::NEG_INFINITY;
        let mut bracket: Option<(f64, f64)> = None;
        let mut prev_t = a;
        for i in 0..=stage_points {
            let t = a + (b - a) * i as f64 / stage_points as f64;
            let v = g(t);
            if v < prev_val - 1e-9 {
                return Err(CoreError::Domain {
                    op: "grid_scan_root",
                    detail: format!("residual not monotone near {t}"),
                });
            }
            if v >= 0.0 && bracket.is_none() {
                bracket = Some((prev_t, t));
                break;
            }
            prev_val = v;
            prev_t = t;
        }
        match bracket {
            Some((x, y)) => {
                a = x;
                b = y;
            }
            None => return Err(CoreError::Bracket { lo: a, hi: b }),
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_map_fixed_point() {
        let f = |_: f64| 0.37;
        let p = FixedPointProblem::new(&f, (0.01, 2.0), 1e-10);
        let root = solve_fixed_point(&p).unwrap();
        assert!((root - 0.37).abs() < 1e-10);
    }

    #[test]
    fn linear_semicontraction_fixed_point() {
        let f = |a: f64| 1.0 + 0.5 * a;
        let p = FixedPointProblem::new(&f, (0.01, 1.0), 1e-10);
        let root = solve_fixed_point(&p).unwrap();
        assert!((root - 2.0).abs() < 1e-9);
    }

    #[test]
    fn contraction_violation_detected() {
        // Brackets a root but runs at slope 2 on the way there.
        let f = |a: f64| (0.3 + 2.0 * a).min(0.9);
        let p = FixedPointProblem::new(&f, (0.01, 1.0), 1e-10);
        assert!(matches!(
            solve_fixed_point(&p),
            Err(CoreError::ContractionViolation { .. })
        ));
    }

    #[test]
    fn no_root_gives_bracket_error() {
        // F below the diagonal everywhere near 0 and with F < a globally.
        let f = |a: f64| 0.25 * a;
        let p = FixedPointProblem::new(&f, (0.5, 2.0), 1e-10);
        assert!(matches!(
            solve_fixed_point(&p),
            Err(CoreError::Bracket { .. })
        ));
    }

    #[test]
    fn grid_scan_agrees_with_bisection() {
        let f = |a: f64| 1.0 + 0.5 * (-a).exp();
        let p = FixedPointProblem::new(&f, (0.01, 4.0), 1e-12);
        let root = solve_fixed_point(&p).unwrap();
        let scanned = grid_scan_root(&f, 1e-6, 4.0, 100, 3).unwrap();
        assert!(
            (root - scanned).abs() < 1e-4,
            "bisection {root} vs scan {scanned}"
        );
        assert!((f(root) - root).abs() < 1e-12);
    }
}
