//! Argmin graph section: for a strictly convex gauge, minimize
//! v -> gauge(w + v) over a coordinate block by cyclic coordinate descent
//! with golden-section line searches.

use crate::error::{CoreError, Result};
use crate::extract::convex::Gauge;
use crate::seqspace::SparseVec;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// One-dimensional golden-section minimizer on a bracketing interval.
fn golden_section(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut c = hi - GOLDEN * (hi - lo);
    let mut d = lo + GOLDEN * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - GOLDEN * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + GOLDEN * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Minimizer of v -> gauge(w + v) over the target coordinates, to 1e-10.
/// The returned minimizer is the graph-section value at w.
pub fn graph_section(w: &SparseVec, target: &[usize], gauge: &Gauge) -> Result<SparseVec> {
    let mut v = SparseVec::zero();
    let max_line_searches = 10_000;
    let mut searches = 0;
    loop {
        let mut sweep_move: f64 = 0.0;
        for &i in target {
            searches += 1;
            if searches > max_line_searches {
                return Err(CoreError::Optimization {
                    iterations: max_line_searches,
                });
            }
            let e = SparseVec::basis(i);
            let base = SparseVec::add(w, &v);
            let line = |t: f64| gauge.value(&SparseVec::add_scaled(t, &e, &base));
            // Bracket the minimizer of the convex section.
            let f0 = line(0.0);
            let mut s = 1.0;
            let mut grew = 0;
            while line(s) < f0 || line(-s) < f0 {
                s *= 2.0;
                grew += 1;
                if grew > 60 {
                    return Err(CoreError::Optimization { iterations: grew });
                }
            }
            let mut t_star = golden_section(&line, -s, s, 1e-12);
            if t_star.abs() < 1e-12 || line(t_star) >= f0 {
                t_star = 0.0; // no resolvable improvement: keep the coordinate exact
            }
            if t_star != 0.0 {
                v = v.with_coord(i, v.get(i) + t_star);
                sweep_move = sweep_move.max(t_star.abs());
            }
        }
        if sweep_move <= 1e-10 {
            return Ok(v);
        }
    }
}
