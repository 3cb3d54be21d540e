//! Criticality certificates: singular-value verdicts with an explicit
//! inconclusive band, the guarded-coordinate predicate, and the
//! suppression-basis gradient check.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::extract::convex::Gauge;
use crate::seqspace::SparseVec;
use crate::smoothing::approximant::Approximant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Surjective,
    Inconclusive,
    NotSurjective,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalCertificate {
    pub sigma_min: f64,
    pub verdict: Verdict,
    /// True when the point has a nonzero coordinate outside the reserved
    /// block and above the center-span bound: the structural sufficient
    /// condition for surjectivity.
    pub guard: bool,
    pub n_x: usize,
    pub span_bound: usize,
}

/// Verdict for the approximant's derivative at a point.
pub fn critical_certificate(
    approx: &Approximant,
    reserved: &[usize],
    x: &SparseVec,
    tau_rank: f64,
) -> Result<CriticalCertificate> {
    let pe = approx.partition.eval(x)?;
    let (_, jac) = approx.eval(x)?;
    let sigma_min = jac.sigma_min();
    let verdict = if sigma_min >= tau_rank {
        Verdict::Surjective
    } else if sigma_min >= tau_rank / 10.0 {
        Verdict::Inconclusive
    } else {
        Verdict::NotSurjective
    };
    let span_bound = approx.cover.span_bound(pe.n_x);
    let reserved_set: std::collections::BTreeSet<usize> = reserved.iter().copied().collect();
    let guard = x
        .iter()
        .any(|(i, v)| v != 0.0 && !reserved_set.contains(&i) && i > span_bound);
    Ok(CriticalCertificate {
        sigma_min,
        verdict,
        guard,
        n_x: pe.n_x,
        span_bound,
    })
}

/// Suppression check: with a strictly convex suppression-unconditional
/// gauge, a nonzero coordinate forces the gauge gradient to see it. Returns
/// false (not applicable) when the coordinate vanishes.
pub fn suppression_check(gauge: &Gauge, j0: usize, w: &SparseVec, tau_rank: f64) -> Result<bool> {
    if w.is_zero() {
        return Err(CoreError::Domain {
            op: "suppression_check",
            detail: "gradient undefined at 0".into(),
        });
    }
    let coord = w.get(j0);
    if coord == 0.0 {
        return Ok(false);
    }
    let grad = match &gauge.grad {
        Some(g) => g(w)?,
        None => {
            // central differences as the fallback gradient
            let h = 1e-6;
            let e = SparseVec::basis(j0);
            let fd = (gauge.value(&SparseVec::add_scaled(h, &e, w))
                - gauge.value(&SparseVec::add_scaled(-h, &e, w)))
                / (2.0 * h);
            return Ok(fd.abs() >= tau_rank * coord.abs() / w.norm_l2().max(1e-300));
        }
    };
    let pairing = grad.get(j0).abs();
    Ok(pairing >= tau_rank * coord.abs() / w.norm_l2().max(1e-300))
}
