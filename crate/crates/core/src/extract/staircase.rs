//! The staircase interpolator F(r, x1): a smooth homotopy between ever-finer
//! approximants of the extended data, with r-derivative uniformly below 1/2
//! and F(r, .) equal to the data for r >= 1 on the sample set.

use crate::error::{CoreError, Result};
use crate::extract::extension::{extend_function, smoothed_sq_distance, SmoothExtension};
use crate::gauges::SmoothStep;
use crate::seqspace::SparseVec;

struct StairLevel {
    approx: SmoothExtension,
    /// Blend toward the exact extension near the sample set: 0 close to it,
    /// 1 far from it (thresholds in smoothed squared distance).
    lambda: SmoothStep,
    certified: f64,
}

pub struct Staircase {
    base: SmoothExtension,
    base_cloud: Vec<SparseVec>,
    levels: Vec<StairLevel>,
    profiles: Vec<SmoothStep>,
    series: usize,
}

/// Find a regularization making the Shepard approximant deviate from the
/// exact extension by at most `tol` on the certification corpus.
fn certify_approximant(
    samples: &[(SparseVec, SparseVec)],
    base: &SmoothExtension,
    corpus: &[SparseVec],
    tol: f64,
    what: &'static str,
) -> Result<(SmoothExtension, f64)> {
    let mut sigma = 1.0;
    for _ in 0..200 {
        let candidate = SmoothExtension::regularized(samples, sigma)?;
        let worst = corpus
            .iter()
            .map(|x| candidate.deviation_at(x, &base.eval(x)))
            .fold(0.0f64, f64::max);
        if worst <= tol {
            return Ok((candidate, worst));
        }
        sigma *= 0.5;
    }
    Err(CoreError::Certification {
        what,
        tol,
        achieved: f64::NAN,
    })
}

impl Staircase {
    /// Build from graph samples. `corpus` is the certification corpus for
    /// the approximant sup-error bounds 2^-(2n+4).
    pub fn build(
        samples: &[(SparseVec, SparseVec)],
        corpus: &[SparseVec],
        series: usize,
    ) -> Result<Staircase> {
        let base = extend_function(samples, false)?;
        let base_cloud: Vec<SparseVec> = samples.iter().map(|(p, _)| p.clone()).collect();
        let mut levels = Vec::with_capacity(series + 1);
        for n in 1..=series + 1 {
            let tol = 2f64.powi(-(2 * n as i32) - 4);
            let (approx, certified) =
                certify_approximant(samples, &base, corpus, tol, "staircase approximant")?;
            // lambda_n: 0 while the smoothed squared distance is below
            // 1/(n+1)^2, 1 beyond 1/n^2.
            let lo = 1.0 / ((n + 1) as f64 * (n + 1) as f64);
            let hi = 1.0 / (n as f64 * n as f64);
            let lambda = SmoothStep::rising(lo, hi)?;
            levels.push(StairLevel {
                approx,
                lambda,
                certified,
            });
        }
        let mut profiles = Vec::with_capacity(series);
        for n in 1..=series {
            // h_(n+1): 0 below 1 - 2^-n, 1 above 1 - 2^-(n+1); slope at most
            // (4/3) 2^(n+1) <= 2^(n+2).
            let lo = 1.0 - 2f64.powi(-(n as i32));
            let hi = 1.0 - 2f64.powi(-(n as i32) - 1);
            profiles.push(SmoothStep::rising(lo, hi)?);
        }
        let stair = Staircase {
            base,
            base_cloud,
            levels,
            profiles,
            series,
        };
        stair.certify_gaps(corpus)?;
        Ok(stair)
    }

    /// Verify the level gaps |f_(n+1) - f_n| <= 2^-(2n+3) on the corpus.
    fn certify_gaps(&self, corpus: &[SparseVec]) -> Result<()> {
        for x in corpus {
            let values = self.level_values(x);
            for n in 0..self.series {
                let gap = SparseVec::dist_l2(&values[n + 1], &values[n]);
                let bound = 2f64.powi(-(2 * (n as i32 + 1)) - 3);
                if gap > bound {
                    return Err(CoreError::Certification {
                        what: "staircase level gap",
                        tol: bound,
                        achieved: gap,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn base(&self) -> &SmoothExtension {
        &self.base
    }

    pub fn series(&self) -> usize {
        self.series
    }

    pub fn certified_errors(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.certified).collect()
    }

    /// The blended levels f_1 .. f_(series+1) at a base point.
    fn level_values(&self, x1: &SparseVec) -> Vec<SparseVec> {
        let base_val = self.base.eval(x1);
        let eta = smoothed_sq_distance(&self.base_cloud, x1);
        self.levels
            .iter()
            .map(|level| {
                let lam = level.lambda.eval(eta);
                if lam == 1.0 {
                    base_val.clone()
                } else {
                    let approx_val = level.approx.eval(x1);
                    SparseVec::add_scaled(lam, &base_val, &approx_val.scale(1.0 - lam))
                }
            })
            .collect()
    }

    /// F(r, x1).
    pub fn eval(&self, r: f64, x1: &SparseVec) -> SparseVec {
        let values = self.level_values(x1);
        let mut acc = values[0].clone();
        for n in 0..self.series {
            let weight = self.profiles[n].eval(r);
            if weight != 0.0 {
                let gap = SparseVec::sub(&values[n + 1], &values[n]);
                acc = SparseVec::add_scaled(weight, &gap, &acc);
            }
        }
        acc
    }

    /// dF/dr (r, x1) as a fiber vector.
    pub fn deriv_r(&self, r: f64, x1: &SparseVec) -> SparseVec {
        let values = self.level_values(x1);
        let mut acc = SparseVec::zero();
        for n in 0..self.series {
            let slope = self.profiles[n].deriv(r);
            if slope != 0.0 {
                let gap = SparseVec::sub(&values[n + 1], &values[n]);
                acc = SparseVec::add_scaled(slope, &gap, &acc);
            }
        }
        acc
    }
}
