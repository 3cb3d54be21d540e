//! A smooth partition of unity subordinate to a ball cover, with the
//! derivative bookkeeping needed by the criticality analysis: every weight
//! gradient is a finite combination of the ray directions (x - center_j),
//! and the combination coefficients are exposed.

use crate::error::{CoreError, Result};
use crate::gauges::SmoothStep;
use crate::seqspace::SparseVec;
use crate::smoothing::cover::BallCover;

pub struct PartitionOfUnity {
    /// One falling step per ball, in squared distance: exactly 1 inside the
    /// plateau, exactly 0 outside the ball.
    steps: Vec<SmoothStep>,
    centers: Vec<SparseVec>,
}

/// Evaluation of the partition at a point.
#[derive(Debug, Clone)]
pub struct PartitionEval {
    /// Balls with a nonzero raw bump at the point.
    pub active: Vec<usize>,
    /// Normalized weights, indexed like `active`; sums to 1.
    pub weights: Vec<f64>,
    /// Assembled weight gradients, indexed like `active`.
    pub grads: Vec<SparseVec>,
    /// Coefficient table: grads[k] = sum_j sigma[k][j] * (x - center_(dirs[j])).
    pub dirs: Vec<usize>,
    pub sigma: Vec<Vec<f64>>,
    /// Bound on the active index set at this point (local finiteness).
    pub n_x: usize,
    /// Largest ball index with a nonzero bump.
    pub m_y: usize,
}

impl PartitionOfUnity {
    pub fn new(cover: &BallCover) -> Result<PartitionOfUnity> {
        let mut steps = Vec::with_capacity(cover.balls.len());
        let mut centers = Vec::with_capacity(cover.balls.len());
        for b in &cover.balls {
            steps.push(SmoothStep::falling(
                b.plateau * b.plateau,
                b.radius * b.radius,
            )?);
            centers.push(b.center.clone());
        }
        Ok(PartitionOfUnity { steps, centers })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Raw bump of ball k: step_k(|x - c_k|^2), exact plateaus.
    pub fn bump(&self, k: usize, x: &SparseVec) -> f64 {
        let d = SparseVec::dist_l2(x, &self.centers[k]);
        self.steps[k].eval(d * d)
    }

    /// Structural gradient of the raw product bump h_k; exactly zero
    /// wherever h_k vanishes (every term carries an exact-zero factor).
    pub fn product_bump_grad(&self, k: usize, x: &SparseVec) -> SparseVec {
        let (active, _, grads, _, _) = self.raw_eval(x);
        match active.iter().position(|&a| a == k) {
            Some(pos) => grads[pos].clone(),
            None => SparseVec::zero(),
        }
    }

    /// The raw product bump h_k itself.
    pub fn product_bump(&self, k: usize, x: &SparseVec) -> f64 {
        let (active, bumps, _, _, _) = self.raw_eval(x);
        match active.iter().position(|&a| a == k) {
            Some(pos) => bumps[pos],
            None => 0.0,
        }
    }

    /// Raw (unnormalized) evaluation: active set, product bumps h_k, their
    /// gradients, and the direction decomposition.
    #[allow(clippy::type_complexity)]
    fn raw_eval(
        &self,
        x: &SparseVec,
    ) -> (Vec<usize>, Vec<f64>, Vec<SparseVec>, Vec<usize>, Vec<Vec<f64>>) {
        // Balls whose bump or bump-gradient can be nonzero at x.
        let mut in_support: Vec<(usize, f64, f64)> = Vec::new(); // (k, phi, dphi-coef)
        for k in 0..self.steps.len() {
            let diff = SparseVec::sub(x, &self.centers[k]);
            let d_sq = SparseVec::inner(&diff, &diff);
            let phi = self.steps[k].eval(d_sq);
            if phi == 0.0 {
                continue;
            }
            // d/dx of step(d^2) = step'(d^2) * 2 (x - c); keep the scalar.
            let coef = 2.0 * self.steps[k].deriv(d_sq);
            in_support.push((k, phi, coef));
            if phi == 1.0 {
                break; // later product bumps vanish identically with zero grads
            }
        }

        let dirs: Vec<usize> = in_support.iter().map(|&(k, _, _)| k).collect();
        let mut active = Vec::new();
        let mut bumps = Vec::new();
        let mut sigma: Vec<Vec<f64>> = Vec::new();

        // h_k = phi_k * prod_(j<k) (1 - phi_j), gradients by product rule in
        // direction coordinates.
        for (pos, &(k, phi_k, coef_k)) in in_support.iter().enumerate() {
            let mut prefix = 1.0;
            for &(_, phi_j, _) in &in_support[..pos] {
                prefix *= 1.0 - phi_j;
            }
            let h = phi_k * prefix;
            let mut coeffs = vec![0.0; in_support.len()];
            // d(phi_k) term
            if coef_k != 0.0 && prefix != 0.0 {
                coeffs[pos] = coef_k * prefix;
            }
            // d(prefix) terms
            if phi_k != 0.0 {
                for (l, &(_, _, coef_l)) in in_support[..pos].iter().enumerate() {
                    if coef_l == 0.0 {
                        continue;
                    }
                    let mut partial = 1.0;
                    for (j, &(_, phi_j, _)) in in_support[..pos].iter().enumerate() {
                        if j != l {
                            partial *= 1.0 - phi_j;
                        }
                    }
                    if partial != 0.0 {
                        coeffs[l] = -phi_k * coef_l * partial;
                    }
                }
            }
            if h != 0.0 || coeffs.iter().any(|&c| c != 0.0) {
                active.push(k);
                bumps.push(h);
                sigma.push(coeffs);
            }
        }

        let grads: Vec<SparseVec> = sigma
            .iter()
            .map(|coeffs| {
                let mut acc = SparseVec::zero();
                for (j, &c) in coeffs.iter().enumerate() {
                    if c != 0.0 {
                        let dir = SparseVec::sub(x, &self.centers[dirs[j]]);
                        acc = SparseVec::add_scaled(c, &dir, &acc);
                    }
                }
                acc
            })
            .collect();

        (active, bumps, grads, dirs, sigma)
    }

    /// Normalized evaluation with weight gradients; errors when uncovered.
    pub fn eval(&self, x: &SparseVec) -> Result<PartitionEval> {
        let (active, bumps, raw_grads, dirs, raw_sigma) = self.raw_eval(x);
        let total: f64 = bumps.iter().sum();
        if !(total > 0.0) {
            return Err(CoreError::Coverage);
        }
        let weights: Vec<f64> = bumps.iter().map(|h| h / total).collect();

        // Gradient of the total.
        let mut total_coeffs = vec![0.0; dirs.len()];
        for coeffs in &raw_sigma {
            for (j, &c) in coeffs.iter().enumerate() {
                total_coeffs[j] += c;
            }
        }

        // Quotient rule in coefficient space.
        let mut sigma: Vec<Vec<f64>> = Vec::with_capacity(active.len());
        for (k, coeffs) in raw_sigma.iter().enumerate() {
            let w = weights[k];
            sigma.push(
                coeffs
                    .iter()
                    .zip(&total_coeffs)
                    .map(|(&c, &tc)| (c - w * tc) / total)
                    .collect(),
            );
        }
        let grads: Vec<SparseVec> = sigma
            .iter()
            .map(|coeffs| {
                let mut acc = SparseVec::zero();
                for (j, &c) in coeffs.iter().enumerate() {
                    if c != 0.0 {
                        let dir = SparseVec::sub(x, &self.centers[dirs[j]]);
                        acc = SparseVec::add_scaled(c, &dir, &acc);
                    }
                }
                acc
            })
            .collect();
        let _ = raw_grads;

        let n_x = active.iter().max().copied().unwrap_or(0) + 1;
        let m_y = active
            .iter()
            .zip(&bumps)
            .filter(|(_, &h)| h != 0.0)
            .map(|(&k, _)| k)
            .max()
            .unwrap_or(0);
        Ok(PartitionEval {
            active,
            weights,
            grads,
            dirs,
            sigma,
            n_x,
            m_y,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smoothing::cover::{build_ball_cover, CoverConfig, RmMap, ScalarField};
    use rand::{Rng, SeedableRng};
    use std::sync::Arc;

    fn cover_of(corpus: &[SparseVec]) -> BallCover {
        let f: RmMap = Arc::new(|x: &SparseVec| vec![x.get(1)]);
        let eps: ScalarField = Arc::new(|_| 1.0);
        build_ball_cover(&f, &eps, corpus, &[1, 3], &CoverConfig::default()).unwrap()
    }

    fn pt(pairs: &[(usize, f64)]) -> SparseVec {
        SparseVec::from_pairs(pairs).unwrap()
    }

    #[test]
    fn single_active_ball_gets_weight_one() {
        let corpus = vec![pt(&[(1, 0.0)]), pt(&[(1, 5.0)])];
        let cover = cover_of(&corpus);
        let pu = PartitionOfUnity::new(&cover).unwrap();
        let eval = pu.eval(&corpus[0]).unwrap();
        assert_eq!(eval.active.len(), 1);
        assert_eq!(eval.weights[0], 1.0);
        assert!(eval.grads[0].is_zero());
    }

    #[test]
    fn uncovered_point_errors() {
        let corpus = vec![pt(&[(1, 0.0)])];
        let cover = cover_of(&corpus);
        let pu = PartitionOfUnity::new(&cover).unwrap();
        assert!(matches!(
            pu.eval(&pt(&[(1, 100.0)])),
            Err(CoreError::Coverage)
        ));
    }

    #[test]
    fn weights_sum_to_one_and_gradients_cancel() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(71);
        let corpus: Vec<SparseVec> = (0..40)
            .map(|_| {
                pt(&[
                    (1, rng.gen_range(-0.2..0.2)),
                    (3, rng.gen_range(-0.2..0.2)),
                ])
            })
            .collect();
        let cover = cover_of(&corpus);
        let pu = PartitionOfUnity::new(&cover).unwrap();
        for x in &corpus {
            let eval = pu.eval(x).unwrap();
            let sum: f64 = eval.weights.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-12, "sum {sum}");
            let mut grad_sum = SparseVec::zero();
            for g in &eval.grads {
                grad_sum = SparseVec::add(&grad_sum, g);
            }
            assert!(
                grad_sum.norm_l2() <= 1e-10,
                "gradient sum {}",
                grad_sum.norm_l2()
            );
            assert!(eval.active.iter().all(|&k| k < eval.n_x));
            assert!(eval.m_y < eval.n_x);
        }
    }

    #[test]
    fn weight_gradients_match_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(73);
        let corpus: Vec<SparseVec> = (0..30)
            .map(|_| {
                pt(&[
                    (1, rng.gen_range(-0.15..0.15)),
                    (3, rng.gen_range(-0.15..0.15)),
                ])
            })
            .collect();
        let cover = cover_of(&corpus);
        let pu = PartitionOfUnity::new(&cover).unwrap();
        let h = 1e-6;
        for x in corpus.iter().take(10) {
            let eval = pu.eval(x).unwrap();
            for dir in [1usize, 3] {
                let e = SparseVec::basis(dir);
                let plus = pu.eval(&SparseVec::add_scaled(h, &e, x)).unwrap();
                let minus = pu.eval(&SparseVec::add_scaled(-h, &e, x)).unwrap();
                for (pos, &k) in eval.active.iter().enumerate() {
                    let wp = plus
                        .active
                        .iter()
                        .position(|&a| a == k)
                        .map(|p| plus.weights[p])
                        .unwrap_or(0.0);
                    let wm = minus
                        .active
                        .iter()
                        .position(|&a| a == k)
                        .map(|p| minus.weights[p])
                        .unwrap_or(0.0);
                    let fd = (wp - wm) / (2.0 * h);
                    let an = eval.grads[pos].get(dir);
                    assert!(
                        (fd - an).abs() <= 1e-6 * (1.0 + an.abs()),
                        "ball {k} dir {dir}: fd {fd} vs {an}"
                    );
                }
            }
        }
    }

    #[test]
    fn bump_vanishing_is_structural() {
        // Wherever a product bump vanishes, its assembled gradient is the
        // exact zero vector.
        let corpus = vec![pt(&[(1, 0.0)]), pt(&[(1, 0.05)]), pt(&[(1, 5.0)])];
        let cover = cover_of(&corpus);
        let pu = PartitionOfUnity::new(&cover).unwrap();
        let probes = vec![pt(&[(1, 5.0)]), pt(&[(1, 0.02)]), pt(&[(1, -0.3)])];
        for x in &probes {
            for k in 0..pu.len() {
                if pu.bump(k, x) == 0.0 {
                    // raw product bump zero: gradient must be exactly zero
                    let (active, bumps, grads, _, _) = pu.raw_eval(x);
                    if let Some(pos) = active.iter().position(|&a| a == k) {
                        if bumps[pos] == 0.0 {
                            assert!(grads[pos].is_zero(), "nonzero grad at dead bump");
                        }
                    }
                }
            }
        }
    }
}
