//! Oscillation-controlled ball covers with linear-independence bookkeeping
//! for the centers.

use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::linalg::SpanLedger;
use crate::seqspace::SparseVec;

pub type RmMap = Arc<dyn Fn(&SparseVec) -> Vec<f64> + Send + Sync>;
pub type ScalarField = Arc<dyn Fn(&SparseVec) -> f64 + Send + Sync>;

#[derive(Debug, Clone)]
pub struct Ball {
    pub center: SparseVec,
    pub radius: f64,
    /// Inner plateau radius of the ball's bump.
    pub plateau: f64,
    pub eps_center: f64,
    pub f_center: Vec<f64>,
    /// Max ledger span index after this ball was admitted.
    pub span_bound: usize,
}

#[derive(Debug, Clone)]
pub struct CoverConfig {
    pub initial_radius: f64,
    pub min_radius: f64,
    pub plateau_ratio: f64,
    /// Oscillation certificates demand osc <= eps(center) / osc_divisor.
    pub osc_divisor: f64,
    /// Gram residual threshold for center independence.
    pub independence_residual: f64,
    pub perturbation: f64,
}

impl Default for CoverConfig {
    fn default() -> Self {
        CoverConfig {
            initial_radius: 1.0,
            min_radius: 1e-7,
            plateau_ratio: 0.6,
            osc_divisor: 16.0,
            independence_residual: 1e-8,
            perturbation: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BallCover {
    pub balls: Vec<Ball>,
    /// Whether the independence ledger ran out of fresh directions.
    pub ledger_saturated: bool,
}

impl BallCover {
    pub fn balls_containing(&self, x: &SparseVec) -> Vec<usize> {
        self.balls
            .iter()
            .enumerate()
            .filter(|(_, b)| SparseVec::dist_l2(x, &b.center) < b.radius)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn covers(&self, x: &SparseVec) -> bool {
        self.balls
            .iter()
            .any(|b| SparseVec::dist_l2(x, &b.center) < b.radius)
    }

    /// Max ledger span index among the first `n` balls (1-based bound).
    pub fn span_bound(&self, n: usize) -> usize {
        self.balls
            .iter()
            .take(n.max(1))
            .map(|b| b.span_bound)
            .max()
            .unwrap_or(0)
    }
}

/// Greedy cover of the corpus by balls whose oscillation certificates pass.
/// Centers are kept linearly independent while unused data directions
/// remain; afterwards the ledger saturates and centers are taken as-is.
pub fn build_ball_cover(
    f: &RmMap,
    eps: &ScalarField,
    corpus: &[SparseVec],
    data_indices: &[usize],
    cfg: &CoverConfig,
) -> Result<BallCover> {
    if corpus.is_empty() {
        return Err(CoreError::Domain {
            op: "build_ball_cover",
            detail: "empty corpus".into(),
        });
    }
    let f_vals: Vec<Vec<f64>> = corpus.iter().map(|x| f(x)).collect();
    let eps_vals: Vec<f64> = corpus.iter().map(|x| eps(x)).collect();
    for (i, e) in eps_vals.iter().enumerate() {
        if !(*e > 0.0) {
            return Err(CoreError::Domain {
                op: "build_ball_cover",
                detail: format!("eps must be positive, got {e} at corpus point {i}"),
            });
        }
    }

    let mut ledger = SpanLedger::default();
    let mut saturated = false;
    let mut balls: Vec<Ball> = Vec::new();
    let mut covered = vec![false; corpus.len()];

    while let Some(seed) = covered.iter().position(|c| !c) {
        // Independence bookkeeping, with deterministic perturbation along
        // the first unused data direction while one exists.
        let mut center = corpus[seed].clone();
        if !ledger.accept(&center, cfg.independence_residual) {
            let unused = data_indices
                .iter()
                .find(|i| !ledger.span_indices.contains(i))
                .copied();
            match unused {
                Some(dir) => {
                    center = SparseVec::add_scaled(
                        cfg.perturbation,
                        &SparseVec::basis(dir),
                        &center,
                    );
                    if !ledger.accept(&center, cfg.independence_residual) {
                        saturated = true;
                    }
                }
                None => saturated = true,
            }
        }

        let eps_center = eps(&center);
        let f_center = f(&center);
        let osc_bound = eps_center / cfg.osc_divisor;

        let mut radius = cfg.initial_radius;
        let radius = loop {
            let members: Vec<usize> = (0..corpus.len())
                .filter(|&i| SparseVec::dist_l2(&corpus[i], &center) < radius)
                .collect();
            let mut osc_f: f64 = 0.0;
            let mut osc_eps: f64 = 0.0;
            for (a, &i) in members.iter().enumerate() {
                // center participates as a virtual member
                let df: f64 = f_vals[i]
                    .iter()
                    .zip(&f_center)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                osc_f = osc_f.max(df);
                osc_eps = osc_eps.max((eps_vals[i] - eps_center).abs());
                for &j in &members[a + 1..] {
                    let dff: f64 = f_vals[i]
                        .iter()
                        .zip(&f_vals[j])
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt();
                    osc_f = osc_f.max(dff);
                    osc_eps = osc_eps.max((eps_vals[i] - eps_vals[j]).abs());
                }
            }
            if osc_f <= osc_bound && osc_eps <= osc_bound {
                break radius;
            }
            radius *= 0.5;
            if radius < cfg.min_radius {
                return Err(CoreError::Cover {
                    min_radius: cfg.min_radius,
                });
            }
        };

        for (i, c) in covered.iter_mut().enumerate() {
            if !*c && SparseVec::dist_l2(&corpus[i], &center) < radius {
                *c = true;
            }
        }
        // The seed itself must fall inside its ball even when perturbed.
        if SparseVec::dist_l2(&corpus[seed], &center) >= radius {
            covered[seed] = true;
        }
        balls.push(Ball {
            center,
            radius,
            plateau: cfg.plateau_ratio * radius,
            eps_center,
            f_center,
            span_bound: ledger.max_index(),
        });
    }

    Ok(BallCover {
        balls,
        ledger_saturated: saturated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn constant_maps(v: Vec<f64>, e: f64) -> (RmMap, ScalarField) {
        (
            Arc::new(move |_: &SparseVec| v.clone()),
            Arc::new(move |_: &SparseVec| e),
        )
    }

    #[test]
    fn constant_data_needs_single_ball() {
        let (f, eps) = constant_maps(vec![1.0, 2.0], 0.5);
        let corpus: Vec<SparseVec> = (0..50)
            .map(|i| SparseVec::from_pairs(&[(1, i as f64 * 0.001)]).unwrap())
            .collect();
        let cover = build_ball_cover(&f, &eps, &corpus, &[1, 3, 5], &CoverConfig::default())
            .unwrap();
        assert_eq!(cover.balls.len(), 1);
        for x in &corpus {
            assert!(cover.covers(x));
        }
    }

    #[test]
    fn norm_map_radius_capped_by_oscillation() {
        // f(x) = |x| with eps = 1 on a dense radial grid: the oscillation of
        // f over a radius-r ball approaches 2r, so admitted radii sit at or
        // below 1/16 (plus shrink granularity).
        let f: RmMap = Arc::new(|x: &SparseVec| vec![x.norm_l2()]);
        let eps: ScalarField = Arc::new(|_| 1.0);
        let corpus: Vec<SparseVec> = (0..=500)
            .map(|i| SparseVec::from_pairs(&[(1, 0.2 + i as f64 * 0.002)]).unwrap())
            .collect();
        let cover =
            build_ball_cover(&f, &eps, &corpus, &[1, 3], &CoverConfig::default()).unwrap();
        for b in &cover.balls {
            assert!(b.radius <= 1.0 / 16.0 + 1e-12, "radius {}", b.radius);
        }
        for x in &corpus {
            assert!(cover.covers(x), "corpus point left uncovered");
        }
    }

    #[test]
    fn oscillation_certificates_hold_on_membership_scan() {
        let f: RmMap = Arc::new(|x: &SparseVec| vec![x.get(1), x.get(3) * 0.5]);
        let eps: ScalarField = Arc::new(|x: &SparseVec| 0.5 * (1.0 + x.norm_l2()));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(67);
        let corpus: Vec<SparseVec> = (0..80)
            .map(|_| {
                SparseVec::from_pairs(&[
                    (1, rng.gen_range(-1.0..1.0)),
                    (3, rng.gen_range(-1.0..1.0)),
                ])
                .unwrap()
            })
            .collect();
        let cover =
            build_ball_cover(&f, &eps, &corpus, &[1, 3], &CoverConfig::default()).unwrap();
        for b in &cover.balls {
            for x in &corpus {
                if SparseVec::dist_l2(x, &b.center) < b.radius {
                    let e = eps(x);
                    assert!(e >= (15.0 / 16.0) * b.eps_center - 1e-12);
                    assert!(e <= (17.0 / 16.0) * b.eps_center + 1e-12);
                }
            }
        }
    }

    #[test]
    fn unachievable_oscillation_reports_cover_error() {
        // Oscillation of order one between arbitrarily close corpus points:
        // no admissible radius exists above the floor.
        let f: RmMap = Arc::new(|x: &SparseVec| vec![(1e9 * x.get(1)).sin()]);
        let eps: ScalarField = Arc::new(|_| 0.5);
        let corpus: Vec<SparseVec> = (1..=20)
            .map(|i| SparseVec::from_pairs(&[(1, i as f64 * 1e-8)]).unwrap())
            .collect();
        let result = build_ball_cover(&f, &eps, &corpus, &[1, 3], &CoverConfig::default());
        assert!(matches!(
            result,
            Err(crate::error::CoreError::Cover { .. })
        ));
    }

    #[test]
    fn dependent_centers_perturbed_into_independence() {
        // All corpus points on one line: ledger forces perturbations.
        let (f, eps) = constant_maps(vec![0.0], 1.0);
        let corpus: Vec<SparseVec> = (1..=4)
            .map(|i| SparseVec::from_pairs(&[(1, i as f64 * 10.0)]).unwrap())
            .collect();
        let cfg = CoverConfig {
            initial_radius: 1.0,
            ..Default::default()
        };
        let cover = build_ball_cover(&f, &eps, &corpus, &[1, 3, 5, 7], &cfg).unwrap();
        assert!(cover.balls.len() >= 4);
        // Later centers picked up perturbation coordinates.
        let with_extra = cover
            .balls
            .iter()
            .filter(|b| b.center.support_len() > 1)
            .count();
        assert!(with_extra >= 3, "perturbations missing");
        assert!(!cover.ledger_saturated);
    }
}
