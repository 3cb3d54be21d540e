//! End-to-end composition: build the smooth approximant, choose the
//! oscillation cover, extract the critical candidates by a displacement
//! limited by that cover, and return g = phi o h with a chain-rule
//! Jacobian and a per-sample report.

use serde::Serialize;

use crate::config::BlockLayout;
use crate::error::{CoreError, Result};
use crate::extract::graph::{graph_extraction, GraphExtraction, GraphSpec};
use crate::extract::window::Window;
use crate::gauges::GaugeKit;
use crate::linalg::ColMatrix;
use crate::seqspace::{ProductSplit, SparseVec};
use crate::smoothing::approximant::Approximant;
use crate::smoothing::certify::{critical_certificate, Verdict};
use crate::smoothing::cover::{build_ball_cover, CoverConfig, RmMap, ScalarField};
use crate::smoothing::operators::block_operators;

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub dim: usize,
    pub layout: BlockLayout,
    pub target_dim: usize,
    pub tau_rank: f64,
    pub series_terms: usize,
    /// Extract through the cover centers even when every certificate is
    /// already surjective, so the displacement scan is exercised.
    pub force_extraction: bool,
    pub cover: CoverConfig,
}

impl PipelineConfig {
    pub fn standard(dim: usize, target_dim: usize) -> Result<PipelineConfig> {
        Ok(PipelineConfig {
            dim,
            layout: BlockLayout::standard(dim)?,
            target_dim,
            tau_rank: 1e-6,
            series_terms: 12,
            force_extraction: false,
            cover: CoverConfig::default(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineSample {
    pub id: usize,
    pub x: SparseVec,
    pub err: f64,
    pub eps: f64,
    pub phi_err: f64,
    pub sigma_min: f64,
    pub verdict: Verdict,
    pub displacement: f64,
    /// Both the point and its image lie in a single oscillation-cover ball.
    pub cover_limited: bool,
    pub guard: bool,
    pub active: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfigEcho {
    pub dim: usize,
    pub target_dim: usize,
    pub tau_rank: f64,
    pub force_extraction: bool,
    pub balls: usize,
    pub extraction_stage: bool,
    pub budget: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub samples: Vec<PipelineSample>,
    pub config: PipelineConfigEcho,
}

pub struct Pipeline {
    pub approximant: Approximant,
    extraction: Option<GraphExtraction>,
    split: ProductSplit,
    /// Oscillation-cover radius per corpus point (same order as the corpus).
    pub cover_radii: Vec<f64>,
    budget: f64,
    config: PipelineConfig,
}

/// Evaluation of the composed map at a point.
pub struct GEval {
    pub value: Vec<f64>,
    pub jacobian: ColMatrix,
    pub moved_point: SparseVec,
    pub displacement: f64,
}

pub fn compose_pipeline(
    f: &RmMap,
    eps: &ScalarField,
    corpus: &[SparseVec],
    config: PipelineConfig,
) -> Result<Pipeline> {
    let data = config.layout.data();
    for x in corpus {
        for i in x.support() {
            if !data.contains(&i) {
                return Err(CoreError::Domain {
                    op: "compose_pipeline",
                    detail: format!("corpus index {i} outside the data block"),
                });
            }
        }
    }

    let cover = build_ball_cover(f, eps, corpus, &data, &config.cover)
        .map_err(|e| e.in_stage("ball-cover"))?;
    let ops = block_operators(config.target_dim, &cover, &config.layout.guarded)
        .map_err(|e| e.in_stage("block-operators"))?;
    let approximant = Approximant::new(cover, ops).map_err(|e| e.in_stage("approximant"))?;

    // Oscillation cover: per corpus point, the largest probed radius (within
    // the coverage slack) on which the approximant oscillates at most
    // eps(z)/4.
    let mut cover_radii = Vec::with_capacity(corpus.len());
    for z in corpus {
        let radius = oscillation_radius(&approximant, eps, z)
            .map_err(|e| e.in_stage("oscillation-cover"))?;
        cover_radii.push(radius);
    }

    // Critical candidates for extraction.
    let mut candidates: Vec<SparseVec> = Vec::new();
    if config.force_extraction {
        candidates.extend(approximant.cover.balls.iter().map(|b| b.center.clone()));
    } else {
        for x in corpus {
            let cert =
                critical_certificate(&approximant, &config.layout.guarded, x, config.tau_rank)?;
            if cert.verdict != Verdict::Surjective {
                candidates.push(x.clone());
            }
        }
    }

    let budget = 0.9
        * cover_radii
            .iter()
            .fold(f64::INFINITY, |acc, &r| acc.min(r));
    let split = ProductSplit::new(
        {
            let mut base = data.clone();
            base.extend(config.layout.guarded.iter().copied());
            base
        },
        config.layout.extraction.clone(),
    )?;

    let extraction = if candidates.is_empty() {
        None
    } else {
        let kit = GaugeKit::for_fiber(config.layout.extraction.clone(), Vec::new())?;
        let spec = GraphSpec {
            graph_values: vec![SparseVec::zero(); candidates.len()],
            base_samples: candidates.clone(),
            window: Window::All,
            budget,
        };
        let mut cert_corpus = candidates;
        cert_corpus.extend(corpus.iter().take(50).cloned());
        Some(
            graph_extraction(&spec, split.clone(), kit, config.series_terms, &cert_corpus)
                .map_err(|e| e.in_stage("extraction"))?,
        )
    };

    Ok(Pipeline {
        approximant,
        extraction,
        split,
        cover_radii,
        budget,
        config,
    })
}

/// Shrink a probe radius until the approximant's sampled oscillation around
/// `z` stays below eps(z)/4.
fn oscillation_radius(approx: &Approximant, eps: &ScalarField, z: &SparseVec) -> Result<f64> {
    let slack = approx
        .cover
        .balls
        .iter()
        .map(|b| b.radius - SparseVec::dist_l2(z, &b.center))
        .fold(0.0f64, f64::max);
    if slack <= 0.0 {
        return Err(CoreError::Coverage);
    }
    let bound = 0.25 * {
        // eps at z via the cover certificates: eps itself is available to
        // callers; here we only need a sampled value.
        eps(z)
    };
    let base_val = approx.value(z)?;
    let dirs: Vec<usize> = z.support().take(4).collect();
    let dirs = if dirs.is_empty() { vec![1] } else { dirs };
    let mut radius = slack * 0.99;
    for _ in 0..60 {
        let mut worst: f64 = 0.0;
        let mut all_covered = true;
        for &i in &dirs {
            for sign in [-1.0, 1.0] {
                let probe = SparseVec::add_scaled(sign * radius, &SparseVec::basis(i), z);
                match approx.value(&probe) {
                    Ok(v) => {
                        let gap: f64 = v
                            .iter()
                            .zip(&base_val)
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                            .sqrt();
                        worst = worst.max(2.0 * gap);
                    }
                    Err(_) => {
                        all_covered = false;
                    }
                }
            }
        }
        if all_covered && worst <= bound {
            return Ok(radius);
        }
        radius *= 0.5;
        if radius < 1e-9 {
            return Err(CoreError::Cover { min_radius: 1e-9 });
        }
    }
    Err(CoreError::Cover { min_radius: 1e-9 })
}

impl Pipeline {
    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn has_extraction(&self) -> bool {
        self.extraction.is_some()
    }

    pub fn extraction(&self) -> Option<&GraphExtraction> {
        self.extraction.as_ref()
    }

    /// The inner displacement map h: identity when no extraction stage was
    /// needed, otherwise the inverse of the composed graph extraction.
    pub fn displace(&self, x: &SparseVec) -> Result<SparseVec> {
        match &self.extraction {
            None => Ok(x.clone()),
            Some(ext) => {
                let p = self.split.split(x)?;
                let q = ext.inverse(&p)?;
                Ok(self.split.join(&q))
            }
        }
    }

    /// g(x) = phi(h(x)) with the chain-rule Jacobian
    /// Dg(x) = Dphi(h(x)) Dh(x), Dh by central differences over the active
    /// coordinates.
    pub fn eval_g(&self, x: &SparseVec) -> Result<GEval> {
        let moved = self.displace(x)?;
        let displacement = SparseVec::dist_l2(&moved, x);
        let (value, jac_phi) = self.approximant.eval(&moved)?;
        if self.extraction.is_none() {
            return Ok(GEval {
                value,
                jacobian: jac_phi,
                moved_point: moved,
                displacement,
            });
        }
        let mut cols: Vec<usize> = jac_phi.cols.clone();
        for i in x.support() {
            if !cols.contains(&i) {
                cols.push(i);
            }
        }
        cols.sort_unstable();
        let tau = 1e-6;
        let mut chain = ColMatrix::zeros(jac_phi.rows, cols.clone());
        for &col in &cols {
            let e = SparseVec::basis(col);
            let plus = self.displace(&SparseVec::add_scaled(tau, &e, x))?;
            let minus = self.displace(&SparseVec::add_scaled(-tau, &e, x))?;
            let dh = SparseVec::sub(&plus, &minus).scale(1.0 / (2.0 * tau));
            let col_vals = jac_phi.apply(&dh);
            for (r, v) in col_vals.iter().enumerate() {
                if *v != 0.0 {
                    chain.add_at(r, col, *v);
                }
            }
        }
        Ok(GEval {
            value,
            jacobian: chain,
            moved_point: moved,
            displacement,
        })
    }

    /// View the composed map as a differentiable map, e.g. for the
    /// smoothness-upgrade combinator.
    pub fn as_differentiable(self: &std::sync::Arc<Self>) -> crate::smoothing::DifferentiableMap {
        let value_self = std::sync::Arc::clone(self);
        let jac_self = std::sync::Arc::clone(self);
        crate::smoothing::DifferentiableMap {
            value: std::sync::Arc::new(move |x| value_self.eval_g(x).map(|e| e.value)),
            jacobian: std::sync::Arc::new(move |x| jac_self.eval_g(x).map(|e| e.jacobian)),
        }
    }

    /// Per-sample report over the corpus, in corpus order.
    pub fn report(
        &self,
        f: &RmMap,
        eps: &ScalarField,
        corpus: &[SparseVec],
    ) -> Result<PipelineReport> {
        let mut samples = Vec::with_capacity(corpus.len());
        for (id, x) in corpus.iter().enumerate() {
            let eval = self.eval_g(x)?;
            let want = f(x);
            let err: f64 = eval
                .value
                .iter()
                .zip(&want)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let phi_val = self.approximant.value(x)?;
            let phi_err: f64 = phi_val
                .iter()
                .zip(&want)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let sigma_min = eval.jacobian.sigma_min();
            let verdict = if sigma_min >= self.config.tau_rank {
                Verdict::Surjective
            } else if sigma_min >= self.config.tau_rank / 10.0 {
                Verdict::Inconclusive
            } else {
                Verdict::NotSurjective
            };
            let cert = critical_certificate(
                &self.approximant,
                &self.config.layout.guarded,
                &eval.moved_point,
                self.config.tau_rank,
            )?;
            let cover_limited = self.approximant.cover.balls.iter().any(|b| {
                SparseVec::dist_l2(x, &b.center) < b.radius
                    && SparseVec::dist_l2(&eval.moved_point, &b.center) < b.radius
            });
            let pe = self.approximant.partition.eval(x)?;
            samples.push(PipelineSample {
                id,
                x: x.clone(),
                err,
                eps: eps(x),
                phi_err,
                sigma_min,
                verdict,
                displacement: eval.displacement,
                cover_limited,
                guard: cert.guard,
                active: pe.active,
            });
        }
        Ok(PipelineReport {
            samples,
            config: PipelineConfigEcho {
                dim: self.config.dim,
                target_dim: self.config.target_dim,
                tau_rank: self.config.tau_rank,
                force_extraction: self.config.force_extraction,
                balls: self.approximant.cover.balls.len(),
                extraction_stage: self.extraction.is_some(),
                budget: self.budget,
            },
        })
    }
}

/// The canonical nonsmooth demo map: componentwise absolute value of two
/// chosen data coordinates, into R^2.
pub fn componentwise_abs(i1: usize, i2: usize) -> RmMap {
    std::sync::Arc::new(move |x: &SparseVec| vec![x.get(i1).abs(), x.get(i2).abs()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use std::sync::Arc;

    fn clustered_corpus(layout: &BlockLayout, seed: u64, n: usize) -> Vec<SparseVec> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let d = [layout.data1[0], layout.data2[0], layout.data1[1]];
        let centers: Vec<Vec<(usize, f64)>> = (0..4)
            .map(|k| {
                d.iter()
                    .map(|&i| (i, 0.01 * (k as f64 + 1.0) * if i % 4 == 1 { 1.0 } else { -0.7 }))
                    .collect()
            })
            .collect();
        (0..n)
            .map(|_| {
                let c = &centers[rng.gen_range(0..centers.len())];
                let pairs: Vec<(usize, f64)> = c
                    .iter()
                    .map(|&(i, v)| (i, v + rng.gen_range(-8e-4..8e-4)))
                    .collect();
                SparseVec::from_pairs(&pairs).unwrap()
            })
            .collect()
    }

    #[test]
    fn trivial_pipeline_without_extraction() {
        // Certificates all pass and extraction is not forced: h = identity.
        let config = PipelineConfig::standard(64, 2).unwrap();
        let layout = config.layout.clone();
        let f = componentwise_abs(layout.data1[0], layout.data2[0]);
        let eps: ScalarField = Arc::new(|x: &SparseVec| 0.1 * (1.0 + x.norm_l2()));
        let corpus = clustered_corpus(&layout, 5, 60);
        let pipeline = compose_pipeline(&f, &eps, &corpus, config).unwrap();
        assert!(!pipeline.has_extraction());
        for x in &corpus {
            let eval = pipeline.eval_g(x).unwrap();
            assert_eq!(eval.displacement, 0.0);
        }
    }

    #[test]
    fn forced_extraction_moves_points_inside_cover() {
        let mut config = PipelineConfig::standard(64, 2).unwrap();
        config.force_extraction = true;
        let layout = config.layout.clone();
        let f = componentwise_abs(layout.data1[0], layout.data2[0]);
        let eps: ScalarField = Arc::new(|x: &SparseVec| 0.1 * (1.0 + x.norm_l2()));
        let corpus = clustered_corpus(&layout, 7, 80);
        let pipeline = compose_pipeline(&f, &eps, &corpus, config).unwrap();
        assert!(pipeline.has_extraction());
        let report = pipeline
            .report(&f, &eps, &corpus)
            .expect("report generation");
        let mut moved = 0;
        for s in &report.samples {
            assert!(s.err <= s.eps, "sample {} err {} vs eps {}", s.id, s.err, s.eps);
            assert!(s.phi_err <= 0.5 * s.eps);
            assert!(s.sigma_min >= 1e-6);
            assert_eq!(s.verdict, Verdict::Surjective);
            assert!(s.cover_limited, "sample {} escaped its cover ball", s.id);
            if s.displacement > 0.0 {
                moved += 1;
                assert!(s.displacement <= pipeline.budget());
            }
        }
        assert!(moved > 0, "forced extraction moved nothing");
    }

    #[test]
    fn pipeline_feeds_the_smoothness_upgrade() {
        let config = PipelineConfig::standard(64, 2).unwrap();
        let layout = config.layout.clone();
        let f = componentwise_abs(layout.data1[0], layout.data2[0]);
        let eps: ScalarField = Arc::new(|x: &SparseVec| 0.1 * (1.0 + x.norm_l2()));
        let corpus = clustered_corpus(&layout, 13, 40);
        let pipeline =
            Arc::new(compose_pipeline(&f, &eps, &corpus, config).unwrap());
        let map = pipeline.as_differentiable();
        // Identity oracle: certificates trivially pass.
        let upgraded =
            crate::smoothing::upgrade_smoothness(&map, &map.clone(), &eps, &corpus).unwrap();
        let x = &corpus[0];
        assert_eq!(
            (upgraded.value)(x).unwrap(),
            pipeline.eval_g(x).unwrap().value
        );
    }

    #[test]
    fn chain_rule_matches_end_to_end_differences() {
        let mut config = PipelineConfig::standard(64, 2).unwrap();
        config.force_extraction = true;
        let layout = config.layout.clone();
        let f = componentwise_abs(layout.data1[0], layout.data2[0]);
        let eps: ScalarField = Arc::new(|x: &SparseVec| 0.1 * (1.0 + x.norm_l2()));
        let corpus = clustered_corpus(&layout, 11, 50);
        let pipeline = compose_pipeline(&f, &eps, &corpus, config).unwrap();
        let h = 5e-6;
        for x in corpus.iter().take(5) {
            let eval = pipeline.eval_g(x).unwrap();
            for &dir in eval.jacobian.cols.iter().take(6) {
                let e = SparseVec::basis(dir);
                let plus = pipeline
                    .eval_g(&SparseVec::add_scaled(h, &e, x))
                    .unwrap()
                    .value;
                let minus = pipeline
                    .eval_g(&SparseVec::add_scaled(-h, &e, x))
                    .unwrap()
                    .value;
                for r in 0..2 {
                    let fd = (plus[r] - minus[r]) / (2.0 * h);
                    let an = eval
                        .jacobian
                        .col_pos(dir)
                        .map(|c| eval.jacobian.get(r, c))
                        .unwrap_or(0.0);
                    assert!(
                        (fd - an).abs() <= 1e-4 * (1.0 + an.abs()),
                        "chain rule mismatch at dir {dir}: {fd} vs {an}"
                    );
                }
            }
        }
    }
}
