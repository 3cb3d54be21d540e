//! Extraction of a sampled graph piece: flatten the graph to the zero
//! section, run the scheme-based extraction inside a tube (conjugated by the
//! radial map that trades the fiber ball for the omega body), and unflatten
//! with the windowed twin. The composition deletes the sampled graph over
//! the window, is the identity far from it, and moves no point more than
//! the displacement budget.

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::extract::convex::{Gauge, RadialMap};
use crate::extract::flatten::FlattenMaps;
use crate::extract::twin::TwinKind;
use crate::extract::window::{tube_window, TubeWindow, Window};
use crate::gauges::GaugeKit;
use crate::seqspace::{ProductPoint, ProductSplit, SparseVec};

/// A sampled graph over the base block, the window over which it is
/// removed, and the displacement budget.
#[derive(Debug, Clone)]
pub struct GraphSpec {
    pub base_samples: Vec<SparseVec>,
    pub graph_values: Vec<SparseVec>,
    pub window: Window,
    pub budget: f64,
}

impl GraphSpec {
    pub fn samples(&self) -> Vec<(SparseVec, SparseVec)> {
        self.base_samples
            .iter()
            .cloned()
            .zip(self.graph_values.iter().cloned())
            .collect()
    }
}

/// Per-sample record of an extraction run.
#[derive(Debug, Clone, Serialize)]
pub struct ExtractionRecord {
    pub input: SparseVec,
    pub output: SparseVec,
    pub displacement: f64,
    pub rho: Option<f64>,
    pub alpha: Option<f64>,
    pub roundtrip_error: f64,
}

pub struct GraphExtraction {
    flatten: std::sync::Arc<FlattenMaps>,
    tube: TubeWindow,
    kit: GaugeKit,
    radial: RadialMap,
    split: ProductSplit,
    budget: f64,
    excluded_tol: f64,
    fp_tol: f64,
}

/// Build the composed extraction map for a graph spec.
pub fn graph_extraction(
    spec: &GraphSpec,
    split: ProductSplit,
    kit: GaugeKit,
    series: usize,
    corpus: &[SparseVec],
) -> Result<GraphExtraction> {
    if spec.base_samples.len() != spec.graph_values.len() {
        return Err(CoreError::Domain {
            op: "graph_extraction",
            detail: "sample/value length mismatch".into(),
        });
    }
    if !(spec.budget > 0.0) {
        return Err(CoreError::Domain {
            op: "graph_extraction",
            detail: format!("budget must be positive, got {}", spec.budget),
        });
    }
    for v in &spec.graph_values {
        for i in v.support() {
            if !split.second.contains(&i) {
                return Err(CoreError::Domain {
                    op: "graph_extraction",
                    detail: format!("graph value carries non-fiber index {i}"),
                });
            }
        }
    }
    let samples = spec.samples();
    let flatten = std::sync::Arc::new(
        FlattenMaps::build(
            &samples,
            spec.window.clone(),
            split.clone(),
            (0.5 * spec.budget).min(1.0),
            series,
            corpus,
        )
        .map_err(|e| e.in_stage("flatten"))?,
    );

    // Window for the flattened picture. Fiber-preserving flattening leaves
    // base-only windows unchanged; otherwise pull the margin back through
    // the primary inverse, halved to stay a lower bound under the
    // flattening's fiber bi-Lipschitz constants.
    let inner_window = if spec.window.base_only() {
        spec.window.clone()
    } else {
        let w = spec.window.clone();
        let pullback = std::sync::Arc::clone(&flatten);
        Window::Custom(std::sync::Arc::new(move |p: &ProductPoint| {
            match pullback.inverse(p, TwinKind::Primary) {
                Ok(q) => 0.5 * w.margin(&q),
                Err(_) => -1.0,
            }
        }))
    };

    // Inner displacement budget: a quarter of the total, so that after the
    // inverse flattening (2-Lipschitz in the fiber) the inner move costs at
    // most half, and the twin closeness covers the other half.
    let tube = tube_window(&spec.base_samples, inner_window, 0.25 * spec.budget)
        .map_err(|e| e.in_stage("tube-window"))?;

    let radial = RadialMap::new(Gauge::l2(), Gauge::from_omega(kit.omega.clone()))
        .map_err(|e| e.in_stage("radial"))?;

    Ok(GraphExtraction {
        flatten,
        tube,
        kit,
        radial,
        split,
        budget: spec.budget,
        excluded_tol: 1e-9,
        fp_tol: 1e-10,
    })
}

impl GraphExtraction {
    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// Override the fixed-point residual tolerance of the inner inverse.
    pub fn with_fp_tol(mut self, tol: f64) -> Self {
        self.fp_tol = tol;
        self
    }

    pub fn tube(&self) -> &TubeWindow {
        &self.tube
    }

    pub fn flatten(&self) -> &FlattenMaps {
        &self.flatten
    }

    pub fn split(&self) -> &ProductSplit {
        &self.split
    }

    /// The scheme step on flattened coordinates, with its gauge value.
    /// Exact identity outside the tube and wherever the gauge is >= 1.
    pub fn inner_forward(&self, z: &ProductPoint) -> Result<(ProductPoint, Option<f64>)> {
        let radius = self.tube.tube_radius(&z.x1);
        if radius <= 0.0 || z.x2.norm_l2() >= radius {
            return Ok((z.clone(), None));
        }
        let psi_val = self.tube.eta(&z.x1) / radius;
        let v = self.radial.forward(&z.x2.scale(1.0 / radius))?;
        if psi_val <= self.excluded_tol && v.norm_l2() <= self.excluded_tol {
            return Err(CoreError::ExcludedSet {
                tol: self.excluded_tol,
            });
        }
        let rho = self.kit.rho(psi_val, &v)?;
        if rho >= 1.0 {
            return Ok((z.clone(), Some(rho)));
        }
        let moved = SparseVec::add(&v, &self.kit.curve.eval(rho)?);
        let x2 = self.radial.inverse(&moved)?.scale(radius);
        Ok((ProductPoint::new(z.x1.clone(), x2), Some(rho)))
    }

    /// Inverse of the scheme step, with the fixed-point parameter.
    pub fn inner_inverse(&self, w: &ProductPoint) -> Result<(ProductPoint, Option<f64>)> {
        let radius = self.tube.tube_radius(&w.x1);
        if radius <= 0.0 || w.x2.norm_l2() >= radius {
            return Ok((w.clone(), None));
        }
        let psi_val = self.tube.eta(&w.x1) / radius;
        let v = self.radial.forward(&w.x2.scale(1.0 / radius))?;
        let rho_here = self.kit.rho(psi_val, &v)?;
        if rho_here >= 1.0 {
            return Ok((w.clone(), Some(rho_here)));
        }
        let residual = |alpha: f64| -> f64 {
            let shift = self.kit.curve.eval(alpha).expect("alpha > 0 in bracket");
            let moved = SparseVec::sub(&v, &shift);
            self.kit.rho(psi_val, &moved).expect("nonnegative psi")
        };
        let problem = crate::extract::fixed_point::FixedPointProblem::new(
            &residual,
            (1e-6, 2.0),
            self.fp_tol,
        );
        let alpha = crate::extract::fixed_point::solve_fixed_point(&problem)
            .map_err(|e| e.in_stage("inner-fixed-point"))?;
        let moved = SparseVec::sub(&v, &self.kit.curve.eval(alpha)?);
        let x2 = self.radial.inverse(&moved)?.scale(radius);
        Ok((ProductPoint::new(w.x1.clone(), x2), Some(alpha)))
    }

    /// Full forward composition: unflatten(windowed) . inner . flatten(primary).
    /// Defined off the retained graph; deletes the graph piece over the window.
    pub fn forward(&self, p: &ProductPoint) -> Result<ProductPoint> {
        let z = self
            .flatten
            .forward(p, TwinKind::Primary)
            .map_err(|e| e.in_stage("flatten-forward"))?;
        let (w, _) = self.inner_forward(&z).map_err(|e| e.in_stage("inner"))?;
        self.flatten
            .inverse(&w, TwinKind::Windowed)
            .map_err(|e| e.in_stage("unflatten"))
    }

    /// Full inverse composition; defined everywhere, range misses the
    /// deleted graph piece.
    pub fn inverse(&self, q: &ProductPoint) -> Result<ProductPoint> {
        self.inverse_with_alpha(q).map(|(p, _)| p)
    }

    pub fn inverse_with_alpha(&self, q: &ProductPoint) -> Result<(ProductPoint, Option<f64>)> {
        let w = self
            .flatten
            .forward(q, TwinKind::Windowed)
            .map_err(|e| e.in_stage("flatten-forward"))?;
        let (z, alpha) = self.inner_inverse(&w).map_err(|e| e.in_stage("inner"))?;
        let p = self
            .flatten
            .inverse(&z, TwinKind::Primary)
            .map_err(|e| e.in_stage("unflatten"))?;
        Ok((p, alpha))
    }

    /// Gauge value at the flattened image of a point (for reports).
    pub fn rho_at(&self, p: &ProductPoint) -> Result<Option<f64>> {
        let z = self.flatten.forward(p, TwinKind::Primary)?;
        let radius = self.tube.tube_radius(&z.x1);
        if radius <= 0.0 || z.x2.norm_l2() >= radius {
            return Ok(None);
        }
        let psi_val = self.tube.eta(&z.x1) / radius;
        let v = self.radial.forward(&z.x2.scale(1.0 / radius))?;
        Ok(Some(self.kit.rho(psi_val, &v)?))
    }

    /// Evaluate the map over a corpus, producing per-sample records.
    pub fn evaluate_corpus(&self, corpus: &[ProductPoint]) -> Result<Vec<ExtractionRecord>> {
        let mut records = Vec::with_capacity(corpus.len());
        for p in corpus {
            let rho = self.rho_at(p)?;
            let out = self.forward(p)?;
            let displacement = ProductPoint::dist_l2(&out, p);
            let (back, alpha) = self.inverse_with_alpha(&out)?;
            let roundtrip_error = ProductPoint::dist_l2(&back, p);
            records.push(ExtractionRecord {
                input: self.split.join(p),
                output: self.split.join(&out),
                displacement,
                rho,
                alpha,
                roundtrip_error,
            });
        }
        Ok(records)
    }

    /// Error when any corpus point moves beyond the budget.
    pub fn verify_displacement(&self, corpus: &[ProductPoint]) -> Result<()> {
        for p in corpus {
            let out = self.forward(p)?;
            let displacement = ProductPoint::dist_l2(&out, p);
            if displacement > self.budget {
                return Err(CoreError::Budget {
                    displacement,
                    budget: self.budget,
                });
            }
        }
        Ok(())
    }
}
