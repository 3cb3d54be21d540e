//! Patching finitely many local extractions into one map.
//!
//! The extracted set is split by exact membership pattern against the other
//! cover pieces (big intersections first); each pattern piece is extracted
//! by a windowed graph extraction, rebuilt on the samples as pushed forward
//! by the stages already applied. Windows keep each stage away from the
//! pieces it must not disturb, and per-stage budgets of (piece budget)/2^n
//! make the composition respect the summed budget.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::extract::graph::{graph_extraction, GraphExtraction, GraphSpec};
use crate::extract::window::Window;
use crate::gauges::GaugeKit;
use crate::seqspace::{ProductPoint, ProductSplit, SparseVec};

/// One cover piece: a sampled closed set with its nested open sets.
#[derive(Debug, Clone)]
pub struct CoverPiece {
    /// Samples of the closed set (graph points over the base block).
    pub set_samples: Vec<ProductPoint>,
    /// Inner open neighborhood W (set_samples inside).
    pub inner: Window,
    /// Outer open neighborhood V (closure of W inside).
    pub outer: Window,
}

/// A finite cover family with displacement budgets; piece 0 is extracted,
/// the others are tracked.
#[derive(Debug, Clone)]
pub struct CoverPatch {
    pub pieces: Vec<CoverPiece>,
    pub window: Window,
    pub budgets: Vec<f64>,
    /// Membership threshold for the sampled sets.
    pub set_tol: f64,
    /// Certification probes for the per-stage map constructions.
    pub probe_corpus: Vec<SparseVec>,
}

/// The sequential composition of the per-pattern extractions.
pub struct ComposedExtraction {
    stages: Vec<GraphExtraction>,
    budget_total: f64,
}

impl ComposedExtraction {
    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn budget_total(&self) -> f64 {
        self.budget_total
    }

    pub fn forward(&self, p: &ProductPoint) -> Result<ProductPoint> {
        let mut current = p.clone();
        for stage in &self.stages {
            current = stage.forward(&current)?;
        }
        Ok(current)
    }

    pub fn inverse(&self, q: &ProductPoint) -> Result<ProductPoint> {
        let mut current = q.clone();
        for stage in self.stages.iter().rev() {
            current = stage.inverse(&current)?;
        }
        Ok(current)
    }
}

fn min_dist_to_cloud(p: &ProductPoint, cloud: &[ProductPoint]) -> f64 {
    cloud
        .iter()
        .map(|s| ProductPoint::dist_l2(p, s))
        .fold(f64::INFINITY, f64::min)
}

fn push_cloud(
    stages: &[GraphExtraction],
    cloud: &[ProductPoint],
) -> Result<Vec<ProductPoint>> {
    let mut out = Vec::with_capacity(cloud.len());
    for p in cloud {
        let mut current = p.clone();
        let mut deleted = false;
        for stage in stages {
            match stage.forward(&current) {
                Ok(next) => current = next,
                Err(CoreError::Stage { source, .. })
                    if matches!(*source, CoreError::ExcludedSet { .. }) =>
                {
                    deleted = true;
                    break;
                }
                Err(CoreError::ExcludedSet { .. }) => {
                    deleted = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if !deleted {
            out.push(current);
        }
    }
    Ok(out)
}

/// Build the composed extraction for a cover patch.
pub fn patch_covers(
    patch: &CoverPatch,
    split: ProductSplit,
    kit: GaugeKit,
    series: usize,
) -> Result<ComposedExtraction> {
    let n = patch.pieces.len().saturating_sub(1);
    if patch.pieces.is_empty() {
        return Err(CoreError::Domain {
            op: "patch_covers",
            detail: "empty cover family".into(),
        });
    }
    if n > 5 {
        return Err(CoreError::Domain {
            op: "patch_covers",
            detail: format!("family size {} exceeds the 2^n piece limit", n + 1),
        });
    }
    if patch.budgets.len() != patch.pieces.len() {
        return Err(CoreError::Domain {
            op: "patch_covers",
            detail: "one budget per piece required".into(),
        });
    }

    // Exact membership patterns of the extracted piece's samples.
    let target = &patch.pieces[0];
    let patterns: Vec<BTreeSet<usize>> = target
        .set_samples
        .iter()
        .map(|s| {
            (1..=n)
                .filter(|&i| {
                    min_dist_to_cloud(s, &patch.pieces[i].set_samples) <= patch.set_tol
                })
                .collect()
        })
        .collect();

    // Subsets of {1..n}, largest first, lexicographic within a size.
    let mut subsets: Vec<BTreeSet<usize>> = (0..(1usize << n))
        .map(|mask| {
            (1..=n)
                .filter(|i| mask & (1 << (i - 1)) != 0)
                .collect::<BTreeSet<usize>>()
        })
        .collect();
    subsets.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| {
        a.iter().cloned().collect::<Vec<_>>().cmp(&b.iter().cloned().collect::<Vec<_>>())
    }));

    let per_stage_divisor = (1usize << n) as f64;
    let mut stages: Vec<GraphExtraction> = Vec::new();
    let mut budget_total = 0.0;

    for subset in &subsets {
        let piece_samples: Vec<ProductPoint> = target
            .set_samples
            .iter()
            .zip(&patterns)
            .filter(|(_, pat)| *pat == subset)
            .map(|(s, _)| s.clone())
            .collect();
        if piece_samples.is_empty() {
            continue;
        }
        let pushed = push_cloud(&stages, &piece_samples)?;
        if pushed.is_empty() {
            continue;
        }

        // Keep the stage window away from the cover sets outside the pattern.
        let mut clearance = f64::INFINITY;
        for i in 1..=n {
            if subset.contains(&i) {
                continue;
            }
            let excluded = push_cloud(&stages, &patch.pieces[i].set_samples)?;
            for s in &excluded {
                clearance = clearance.min(min_dist_to_cloud(s, &pushed));
            }
        }
        let radius = (0.5 * clearance).min(1.0);
        if !(radius > 0.0) {
            return Err(CoreError::Domain {
                op: "patch_covers",
                detail: "pattern piece touches an excluded cover set".into(),
            });
        }

        // Stage window: the clearance ball around the pushed piece, cut by
        // the outer sets of the pattern (and piece 0) and by the window.
        let outer_windows: Vec<Window> = std::iter::once(0usize)
            .chain(subset.iter().copied())
            .map(|i| patch.pieces[i].outer.clone())
            .collect();
        let global = patch.window.clone();
        let cloud = pushed.clone();
        let stage_window = Window::Custom(Arc::new(move |p: &ProductPoint| {
            let mut m = radius - min_dist_to_cloud(p, &cloud);
            for w in &outer_windows {
                m = m.min(w.margin(p));
            }
            m.min(global.margin(p))
        }));

        let applicable_budget = std::iter::once(patch.budgets[0])
            .chain(subset.iter().map(|&i| patch.budgets[i]))
            .fold(f64::INFINITY, f64::min);
        let stage_budget = applicable_budget / per_stage_divisor;

        let spec = GraphSpec {
            base_samples: pushed.iter().map(|p| p.x1.clone()).collect(),
            graph_values: pushed.iter().map(|p| p.x2.clone()).collect(),
            window: stage_window,
            budget: stage_budget,
        };
        let mut corpus: Vec<SparseVec> = pushed.iter().map(|p| p.x1.clone()).collect();
        corpus.extend(patch.probe_corpus.iter().cloned());
        let stage = graph_extraction(&spec, split.clone(), kit.clone(), series, &corpus)
            .map_err(|e| e.in_stage("patch-stage"))?;
        budget_total += stage_budget;
        stages.push(stage);
    }

    Ok(ComposedExtraction {
        stages,
        budget_total,
    })
}

/// Corpus check: the composition carries each tracked piece (minus the
/// extracted one) into its outer set.
pub fn verify_carry(patch: &CoverPatch, composed: &ComposedExtraction) -> Result<()> {
    let target = &patch.pieces[0];
    for (i, piece) in patch.pieces.iter().enumerate().skip(1) {
        for s in &piece.set_samples {
            if min_dist_to_cloud(s, &target.set_samples) <= patch.set_tol {
                continue; // part of the extracted set
            }
            let out = composed.forward(s)?;
            if !piece.outer.contains(&out) {
                return Err(CoreError::Domain {
                    op: "verify_carry",
                    detail: format!("piece {i} sample escaped its outer set"),
                });
            }
        }
    }
    Ok(())
}
