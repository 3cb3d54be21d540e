//! Error type shared across the workspace.
//!
//! Every failure carries a stable `anchor` string (`module/check-id`) so that
//! reports and CLI output can name the violated invariant machine-readably.

use thiserror::Error;

/// Errors produced by construction-time certificate scans and by evaluators.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A basis index exceeded the configured truncation dimension.
    #[error("truncation violation: index {index} exceeds dimension {dim}")]
    TruncationViolation { index: usize, dim: usize },

    /// A vector's norm is too close to 1 for the upper-sphere chart.
    #[error("equator proximity: |u| = {norm} leaves t below the margin {t_min}")]
    EquatorProximity { norm: f64, t_min: f64 },

    /// A gradient was requested at a point where the functional is not smooth.
    #[error("singular point: {what} has no derivative at 0")]
    SingularPoint { what: &'static str },

    /// An argument left the declared domain of an operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// The fixed-point bracket could not be established.
    #[error("bracket error: no sign change of a - F(a) on ({lo}, {hi})")]
    Bracket { lo: f64, hi: f64 },

    /// The semi-contraction inequality failed on a sampled pair.
    #[error("contraction violation: F({beta}) - F({alpha}) = {gap}, exceeds (beta-alpha)/2")]
    ContractionViolation { alpha: f64, beta: f64, gap: f64 },

    /// Evaluation was requested on the set removed by an extraction scheme.
    #[error("excluded set: point lies within {tol} of the deleted set")]
    ExcludedSet { tol: f64 },

    /// A constant schedule failed its ordering or summability validation.
    #[error("schedule error: {detail}")]
    Schedule { detail: String },

    /// An approximant failed its certified sup-error bound.
    #[error("certification error: {what} missed tolerance {tol} (got {achieved})")]
    Certification {
        what: &'static str,
        tol: f64,
        achieved: f64,
    },

    /// A tube sample escaped the window it must stay inside.
    #[error("window consistency: tube sample escaped the window (margin {margin})")]
    WindowConsistency { margin: f64 },

    /// A point was not covered by any ball of a cover.
    #[error("coverage error: point not covered by any ball")]
    Coverage,

    /// The reserved index block cannot host the requested operator family.
    #[error("capacity error: need {needed} reserved indices, only {available} available")]
    Capacity { needed: usize, available: usize },

    /// No admissible ball radius satisfied the oscillation certificates.
    #[error("cover error: oscillation certificate unachievable at radius {min_radius}")]
    Cover { min_radius: f64 },

    /// An iterative minimization failed to converge.
    #[error("optimization error: no convergence within {iterations} iterations")]
    Optimization { iterations: usize },

    /// A smoothing oracle violated its contract at a corpus point.
    #[error("oracle error: {detail}")]
    Oracle { detail: String },

    /// A composed map exceeded its displacement budget.
    #[error("budget error: displacement {displacement} exceeds budget {budget}")]
    Budget { displacement: f64, budget: f64 },

    /// A gauge evaluated to zero on a nonzero input.
    #[error("invalid gauge: vanishes on a nonzero vector")]
    InvalidGauge,

    /// A multi-stage construction failed; the tag names the stage.
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<CoreError>,
    },
}

impl CoreError {
    /// Wrap an error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> CoreError {
        CoreError::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Stable identifier for machine-readable failure records.
    pub fn anchor(&self) -> &'static str {
        match self {
            CoreError::TruncationViolation { .. } => "seqspace/truncation",
            CoreError::EquatorProximity { .. } => "seqspace/equator-margin",
            CoreError::SingularPoint { .. } => "gauges/singular-point",
            CoreError::Domain { .. } => "core/domain",
            CoreError::Bracket { .. } => "extract/fixed-point-bracket",
            CoreError::ContractionViolation { .. } => "extract/semi-contraction",
            CoreError::ExcludedSet { .. } => "extract/excluded-set",
            CoreError::Schedule { .. } => "extract/twin-schedule",
            CoreError::Certification { .. } => "extract/approximant-certificate",
            CoreError::WindowConsistency { .. } => "extract/tube-window",
            CoreError::Coverage => "smoothing/coverage",
            CoreError::Capacity { .. } => "smoothing/reserved-block-capacity",
            CoreError::Cover { .. } => "smoothing/oscillation-cover",
            CoreError::Optimization { .. } => "smoothing/argmin-convergence",
            CoreError::Oracle { .. } => "smoothing/upgrade-oracle",
            CoreError::Budget { .. } => "extract/displacement-budget",
            CoreError::InvalidGauge => "extract/invalid-gauge",
            CoreError::Stage { source, .. } => source.anchor(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
