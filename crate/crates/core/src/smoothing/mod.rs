//! The approximation engine: oscillation-controlled covers, partitions of
//! unity with derivative bookkeeping, block-supported surjections, the
//! smooth approximant, criticality certificates, the argmin graph section,
//! the composed pipeline, and the smoothness-upgrade combinator.

pub mod approximant;
pub mod certify;
pub mod cover;
pub mod operators;
pub mod partition;
pub mod pipeline;
pub mod section;
pub mod upgrade;

pub use approximant::Approximant;
pub use certify::{critical_certificate, suppression_check, CriticalCertificate, Verdict};
pub use cover::{build_ball_cover, Ball, BallCover, CoverConfig, RmMap, ScalarField};
pub use operators::{block_operators, BlockSurjections};
pub use partition::{PartitionEval, PartitionOfUnity};
pub use pipeline::{
    componentwise_abs, compose_pipeline, GEval, Pipeline, PipelineConfig, PipelineReport,
    PipelineSample,
};
pub use section::graph_section;
pub use upgrade::{upgrade_smoothness, DifferentiableMap};
