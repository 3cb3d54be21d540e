//! Constructive machinery, at finite truncation, for diffeomorphic
//! extraction of closed sets from a sequence-space model of separable
//! Hilbert space, graph flattening, and uniform approximation of continuous
//! maps by smooth maps with surjective derivative everywhere.
//!
//! Every quantitative inequality of the construction is exposed as a
//! testable invariant; the `checks` module packages the headline ones for
//! the command-line front end.

pub mod checks;
pub mod config;
pub mod corpus;
pub mod error;
pub mod extract;
pub mod gauges;
pub mod linalg;
pub mod report;
pub mod seqspace;
pub mod smoothing;

pub use config::{BlockLayout, SpaceConfig, Tolerances};
pub use error::{CoreError, Result};
pub use seqspace::{BlockDecomposition, ProductPoint, ProductSplit, SeqSpace, SparseVec};

#[cfg(test)]
mod concurrency_model {
    //! Values are immutable after construction and evaluators are pure, so
    //! everything may be shared and sent between workers.

    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn core_values_are_send_and_sync() {
        assert_send_sync::<crate::seqspace::SparseVec>();
        assert_send_sync::<crate::seqspace::ProductPoint>();
        assert_send_sync::<crate::gauges::GaugeKit>();
        assert_send_sync::<crate::extract::ExtractionScheme>();
        assert_send_sync::<crate::extract::FlattenMaps>();
        assert_send_sync::<crate::extract::GraphExtraction>();
        assert_send_sync::<crate::extract::ComposedExtraction>();
        assert_send_sync::<crate::smoothing::Approximant>();
        assert_send_sync::<crate::smoothing::Pipeline>();
    }
}
