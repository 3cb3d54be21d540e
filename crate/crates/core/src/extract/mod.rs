//! The diffeomorphic-extraction engine: fixed points of semi-contractions,
//! the product extraction scheme and its inverse, staircase and twin-height
//! construction, the flattening pair, tube windows, radial body maps, the
//! composed graph extraction, and the finite-cover patching composer.

pub mod convex;
pub mod extension;
pub mod fixed_point;
pub mod flatten;
pub mod graph;
pub mod patch;
pub mod scheme;
pub mod staircase;
pub mod twin;
pub mod window;

pub use convex::{convex_body_diffeo, Gauge, RadialMap};
pub use extension::{extend_function, smoothed_sq_distance, SmoothExtension};
pub use fixed_point::{grid_scan_root, solve_fixed_point, FixedPointProblem};
pub use flatten::{FlattenMaps, PicardStats};
pub use graph::{graph_extraction, ExtractionRecord, GraphExtraction, GraphSpec};
pub use patch::{patch_covers, verify_carry, ComposedExtraction, CoverPatch, CoverPiece};
pub use scheme::ExtractionScheme;
pub use staircase::Staircase;
pub use twin::{TwinHeights, TwinKind, TwinSchedule};
pub use window::{tube_window, TubeWindow, Window};
