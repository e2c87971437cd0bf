//! Placing `k` vehicles on a finite metric space so that the expected cost of
//! matching them to `k` random riders is small.
//!
//! Modules are layered: [`metric`], [`demand`], [`placement`] and [`tree`]
//! hold the data; [`matching`] computes matching and transport distances;
//! [`eval`] estimates expected costs; [`algorithms`] produces placements;
//! [`instances`] generates test and benchmark instances.

pub mod algorithms;
pub mod bundle;
pub mod demand;
pub mod error;
pub mod eval;
pub mod instances;
pub mod matching;
pub mod metric;
pub mod placement;
pub mod rng;
pub mod tree;

pub use bundle::{load_bundle, save_bundle, InstanceBundle};
pub use demand::DemandDistribution;
pub use error::{Error, MetricViolation, Result};
pub use eval::CostEstimate;
pub use matching::{MatchingPlan, TransportPlan};
pub use metric::{MetricSpace, PointId};
pub use placement::Placement;
pub use tree::{binarize_tree, GeneralTree, TreeMetric};
