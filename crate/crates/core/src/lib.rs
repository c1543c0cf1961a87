//! Hölder retractions onto flat compact convex sets, and a strictly convex
//! renorming of `l2` whose nearest point map onto a segment is not
//! uniformly continuous.

pub mod checks;
pub mod error;
pub mod flat_sets;
pub mod gauge;
pub mod nearest_point;
pub mod nets;
pub mod optimize;
pub mod oracle;
pub mod report;
pub mod retraction;
pub mod rng;
pub mod vector;
pub mod whitney;

pub use error::{Error, Result};
pub use flat_sets::{FlatSetConfig, FlatSetDescriptor, FlatnessProfile, Shape};
pub use gauge::NormFamilyParams;
pub use nearest_point::SegmentK;
pub use nets::{NetCache, NetLevel};
pub use retraction::Retraction;
pub use whitney::{PartitionEval, WhitneyPartition};
