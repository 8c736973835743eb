//! Media-coverage analytics and belief self-assessment engine.
//!
//! The pipeline runs ingest ([`corpus`]) → annotate ([`annotate`]) →
//! aggregate ([`aggregate`]). On top of the aggregates sit topic hives
//! ([`hive`]), article review queries ([`review`]) and the three-stage
//! assessment workflow ([`session`], persisted by [`store`]).

pub mod aggregate;
pub mod annotate;
pub mod corpus;
pub mod fixture;
pub mod hive;
pub mod review;
pub mod session;
pub mod store;
pub mod workbench;

pub use aggregate::{SegmentationPoint, SentimentCategory};
pub use annotate::{AnnotatedCorpus, EntityId, SentimentLabel};
pub use corpus::{CorpusSnapshot, OutletId, OutletSet};
pub use workbench::Workbench;
