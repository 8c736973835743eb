//! An annotated corpus bundled with its precomputed aggregates.

use std::collections::BTreeMap;

use crate::aggregate::{
    cooccurrence_counts, scatter_data, topic_stats, CoOccurrenceTable, CoverageIndex, ScatterPoint, SegmentationPoint,
    TopicStats, DEFAULT_COLOR_BUCKETS,
};
use crate::annotate::{AnnotatedCorpus, EntityId};
use crate::corpus::{OutletId, OutletSet};
use crate::hive::{candidate_topics, data_hive_from, HiveError, HiveSpec};

/// Read-only analysis state shared by every session and request.
#[derive(Debug)]
pub struct Workbench {
    corpus: AnnotatedCorpus,
    outlets: OutletSet,
    index: CoverageIndex,
    stats: Vec<TopicStats>,
    outlet_stats: BTreeMap<OutletId, Vec<TopicStats>>,
    outlet_cooccurrence: BTreeMap<OutletId, CoOccurrenceTable>,
    pub color_buckets: u32,
    pub candidate_count: usize,
}

impl Workbench {
    pub fn new(corpus: AnnotatedCorpus, outlets: OutletSet) -> Self {
        let index = CoverageIndex::build(&corpus);
        let stats = topic_stats(&index, None);
        let outlet_stats = outlets
            .iter()
            .map(|o| (o.clone(), topic_stats(&index, Some(o))))
            .collect();
        let outlet_cooccurrence = outlets
            .iter()
            .map(|o| (o.clone(), cooccurrence_counts(&index, Some(o))))
            .collect();
        Workbench {
            corpus,
            outlets,
            index,
            stats,
            outlet_stats,
            outlet_cooccurrence,
            color_buckets: DEFAULT_COLOR_BUCKETS,
            candidate_count: crate::hive::DEFAULT_CANDIDATES,
        }
    }

    pub fn corpus(&self) -> &AnnotatedCorpus {
        &self.corpus
    }

    pub fn outlets(&self) -> &OutletSet {
        &self.outlets
    }

    pub fn index(&self) -> &CoverageIndex {
        &self.index
    }

    /// Topic stats normalized over the whole snapshot.
    pub fn topic_stats(&self) -> &[TopicStats] {
        &self.stats
    }

    pub fn outlet_stats(&self, outlet: &OutletId) -> Option<&[TopicStats]> {
        self.outlet_stats.get(outlet).map(Vec::as_slice)
    }

    pub fn cooccurrence(&self, outlet: &OutletId) -> Option<&CoOccurrenceTable> {
        self.outlet_cooccurrence.get(outlet)
    }

    pub fn topic(&self, entity: &EntityId) -> Option<&TopicStats> {
        self.stats
            .binary_search_by(|s| s.entity.cmp(entity))
            .ok()
            .map(|i| &self.stats[i])
    }

    pub fn resolve_outlet(&self, name: &str) -> Option<&OutletId> {
        self.outlets.resolve(name)
    }

    pub fn scatter(&self, threshold: u32, seg: SegmentationPoint) -> Vec<ScatterPoint> {
        scatter_data(&self.stats, threshold, seg, self.color_buckets)
    }

    pub fn candidates(&self, center: &EntityId, outlet: &OutletId) -> Result<Vec<EntityId>, HiveError> {
        let table = self
            .cooccurrence(outlet)
            .ok_or_else(|| HiveError::WrongOutlet(outlet.clone()))?;
        candidate_topics(center, outlet, self.candidate_count, table)
    }

    pub fn data_hive(
        &self,
        center: &EntityId,
        outlet: &OutletId,
        seg: SegmentationPoint,
    ) -> Result<HiveSpec, HiveError> {
        let (stats, table) = match (self.outlet_stats.get(outlet), self.outlet_cooccurrence.get(outlet)) {
            (Some(s), Some(t)) => (s, t),
            _ => return Err(HiveError::WrongOutlet(outlet.clone())),
        };
        data_hive_from(&self.index, stats, table, center, outlet, seg, self.candidate_count)
    }
}
