//! Topic hives: a center topic surrounded by co-occurring topics sorted into
//! four sentiment regions, either built by a user or generated from data.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::{
    classify, cooccurrence_counts, minmax_scores, topic_stats, CoOccurrenceTable, CoverageIndex, SegmentationPoint,
    SentimentCategory, TopicCounts, TopicStats,
};
use crate::annotate::{EntityId, SentimentLabel};
use crate::corpus::OutletId;

pub const DEFAULT_CANDIDATES: usize = 20;
/// Slots drawn per region before cells overflow outward.
pub const SLOTS_PER_REGION: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum HiveError {
    #[error("candidate count must be at least 1")]
    InvalidCandidateCount,
    #[error("a hive needs at least one candidate topic")]
    EmptyCandidates,
    #[error("candidate list repeats {0} or contains the center")]
    BadCandidates(EntityId),
    #[error("{0} is not a candidate of this hive")]
    NotACandidate(EntityId),
    #[error("hive is finalized")]
    Finalized,
    #[error("hive is not finalized")]
    NotFinalized,
    #[error("{0} candidate(s) still unassigned")]
    Incomplete(usize),
    #[error("only user hives can be edited")]
    NotUserHive,
    #[error("hives do not describe the same center, outlet and candidates")]
    Mismatched,
    #[error("co-occurrence table is not conditioned on outlet {0}")]
    WrongOutlet(OutletId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HiveKind {
    User,
    Data,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiveSpec {
    pub center: EntityId,
    pub center_sentiment: SentimentCategory,
    pub outlet: OutletId,
    pub candidates: Vec<EntityId>,
    pub assignments: BTreeMap<EntityId, SentimentCategory>,
    pub kind: HiveKind,
    /// Segmentation used to classify a data hive.
    pub seg: Option<SegmentationPoint>,
    pub finalized: bool,
}

/// Top-`k` topics by co-occurrence with `center` in the outlet-conditioned
/// table, count descending then entity id ascending.
pub fn candidate_topics(
    center: &EntityId,
    outlet: &OutletId,
    k: usize,
    cooccurrence: &CoOccurrenceTable,
) -> Result<Vec<EntityId>, HiveError> {
    if k == 0 {
        return Err(HiveError::InvalidCandidateCount);
    }
    if cooccurrence.outlet_filter.as_ref() != Some(outlet) {
        return Err(HiveError::WrongOutlet(outlet.clone()));
    }
    let mut partners = cooccurrence.partners(center);
    partners.sort_by(|(a, ca), (b, cb)| cb.cmp(ca).then_with(|| a.cmp(b)));
    Ok(partners.into_iter().take(k).map(|(e, _)| e).collect())
}

/// Label counts toward `candidate` over the outlet's articles that mention
/// both the center and the candidate.
pub fn co_coverage_counts(
    index: &CoverageIndex,
    center: &EntityId,
    candidate: &EntityId,
    outlet: &OutletId,
) -> TopicCounts {
    let mut counts = TopicCounts {
        entity: candidate.clone(),
        pos: 0,
        neg: 0,
        neu: 0,
    };
    for a in index.in_outlet(Some(outlet)) {
        if !a.mentions(center) {
            continue;
        }
        match a.label(candidate) {
            Some(SentimentLabel::Positive) => counts.pos += 1,
            Some(SentimentLabel::Negative) => counts.neg += 1,
            Some(SentimentLabel::Neutral) => counts.neu += 1,
            None => {}
        }
    }
    counts
}

/// Generates the data hive for `center` under `outlet`.
///
/// Candidates are classified from their co-coverage counts with the center,
/// normalized within the candidate set. The center is classified from its
/// position among all topics of the outlet-conditioned snapshot.
pub fn data_hive(
    index: &CoverageIndex,
    center: &EntityId,
    outlet: &OutletId,
    seg: SegmentationPoint,
    k: usize,
) -> Result<HiveSpec, HiveError> {
    let cooccurrence = cooccurrence_counts(index, Some(outlet));
    let outlet_stats = topic_stats(index, Some(outlet));
    data_hive_from(index, &outlet_stats, &cooccurrence, center, outlet, seg, k)
}

/// Like [`data_hive`], reusing precomputed outlet-conditioned aggregates.
pub fn data_hive_from(
    index: &CoverageIndex,
    outlet_stats: &[TopicStats],
    cooccurrence: &CoOccurrenceTable,
    center: &EntityId,
    outlet: &OutletId,
    seg: SegmentationPoint,
    k: usize,
) -> Result<HiveSpec, HiveError> {
    let candidates = candidate_topics(center, outlet, k, cooccurrence)?;
    let counts: Vec<TopicCounts> = candidates
        .iter()
        .map(|c| co_coverage_counts(index, center, c, outlet))
        .filter(|c| c.total() > 0)
        .collect();

    let mut assignments = BTreeMap::new();
    if let Ok(scores) = minmax_scores(&counts) {
        for (c, s) in counts.iter().zip(scores) {
            assignments.insert(c.entity.clone(), classify(s.pos, s.neg, seg));
        }
    }
    let center_sentiment = outlet_stats
        .iter()
        .find(|s| &s.entity == center)
        .map_or(SentimentCategory::Neutral, |s| classify(s.score_pos, s.score_neg, seg));

    Ok(HiveSpec {
        center: center.clone(),
        center_sentiment,
        outlet: outlet.clone(),
        candidates: counts.into_iter().map(|c| c.entity).collect(),
        assignments,
        kind: HiveKind::Data,
        seg: Some(seg),
        finalized: true,
    })
}

impl HiveSpec {
    /// An empty user hive awaiting assignments.
    pub fn new_user(center: EntityId, outlet: OutletId, candidates: Vec<EntityId>) -> Result<Self, HiveError> {
        if candidates.is_empty() {
            return Err(HiveError::EmptyCandidates);
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &candidates {
            if *c == center || !seen.insert(c) {
                return Err(HiveError::BadCandidates(c.clone()));
            }
        }
        Ok(HiveSpec {
            center,
            center_sentiment: SentimentCategory::Neutral,
            outlet,
            candidates,
            assignments: BTreeMap::new(),
            kind: HiveKind::User,
            seg: None,
            finalized: false,
        })
    }

    fn editable(&self) -> Result<(), HiveError> {
        if self.kind != HiveKind::User {
            return Err(HiveError::NotUserHive);
        }
        if self.finalized {
            return Err(HiveError::Finalized);
        }
        Ok(())
    }

    /// Places a candidate in a region; re-assigning overwrites. Regions have
    /// no capacity limit.
    pub fn assign(&mut self, topic: &EntityId, region: SentimentCategory) -> Result<(), HiveError> {
        self.editable()?;
        if !self.candidates.contains(topic) {
            return Err(HiveError::NotACandidate(topic.clone()));
        }
        self.assignments.insert(topic.clone(), region);
        Ok(())
    }

    pub fn set_center_sentiment(&mut self, category: SentimentCategory) -> Result<(), HiveError> {
        self.editable()?;
        self.center_sentiment = category;
        Ok(())
    }

    pub fn unassigned(&self) -> Vec<&EntityId> {
        self.candidates
            .iter()
            .filter(|c| !self.assignments.contains_key(*c))
            .collect()
    }

    pub fn finalize(&mut self) -> Result<(), HiveError> {
        self.editable()?;
        let missing = self.unassigned().len();
        if missing > 0 {
            return Err(HiveError::Incomplete(missing));
        }
        self.finalized = true;
        Ok(())
    }

    pub fn region_of(&self, topic: &EntityId) -> Option<SentimentCategory> {
        if *topic == self.center {
            Some(self.center_sentiment)
        } else {
            self.assignments.get(topic).copied()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conflict {
    pub entity: EntityId,
    pub user: SentimentCategory,
    pub data: SentimentCategory,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictReport {
    pub conflicts: Vec<Conflict>,
    pub count: usize,
}

impl ConflictReport {
    pub fn contains(&self, entity: &EntityId) -> bool {
        self.conflicts.iter().any(|c| &c.entity == entity)
    }
}

/// Topics whose category differs between the two hives, in candidate order
/// with the center last.
pub fn detect_conflicts(user: &HiveSpec, data: &HiveSpec) -> Result<ConflictReport, HiveError> {
    if !user.finalized || !data.finalized {
        return Err(HiveError::NotFinalized);
    }
    if user.center != data.center || user.outlet != data.outlet || user.candidates != data.candidates {
        return Err(HiveError::Mismatched);
    }
    let mut conflicts: Vec<Conflict> = user
        .candidates
        .iter()
        .filter_map(|c| {
            let (u, d) = (user.assignments.get(c)?, data.assignments.get(c)?);
            (u != d).then(|| Conflict {
                entity: c.clone(),
                user: *u,
                data: *d,
            })
        })
        .collect();
    if user.center_sentiment != data.center_sentiment {
        conflicts.push(Conflict {
            entity: user.center.clone(),
            user: user.center_sentiment,
            data: data.center_sentiment,
        });
    }
    Ok(ConflictReport {
        count: conflicts.len(),
        conflicts,
    })
}

/// Axial hex coordinate (pointy-top; `r` grows downward).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Axial {
    pub q: i32,
    pub r: i32,
}

impl Axial {
    pub const ORIGIN: Axial = Axial { q: 0, r: 0 };
    const DIRECTIONS: [(i32, i32); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];

    pub fn distance(self, other: Axial) -> i32 {
        let dq = self.q - other.q;
        let dr = self.r - other.r;
        (dq.abs() + dr.abs() + (dq + dr).abs()) / 2
    }

    /// Pixel center for unit hex size, y pointing down.
    pub fn to_pixel(self) -> (f64, f64) {
        let x = 3f64.sqrt() * (f64::from(self.q) + f64::from(self.r) / 2.0);
        let y = 1.5 * f64::from(self.r);
        (x, y)
    }

    /// Counter-clockwise angle from east in degrees, [0, 360).
    pub fn angle(self) -> f64 {
        let (x, y) = self.to_pixel();
        (-y).atan2(x).to_degrees().rem_euclid(360.0)
    }

    pub fn ring(radius: i32) -> Vec<Axial> {
        if radius == 0 {
            return vec![Axial::ORIGIN];
        }
        let mut out = Vec::with_capacity(6 * radius as usize);
        let (dq, dr) = Self::DIRECTIONS[4];
        let mut cur = Axial {
            q: dq * radius,
            r: dr * radius,
        };
        for &(sq, sr) in &Self::DIRECTIONS {
            for _ in 0..radius {
                out.push(cur);
                cur = Axial {
                    q: cur.q + sq,
                    r: cur.r + sr,
                };
            }
        }
        out
    }
}

/// Wedge axis in degrees: positive east, mixed north, negative west,
/// neutral south.
pub fn region_axis(region: SentimentCategory) -> f64 {
    match region {
        SentimentCategory::Positive => 0.0,
        SentimentCategory::Mixed => 90.0,
        SentimentCategory::Negative => 180.0,
        SentimentCategory::Neutral => 270.0,
    }
}

/// The wedge a non-center cell belongs to. Wedges are the 90° sectors
/// centered on each region axis; no hex center lies on a sector edge.
pub fn region_of_cell(cell: Axial) -> SentimentCategory {
    let a = cell.angle();
    if !(45.0..315.0).contains(&a) {
        SentimentCategory::Positive
    } else if a < 135.0 {
        SentimentCategory::Mixed
    } else if a < 225.0 {
        SentimentCategory::Negative
    } else {
        SentimentCategory::Neutral
    }
}

/// The first `n` cells of a region's wedge in fill order: inner rings
/// first, then closest to the wedge axis, then smaller angle.
pub fn region_slots(region: SentimentCategory, n: usize) -> Vec<Axial> {
    let axis = region_axis(region);
    let mut out = Vec::with_capacity(n);
    let mut radius = 1;
    while out.len() < n {
        let mut ring: Vec<(f64, f64, Axial)> = Axial::ring(radius)
            .into_iter()
            .filter(|c| region_of_cell(*c) == region)
            .map(|c| {
                let a = c.angle();
                let d = (a - axis).abs();
                (d.min(360.0 - d), a, c)
            })
            .collect();
        ring.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
        out.extend(ring.into_iter().map(|(_, _, c)| c).take(n - out.len()));
        radius += 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "role", content = "region")]
pub enum CellRole {
    Center,
    Region(SentimentCategory),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HiveCell {
    pub topic: EntityId,
    pub at: Axial,
    pub role: CellRole,
    /// Fill position within the region; slots past [`SLOTS_PER_REGION`]
    /// are overflow.
    pub slot: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HiveLayout {
    pub cells: Vec<HiveCell>,
}

/// Deterministic geometry: center at the origin, assigned candidates fill
/// their region's wedge in candidate order. Unassigned candidates are not
/// placed.
pub fn layout(hive: &HiveSpec) -> HiveLayout {
    let mut cells = vec![HiveCell {
        topic: hive.center.clone(),
        at: Axial::ORIGIN,
        role: CellRole::Center,
        slot: 0,
    }];
    for region in SentimentCategory::ALL {
        let members: Vec<&EntityId> = hive
            .candidates
            .iter()
            .filter(|c| hive.assignments.get(*c) == Some(&region))
            .collect();
        let slots = region_slots(region, members.len());
        for (slot, (topic, at)) in members.into_iter().zip(slots).enumerate() {
            cells.push(HiveCell {
                topic: topic.clone(),
                at,
                role: CellRole::Region(region),
                slot,
            });
        }
    }
    HiveLayout { cells }
}
