//! Document-level target sentiment, per-topic counts, two-dimensional
//! min-max scores, segmentation and co-occurrence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::{AnnotatedCorpus, EntityId, SentimentLabel};
use crate::corpus::OutletId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggregateError {
    #[error("entity has no labelled sentences in the article")]
    NoSentences,
    #[error("cannot normalize an empty topic population")]
    EmptyPopulation,
    #[error("segmentation coordinates must lie in [0,1], got ({0}, {1})")]
    SegmentationOutOfRange(f64, f64),
}

/// Labelled-sentence counts toward one entity within one article.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSentimentCounts {
    pub pos: u32,
    pub neg: u32,
    pub neu: u32,
}

impl SentenceSentimentCounts {
    pub fn new(pos: u32, neg: u32, neu: u32) -> Self {
        SentenceSentimentCounts { pos, neg, neu }
    }

    pub fn add(&mut self, label: SentimentLabel) {
        match label {
            SentimentLabel::Positive => self.pos += 1,
            SentimentLabel::Negative => self.neg += 1,
            SentimentLabel::Neutral => self.neu += 1,
        }
    }

    pub fn get(&self, label: SentimentLabel) -> u32 {
        match label {
            SentimentLabel::Positive => self.pos,
            SentimentLabel::Negative => self.neg,
            SentimentLabel::Neutral => self.neu,
        }
    }

    pub fn total(&self) -> u32 {
        self.pos + self.neg + self.neu
    }
}

/// Majority label over sentence counts. Ties go to neutral, then negative,
/// then positive.
pub fn document_sentiment(counts: SentenceSentimentCounts) -> Result<SentimentLabel, AggregateError> {
    if counts.total() == 0 {
        return Err(AggregateError::NoSentences);
    }
    let SentenceSentimentCounts { pos, neg, neu } = counts;
    Ok(if neu >= neg && neu >= pos {
        SentimentLabel::Neutral
    } else if neg >= pos {
        SentimentLabel::Negative
    } else {
        SentimentLabel::Positive
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentEntitySentiment {
    pub article_id: String,
    pub entity: EntityId,
    pub counts: SentenceSentimentCounts,
    pub label: SentimentLabel,
}

/// Per-article document-level sentiment toward each mentioned entity.
#[derive(Debug, Clone, PartialEq)]
pub struct ArticleCoverage {
    pub article_id: String,
    pub outlet: OutletId,
    pub published_at: DateTime<Utc>,
    pub entities: BTreeMap<EntityId, (SentenceSentimentCounts, SentimentLabel)>,
}

impl ArticleCoverage {
    pub fn label(&self, entity: &EntityId) -> Option<SentimentLabel> {
        self.entities.get(entity).map(|(_, l)| *l)
    }

    pub fn mentions(&self, entity: &EntityId) -> bool {
        self.entities.contains_key(entity)
    }
}

/// Document-level view of an annotated corpus; every aggregate is computed
/// from it. Articles keep the snapshot's id order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageIndex {
    articles: Vec<ArticleCoverage>,
}

impl CoverageIndex {
    pub fn build(corpus: &AnnotatedCorpus) -> Self {
        let articles = corpus
            .snapshot()
            .articles()
            .iter()
            .enumerate()
            .map(|(i, article)| {
                let mut counts: BTreeMap<EntityId, SentenceSentimentCounts> = BTreeMap::new();
                for m in corpus.mentions_at(i) {
                    counts.entry(m.entity.clone()).or_default().add(m.sentiment);
                }
                let entities = counts
                    .into_iter()
                    .map(|(e, c)| {
                        let label = document_sentiment(c).expect("mentioned entity has counts");
                        (e, (c, label))
                    })
                    .collect();
                ArticleCoverage {
                    article_id: article.id.clone(),
                    outlet: article.outlet.clone(),
                    published_at: article.published_at,
                    entities,
                }
            })
            .collect();
        CoverageIndex { articles }
    }

    pub fn articles(&self) -> &[ArticleCoverage] {
        &self.articles
    }

    pub fn document_sentiments(&self) -> impl Iterator<Item = DocumentEntitySentiment> + '_ {
        self.articles.iter().flat_map(|a| {
            a.entities.iter().map(move |(e, (c, l))| DocumentEntitySentiment {
                article_id: a.article_id.clone(),
                entity: e.clone(),
                counts: *c,
                label: *l,
            })
        })
    }

    pub fn in_outlet<'a>(&'a self, outlet: Option<&'a OutletId>) -> impl Iterator<Item = &'a ArticleCoverage> + 'a {
        self.articles
            .iter()
            .filter(move |a| outlet.is_none_or(|o| a.outlet == *o))
    }

    pub fn entities(&self) -> BTreeSet<EntityId> {
        self.articles.iter().flat_map(|a| a.entities.keys().cloned()).collect()
    }
}

/// Article counts by document-level label toward one topic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicCounts {
    pub entity: EntityId,
    pub pos: u32,
    pub neg: u32,
    pub neu: u32,
}

impl TopicCounts {
    pub fn total(&self) -> u32 {
        self.pos + self.neg + self.neu
    }
}

type CountMap = BTreeMap<EntityId, [u32; 3]>;

fn count_articles<'a>(articles: impl Iterator<Item = &'a ArticleCoverage>) -> CountMap {
    let mut map = CountMap::new();
    for a in articles {
        for (e, (_, label)) in &a.entities {
            let slot = map.entry(e.clone()).or_default();
            match label {
                SentimentLabel::Positive => slot[0] += 1,
                SentimentLabel::Negative => slot[1] += 1,
                SentimentLabel::Neutral => slot[2] += 1,
            }
        }
    }
    map
}

#[cfg(feature = "parallel")]
fn merge_counts(mut a: CountMap, b: CountMap) -> CountMap {
    for (e, c) in b {
        let slot = a.entry(e).or_default();
        for k in 0..3 {
            slot[k] += c[k];
        }
    }
    a
}

fn into_topic_counts(map: CountMap) -> Vec<TopicCounts> {
    map.into_iter()
        .map(|(entity, [pos, neg, neu])| TopicCounts { entity, pos, neg, neu })
        .collect()
}

/// Per-topic article counts, sorted by entity id.
pub fn topic_counts(index: &CoverageIndex, outlet: Option<&OutletId>) -> Vec<TopicCounts> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let map = index
            .articles
            .par_iter()
            .filter(|a| outlet.is_none_or(|o| a.outlet == *o))
            .fold(CountMap::new, |acc, a| {
                merge_counts(acc, count_articles(std::iter::once(a)))
            })
            .reduce(CountMap::new, merge_counts);
        into_topic_counts(map)
    }
    #[cfg(not(feature = "parallel"))]
    {
        topic_counts_sequential(index, outlet)
    }
}

pub fn topic_counts_sequential(index: &CoverageIndex, outlet: Option<&OutletId>) -> Vec<TopicCounts> {
    into_topic_counts(count_articles(index.in_outlet(outlet)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentScores {
    pub pos: f64,
    pub neg: f64,
}

fn normalize(value: u32, min: u32, max: u32) -> f64 {
    if max == min {
        0.0
    } else {
        f64::from(value - min) / f64::from(max - min)
    }
}

/// Min-max normalizes positive and negative article counts independently
/// over the given population. A degenerate axis (max = min) maps to 0.
pub fn minmax_scores(population: &[TopicCounts]) -> Result<Vec<SentimentScores>, AggregateError> {
    let (min_pos, max_pos) = min_max(population.iter().map(|t| t.pos))?;
    let (min_neg, max_neg) = min_max(population.iter().map(|t| t.neg))?;
    Ok(population
        .iter()
        .map(|t| SentimentScores {
            pos: normalize(t.pos, min_pos, max_pos),
            neg: normalize(t.neg, min_neg, max_neg),
        })
        .collect())
}

fn min_max(values: impl Iterator<Item = u32>) -> Result<(u32, u32), AggregateError> {
    values
        .fold(None, |acc: Option<(u32, u32)>, v| {
            Some(acc.map_or((v, v), |(lo, hi)| (lo.min(v), hi.max(v))))
        })
        .ok_or(AggregateError::EmptyPopulation)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicStats {
    pub entity: EntityId,
    pub outlet_filter: Option<OutletId>,
    pub total_articles: u32,
    pub pos_articles: u32,
    pub neg_articles: u32,
    pub neu_articles: u32,
    pub score_pos: f64,
    pub score_neg: f64,
}

/// Counts plus scores normalized over every topic in the (optionally
/// outlet-conditioned) snapshot.
pub fn topic_stats(index: &CoverageIndex, outlet: Option<&OutletId>) -> Vec<TopicStats> {
    let counts = topic_counts(index, outlet);
    let scores = match minmax_scores(&counts) {
        Ok(s) => s,
        Err(_) => return Vec::new(),
    };
    counts
        .into_iter()
        .zip(scores)
        .map(|(c, s)| TopicStats {
            total_articles: c.total(),
            entity: c.entity,
            outlet_filter: outlet.cloned(),
            pos_articles: c.pos,
            neg_articles: c.neg,
            neu_articles: c.neu,
            score_pos: s.pos,
            score_neg: s.neg,
        })
        .collect()
}

/// The movable point splitting score space into four regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentationPoint {
    pub sx: f64,
    pub sy: f64,
}

impl SegmentationPoint {
    pub fn new(sx: f64, sy: f64) -> Result<Self, AggregateError> {
        if !(0.0..=1.0).contains(&sx) || !(0.0..=1.0).contains(&sy) {
            return Err(AggregateError::SegmentationOutOfRange(sx, sy));
        }
        Ok(SegmentationPoint { sx, sy })
    }
}

impl Default for SegmentationPoint {
    fn default() -> Self {
        SegmentationPoint { sx: 0.5, sy: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentCategory {
    Neutral,
    Positive,
    Negative,
    Mixed,
}

impl SentimentCategory {
    pub const ALL: [SentimentCategory; 4] = [
        SentimentCategory::Positive,
        SentimentCategory::Negative,
        SentimentCategory::Mixed,
        SentimentCategory::Neutral,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SentimentCategory::Neutral => "neutral",
            SentimentCategory::Positive => "positive",
            SentimentCategory::Negative => "negative",
            SentimentCategory::Mixed => "mixed",
        }
    }
}

impl fmt::Display for SentimentCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SentimentCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "neutral" => Ok(SentimentCategory::Neutral),
            "positive" => Ok(SentimentCategory::Positive),
            "negative" => Ok(SentimentCategory::Negative),
            "mixed" => Ok(SentimentCategory::Mixed),
            other => Err(format!("unknown sentiment category {other:?}")),
        }
    }
}

/// Quadrant of (score_pos, score_neg) relative to the segmentation point.
/// A score equal to the threshold counts as high.
pub fn classify(score_pos: f64, score_neg: f64, seg: SegmentationPoint) -> SentimentCategory {
    match (score_pos >= seg.sx, score_neg >= seg.sy) {
        (true, true) => SentimentCategory::Mixed,
        (true, false) => SentimentCategory::Positive,
        (false, true) => SentimentCategory::Negative,
        (false, false) => SentimentCategory::Neutral,
    }
}

/// Article-level co-occurrence counts. Pairs are stored with the smaller
/// entity id first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoOccurrenceTable {
    pub outlet_filter: Option<OutletId>,
    counts: BTreeMap<(EntityId, EntityId), u32>,
}

impl CoOccurrenceTable {
    /// Builds a table from unordered pairs; self-pairs and zero counts are
    /// dropped and repeated pairs are summed.
    pub fn from_pairs<I>(outlet_filter: Option<OutletId>, pairs: I) -> Self
    where
        I: IntoIterator<Item = (EntityId, EntityId, u32)>,
    {
        let mut counts = BTreeMap::new();
        for (a, b, c) in pairs {
            if a == b || c == 0 {
                continue;
            }
            let key = if a < b { (a, b) } else { (b, a) };
            *counts.entry(key).or_default() += c;
        }
        CoOccurrenceTable { outlet_filter, counts }
    }

    pub fn count(&self, a: &EntityId, b: &EntityId) -> u32 {
        if a == b {
            return 0;
        }
        let key = if a < b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        self.counts.get(&key).copied().unwrap_or(0)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&EntityId, &EntityId, u32)> {
        self.counts.iter().map(|((a, b), c)| (a, b, *c))
    }

    /// Every entity co-occurring with `center`, with its count.
    pub fn partners(&self, center: &EntityId) -> Vec<(EntityId, u32)> {
        self.counts
            .iter()
            .filter_map(|((a, b), c)| {
                if a == center {
                    Some((b.clone(), *c))
                } else if b == center {
                    Some((a.clone(), *c))
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

pub fn cooccurrence_counts(index: &CoverageIndex, outlet: Option<&OutletId>) -> CoOccurrenceTable {
    let mut counts: BTreeMap<(EntityId, EntityId), u32> = BTreeMap::new();
    for a in index.in_outlet(outlet) {
        let ids: Vec<&EntityId> = a.entities.keys().collect();
        for (i, x) in ids.iter().enumerate() {
            for y in &ids[i + 1..] {
                *counts.entry(((*x).clone(), (*y).clone())).or_default() += 1;
            }
        }
    }
    CoOccurrenceTable {
        outlet_filter: outlet.cloned(),
        counts,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    #[serde(flatten)]
    pub stats: TopicStats,
    pub category: SentimentCategory,
    pub color_bucket: u32,
}

/// Logarithmic color bucket: the number of decimal digits of the article
/// count (floor(log10 n) + 1), clamped to `[1, buckets]`.
pub fn color_bucket(total_articles: u32, buckets: u32) -> u32 {
    let digits = if total_articles == 0 {
        0
    } else {
        total_articles.ilog10() + 1
    };
    digits.clamp(1, buckets.max(1))
}

pub const DEFAULT_COLOR_BUCKETS: u32 = 5;

/// Topics at or above the article threshold with their category and color
/// bucket. Scores are never renormalized after filtering.
pub fn scatter_data(stats: &[TopicStats], threshold: u32, seg: SegmentationPoint, buckets: u32) -> Vec<ScatterPoint> {
    stats
        .iter()
        .filter(|s| s.total_articles >= threshold)
        .map(|s| ScatterPoint {
            category: classify(s.score_pos, s.score_neg, seg),
            color_bucket: color_bucket(s.total_articles, buckets),
            stats: s.clone(),
        })
        .collect()
}

#[derive(Serialize)]
struct PairRecord<'a> {
    a: &'a EntityId,
    b: &'a EntityId,
    count: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    outlet: Option<&'a OutletId>,
}

/// Topic stats as line records sorted by entity id.
pub fn export_topic_stats(stats: &[TopicStats]) -> String {
    let mut sorted: Vec<&TopicStats> = stats.iter().collect();
    sorted.sort_by(|a, b| a.entity.cmp(&b.entity));
    sorted
        .into_iter()
        .map(|s| serde_json::to_string(s).expect("stats serialize") + "\n")
        .collect()
}

/// Co-occurrence pairs as line records in lexicographic pair order.
pub fn export_cooccurrence(table: &CoOccurrenceTable) -> String {
    table
        .pairs()
        .map(|(a, b, count)| {
            let rec = PairRecord {
                a,
                b,
                count,
                outlet: table.outlet_filter.as_ref(),
            };
            serde_json::to_string(&rec).expect("pair serializes") + "\n"
        })
        .collect()
}
