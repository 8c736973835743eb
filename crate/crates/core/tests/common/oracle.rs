//! Brute-force recounts used to check the aggregation code. Everything here
//! works from the flat annotation records and raw articles only.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use newslens_core::annotate::{AnnotatedCorpus, AnnotationRecord};

pub const POS: usize = 0;
pub const NEG: usize = 1;
pub const NEU: usize = 2;

/// Index of the winning label for sentence counts [pos, neg, neu]: the
/// largest count, ties going to neutral, then negative, then positive.
pub fn max_rule(counts: [u32; 3]) -> usize {
    let best = *counts.iter().max().unwrap();
    [NEU, NEG, POS].into_iter().find(|&k| counts[k] == best).unwrap()
}

fn label_index(s: &str) -> usize {
    match s {
        "positive" => POS,
        "negative" => NEG,
        "neutral" => NEU,
        other => panic!("unexpected label {other}"),
    }
}

/// (article id, entity id) → document label index.
pub fn document_labels(corpus: &AnnotatedCorpus) -> BTreeMap<(String, String), usize> {
    let records: Vec<AnnotationRecord> = corpus.records().collect();
    let mut sentence_counts: BTreeMap<(String, String), [u32; 3]> = BTreeMap::new();
    for r in &records {
        sentence_counts
            .entry((r.article_id.clone(), r.entity_id.clone()))
            .or_default()[label_index(&r.sentiment)] += 1;
    }
    sentence_counts.into_iter().map(|(k, c)| (k, max_rule(c))).collect()
}

/// Document labels and outlets of one corpus, recounted once and queried
/// many times.
pub struct Recount {
    /// (article id, entity id) → label index.
    pub labels: BTreeMap<(String, String), usize>,
    /// article id → outlet name.
    pub outlets: BTreeMap<String, String>,
}

impl Recount {
    pub fn new(corpus: &AnnotatedCorpus) -> Self {
        Recount {
            labels: document_labels(corpus),
            outlets: corpus
                .snapshot()
                .articles()
                .iter()
                .map(|a| (a.id.clone(), a.outlet.to_string()))
                .collect(),
        }
    }

    fn in_scope(&self, article: &str, outlet: Option<&str>) -> bool {
        outlet.is_none_or(|o| self.outlets[article] == o)
    }

    /// entity id → [pos, neg, neu] article counts.
    pub fn topic_counts(&self, outlet: Option<&str>) -> BTreeMap<String, [u32; 3]> {
        let mut out: BTreeMap<String, [u32; 3]> = BTreeMap::new();
        for ((article, entity), &label) in &self.labels {
            if self.in_scope(article, outlet) {
                out.entry(entity.clone()).or_default()[label] += 1;
            }
        }
        out
    }

    /// (a, b) with a < b → number of articles mentioning both.
    pub fn cooccurrence(&self, outlet: Option<&str>) -> BTreeMap<(String, String), u32> {
        let mut per_article: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (article, entity) in self.labels.keys() {
            if self.in_scope(article, outlet) {
                per_article.entry(article).or_default().push(entity);
            }
        }
        let mut out = BTreeMap::new();
        for entities in per_article.values() {
            for a in entities {
                for b in entities {
                    if a < b {
                        *out.entry((a.to_string(), b.to_string())).or_insert(0) += 1;
                    }
                }
            }
        }
        out
    }

    /// Article ids per label group [pos, neg, neu] for a topic query.
    pub fn article_groups(&self, topic: &str, co_topic: Option<&str>, outlet: Option<&str>) -> [BTreeSet<String>; 3] {
        let mut groups: [BTreeSet<String>; 3] = Default::default();
        for article in self.outlets.keys() {
            if !self.in_scope(article, outlet) {
                continue;
            }
            let Some(&label) = self.labels.get(&(article.clone(), topic.to_string())) else {
                continue;
            };
            if co_topic.is_some_and(|c| !self.labels.contains_key(&(article.clone(), c.to_string()))) {
                continue;
            }
            groups[label].insert(article.clone());
        }
        groups
    }
}

pub fn topic_counts(corpus: &AnnotatedCorpus, outlet: Option<&str>) -> BTreeMap<String, [u32; 3]> {
    Recount::new(corpus).topic_counts(outlet)
}

pub fn cooccurrence(corpus: &AnnotatedCorpus, outlet: Option<&str>) -> BTreeMap<(String, String), u32> {
    Recount::new(corpus).cooccurrence(outlet)
}

pub fn article_groups(
    corpus: &AnnotatedCorpus,
    topic: &str,
    co_topic: Option<&str>,
    outlet: Option<&str>,
) -> [BTreeSet<String>; 3] {
    Recount::new(corpus).article_groups(topic, co_topic, outlet)
}

/// Min-max normalization of one axis, written out directly.
pub fn minmax(values: &[u32]) -> Vec<f64> {
    let lo = *values.iter().min().unwrap() as f64;
    let hi = *values.iter().max().unwrap() as f64;
    values
        .iter()
        .map(|&v| if hi > lo { (v as f64 - lo) / (hi - lo) } else { 0.0 })
        .collect()
}

/// Four-way case split of a score pair against a segmentation point.
pub fn quadrant(p: f64, n: f64, sx: f64, sy: f64) -> &'static str {
    if p < sx && n < sy {
        "neutral"
    } else if p < sx {
        "negative"
    } else if n < sy {
        "positive"
    } else {
        "mixed"
    }
}
