//! Sentence-level entity linking and target-dependent sentiment.
//!
//! The built-in annotator links mentions through an alias gazetteer and
//! scores each mention against a valence lexicon. Annotations produced by
//! external models can be imported through the annotation line-record format
//! instead.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusError, CorpusSnapshot, Sentence};

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error("gazetteer: {0}")]
    Gazetteer(String),
    #[error("lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },
    #[error("annotated snapshot is corrupt: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Canonical entity identifier (a Wikipedia-style page id or URI).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(String);

impl EntityId {
    pub fn new(id: impl Into<String>) -> Self {
        EntityId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Positive,
    Negative,
    Neutral,
}

impl SentimentLabel {
    pub const ALL: [SentimentLabel; 3] = [
        SentimentLabel::Positive,
        SentimentLabel::Negative,
        SentimentLabel::Neutral,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SentimentLabel::Positive => "positive",
            SentimentLabel::Negative => "negative",
            SentimentLabel::Neutral => "neutral",
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SentimentLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positive" => Ok(SentimentLabel::Positive),
            "negative" => Ok(SentimentLabel::Negative),
            "neutral" => Ok(SentimentLabel::Neutral),
            other => Err(format!("unknown sentiment label {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GazetteerEntry {
    pub name: String,
    pub aliases: Vec<String>,
}

/// Alias table mapping surface strings to entities.
///
/// Matching is case-sensitive and only accepts matches that start and end on
/// token boundaries. An alias may belong to one entity only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gazetteer {
    entries: BTreeMap<EntityId, GazetteerEntry>,
    // Longest alias first; ties by alias text for determinism.
    aliases: Vec<(String, EntityId)>,
}

impl Gazetteer {
    pub fn new(entries: BTreeMap<EntityId, GazetteerEntry>) -> Result<Self, AnnotateError> {
        let mut owner: BTreeMap<&str, &EntityId> = BTreeMap::new();
        for (id, entry) in &entries {
            if id.as_str().trim().is_empty() {
                return Err(AnnotateError::Gazetteer("empty entity id".into()));
            }
            if entry.aliases.is_empty() {
                return Err(AnnotateError::Gazetteer(format!("{id} has no aliases")));
            }
            for alias in &entry.aliases {
                if alias.trim().is_empty() {
                    return Err(AnnotateError::Gazetteer(format!("{id} has an empty alias")));
                }
                if let Some(prev) = owner.insert(alias, id) {
                    if prev != id {
                        return Err(AnnotateError::Gazetteer(format!(
                            "alias {alias:?} is claimed by both {prev} and {id}"
                        )));
                    }
                }
            }
        }
        let mut aliases: Vec<(String, EntityId)> =
            owner.into_iter().map(|(a, id)| (a.to_string(), id.clone())).collect();
        aliases.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        Ok(Gazetteer { entries, aliases })
    }

    /// TOML table keyed by entity id:
    ///
    /// ```toml
    /// [Q22686]
    /// name = "Donald Trump"
    /// aliases = ["Donald Trump", "Trump", "President Trump"]
    /// ```
    pub fn from_toml(text: &str) -> Result<Self, AnnotateError> {
        let entries: BTreeMap<EntityId, GazetteerEntry> =
            toml::from_str(text).map_err(|e| AnnotateError::Gazetteer(e.to_string()))?;
        Self::new(entries)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.entries).expect("gazetteer serializes")
    }

    pub fn load(path: &Path) -> Result<Self, AnnotateError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn display_name(&self, id: &EntityId) -> Option<&str> {
        self.entries.get(id).map(|e| e.name.as_str())
    }

    pub fn entries(&self) -> &BTreeMap<EntityId, GazetteerEntry> {
        &self.entries
    }
}

/// Token valences in [-3, 3], keyed by lowercase token.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lexicon {
    scores: BTreeMap<String, i8>,
}

impl Lexicon {
    pub fn new(scores: BTreeMap<String, i8>) -> Result<Self, AnnotateError> {
        for (i, (term, &v)) in scores.iter().enumerate() {
            let bad = |message: String| AnnotateError::Lexicon { line: i + 1, message };
            if v == 0 || !(-3..=3).contains(&v) {
                return Err(bad(format!("valence {v} for {term:?} must be non-zero in [-3,3]")));
            }
            if term.is_empty() || *term != term.to_lowercase() {
                return Err(bad(format!("term {term:?} must be non-empty lowercase")));
            }
        }
        Ok(Lexicon { scores })
    }

    /// Tab- or whitespace-separated `token valence` lines, `#` comments.
    pub fn parse(text: &str) -> Result<Self, AnnotateError> {
        let mut scores = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| AnnotateError::Lexicon { line: i + 1, message };
            let (term, value) = line
                .rsplit_once(|c: char| c.is_whitespace())
                .ok_or_else(|| err("expected `token valence`".into()))?;
            let value: i8 = value
                .trim()
                .parse()
                .map_err(|_| err(format!("bad valence {value:?}")))?;
            if value == 0 || !(-3..=3).contains(&value) {
                return Err(err(format!("valence {value} outside [-3,3] or zero")));
            }
            let term = term.trim();
            if term.is_empty() || term != term.to_lowercase() {
                return Err(err(format!("term {term:?} must be non-empty lowercase")));
            }
            scores.insert(term.to_string(), value);
        }
        Ok(Lexicon { scores })
    }

    pub fn to_text(&self) -> String {
        self.scores.iter().map(|(t, v)| format!("{t}\t{v}\n")).collect()
    }

    pub fn load(path: &Path) -> Result<Self, AnnotateError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn valence(&self, token: &str) -> i32 {
        self.scores.get(token).copied().map_or(0, i32::from)
    }
}

/// Byte spans of word tokens: alphanumeric runs, allowing apostrophes
/// between alphanumerics ("didn't").
pub fn tokenize(text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        let inner_apostrophe =
            (c == '\'' || c == '’') && start.is_some() && chars.peek().is_some_and(|(_, n)| n.is_alphanumeric());
        if c.is_alphanumeric() || inner_apostrophe {
            start.get_or_insert(i);
        } else if let Some(s) = start.take() {
            out.push((s, i));
        }
    }
    if let Some(s) = start {
        out.push((s, text.len()));
    }
    out
}

/// An entity linked to a span of a sentence, before sentiment is assigned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityLink {
    pub entity: EntityId,
    pub surface: String,
    /// Byte offsets within the sentence text.
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityMention {
    pub article_id: String,
    pub sentence_index: usize,
    pub entity: EntityId,
    pub surface: String,
    pub start: usize,
    pub end: usize,
    pub sentiment: SentimentLabel,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn on_boundary(text: &str, start: usize, end: usize) -> bool {
    let before = text[..start].chars().next_back().is_none_or(|c| !is_word_char(c));
    let after = text[end..].chars().next().is_none_or(|c| !is_word_char(c));
    before && after
}

/// Leftmost, longest, non-overlapping alias matches on token boundaries.
pub fn link_entities(sentence: &Sentence, gazetteer: &Gazetteer) -> Vec<EntityLink> {
    let text = sentence.text.as_str();
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < text.len() {
        let found = gazetteer
            .aliases
            .iter()
            .find(|(alias, _)| text[pos..].starts_with(alias.as_str()) && on_boundary(text, pos, pos + alias.len()));
        match found {
            Some((alias, id)) => {
                let end = pos + alias.len();
                out.push(EntityLink {
                    entity: id.clone(),
                    surface: alias.clone(),
                    start: pos,
                    end,
                });
                pos = end;
            }
            None => {
                pos += text[pos..].chars().next().map_or(1, char::len_utf8);
            }
        }
    }
    out
}

/// Sum of lexicon valences over the sentence's tokens, skipping tokens that
/// overlap the mention itself; the sign decides the label.
pub fn classify_target_sentiment(sentence: &Sentence, start: usize, end: usize, lexicon: &Lexicon) -> SentimentLabel {
    let text = sentence.text.as_str();
    let score: i32 = tokenize(text)
        .into_iter()
        .filter(|&(s, e)| e <= start || s >= end)
        .map(|(s, e)| lexicon.valence(&text[s..e].to_lowercase()))
        .sum();
    match score.cmp(&0) {
        std::cmp::Ordering::Greater => SentimentLabel::Positive,
        std::cmp::Ordering::Less => SentimentLabel::Negative,
        std::cmp::Ordering::Equal => SentimentLabel::Neutral,
    }
}

/// Produces labelled mentions for one sentence.
pub trait Annotator {
    fn annotate(&self, sentence: &Sentence) -> Vec<EntityMention>;

    /// Display names for every entity this annotator can emit.
    fn entity_names(&self) -> BTreeMap<EntityId, String>;
}

pub struct LexiconAnnotator {
    pub gazetteer: Gazetteer,
    pub lexicon: Lexicon,
}

impl Annotator for LexiconAnnotator {
    fn annotate(&self, sentence: &Sentence) -> Vec<EntityMention> {
        link_entities(sentence, &self.gazetteer)
            .into_iter()
            .map(|link| EntityMention {
                sentiment: classify_target_sentiment(sentence, link.start, link.end, &self.lexicon),
                article_id: sentence.article_id.clone(),
                sentence_index: sentence.index,
                entity: link.entity,
                surface: link.surface,
                start: link.start,
                end: link.end,
            })
            .collect()
    }

    fn entity_names(&self) -> BTreeMap<EntityId, String> {
        self.gazetteer
            .entries()
            .iter()
            .map(|(id, e)| (id.clone(), e.name.clone()))
            .collect()
    }
}

/// One line of the annotation import/export format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub article_id: String,
    pub sentence_index: usize,
    pub entity_id: String,
    pub display_name: String,
    pub start: usize,
    pub end: usize,
    pub sentiment: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum AnnotationReject {
    Malformed(String),
    DanglingArticle(String),
    DanglingSentence {
        article_id: String,
        sentence_index: usize,
    },
    OffsetOutOfBounds {
        start: usize,
        end: usize,
        len: usize,
    },
    UnknownLabel(String),
    EmptyEntity,
    NameConflict {
        entity_id: String,
        existing: String,
        given: String,
    },
    Overlap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedAnnotation {
    /// 1-based line number in the import stream.
    pub line: usize,
    pub reason: AnnotationReject,
}

/// A corpus snapshot plus its entity mentions, ordered by
/// (article id, sentence index, start offset).
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedCorpus {
    snapshot: CorpusSnapshot,
    entities: BTreeMap<EntityId, String>,
    // Per article, parallel to snapshot.articles().
    mentions: Vec<Vec<EntityMention>>,
}

#[derive(Serialize, Deserialize)]
struct AnnotatedFile {
    snapshot: serde_json::Value,
    entities: BTreeMap<EntityId, String>,
    mentions: Vec<AnnotationRecord>,
}

impl AnnotatedCorpus {
    pub fn unannotated(snapshot: CorpusSnapshot) -> Self {
        let n = snapshot.len();
        AnnotatedCorpus {
            snapshot,
            entities: BTreeMap::new(),
            mentions: vec![Vec::new(); n],
        }
    }

    /// Runs an annotator over every sentence of the snapshot.
    pub fn annotate<A: Annotator + Sync>(snapshot: CorpusSnapshot, annotator: &A) -> Self {
        let per_article = |i: usize| -> Vec<EntityMention> {
            snapshot
                .sentences_at(i)
                .iter()
                .flat_map(|s| annotator.annotate(s))
                .collect()
        };
        #[cfg(feature = "parallel")]
        let mentions: Vec<Vec<EntityMention>> = {
            use rayon::prelude::*;
            (0..snapshot.len()).into_par_iter().map(per_article).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let mentions: Vec<Vec<EntityMention>> = (0..snapshot.len()).map(per_article).collect();

        let used: BTreeSet<&EntityId> = mentions.iter().flatten().map(|m| &m.entity).collect();
        let entities = annotator
            .entity_names()
            .into_iter()
            .filter(|(id, _)| used.contains(id))
            .collect();
        AnnotatedCorpus {
            snapshot,
            entities,
            mentions,
        }
    }

    pub fn snapshot(&self) -> &CorpusSnapshot {
        &self.snapshot
    }

    pub fn entities(&self) -> &BTreeMap<EntityId, String> {
        &self.entities
    }

    pub fn display_name(&self, id: &EntityId) -> Option<&str> {
        self.entities.get(id).map(String::as_str)
    }

    /// Looks an entity up by canonical id, falling back to display name.
    pub fn resolve_entity(&self, key: &str) -> Option<EntityId> {
        let id = EntityId::new(key);
        if self.entities.contains_key(&id) {
            return Some(id);
        }
        self.entities
            .iter()
            .find(|(_, name)| name.as_str() == key)
            .map(|(id, _)| id.clone())
    }

    pub fn mentions_at(&self, article_index: usize) -> &[EntityMention] {
        &self.mentions[article_index]
    }

    pub fn mentions_of(&self, article_id: &str) -> Option<&[EntityMention]> {
        self.snapshot
            .article_index(article_id)
            .map(|i| self.mentions[i].as_slice())
    }

    pub fn mentions(&self) -> impl Iterator<Item = &EntityMention> {
        self.mentions.iter().flatten()
    }

    pub fn mention_count(&self) -> usize {
        self.mentions.iter().map(Vec::len).sum()
    }

    pub fn records(&self) -> impl Iterator<Item = AnnotationRecord> + '_ {
        self.mentions().map(|m| AnnotationRecord {
            article_id: m.article_id.clone(),
            sentence_index: m.sentence_index,
            entity_id: m.entity.as_str().to_string(),
            display_name: self.entities.get(&m.entity).cloned().unwrap_or_default(),
            start: m.start,
            end: m.end,
            sentiment: m.sentiment.as_str().to_string(),
        })
    }

    /// Annotation line records, one JSON object per line.
    pub fn export_records(&self) -> String {
        self.records()
            .map(|r| serde_json::to_string(&r).expect("record serializes") + "\n")
            .collect()
    }

    /// Validates and attaches one record.
    pub fn attach(&mut self, record: AnnotationRecord) -> Result<(), AnnotationReject> {
        let sentiment: SentimentLabel = record
            .sentiment
            .parse()
            .map_err(|_| AnnotationReject::UnknownLabel(record.sentiment.clone()))?;
        let article_index = self
            .snapshot
            .article_index(&record.article_id)
            .ok_or_else(|| AnnotationReject::DanglingArticle(record.article_id.clone()))?;
        let sentence = self
            .snapshot
            .sentences_at(article_index)
            .get(record.sentence_index)
            .ok_or_else(|| AnnotationReject::DanglingSentence {
                article_id: record.article_id.clone(),
                sentence_index: record.sentence_index,
            })?;
        let len = sentence.text.len();
        if record.start >= record.end
            || record.end > len
            || !sentence.text.is_char_boundary(record.start)
            || !sentence.text.is_char_boundary(record.end)
        {
            return Err(AnnotationReject::OffsetOutOfBounds {
                start: record.start,
                end: record.end,
                len,
            });
        }
        if record.entity_id.trim().is_empty() {
            return Err(AnnotationReject::EmptyEntity);
        }
        let entity = EntityId::new(record.entity_id.clone());
        if let Some(existing) = self.entities.get(&entity) {
            if *existing != record.display_name {
                return Err(AnnotationReject::NameConflict {
                    entity_id: record.entity_id,
                    existing: existing.clone(),
                    given: record.display_name,
                });
            }
        }
        let list = &mut self.mentions[article_index];
        let overlaps = list
            .iter()
            .any(|m| m.sentence_index == record.sentence_index && m.start < record.end && record.start < m.end);
        if overlaps {
            return Err(AnnotationReject::Overlap);
        }
        let mention = EntityMention {
            article_id: record.article_id,
            sentence_index: record.sentence_index,
            surface: sentence.text[record.start..record.end].to_string(),
            start: record.start,
            end: record.end,
            entity: entity.clone(),
            sentiment,
        };
        let at = list
            .binary_search_by(|m| (m.sentence_index, m.start).cmp(&(mention.sentence_index, mention.start)))
            .unwrap_or_else(|i| i);
        list.insert(at, mention);
        self.entities.entry(entity).or_insert(record.display_name);
        Ok(())
    }

    /// Imports annotation line records, keeping valid ones and itemizing the
    /// rest. Blank lines are skipped.
    pub fn import<R: BufRead>(&mut self, reader: R) -> Result<Vec<RejectedAnnotation>, AnnotateError> {
        let mut rejected = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let outcome = serde_json::from_str::<AnnotationRecord>(&line)
                .map_err(|e| AnnotationReject::Malformed(e.to_string()))
                .and_then(|record| self.attach(record));
            if let Err(reason) = outcome {
                rejected.push(RejectedAnnotation { line: i + 1, reason });
            }
        }
        Ok(rejected)
    }

    pub fn to_canonical_json(&self) -> String {
        let snapshot: serde_json::Value =
            serde_json::from_str(&self.snapshot.to_canonical_json()).expect("snapshot json");
        let file = AnnotatedFile {
            snapshot,
            entities: self.entities.clone(),
            mentions: self.records().collect(),
        };
        serde_json::to_string(&file).expect("annotated corpus serializes")
    }

    pub fn from_canonical_json(text: &str) -> Result<Self, AnnotateError> {
        let file: AnnotatedFile = serde_json::from_str(text).map_err(|e| AnnotateError::Corrupt(e.to_string()))?;
        let snapshot = CorpusSnapshot::from_canonical_json(&file.snapshot.to_string())?;
        let mut corpus = AnnotatedCorpus::unannotated(snapshot);
        corpus.entities = file.entities;
        for record in file.mentions {
            corpus
                .attach(record)
                .map_err(|r| AnnotateError::Corrupt(format!("{r:?}")))?;
        }
        Ok(corpus)
    }

    pub fn save(&self, path: &Path) -> Result<(), AnnotateError> {
        std::fs::write(path, self.to_canonical_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, AnnotateError> {
        Self::from_canonical_json(&std::fs::read_to_string(path)?)
    }
}
