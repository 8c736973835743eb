//! Article corpus model, line-record ingestion and sentence segmentation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("outlet configuration is empty")]
    EmptyOutletSet,
    #[error("snapshot is corrupt: {0}")]
    CorruptSnapshot(String),
}

/// A news outlet name drawn from the configured outlet set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutletId(String);

impl OutletId {
    pub fn new(name: impl Into<String>) -> Self {
        OutletId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for OutletId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The closed set of outlets accepted at ingestion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutletSet(BTreeSet<OutletId>);

pub const REFERENCE_OUTLETS: [&str; 6] = [
    "ABC News",
    "Breitbart",
    "CNN",
    "Fox News",
    "New York Times",
    "Washington Post",
];

impl OutletSet {
    pub fn new<I, S>(names: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<OutletId> = names
            .into_iter()
            .map(|s| OutletId::new(s.into().trim().to_string()))
            .filter(|o| !o.0.is_empty())
            .collect();
        if set.is_empty() {
            return Err(CorpusError::EmptyOutletSet);
        }
        Ok(OutletSet(set))
    }

    pub fn reference() -> Self {
        OutletSet(REFERENCE_OUTLETS.iter().map(|s| OutletId::new(*s)).collect())
    }

    /// One outlet name per line; blank lines and `#` comments are ignored.
    pub fn parse(config: &str) -> Result<Self, CorpusError> {
        Self::new(
            config
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn contains(&self, outlet: &OutletId) -> bool {
        self.0.contains(outlet)
    }

    /// Exact name match, falling back to a case-insensitive one.
    pub fn resolve(&self, name: &str) -> Option<&OutletId> {
        let name = name.trim();
        self.0
            .iter()
            .find(|o| o.as_str() == name)
            .or_else(|| self.0.iter().find(|o| o.as_str().eq_ignore_ascii_case(name)))
    }

    pub fn iter(&self) -> impl Iterator<Item = &OutletId> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub outlet: OutletId,
    pub title: String,
    pub paragraphs: Vec<String>,
    pub published_at: DateTime<Utc>,
    pub url: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub article_id: String,
    pub index: usize,
    pub paragraph_index: usize,
    pub text: String,
    /// Byte offsets into the paragraph.
    pub char_span: (usize, usize),
}

/// Rule-based sentence splitter configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitterConfig {
    /// Tokens ending in terminal punctuation that never close a sentence.
    pub abbreviations: BTreeSet<String>,
}

impl Default for SplitterConfig {
    fn default() -> Self {
        let abbreviations = [
            "U.S.", "U.K.", "U.N.", "D.C.", "Mr.", "Mrs.", "Ms.", "Dr.", "Sen.", "Rep.", "Gov.", "Gen.", "Lt.", "Col.",
            "St.", "Jr.", "Sr.", "Inc.", "Corp.", "Co.", "vs.", "e.g.", "i.e.", "No.", "Jan.", "Feb.", "Aug.", "Sept.",
            "Oct.", "Nov.", "Dec.",
        ];
        SplitterConfig {
            abbreviations: abbreviations.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl SplitterConfig {
    pub fn with_abbreviations<I, S>(abbreviations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        SplitterConfig {
            abbreviations: abbreviations.into_iter().map(Into::into).collect(),
        }
    }
}

/// Splits one paragraph into trimmed sentence spans.
///
/// A sentence closes on `.`, `!` or `?` followed by whitespace or the end of
/// the paragraph, unless the whitespace-delimited token ending there is in the
/// abbreviation list. Whatever remains after the last break becomes a final
/// sentence, so the spans cover every non-whitespace character exactly once.
pub fn split_paragraph(text: &str, config: &SplitterConfig) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    let mut token_start = 0;

    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            token_start = i + c.len_utf8();
            continue;
        }
        if start.is_none() {
            start = Some(i);
        }
        if matches!(c, '.' | '!' | '?') {
            let end = i + c.len_utf8();
            let at_break = text[end..].chars().next().is_none_or(char::is_whitespace);
            if at_break && !config.abbreviations.contains(&text[token_start..end]) {
                if let Some(s) = start.take() {
                    spans.push((s, end));
                }
            }
        }
    }
    if let Some(s) = start {
        spans.push((s, s + text[s..].trim_end().len()));
    }
    spans
}

pub fn split_sentences(article: &Article, config: &SplitterConfig) -> Vec<Sentence> {
    let mut out = Vec::new();
    for (paragraph_index, paragraph) in article.paragraphs.iter().enumerate() {
        for (start, end) in split_paragraph(paragraph, config) {
            out.push(Sentence {
                article_id: article.id.clone(),
                index: out.len(),
                paragraph_index,
                text: paragraph[start..end].to_string(),
                char_span: (start, end),
            });
        }
    }
    out
}

/// Immutable, validated corpus. Articles are held in id order.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSnapshot {
    articles: Vec<Article>,
    sentences: Vec<Vec<Sentence>>,
    by_id: BTreeMap<String, usize>,
    fingerprint: String,
    splitter: SplitterConfig,
}

#[derive(Serialize, Deserialize)]
struct SnapshotFile {
    fingerprint: String,
    splitter: SplitterConfig,
    articles: Vec<Article>,
}

impl CorpusSnapshot {
    /// Builds a snapshot from already validated articles (ids must be unique).
    pub fn from_articles(mut articles: Vec<Article>, splitter: SplitterConfig) -> Self {
        articles.sort_by(|a, b| a.id.cmp(&b.id));
        let sentences = articles.iter().map(|a| split_sentences(a, &splitter)).collect();
        let by_id = articles.iter().enumerate().map(|(i, a)| (a.id.clone(), i)).collect();
        let fingerprint = fingerprint_of(&articles);
        CorpusSnapshot {
            articles,
            sentences,
            by_id,
            fingerprint,
            splitter,
        }
    }

    pub fn articles(&self) -> &[Article] {
        &self.articles
    }

    pub fn article(&self, id: &str) -> Option<&Article> {
        self.by_id.get(id).map(|&i| &self.articles[i])
    }

    pub fn article_index(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn sentences_of(&self, id: &str) -> Option<&[Sentence]> {
        self.by_id.get(id).map(|&i| self.sentences[i].as_slice())
    }

    pub fn sentences_at(&self, index: usize) -> &[Sentence] {
        &self.sentences[index]
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn splitter(&self) -> &SplitterConfig {
        &self.splitter
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    /// Canonical serialization: byte-identical for identical content.
    pub fn to_canonical_json(&self) -> String {
        let file = SnapshotFile {
            fingerprint: self.fingerprint.clone(),
            splitter: self.splitter.clone(),
            articles: self.articles.clone(),
        };
        serde_json::to_string(&file).expect("snapshot serializes")
    }

    pub fn from_canonical_json(text: &str) -> Result<Self, CorpusError> {
        let file: SnapshotFile = serde_json::from_str(text).map_err(|e| CorpusError::CorruptSnapshot(e.to_string()))?;
        let snapshot = Self::from_articles(file.articles, file.splitter);
        if snapshot.fingerprint != file.fingerprint {
            return Err(CorpusError::CorruptSnapshot("fingerprint mismatch".into()));
        }
        Ok(snapshot)
    }

    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        fs::write(path, self.to_canonical_json()).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_canonical_json(&text)
    }
}

fn fingerprint_of(articles: &[Article]) -> String {
    let canonical = serde_json::to_vec(articles).expect("articles serialize");
    hex::encode(Sha256::digest(&canonical))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RejectReason {
    Malformed(String),
    DuplicateId(String),
    UnknownOutlet(String),
    Invalid(String),
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::Malformed(msg) => write!(f, "malformed record: {msg}"),
            RejectReason::DuplicateId(id) => write!(f, "duplicate article id {id:?}"),
            RejectReason::UnknownOutlet(o) => write!(f, "unknown outlet {o:?}"),
            RejectReason::Invalid(msg) => write!(f, "invalid record: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedRecord {
    pub file: PathBuf,
    /// 1-based line number.
    pub line: usize,
    pub reason: RejectReason,
}

#[derive(Debug)]
pub struct IngestReport {
    pub snapshot: CorpusSnapshot,
    pub rejected: Vec<RejectedRecord>,
    pub input_records: usize,
}

impl IngestReport {
    pub fn accepted(&self) -> usize {
        self.snapshot.len()
    }
}

fn collect_files(path: &Path, out: &mut Vec<PathBuf>) -> Result<(), CorpusError> {
    let io = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let meta = fs::metadata(path).map_err(io)?;
    if meta.is_file() {
        out.push(path.to_path_buf());
        return Ok(());
    }
    for entry in fs::read_dir(path).map_err(io)? {
        let entry = entry.map_err(io)?;
        let p = entry.path();
        let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with('.') {
            continue;
        }
        collect_files(&p, out)?;
    }
    Ok(())
}

type ParsedLine = (usize, Result<Article, RejectReason>);

fn parse_lines(text: &str, outlets: &OutletSet) -> Vec<ParsedLine> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| (i + 1, parse_record(line, outlets)))
        .collect()
}

fn parse_record(line: &str, outlets: &OutletSet) -> Result<Article, RejectReason> {
    let article: Article = serde_json::from_str(line).map_err(|e| RejectReason::Malformed(e.to_string()))?;
    if article.id.trim().is_empty() {
        return Err(RejectReason::Invalid("empty id".into()));
    }
    if article.paragraphs.is_empty() {
        return Err(RejectReason::Invalid("no paragraphs".into()));
    }
    if !outlets.contains(&article.outlet) {
        return Err(RejectReason::UnknownOutlet(article.outlet.0));
    }
    Ok(article)
}

/// Ingests a corpus file, or every file under a directory, in line-record
/// format. Files are visited in path order so duplicate resolution (first
/// occurrence wins) is deterministic.
pub fn ingest(path: &Path, outlets: &OutletSet, splitter: &SplitterConfig) -> Result<IngestReport, CorpusError> {
    let mut files = Vec::new();
    collect_files(path, &mut files)?;
    files.sort();

    let texts = files
        .iter()
        .map(|f| {
            fs::read_to_string(f).map_err(|source| CorpusError::Io {
                path: f.clone(),
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    #[cfg(feature = "parallel")]
    let parsed: Vec<Vec<ParsedLine>> = {
        use rayon::prelude::*;
        texts.par_iter().map(|t| parse_lines(t, outlets)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parsed: Vec<Vec<ParsedLine>> = texts.iter().map(|t| parse_lines(t, outlets)).collect();

    let mut seen = BTreeSet::new();
    let mut articles = Vec::new();
    let mut rejected = Vec::new();
    let mut input_records = 0;
    for (file, lines) in files.iter().zip(parsed) {
        for (line, result) in lines {
            input_records += 1;
            let reason = match result {
                Ok(article) if seen.insert(article.id.clone()) => {
                    articles.push(article);
                    continue;
                }
                Ok(article) => RejectReason::DuplicateId(article.id),
                Err(reason) => reason,
            };
            rejected.push(RejectedRecord {
                file: file.clone(),
                line,
                reason,
            });
        }
    }

    Ok(IngestReport {
        snapshot: CorpusSnapshot::from_articles(articles, splitter.clone()),
        rejected,
        input_records,
    })
}
