//! Synthetic corpus generator.
//!
//! A fixture spec lists entities and blocks of articles with exact
//! document-level label counts. The generator writes article text whose
//! annotation by the built-in gazetteer + lexicon annotator reproduces those
//! labels, so downstream counts are known in advance.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::{DateTime, Duration, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::annotate::{EntityId, Gazetteer, GazetteerEntry, Lexicon, SentimentLabel};
use crate::corpus::{Article, OutletId, OutletSet};

/// The White House scenario used by the acceptance suite and demo.
pub const SCENARIO_SPEC: &str = include_str!("../fixtures/scenario.toml");

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("fixture spec: {0}")]
    Spec(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Deserialize)]
pub struct EntitySpec {
    pub id: String,
    pub name: String,
    pub aliases: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct BlockSpec {
    pub outlet: String,
    /// Entity id → `[positive, negative, neutral]` article counts.
    pub labels: BTreeMap<String, [u32; 3]>,
}

impl BlockSpec {
    fn size(&self) -> Result<u32, FixtureError> {
        let mut sizes = self.labels.values().map(|c| c.iter().sum::<u32>());
        let first = sizes
            .next()
            .ok_or_else(|| FixtureError::Spec(format!("block for {} lists no entities", self.outlet)))?;
        if sizes.any(|s| s != first) {
            return Err(FixtureError::Spec(format!(
                "block for {} has label counts with different totals",
                self.outlet
            )));
        }
        Ok(first)
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct FixtureSpec {
    pub seed: u64,
    pub start: DateTime<Utc>,
    pub days: u32,
    #[serde(default)]
    pub outlets: Option<Vec<String>>,
    #[serde(rename = "entity")]
    pub entities: Vec<EntitySpec>,
    #[serde(rename = "block")]
    pub blocks: Vec<BlockSpec>,
}

impl FixtureSpec {
    pub fn parse(text: &str) -> Result<Self, FixtureError> {
        toml::from_str(text).map_err(|e| FixtureError::Spec(e.to_string()))
    }

    pub fn scenario() -> Self {
        Self::parse(SCENARIO_SPEC).expect("bundled scenario parses")
    }

    pub fn load(path: &Path) -> Result<Self, FixtureError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Valence words used by the sentence templates.
pub const FIXTURE_LEXICON: &str = "\
# token\tvalence
applauded\t2
attacked\t-2
blamed\t-2
criticism\t-2
delays\t-1
failure\t-2
hailed\t2
praise\t2
sharp\t-1
strong\t1
success\t2
welcomed\t2
";

const POSITIVE: [&str; 5] = [
    "{} drew praise from analysts.",
    "Supporters applauded {} on Tuesday.",
    "{} won strong backing in the latest poll.",
    "Commentators hailed {} after the vote.",
    "Local leaders welcomed {} during the visit.",
];
const NEGATIVE: [&str; 5] = [
    "Critics attacked {} over the decision.",
    "{} faced sharp criticism this week.",
    "Many blamed {} for the delays.",
    "Reports described a failure by {} to act.",
    "{} drew criticism from several groups.",
];
const NEUTRAL: [&str; 5] = [
    "{} issued a statement on Monday.",
    "{} was mentioned in the morning briefing.",
    "Officials met with {} to discuss the schedule.",
    "{} released new figures.",
    "Reporters asked {} about the plan.",
];
const FILLER: [&str; 5] = [
    "The report was published late in the evening.",
    "Further details are expected next week.",
    "Officials declined to comment.",
    "The figures cover the previous quarter.",
    "Additional reporting came from staff writers.",
];

/// Sentence-label patterns whose max-rule outcome is the given document
/// label, including the tie cases.
fn patterns(label: SentimentLabel) -> &'static [&'static [SentimentLabel]] {
    use SentimentLabel::{Negative as N, Neutral as U, Positive as P};
    match label {
        P => &[&[P], &[P, P], &[P, P, N], &[P, P, U]],
        N => &[&[N], &[N, P], &[N, N, U], &[N, N, P]],
        U => &[&[U], &[U, P], &[U, N], &[U, U, P], &[U, P, N]],
    }
}

fn template(label: SentimentLabel) -> &'static [&'static str; 5] {
    match label {
        SentimentLabel::Positive => &POSITIVE,
        SentimentLabel::Negative => &NEGATIVE,
        SentimentLabel::Neutral => &NEUTRAL,
    }
}

fn slug(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

#[derive(Debug, Clone)]
pub struct GeneratedFixture {
    pub articles: Vec<Article>,
    pub gazetteer: Gazetteer,
    pub lexicon: Lexicon,
    pub outlets: OutletSet,
}

impl GeneratedFixture {
    pub fn corpus_jsonl(&self) -> String {
        let mut out = String::new();
        for a in &self.articles {
            out.push_str(&serde_json::to_string(a).expect("article serializes"));
            out.push('\n');
        }
        out
    }

    pub fn outlets_text(&self) -> String {
        self.outlets.iter().fold(String::new(), |mut s, o| {
            let _ = writeln!(s, "{o}");
            s
        })
    }

    /// Writes `corpus.jsonl`, `gazetteer.toml`, `lexicon.tsv` and
    /// `outlets.txt` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), FixtureError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("corpus.jsonl"), self.corpus_jsonl())?;
        std::fs::write(dir.join("gazetteer.toml"), self.gazetteer.to_toml())?;
        std::fs::write(dir.join("lexicon.tsv"), self.lexicon.to_text())?;
        std::fs::write(dir.join("outlets.txt"), self.outlets_text())?;
        Ok(())
    }
}

pub fn generate(spec: &FixtureSpec) -> Result<GeneratedFixture, FixtureError> {
    let outlets = match &spec.outlets {
        Some(names) => OutletSet::new(names.iter().cloned()),
        None => Ok(OutletSet::reference()),
    }
    .map_err(|e| FixtureError::Spec(e.to_string()))?;

    let gazetteer = Gazetteer::new(
        spec.entities
            .iter()
            .map(|e| {
                (
                    EntityId::new(e.id.clone()),
                    GazetteerEntry {
                        name: e.name.clone(),
                        aliases: e.aliases.clone(),
                    },
                )
            })
            .collect(),
    )
    .map_err(|e| FixtureError::Spec(e.to_string()))?;
    let lexicon = Lexicon::parse(FIXTURE_LEXICON).expect("fixture lexicon is valid");

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut articles = Vec::new();
    for (b, block) in spec.blocks.iter().enumerate() {
        let outlet = outlets
            .resolve(&block.outlet)
            .ok_or_else(|| FixtureError::Spec(format!("block {b}: unknown outlet {:?}", block.outlet)))?
            .clone();
        let n = block.size()? as usize;

        // Per entity, a shuffled list of document labels, one per article.
        let mut plan: Vec<(&EntitySpec, Vec<SentimentLabel>)> = Vec::new();
        for (id, counts) in &block.labels {
            let entity = spec
                .entities
                .iter()
                .find(|e| &e.id == id)
                .ok_or_else(|| FixtureError::Spec(format!("block {b}: unknown entity {id:?}")))?;
            let mut labels: Vec<SentimentLabel> = SentimentLabel::ALL
                .iter()
                .zip(counts)
                .flat_map(|(l, &c)| std::iter::repeat_n(*l, c as usize))
                .collect();
            labels.shuffle(&mut rng);
            plan.push((entity, labels));
        }

        for i in 0..n {
            articles.push(write_article(&mut rng, spec, &outlet, &plan, i, articles.len()));
        }
    }

    Ok(GeneratedFixture {
        articles,
        gazetteer,
        lexicon,
        outlets,
    })
}

fn write_article(
    rng: &mut ChaCha8Rng,
    spec: &FixtureSpec,
    outlet: &OutletId,
    plan: &[(&EntitySpec, Vec<SentimentLabel>)],
    i: usize,
    serial: usize,
) -> Article {
    let mut sentences: Vec<String> = Vec::new();
    for (entity, labels) in plan {
        let pattern = patterns(labels[i]).choose(rng).expect("non-empty patterns");
        for &sentence_label in pattern.iter() {
            let alias = entity.aliases.choose(rng).expect("aliases validated");
            let t = template(sentence_label).choose(rng).expect("templates");
            sentences.push(t.replace("{}", alias));
        }
    }
    for _ in 0..rng.gen_range(1..=2) {
        sentences.push(FILLER.choose(rng).expect("filler").to_string());
    }
    sentences.shuffle(rng);

    let mut paragraphs = Vec::new();
    let mut rest = sentences.as_slice();
    while !rest.is_empty() {
        let take = rng.gen_range(1..=3).min(rest.len());
        paragraphs.push(rest[..take].join(" "));
        rest = &rest[take..];
    }

    let names: Vec<&str> = plan.iter().map(|(e, _)| e.name.as_str()).collect();
    let offset =
        Duration::days(rng.gen_range(0..i64::from(spec.days.max(1)))) + Duration::seconds(rng.gen_range(0..86_400));
    let id = format!("{}-{:05}", slug(outlet.as_str()), serial);
    Article {
        url: format!("https://news.example.org/{}/{id}", slug(outlet.as_str())),
        id,
        outlet: outlet.clone(),
        title: format!("Coverage update: {}", names.join(", ")),
        paragraphs,
        published_at: spec.start + offset,
    }
}

const RANDOM_WORDS: [&str; 12] = [
    "the",
    "report",
    "said",
    "on",
    "Monday",
    "officials",
    "plan",
    "new",
    "city",
    "market",
    "vote",
    "talks",
];
const RANDOM_VALENCE: [&str; 6] = ["praise", "success", "strong", "criticism", "failure", "sharp"];

/// A small random corpus for property tests: up to `max_articles` articles
/// over up to `max_entities` entities, with random sentences mixing filler,
/// valence words and entity aliases. Deterministic for a given seed.
pub fn random_corpus(seed: u64, max_articles: usize, max_entities: usize) -> GeneratedFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outlets = OutletSet::reference();
    let outlet_list: Vec<OutletId> = outlets.iter().cloned().collect();

    let n_entities = rng.gen_range(1..=max_entities.max(1));
    let mut entries = BTreeMap::new();
    let mut aliases: Vec<String> = Vec::new();
    for i in 0..n_entities {
        let short = format!("Ent{i:02}");
        let mut list = vec![short.clone()];
        if rng.gen_bool(0.3) {
            list.push(format!("{short} Group"));
        }
        aliases.extend(list.iter().cloned());
        entries.insert(
            EntityId::new(format!("E{i:02}")),
            GazetteerEntry {
                name: format!("Entity {i}"),
                aliases: list,
            },
        );
    }
    let gazetteer = Gazetteer::new(entries).expect("generated aliases are unique");
    let lexicon = Lexicon::parse(FIXTURE_LEXICON).expect("fixture lexicon is valid");

    let n_articles = rng.gen_range(1..=max_articles.max(1));
    let start: DateTime<Utc> = "2020-01-01T00:00:00Z".parse().expect("valid date");
    let articles = (0..n_articles)
        .map(|i| {
            let paragraphs = (0..rng.gen_range(1..=3))
                .map(|_| {
                    (0..rng.gen_range(1..=4))
                        .map(|_| {
                            let words: Vec<&str> = (0..rng.gen_range(2..=9))
                                .map(|_| match rng.gen_range(0..10) {
                                    0..=2 => aliases.choose(&mut rng).expect("aliases").as_str(),
                                    3..=4 => RANDOM_VALENCE.choose(&mut rng).expect("words"),
                                    _ => RANDOM_WORDS.choose(&mut rng).expect("words"),
                                })
                                .collect();
                            format!("{}.", words.join(" "))
                        })
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            let outlet = outlet_list.choose(&mut rng).expect("outlets").clone();
            Article {
                id: format!("r{i:04}"),
                url: format!("https://news.example.org/r/{i}"),
                outlet,
                title: format!("Article {i}"),
                paragraphs,
                published_at: start + Duration::hours(rng.gen_range(0..24 * 90)),
            }
        })
        .collect();

    GeneratedFixture {
        articles,
        gazetteer,
        lexicon,
        outlets,
    }
}
