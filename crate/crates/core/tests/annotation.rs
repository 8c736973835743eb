mod common;

use std::collections::BTreeMap;

use newslens_core::annotate::{
    link_entities, AnnotatedCorpus, AnnotationRecord, AnnotationReject, EntityId, Gazetteer, GazetteerEntry,
    LexiconAnnotator,
};
use newslens_core::corpus::{Article, CorpusSnapshot, OutletId, Sentence, SplitterConfig};
use newslens_core::fixture::random_corpus;
use proptest::prelude::*;

fn sentence(text: &str) -> Sentence {
    Sentence {
        article_id: "a1".into(),
        index: 0,
        paragraph_index: 0,
        text: text.into(),
        char_span: (0, text.len()),
    }
}

fn is_word(c: Option<char>) -> bool {
    c.is_some_and(char::is_alphanumeric)
}

/// Every occurrence of `alias` in `text` that starts and ends on a token
/// boundary, by scanning all byte positions.
fn occurrences(text: &str, alias: &str) -> Vec<(usize, usize)> {
    (0..text.len())
        .filter(|&i| text.is_char_boundary(i) && text[i..].starts_with(alias))
        .map(|i| (i, i + alias.len()))
        .filter(|&(s, e)| !is_word(text[..s].chars().last()) && !is_word(text[e..].chars().next()))
        .collect()
}

#[test]
fn two_entities_at_scanned_offsets() {
    let fixture = common::scenario();
    let text = "The White House responded to China on Friday.";
    let links = link_entities(&sentence(text), &fixture.gazetteer);
    let found: Vec<(String, usize, usize)> = links.iter().map(|l| (l.entity.to_string(), l.start, l.end)).collect();
    let wh = text.find("White House").unwrap();
    let cn = text.find("China").unwrap();
    assert_eq!(
        found,
        vec![
            ("Q35525".to_string(), wh, wh + "White House".len()),
            ("Q148".to_string(), cn, cn + "China".len())
        ]
    );
}

#[test]
fn mention_does_not_score_its_own_tokens() {
    let mut entries = BTreeMap::new();
    entries.insert(
        EntityId::new("A"),
        GazetteerEntry {
            name: "Good Corp".into(),
            aliases: vec!["Good Corp".into()],
        },
    );
    entries.insert(
        EntityId::new("B"),
        GazetteerEntry {
            name: "Acme".into(),
            aliases: vec!["Acme".into()],
        },
    );
    let annotator = LexiconAnnotator {
        gazetteer: Gazetteer::new(entries).unwrap(),
        lexicon: newslens_core::annotate::Lexicon::parse("good 1\n").unwrap(),
    };
    let article = Article {
        id: "a1".into(),
        outlet: OutletId::new("CNN"),
        title: "t".into(),
        paragraphs: vec!["Good Corp met Acme.".into()],
        published_at: "2020-01-01T00:00:00Z".parse().unwrap(),
        url: String::new(),
    };
    let corpus = AnnotatedCorpus::annotate(
        CorpusSnapshot::from_articles(vec![article], SplitterConfig::default()),
        &annotator,
    );
    let labels: Vec<(String, String)> = corpus.records().map(|r| (r.entity_id, r.sentiment)).collect();
    assert_eq!(
        labels,
        vec![("A".into(), "neutral".into()), ("B".into(), "positive".into())]
    );
}

fn fifty_records(corpus: &AnnotatedCorpus) -> Vec<String> {
    let snap = corpus.snapshot();
    let mut lines = Vec::new();
    let mut k = 0;
    'outer: for a in snap.articles() {
        for s in snap.sentences_of(&a.id).unwrap() {
            let end = s.text.find(' ').unwrap_or(s.text.len());
            let base = AnnotationRecord {
                article_id: a.id.clone(),
                sentence_index: s.index,
                entity_id: format!("X{}", k % 4),
                display_name: format!("Ext {}", k % 4),
                start: 0,
                end,
                sentiment: ["positive", "negative", "neutral"][k % 3].into(),
            };
            let record = match k % 10 {
                0 => AnnotationRecord {
                    article_id: "missing".into(),
                    ..base
                },
                1 => AnnotationRecord {
                    sentence_index: 999,
                    ..base
                },
                2 => AnnotationRecord {
                    end: s.text.len() + 5,
                    ..base
                },
                3 => AnnotationRecord {
                    sentiment: "angry".into(),
                    ..base
                },
                4 => AnnotationRecord {
                    entity_id: " ".into(),
                    ..base
                },
                5 => AnnotationRecord {
                    display_name: "Someone else".into(),
                    ..base
                },
                _ => base,
            };
            lines.push(serde_json::to_string(&record).unwrap());
            k += 1;
            if k == 49 {
                break 'outer;
            }
        }
    }
    lines.push("not a record".into());
    lines
}

/// Independent validity check for imported records against the snapshot.
fn valid(
    corpus: &AnnotatedCorpus,
    line: &str,
    names: &mut BTreeMap<String, String>,
    taken: &mut Vec<(String, usize)>,
) -> bool {
    let Ok(r) = serde_json::from_str::<AnnotationRecord>(line) else {
        return false;
    };
    let Some(sentences) = corpus.snapshot().sentences_of(&r.article_id) else {
        return false;
    };
    let Some(s) = sentences.get(r.sentence_index) else {
        return false;
    };
    if r.start >= r.end || r.end > s.text.len() {
        return false;
    }
    if !["positive", "negative", "neutral"].contains(&r.sentiment.as_str()) || r.entity_id.trim().is_empty() {
        return false;
    }
    if names.get(&r.entity_id).is_some_and(|n| *n != r.display_name) {
        return false;
    }
    // Every generated span starts at 0, so two records overlap exactly when
    // they share a sentence.
    let key = (r.article_id.clone(), r.sentence_index);
    if taken.contains(&key) {
        return false;
    }
    taken.push(key);
    names.insert(r.entity_id, r.display_name);
    true
}

#[test]
fn fifty_record_import_counts_valid_records() {
    let f = random_corpus(7, 60, 5);
    let snapshot = CorpusSnapshot::from_articles(f.articles, SplitterConfig::default());
    let mut corpus = AnnotatedCorpus::unannotated(snapshot);
    let lines = fifty_records(&corpus);
    assert_eq!(lines.len(), 50);

    let mut names = BTreeMap::new();
    let mut taken = Vec::new();
    let expected = lines
        .iter()
        .filter(|l| valid(&corpus, l, &mut names, &mut taken))
        .count();

    let rejected = corpus.import(lines.join("\n").as_bytes()).unwrap();
    assert_eq!(corpus.mention_count(), expected);
    assert_eq!(rejected.len(), 50 - expected);
    assert!(rejected
        .iter()
        .any(|r| matches!(r.reason, AnnotationReject::Malformed(_)) && r.line == 50));
    assert!(rejected
        .iter()
        .any(|r| matches!(r.reason, AnnotationReject::NameConflict { .. })));

    // Re-importing the export of a corpus reproduces it.
    let mut again = AnnotatedCorpus::unannotated(corpus.snapshot().clone());
    assert!(again.import(corpus.export_records().as_bytes()).unwrap().is_empty());
    assert_eq!(again.export_records(), corpus.export_records());
}

#[test]
fn annotated_corpus_round_trips() {
    let f = random_corpus(11, 80, 12);
    let annotator = LexiconAnnotator {
        gazetteer: f.gazetteer,
        lexicon: f.lexicon,
    };
    let corpus = AnnotatedCorpus::annotate(
        CorpusSnapshot::from_articles(f.articles, SplitterConfig::default()),
        &annotator,
    );
    let back = AnnotatedCorpus::from_canonical_json(&corpus.to_canonical_json()).unwrap();
    assert_eq!(back, corpus);
    assert_eq!(back.to_canonical_json(), corpus.to_canonical_json());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn links_are_maximal_leftmost_longest(seed in any::<u64>()) {
        let f = random_corpus(seed, 20, 12);
        let snapshot = CorpusSnapshot::from_articles(f.articles, SplitterConfig::default());
        let aliases: Vec<(String, EntityId)> = f
            .gazetteer
            .entries()
            .iter()
            .flat_map(|(id, e)| e.aliases.iter().map(move |a| (a.clone(), id.clone())))
            .collect();
        for i in 0..snapshot.len() {
            for s in snapshot.sentences_at(i) {
                let links = link_entities(s, &f.gazetteer);
                let mut covered_to = 0;
                for l in &links {
                    prop_assert_eq!(&s.text[l.start..l.end], l.surface.as_str());
                    prop_assert!(aliases.iter().any(|(a, id)| a == &l.surface && id == &l.entity));
                    prop_assert!(l.start >= covered_to);
                    // Nothing matched in the gap before this link, and no longer
                    // alias matches where it starts.
                    for (a, _) in &aliases {
                        for (st, en) in occurrences(&s.text, a) {
                            prop_assert!(!(st >= covered_to && st < l.start));
                            if st == l.start {
                                prop_assert!(en <= l.end);
                            }
                        }
                    }
                    covered_to = l.end;
                }
                for (a, _) in &aliases {
                    prop_assert!(occurrences(&s.text, a).iter().all(|&(st, _)| st < covered_to));
                }
            }
        }
    }
}
