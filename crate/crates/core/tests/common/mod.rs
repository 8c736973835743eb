#![allow(dead_code)]

pub mod oracle;

use std::path::Path;

use newslens_core::annotate::{AnnotatedCorpus, EntityId, LexiconAnnotator};
use newslens_core::corpus::{ingest, OutletId, SplitterConfig};
use newslens_core::fixture::{generate, FixtureSpec, GeneratedFixture};
use newslens_core::Workbench;

pub const WHITE_HOUSE: &str = "Q35525";
pub const UNITED_STATES: &str = "Q30";

pub fn id(s: &str) -> EntityId {
    EntityId::new(s)
}

pub fn outlet(s: &str) -> OutletId {
    OutletId::new(s)
}

pub fn scenario() -> GeneratedFixture {
    generate(&FixtureSpec::scenario()).unwrap()
}

/// Runs the file-based pipeline: write fixture, ingest, annotate.
pub fn pipeline_from_files(dir: &Path) -> AnnotatedCorpus {
    let fixture = scenario();
    fixture.write_to(dir).unwrap();
    let outlets = newslens_core::corpus::OutletSet::load(&dir.join("outlets.txt")).unwrap();
    let report = ingest(&dir.join("corpus.jsonl"), &outlets, &SplitterConfig::default()).unwrap();
    assert!(report.rejected.is_empty(), "{:?}", report.rejected);
    let annotator = LexiconAnnotator {
        gazetteer: newslens_core::annotate::Gazetteer::load(&dir.join("gazetteer.toml")).unwrap(),
        lexicon: newslens_core::annotate::Lexicon::load(&dir.join("lexicon.tsv")).unwrap(),
    };
    AnnotatedCorpus::annotate(report.snapshot, &annotator)
}

pub fn scenario_workbench() -> Workbench {
    let fixture = scenario();
    let snapshot =
        newslens_core::corpus::CorpusSnapshot::from_articles(fixture.articles.clone(), SplitterConfig::default());
    let annotator = LexiconAnnotator {
        gazetteer: fixture.gazetteer.clone(),
        lexicon: fixture.lexicon.clone(),
    };
    Workbench::new(AnnotatedCorpus::annotate(snapshot, &annotator), fixture.outlets)
}

use newslens_core::aggregate::SentimentCategory;
use newslens_core::session::{ParagraphRef, Session, SessionError, Stage};
use rand::{Rng, SeedableRng};

pub const BREITBART: &str = "Breitbart";

/// The belief hive a reader brings to Breitbart's White House coverage.
/// It agrees with the data everywhere except four topics.
pub const PRESCRIBED_BELIEFS: [(&str, SentimentCategory); 20] = {
    use SentimentCategory::{Mixed as M, Negative as N, Neutral as U, Positive as P};
    [
        ("Q22686", P), // Donald Trump (data: mixed)
        ("Q30", N),    // United States (data: mixed)
        ("Q6279", M),
        ("Q84263196", M),
        ("Q11268", M),
        ("Q24313", P),
        ("Q29468", P),
        ("Q7297950", P),
        ("Q11201", P),
        ("Q801", P),
        ("Q148", N),
        ("Q29552", N),
        ("Q170581", N),
        ("Q583725", U), // CDC (data: negative)
        ("Q16240", N),
        ("Q1439", P), // Texas (data: neutral)
        ("Q1384", U),
        ("Q159", U),
        ("Q212", U),
        ("Q96", U),
    ]
};
pub const PRESCRIBED_CENTER: SentimentCategory = SentimentCategory::Negative;

/// Plays one scripted round with the prescribed belief hive and returns the
/// session after reveal.
pub fn scripted_round(wb: &Workbench) -> Session {
    let mut s = Session::new("scripted");
    s.start_round().unwrap();
    s.choose_topic_outlet(wb, &id(WHITE_HOUSE), &outlet(BREITBART)).unwrap();
    for (topic, region) in PRESCRIBED_BELIEFS {
        s.assign(&id(topic), region).unwrap();
    }
    s.set_center_sentiment(PRESCRIBED_CENTER).unwrap();
    s.finalize().unwrap();
    s.reveal(wb).unwrap();
    s
}

pub struct RandomRun {
    pub session: Session,
    pub early_reveals: usize,
    pub early_reveals_rejected: usize,
}

/// Drives a session with a random mix of legal and illegal actions.
pub fn random_session(wb: &Workbench, seed: u64) -> RandomRun {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut s = Session::new(format!("rand-{seed}"));
    if rng.gen_bool(0.5) {
        s.set_segmentation(rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0))
            .unwrap();
    }
    let centers: Vec<EntityId> = wb
        .topic_stats()
        .iter()
        .filter(|t| t.total_articles >= 20)
        .map(|t| t.entity.clone())
        .collect();
    let outlets: Vec<OutletId> = wb.outlets().iter().cloned().collect();
    let mut early_reveals = 0;
    let mut early_reveals_rejected = 0;
    for _ in 0..rng.gen_range(0..40) {
        let stage = s.current().map(|r| r.stage);
        match rng.gen_range(0..9) {
            0 => {
                let _ = s.start_round();
            }
            1 => {
                let c = &centers[rng.gen_range(0..centers.len())];
                let o = &outlets[rng.gen_range(0..outlets.len())];
                let _ = s.choose_topic_outlet(wb, c, o);
            }
            2 | 3 => {
                let candidates = s
                    .current()
                    .and_then(|r| r.user_hive.as_ref())
                    .map(|h| h.candidates.clone())
                    .unwrap_or_default();
                for c in candidates {
                    if rng.gen_bool(0.8) {
                        let _ = s.assign(&c, SentimentCategory::ALL[rng.gen_range(0..4)]);
                    }
                }
                let _ = s.set_center_sentiment(SentimentCategory::ALL[rng.gen_range(0..4)]);
            }
            4 => {
                let _ = s.finalize();
            }
            5 => {
                let finalized = s
                    .current()
                    .and_then(|r| r.user_hive.as_ref())
                    .is_some_and(|h| h.finalized);
                let result = s.reveal(wb).map(|_| ());
                if stage == Some(Stage::BeliefElicitation) && !finalized {
                    early_reveals += 1;
                    if result == Err(SessionError::NotFinalized) {
                        early_reveals_rejected += 1;
                    }
                }
            }
            6 => {
                let pick = s.current().and_then(|r| {
                    r.conflicts
                        .as_ref()
                        .and_then(|c| c.conflicts.first().map(|c| c.entity.clone()))
                        .or_else(|| r.user_hive.as_ref().map(|h| h.candidates[0].clone()))
                });
                if let Some(t) = pick {
                    let _ = s.select_conflict(&t);
                }
            }
            7 => {
                let article = &wb.corpus().snapshot().articles()[rng.gen_range(0..wb.corpus().snapshot().len())];
                let reference = rng.gen_bool(0.5).then(|| ParagraphRef {
                    article_id: article.id.clone(),
                    paragraph_index: 0,
                });
                let _ = s.add_note(wb, format!("note {}", rng.gen::<u16>()), reference);
            }
            _ => {
                let _ = s.finish_round();
            }
        }
    }
    RandomRun {
        session: s,
        early_reveals,
        early_reveals_rejected,
    }
}

/// Whether every round's log shows finalize strictly before reveal and
/// timestamps never decrease.
pub fn log_is_well_ordered(s: &Session) -> bool {
    let monotone = s.log.windows(2).all(|w| w[0].at <= w[1].at && w[0].seq + 1 == w[1].seq);
    let ordered = (0..s.rounds.len()).all(|round| {
        let actions: Vec<&str> = s
            .log
            .iter()
            .filter(|t| t.round == round)
            .map(|t| t.action.as_str())
            .collect();
        match actions.iter().position(|a| *a == "reveal") {
            Some(r) => actions[..r].contains(&"finalize"),
            None => true,
        }
    });
    monotone && ordered
}

/// The scenario workbench, built once per test binary.
pub fn shared_scenario() -> &'static Workbench {
    static WB: std::sync::OnceLock<Workbench> = std::sync::OnceLock::new();
    WB.get_or_init(scenario_workbench)
}
