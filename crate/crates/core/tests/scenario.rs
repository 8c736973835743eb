mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use newslens_core::aggregate::{topic_stats, CoverageIndex, SentimentCategory};
use newslens_core::annotate::EntityId;
use newslens_core::hive::{layout, CellRole, SLOTS_PER_REGION};
use newslens_core::review::{articles_for, highlighted_article, narration, ArticleQuery};
use newslens_core::SegmentationPoint;

#[test]
fn file_pipeline_reproduces_scenario_counts() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = pipeline_from_files(dir.path());
    let index = CoverageIndex::build(&corpus);
    let all = topic_stats(&index, None);
    let wh = all.iter().find(|s| s.entity == id(WHITE_HOUSE)).unwrap();
    assert_eq!((wh.pos_articles, wh.neg_articles, wh.neu_articles), (89, 146, 0));
    assert_eq!(wh.total_articles, 235);

    let bb = outlet(BREITBART);
    let by_outlet = topic_stats(&index, Some(&bb));
    let us = by_outlet.iter().find(|s| s.entity == id(UNITED_STATES)).unwrap();
    assert_eq!((us.pos_articles, us.neg_articles), (114, 158));
}

#[test]
fn white_house_reads_as_mixed_overall() {
    let wb = scenario_workbench();
    let seg = SegmentationPoint::default();
    let point = wb
        .scatter(0, seg)
        .into_iter()
        .find(|p| p.stats.entity == id(WHITE_HOUSE))
        .unwrap();
    assert_eq!(point.category, SentimentCategory::Mixed);
    let text = narration(&wb, &id(WHITE_HOUSE), seg).unwrap().text;
    assert!(text.contains("89") && text.contains("146") && text.contains("mixed"));
}

#[test]
fn threshold_220_keeps_white_house() {
    let wb = scenario_workbench();
    let seg = SegmentationPoint::default();
    let all: BTreeSet<EntityId> = wb.scatter(0, seg).into_iter().map(|p| p.stats.entity).collect();
    let high: BTreeSet<EntityId> = wb.scatter(220, seg).into_iter().map(|p| p.stats.entity).collect();
    assert!(high.is_subset(&all));
    assert!(high.len() < all.len());
    assert!(high.contains(&id(WHITE_HOUSE)));
}

#[test]
fn breitbart_white_house_hive() {
    let wb = scenario_workbench();
    let bb = outlet(BREITBART);
    let candidates = wb.candidates(&id(WHITE_HOUSE), &bb).unwrap();
    assert_eq!(candidates.len(), 20);
    assert!(candidates.contains(&id(UNITED_STATES)));

    let hive = wb
        .data_hive(&id(WHITE_HOUSE), &bb, SegmentationPoint::default())
        .unwrap();
    assert_eq!(hive.center_sentiment, SentimentCategory::Negative);
    let mut per_region: BTreeMap<SentimentCategory, usize> = BTreeMap::new();
    for c in hive.assignments.values() {
        *per_region.entry(*c).or_default() += 1;
    }
    assert!(SentimentCategory::ALL.iter().all(|c| per_region[c] == SLOTS_PER_REGION));

    let cells = layout(&hive).cells;
    assert_eq!(cells.len(), 21);
    let coords: BTreeSet<_> = cells.iter().map(|c| c.at).collect();
    assert_eq!(coords.len(), 21);
    assert_eq!(layout(&hive), layout(&hive.clone()));
    assert!(cells.iter().all(|c| c.slot < SLOTS_PER_REGION));
    assert_eq!(cells.iter().filter(|c| c.role == CellRole::Center).count(), 1);
}

#[test]
fn prescribed_beliefs_give_four_conflicts() {
    let wb = scenario_workbench();
    let s = scripted_round(&wb);
    let report = s.rounds[0].conflicts.as_ref().unwrap();
    assert_eq!(report.count, 4);
    let topics: Vec<&str> = report.conflicts.iter().map(|c| c.entity.as_str()).collect();
    assert_eq!(topics, vec!["Q22686", "Q30", "Q583725", "Q1439"]);
}

#[test]
fn united_states_at_breitbart_listings() {
    let wb = scenario_workbench();
    let q = ArticleQuery::topic(id(UNITED_STATES)).in_outlet(outlet(BREITBART));
    let groups = articles_for(&wb, &q).unwrap();
    assert_eq!((groups.positive.len(), groups.negative.len()), (114, 158));
    assert_eq!(groups.len(), 304);

    let scoped = articles_for(&wb, &q.clone().with_co_topic(id(WHITE_HOUSE))).unwrap();
    assert_eq!(
        (scoped.positive.len(), scoped.negative.len(), scoped.neutral.len()),
        (7, 9, 2)
    );
}

#[test]
fn highlights_match_annotation_scan() {
    let wb = scenario_workbench();
    let topics: BTreeSet<EntityId> = [id(WHITE_HOUSE), id(UNITED_STATES)].into();
    let snap = wb.corpus().snapshot();
    for article in snap.articles().iter().step_by(37) {
        let h = highlighted_article(&wb, &article.id, &topics).unwrap();
        let sentences = snap.sentences_of(&article.id).unwrap();
        let expected: Vec<(usize, usize, usize, String)> = wb
            .corpus()
            .records()
            .filter(|r| r.article_id == article.id && topics.contains(&EntityId::new(r.entity_id.clone())))
            .map(|r| {
                let s = &sentences[r.sentence_index];
                (
                    s.paragraph_index,
                    s.char_span.0 + r.start,
                    s.char_span.0 + r.end,
                    r.sentiment,
                )
            })
            .collect();
        let got: Vec<(usize, usize, usize, String)> = h
            .highlights
            .iter()
            .map(|x| (x.paragraph_index, x.start, x.end, x.sentiment.to_string()))
            .collect();
        assert_eq!(got, expected);
        for x in &h.highlights {
            let text = &h.paragraphs[x.paragraph_index][x.start..x.end];
            assert!(!text.is_empty());
        }
    }
    let none = highlighted_article(&wb, &snap.articles()[0].id, &BTreeSet::new()).unwrap();
    assert!(none.highlights.is_empty());
}
