mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::oracle;
use newslens_core::aggregate::{
    classify, color_bucket, cooccurrence_counts, document_sentiment, minmax_scores, scatter_data, topic_counts,
    topic_counts_sequential, topic_stats, CoverageIndex, SegmentationPoint, SentenceSentimentCounts, SentimentCategory,
    TopicCounts,
};
use newslens_core::annotate::{AnnotatedCorpus, EntityId, LexiconAnnotator, SentimentLabel};
use newslens_core::corpus::{CorpusSnapshot, OutletId, SplitterConfig};
use newslens_core::fixture::random_corpus;
use newslens_core::review::{articles_for, ArticleQuery};
use newslens_core::Workbench;
use proptest::prelude::*;

fn annotated(seed: u64, articles: usize, entities: usize) -> (AnnotatedCorpus, newslens_core::corpus::OutletSet) {
    let f = random_corpus(seed, articles, entities);
    let snapshot = CorpusSnapshot::from_articles(f.articles, SplitterConfig::default());
    let annotator = LexiconAnnotator {
        gazetteer: f.gazetteer,
        lexicon: f.lexicon,
    };
    (AnnotatedCorpus::annotate(snapshot, &annotator), f.outlets)
}

fn counts_map(counts: &[TopicCounts]) -> BTreeMap<String, [u32; 3]> {
    counts
        .iter()
        .map(|c| (c.entity.to_string(), [c.pos, c.neg, c.neu]))
        .collect()
}

fn label_index(l: SentimentLabel) -> usize {
    match l {
        SentimentLabel::Positive => oracle::POS,
        SentimentLabel::Negative => oracle::NEG,
        SentimentLabel::Neutral => oracle::NEU,
    }
}

#[test]
fn max_rule_exhaustive() {
    for p in 0..=5 {
        for n in 0..=5 {
            for u in 0..=5 {
                let c = SentenceSentimentCounts::new(p, n, u);
                if c.total() == 0 {
                    assert!(document_sentiment(c).is_err());
                    continue;
                }
                let label = document_sentiment(c).unwrap();
                assert_eq!(c.get(label), p.max(n).max(u));
                assert_eq!(label_index(label), oracle::max_rule([p, n, u]), "{p} {n} {u}");
            }
        }
    }
}

#[test]
fn color_buckets_by_hand() {
    assert_eq!(color_bucket(1, 5), 1);
    assert_eq!(color_bucket(9, 5), 1);
    assert_eq!(color_bucket(10, 5), 2);
    assert_eq!(color_bucket(999, 5), 3);
    assert_eq!(color_bucket(1000, 5), 4);
    assert_eq!(color_bucket(10_000_000, 5), 5);
    assert_eq!(color_bucket(0, 5), 1);
}

#[test]
fn hive_of_eight_matches_recomputation() {
    for seed in 0..40 {
        let (corpus, outlets) = annotated(seed, 150, 14);
        let mut wb = Workbench::new(corpus, outlets);
        wb.candidate_count = 8;
        let seg = SegmentationPoint::new(0.4, 0.6).unwrap();
        for o in wb.outlets().iter().cloned().collect::<Vec<_>>() {
            let cooc = oracle::cooccurrence(wb.corpus(), Some(o.as_str()));
            let labels = oracle::document_labels(wb.corpus());
            let outlet_articles: BTreeSet<String> = wb
                .corpus()
                .snapshot()
                .articles()
                .iter()
                .filter(|a| a.outlet == o)
                .map(|a| a.id.clone())
                .collect();
            for center in wb.corpus().entities().keys() {
                let c = center.as_str();
                let mut partners: Vec<(String, u32)> = cooc
                    .iter()
                    .filter_map(|((a, b), n)| {
                        (a == c)
                            .then(|| (b.clone(), *n))
                            .or_else(|| (b == c).then(|| (a.clone(), *n)))
                    })
                    .collect();
                partners.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
                partners.truncate(8);
                let hive = wb.data_hive(center, &o, seg).unwrap();
                let expected_ids: Vec<String> = partners.iter().map(|p| p.0.clone()).collect();
                let got_ids: Vec<String> = hive.candidates.iter().map(|e| e.to_string()).collect();
                assert_eq!(got_ids, expected_ids);
                if partners.is_empty() {
                    continue;
                }
                let counts: Vec<[u32; 3]> = expected_ids
                    .iter()
                    .map(|cand| {
                        let mut k = [0u32; 3];
                        for art in &outlet_articles {
                            if labels.contains_key(&(art.clone(), c.to_string())) {
                                if let Some(&l) = labels.get(&(art.clone(), cand.clone())) {
                                    k[l] += 1;
                                }
                            }
                        }
                        k
                    })
                    .collect();
                let sp = oracle::minmax(&counts.iter().map(|k| k[0]).collect::<Vec<_>>());
                let sn = oracle::minmax(&counts.iter().map(|k| k[1]).collect::<Vec<_>>());
                for (i, cand) in expected_ids.iter().enumerate() {
                    assert_eq!(
                        hive.assignments[&EntityId::new(cand.clone())].as_str(),
                        oracle::quadrant(sp[i], sn[i], seg.sx, seg.sy)
                    );
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counts_match_recount(seed in any::<u64>()) {
        let (corpus, outlets) = annotated(seed, 120, 20);
        let index = CoverageIndex::build(&corpus);
        prop_assert_eq!(counts_map(&topic_counts(&index, None)), oracle::topic_counts(&corpus, None));
        prop_assert_eq!(topic_counts(&index, None), topic_counts_sequential(&index, None));
        for o in outlets.iter() {
            prop_assert_eq!(
                counts_map(&topic_counts(&index, Some(o))),
                oracle::topic_counts(&corpus, Some(o.as_str()))
            );
        }
    }

    #[test]
    fn cooccurrence_matches_nested_loops(seed in any::<u64>()) {
        let (corpus, outlets) = annotated(seed, 120, 20);
        let index = CoverageIndex::build(&corpus);
        for o in std::iter::once(None).chain(outlets.iter().map(Some)) {
            let table = cooccurrence_counts(&index, o);
            let got: BTreeMap<(String, String), u32> = table
                .pairs()
                .map(|(a, b, c)| ((a.to_string(), b.to_string()), c))
                .collect();
            prop_assert_eq!(&got, &oracle::cooccurrence(&corpus, o.map(OutletId::as_str)));
            for ((a, b), c) in &got {
                let (a, b) = (EntityId::new(a.clone()), EntityId::new(b.clone()));
                prop_assert_eq!(table.count(&a, &b), *c);
                prop_assert_eq!(table.count(&b, &a), *c);
            }
        }
    }

    #[test]
    fn article_groups_match_filter(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let (corpus, outlets) = annotated(seed, 100, 10);
        let wb = Workbench::new(corpus, outlets);
        let entities: Vec<EntityId> = wb.corpus().entities().keys().cloned().collect();
        let topic = pick.get(&entities).clone();
        let co = entities[(pick.index(entities.len()) + 1) % entities.len()].clone();
        let outlet = pick.get(&wb.outlets().iter().cloned().collect::<Vec<_>>()).clone();
        let queries = [
            ArticleQuery::topic(topic.clone()),
            ArticleQuery::topic(topic.clone()).in_outlet(outlet.clone()),
            ArticleQuery::topic(topic.clone()).with_co_topic(co.clone()),
            ArticleQuery::topic(topic.clone()).with_co_topic(co.clone()).in_outlet(outlet.clone()),
        ];
        for q in queries {
            let groups = articles_for(&wb, &q).unwrap();
            let expected = oracle::article_groups(
                wb.corpus(),
                q.topic.as_str(),
                q.co_topic.as_ref().map(EntityId::as_str),
                q.outlet.as_ref().map(OutletId::as_str),
            );
            for (label, want) in SentimentLabel::ALL.into_iter().map(|l| (l, &expected[label_index(l)])) {
                let got: BTreeSet<String> = groups.group(label).iter().map(|l| l.article_id.clone()).collect();
                prop_assert_eq!(got.len(), groups.group(label).len());
                prop_assert_eq!(&got, want);
                let listing = groups.group(label);
                for w in listing.windows(2) {
                    prop_assert!(
                        (w[0].published_at, std::cmp::Reverse(&w[0].article_id))
                            >= (w[1].published_at, std::cmp::Reverse(&w[1].article_id))
                    );
                }
            }
        }
    }

    #[test]
    fn minmax_properties(counts in prop::collection::vec((0u32..500, 0u32..500), 1..40)) {
        let pop: Vec<TopicCounts> = counts
            .iter()
            .enumerate()
            .map(|(i, &(p, n))| TopicCounts { entity: EntityId::new(format!("T{i:02}")), pos: p, neg: n, neu: 0 })
            .collect();
        let scores = minmax_scores(&pop).unwrap();
        let sp = oracle::minmax(&counts.iter().map(|c| c.0).collect::<Vec<_>>());
        let sn = oracle::minmax(&counts.iter().map(|c| c.1).collect::<Vec<_>>());
        for (i, s) in scores.iter().enumerate() {
            prop_assert!((s.pos - sp[i]).abs() <= 1e-12);
            prop_assert!((s.neg - sn[i]).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&s.pos) && (0.0..=1.0).contains(&s.neg));
            for (j, t) in scores.iter().enumerate() {
                if counts[i].0 <= counts[j].0 {
                    prop_assert!(s.pos <= t.pos);
                }
                if counts[i].1 <= counts[j].1 {
                    prop_assert!(s.neg <= t.neg);
                }
            }
        }
    }

    #[test]
    fn classify_is_a_partition(p in 0.0f64..=1.0, n in 0.0f64..=1.0, sx in 0.0f64..=1.0, sy in 0.0f64..=1.0) {
        let seg = SegmentationPoint::new(sx, sy).unwrap();
        prop_assert_eq!(classify(p, n, seg).as_str(), oracle::quadrant(p, n, sx, sy));
        prop_assert_eq!(classify(p, n, SegmentationPoint::new(0.0, 0.0).unwrap()), SentimentCategory::Mixed);
    }

    #[test]
    fn threshold_filter_is_antitone(seed in any::<u64>(), t1 in 0u32..40, t2 in 0u32..40) {
        let (corpus, _) = annotated(seed, 150, 20);
        let stats = topic_stats(&CoverageIndex::build(&corpus), None);
        let (lo, hi) = (t1.min(t2), t1.max(t2));
        let seg = SegmentationPoint::default();
        let at = |t| scatter_data(&stats, t, seg, 5).into_iter().map(|p| p.stats.entity).collect::<BTreeSet<_>>();
        let (big, small) = (at(lo), at(hi));
        prop_assert!(small.is_subset(&big));
        // Scores are not renormalized after filtering.
        for p in scatter_data(&stats, hi, seg, 5) {
            let orig = stats.iter().find(|s| s.entity == p.stats.entity).unwrap();
            prop_assert_eq!(orig.score_pos, p.stats.score_pos);
        }
    }
}
