//! Article queries for the review stage: polarity-grouped listings,
//! entity highlighting and topic narration.

use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::{classify, SegmentationPoint, SentimentCategory};
use crate::annotate::{EntityId, SentimentLabel};
use crate::corpus::OutletId;
use crate::workbench::Workbench;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum ReviewError {
    #[error("unknown topic {0}")]
    UnknownTopic(String),
    #[error("unknown outlet {0}")]
    UnknownOutlet(String),
    #[error("unknown article {0}")]
    UnknownArticle(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleListing {
    pub article_id: String,
    pub outlet: OutletId,
    pub title: String,
    pub published_at: DateTime<Utc>,
    /// Document-level sentiment toward the query topic.
    pub polarity: SentimentLabel,
    pub matched_topics: Vec<EntityId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleGroups {
    pub positive: Vec<ArticleListing>,
    pub negative: Vec<ArticleListing>,
    pub neutral: Vec<ArticleListing>,
}

impl ArticleGroups {
    pub fn len(&self) -> usize {
        self.positive.len() + self.negative.len() + self.neutral.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn group(&self, label: SentimentLabel) -> &[ArticleListing] {
        match label {
            SentimentLabel::Positive => &self.positive,
            SentimentLabel::Negative => &self.negative,
            SentimentLabel::Neutral => &self.neutral,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ArticleQuery {
    pub topic: EntityId,
    pub co_topic: Option<EntityId>,
    pub outlet: Option<OutletId>,
    pub polarity: Option<SentimentLabel>,
}

impl ArticleQuery {
    pub fn topic(topic: EntityId) -> Self {
        ArticleQuery {
            topic,
            co_topic: None,
            outlet: None,
            polarity: None,
        }
    }

    pub fn with_co_topic(mut self, co_topic: EntityId) -> Self {
        self.co_topic = Some(co_topic);
        self
    }

    pub fn in_outlet(mut self, outlet: OutletId) -> Self {
        self.outlet = Some(outlet);
        self
    }
}

/// Articles mentioning the topic (and the co-topic and outlet, when given),
/// grouped by document-level polarity toward the topic. Each group is
/// ordered newest first, then by id.
pub fn articles_for(wb: &Workbench, query: &ArticleQuery) -> Result<ArticleGroups, ReviewError> {
    let known = |e: &EntityId| wb.corpus().entities().contains_key(e);
    if !known(&query.topic) {
        return Err(ReviewError::UnknownTopic(query.topic.to_string()));
    }
    if let Some(co) = &query.co_topic {
        if !known(co) {
            return Err(ReviewError::UnknownTopic(co.to_string()));
        }
    }
    if let Some(o) = &query.outlet {
        if !wb.outlets().contains(o) {
            return Err(ReviewError::UnknownOutlet(o.to_string()));
        }
    }

    let snapshot = wb.corpus().snapshot();
    let mut groups = ArticleGroups::default();
    for (coverage, article) in wb.index().in_outlet(query.outlet.as_ref()).map(|c| {
        let a = snapshot.article(&c.article_id).expect("index mirrors snapshot");
        (c, a)
    }) {
        let Some(polarity) = coverage.label(&query.topic) else {
            continue;
        };
        if let Some(co) = &query.co_topic {
            if !coverage.mentions(co) {
                continue;
            }
        }
        if query.polarity.is_some_and(|p| p != polarity) {
            continue;
        }
        let mut matched_topics = vec![query.topic.clone()];
        matched_topics.extend(query.co_topic.iter().cloned());
        let listing = ArticleListing {
            article_id: article.id.clone(),
            outlet: article.outlet.clone(),
            title: article.title.clone(),
            published_at: article.published_at,
            polarity,
            matched_topics,
        };
        match polarity {
            SentimentLabel::Positive => groups.positive.push(listing),
            SentimentLabel::Negative => groups.negative.push(listing),
            SentimentLabel::Neutral => groups.neutral.push(listing),
        }
    }
    for g in [&mut groups.positive, &mut groups.negative, &mut groups.neutral] {
        g.sort_by(|a, b| {
            b.published_at
                .cmp(&a.published_at)
                .then_with(|| a.article_id.cmp(&b.article_id))
        });
    }
    Ok(groups)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Highlight {
    pub paragraph_index: usize,
    /// Byte offsets within the paragraph.
    pub start: usize,
    pub end: usize,
    pub entity: EntityId,
    pub sentiment: SentimentLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighlightedArticle {
    pub article_id: String,
    pub outlet: OutletId,
    pub title: String,
    pub published_at: DateTime<Utc>,
    pub url: String,
    pub paragraphs: Vec<String>,
    pub highlights: Vec<Highlight>,
}

/// The article's text with every mention of `topics` marked with its
/// sentence-level sentiment.
pub fn highlighted_article(
    wb: &Workbench,
    article_id: &str,
    topics: &BTreeSet<EntityId>,
) -> Result<HighlightedArticle, ReviewError> {
    let corpus = wb.corpus();
    let snapshot = corpus.snapshot();
    let article = snapshot
        .article(article_id)
        .ok_or_else(|| ReviewError::UnknownArticle(article_id.to_string()))?;
    let sentences = snapshot.sentences_of(article_id).unwrap_or_default();
    let highlights = corpus
        .mentions_of(article_id)
        .unwrap_or_default()
        .iter()
        .filter(|m| topics.contains(&m.entity))
        .map(|m| {
            let s = &sentences[m.sentence_index];
            Highlight {
                paragraph_index: s.paragraph_index,
                start: s.char_span.0 + m.start,
                end: s.char_span.0 + m.end,
                entity: m.entity.clone(),
                sentiment: m.sentiment,
            }
        })
        .collect();
    Ok(HighlightedArticle {
        article_id: article.id.clone(),
        outlet: article.outlet.clone(),
        title: article.title.clone(),
        published_at: article.published_at,
        url: article.url.clone(),
        paragraphs: article.paragraphs.clone(),
        highlights,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Narration {
    pub entity: EntityId,
    pub display_name: String,
    pub total_articles: u32,
    pub pos_articles: u32,
    pub neg_articles: u32,
    pub neu_articles: u32,
    pub score_pos: f64,
    pub score_neg: f64,
    pub category: SentimentCategory,
    pub text: String,
}

fn category_phrase(c: SentimentCategory) -> &'static str {
    match c {
        SentimentCategory::Neutral => "neutral coverage: neither side stands out",
        SentimentCategory::Positive => "positive coverage: many positive articles, few negative ones",
        SentimentCategory::Negative => "negative coverage: many negative articles, few positive ones",
        SentimentCategory::Mixed => "mixed coverage: many positive and many negative articles at once",
    }
}

/// Plain-language explanation of how a topic's counts become its category.
pub fn narration(wb: &Workbench, topic: &EntityId, seg: SegmentationPoint) -> Result<Narration, ReviewError> {
    let stats = wb
        .topic(topic)
        .ok_or_else(|| ReviewError::UnknownTopic(topic.to_string()))?;
    let name = wb.corpus().display_name(topic).unwrap_or(topic.as_str()).to_string();
    let category = classify(stats.score_pos, stats.score_neg, seg);
    let text = format!(
        "{name} is mentioned in {} articles: {} lean positive, {} lean negative and {} are neutral toward it. \
         Compared with every other topic, that places its positive score at {:.2} and its negative score at {:.2} \
         (0 is the fewest articles of any topic, 1 the most). With the segmentation point at ({:.2}, {:.2}), \
         {name} falls in the {} region, which means {}.",
        stats.total_articles,
        stats.pos_articles,
        stats.neg_articles,
        stats.neu_articles,
        stats.score_pos,
        stats.score_neg,
        seg.sx,
        seg.sy,
        category,
        category_phrase(category),
    );
    Ok(Narration {
        entity: topic.clone(),
        display_name: name,
        total_articles: stats.total_articles,
        pos_articles: stats.pos_articles,
        neg_articles: stats.neg_articles,
        neu_articles: stats.neu_articles,
        score_pos: stats.score_pos,
        score_neg: stats.score_neg,
        category,
        text,
    })
}
