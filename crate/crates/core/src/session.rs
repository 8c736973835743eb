//! The three-stage assessment workflow as an explicit state machine.
//!
//! Each round moves TopicSelection → BeliefElicitation → ArticleReview →
//! Done. The data hive of a round is computed only by [`Session::reveal`],
//! which refuses to run until the user hive is finalized.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::{AggregateError, SegmentationPoint, SentimentCategory};
use crate::annotate::EntityId;
use crate::corpus::OutletId;
use crate::hive::{detect_conflicts, ConflictReport, HiveError, HiveSpec};
use crate::workbench::Workbench;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    TopicSelection,
    BeliefElicitation,
    ArticleReview,
    Done,
}

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub enum SessionError {
    #[error("a round is already in progress")]
    ActiveRound,
    #[error("no round is in progress")]
    NoActiveRound,
    #[error("action requires stage {expected:?} but the round is in {actual:?}")]
    WrongStage { expected: Stage, actual: Stage },
    #[error("unknown topic {0}")]
    UnknownTopic(String),
    #[error("unknown outlet {0}")]
    UnknownOutlet(String),
    #[error("topic {topic} has {total} articles, below the threshold of {threshold}")]
    BelowThreshold {
        topic: EntityId,
        total: u32,
        threshold: u32,
    },
    #[error("topic {0} has no co-occurring topics under this outlet")]
    NoCandidates(EntityId),
    #[error("the user hive must be finalized before the data hive is revealed")]
    NotFinalized,
    #[error("the data hive was already revealed")]
    AlreadyRevealed,
    #[error("the data hive has not been revealed yet")]
    NotRevealed,
    #[error("{0} is neither a conflict nor a candidate of this round")]
    NotSelectable(EntityId),
    #[error("note reference to article {article_id} paragraph {paragraph_index} does not exist")]
    DanglingReference { article_id: String, paragraph_index: usize },
    #[error(transparent)]
    Hive(#[from] HiveError),
    #[error("{0}")]
    Segmentation(String),
}

impl From<AggregateError> for SessionError {
    fn from(e: AggregateError) -> Self {
        SessionError::Segmentation(e.to_string())
    }
}

impl SessionError {
    /// Stable machine-readable reason code.
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::ActiveRound => "active_round",
            SessionError::NoActiveRound => "no_active_round",
            SessionError::WrongStage { .. } => "wrong_stage",
            SessionError::UnknownTopic(_) => "unknown_topic",
            SessionError::UnknownOutlet(_) => "unknown_outlet",
            SessionError::BelowThreshold { .. } => "below_threshold",
            SessionError::NoCandidates(_) => "no_candidates",
            SessionError::NotFinalized => "hive_not_finalized",
            SessionError::AlreadyRevealed => "already_revealed",
            SessionError::NotRevealed => "not_revealed",
            SessionError::NotSelectable(_) => "not_selectable",
            SessionError::DanglingReference { .. } => "dangling_reference",
            SessionError::Hive(HiveError::NotACandidate(_)) => "not_a_candidate",
            SessionError::Hive(HiveError::Finalized) => "hive_finalized",
            SessionError::Hive(HiveError::Incomplete(_)) => "hive_incomplete",
            SessionError::Hive(_) => "hive_error",
            SessionError::Segmentation(_) => "bad_segmentation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParagraphRef {
    pub article_id: String,
    pub paragraph_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Note {
    pub text: String,
    pub created_at: DateTime<Utc>,
    pub reference: Option<ParagraphRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub stage: Stage,
    pub topic: Option<EntityId>,
    pub outlet: Option<OutletId>,
    pub user_hive: Option<HiveSpec>,
    pub data_hive: Option<HiveSpec>,
    pub conflicts: Option<ConflictReport>,
    pub selected_conflict: Option<EntityId>,
    pub notes: Vec<Note>,
}

impl Round {
    fn new() -> Self {
        Round {
            stage: Stage::TopicSelection,
            topic: None,
            outlet: None,
            user_hive: None,
            data_hive: None,
            conflicts: None,
            selected_conflict: None,
            notes: Vec::new(),
        }
    }

    /// The (center, selected topic, outlet) scope of article queries.
    pub fn article_scope(&self) -> Option<(&EntityId, &EntityId, &OutletId)> {
        Some((
            self.topic.as_ref()?,
            self.selected_conflict.as_ref()?,
            self.outlet.as_ref()?,
        ))
    }
}

/// One entry of the append-only transition log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub seq: u64,
    pub round: usize,
    pub action: String,
    pub from: Option<Stage>,
    pub to: Stage,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub rounds: Vec<Round>,
    pub seg: SegmentationPoint,
    pub threshold: u32,
    pub log: Vec<Transition>,
}

impl Session {
    pub fn new(id: impl Into<String>) -> Self {
        Self::with_clock(id, Utc::now())
    }

    pub fn with_clock(id: impl Into<String>, created_at: DateTime<Utc>) -> Self {
        Session {
            id: id.into(),
            created_at,
            rounds: Vec::new(),
            seg: SegmentationPoint::default(),
            threshold: 0,
            log: Vec::new(),
        }
    }

    // Timestamps never go backwards within a session.
    fn now(&self) -> DateTime<Utc> {
        let last = self.log.last().map_or(self.created_at, |t| t.at);
        Utc::now().max(last)
    }

    fn record(&mut self, action: &str, from: Option<Stage>, to: Stage) {
        let at = self.now();
        let round = self.rounds.len().saturating_sub(1);
        self.log.push(Transition {
            seq: self.log.len() as u64,
            round,
            action: action.to_string(),
            from,
            to,
            at,
        });
    }

    pub fn current(&self) -> Option<&Round> {
        self.rounds.last().filter(|r| r.stage != Stage::Done)
    }

    fn current_mut(&mut self) -> Result<&mut Round, SessionError> {
        self.rounds
            .last_mut()
            .filter(|r| r.stage != Stage::Done)
            .ok_or(SessionError::NoActiveRound)
    }

    fn expect_stage(&mut self, expected: Stage) -> Result<&mut Round, SessionError> {
        let round = self.current_mut()?;
        if round.stage != expected {
            return Err(SessionError::WrongStage {
                expected,
                actual: round.stage,
            });
        }
        Ok(round)
    }

    pub fn set_segmentation(&mut self, sx: f64, sy: f64) -> Result<(), SessionError> {
        self.seg = SegmentationPoint::new(sx, sy)?;
        Ok(())
    }

    pub fn set_threshold(&mut self, threshold: u32) {
        self.threshold = threshold;
    }

    /// Opens a new round in topic selection ("Try another").
    pub fn start_round(&mut self) -> Result<&Round, SessionError> {
        if self.current().is_some() {
            return Err(SessionError::ActiveRound);
        }
        self.rounds.push(Round::new());
        self.record("start_round", None, Stage::TopicSelection);
        Ok(self.rounds.last().expect("just pushed"))
    }

    pub fn choose_topic_outlet(
        &mut self,
        wb: &Workbench,
        topic: &EntityId,
        outlet: &OutletId,
    ) -> Result<&Round, SessionError> {
        self.expect_stage(Stage::TopicSelection)?;
        let stats = wb
            .topic(topic)
            .ok_or_else(|| SessionError::UnknownTopic(topic.to_string()))?;
        if stats.total_articles < self.threshold {
            return Err(SessionError::BelowThreshold {
                topic: topic.clone(),
                total: stats.total_articles,
                threshold: self.threshold,
            });
        }
        if !wb.outlets().contains(outlet) {
            return Err(SessionError::UnknownOutlet(outlet.to_string()));
        }
        let candidates = wb.candidates(topic, outlet)?;
        if candidates.is_empty() {
            return Err(SessionError::NoCandidates(topic.clone()));
        }
        let hive = HiveSpec::new_user(topic.clone(), outlet.clone(), candidates)?;
        let round = self.current_mut()?;
        round.topic = Some(topic.clone());
        round.outlet = Some(outlet.clone());
        round.user_hive = Some(hive);
        round.stage = Stage::BeliefElicitation;
        self.record("choose", Some(Stage::TopicSelection), Stage::BeliefElicitation);
        Ok(self.rounds.last().expect("active round"))
    }

    fn user_hive_mut(&mut self) -> Result<&mut HiveSpec, SessionError> {
        let round = self.expect_stage(Stage::BeliefElicitation)?;
        if round.data_hive.is_some() {
            return Err(SessionError::Hive(HiveError::Finalized));
        }
        Ok(round.user_hive.as_mut().expect("belief stage has a user hive"))
    }

    pub fn assign(&mut self, topic: &EntityId, region: SentimentCategory) -> Result<(), SessionError> {
        self.user_hive_mut()?.assign(topic, region)?;
        self.record("assign", Some(Stage::BeliefElicitation), Stage::BeliefElicitation);
        Ok(())
    }

    pub fn set_center_sentiment(&mut self, category: SentimentCategory) -> Result<(), SessionError> {
        self.user_hive_mut()?.set_center_sentiment(category)?;
        self.record("set_center", Some(Stage::BeliefElicitation), Stage::BeliefElicitation);
        Ok(())
    }

    pub fn finalize(&mut self) -> Result<(), SessionError> {
        self.user_hive_mut()?.finalize()?;
        self.record("finalize", Some(Stage::BeliefElicitation), Stage::BeliefElicitation);
        Ok(())
    }

    /// Computes the data hive and the conflict report. Only legal once the
    /// user hive is finalized, and only once per round.
    pub fn reveal(&mut self, wb: &Workbench) -> Result<&ConflictReport, SessionError> {
        let seg = self.seg;
        let round = self.expect_stage(Stage::BeliefElicitation)?;
        if round.data_hive.is_some() {
            return Err(SessionError::AlreadyRevealed);
        }
        let user = round.user_hive.as_ref().expect("belief stage has a user hive");
        if !user.finalized {
            return Err(SessionError::NotFinalized);
        }
        let data = wb.data_hive(&user.center, &user.outlet, seg)?;
        let report = detect_conflicts(user, &data)?;
        round.data_hive = Some(data);
        round.conflicts = Some(report);
        self.record("reveal", Some(Stage::BeliefElicitation), Stage::BeliefElicitation);
        Ok(self
            .rounds
            .last()
            .and_then(|r| r.conflicts.as_ref())
            .expect("just revealed"))
    }

    /// Picks a topic to investigate; moves the round to article review.
    /// Also used to switch topics while already reviewing.
    pub fn select_conflict(&mut self, topic: &EntityId) -> Result<&Round, SessionError> {
        let round = self.current_mut()?;
        let from = round.stage;
        match from {
            Stage::BeliefElicitation | Stage::ArticleReview => {}
            actual => {
                return Err(SessionError::WrongStage {
                    expected: Stage::BeliefElicitation,
                    actual,
                })
            }
        }
        let conflicts = round.conflicts.as_ref().ok_or(SessionError::NotRevealed)?;
        let user = round.user_hive.as_ref().expect("revealed round has a user hive");
        if !conflicts.contains(topic) && !user.candidates.contains(topic) {
            return Err(SessionError::NotSelectable(topic.clone()));
        }
        round.selected_conflict = Some(topic.clone());
        round.stage = Stage::ArticleReview;
        self.record("select_conflict", Some(from), Stage::ArticleReview);
        Ok(self.rounds.last().expect("active round"))
    }

    pub fn add_note(
        &mut self,
        wb: &Workbench,
        text: impl Into<String>,
        reference: Option<ParagraphRef>,
    ) -> Result<&Note, SessionError> {
        self.expect_stage(Stage::ArticleReview)?;
        if let Some(r) = &reference {
            let exists = wb
                .corpus()
                .snapshot()
                .article(&r.article_id)
                .is_some_and(|a| r.paragraph_index < a.paragraphs.len());
            if !exists {
                return Err(SessionError::DanglingReference {
                    article_id: r.article_id.clone(),
                    paragraph_index: r.paragraph_index,
                });
            }
        }
        let created_at = self.now();
        self.record("note", Some(Stage::ArticleReview), Stage::ArticleReview);
        let round = self.current_mut()?;
        round.notes.push(Note {
            text: text.into(),
            created_at,
            reference,
        });
        Ok(round.notes.last().expect("just pushed"))
    }

    /// Closes the current round after article review.
    pub fn finish_round(&mut self) -> Result<(), SessionError> {
        self.expect_stage(Stage::ArticleReview)?.stage = Stage::Done;
        self.record("finish", Some(Stage::ArticleReview), Stage::Done);
        Ok(())
    }

    /// Finishes the reviewed round and opens the next one.
    pub fn try_another(&mut self) -> Result<&Round, SessionError> {
        self.finish_round()?;
        self.start_round()
    }

    pub fn summary(&self) -> SessionSummary {
        SessionSummary {
            session_id: self.id.clone(),
            rounds: self
                .rounds
                .iter()
                .enumerate()
                .map(|(i, r)| RoundSummary {
                    number: i + 1,
                    stage: r.stage,
                    topic: r.topic.clone(),
                    outlet: r.outlet.clone(),
                    user_hive: r.user_hive.clone(),
                    data_hive: r.data_hive.clone(),
                    conflicts: r.conflicts.clone(),
                    selected_conflict: r.selected_conflict.clone(),
                    notes: r.notes.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub number: usize,
    pub stage: Stage,
    pub topic: Option<EntityId>,
    pub outlet: Option<OutletId>,
    pub user_hive: Option<HiveSpec>,
    pub data_hive: Option<HiveSpec>,
    pub conflicts: Option<ConflictReport>,
    pub selected_conflict: Option<EntityId>,
    pub notes: Vec<Note>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub rounds: Vec<RoundSummary>,
}
