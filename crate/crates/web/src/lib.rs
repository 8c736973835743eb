//! WebAssembly bindings for the static demo page. Every call returns a JSON
//! string; errors come back as plain message strings.

use std::collections::BTreeMap;

use newslens_core::aggregate::{SegmentationPoint, SentimentCategory};
use newslens_core::annotate::{AnnotatedCorpus, EntityId, LexiconAnnotator};
use newslens_core::corpus::{CorpusSnapshot, OutletId, SplitterConfig};
use newslens_core::fixture::{generate, FixtureSpec};
use newslens_core::hive::{detect_conflicts, layout, HiveLayout, HiveSpec};
use newslens_core::Workbench;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// The bundled White House scenario, annotated and aggregated in memory.
#[wasm_bindgen]
pub struct Demo {
    wb: Workbench,
}

impl Default for Demo {
    fn default() -> Self {
        Self::new()
    }
}

fn seg(sx: f64, sy: f64) -> Result<SegmentationPoint, String> {
    SegmentationPoint::new(sx, sy).map_err(|e| e.to_string())
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Demo {
        let fixture = generate(&FixtureSpec::scenario()).expect("bundled scenario generates");
        let snapshot = CorpusSnapshot::from_articles(fixture.articles, SplitterConfig::default());
        let annotator = LexiconAnnotator {
            gazetteer: fixture.gazetteer,
            lexicon: fixture.lexicon,
        };
        Demo {
            wb: Workbench::new(AnnotatedCorpus::annotate(snapshot, &annotator), fixture.outlets),
        }
    }

    pub fn outlets(&self) -> String {
        json!(self.wb.outlets().iter().collect::<Vec<_>>()).to_string()
    }

    /// Scatter points at or above `threshold` total articles, classified
    /// against the segmentation point.
    pub fn scatter(&self, threshold: u32, sx: f64, sy: f64) -> Result<String, String> {
        let points: Vec<Value> = self
            .wb
            .scatter(threshold, seg(sx, sy)?)
            .into_iter()
            .map(|p| {
                let mut v = json!(p);
                v["display_name"] = json!(self.name(&p.stats.entity));
                v
            })
            .collect();
        Ok(json!({ "points": points, "color_buckets": self.wb.color_buckets }).to_string())
    }

    /// Candidate topics of a hive, with display names, for belief elicitation.
    pub fn candidates(&self, center: &str, outlet: &str) -> Result<String, String> {
        let (center, outlet) = self.resolve(center, outlet)?;
        let list = self.wb.candidates(&center, &outlet).map_err(|e| e.to_string())?;
        Ok(json!(list
            .iter()
            .map(|c| json!({"id": c, "name": self.name(c)}))
            .collect::<Vec<_>>())
        .to_string())
    }

    /// Layout of a partially built belief hive. `beliefs` is
    /// `{"center": <category>, "assignments": {<topic id>: <category>}}`.
    pub fn belief_layout(&self, center: &str, outlet: &str, beliefs: &str) -> Result<String, String> {
        let hive = self.user_hive(center, outlet, beliefs)?;
        Ok(json!({ "cells": self.cells(&layout(&hive)) }).to_string())
    }

    /// Builds the data hive and compares it with the reader's finished
    /// belief hive.
    pub fn reveal(&self, center: &str, outlet: &str, sx: f64, sy: f64, beliefs: &str) -> Result<String, String> {
        let mut user = self.user_hive(center, outlet, beliefs)?;
        user.finalize().map_err(|e| e.to_string())?;
        let data = self
            .wb
            .data_hive(&user.center, &user.outlet, seg(sx, sy)?)
            .map_err(|e| e.to_string())?;
        let report = detect_conflicts(&user, &data).map_err(|e| e.to_string())?;
        let conflicts: Vec<Value> = report
            .conflicts
            .iter()
            .map(|c| json!({"id": c.entity, "name": self.name(&c.entity), "user": c.user, "data": c.data}))
            .collect();
        Ok(json!({
            "center_sentiment": data.center_sentiment,
            "cells": self.cells(&layout(&data)),
            "conflicts": conflicts,
        })
        .to_string())
    }
}

impl Demo {
    pub fn workbench(&self) -> &Workbench {
        &self.wb
    }

    fn name(&self, id: &EntityId) -> String {
        self.wb.corpus().display_name(id).unwrap_or(id.as_str()).to_string()
    }

    fn resolve(&self, center: &str, outlet: &str) -> Result<(EntityId, OutletId), String> {
        let c = self
            .wb
            .corpus()
            .resolve_entity(center)
            .ok_or_else(|| format!("unknown topic {center}"))?;
        let o = self
            .wb
            .resolve_outlet(outlet)
            .cloned()
            .ok_or_else(|| format!("unknown outlet {outlet}"))?;
        Ok((c, o))
    }

    fn user_hive(&self, center: &str, outlet: &str, beliefs: &str) -> Result<HiveSpec, String> {
        #[derive(Default)]
        struct Beliefs {
            center: Option<SentimentCategory>,
            assignments: BTreeMap<EntityId, SentimentCategory>,
        }
        let v: Value = serde_json::from_str(beliefs).map_err(|e| e.to_string())?;
        let parsed = Beliefs {
            center: serde_json::from_value(v["center"].clone()).map_err(|e| e.to_string())?,
            assignments: serde_json::from_value(v.get("assignments").cloned().unwrap_or(json!({})))
                .map_err(|e| e.to_string())?,
        };
        let (c, o) = self.resolve(center, outlet)?;
        let candidates = self.wb.candidates(&c, &o).map_err(|e| e.to_string())?;
        let mut hive = HiveSpec::new_user(c, o, candidates).map_err(|e| e.to_string())?;
        for (topic, region) in &parsed.assignments {
            hive.assign(topic, *region).map_err(|e| e.to_string())?;
        }
        if let Some(center) = parsed.center {
            hive.set_center_sentiment(center).map_err(|e| e.to_string())?;
        }
        Ok(hive)
    }

    /// Layout cells with pixel centers and display names attached.
    fn cells(&self, layout: &HiveLayout) -> Vec<Value> {
        layout
            .cells
            .iter()
            .map(|cell| {
                let (x, y) = cell.at.to_pixel();
                let mut v = json!(cell);
                v["x"] = json!(x);
                v["y"] = json!(y);
                v["name"] = json!(self.name(&cell.topic));
                v
            })
            .collect()
    }
}
