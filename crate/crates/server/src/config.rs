use std::path::{Path, PathBuf};

use anyhow::Context;
use newslens_core::annotate::AnnotatedCorpus;
use newslens_core::corpus::OutletSet;
use newslens_core::Workbench;
use serde::Deserialize;

/// Service settings, read from a TOML file. Relative paths resolve against
/// the file's directory.
///
/// ```toml
/// sessions_dir = "sessions"
/// outlets = "outlets.txt"
/// color_buckets = 5
/// candidates = 20
/// bind = "127.0.0.1"
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub sessions_dir: PathBuf,
    /// Outlet list; when absent, the outlets present in the snapshot.
    pub outlets: Option<PathBuf>,
    pub color_buckets: u32,
    pub candidates: usize,
    pub bind: String,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            sessions_dir: PathBuf::from("sessions"),
            outlets: None,
            color_buckets: newslens_core::aggregate::DEFAULT_COLOR_BUCKETS,
            candidates: newslens_core::hive::DEFAULT_CANDIDATES,
            bind: "127.0.0.1".into(),
        }
    }
}

impl ServiceConfig {
    pub fn parse(text: &str, base: &Path) -> anyhow::Result<Self> {
        let mut config: ServiceConfig = toml::from_str(text).context("invalid service config")?;
        if config.candidates == 0 {
            anyhow::bail!("candidates must be at least 1");
        }
        config.sessions_dir = base.join(&config.sessions_dir);
        config.outlets = config.outlets.map(|p| base.join(p));
        Ok(config)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

/// Loads an annotated snapshot and precomputes its aggregates.
pub fn load_workbench(snapshot: &Path, config: &ServiceConfig) -> anyhow::Result<Workbench> {
    let corpus = AnnotatedCorpus::load(snapshot).with_context(|| format!("loading {}", snapshot.display()))?;
    let outlets = match &config.outlets {
        Some(path) => OutletSet::load(path)?,
        None => OutletSet::new(
            corpus
                .snapshot()
                .articles()
                .iter()
                .map(|a| a.outlet.as_str().to_string()),
        )?,
    };
    Ok(configure(Workbench::new(corpus, outlets), config))
}

pub fn configure(mut wb: Workbench, config: &ServiceConfig) -> Workbench {
    wb.color_buckets = config.color_buckets;
    wb.candidate_count = config.candidates;
    wb
}
