//! File-based session persistence.
//!
//! Layout: `<root>/<session id>/snapshot.json` holds the latest checksummed
//! session record; `<root>/<session id>/log.jsonl` is an append-only log of
//! checksummed transition records. Loading verifies both.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::session::{Session, Transition};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("invalid session id {0:?}")]
    InvalidId(String),
    #[error("corrupt record in session {id}: {reason}")]
    Corrupt { id: String, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
struct Checksummed<T> {
    checksum: String,
    record: T,
}

fn checksum(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Canonical serialization of a session.
pub fn canonical_json(session: &Session) -> String {
    serde_json::to_string(session).expect("session serializes")
}

fn wrap<T: Serialize>(record: &T) -> String {
    let body = serde_json::to_string(record).expect("record serializes");
    let sum = checksum(body.as_bytes());
    // Embed the already-serialized body so the checksum covers exact bytes.
    format!("{{\"checksum\":\"{sum}\",\"record\":{body}}}")
}

fn unwrap<T: for<'de> Deserialize<'de>>(line: &str) -> Result<T, String> {
    let raw: Checksummed<Box<serde_json::value::RawValue>> = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if checksum(raw.record.get().as_bytes()) != raw.checksum {
        return Err("checksum mismatch".into());
    }
    serde_json::from_str(raw.record.get()).map_err(|e| e.to_string())
}

#[derive(Debug, Clone)]
pub struct SessionStore {
    root: PathBuf,
}

impl SessionStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(SessionStore { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, id: &str) -> Result<PathBuf, StoreError> {
        let valid =
            !id.is_empty() && id.len() <= 128 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !valid {
            return Err(StoreError::InvalidId(id.to_string()));
        }
        Ok(self.root.join(id))
    }

    /// Writes the session snapshot and appends any transitions not yet in
    /// the on-disk log.
    pub fn persist(&self, session: &Session) -> Result<(), StoreError> {
        let dir = self.dir(&session.id)?;
        fs::create_dir_all(&dir)?;

        let log_path = dir.join("log.jsonl");
        let logged = match fs::read_to_string(&log_path) {
            Ok(text) => text.lines().filter(|l| !l.trim().is_empty()).count(),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => 0,
            Err(e) => return Err(e.into()),
        };
        if logged > session.log.len() {
            return Err(StoreError::Corrupt {
                id: session.id.clone(),
                reason: "on-disk log is longer than the session log".into(),
            });
        }
        if logged < session.log.len() {
            let mut file = OpenOptions::new().create(true).append(true).open(&log_path)?;
            let mut buf = String::new();
            for t in &session.log[logged..] {
                buf.push_str(&wrap(t));
                buf.push('\n');
            }
            file.write_all(buf.as_bytes())?;
        }

        let tmp = dir.join("snapshot.json.tmp");
        fs::write(&tmp, wrap(session))?;
        fs::rename(&tmp, dir.join("snapshot.json"))?;
        Ok(())
    }

    pub fn load(&self, id: &str) -> Result<Session, StoreError> {
        let dir = self.dir(id)?;
        let corrupt = |reason: String| StoreError::Corrupt {
            id: id.to_string(),
            reason,
        };
        let text = match fs::read_to_string(dir.join("snapshot.json")) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(StoreError::UnknownSession(id.to_string()))
            }
            Err(e) => return Err(e.into()),
        };
        let session: Session = unwrap(text.trim_end()).map_err(corrupt)?;
        if session.id != id {
            return Err(corrupt("snapshot belongs to another session".into()));
        }
        let log_text = fs::read_to_string(dir.join("log.jsonl")).unwrap_or_default();
        let log = log_text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(unwrap::<Transition>)
            .collect::<Result<Vec<_>, _>>()
            .map_err(corrupt)?;
        if log != session.log {
            return Err(corrupt("transition log disagrees with snapshot".into()));
        }
        Ok(session)
    }

    pub fn list(&self) -> Result<Vec<String>, StoreError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let entry = entry?;
            if entry.path().join("snapshot.json").exists() {
                if let Some(name) = entry.file_name().to_str() {
                    ids.push(name.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_unknown_id() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        let mut s = Session::new("abc");
        s.start_round().unwrap();
        store.persist(&s).unwrap();
        assert_eq!(store.load("abc").unwrap(), s);
        assert!(matches!(store.load("nope"), Err(StoreError::UnknownSession(_))));
        assert!(matches!(store.load("../etc"), Err(StoreError::InvalidId(_))));
        assert_eq!(store.list().unwrap(), vec!["abc".to_string()]);
    }

    #[test]
    fn tampering_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        let mut s = Session::new("t1");
        s.start_round().unwrap();
        store.persist(&s).unwrap();
        let path = dir.path().join("t1/snapshot.json");
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, text.replace("\"threshold\":0", "\"threshold\":9")).unwrap();
        assert!(matches!(store.load("t1"), Err(StoreError::Corrupt { .. })));
    }

    #[test]
    fn log_appends_incrementally() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        let mut s = Session::new("inc");
        store.persist(&s).unwrap();
        s.start_round().unwrap();
        store.persist(&s).unwrap();
        store.persist(&s).unwrap();
        let log = fs::read_to_string(dir.path().join("inc/log.jsonl")).unwrap();
        assert_eq!(log.lines().count(), 1);
        assert_eq!(store.load("inc").unwrap(), s);
    }
}
