//! Table registry and exploration sessions, journaled to disk.
//!
//! Layout under the data directory:
//!
//! ```text
//! tables/<table_id>.json      canonical table
//! sessions/<session_id>.jsonl one JSON entry per line: a `create` entry,
//!                             then every applied command
//! ```

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hiertable_core::config::EngineConfig;
use hiertable_core::error::{ExploreError, IngestError};
use hiertable_core::explore::{Command, ExplorationSession};
use hiertable_core::ingest::{emit_canonical, parse_any, parse_canonical};
use hiertable_core::pipeline::Analysis;
use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("unknown table {0}")]
    UnknownTable(String),
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Explore(#[from] ExploreError),
    #[error("storage error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt journal {path}: {message}")]
    Journal { path: String, message: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum JournalEntry {
    Create { create: CreateEntry },
    Command(Command),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CreateEntry {
    table_id: String,
}

struct SessionEntry {
    session: ExplorationSession,
    journal: Option<File>,
}

pub struct SessionStore {
    data_dir: Option<PathBuf>,
    config: EngineConfig,
    tables: RwLock<HashMap<String, Arc<Analysis>>>,
    sessions: RwLock<HashMap<String, Arc<Mutex<SessionEntry>>>>,
}

/// Content hash of the canonical form, so the same table uploaded in either
/// format gets the same id.
pub fn table_id(canonical: &str) -> String {
    hex::encode(Sha256::digest(canonical.as_bytes()))[..16].to_string()
}

impl SessionStore {
    pub fn in_memory(config: EngineConfig) -> Self {
        Self { data_dir: None, config, tables: RwLock::default(), sessions: RwLock::default() }
    }

    /// Opens (or creates) a data directory and replays everything in it.
    pub fn open(dir: &Path, config: EngineConfig) -> Result<Self, StoreError> {
        fs::create_dir_all(dir.join("tables"))?;
        fs::create_dir_all(dir.join("sessions"))?;
        let store = Self { data_dir: Some(dir.to_path_buf()), ..Self::in_memory(config) };
        let mut table_files: Vec<PathBuf> = list(&dir.join("tables"), "json")?;
        table_files.sort();
        for path in table_files {
            let text = fs::read_to_string(&path)?;
            let table = parse_canonical(&text)?;
            let id = table_id(&emit_canonical(&table));
            store.tables.write().insert(id, Arc::new(Analysis::new(table, store.config.clone())));
        }
        let mut journals = list(&dir.join("sessions"), "jsonl")?;
        journals.sort();
        for path in journals {
            let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            let session = store.replay(&path)?;
            let journal = OpenOptions::new().append(true).open(&path)?;
            store.sessions.write().insert(id, Arc::new(Mutex::new(SessionEntry { session, journal: Some(journal) })));
        }
        Ok(store)
    }

    fn replay(&self, path: &Path) -> Result<ExplorationSession, StoreError> {
        let bad = |message: String| StoreError::Journal { path: path.display().to_string(), message };
        let reader = BufReader::new(File::open(path)?);
        let mut session: Option<(Arc<Analysis>, ExplorationSession)> = None;
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: JournalEntry = serde_json::from_str(&line).map_err(|e| bad(format!("line {}: {e}", n + 1)))?;
            match (entry, &mut session) {
                (JournalEntry::Create { create }, None) => {
                    let a = self.analysis(&create.table_id)?;
                    let s = ExplorationSession::new(create.table_id, &a);
                    session = Some((a, s));
                }
                (JournalEntry::Command(cmd), Some((a, s))) => {
                    s.apply(a, &cmd).map_err(|e| bad(format!("line {}: {e}", n + 1)))?;
                }
                _ => return Err(bad(format!("line {}: unexpected entry", n + 1))),
            }
        }
        session.map(|(_, s)| s).ok_or_else(|| bad("empty journal".into()))
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Parses, analyses and registers a table. Returns its id.
    pub fn add_table(&self, text: &str) -> Result<String, StoreError> {
        let table = parse_any(text)?;
        let canonical = emit_canonical(&table);
        let id = table_id(&canonical);
        if self.tables.read().contains_key(&id) {
            return Ok(id);
        }
        if let Some(dir) = &self.data_dir {
            fs::write(dir.join("tables").join(format!("{id}.json")), &canonical)?;
        }
        let analysis = Arc::new(Analysis::new(table, self.config.clone()));
        self.tables.write().entry(id.clone()).or_insert(analysis);
        Ok(id)
    }

    pub fn analysis(&self, table_id: &str) -> Result<Arc<Analysis>, StoreError> {
        self.tables.read().get(table_id).cloned().ok_or_else(|| StoreError::UnknownTable(table_id.to_string()))
    }

    pub fn create_session(&self, table_id: &str) -> Result<String, StoreError> {
        let analysis = self.analysis(table_id)?;
        let id = uuid::Uuid::new_v4().to_string();
        let session = ExplorationSession::new(table_id, &analysis);
        let journal = match &self.data_dir {
            Some(dir) => {
                let mut f = File::create(dir.join("sessions").join(format!("{id}.jsonl")))?;
                let entry = JournalEntry::Create { create: CreateEntry { table_id: table_id.to_string() } };
                writeln!(f, "{}", serde_json::to_string(&entry).expect("journal entry"))?;
                f.sync_data()?;
                Some(f)
            }
            None => None,
        };
        self.sessions.write().insert(id.clone(), Arc::new(Mutex::new(SessionEntry { session, journal })));
        Ok(id)
    }

    fn entry(&self, id: &str) -> Result<Arc<Mutex<SessionEntry>>, StoreError> {
        self.sessions.read().get(id).cloned().ok_or_else(|| StoreError::UnknownSession(id.to_string()))
    }

    /// Runs `f` on a snapshot of the session.
    pub fn read<T>(&self, id: &str, f: impl FnOnce(&ExplorationSession, &Analysis) -> T) -> Result<T, StoreError> {
        let entry = self.entry(id)?;
        let guard = entry.lock();
        let analysis = self.analysis(&guard.session.table_id)?;
        Ok(f(&guard.session, &analysis))
    }

    /// Applies a command under the session lock and journals it if it
    /// succeeded. Returns whether the view moved.
    pub fn apply(&self, id: &str, cmd: Command) -> Result<bool, StoreError> {
        let entry = self.entry(id)?;
        let mut guard = entry.lock();
        let analysis = self.analysis(&guard.session.table_id)?;
        let moved = guard.session.apply(&analysis, &cmd)?;
        if let Some(f) = guard.journal.as_mut() {
            writeln!(f, "{}", serde_json::to_string(&JournalEntry::Command(cmd)).expect("journal entry"))?;
            f.sync_data()?;
        }
        Ok(moved)
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().keys().cloned().collect();
        ids.sort();
        ids
    }
}

fn list(dir: &Path, ext: &str) -> std::io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) == Some(ext) {
            out.push(path);
        }
    }
    Ok(out)
}
