//! HTTP service and command-line front end over the engine.
//!
//! Both share one on-disk layout: a data directory holding
//! `vocabulary.json` and `store.json`, selected by `PANOPTICA_DATA_DIR`.

mod cli;
mod http;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::store::{ObjectId, ObjectRecord, Store};
use crate::value::Value;
use crate::vocabulary::Vocabulary;

pub use cli::{run, Cli};
pub use http::{router, serve, AppState, ServeConfig};

pub const DATA_DIR_ENV: &str = "PANOPTICA_DATA_DIR";
pub const VOCABULARY_FILE: &str = "vocabulary.json";
pub const STORE_FILE: &str = "store.json";
pub const DEFAULT_PORT: u16 = 8750;
/// Longest object list a single response carries unless `limit` says otherwise.
pub const DEFAULT_LIMIT: usize = 500;
pub const DEFAULT_IDLE: Duration = Duration::from_secs(3600);

/// The data directory: a vocabulary file and an optional store snapshot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataDir {
    path: PathBuf,
}

impl DataDir {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        DataDir { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn vocabulary_path(&self) -> PathBuf {
        self.path.join(VOCABULARY_FILE)
    }

    pub fn store_path(&self) -> PathBuf {
        self.path.join(STORE_FILE)
    }

    pub fn load_vocabulary(&self) -> Result<Vocabulary> {
        Vocabulary::load(self.vocabulary_path())
    }

    /// The stored objects, or an empty store when no snapshot exists yet.
    pub fn load_store(&self) -> Result<Store> {
        let vocab = self.load_vocabulary()?;
        let path = self.store_path();
        if path.exists() {
            Store::load(vocab, path)
        } else {
            Store::new(vocab)
        }
    }

    pub fn save_vocabulary(&self, vocab: &Vocabulary) -> Result<()> {
        std::fs::create_dir_all(&self.path)?;
        vocab.save(self.vocabulary_path())
    }

    pub fn save_store(&self, store: &Store) -> Result<()> {
        std::fs::create_dir_all(&self.path)?;
        store.save(self.store_path())
    }

    /// Writes both files, vocabulary first.
    pub fn save(&self, store: &Store) -> Result<()> {
        self.save_vocabulary(store.vocabulary())?;
        self.save_store(store)
    }
}

/// An object as it travels over the wire.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordBody {
    pub id: ObjectId,
    pub class: String,
    pub label: String,
    pub values: BTreeMap<String, serde_json::Value>,
}

impl RecordBody {
    pub fn new(store: &Store, record: &ObjectRecord) -> Self {
        RecordBody {
            id: record.id,
            class: record.class.clone(),
            label: store.label(record.id),
            values: record.values.iter().map(|(k, v)| (k.clone(), v.to_json())).collect(),
        }
    }
}

/// Types JSON attribute values by the class's declared kinds. `null`
/// decodes to `None`, which clears the attribute on update.
pub fn decode_values(
    vocab: &Vocabulary,
    class: &str,
    values: &serde_json::Map<String, serde_json::Value>,
) -> Result<Vec<(String, Option<Value>)>> {
    values
        .iter()
        .map(|(name, json)| {
            let def = vocab.require_attribute(class, name)?;
            if json.is_null() {
                return Ok((name.clone(), None));
            }
            let value = Value::from_json(def.kind, json).ok_or_else(|| Error::KindMismatch {
                attribute: name.clone(),
                expected: def.kind.to_string(),
                found: json.to_string(),
            })?;
            Ok((name.clone(), Some(value)))
        })
        .collect()
}

/// HTTP status for a domain error.
pub fn status_of(error: &Error) -> u16 {
    match error {
        Error::UnknownObject(_) | Error::UnknownClass(_) => 404,
        Error::DuplicateKey { .. } | Error::HasIncomingLinks { .. } | Error::RequiredLinkWouldDangle { .. } => 409,
        Error::Json(_) => 400,
        Error::Io(_) | Error::CorruptStore(_) => 500,
        _ => 422,
    }
}
