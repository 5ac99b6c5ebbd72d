//! Single-file JSON snapshot of the known object space.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ObjectId, ObjectRecord, Store};
use crate::error::{Error, Result};
use crate::value::Value;
use crate::vocabulary::Vocabulary;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub vocabulary_version: u64,
    pub next_id: u64,
    pub objects: Vec<SnapshotObject>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotObject {
    pub id: ObjectId,
    pub class: String,
    pub values: BTreeMap<String, serde_json::Value>,
}

/// Best-effort typing for values the vocabulary does not describe, so the
/// integrity check can still report them.
fn untyped(json: &serde_json::Value) -> Option<Value> {
    match json {
        serde_json::Value::String(s) => Some(Value::Text(s.clone())),
        serde_json::Value::Bool(b) => Some(Value::Boolean(*b)),
        serde_json::Value::Number(n) => n.as_i64().map(Value::Integer),
        _ => None,
    }
}

impl Store {
    pub fn to_snapshot(&self) -> Snapshot {
        Snapshot {
            vocabulary_version: self.vocab.version,
            next_id: self.next_id,
            objects: self
                .objects
                .values()
                .map(|r| SnapshotObject {
                    id: r.id,
                    class: r.class.clone(),
                    values: r.values.iter().map(|(k, v)| (k.clone(), v.to_json())).collect(),
                })
                .collect(),
        }
    }

    pub fn to_snapshot_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.to_snapshot()).expect("snapshot serializes");
        out.push('\n');
        out
    }

    /// Decodes a snapshot and rebuilds both index directions without
    /// checking invariants. Use [`Store::from_snapshot`] unless the point
    /// is to inspect a damaged file.
    pub fn from_snapshot_unchecked(vocab: impl Into<Arc<Vocabulary>>, snapshot: Snapshot) -> Result<Store> {
        let vocab = vocab.into();
        if snapshot.vocabulary_version > vocab.version {
            return Err(Error::Malformed(format!(
                "snapshot was written against vocabulary version {}, newer than {}",
                snapshot.vocabulary_version, vocab.version
            )));
        }
        let mut records = Vec::with_capacity(snapshot.objects.len());
        for object in snapshot.objects {
            let class = vocab.class(&object.class);
            let mut values = BTreeMap::new();
            for (name, json) in object.values {
                if json.is_null() {
                    continue;
                }
                let kind = class.and_then(|c| c.attribute(&name)).map(|a| a.kind);
                let value = match kind {
                    Some(kind) => Value::from_json(kind, &json),
                    None => untyped(&json),
                };
                let value = value.ok_or_else(|| {
                    Error::Malformed(format!("#{}.{name}: cannot decode {json}", object.id))
                })?;
                values.insert(name, value);
            }
            records.push(ObjectRecord {
                id: object.id,
                class: object.class,
                values,
            });
        }
        if records.windows(2).any(|w| w[0].id >= w[1].id) {
            return Err(Error::Malformed("objects are not in strictly increasing id order".into()));
        }
        Ok(Store::from_records(vocab, snapshot.next_id, records))
    }

    /// Loads a snapshot and refuses it unless the integrity check is clean.
    pub fn from_snapshot(vocab: impl Into<Arc<Vocabulary>>, snapshot: Snapshot) -> Result<Store> {
        let vocab = vocab.into();
        vocab.ensure_valid()?;
        let store = Store::from_snapshot_unchecked(vocab, snapshot)?;
        let violations = store.integrity_check();
        if violations.is_empty() {
            Ok(store)
        } else {
            Err(Error::CorruptStore(violations))
        }
    }

    pub fn from_snapshot_json(vocab: impl Into<Arc<Vocabulary>>, text: &str) -> Result<Store> {
        Store::from_snapshot(vocab, serde_json::from_str(text)?)
    }

    pub fn load(vocab: impl Into<Arc<Vocabulary>>, path: impl AsRef<Path>) -> Result<Store> {
        Store::from_snapshot_json(vocab, &fs::read_to_string(path)?)
    }

    /// Writes the snapshot to a temporary sibling and renames it into place.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(crate::fsutil::write_atomic(path.as_ref(), self.to_snapshot_json().as_bytes())?)
    }
}
