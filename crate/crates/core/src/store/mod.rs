//! The known object space: object records under controlled input, with every
//! link indexed in both directions.
//!
//! All mutations validate first and only then touch state, so a failed
//! operation leaves the store exactly as it was.

mod integrity;
mod snapshot;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::num::NonZeroU64;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::value::Value;
use crate::vocabulary::{ClassDef, LabelSource, Vocabulary};

pub use integrity::Violation;
pub use snapshot::{Snapshot, SnapshotObject};

/// Store-wide object identity. Allocated in strictly increasing order and
/// never reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(NonZeroU64);

impl ObjectId {
    pub fn new(raw: u64) -> Option<ObjectId> {
        NonZeroU64::new(raw).map(ObjectId)
    }

    pub fn get(self) -> u64 {
        self.0.get()
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectRecord {
    pub id: ObjectId,
    pub class: String,
    pub values: BTreeMap<String, Value>,
}

impl ObjectRecord {
    pub fn get(&self, attribute: &str) -> Option<&Value> {
        self.values.get(attribute)
    }

    pub fn links(&self) -> impl Iterator<Item = (&str, ObjectId)> {
        self.values
            .iter()
            .filter_map(|(a, v)| v.as_link().map(|t| (a.as_str(), t)))
    }
}

/// Forward and backward link maps. Each is the exact mirror of the other.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkIndex {
    forward: BTreeMap<(ObjectId, String), ObjectId>,
    backward: BTreeMap<ObjectId, BTreeSet<(ObjectId, String)>>,
}

impl LinkIndex {
    pub fn forward(&self) -> &BTreeMap<(ObjectId, String), ObjectId> {
        &self.forward
    }

    pub fn backward(&self) -> &BTreeMap<ObjectId, BTreeSet<(ObjectId, String)>> {
        &self.backward
    }

    pub fn target(&self, source: ObjectId, attribute: &str) -> Option<ObjectId> {
        self.forward.get(&(source, attribute.to_string())).copied()
    }

    pub fn sources(&self, target: ObjectId) -> impl Iterator<Item = &(ObjectId, String)> {
        self.backward.get(&target).into_iter().flatten()
    }

    fn link(&mut self, source: ObjectId, attribute: &str, target: ObjectId) {
        self.forward.insert((source, attribute.to_string()), target);
        self.backward
            .entry(target)
            .or_default()
            .insert((source, attribute.to_string()));
    }

    fn unlink(&mut self, source: ObjectId, attribute: &str) {
        let key = (source, attribute.to_string());
        if let Some(target) = self.forward.remove(&key) {
            if let Some(set) = self.backward.get_mut(&target) {
                set.remove(&key);
                if set.is_empty() {
                    self.backward.remove(&target);
                }
            }
        }
    }
}

/// Dependent objects of one class reaching the target through one attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IncomingGroup {
    pub class: String,
    pub attribute: String,
    pub members: Vec<ObjectId>,
}

type Key = Vec<ObjectId>;

#[derive(Debug, Clone)]
pub struct Store {
    vocab: Arc<Vocabulary>,
    objects: BTreeMap<ObjectId, ObjectRecord>,
    by_class: HashMap<String, BTreeSet<ObjectId>>,
    links: LinkIndex,
    /// Concatenated keys of intermediate classes with `key_unique`; only
    /// fully populated keys are tracked.
    keys: HashMap<String, HashMap<Key, ObjectId>>,
    next_id: u64,
}

const LABEL_DEPTH: usize = 4;

impl Store {
    pub fn new(vocab: impl Into<Arc<Vocabulary>>) -> Result<Store> {
        let vocab = vocab.into();
        vocab.ensure_valid()?;
        Ok(Store {
            vocab,
            objects: BTreeMap::new(),
            by_class: HashMap::new(),
            links: LinkIndex::default(),
            keys: HashMap::new(),
            next_id: 1,
        })
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// The id the next insert will receive.
    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn get(&self, id: ObjectId) -> Option<&ObjectRecord> {
        self.objects.get(&id)
    }

    pub fn contains(&self, id: ObjectId) -> bool {
        self.objects.contains_key(&id)
    }

    pub fn require(&self, id: ObjectId) -> Result<&ObjectRecord> {
        self.get(id).ok_or(Error::UnknownObject(id))
    }

    /// All records in id order.
    pub fn objects(&self) -> impl Iterator<Item = &ObjectRecord> {
        self.objects.values()
    }

    pub fn links(&self) -> &LinkIndex {
        &self.links
    }

    pub fn class_of(&self, id: ObjectId) -> Result<&ClassDef> {
        let record = self.require(id)?;
        self.vocab.require_class(&record.class)
    }

    /// Objects of `class` ordered by (label, id).
    pub fn objects_of(&self, class: &str) -> Result<Vec<ObjectId>> {
        self.vocab.require_class(class)?;
        let mut ids: Vec<_> = self
            .by_class
            .get(class)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default();
        self.sort_by_label(&mut ids);
        Ok(ids)
    }

    /// Objects of `class` whose label equals `label`, in id order.
    pub fn find_by_label(&self, class: &str, label: &str) -> Result<Vec<ObjectId>> {
        self.vocab.require_class(class)?;
        Ok(self
            .by_class
            .get(class)
            .into_iter()
            .flatten()
            .copied()
            .filter(|&id| self.label(id) == label)
            .collect())
    }

    pub fn count_of(&self, class: &str) -> usize {
        self.by_class.get(class).map_or(0, BTreeSet::len)
    }

    /// Display label of an object. Empty for unknown ids.
    pub fn label(&self, id: ObjectId) -> String {
        self.label_at_depth(id, 0)
    }

    fn label_at_depth(&self, id: ObjectId, depth: usize) -> String {
        let Some(record) = self.objects.get(&id) else {
            return String::new();
        };
        let Some(class) = self.vocab.class(&record.class) else {
            return format!("#{id}");
        };
        match class.label_source() {
            LabelSource::Attribute(def) => record
                .get(&def.name)
                .map(ToString::to_string)
                .unwrap_or_default(),
            LabelSource::ConcatenatedKey if depth < LABEL_DEPTH => class
                .link_attributes()
                .map(|a| match record.get(&a.name).and_then(Value::as_link) {
                    Some(t) => self.label_at_depth(t, depth + 1),
                    None => "?".to_string(),
                })
                .collect::<Vec<_>>()
                .join(" / "),
            _ => format!("#{id}"),
        }
    }

    pub fn sort_by_label(&self, ids: &mut [ObjectId]) {
        let mut keyed: Vec<_> = ids.iter().map(|&id| (self.label(id), id)).collect();
        keyed.sort();
        for (slot, (_, id)) in ids.iter_mut().zip(keyed) {
            *slot = id;
        }
    }

    /// Populated link attributes of `id` in declaration order.
    pub fn outgoing(&self, id: ObjectId) -> Result<Vec<(String, ObjectId)>> {
        let record = self.require(id)?;
        let class = self.vocab.require_class(&record.class)?;
        Ok(class
            .link_attributes()
            .filter_map(|a| {
                record
                    .get(&a.name)
                    .and_then(Value::as_link)
                    .map(|t| (a.name.clone(), t))
            })
            .collect())
    }

    /// Objects directly linked to `id` in either direction.
    pub fn neighbors(&self, id: ObjectId) -> BTreeSet<ObjectId> {
        let mut out: BTreeSet<ObjectId> = self.links.sources(id).map(|(s, _)| *s).collect();
        if let Some(record) = self.objects.get(&id) {
            out.extend(record.links().map(|(_, t)| t));
        }
        out
    }

    /// Number of incoming links.
    pub fn authority(&self, id: ObjectId) -> Result<usize> {
        self.require(id)?;
        Ok(self.links.backward.get(&id).map_or(0, BTreeSet::len))
    }

    /// Incoming links grouped by (source class, attribute) in declaration
    /// order; members ordered by (label, id).
    pub fn incoming(&self, id: ObjectId) -> Result<Vec<IncomingGroup>> {
        self.require(id)?;
        let mut grouped: BTreeMap<(usize, usize), Vec<ObjectId>> = BTreeMap::new();
        for (source, attribute) in self.links.sources(id) {
            let record = &self.objects[source];
            let class_pos = self.vocab.class_position(&record.class).unwrap_or(usize::MAX);
            let attr_pos = self
                .vocab
                .classes
                .get(class_pos)
                .and_then(|c| c.attributes.iter().position(|a| &a.name == attribute))
                .unwrap_or(usize::MAX);
            grouped.entry((class_pos, attr_pos)).or_default().push(*source);
        }
        Ok(grouped
            .into_iter()
            .map(|((c, a), mut members)| {
                self.sort_by_label(&mut members);
                let class = &self.vocab.classes[c];
                IncomingGroup {
                    class: class.name.clone(),
                    attribute: class.attributes[a].name.clone(),
                    members,
                }
            })
            .collect())
    }

    fn check_values<'v>(
        &self,
        class: &ClassDef,
        values: impl Iterator<Item = (&'v String, &'v Value)>,
        self_id: Option<ObjectId>,
    ) -> Result<()> {
        for (name, value) in values {
            let def = class.attribute(name).ok_or_else(|| Error::UnknownAttribute {
                class: class.name.clone(),
                attribute: name.clone(),
            })?;
            if value.kind() != def.kind {
                return Err(Error::KindMismatch {
                    attribute: name.clone(),
                    expected: def.kind.to_string(),
                    found: value.kind().to_string(),
                });
            }
            if let (Some(target), Some(expected)) = (value.as_link(), &def.target_class) {
                let target_class = if Some(target) == self_id {
                    Some(class.name.as_str())
                } else {
                    self.objects.get(&target).map(|r| r.class.as_str())
                };
                if target_class != Some(expected.as_str()) {
                    return Err(Error::DanglingLink {
                        attribute: name.clone(),
                        target,
                        expected_class: expected.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    fn check_required(class: &ClassDef, values: &BTreeMap<String, Value>) -> Result<()> {
        match class
            .attributes
            .iter()
            .find(|a| a.required && !values.contains_key(&a.name))
        {
            Some(missing) => Err(Error::MissingRequired {
                class: class.name.clone(),
                attribute: missing.name.clone(),
            }),
            None => Ok(()),
        }
    }

    fn key_of(class: &ClassDef, values: &BTreeMap<String, Value>) -> Option<Key> {
        if !class.enforces_unique_key() {
            return None;
        }
        class
            .link_attributes()
            .map(|a| values.get(&a.name).and_then(Value::as_link))
            .collect()
    }

    fn check_key(&self, class: &ClassDef, key: Option<&Key>, self_id: Option<ObjectId>) -> Result<()> {
        if let Some(existing) = key
            .and_then(|k| self.keys.get(&class.name)?.get(k))
            .filter(|&&existing| Some(existing) != self_id)
        {
            return Err(Error::DuplicateKey {
                class: class.name.clone(),
                existing: *existing,
            });
        }
        Ok(())
    }

    /// Controlled input: kind, required-attribute and referential checks,
    /// then the record and both index directions are updated together.
    pub fn insert<K, V>(&mut self, class: &str, values: impl IntoIterator<Item = (K, V)>) -> Result<ObjectId>
    where
        K: Into<String>,
        V: Into<Value>,
    {
        let values: BTreeMap<String, Value> =
            values.into_iter().map(|(k, v)| (k.into(), v.into())).collect();
        let vocab = Arc::clone(&self.vocab);
        let def = vocab.require_class(class)?;
        self.check_values(def, values.iter(), None)?;
        Self::check_required(def, &values)?;
        let key = Self::key_of(def, &values);
        self.check_key(def, key.as_ref(), None)?;

        let id = ObjectId::new(self.next_id).expect("ids start at 1");
        self.next_id += 1;
        for (attr, value) in &values {
            if let Some(target) = value.as_link() {
                self.links.link(id, attr, target);
            }
        }
        if let Some(key) = key {
            self.keys.entry(def.name.clone()).or_default().insert(key, id);
        }
        self.by_class.entry(def.name.clone()).or_default().insert(id);
        self.objects.insert(
            id,
            ObjectRecord {
                id,
                class: def.name.clone(),
                values,
            },
        );
        Ok(id)
    }

    /// Partial update; `None` clears an attribute. Changed links are
    /// reindexed on both sides.
    pub fn update<K>(&mut self, id: ObjectId, changes: impl IntoIterator<Item = (K, Option<Value>)>) -> Result<()>
    where
        K: Into<String>,
    {
        let record = self.require(id)?;
        let vocab = Arc::clone(&self.vocab);
        let def = vocab.require_class(&record.class)?;
        let changes: BTreeMap<String, Option<Value>> =
            changes.into_iter().map(|(k, v)| (k.into(), v)).collect();

        for name in changes.keys() {
            if def.attribute(name).is_none() {
                return Err(Error::UnknownAttribute {
                    class: def.name.clone(),
                    attribute: name.clone(),
                });
            }
        }
        self.check_values(
            def,
            changes.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k, v))),
            Some(id),
        )?;
        let mut values = record.values.clone();
        for (name, value) in &changes {
            match value {
                Some(v) => values.insert(name.clone(), v.clone()),
                None => values.remove(name),
            };
        }
        Self::check_required(def, &values)?;
        let old_key = Self::key_of(def, &record.values);
        let new_key = Self::key_of(def, &values);
        self.check_key(def, new_key.as_ref(), Some(id))?;

        for name in changes.keys() {
            self.links.unlink(id, name);
            if let Some(target) = values.get(name).and_then(Value::as_link) {
                self.links.link(id, name, target);
            }
        }
        self.replace_key(&def.name, old_key, new_key, id);
        self.objects.get_mut(&id).expect("checked above").values = values;
        Ok(())
    }

    fn replace_key(&mut self, class: &str, old: Option<Key>, new: Option<Key>, id: ObjectId) {
        if old == new {
            return;
        }
        let keys = self.keys.entry(class.to_string()).or_default();
        if let Some(old) = old {
            keys.remove(&old);
        }
        if let Some(new) = new {
            keys.insert(new, id);
        }
    }

    /// Removes an object. Without `detach`, any incoming link refuses the
    /// deletion. With `detach`, optional incoming links are cleared; a
    /// required one still refuses it.
    pub fn delete(&mut self, id: ObjectId, detach: bool) -> Result<()> {
        self.require(id)?;
        let incoming: Vec<(ObjectId, String)> = self
            .links
            .sources(id)
            .filter(|(s, _)| *s != id)
            .cloned()
            .collect();
        if !incoming.is_empty() && !detach {
            return Err(Error::HasIncomingLinks {
                id,
                count: incoming.len(),
            });
        }
        for (source, attribute) in &incoming {
            let class = self.class_of(*source)?;
            if class.attribute(attribute).is_some_and(|a| a.required) {
                return Err(Error::RequiredLinkWouldDangle {
                    id,
                    source_id: *source,
                    class: class.name.clone(),
                    attribute: attribute.clone(),
                });
            }
        }

        let vocab = Arc::clone(&self.vocab);
        for (source, attribute) in incoming {
            let record = self.objects.get_mut(&source).expect("indexed source exists");
            let def = vocab.require_class(&record.class)?;
            let old_key = Self::key_of(def, &record.values);
            record.values.remove(&attribute);
            let new_key = Self::key_of(def, &record.values);
            self.links.unlink(source, &attribute);
            self.replace_key(&def.name, old_key, new_key, source);
        }

        let record = self.objects.remove(&id).expect("checked above");
        for (attribute, _) in record.links() {
            self.links.unlink(id, attribute);
        }
        if let Some(def) = vocab.class(&record.class) {
            if let Some(key) = Self::key_of(def, &record.values) {
                if let Some(keys) = self.keys.get_mut(&def.name) {
                    keys.remove(&key);
                }
            }
        }
        if let Some(ids) = self.by_class.get_mut(&record.class) {
            ids.remove(&id);
        }
        Ok(())
    }

    /// Rebinds the store to another vocabulary version, revalidating every record.
    pub fn with_vocabulary(&self, vocab: impl Into<Arc<Vocabulary>>) -> Result<Store> {
        Store::from_snapshot(vocab, self.to_snapshot())
    }

    /// Full scan of every record and index invariant.
    pub fn integrity_check(&self) -> Vec<Violation> {
        integrity::check(self)
    }

    /// Builds a store from raw records and rebuilds both index directions
    /// without validating anything.
    fn from_records(vocab: Arc<Vocabulary>, next_id: u64, records: Vec<ObjectRecord>) -> Store {
        let mut store = Store {
            vocab,
            objects: BTreeMap::new(),
            by_class: HashMap::new(),
            links: LinkIndex::default(),
            keys: HashMap::new(),
            next_id,
        };
        for record in records {
            for (attribute, target) in record.links() {
                store.links.link(record.id, attribute, target);
            }
            if let Some(key) = store
                .vocab
                .class(&record.class)
                .and_then(|def| Self::key_of(def, &record.values))
            {
                store
                    .keys
                    .entry(record.class.clone())
                    .or_default()
                    .entry(key)
                    .or_insert(record.id);
            }
            store.by_class.entry(record.class.clone()).or_default().insert(record.id);
            store.objects.insert(record.id, record);
        }
        store
    }
}
