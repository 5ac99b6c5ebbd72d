use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use super::{ObjectId, Store};
use crate::value::Value;

/// A broken record or index invariant found by [`Store::integrity_check`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation")]
pub enum Violation {
    UnknownClass { id: ObjectId, class: String },
    UnknownAttribute { id: ObjectId, attribute: String },
    KindMismatch { id: ObjectId, attribute: String },
    MissingRequired { id: ObjectId, attribute: String },
    DanglingLink { id: ObjectId, attribute: String, target: ObjectId },
    WrongTargetClass { id: ObjectId, attribute: String, target: ObjectId, expected: String },
    /// Forward and backward maps disagree about `(source, attribute) -> target`.
    MirrorViolation { source: ObjectId, attribute: String, target: ObjectId, detail: &'static str },
    ClassIndex { id: ObjectId },
    DuplicateKey { class: String, first: ObjectId, second: ObjectId },
    KeyIndex { class: String },
    IdAllocation { id: ObjectId, next_id: u64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownClass { id, class } => write!(f, "#{id} has unknown class `{class}`"),
            Violation::UnknownAttribute { id, attribute } => {
                write!(f, "#{id} has unknown attribute `{attribute}`")
            }
            Violation::KindMismatch { id, attribute } => {
                write!(f, "#{id}.{attribute} has the wrong kind")
            }
            Violation::MissingRequired { id, attribute } => {
                write!(f, "#{id} lacks required `{attribute}`")
            }
            Violation::DanglingLink { id, attribute, target } => {
                write!(f, "#{id}.{attribute} points to missing #{target}")
            }
            Violation::WrongTargetClass { id, attribute, target, expected } => {
                write!(f, "#{id}.{attribute} points to #{target}, which is not a `{expected}`")
            }
            Violation::MirrorViolation { source, attribute, target, detail } => {
                write!(f, "link #{source}.{attribute} -> #{target}: {detail}")
            }
            Violation::ClassIndex { id } => write!(f, "class index disagrees about #{id}"),
            Violation::DuplicateKey { class, first, second } => {
                write!(f, "`{class}` objects #{first} and #{second} share a concatenated key")
            }
            Violation::KeyIndex { class } => write!(f, "key index of `{class}` is stale"),
            Violation::IdAllocation { id, next_id } => {
                write!(f, "#{id} is not below the next id {next_id}")
            }
        }
    }
}

pub(super) fn check(store: &Store) -> Vec<Violation> {
    let mut out = Vec::new();
    let vocab = &store.vocab;
    let mut expected_forward = BTreeMap::new();
    let mut expected_classes: HashMap<&str, BTreeSet<ObjectId>> = HashMap::new();
    let mut expected_keys: HashMap<&str, HashMap<Vec<ObjectId>, ObjectId>> = HashMap::new();

    for (id, record) in &store.objects {
        let id = *id;
        if record.id != id {
            out.push(Violation::ClassIndex { id });
        }
        if id.get() >= store.next_id {
            out.push(Violation::IdAllocation { id, next_id: store.next_id });
        }
        expected_classes.entry(&record.class).or_default().insert(id);
        let Some(class) = vocab.class(&record.class) else {
            out.push(Violation::UnknownClass { id, class: record.class.clone() });
            continue;
        };
        for (name, value) in &record.values {
            let Some(def) = class.attribute(name) else {
                out.push(Violation::UnknownAttribute { id, attribute: name.clone() });
                continue;
            };
            if value.kind() != def.kind {
                out.push(Violation::KindMismatch { id, attribute: name.clone() });
                continue;
            }
            if let Value::Link(target) = value {
                expected_forward.insert((id, name.clone()), *target);
                match store.objects.get(target) {
                    None => out.push(Violation::DanglingLink {
                        id,
                        attribute: name.clone(),
                        target: *target,
                    }),
                    Some(t) if Some(&t.class) != def.target_class.as_ref() => {
                        out.push(Violation::WrongTargetClass {
                            id,
                            attribute: name.clone(),
                            target: *target,
                            expected: def.target_class.clone().unwrap_or_default(),
                        })
                    }
                    Some(_) => {}
                }
            }
        }
        for def in class.attributes.iter().filter(|a| a.required) {
            if !record.values.contains_key(&def.name) {
                out.push(Violation::MissingRequired { id, attribute: def.name.clone() });
            }
        }
        if let Some(key) = Store::key_of(class, &record.values) {
            match expected_keys.entry(&class.name).or_default().entry(key) {
                Entry::Occupied(first) => out.push(Violation::DuplicateKey {
                    class: class.name.clone(),
                    first: *first.get(),
                    second: id,
                }),
                Entry::Vacant(slot) => {
                    slot.insert(id);
                }
            }
        }
    }

    // forward must equal the links held by records; backward must mirror forward
    for ((source, attribute), target) in &expected_forward {
        if store.links.forward.get(&(*source, attribute.clone())) != Some(target) {
            out.push(Violation::MirrorViolation {
                source: *source,
                attribute: attribute.clone(),
                target: *target,
                detail: "record link missing from forward index",
            });
        }
    }
    for ((source, attribute), target) in &store.links.forward {
        if expected_forward.get(&(*source, attribute.clone())) != Some(target) {
            out.push(Violation::MirrorViolation {
                source: *source,
                attribute: attribute.clone(),
                target: *target,
                detail: "forward entry not backed by a record value",
            });
        }
        let mirrored = store
            .links
            .backward
            .get(target)
            .is_some_and(|s| s.contains(&(*source, attribute.clone())));
        if !mirrored {
            out.push(Violation::MirrorViolation {
                source: *source,
                attribute: attribute.clone(),
                target: *target,
                detail: "forward entry without backward entry",
            });
        }
    }
    for (target, sources) in &store.links.backward {
        if sources.is_empty() {
            continue;
        }
        for (source, attribute) in sources {
            if store.links.forward.get(&(*source, attribute.clone())) != Some(target) {
                out.push(Violation::MirrorViolation {
                    source: *source,
                    attribute: attribute.clone(),
                    target: *target,
                    detail: "backward entry without forward entry",
                });
            }
        }
    }

    for (class, ids) in &store.by_class {
        let expected = expected_classes.get(class.as_str());
        for id in ids {
            if !expected.is_some_and(|e| e.contains(id)) {
                out.push(Violation::ClassIndex { id: *id });
            }
        }
    }
    for (class, ids) in &expected_classes {
        let actual = store.by_class.get(*class);
        for id in ids {
            if !actual.is_some_and(|a| a.contains(id)) {
                out.push(Violation::ClassIndex { id: *id });
            }
        }
    }

    for class in &vocab.classes {
        let empty = HashMap::new();
        let expected = expected_keys.get(class.name.as_str()).unwrap_or(&empty);
        let actual = store.keys.get(&class.name).unwrap_or(&empty);
        if expected != actual {
            out.push(Violation::KeyIndex { class: class.name.clone() });
        }
    }
    out
}
