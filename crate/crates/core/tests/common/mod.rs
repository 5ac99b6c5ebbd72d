//! Seeded generators and brute-force oracles shared by the integration tests.
//! Nothing here calls into the index structures under test; every expected
//! value is recomputed from plain records.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use panoptica::{AttributeDef, Kind, ObjectId, Store, Value, Vocabulary};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const NAMES: [&str; 6] = ["alpha", "beta", "gamma", "delta", "Alpha", "omega"];

/// A random well-formed vocabulary of at most `max_classes` classes. Base
/// classes carry a required text label, optional scalars and up to two links
/// (required ones only point at earlier classes so they can be satisfied);
/// one intermediate class may join two or three of them.
pub fn random_vocabulary(rng: &mut impl Rng, max_classes: usize) -> Vocabulary {
    assert!(max_classes >= 1);
    let with_rel = max_classes >= 3 && rng.random_bool(0.5);
    let base = rng.random_range(1..=if with_rel { max_classes - 1 } else { max_classes });
    let mut v = Vocabulary::new("random");
    for i in 0..base {
        let c = format!("C{i}");
        v = v.create_class(&c, false).unwrap();
        v = v.add_attribute(&c, AttributeDef::text("name").required()).unwrap();
        if rng.random_bool(0.5) {
            v = v.add_attribute(&c, AttributeDef::scalar("n", Kind::Integer)).unwrap();
        }
        if rng.random_bool(0.3) {
            v = v.add_attribute(&c, AttributeDef::scalar("day", Kind::Date)).unwrap();
        }
    }
    for i in 0..base {
        let c = format!("C{i}");
        for l in 0..rng.random_range(0..=2) {
            let t = rng.random_range(0..base);
            let mut def = AttributeDef::link(format!("l{l}"), format!("C{t}"));
            if t < i && rng.random_bool(0.3) {
                def = def.required();
            }
            v = v.add_attribute(&c, def).unwrap();
        }
    }
    if with_rel && base >= 2 {
        let mut pool: Vec<usize> = (0..base).collect();
        let arity = rng.random_range(2..=base.min(3));
        let mut parts = Vec::new();
        for _ in 0..arity {
            let k = rng.random_range(0..pool.len());
            parts.push(format!("C{}", pool.remove(k)));
        }
        let refs: Vec<&str> = parts.iter().map(String::as_str).collect();
        v = v
            .create_relationship("Rel", &refs, vec![AttributeDef::scalar("weight", Kind::Integer)])
            .unwrap();
    }
    assert!(v.validate().is_empty());
    v
}

/// Plain mirror of the store contents, maintained by the tests themselves.
pub type Model = BTreeMap<ObjectId, (String, BTreeMap<String, Value>)>;

pub fn ids_of(model: &Model, class: &str) -> Vec<ObjectId> {
    model.iter().filter(|(_, (c, _))| c == class).map(|(id, _)| *id).collect()
}

pub fn random_value(rng: &mut impl Rng, model: &Model, def: &AttributeDef) -> Option<Value> {
    Some(match def.kind {
        Kind::Text => Value::from(*NAMES.choose(rng).unwrap()),
        Kind::Integer => Value::Integer(rng.random_range(-5..50)),
        Kind::Date => Value::parse(Kind::Date, &format!("2020-01-{:02}", rng.random_range(1..=28))).unwrap(),
        Kind::Decimal => Value::parse(Kind::Decimal, &format!("{}.5", rng.random_range(0..9))).unwrap(),
        Kind::Boolean => Value::Boolean(rng.random_bool(0.5)),
        Kind::Link => {
            let target = def.target_class.as_deref().unwrap();
            let live = ids_of(model, target);
            if rng.random_bool(0.05) || live.is_empty() {
                // occasionally aim at something that is not there
                let raw = rng.random_range(1..400);
                let id = ObjectId::new(raw).unwrap();
                if live.is_empty() && !rng.random_bool(0.2) {
                    return None;
                }
                Value::Link(id)
            } else {
                Value::Link(*live.choose(rng).unwrap())
            }
        }
    })
}

#[derive(Debug, Default, Clone, Copy)]
pub struct OpStats {
    pub inserts: usize,
    pub updates: usize,
    pub deletes: usize,
    pub failures: usize,
}

/// Applies `ops` random insert/update/delete operations to `store`, keeping
/// `model` in step with every successful one. Insertion stops once
/// `max_objects` ids have been allocated.
pub fn random_ops(
    rng: &mut impl Rng,
    store: &mut Store,
    model: &mut Model,
    ops: usize,
    max_objects: u64,
) -> OpStats {
    let vocab = store.vocabulary().clone();
    let mut stats = OpStats::default();
    let mut last_id = store.next_id() - 1;
    for _ in 0..ops {
        let roll = rng.random_range(0..100);
        if roll < 55 || model.is_empty() {
            if store.next_id() > max_objects {
                continue;
            }
            let class = vocab.classes.choose(rng).unwrap();
            let mut values = BTreeMap::new();
            for def in &class.attributes {
                if def.required || rng.random_bool(0.6) {
                    if let Some(v) = random_value(rng, model, def) {
                        values.insert(def.name.clone(), v);
                    }
                }
            }
            match store.insert(&class.name, values.clone()) {
                Ok(id) => {
                    assert!(id.get() > last_id, "ids must strictly increase");
                    last_id = id.get();
                    model.insert(id, (class.name.clone(), values));
                    stats.inserts += 1;
                }
                Err(_) => stats.failures += 1,
            }
        } else if roll < 80 {
            let id = *model.keys().copied().collect::<Vec<_>>().choose(rng).unwrap();
            let class = vocab.class(&model[&id].0).unwrap();
            let def = class.attributes.choose(rng).unwrap();
            let new = if rng.random_bool(0.2) { None } else { random_value(rng, model, def) };
            match store.update(id, [(def.name.clone(), new.clone())]) {
                Ok(()) => {
                    let values = &mut model.get_mut(&id).unwrap().1;
                    match new {
                        Some(v) => values.insert(def.name.clone(), v),
                        None => values.remove(&def.name),
                    };
                    stats.updates += 1;
                }
                Err(_) => stats.failures += 1,
            }
        } else {
            let id = *model.keys().copied().collect::<Vec<_>>().choose(rng).unwrap();
            let detach = rng.random_bool(0.5);
            match store.delete(id, detach) {
                Ok(()) => {
                    model.remove(&id);
                    for (_, values) in model.values_mut() {
                        values.retain(|_, v| v.as_link() != Some(id));
                    }
                    stats.deletes += 1;
                }
                Err(_) => stats.failures += 1,
            }
        }
    }
    stats
}

/// A random vocabulary and a store populated through random operations.
pub fn random_store(seed: u64, max_classes: usize, ops: usize, max_objects: u64) -> (Store, Model) {
    let mut r = rng(seed);
    let vocab = random_vocabulary(&mut r, max_classes);
    let mut store = Store::new(vocab).unwrap();
    let mut model = Model::new();
    random_ops(&mut r, &mut store, &mut model, ops, max_objects);
    (store, model)
}

/// Every (source, attribute, target) triple, read from plain records.
pub fn link_triples(model: &Model) -> BTreeSet<(ObjectId, String, ObjectId)> {
    model
        .iter()
        .flat_map(|(id, (_, values))| {
            values
                .iter()
                .filter_map(move |(a, v)| v.as_link().map(|t| (*id, a.clone(), t)))
        })
        .collect()
}

/// Brute-force comparison of the store against the model: records, the
/// forward map and the backward map. Returns a description of each mismatch.
pub fn mirror_mismatches(store: &Store, model: &Model) -> Vec<String> {
    let mut out = Vec::new();
    let actual: Model = store
        .objects()
        .map(|r| (r.id, (r.class.clone(), r.values.clone())))
        .collect();
    if &actual != model {
        out.push("records differ from the model".to_string());
    }
    let triples = link_triples(model);
    let forward: BTreeSet<(ObjectId, String, ObjectId)> = store
        .links()
        .forward()
        .iter()
        .map(|((s, a), t)| (*s, a.clone(), *t))
        .collect();
    if forward != triples {
        out.push(format!("forward map: {} entries, records hold {}", forward.len(), triples.len()));
    }
    let backward: BTreeSet<(ObjectId, String, ObjectId)> = store
        .links()
        .backward()
        .iter()
        .flat_map(|(t, set)| set.iter().map(move |(s, a)| (*s, a.clone(), *t)))
        .collect();
    if backward != triples {
        out.push(format!("backward map: {} entries, records hold {}", backward.len(), triples.len()));
    }
    if store.links().backward().values().any(BTreeSet::is_empty) {
        out.push("backward map keeps an empty set".to_string());
    }
    out
}

/// Number of link values anywhere in the store equal to `id`.
pub fn brute_authority(store: &Store, id: ObjectId) -> usize {
    store
        .objects()
        .flat_map(|r| r.values.values())
        .filter(|v| v.as_link() == Some(id))
        .count()
}
