mod common;

use std::collections::BTreeSet;

use common::{brute_authority, link_triples, mirror_mismatches, random_ops, random_store, rng, Model};
use panoptica::ingest::{import, ImportMapping};
use panoptica::recognition::{classify, normalize, Perception};
use panoptica::reports::{export_store, load_xml, object_report, Format};
use panoptica::traversal::{Filter, Predicate, Session};
use panoptica::{demo, ObjectId, Store, Value};
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(96))]

    #[test]
    fn mirror_holds_after_any_operation_sequence(seed in any::<u64>(), ops in 1usize..250) {
        let mut r = rng(seed);
        let vocab = common::random_vocabulary(&mut r, 5);
        let mut store = Store::new(vocab).unwrap();
        let mut model = Model::new();
        random_ops(&mut r, &mut store, &mut model, ops, 200);
        prop_assert!(store.integrity_check().is_empty());
        prop_assert_eq!(mirror_mismatches(&store, &model), Vec::<String>::new());
    }

    #[test]
    fn authority_is_a_count_of_link_values(seed in any::<u64>()) {
        let (store, _) = random_store(seed, 5, 150, 100);
        for record in store.objects() {
            prop_assert_eq!(store.authority(record.id).unwrap(), brute_authority(&store, record.id));
        }
    }

    #[test]
    fn deleted_ids_never_reappear(seed in any::<u64>()) {
        let mut r = rng(seed);
        let vocab = common::random_vocabulary(&mut r, 4);
        let mut store = Store::new(vocab).unwrap();
        let mut model = Model::new();
        let mut seen = BTreeSet::new();
        for _ in 0..6 {
            random_ops(&mut r, &mut store, &mut model, 30, 500);
            for id in model.keys() {
                seen.insert(*id);
            }
            let live: BTreeSet<ObjectId> = model.keys().copied().collect();
            let next = store.next_id();
            prop_assert!(seen.iter().all(|id| id.get() < next));
            prop_assert!(live.is_subset(&seen));
        }
    }

    #[test]
    fn incoming_and_outgoing_only_name_live_objects(seed in any::<u64>()) {
        let (store, _) = random_store(seed, 5, 200, 120);
        for record in store.objects() {
            for group in store.incoming(record.id).unwrap() {
                prop_assert!(group.members.iter().all(|m| store.contains(*m)));
            }
            for (_, target) in store.outgoing(record.id).unwrap() {
                prop_assert!(store.contains(target));
            }
        }
    }

    #[test]
    fn context_without_restrictions_is_exactly_incoming(seed in any::<u64>()) {
        let (store, _) = random_store(seed, 5, 150, 80);
        let mut session = Session::new();
        for record in store.objects() {
            let view = session.focus(&store, record.id).unwrap();
            let shown: Vec<(String, String, Vec<ObjectId>)> = view
                .d4_context
                .iter()
                .map(|g| (g.class.clone(), g.via_attribute.clone(), g.members.iter().map(|m| m.id).collect()))
                .collect();
            let incoming: Vec<(String, String, Vec<ObjectId>)> = store
                .incoming(record.id)
                .unwrap()
                .into_iter()
                .map(|g| (g.class, g.attribute, g.members))
                .collect();
            prop_assert_eq!(shown, incoming);
        }
    }

    #[test]
    fn adding_a_clause_never_enlarges_lists(seed in any::<u64>(), needle in "[a-z]{0,2}", lo in -5i64..40) {
        let (store, _) = random_store(seed, 4, 150, 80);
        let vocab = store.vocabulary().clone();
        let class = vocab.classes[0].name.clone();
        let Some(&focus) = store.objects().map(|r| r.id).collect::<Vec<_>>().first() else {
            return Ok(());
        };
        let base = Filter::contains(&class, "name", needle);
        let narrower = if vocab.classes[0].attribute("n").is_some() {
            base.clone().with("n", Predicate::Range { lo: Value::Integer(lo), hi: Value::Integer(lo + 10) })
        } else {
            base.clone().with("name", Predicate::Contains("a".into()))
        };
        let measure = |filter: Filter| {
            let mut s = Session::new();
            s.set_filter(&vocab, filter).unwrap();
            s.select_class(&store, &class).unwrap();
            let view = s.focus(&store, focus).unwrap();
            let d2: BTreeSet<ObjectId> = view.d2_objects.iter().map(|o| o.id).collect();
            let d4: BTreeSet<(String, String, ObjectId)> = view
                .d4_context
                .iter()
                .flat_map(|g| g.members.iter().map(|m| (g.class.clone(), g.via_attribute.clone(), m.id)))
                .collect();
            (d2, d4)
        };
        let (d2_wide, d4_wide) = measure(base);
        let (d2_narrow, d4_narrow) = measure(narrower);
        prop_assert!(d2_narrow.is_subset(&d2_wide));
        prop_assert!(d4_narrow.is_subset(&d4_wide));
    }

    #[test]
    fn anchors_are_idempotent_and_reversible(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let (store, _) = random_store(seed, 4, 150, 80);
        let ids: Vec<ObjectId> = store.objects().map(|r| r.id).collect();
        if ids.is_empty() {
            return Ok(());
        }
        let id = *pick.get(&ids);
        let class = store.get(id).unwrap().class.clone();
        let vocab = store.vocabulary().clone();
        let collections = |s: &Session| {
            vocab.classes.iter().map(|c| s.visible_objects(&store, &c.name)).collect::<Vec<_>>()
        };
        let plain = Session::new();
        let mut once = Session::new();
        once.set_anchor(&store, &class, id).unwrap();
        let mut twice = once.clone();
        twice.set_anchor(&store, &class, id).unwrap();
        prop_assert_eq!(collections(&once), collections(&twice));
        for other in store.objects_of(&class).unwrap() {
            let expected = other == id || store.neighbors(id).contains(&other);
            prop_assert_eq!(once.is_visible(&store, other), expected);
        }
        let mut cleared = once.clone();
        cleared.clear_anchor(&vocab, &class).unwrap();
        prop_assert_eq!(collections(&cleared), collections(&plain));
    }

    #[test]
    fn xml_export_is_a_fixpoint(seed in any::<u64>()) {
        let (store, _) = random_store(seed, 5, 120, 80);
        let xml = export_store(&store, Format::Xml).unwrap();
        let back = load_xml(&xml).unwrap();
        prop_assert_eq!(back.to_snapshot(), store.to_snapshot());
        prop_assert_eq!(export_store(&back, Format::Xml).unwrap(), xml);
    }

    #[test]
    fn snapshot_round_trip(seed in any::<u64>()) {
        let (store, model) = random_store(seed, 5, 120, 80);
        let back = Store::from_snapshot_json(store.vocabulary().clone(), &store.to_snapshot_json()).unwrap();
        prop_assert_eq!(back.next_id(), store.next_id());
        prop_assert_eq!(mirror_mismatches(&back, &model), Vec::<String>::new());
    }

    #[test]
    fn object_report_context_matches_incoming(seed in any::<u64>()) {
        let (store, model) = random_store(seed, 4, 100, 60);
        let triples = link_triples(&model);
        for record in store.objects() {
            let xml = object_report(&store, record.id, Format::Xml).unwrap();
            let doc = context_members(&xml);
            let want: BTreeSet<(String, String, u64)> = triples
                .iter()
                .filter(|(_, _, t)| *t == record.id)
                .map(|(s, a, _)| (model[s].0.clone(), a.clone(), s.get()))
                .collect();
            prop_assert_eq!(doc, want);
        }
    }
}

/// (class, via attribute, member id) triples of an object report, read by
/// plain line scanning so the check does not share the renderer's code.
fn context_members(xml: &str) -> BTreeSet<(String, String, u64)> {
    let mut out = BTreeSet::new();
    let mut group = None;
    for line in xml.lines().map(str::trim) {
        if line.starts_with("<group") {
            group = Some((attr_of(line, "class").unwrap(), attr_of(line, "via").unwrap()));
        } else if line.starts_with("</group") {
            group = None;
        } else if let (Some((class, via)), true) = (&group, line.starts_with("<object")) {
            let id = attr_of(line, "id").and_then(|s| s.parse().ok()).unwrap();
            out.insert((class.clone(), via.clone(), id));
        }
    }
    out
}

fn attr_of(line: &str, name: &str) -> Option<String> {
    let key = format!(" {name}=\"");
    let start = line.find(&key)? + key.len();
    let end = line[start..].find('"')? + start;
    Some(line[start..end].to_string())
}

fn name_strategy() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["title", "author", "name", "opera", "voice", "year", "born", "noise", "x"])
        .prop_map(str::to_string)
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn classify_ignores_perception_order(names in prop::collection::vec(name_strategy(), 1..8), samples in prop::collection::vec("[0-9a-z]{0,4}", 1..4)) {
        let v = demo::opera_vocabulary();
        let first = names[0].clone();
        let forward = Perception::new(names.iter().cloned()).with_samples(first.clone(), samples.clone());
        let mut reversed_names = names.clone();
        reversed_names.reverse();
        let mut reversed_samples = samples.clone();
        reversed_samples.reverse();
        let backward = Perception::new(reversed_names).with_samples(first, reversed_samples);
        prop_assert_eq!(classify(&v, &forward).unwrap(), classify(&v, &backward).unwrap());
    }

    #[test]
    fn scores_stay_in_bounds(names in prop::collection::vec(name_strategy(), 1..8)) {
        let v = demo::opera_vocabulary();
        for m in classify(&v, &Perception::new(names)).unwrap() {
            prop_assert!(m.score > 0.into() && m.score <= 1.into());
            prop_assert!(m.name_score <= 1.into() && m.value_compat <= 1.into());
            prop_assert!(!m.matched.is_empty());
        }
    }

    #[test]
    fn perfect_score_means_exact_names(names in prop::collection::vec(name_strategy(), 1..8)) {
        let v = demo::opera_vocabulary();
        let perceived: BTreeSet<String> = names.iter().map(|n| normalize(n)).collect();
        for m in classify(&v, &Perception::new(names.clone())).unwrap() {
            let class: BTreeSet<String> =
                v.class(&m.class).unwrap().attributes.iter().map(|a| normalize(&a.name)).collect();
            prop_assert_eq!(m.score == 1.into(), class == perceived);
        }
    }

    #[test]
    fn adding_a_class_name_never_lowers_its_name_score(names in prop::collection::vec(name_strategy(), 1..6), class_pick in any::<prop::sample::Index>(), attr_pick in any::<prop::sample::Index>()) {
        let v = demo::opera_vocabulary();
        let class = class_pick.get(&v.classes);
        let extra = attr_pick.get(&class.attributes).name.clone();
        let score_of = |p: &Perception| {
            classify(&v, p).unwrap().into_iter().find(|m| m.class == class.name).map(|m| m.name_score)
        };
        let before = score_of(&Perception::new(names.clone())).unwrap_or_default();
        let mut more = names.clone();
        more.push(extra);
        let after = score_of(&Perception::new(more)).unwrap();
        prop_assert!(after >= before);
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn import_conserves_rows(rows in prop::collection::vec((".{0,6}", "[0-9x]{0,3}", 0usize..3), 0..30)) {
        let mut store = demo::opera_store();
        let mapping = ImportMapping::new("Choir").map("name", "name").map("opera", "opera").map("singers", "singers");
        let operas = ["Fidelio", "Madame Butterfly", "Nowhere"];
        let mut source = String::from("name,opera,singers\n");
        for (name, singers, opera) in &rows {
            let name = format!("\"{}\"", name.replace('"', "\"\""));
            source.push_str(&format!("{name},{},{singers}\n", operas[*opera]));
        }
        let before = store.len();
        let report = import(&mut store, &mapping, &source).unwrap();
        prop_assert_eq!(report.inserted + report.rejected.len(), rows.len());
        prop_assert_eq!(store.len(), before + report.inserted);
        prop_assert!(store.integrity_check().is_empty());
    }
}

#[test]
fn second_identical_import_into_keyed_class_rejects_every_row() {
    let mut store = demo::opera_store();
    let source = "roles,singers,productions\n\
                  F. B. Pinkerton,Ivana Babić,Zagreb 2021\n\
                  Don Giovanni,Marko Horvat,Zagreb 2021\n\
                  Leonore,Ana Kovač,Ljubljana 2019\n";
    let mapping = ImportMapping::new("Casting")
        .map("roles", "roles")
        .map("singers", "singers")
        .map("productions", "productions");
    let first = import(&mut store, &mapping, source).unwrap();
    assert_eq!(first.inserted, 3);
    let second = import(&mut store, &mapping, source).unwrap();
    assert_eq!(second.inserted, 0);
    assert_eq!(second.rejected.len(), 3);
    assert!(second.rejected.iter().all(|r| r.code == "DuplicateKey"));
    assert!(store.integrity_check().is_empty());
}
