//! Focus+context navigation over the known object space.
//!
//! A [`Session`] holds the navigation state of one client: the selected
//! class, the focused object, per-class filters and anchors, and the visit
//! history. Views are computed on demand from an immutable [`Store`].
//!
//! Visibility rules:
//! - a filter on class C keeps only C objects matching every clause;
//! - an anchor on class C pinned to object `a` keeps only C objects that are
//!   `a` itself or directly linked to `a` in either direction;
//! - both restrict d1 counts, d2 lists and d4 groups, never the focus's own
//!   attributes (d3).

mod filter;
mod view;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::store::{ObjectId, Store};
use crate::value::Kind;
use crate::vocabulary::Vocabulary;

pub use filter::{Clause, ClauseSpec, Filter, FilterSpec, Predicate, PredicateSpec};
pub use view::{
    AttributeEntry, ClassCount, ContextGroup, FocusEntry, GroupAttributes, LinkTarget, MemberValues,
    ObjectEntry, ViewModel,
};

/// How to leave the current focus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// Follow a populated link attribute of the focus.
    Link(String),
    /// Jump to a displayed dependent object.
    Member(ObjectId),
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Session {
    pub selected_class: Option<String>,
    pub focus: Option<ObjectId>,
    #[serde(serialize_with = "serialize_filters")]
    pub filters: BTreeMap<String, Filter>,
    pub anchors: BTreeMap<String, ObjectId>,
    /// Every focused object in visit order.
    pub history: Vec<ObjectId>,
}

fn serialize_filters<S: serde::Serializer>(
    filters: &BTreeMap<String, Filter>,
    serializer: S,
) -> Result<S::Ok, S::Error> {
    serializer.collect_map(filters.iter().map(|(k, f)| (k, f.to_spec())))
}

impl Session {
    pub fn new() -> Self {
        Self::default()
    }

    /// Whether `id` survives the filter and anchor of its own class.
    pub fn is_visible(&self, store: &Store, id: ObjectId) -> bool {
        let Some(record) = store.get(id) else {
            return false;
        };
        if let Some(filter) = self.filters.get(&record.class) {
            if !filter.matches(record) {
                return false;
            }
        }
        match self.anchors.get(&record.class) {
            Some(&anchor) => anchor == id || store.neighbors(anchor).contains(&id),
            None => true,
        }
    }

    /// Objects of `class` passing filters and anchors, ordered by (label, id).
    pub fn visible_objects(&self, store: &Store, class: &str) -> Vec<ObjectId> {
        store
            .objects_of(class)
            .unwrap_or_default()
            .into_iter()
            .filter(|&id| self.is_visible(store, id))
            .collect()
    }

    pub fn list_classes(&self, store: &Store) -> Vec<ClassCount> {
        store
            .vocabulary()
            .classes
            .iter()
            .map(|c| ClassCount {
                class: c.name.clone(),
                count: self.visible_objects(store, &c.name).len(),
            })
            .collect()
    }

    pub fn select_class(&mut self, store: &Store, class: &str) -> Result<Vec<ObjectEntry>> {
        store.vocabulary().require_class(class)?;
        self.selected_class = Some(class.to_string());
        Ok(self
            .visible_objects(store, class)
            .into_iter()
            .map(|id| ObjectEntry { id, label: store.label(id) })
            .collect())
    }

    /// Makes `id` the object of observation and returns its full view.
    pub fn focus(&mut self, store: &Store, id: ObjectId) -> Result<ViewModel> {
        store.require(id)?;
        self.focus = Some(id);
        self.history.push(id);
        self.view(store)
    }

    /// Moves from the current focus along a link or to a dependent object.
    pub fn follow(&mut self, store: &Store, from: ObjectId, step: &Step) -> Result<ViewModel> {
        let record = store.require(from)?;
        if self.focus != Some(from) {
            return Err(Error::NotFocused(from));
        }
        let target = match step {
            Step::Link(attribute) => {
                let def = store.vocabulary().require_attribute(&record.class, attribute)?;
                if def.kind != Kind::Link {
                    return Err(Error::KindMismatch {
                        attribute: attribute.clone(),
                        expected: Kind::Link.to_string(),
                        found: def.kind.to_string(),
                    });
                }
                store
                    .links()
                    .target(from, attribute)
                    .ok_or_else(|| Error::UnpopulatedLink {
                        id: from,
                        attribute: attribute.clone(),
                    })?
            }
            Step::Member(member) => {
                store.require(*member)?;
                let displayed = store.links().sources(from).any(|(s, _)| s == member)
                    && self.is_visible(store, *member);
                if !displayed {
                    return Err(Error::NotInContext {
                        focus: from,
                        member: *member,
                    });
                }
                *member
            }
        };
        self.focus(store, target)
    }

    /// The current view without changing any state.
    pub fn view(&self, store: &Store) -> Result<ViewModel> {
        view::build(store, self)
    }

    pub fn set_filter(&mut self, vocab: &Vocabulary, filter: Filter) -> Result<()> {
        filter.validate(vocab)?;
        self.filters.insert(filter.class.clone(), filter);
        Ok(())
    }

    pub fn clear_filter(&mut self, vocab: &Vocabulary, class: &str) -> Result<()> {
        vocab.require_class(class)?;
        self.filters.remove(class);
        Ok(())
    }

    pub fn set_anchor(&mut self, store: &Store, class: &str, id: ObjectId) -> Result<()> {
        store.vocabulary().require_class(class)?;
        let record = store.require(id)?;
        if record.class != class {
            return Err(Error::ClassMismatch {
                id,
                expected: class.to_string(),
                actual: record.class.clone(),
            });
        }
        self.anchors.insert(class.to_string(), id);
        Ok(())
    }

    pub fn clear_anchor(&mut self, vocab: &Vocabulary, class: &str) -> Result<()> {
        vocab.require_class(class)?;
        self.anchors.remove(class);
        Ok(())
    }

    /// Drops references to objects and classes that no longer exist, after
    /// the store or vocabulary changed underneath the session.
    pub fn retain_live(&mut self, store: &Store) {
        let vocab = store.vocabulary();
        if self.focus.is_some_and(|f| !store.contains(f)) {
            self.focus = None;
        }
        if self.selected_class.as_deref().is_some_and(|c| vocab.class(c).is_none()) {
            self.selected_class = None;
        }
        self.history.retain(|id| store.contains(*id));
        self.anchors
            .retain(|class, id| store.get(*id).is_some_and(|r| &r.class == class));
        self.filters.retain(|_, f| f.validate(vocab).is_ok());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Value;
    use crate::vocabulary::AttributeDef;

    struct Fixture {
        store: Store,
        butterfly: ObjectId,
        fidelio: ObjectId,
        cio: ObjectId,
        pinkerton: ObjectId,
    }

    fn fixture() -> Fixture {
        let mut v = Vocabulary::new("opera")
            .create_class("Opera Works", false)
            .and_then(|v| v.add_attribute("Opera Works", AttributeDef::text("title").required()))
            .unwrap();
        for c in ["Roles", "Small Roles"] {
            v = v
                .create_class(c, false)
                .and_then(|v| v.add_attribute(c, AttributeDef::text("name").required()))
                .and_then(|v| v.add_attribute(c, AttributeDef::link("opera", "Opera Works").required()))
                .and_then(|v| v.add_attribute(c, AttributeDef::text("voice")))
                .unwrap();
        }
        v = v
            .add_attribute("Opera Works", AttributeDef::link("sequel", "Opera Works"))
            .unwrap();
        let mut store = Store::new(v).unwrap();
        let butterfly = store.insert("Opera Works", [("title", "Madame Butterfly")]).unwrap();
        let fidelio = store.insert("Opera Works", [("title", "Fidelio")]).unwrap();
        let role = |store: &mut Store, class: &str, name: &str, opera: ObjectId| {
            store
                .insert(class, [("name", Value::from(name)), ("opera", opera.into())])
                .unwrap()
        };
        let pinkerton = role(&mut store, "Roles", "F. B. Pinkerton", butterfly);
        let cio = role(&mut store, "Roles", "Cio-Cio-San", butterfly);
        role(&mut store, "Small Roles", "Bonze", butterfly);
        role(&mut store, "Roles", "Leonore", fidelio);
        Fixture {
            store,
            butterfly,
            fidelio,
            cio,
            pinkerton,
        }
    }

    fn group_labels(view: &ViewModel, class: &str) -> Vec<String> {
        view.d4_context
            .iter()
            .filter(|g| g.class == class)
            .flat_map(|g| g.members.iter().map(|m| m.label.clone()))
            .collect()
    }

    #[test]
    fn focus_builds_context() {
        let f = fixture();
        let mut s = Session::new();
        let view = s.focus(&f.store, f.butterfly).unwrap();
        assert_eq!(view.focus.as_ref().unwrap().label, "Madame Butterfly");
        assert_eq!(group_labels(&view, "Roles"), ["Cio-Cio-San", "F. B. Pinkerton"]);
        assert_eq!(group_labels(&view, "Small Roles"), ["Bonze"]);
        assert_eq!(view.d5_group_attributes[0].columns, ["name", "voice"]);
        assert_eq!(s.history, [f.butterfly]);

        let lonely = s.focus(&f.store, f.fidelio).unwrap();
        assert_eq!(group_labels(&lonely, "Roles"), ["Leonore"]);
        assert!(matches!(
            s.focus(&f.store, ObjectId::new(999).unwrap()),
            Err(Error::UnknownObject(_))
        ));
    }

    #[test]
    fn select_class_orders_by_label() {
        let f = fixture();
        let mut s = Session::new();
        let objects = s.select_class(&f.store, "Opera Works").unwrap();
        let labels: Vec<_> = objects.iter().map(|o| o.label.as_str()).collect();
        assert_eq!(labels, ["Fidelio", "Madame Butterfly"]);
        assert!(matches!(s.select_class(&f.store, "Ghost"), Err(Error::UnknownClass(_))));
    }

    #[test]
    fn follow_both_directions() {
        let f = fixture();
        let mut s = Session::new();
        s.focus(&f.store, f.cio).unwrap();
        let view = s.follow(&f.store, f.cio, &Step::Link("opera".into())).unwrap();
        assert_eq!(view.focus.unwrap().id, f.butterfly);
        let back = s.follow(&f.store, f.butterfly, &Step::Member(f.cio)).unwrap();
        let opera = back.d3_attributes.iter().find(|a| a.attribute == "opera").unwrap();
        assert_eq!(opera.target.as_ref().unwrap().target_id, f.butterfly);
        assert_eq!(s.history, [f.cio, f.butterfly, f.cio]);

        s.focus(&f.store, f.butterfly).unwrap();
        assert!(matches!(
            s.follow(&f.store, f.butterfly, &Step::Link("sequel".into())),
            Err(Error::UnpopulatedLink { .. })
        ));
        assert!(matches!(
            s.follow(&f.store, f.cio, &Step::Link("opera".into())),
            Err(Error::NotFocused(_))
        ));
        assert!(matches!(
            s.follow(&f.store, f.butterfly, &Step::Link("title".into())),
            Err(Error::KindMismatch { .. })
        ));
        let leonore = f.store.objects_of("Roles").unwrap()[2];
        assert!(matches!(
            s.follow(&f.store, f.butterfly, &Step::Member(leonore)),
            Err(Error::NotInContext { .. })
        ));
    }

    #[test]
    fn filters_restrict_lists_and_context_not_focus() {
        let f = fixture();
        let mut s = Session::new();
        let vocab = f.store.vocabulary().clone();
        s.set_filter(&vocab, Filter::contains("Roles", "name", "pink")).unwrap();
        let view = s.focus(&f.store, f.butterfly).unwrap();
        assert_eq!(group_labels(&view, "Roles"), ["F. B. Pinkerton"]);
        let counts: BTreeMap<_, _> = view.d1_classes.iter().map(|c| (c.class.as_str(), c.count)).collect();
        assert_eq!(counts["Roles"], 1);
        assert_eq!(counts["Opera Works"], 2);

        // focusing a filtered-out object still shows all its attributes
        let cio_view = s.focus(&f.store, f.cio).unwrap();
        assert_eq!(cio_view.d3_attributes[0].value.as_deref(), Some("Cio-Cio-San"));

        s.clear_filter(&vocab, "Roles").unwrap();
        let view = s.focus(&f.store, f.butterfly).unwrap();
        assert_eq!(group_labels(&view, "Roles"), ["Cio-Cio-San", "F. B. Pinkerton"]);

        let bad = Filter::new("Roles").with(
            "name",
            Predicate::Range {
                lo: Value::from("a"),
                hi: Value::from("b"),
            },
        );
        assert!(matches!(s.set_filter(&vocab, bad), Err(Error::PredicateKindMismatch { .. })));
    }

    #[test]
    fn anchors_restrict_only_their_class() {
        let f = fixture();
        let mut s = Session::new();
        s.set_anchor(&f.store, "Opera Works", f.butterfly).unwrap();
        let operas = s.select_class(&f.store, "Opera Works").unwrap();
        assert_eq!(operas.iter().map(|o| o.id).collect::<Vec<_>>(), [f.butterfly]);

        let view = s.focus(&f.store, f.cio).unwrap();
        let opera = view.d3_attributes.iter().find(|a| a.attribute == "opera").unwrap();
        assert_eq!(opera.target.as_ref().unwrap().target_id, f.butterfly);

        // roles of both operas are still listed: the anchor is on Opera Works
        assert_eq!(s.select_class(&f.store, "Roles").unwrap().len(), 3);

        s.set_anchor(&f.store, "Roles", f.cio).unwrap();
        let view = s.focus(&f.store, f.butterfly).unwrap();
        assert_eq!(group_labels(&view, "Roles"), ["Cio-Cio-San"]);
        assert!(!group_labels(&view, "Roles").contains(&"F. B. Pinkerton".to_string()));

        let vocab = f.store.vocabulary().clone();
        s.clear_anchor(&vocab, "Roles").unwrap();
        let view = s.focus(&f.store, f.butterfly).unwrap();
        assert_eq!(group_labels(&view, "Roles").len(), 2);

        assert!(matches!(
            s.set_anchor(&f.store, "Roles", f.butterfly),
            Err(Error::ClassMismatch { .. })
        ));
        assert!(matches!(
            s.set_anchor(&f.store, "Roles", ObjectId::new(99).unwrap()),
            Err(Error::UnknownObject(_))
        ));
        let _ = f.pinkerton;
    }

    #[test]
    fn retain_live_drops_stale_references() {
        let mut f = fixture();
        let mut s = Session::new();
        s.focus(&f.store, f.pinkerton).unwrap();
        s.set_anchor(&f.store, "Roles", f.pinkerton).unwrap();
        f.store.delete(f.pinkerton, false).unwrap();
        s.retain_live(&f.store);
        assert_eq!(s.focus, None);
        assert!(s.anchors.is_empty());
        assert!(s.history.is_empty());
        assert!(s.view(&f.store).is_ok());
    }
}
