//! The data vocabulary: classes, their attributes, and the link structure
//! between them.
//!
//! A [`Vocabulary`] is an immutable value. Every editing operation returns a
//! new vocabulary with `version` bumped by one, so readers holding the old
//! value are never disturbed.

pub(crate) mod ddl;
mod validate;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::value::Kind;

pub use validate::{Diagnostic, DiagnosticCode};

/// Label name used by intermediate classes that have no text attribute of
/// their own; the label is synthesized from the linked objects' labels.
pub const KEY_LABEL: &str = "key_label";

/// Column name reserved for the surrogate key.
pub const ID_COLUMN: &str = "id";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub name: String,
    pub version: u64,
    pub classes: Vec<ClassDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDef {
    pub name: String,
    pub is_intermediate: bool,
    pub label_attribute: Option<String>,
    #[serde(default)]
    pub key_unique: bool,
    pub attributes: Vec<AttributeDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeDef {
    pub name: String,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_class: Option<String>,
    pub required: bool,
}

impl AttributeDef {
    pub fn scalar(name: impl Into<String>, kind: Kind) -> Self {
        debug_assert!(kind != Kind::Link, "use AttributeDef::link");
        AttributeDef {
            name: name.into(),
            kind,
            target_class: None,
            required: false,
        }
    }

    pub fn text(name: impl Into<String>) -> Self {
        Self::scalar(name, Kind::Text)
    }

    pub fn link(name: impl Into<String>, target_class: impl Into<String>) -> Self {
        AttributeDef {
            name: name.into(),
            kind: Kind::Link,
            target_class: Some(target_class.into()),
            required: false,
        }
    }

    pub fn required(mut self) -> Self {
        self.required = true;
        self
    }

    pub fn is_link(&self) -> bool {
        self.kind == Kind::Link
    }

    /// Name of the physical column: `<name>_ref` for links.
    pub fn column_name(&self) -> String {
        if self.is_link() {
            format!("{}_ref", self.name)
        } else {
            self.name.clone()
        }
    }
}

/// Where an object's display label comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelSource<'a> {
    Attribute(&'a AttributeDef),
    /// Labels of the linked objects, joined in key order.
    ConcatenatedKey,
    Missing,
}

impl ClassDef {
    pub fn attribute(&self, name: &str) -> Option<&AttributeDef> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn link_attributes(&self) -> impl Iterator<Item = &AttributeDef> {
        self.attributes.iter().filter(|a| a.is_link())
    }

    pub fn scalar_attributes(&self) -> impl Iterator<Item = &AttributeDef> {
        self.attributes.iter().filter(|a| !a.is_link())
    }

    /// Number of link attributes; the relationship arity of an intermediate class.
    pub fn arity(&self) -> usize {
        self.link_attributes().count()
    }

    /// Whether the concatenated key must be unique among this class's objects.
    pub fn enforces_unique_key(&self) -> bool {
        self.is_intermediate && self.key_unique
    }

    pub fn label_source(&self) -> LabelSource<'_> {
        match self.label_attribute.as_deref() {
            None => LabelSource::Missing,
            Some(name) => match self.attribute(name) {
                Some(def) => LabelSource::Attribute(def),
                None if self.is_intermediate && name == KEY_LABEL => LabelSource::ConcatenatedKey,
                None => LabelSource::Missing,
            },
        }
    }
}

impl Vocabulary {
    pub fn new(name: impl Into<String>) -> Self {
        Vocabulary {
            name: name.into(),
            version: 0,
            classes: Vec::new(),
        }
    }

    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn class_position(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.name == name)
    }

    pub fn require_class(&self, name: &str) -> Result<&ClassDef> {
        self.class(name)
            .ok_or_else(|| Error::UnknownClass(name.to_string()))
    }

    pub fn require_attribute(&self, class: &str, attribute: &str) -> Result<&AttributeDef> {
        self.require_class(class)?
            .attribute(attribute)
            .ok_or_else(|| Error::UnknownAttribute {
                class: class.to_string(),
                attribute: attribute.to_string(),
            })
    }

    fn bumped(&self) -> Vocabulary {
        let mut next = self.clone();
        next.version += 1;
        next
    }

    fn class_mut(&mut self, name: &str) -> Result<&mut ClassDef> {
        self.classes
            .iter_mut()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::UnknownClass(name.to_string()))
    }

    pub fn create_class(&self, name: &str, is_intermediate: bool) -> Result<Vocabulary> {
        if name.trim().is_empty() {
            return Err(Error::EmptyName);
        }
        if self.class(name).is_some() {
            return Err(Error::DuplicateClass(name.to_string()));
        }
        let mut next = self.bumped();
        next.classes.push(ClassDef {
            name: name.to_string(),
            is_intermediate,
            label_attribute: is_intermediate.then(|| KEY_LABEL.to_string()),
            key_unique: is_intermediate,
            attributes: Vec::new(),
        });
        Ok(next)
    }

    /// Appends an attribute. The first required text attribute of a class
    /// without a label becomes its label.
    pub fn add_attribute(&self, class: &str, def: AttributeDef) -> Result<Vocabulary> {
        if def.name.trim().is_empty() {
            return Err(Error::EmptyName);
        }
        let existing = self.require_class(class)?;
        if existing.attribute(&def.name).is_some() {
            return Err(Error::DuplicateAttribute {
                class: class.to_string(),
                attribute: def.name,
            });
        }
        match (def.kind, def.target_class.as_deref()) {
            (Kind::Link, Some(target)) if self.class(target).is_none() => {
                return Err(Error::UnknownTargetClass {
                    attribute: def.name,
                    target: target.to_string(),
                })
            }
            (Kind::Link, None) => {
                return Err(Error::UnknownTargetClass {
                    attribute: def.name,
                    target: String::new(),
                })
            }
            (kind, Some(_)) if kind != Kind::Link => {
                return Err(Error::KindMismatch {
                    attribute: def.name,
                    expected: "link (only links name a target class)".into(),
                    found: kind.to_string(),
                })
            }
            _ => {}
        }
        let mut next = self.bumped();
        let target = next.class_mut(class)?;
        if target.label_attribute.is_none() && def.kind == Kind::Text && def.required {
            target.label_attribute = Some(def.name.clone());
        }
        target.attributes.push(def);
        Ok(next)
    }

    /// Creates an intermediate class with one required link per participant,
    /// in order, followed by the extra scalar attributes.
    pub fn create_relationship(
        &self,
        name: &str,
        participants: &[&str],
        extra: Vec<AttributeDef>,
    ) -> Result<Vocabulary> {
        if participants.len() < 2 {
            return Err(Error::ArityTooSmall(participants.len()));
        }
        for p in participants {
            self.require_class(p)?;
        }
        if let Some(bad) = extra.iter().find(|a| a.is_link()) {
            return Err(Error::KindMismatch {
                attribute: bad.name.clone(),
                expected: "scalar".into(),
                found: Kind::Link.to_string(),
            });
        }
        let mut next = self.create_class(name, true)?;
        let mut used: Vec<String> = extra.iter().map(|a| a.name.clone()).collect();
        let mut links = Vec::with_capacity(participants.len());
        for p in participants {
            let base = participant_attribute_name(p);
            let mut candidate = base.clone();
            let mut n = 2;
            while used.contains(&candidate) {
                candidate = format!("{base}_{n}");
                n += 1;
            }
            used.push(candidate.clone());
            links.push(AttributeDef::link(candidate, *p).required());
        }
        let label = extra
            .iter()
            .find(|a| a.kind == Kind::Text && a.required)
            .map(|a| a.name.clone())
            .unwrap_or_else(|| KEY_LABEL.to_string());
        let class = next.class_mut(name)?;
        class.attributes = links;
        class.attributes.extend(extra);
        class.label_attribute = Some(label);
        Ok(next)
    }

    pub fn set_label(&self, class: &str, attribute: &str) -> Result<Vocabulary> {
        let def = self.require_class(class)?;
        let reason = match def.attribute(attribute) {
            None if def.is_intermediate && attribute == KEY_LABEL => None,
            None => {
                return Err(Error::UnknownAttribute {
                    class: class.to_string(),
                    attribute: attribute.to_string(),
                })
            }
            Some(a) if a.kind != Kind::Text => Some("label must be a text attribute"),
            Some(a) if !a.required => Some("label must be required"),
            Some(_) => None,
        };
        if let Some(reason) = reason {
            return Err(Error::InvalidLabel {
                class: class.to_string(),
                attribute: attribute.to_string(),
                reason,
            });
        }
        let mut next = self.bumped();
        next.class_mut(class)?.label_attribute = Some(attribute.to_string());
        Ok(next)
    }

    pub fn set_key_unique(&self, class: &str, key_unique: bool) -> Result<Vocabulary> {
        self.require_class(class)?;
        let mut next = self.bumped();
        next.class_mut(class)?.key_unique = key_unique;
        Ok(next)
    }

    /// Every well-formedness problem; empty iff the vocabulary is usable.
    pub fn validate(&self) -> Vec<Diagnostic> {
        validate::validate(self)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let diagnostics = self.validate();
        if diagnostics.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidVocabulary(diagnostics))
        }
    }

    /// Emits the relational schema for this vocabulary.
    pub fn compile_ddl(&self) -> Result<String> {
        self.ensure_valid()?;
        Ok(ddl::compile(self))
    }

    pub fn from_json(text: &str) -> Result<Vocabulary> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("vocabulary serializes");
        out.push('\n');
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Vocabulary> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(crate::fsutil::write_atomic(path.as_ref(), self.to_json().as_bytes())?)
    }
}

fn participant_attribute_name(class: &str) -> String {
    class
        .split_whitespace()
        .collect::<Vec<_>>()
        .join("_")
        .to_lowercase()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalogue() -> Vocabulary {
        Vocabulary::new("catalogue")
            .create_class("Author", false)
            .and_then(|v| v.add_attribute("Author", AttributeDef::text("name").required()))
            .and_then(|v| v.create_class("Composition", false))
            .and_then(|v| v.add_attribute("Composition", AttributeDef::text("title").required()))
            .and_then(|v| v.add_attribute("Composition", AttributeDef::link("author", "Author")))
            .unwrap()
    }

    #[test]
    fn create_class_bumps_version() {
        let v = Vocabulary::new("opera");
        let v2 = v.create_class("Opera Works", false).unwrap();
        assert_eq!(v2.version, 1);
        assert!(v2.class("Opera Works").unwrap().attributes.is_empty());
        assert_eq!(v.classes.len(), 0);
    }

    #[test]
    fn create_class_rejects_duplicates_and_blank_names() {
        let v = Vocabulary::new("opera").create_class("Opera Works", false).unwrap();
        assert!(matches!(v.create_class("Opera Works", false), Err(Error::DuplicateClass(_))));
        assert!(matches!(v.create_class("  ", false), Err(Error::EmptyName)));
        // names are case-sensitive
        assert!(v.create_class("opera works", false).is_ok());
    }

    #[test]
    fn empty_intermediate_is_flagged_by_validate() {
        let v = Vocabulary::new("opera").create_class("Casting", true).unwrap();
        let codes: Vec<_> = v.validate().into_iter().map(|d| d.code).collect();
        assert_eq!(codes, vec![DiagnosticCode::ArityTooSmall]);
    }

    #[test]
    fn add_attribute_checks() {
        let v = catalogue();
        assert_eq!(v.class("Composition").unwrap().label_attribute.as_deref(), Some("title"));
        assert!(matches!(
            v.add_attribute("Composition", AttributeDef::link("author", "Ghost")),
            Err(Error::DuplicateAttribute { .. })
        ));
        assert!(matches!(
            v.add_attribute("Composition", AttributeDef::link("arranger", "Ghost")),
            Err(Error::UnknownTargetClass { .. })
        ));
        assert!(matches!(
            v.add_attribute("Nope", AttributeDef::text("x")),
            Err(Error::UnknownClass(_))
        ));
        assert!(v.validate().is_empty());
    }

    #[test]
    fn relationship_arity_matches_participants() {
        let v = Vocabulary::new("cinema");
        let v = ["Hall", "Movie", "Customer"].iter().fold(v, |v, c| {
            v.create_class(c, false)
                .and_then(|v| v.add_attribute(c, AttributeDef::text("name").required()))
                .unwrap()
        });
        let v = v.create_relationship("Booking", &["Hall", "Movie", "Customer"], vec![]).unwrap();
        let booking = v.class("Booking").unwrap();
        assert!(booking.is_intermediate);
        assert_eq!(booking.arity(), 3);
        assert!(booking.key_unique);
        assert_eq!(booking.label_source(), LabelSource::ConcatenatedKey);
        assert!(v.validate().is_empty());

        assert!(matches!(
            v.create_relationship("X", &["Hall"], vec![]),
            Err(Error::ArityTooSmall(1))
        ));
        assert!(matches!(
            v.create_relationship("Y", &["Hall", "Ghost"], vec![]),
            Err(Error::UnknownClass(_))
        ));
    }

    #[test]
    fn reflexive_relationship_gets_distinct_link_names() {
        let v = Vocabulary::new("people")
            .create_class("Person", false)
            .and_then(|v| v.add_attribute("Person", AttributeDef::text("name").required()))
            .and_then(|v| {
                v.create_relationship(
                    "Friendship",
                    &["Person", "Person"],
                    vec![AttributeDef::text("since").required()],
                )
            })
            .unwrap();
        let f = v.class("Friendship").unwrap();
        let names: Vec<_> = f.attributes.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["person", "person_2", "since"]);
        assert_eq!(f.label_attribute.as_deref(), Some("since"));
    }

    #[test]
    fn json_document_field_order() {
        let v = catalogue();
        let json = v.to_json();
        let name = json.find("\"name\"").unwrap();
        let version = json.find("\"version\"").unwrap();
        let classes = json.find("\"classes\"").unwrap();
        assert!(name < version && version < classes);
        let class_fields = ["\"is_intermediate\"", "\"label_attribute\"", "\"key_unique\"", "\"attributes\""];
        let positions: Vec<_> = class_fields.iter().map(|f| json.find(f).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert!(json.contains("\"target_class\": \"Author\""));
        assert_eq!(Vocabulary::from_json(&json).unwrap(), v);
    }

    #[test]
    fn set_label_rules() {
        let v = catalogue()
            .add_attribute("Composition", AttributeDef::text("subtitle"))
            .unwrap();
        assert!(matches!(
            v.set_label("Composition", "subtitle"),
            Err(Error::InvalidLabel { .. })
        ));
        assert!(matches!(
            v.set_label("Composition", "author"),
            Err(Error::InvalidLabel { .. })
        ));
        assert!(v.set_label("Composition", "title").is_ok());
    }
}
