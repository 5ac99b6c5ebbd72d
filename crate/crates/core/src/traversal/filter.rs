use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::{ObjectId, ObjectRecord};
use crate::value::{Kind, Value};
use crate::vocabulary::Vocabulary;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    Equals(Value),
    /// Case-insensitive substring match on text.
    Contains(String),
    /// Inclusive on both ends.
    Range { lo: Value, hi: Value },
    InSet(BTreeSet<ObjectId>),
}

impl Predicate {
    pub fn name(&self) -> &'static str {
        match self {
            Predicate::Equals(_) => "equals",
            Predicate::Contains(_) => "contains",
            Predicate::Range { .. } => "range",
            Predicate::InSet(_) => "in_set",
        }
    }

    fn matches(&self, value: Option<&Value>) -> bool {
        let Some(value) = value else {
            return false;
        };
        match self {
            Predicate::Equals(expected) => value == expected,
            Predicate::Contains(needle) => value
                .as_text()
                .is_some_and(|t| t.to_lowercase().contains(&needle.to_lowercase())),
            Predicate::Range { lo, hi } => {
                value.compare(lo).is_some_and(|o| o.is_ge()) && value.compare(hi).is_some_and(|o| o.is_le())
            }
            Predicate::InSet(ids) => value.as_link().is_some_and(|id| ids.contains(&id)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub attribute: String,
    pub predicate: Predicate,
}

/// Conjunction of attribute predicates over one class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filter {
    pub class: String,
    pub clauses: Vec<Clause>,
}

impl Filter {
    pub fn new(class: impl Into<String>) -> Self {
        Filter {
            class: class.into(),
            clauses: Vec::new(),
        }
    }

    pub fn with(mut self, attribute: impl Into<String>, predicate: Predicate) -> Self {
        self.clauses.push(Clause {
            attribute: attribute.into(),
            predicate,
        });
        self
    }

    pub fn contains(class: impl Into<String>, attribute: impl Into<String>, needle: impl Into<String>) -> Self {
        Filter::new(class).with(attribute, Predicate::Contains(needle.into()))
    }

    pub fn validate(&self, vocab: &Vocabulary) -> Result<()> {
        vocab.require_class(&self.class)?;
        for clause in &self.clauses {
            let def = vocab.require_attribute(&self.class, &clause.attribute)?;
            let fits = match &clause.predicate {
                Predicate::Equals(v) => v.kind() == def.kind,
                Predicate::Contains(_) => def.kind == Kind::Text,
                Predicate::Range { lo, hi } => {
                    def.kind.is_ordered() && lo.kind() == def.kind && hi.kind() == def.kind
                }
                Predicate::InSet(_) => def.kind == Kind::Link,
            };
            if !fits {
                return Err(Error::PredicateKindMismatch {
                    attribute: clause.attribute.clone(),
                    kind: def.kind.to_string(),
                    predicate: clause.predicate.name(),
                });
            }
        }
        Ok(())
    }

    pub fn matches(&self, record: &ObjectRecord) -> bool {
        record.class == self.class
            && self
                .clauses
                .iter()
                .all(|c| c.predicate.matches(record.get(&c.attribute)))
    }

    /// Decodes the JSON form, typing predicate values by attribute kind.
    pub fn from_spec(vocab: &Vocabulary, spec: FilterSpec) -> Result<Filter> {
        let mut filter = Filter::new(spec.class);
        for clause in spec.clauses {
            let def = vocab.require_attribute(&filter.class, &clause.attribute)?;
            let mismatch = |predicate| Error::PredicateKindMismatch {
                attribute: clause.attribute.clone(),
                kind: def.kind.to_string(),
                predicate,
            };
            let typed = |json: &serde_json::Value, predicate| {
                Value::from_json(def.kind, json).ok_or_else(|| mismatch(predicate))
            };
            let predicate = match &clause.predicate {
                PredicateSpec::Equals(v) => Predicate::Equals(typed(v, "equals")?),
                PredicateSpec::Contains(s) => Predicate::Contains(s.clone()),
                PredicateSpec::Range { lo, hi } => Predicate::Range {
                    lo: typed(lo, "range")?,
                    hi: typed(hi, "range")?,
                },
                PredicateSpec::InSet(ids) => Predicate::InSet(ids.iter().copied().collect()),
            };
            filter.clauses.push(Clause {
                attribute: clause.attribute,
                predicate,
            });
        }
        filter.validate(vocab)?;
        Ok(filter)
    }

    pub fn to_spec(&self) -> FilterSpec {
        FilterSpec {
            class: self.class.clone(),
            clauses: self
                .clauses
                .iter()
                .map(|c| ClauseSpec {
                    attribute: c.attribute.clone(),
                    predicate: match &c.predicate {
                        Predicate::Equals(v) => PredicateSpec::Equals(v.to_json()),
                        Predicate::Contains(s) => PredicateSpec::Contains(s.clone()),
                        Predicate::Range { lo, hi } => PredicateSpec::Range {
                            lo: lo.to_json(),
                            hi: hi.to_json(),
                        },
                        Predicate::InSet(ids) => PredicateSpec::InSet(ids.iter().copied().collect()),
                    },
                })
                .collect(),
        }
    }
}

/// Wire form of a [`Filter`]:
/// `{"class": "Roles", "clauses": [{"attribute": "name", "contains": "cio"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub class: String,
    #[serde(default)]
    pub clauses: Vec<ClauseSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseSpec {
    pub attribute: String,
    #[serde(flatten)]
    pub predicate: PredicateSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredicateSpec {
    Equals(serde_json::Value),
    Contains(String),
    Range { lo: serde_json::Value, hi: serde_json::Value },
    InSet(Vec<ObjectId>),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocabulary::AttributeDef;

    fn vocab() -> Vocabulary {
        Vocabulary::new("t")
            .create_class("Opera Works", false)
            .and_then(|v| v.add_attribute("Opera Works", AttributeDef::text("title").required()))
            .and_then(|v| v.add_attribute("Opera Works", AttributeDef::scalar("acts", Kind::Integer)))
            .and_then(|v| v.create_class("Roles", false))
            .and_then(|v| v.add_attribute("Roles", AttributeDef::text("name").required()))
            .and_then(|v| v.add_attribute("Roles", AttributeDef::link("opera", "Opera Works")))
            .unwrap()
    }

    #[test]
    fn kind_rules() {
        let v = vocab();
        let range_on_text = Filter::new("Roles").with(
            "name",
            Predicate::Range {
                lo: Value::from("a"),
                hi: Value::from("z"),
            },
        );
        assert!(matches!(range_on_text.validate(&v), Err(Error::PredicateKindMismatch { .. })));
        let in_set_on_text = Filter::new("Roles").with("name", Predicate::InSet(BTreeSet::new()));
        assert!(matches!(in_set_on_text.validate(&v), Err(Error::PredicateKindMismatch { .. })));
        assert!(matches!(
            Filter::contains("Roles", "voice", "x").validate(&v),
            Err(Error::UnknownAttribute { .. })
        ));
        assert!(matches!(
            Filter::contains("Ghost", "name", "x").validate(&v),
            Err(Error::UnknownClass(_))
        ));
        let ok = Filter::new("Opera Works").with(
            "acts",
            Predicate::Range {
                lo: Value::Integer(1),
                hi: Value::Integer(3),
            },
        );
        assert!(ok.validate(&v).is_ok());
    }

    #[test]
    fn matching() {
        let rec = |name: &str| ObjectRecord {
            id: ObjectId::new(1).unwrap(),
            class: "Roles".into(),
            values: [("name".to_string(), Value::from(name))].into(),
        };
        let f = Filter::contains("Roles", "name", "cio");
        assert!(f.matches(&rec("Cio-Cio-San")));
        assert!(!f.matches(&rec("F. B. Pinkerton")));
        let exact = Filter::new("Roles").with("name", Predicate::Equals(Value::from("cio-cio-san")));
        assert!(!exact.matches(&rec("Cio-Cio-San")));
        // a missing value never matches
        let on_link = Filter::new("Roles").with("opera", Predicate::InSet([ObjectId::new(1).unwrap()].into()));
        assert!(!on_link.matches(&rec("Bonze")));
    }

    #[test]
    fn json_spec() {
        let v = vocab();
        let spec: FilterSpec = serde_json::from_value(serde_json::json!({
            "class": "Opera Works",
            "clauses": [
                {"attribute": "title", "contains": "but"},
                {"attribute": "acts", "range": {"lo": 1, "hi": 3}}
            ]
        }))
        .unwrap();
        let f = Filter::from_spec(&v, spec.clone()).unwrap();
        assert_eq!(f.clauses.len(), 2);
        assert_eq!(f.to_spec(), spec);

        let bad: FilterSpec = serde_json::from_value(serde_json::json!({
            "class": "Opera Works",
            "clauses": [{"attribute": "acts", "equals": "three"}]
        }))
        .unwrap();
        assert!(matches!(Filter::from_spec(&v, bad), Err(Error::PredicateKindMismatch { .. })));
    }
}
