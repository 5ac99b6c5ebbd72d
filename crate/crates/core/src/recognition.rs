//! Object recognition: ranks vocabulary classes by how well a perceived
//! attribute pattern fits them.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::store::Store;
use crate::value::{Kind, Value};
use crate::vocabulary::{AttributeDef, ClassDef, Vocabulary};

/// Weight of the name overlap in the final score, as (numerator, denominator).
pub const NAME_WEIGHT: (i64, i64) = (4, 5);
/// Weight of sample compatibility in the final score.
pub const VALUE_WEIGHT: (i64, i64) = (1, 5);

pub type Score = Ratio<i64>;

/// What was observed about an unknown object.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Perception {
    pub attribute_names: BTreeSet<String>,
    /// Raw sample values per perceived attribute name.
    pub samples: BTreeMap<String, Vec<String>>,
}

impl Perception {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Perception {
            attribute_names: names.into_iter().map(Into::into).collect(),
            samples: BTreeMap::new(),
        }
    }

    pub fn with_samples<I, S>(mut self, attribute: impl Into<String>, samples: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.samples
            .insert(attribute.into(), samples.into_iter().map(Into::into).collect());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassMatch {
    pub class: String,
    #[serde(serialize_with = "ratio_as_f64")]
    pub score: Score,
    #[serde(serialize_with = "ratio_as_f64")]
    pub name_score: Score,
    /// Class attribute names (as declared) that were perceived.
    pub matched: BTreeSet<String>,
    /// Required class attributes that were not perceived.
    pub missing_required: BTreeSet<String>,
    #[serde(serialize_with = "ratio_as_f64")]
    pub value_compat: Score,
}

fn ratio_as_f64<S: Serializer>(r: &Score, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(*r.numer() as f64 / *r.denom() as f64)
}

/// Lowercase, trim, and join whitespace runs with `_`.
pub fn normalize(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join("_")
        .to_lowercase()
}

/// Ranks the classes of `vocab` against `p`. Link samples count as
/// compatible when they parse as an object id.
pub fn classify(vocab: &Vocabulary, p: &Perception) -> Result<Vec<ClassMatch>> {
    rank(vocab, p, |_, sample| Value::parse(Kind::Link, sample).is_some())
}

/// Like [`classify`], but a link sample is also compatible when it equals
/// the label of an existing object of the target class.
pub fn classify_in(store: &Store, p: &Perception) -> Result<Vec<ClassMatch>> {
    let mut labels: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    rank(store.vocabulary(), p, |def, sample| {
        if Value::parse(Kind::Link, sample).is_some() {
            return true;
        }
        let Some(target) = def.target_class.as_deref() else {
            return false;
        };
        labels
            .entry(target.to_string())
            .or_insert_with(|| {
                store
                    .objects_of(target)
                    .unwrap_or_default()
                    .into_iter()
                    .map(|id| store.label(id))
                    .collect()
            })
            .contains(sample.trim())
    })
}

fn rank(
    vocab: &Vocabulary,
    p: &Perception,
    mut link_ok: impl FnMut(&AttributeDef, &str) -> bool,
) -> Result<Vec<ClassMatch>> {
    if p.attribute_names.is_empty() || p.samples.values().any(Vec::is_empty) {
        return Err(Error::EmptyPerception);
    }
    vocab.ensure_valid()?;
    let perceived: BTreeSet<String> = p.attribute_names.iter().map(|n| normalize(n)).collect();
    let mut samples: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    for (name, values) in &p.samples {
        samples
            .entry(normalize(name))
            .or_default()
            .extend(values.iter().map(String::as_str));
    }

    let mut matches: Vec<(usize, ClassMatch)> = Vec::new();
    for (position, class) in vocab.classes.iter().enumerate() {
        let m = score_class(class, &perceived, &samples, &mut link_ok);
        if !m.matched.is_empty() {
            matches.push((position, m));
        }
    }
    matches.sort_by(|(pa, a), (pb, b)| {
        b.score
            .cmp(&a.score)
            .then(a.missing_required.len().cmp(&b.missing_required.len()))
            .then(pa.cmp(pb))
    });
    Ok(matches.into_iter().map(|(_, m)| m).collect())
}

fn score_class(
    class: &ClassDef,
    perceived: &BTreeSet<String>,
    samples: &BTreeMap<String, Vec<&str>>,
    link_ok: &mut impl FnMut(&AttributeDef, &str) -> bool,
) -> ClassMatch {
    let by_norm: BTreeMap<String, &AttributeDef> =
        class.attributes.iter().map(|a| (normalize(&a.name), a)).collect();
    let mut matched = BTreeSet::new();
    let mut compatible = 0i64;
    for (norm, def) in &by_norm {
        if !perceived.contains(norm) {
            continue;
        }
        matched.insert(def.name.clone());
        let ok = samples.get(norm).is_none_or(|values| {
            values.iter().all(|s| match def.kind {
                Kind::Link => link_ok(def, s),
                kind => Value::parse(kind, s).is_some(),
            })
        });
        if ok {
            compatible += 1;
        }
    }
    let missing_required = class
        .attributes
        .iter()
        .filter(|a| a.required && !matched.contains(&a.name))
        .map(|a| a.name.clone())
        .collect();

    let union = perceived.len() + by_norm.keys().filter(|n| !perceived.contains(*n)).count();
    let name_score = Ratio::new(matched.len() as i64, union.max(1) as i64);
    let value_compat = if matched.is_empty() {
        Ratio::from_integer(1)
    } else {
        Ratio::new(compatible, matched.len() as i64)
    };
    let score = if matched.is_empty() {
        Ratio::from_integer(0)
    } else {
        name_score * Ratio::new(NAME_WEIGHT.0, NAME_WEIGHT.1)
            + value_compat * Ratio::new(VALUE_WEIGHT.0, VALUE_WEIGHT.1)
    };
    ClassMatch {
        class: class.name.clone(),
        score,
        name_score,
        matched,
        missing_required,
        value_compat,
    }
}

/// `r` rounded half-up to three decimals.
pub fn format_score(r: &Score) -> String {
    let thousandths = (r * Ratio::from_integer(1000)).round().to_integer();
    format!("{}.{:03}", thousandths / 1000, (thousandths % 1000).abs())
}

/// One line: `Composition score=1.000 matched=[author,title] missing_required=[] value_compat=1.000`.
pub fn match_report(m: &ClassMatch) -> String {
    let list = |s: &BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join(",");
    format!(
        "{} score={} matched=[{}] missing_required=[{}] value_compat={}",
        m.class,
        format_score(&m.score),
        list(&m.matched),
        list(&m.missing_required),
        format_score(&m.value_compat)
    )
}
