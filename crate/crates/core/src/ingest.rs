//! Controlled bulk load of delimited text with structure recognition.
//!
//! [`inspect`] recognizes which class a CSV/TSV source describes and
//! proposes a column mapping; [`import`] applies a mapping row by row. Every
//! row is one atomic unit: it is either inserted (with any stubs it needed)
//! or rejected with the reason, and the store is left untouched by it.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recognition::{self, normalize, ClassMatch, Perception};
use crate::store::{ObjectId, Store};
use crate::value::{Kind, Value};
use crate::vocabulary::{LabelSource, Vocabulary};

/// Candidate delimiters, in tie-break order.
pub const DELIMITERS: [u8; 3] = *b",;\t";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkResolution {
    /// Cell equals the label of exactly one target-class object.
    #[default]
    ByLabel,
    /// Cell is the id of a target-class object.
    ById,
}

impl LinkResolution {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkResolution::ByLabel => "by_label",
            LinkResolution::ById => "by_id",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnresolvedPolicy {
    #[default]
    RejectRow,
    /// Insert a target carrying only its label. Only for by-label links.
    CreateStub,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportMapping {
    pub class: String,
    /// Source column → attribute name.
    pub column_map: BTreeMap<String, String>,
    /// Per link attribute; unlisted link attributes resolve by label.
    #[serde(default)]
    pub link_resolution: BTreeMap<String, LinkResolution>,
    #[serde(default)]
    pub unresolved_policy: UnresolvedPolicy,
}

impl ImportMapping {
    pub fn new(class: impl Into<String>) -> Self {
        ImportMapping {
            class: class.into(),
            column_map: BTreeMap::new(),
            link_resolution: BTreeMap::new(),
            unresolved_policy: UnresolvedPolicy::RejectRow,
        }
    }

    pub fn map(mut self, column: impl Into<String>, attribute: impl Into<String>) -> Self {
        self.column_map.insert(column.into(), attribute.into());
        self
    }

    pub fn resolve(mut self, attribute: impl Into<String>, how: LinkResolution) -> Self {
        self.link_resolution.insert(attribute.into(), how);
        self
    }

    pub fn policy(mut self, policy: UnresolvedPolicy) -> Self {
        self.unresolved_policy = policy;
        self
    }

    pub fn resolution(&self, attribute: &str) -> LinkResolution {
        self.link_resolution.get(attribute).copied().unwrap_or_default()
    }

    /// Checks the mapping against the vocabulary and the source header.
    pub fn validate(&self, vocab: &Vocabulary, headers: &[String]) -> Result<()> {
        let class = vocab.require_class(&self.class)?;
        let mut seen = BTreeSet::new();
        for (column, attribute) in &self.column_map {
            if !headers.contains(column) {
                return Err(Error::InvalidMapping(format!("source has no column `{column}`")));
            }
            vocab.require_attribute(&self.class, attribute)?;
            if !seen.insert(attribute) {
                return Err(Error::InvalidMapping(format!(
                    "attribute `{attribute}` is mapped from more than one column"
                )));
            }
        }
        if let Some(missing) = class.attributes.iter().find(|a| a.required && !seen.contains(&a.name)) {
            return Err(Error::InvalidMapping(format!(
                "required attribute `{}` is not mapped",
                missing.name
            )));
        }
        for attribute in self.link_resolution.keys() {
            if !vocab.require_attribute(&self.class, attribute)?.is_link() {
                return Err(Error::InvalidMapping(format!("`{attribute}` is not a link attribute")));
            }
        }
        Ok(())
    }
}

/// What [`inspect`] recognized in a source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Inspection {
    #[serde(serialize_with = "delimiter_as_str")]
    pub delimiter: u8,
    pub headers: Vec<String>,
    pub row_count: usize,
    pub ranking: Vec<ClassMatch>,
    /// Mapping to the top-ranked class.
    pub mapping: ImportMapping,
}

fn delimiter_as_str<S: serde::Serializer>(d: &u8, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(match d {
        b'\t' => "\\t",
        b';' => ";",
        _ => ",",
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedRow {
    /// 1-based data row number; the header is not counted.
    pub row: usize,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ImportReport {
    pub inserted: usize,
    pub rejected: Vec<RejectedRow>,
    pub stubs_created: usize,
}

/// A parsed delimited document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub delimiter: u8,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn read_records(source: &str, delimiter: u8) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(source.as_bytes());
    reader
        .records()
        .map(|r| {
            r.map(|rec| rec.iter().map(|f| f.trim().to_string()).collect())
                .map_err(|e| Error::Malformed(e.to_string()))
        })
        .collect()
}

/// Picks the delimiter that splits the header at all, then the one under
/// which the most rows have the header's field count, then the wider header,
/// then comma, semicolon, tab.
pub fn detect_delimiter(source: &str) -> u8 {
    let mut best = (DELIMITERS[0], (false, 0usize, 0usize));
    for d in DELIMITERS {
        let Ok(records) = read_records(source, d) else {
            continue;
        };
        let width = records.first().map_or(0, Vec::len);
        let consistent = records.iter().filter(|r| r.len() == width).count();
        let key = (width > 1, consistent, width);
        if key > best.1 {
            best = (d, key);
        }
    }
    best.0
}

pub fn parse_table(source: &str) -> Result<Table> {
    if source.trim().is_empty() {
        return Err(Error::EmptySource);
    }
    let delimiter = detect_delimiter(source);
    let mut records = read_records(source, delimiter)?.into_iter();
    let headers = records.next().ok_or(Error::EmptySource)?;
    if headers.iter().any(String::is_empty) {
        return Err(Error::NoHeaderRow);
    }
    Ok(Table {
        delimiter,
        headers,
        rows: records.collect(),
    })
}

impl Table {
    /// Headers plus every non-empty cell of well-formed rows as samples.
    pub fn perception(&self) -> Perception {
        let mut p = Perception::new(self.headers.iter().cloned());
        for (i, header) in self.headers.iter().enumerate() {
            let samples: Vec<String> = self
                .rows
                .iter()
                .filter(|r| r.len() == self.headers.len())
                .map(|r| r[i].clone())
                .filter(|c| !c.is_empty())
                .collect();
            if !samples.is_empty() {
                p.samples.entry(header.clone()).or_default().extend(samples);
            }
        }
        p
    }
}

/// Recognizes the class of `source` using only the vocabulary.
pub fn inspect(vocab: &Vocabulary, source: &str) -> Result<Inspection> {
    let table = parse_table(source)?;
    let ranking = recognition::classify(vocab, &table.perception())?;
    propose(vocab, table, ranking)
}

/// Like [`inspect`], also accepting labels of existing objects as link samples.
pub fn inspect_in(store: &Store, source: &str) -> Result<Inspection> {
    let table = parse_table(source)?;
    let ranking = recognition::classify_in(store, &table.perception())?;
    propose(store.vocabulary(), table, ranking)
}

fn propose(vocab: &Vocabulary, table: Table, ranking: Vec<ClassMatch>) -> Result<Inspection> {
    let top = ranking.first().ok_or(Error::NoCandidateClass)?;
    let mapping = propose_mapping(vocab, &top.class, &table)?;
    Ok(Inspection {
        delimiter: table.delimiter,
        headers: table.headers,
        row_count: table.rows.len(),
        ranking,
        mapping,
    })
}

/// Maps each column whose normalized name equals a normalized attribute
/// name of `class`. Link columns whose non-empty cells are all ids resolve
/// by id, others by label.
pub fn propose_mapping(vocab: &Vocabulary, class: &str, table: &Table) -> Result<ImportMapping> {
    let class = vocab.require_class(class)?;
    let mut mapping = ImportMapping::new(&class.name);
    for def in &class.attributes {
        let norm = normalize(&def.name);
        let Some(col) = table.headers.iter().position(|h| normalize(h) == norm) else {
            continue;
        };
        let column = &table.headers[col];
        if mapping.column_map.contains_key(column) {
            continue;
        }
        mapping.column_map.insert(column.clone(), def.name.clone());
        if def.is_link() {
            let mut cells = table.rows.iter().filter_map(|r| r.get(col)).filter(|c| !c.is_empty()).peekable();
            let any = cells.peek().is_some();
            let how = if any && cells.all(|c| Value::parse(Kind::Link, c).is_some()) {
                LinkResolution::ById
            } else {
                LinkResolution::ByLabel
            };
            mapping.link_resolution.insert(def.name.clone(), how);
        }
    }
    Ok(mapping)
}

/// Loads `source` into `store` through `mapping`. Whole-call errors are
/// reserved for unreadable sources and invalid mappings; everything else is
/// reported per row.
pub fn import(store: &mut Store, mapping: &ImportMapping, source: &str) -> Result<ImportReport> {
    let table = parse_table(source)?;
    let vocab = std::sync::Arc::clone(store.vocabulary());
    mapping.validate(&vocab, &table.headers)?;
    let mut report = ImportReport::default();
    for (i, row) in table.rows.iter().enumerate() {
        let mut stubs = Vec::new();
        match import_row(store, &vocab, mapping, &table.headers, row, &mut stubs) {
            Ok(_) => {
                report.inserted += 1;
                report.stubs_created += stubs.len();
            }
            Err(e) => {
                for stub in stubs.into_iter().rev() {
                    store.delete(stub, false).expect("fresh stub has no incoming links");
                }
                report.rejected.push(RejectedRow {
                    row: i + 1,
                    code: e.code().to_string(),
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(report)
}

fn import_row(
    store: &mut Store,
    vocab: &Vocabulary,
    mapping: &ImportMapping,
    headers: &[String],
    row: &[String],
    stubs: &mut Vec<ObjectId>,
) -> Result<ObjectId> {
    if row.len() != headers.len() {
        return Err(Error::MalformedRow {
            expected: headers.len(),
            found: row.len(),
        });
    }
    let mut values: Vec<(String, Value)> = Vec::new();
    for (col, cell) in headers.iter().zip(row) {
        let Some(attribute) = mapping.column_map.get(col) else {
            continue;
        };
        if cell.is_empty() {
            continue;
        }
        let def = vocab.require_attribute(&mapping.class, attribute)?;
        let value = match &def.target_class {
            Some(target) if def.kind == Kind::Link => {
                let how = mapping.resolution(attribute);
                Value::Link(resolve_link(store, mapping, attribute, target, how, cell, stubs)?)
            }
            _ => Value::parse(def.kind, cell).ok_or_else(|| Error::KindMismatch {
                attribute: attribute.clone(),
                expected: def.kind.to_string(),
                found: format!("`{cell}`"),
            })?,
        };
        values.push((attribute.clone(), value));
    }
    store.insert(&mapping.class, values)
}

fn resolve_link(
    store: &mut Store,
    mapping: &ImportMapping,
    attribute: &str,
    target: &str,
    how: LinkResolution,
    cell: &str,
    stubs: &mut Vec<ObjectId>,
) -> Result<ObjectId> {
    let unresolved = || Error::UnresolvedLink {
        attribute: attribute.to_string(),
        class: target.to_string(),
        reference: cell.to_string(),
    };
    match how {
        LinkResolution::ById => {
            let id = Value::parse(Kind::Link, cell)
                .and_then(|v| v.as_link())
                .ok_or_else(|| Error::KindMismatch {
                    attribute: attribute.to_string(),
                    expected: Kind::Link.to_string(),
                    found: format!("`{cell}`"),
                })?;
            match store.get(id) {
                Some(r) if r.class == target => Ok(id),
                _ => Err(Error::DanglingLink {
                    attribute: attribute.to_string(),
                    target: id,
                    expected_class: target.to_string(),
                }),
            }
        }
        LinkResolution::ByLabel => {
            let found = store.find_by_label(target, cell)?;
            match found.as_slice() {
                [id] => Ok(*id),
                [] if mapping.unresolved_policy == UnresolvedPolicy::CreateStub => {
                    let label = match store.vocabulary().require_class(target)?.label_source() {
                        LabelSource::Attribute(def) => def.name.clone(),
                        _ => return Err(unresolved()),
                    };
                    let stub = store.insert(target, [(label, cell)])?;
                    stubs.push(stub);
                    Ok(stub)
                }
                [] => Err(unresolved()),
                many => Err(Error::AmbiguousLink {
                    class: target.to_string(),
                    label: cell.to_string(),
                    count: many.len(),
                }),
            }
        }
    }
}
