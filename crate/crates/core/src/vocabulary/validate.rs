use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::{LabelSource, Vocabulary, ID_COLUMN, KEY_LABEL};
use crate::value::Kind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DiagnosticCode {
    EmptyName,
    DuplicateClass,
    DuplicateAttribute,
    UnknownTargetClass,
    /// `target_class` set on a scalar attribute, or missing on a link.
    TargetMismatch,
    ArityTooSmall,
    MissingLabel,
    InvalidLabel,
    ReservedName,
    ColumnCollision,
}

/// One well-formedness problem in a vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub class: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.code, self.message)
    }
}

pub(super) fn validate(vocab: &Vocabulary) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |code, class: &str, attribute: Option<&str>, message: String| {
        out.push(Diagnostic {
            code,
            class: class.to_string(),
            attribute: attribute.map(str::to_string),
            message,
        })
    };

    let mut seen_classes = HashSet::new();
    for class in &vocab.classes {
        let cname = class.name.as_str();
        if cname.trim().is_empty() {
            push(DiagnosticCode::EmptyName, cname, None, "class name is empty".into());
        }
        if !seen_classes.insert(cname) {
            push(
                DiagnosticCode::DuplicateClass,
                cname,
                None,
                format!("class `{cname}` is declared more than once"),
            );
        }

        let mut seen_attrs = HashSet::new();
        let mut columns = HashSet::new();
        for attr in &class.attributes {
            let aname = attr.name.as_str();
            if aname.trim().is_empty() {
                push(
                    DiagnosticCode::EmptyName,
                    cname,
                    Some(aname),
                    format!("`{cname}` has an attribute with an empty name"),
                );
            }
            if !seen_attrs.insert(aname) {
                push(
                    DiagnosticCode::DuplicateAttribute,
                    cname,
                    Some(aname),
                    format!("`{cname}.{aname}` is declared more than once"),
                );
            }
            match (attr.kind, attr.target_class.as_deref()) {
                (Kind::Link, Some(target)) => {
                    if vocab.class(target).is_none() {
                        push(
                            DiagnosticCode::UnknownTargetClass,
                            cname,
                            Some(aname),
                            format!("`{cname}.{aname}` links to unknown class `{target}`"),
                        );
                    }
                }
                (Kind::Link, None) => push(
                    DiagnosticCode::TargetMismatch,
                    cname,
                    Some(aname),
                    format!("link `{cname}.{aname}` has no target class"),
                ),
                (_, Some(_)) => push(
                    DiagnosticCode::TargetMismatch,
                    cname,
                    Some(aname),
                    format!("scalar `{cname}.{aname}` names a target class"),
                ),
                (_, None) => {}
            }
            if aname == ID_COLUMN {
                push(
                    DiagnosticCode::ReservedName,
                    cname,
                    Some(aname),
                    format!("`{ID_COLUMN}` is reserved for the surrogate key"),
                );
            } else if !columns.insert(attr.column_name()) {
                push(
                    DiagnosticCode::ColumnCollision,
                    cname,
                    Some(aname),
                    format!("`{cname}.{aname}` maps to column `{}` already in use", attr.column_name()),
                );
            }
        }

        if class.is_intermediate && class.arity() < 2 {
            push(
                DiagnosticCode::ArityTooSmall,
                cname,
                None,
                format!(
                    "intermediate class `{cname}` has {} link attribute(s), needs at least 2",
                    class.arity()
                ),
            );
        }

        match class.label_source() {
            LabelSource::Attribute(def) if def.kind != Kind::Text || !def.required => push(
                DiagnosticCode::InvalidLabel,
                cname,
                Some(&def.name),
                format!("label `{cname}.{}` must be a required text attribute", def.name),
            ),
            LabelSource::Attribute(_) | LabelSource::ConcatenatedKey => {}
            LabelSource::Missing => {
                let message = match class.label_attribute.as_deref() {
                    Some(name) if name == KEY_LABEL => {
                        format!("only intermediate classes can use `{KEY_LABEL}`; `{cname}` is not one")
                    }
                    Some(name) => format!("label `{name}` is not an attribute of `{cname}`"),
                    None => format!("`{cname}` has no label attribute"),
                };
                push(DiagnosticCode::MissingLabel, cname, None, message)
            }
        }
    }
    out
}
