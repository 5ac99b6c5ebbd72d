use std::io;

use crate::store::ObjectId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the engine can report.
///
/// Each variant has a stable machine-readable [`code`](Error::code) shared by
/// the CLI and the HTTP gateway.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("name must not be empty")]
    EmptyName,
    #[error("class `{0}` already exists")]
    DuplicateClass(String),
    #[error("class `{class}` already has an attribute `{attribute}`")]
    DuplicateAttribute { class: String, attribute: String },
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("attribute `{attribute}` links to unknown class `{target}`")]
    UnknownTargetClass { attribute: String, target: String },
    #[error("class `{class}` has no attribute `{attribute}`")]
    UnknownAttribute { class: String, attribute: String },
    #[error("a relationship needs at least 2 participants, got {0}")]
    ArityTooSmall(usize),
    #[error("`{attribute}` cannot label class `{class}`: {reason}")]
    InvalidLabel {
        class: String,
        attribute: String,
        reason: &'static str,
    },
    #[error("vocabulary is not well-formed ({} problem(s)): {}", .0.len(), .0.first().map(ToString::to_string).unwrap_or_default())]
    InvalidVocabulary(Vec<crate::vocabulary::Diagnostic>),

    #[error("unknown object #{0}")]
    UnknownObject(ObjectId),
    #[error("`{attribute}` expects a {expected} value, got {found}")]
    KindMismatch {
        attribute: String,
        expected: String,
        found: String,
    },
    #[error("required attribute `{attribute}` of `{class}` has no value")]
    MissingRequired { class: String, attribute: String },
    #[error("`{attribute}` points to #{target}, which is not a live `{expected_class}` object")]
    DanglingLink {
        attribute: String,
        target: ObjectId,
        expected_class: String,
    },
    #[error("`{class}` already holds an object #{existing} with the same concatenated key")]
    DuplicateKey { class: String, existing: ObjectId },
    #[error("#{id} still has {count} incoming link(s)")]
    HasIncomingLinks { id: ObjectId, count: usize },
    #[error("#{id} is the target of required link `{class}.{attribute}` from #{source_id}")]
    RequiredLinkWouldDangle {
        id: ObjectId,
        source_id: ObjectId,
        class: String,
        attribute: String,
    },

    #[error("link `{attribute}` of #{id} is not populated")]
    UnpopulatedLink { id: ObjectId, attribute: String },
    #[error("#{0} is not the current focus")]
    NotFocused(ObjectId),
    #[error("#{member} is not displayed in the context of #{focus}")]
    NotInContext { focus: ObjectId, member: ObjectId },
    #[error("predicate `{predicate}` does not apply to {kind} attribute `{attribute}`")]
    PredicateKindMismatch {
        attribute: String,
        kind: String,
        predicate: &'static str,
    },
    #[error("#{id} belongs to `{actual}`, not `{expected}`")]
    ClassMismatch {
        id: ObjectId,
        expected: String,
        actual: String,
    },

    #[error("perception has no attribute names or an empty sample list")]
    EmptyPerception,

    #[error("source is empty")]
    EmptySource,
    #[error("source has no usable header row")]
    NoHeaderRow,
    #[error("no class matches the source columns")]
    NoCandidateClass,
    #[error("invalid import mapping: {0}")]
    InvalidMapping(String),
    #[error("no `{class}` object matches `{reference}` for link `{attribute}`")]
    UnresolvedLink {
        attribute: String,
        class: String,
        reference: String,
    },
    #[error("row has {found} fields, header has {expected}")]
    MalformedRow { expected: usize, found: usize },
    #[error("`{label}` matches {count} `{class}` objects")]
    AmbiguousLink {
        class: String,
        label: String,
        count: usize,
    },

    #[error("format `{format}` is not supported for {operation}")]
    UnsupportedFormat {
        format: String,
        operation: &'static str,
    },
    #[error("store failed its integrity check ({} violation(s)): {}", .0.len(), .0.first().map(ToString::to_string).unwrap_or_default())]
    CorruptStore(Vec<crate::store::Violation>),
    #[error("malformed document: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyName => "EmptyName",
            Error::DuplicateClass(_) => "DuplicateClass",
            Error::DuplicateAttribute { .. } => "DuplicateAttribute",
            Error::UnknownClass(_) => "UnknownClass",
            Error::UnknownTargetClass { .. } => "UnknownTargetClass",
            Error::UnknownAttribute { .. } => "UnknownAttribute",
            Error::ArityTooSmall(_) => "ArityTooSmall",
            Error::InvalidLabel { .. } => "InvalidLabel",
            Error::InvalidVocabulary(_) => "InvalidVocabulary",
            Error::UnknownObject(_) => "UnknownObject",
            Error::KindMismatch { .. } => "KindMismatch",
            Error::MissingRequired { .. } => "MissingRequired",
            Error::DanglingLink { .. } => "DanglingLink",
            Error::DuplicateKey { .. } => "DuplicateKey",
            Error::HasIncomingLinks { .. } => "HasIncomingLinks",
            Error::RequiredLinkWouldDangle { .. } => "RequiredLinkWouldDangle",
            Error::UnpopulatedLink { .. } => "UnpopulatedLink",
            Error::NotFocused(_) => "NotFocused",
            Error::NotInContext { .. } => "NotInContext",
            Error::PredicateKindMismatch { .. } => "PredicateKindMismatch",
            Error::ClassMismatch { .. } => "ClassMismatch",
            Error::EmptyPerception => "EmptyPerception",
            Error::EmptySource => "EmptySource",
            Error::NoHeaderRow => "NoHeaderRow",
            Error::NoCandidateClass => "NoCandidateClass",
            Error::InvalidMapping(_) => "InvalidMapping",
            Error::UnresolvedLink { .. } => "UnresolvedLink",
            Error::MalformedRow { .. } => "MalformedRow",
            Error::AmbiguousLink { .. } => "AmbiguousLink",
            Error::UnsupportedFormat { .. } => "UnsupportedFormat",
            Error::CorruptStore(_) => "CorruptStore",
            Error::Malformed(_) => "Malformed",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}
