//! Logical vocabulary to physical relational schema.
//!
//! Output layout: a header comment, then one `CREATE TABLE` per class in
//! declaration order, then every `CREATE INDEX`. Statement groups are
//! separated by a blank line and all lines end in LF.

use std::fmt::Write;

use super::{Vocabulary, ID_COLUMN};
use crate::value::Kind;

pub(crate) fn quote_ident(name: &str) -> String {
    format!("\"{}\"", name.replace('"', "\"\""))
}

pub(crate) fn sql_type(kind: Kind) -> &'static str {
    match kind {
        Kind::Text => "VARCHAR",
        Kind::Integer | Kind::Link => "BIGINT",
        Kind::Decimal => "DECIMAL(18,6)",
        Kind::Date => "DATE",
        Kind::Boolean => "BOOLEAN",
    }
}

pub(super) fn compile(vocab: &Vocabulary) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "-- Schema for vocabulary {} (version {})",
        quote_ident(&vocab.name),
        vocab.version
    )
    .unwrap();

    let mut indexes = Vec::new();
    for class in &vocab.classes {
        let table = quote_ident(&class.name);
        let mut lines = vec![format!("    {} BIGINT NOT NULL PRIMARY KEY", quote_ident(ID_COLUMN))];
        for attr in &class.attributes {
            let column = attr.column_name();
            let mut line = format!("    {} {}", quote_ident(&column), sql_type(attr.kind));
            if attr.required {
                line.push_str(" NOT NULL");
            }
            if let Some(target) = &attr.target_class {
                // Deferred so rows may be loaded in id order even when a link
                // points forward or forms a cycle.
                write!(
                    line,
                    " REFERENCES {}({}) DEFERRABLE INITIALLY DEFERRED",
                    quote_ident(target),
                    quote_ident(ID_COLUMN)
                )
                .unwrap();
                indexes.push(format!(
                    "CREATE INDEX {} ON {} ({});",
                    quote_ident(&format!("{}_{}_idx", class.name, column)),
                    table,
                    quote_ident(&column)
                ));
            }
            lines.push(line);
        }
        if class.enforces_unique_key() {
            let key: Vec<_> = class
                .link_attributes()
                .map(|a| quote_ident(&a.column_name()))
                .collect();
            lines.push(format!("    UNIQUE ({})", key.join(", ")));
        }
        write!(out, "\nCREATE TABLE {table} (\n{}\n);\n", lines.join(",\n")).unwrap();
    }

    if !indexes.is_empty() {
        out.push('\n');
        for index in indexes {
            out.push_str(&index);
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocabulary::AttributeDef;
    use crate::Error;

    #[test]
    fn empty_vocabulary_is_header_only() {
        let ddl = Vocabulary::new("empty").compile_ddl().unwrap();
        assert_eq!(ddl, "-- Schema for vocabulary \"empty\" (version 0)\n");
    }

    #[test]
    fn invalid_vocabulary_is_refused() {
        let v = Vocabulary::new("x").create_class("Casting", true).unwrap();
        assert!(matches!(v.compile_ddl(), Err(Error::InvalidVocabulary(_))));
    }

    #[test]
    fn identifiers_are_quoted_verbatim() {
        assert_eq!(quote_ident("Figaro's \"wedding\""), "\"Figaro's \"\"wedding\"\"\"");
    }

    #[test]
    fn unique_key_follows_flag() {
        let base = Vocabulary::new("m")
            .create_class("A", false)
            .and_then(|v| v.add_attribute("A", AttributeDef::text("name").required()))
            .and_then(|v| v.create_relationship("AA", &["A", "A"], vec![]))
            .unwrap();
        let with_key = base.compile_ddl().unwrap();
        assert!(with_key.contains("    UNIQUE (\"a_ref\", \"a_2_ref\")\n"));
        let without = base.set_key_unique("AA", false).unwrap().compile_ddl().unwrap();
        assert!(!without.contains("UNIQUE"));
    }
}
