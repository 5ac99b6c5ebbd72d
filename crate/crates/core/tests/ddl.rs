mod common;

use std::collections::BTreeSet;

use panoptica::{AttributeDef, Kind, Vocabulary};
use proptest::prelude::*;

fn library() -> Vocabulary {
    Vocabulary::new("library")
        .create_class("Author", false)
        .and_then(|v| v.add_attribute("Author", AttributeDef::text("name").required()))
        .and_then(|v| v.add_attribute("Author", AttributeDef::scalar("born", Kind::Date)))
        .and_then(|v| v.create_class("Book", false))
        .and_then(|v| v.add_attribute("Book", AttributeDef::text("title").required()))
        .and_then(|v| v.add_attribute("Book", AttributeDef::scalar("pages", Kind::Integer)))
        .and_then(|v| v.add_attribute("Book", AttributeDef::scalar("price", Kind::Decimal)))
        .and_then(|v| v.add_attribute("Book", AttributeDef::scalar("in print", Kind::Boolean)))
        .and_then(|v| v.add_attribute("Book", AttributeDef::link("editor", "Author")))
        .and_then(|v| v.create_relationship("Wrote", &["Author", "Book"], vec![AttributeDef::text("role")]))
        .unwrap()
}

const LIBRARY_DDL: &str = r#"-- Schema for vocabulary "library" (version 10)

CREATE TABLE "Author" (
    "id" BIGINT NOT NULL PRIMARY KEY,
    "name" VARCHAR NOT NULL,
    "born" DATE
);

CREATE TABLE "Book" (
    "id" BIGINT NOT NULL PRIMARY KEY,
    "title" VARCHAR NOT NULL,
    "pages" BIGINT,
    "price" DECIMAL(18,6),
    "in print" BOOLEAN,
    "editor_ref" BIGINT REFERENCES "Author"("id") DEFERRABLE INITIALLY DEFERRED
);

CREATE TABLE "Wrote" (
    "id" BIGINT NOT NULL PRIMARY KEY,
    "author_ref" BIGINT NOT NULL REFERENCES "Author"("id") DEFERRABLE INITIALLY DEFERRED,
    "book_ref" BIGINT NOT NULL REFERENCES "Book"("id") DEFERRABLE INITIALLY DEFERRED,
    "role" VARCHAR,
    UNIQUE ("author_ref", "book_ref")
);

CREATE INDEX "Book_editor_ref_idx" ON "Book" ("editor_ref");
CREATE INDEX "Wrote_author_ref_idx" ON "Wrote" ("author_ref");
CREATE INDEX "Wrote_book_ref_idx" ON "Wrote" ("book_ref");
"#;

#[test]
fn golden_library_schema() {
    let ddl = library().compile_ddl().unwrap();
    assert_eq!(ddl, LIBRARY_DDL);
    assert!(!ddl.contains('\r'));
}

#[test]
fn golden_schema_loads_into_sqlite() {
    let conn = rusqlite::Connection::open_in_memory().unwrap();
    conn.execute_batch(LIBRARY_DDL).unwrap();
    let tables: i64 = conn
        .query_row("SELECT COUNT(*) FROM sqlite_master WHERE type = 'table'", [], |r| r.get(0))
        .unwrap();
    assert_eq!(tables, 3);
}

#[test]
fn keyed_relationship_refuses_duplicates_in_the_relational_engine_too() {
    let conn = rusqlite::Connection::open_in_memory().unwrap();
    conn.execute_batch("PRAGMA foreign_keys = ON;").unwrap();
    conn.execute_batch(LIBRARY_DDL).unwrap();
    conn.execute_batch(
        "INSERT INTO \"Author\" (\"id\", \"name\") VALUES (1, 'A');
         INSERT INTO \"Book\" (\"id\", \"title\") VALUES (2, 'B');
         INSERT INTO \"Wrote\" (\"id\", \"author_ref\", \"book_ref\") VALUES (3, 1, 2);",
    )
    .unwrap();
    let dup = conn.execute_batch("INSERT INTO \"Wrote\" (\"id\", \"author_ref\", \"book_ref\") VALUES (4, 1, 2);");
    assert!(dup.is_err());
}

#[test]
fn vocabulary_document_round_trips() {
    let v = library();
    let json = v.to_json();
    let fields: Vec<usize> = ["\"name\"", "\"version\"", "\"classes\""]
        .iter()
        .map(|f| json.find(f).unwrap())
        .collect();
    assert!(fields.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(Vocabulary::from_json(&json).unwrap(), v);
    assert_eq!(Vocabulary::from_json(&json).unwrap().compile_ddl().unwrap(), LIBRARY_DDL);
}

fn quoted_after<'a>(text: &'a str, marker: &str) -> Vec<&'a str> {
    text.match_indices(marker)
        .map(|(i, _)| {
            let rest = &text[i + marker.len()..];
            &rest[..rest.find('"').unwrap()]
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn every_reference_has_a_table(seed in any::<u64>()) {
        let v = common::random_vocabulary(&mut common::rng(seed), 6);
        let ddl = v.compile_ddl().unwrap();
        let tables: BTreeSet<&str> = quoted_after(&ddl, "CREATE TABLE \"").into_iter().collect();
        for target in quoted_after(&ddl, "REFERENCES \"") {
            prop_assert!(tables.contains(target), "{target} has no table");
        }
        prop_assert_eq!(ddl.clone(), v.compile_ddl().unwrap());
        let first_index = ddl.find("CREATE INDEX").unwrap_or(ddl.len());
        prop_assert!(ddl.rfind("CREATE TABLE").unwrap() < first_index);
    }

    #[test]
    fn intermediate_tables_carry_one_key_column_per_participant(seed in any::<u64>(), unique in any::<bool>()) {
        let mut v = common::random_vocabulary(&mut common::rng(seed), 6);
        if v.class("Rel").is_none() {
            return Ok(());
        }
        v = v.set_key_unique("Rel", unique).unwrap();
        let arity = v.class("Rel").unwrap().arity();
        let ddl = v.compile_ddl().unwrap();
        let start = ddl.find("CREATE TABLE \"Rel\"").unwrap();
        let table = &ddl[start..start + ddl[start..].find(");").unwrap()];
        let fk_columns: Vec<&str> = table
            .lines()
            .filter(|l| l.contains("REFERENCES"))
            .map(|l| l.trim().split('"').nth(1).unwrap())
            .collect();
        prop_assert_eq!(fk_columns.len(), arity);
        let unique_line = table.lines().find(|l| l.trim_start().starts_with("UNIQUE"));
        if unique {
            let cols: Vec<&str> = unique_line.unwrap().split('"').skip(1).step_by(2).collect();
            prop_assert_eq!(cols, fk_columns);
        } else {
            prop_assert!(unique_line.is_none());
        }
    }
}
