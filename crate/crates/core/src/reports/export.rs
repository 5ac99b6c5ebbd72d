use std::collections::BTreeMap;
use std::fmt::Write;

use roxmltree::{Document, Node};

use super::markup::escape;
use super::Format;
use crate::error::{Error, Result};
use crate::store::{ObjectId, Snapshot, SnapshotObject, Store};
use crate::value::{Kind, Value};
use crate::vocabulary::ddl::quote_ident;
use crate::vocabulary::{AttributeDef, ClassDef, Vocabulary, ID_COLUMN};

const ROOT: &str = "panoptica";

/// Whole-store export. `sql` is the schema followed by one INSERT per object
/// in id order inside a single transaction; `xml` embeds the vocabulary and
/// every object and can be read back with [`load_xml`].
pub fn export_store(store: &Store, format: Format) -> Result<String> {
    let violations = store.integrity_check();
    if !violations.is_empty() {
        return Err(Error::CorruptStore(violations));
    }
    match format {
        Format::Sql => Ok(export_sql(store)),
        Format::Xml => Ok(export_xml(store)),
        other => Err(other.unsupported("store export")),
    }
}

fn sql_literal(value: &Value) -> String {
    match value {
        Value::Text(s) => format!("'{}'", s.replace('\'', "''")),
        Value::Date(_) => format!("'{value}'"),
        Value::Boolean(b) => if *b { "TRUE" } else { "FALSE" }.to_string(),
        Value::Link(id) => id.to_string(),
        Value::Integer(_) | Value::Decimal(_) => value.to_string(),
    }
}

fn export_sql(store: &Store) -> String {
    let vocab = store.vocabulary();
    let mut out = vocab.compile_ddl().expect("store vocabulary is valid");
    if store.is_empty() {
        return out;
    }
    out.push_str("\nBEGIN;\n");
    for record in store.objects() {
        let class = vocab.class(&record.class).expect("integrity checked");
        let mut columns = vec![quote_ident(ID_COLUMN)];
        let mut values = vec![record.id.to_string()];
        for def in &class.attributes {
            columns.push(quote_ident(&def.column_name()));
            values.push(record.get(&def.name).map_or_else(|| "NULL".to_string(), sql_literal));
        }
        writeln!(
            out,
            "INSERT INTO {} ({}) VALUES ({});",
            quote_ident(&class.name),
            columns.join(", "),
            values.join(", ")
        )
        .unwrap();
    }
    out.push_str("COMMIT;\n");
    out
}

/// Link values are written as bare ids, everything else as its display form.
fn plain(value: &Value) -> String {
    match value {
        Value::Link(id) => id.to_string(),
        v => v.to_string(),
    }
}

fn export_xml(store: &Store) -> String {
    let vocab = store.vocabulary();
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    writeln!(out, "<{ROOT}>").unwrap();
    writeln!(
        out,
        "  <vocabulary name=\"{}\" version=\"{}\">",
        escape(&vocab.name),
        vocab.version
    )
    .unwrap();
    for class in &vocab.classes {
        let label = class
            .label_attribute
            .as_ref()
            .map(|l| format!(" label=\"{}\"", escape(l)))
            .unwrap_or_default();
        write!(
            out,
            "    <class name=\"{}\" intermediate=\"{}\" key_unique=\"{}\"{label}",
            escape(&class.name),
            class.is_intermediate,
            class.key_unique
        )
        .unwrap();
        if class.attributes.is_empty() {
            out.push_str("/>\n");
            continue;
        }
        out.push_str(">\n");
        for a in &class.attributes {
            let target = a
                .target_class
                .as_ref()
                .map(|t| format!(" target=\"{}\"", escape(t)))
                .unwrap_or_default();
            writeln!(
                out,
                "      <attribute name=\"{}\" kind=\"{}\"{target} required=\"{}\"/>",
                escape(&a.name),
                a.kind,
                a.required
            )
            .unwrap();
        }
        out.push_str("    </class>\n");
    }
    out.push_str("  </vocabulary>\n");
    if store.is_empty() {
        writeln!(out, "  <objects next_id=\"{}\"/>", store.next_id()).unwrap();
    } else {
        writeln!(out, "  <objects next_id=\"{}\">", store.next_id()).unwrap();
        for record in store.objects() {
            writeln!(out, "    <object id=\"{}\" class=\"{}\">", record.id, escape(&record.class)).unwrap();
            for (name, value) in &record.values {
                writeln!(
                    out,
                    "      <value attribute=\"{}\">{}</value>",
                    escape(name),
                    escape(&plain(value))
                )
                .unwrap();
            }
            out.push_str("    </object>\n");
        }
        out.push_str("  </objects>\n");
    }
    writeln!(out, "</{ROOT}>").unwrap();
    out
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::Malformed(msg.into())
}

fn attr<'a>(node: Node<'a, '_>, name: &str) -> Result<&'a str> {
    node.attribute(name)
        .ok_or_else(|| malformed(format!("<{}> lacks `{name}`", node.tag_name().name())))
}

fn parse_attr<T: std::str::FromStr>(node: Node<'_, '_>, name: &str) -> Result<T> {
    let raw = attr(node, name)?;
    raw.parse()
        .map_err(|_| malformed(format!("<{}> has bad `{name}`: {raw}", node.tag_name().name())))
}

fn elements<'a, 'i>(node: Node<'a, 'i>, tag: &'static str) -> impl Iterator<Item = Node<'a, 'i>> {
    node.children().filter(move |n| n.is_element() && n.has_tag_name(tag))
}

fn child<'a, 'i>(node: Node<'a, 'i>, tag: &'static str) -> Result<Node<'a, 'i>> {
    elements(node, tag)
        .next()
        .ok_or_else(|| malformed(format!("<{}> has no <{tag}>", node.tag_name().name())))
}

/// Reads a document produced by XML [`export_store`] back into a store. The
/// result passes the same integrity gate as a snapshot load.
pub fn load_xml(text: &str) -> Result<Store> {
    let doc = Document::parse(text).map_err(|e| malformed(e.to_string()))?;
    let root = doc.root_element();
    if !root.has_tag_name(ROOT) {
        return Err(malformed(format!("root element is <{}>", root.tag_name().name())));
    }

    let v = child(root, "vocabulary")?;
    let mut vocab = Vocabulary {
        name: attr(v, "name")?.to_string(),
        version: parse_attr(v, "version")?,
        classes: Vec::new(),
    };
    for c in elements(v, "class") {
        let mut class = ClassDef {
            name: attr(c, "name")?.to_string(),
            is_intermediate: parse_attr(c, "intermediate")?,
            label_attribute: c.attribute("label").map(str::to_string),
            key_unique: parse_attr(c, "key_unique")?,
            attributes: Vec::new(),
        };
        for a in elements(c, "attribute") {
            let kind: Kind = parse_attr(a, "kind")?;
            class.attributes.push(AttributeDef {
                name: attr(a, "name")?.to_string(),
                kind,
                target_class: a.attribute("target").map(str::to_string),
                required: parse_attr(a, "required")?,
            });
        }
        vocab.classes.push(class);
    }
    vocab.ensure_valid()?;

    let o = child(root, "objects")?;
    let mut snapshot = Snapshot {
        vocabulary_version: vocab.version,
        next_id: parse_attr(o, "next_id")?,
        objects: Vec::new(),
    };
    for node in elements(o, "object") {
        let id: u64 = parse_attr(node, "id")?;
        let id = ObjectId::new(id).ok_or_else(|| malformed("object id 0"))?;
        let class_name = attr(node, "class")?;
        let class = vocab.require_class(class_name)?;
        let mut values = BTreeMap::new();
        for val in elements(node, "value") {
            let name = attr(val, "attribute")?;
            let def = vocab.require_attribute(class_name, name)?;
            let raw = val.text().unwrap_or("");
            let value = Value::parse(def.kind, raw)
                .ok_or_else(|| malformed(format!("#{id}.{name}: `{raw}` is not a {} value", def.kind)))?;
            values.insert(name.to_string(), value.to_json());
        }
        snapshot.objects.push(SnapshotObject {
            id,
            class: class.name.clone(),
            values,
        });
    }
    Store::from_snapshot(vocab, snapshot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::tests::opera_vocab;

    fn sample() -> Store {
        let mut s = Store::new(opera_vocab()).unwrap();
        let mb = s.insert("Opera Works", [("title", "Madame \"Butterfly\"\n& <co>")]).unwrap();
        s.insert("Roles", [("name", Value::from("O'Brien\t")), ("opera", mb.into())])
            .unwrap();
        s.insert("Notes", [("text", "forward")]).unwrap();
        s
    }

    #[test]
    fn sql_layout() {
        let s = sample();
        let sql = export_store(&s, Format::Sql).unwrap();
        assert!(sql.starts_with(&s.vocabulary().compile_ddl().unwrap()));
        assert!(sql.contains("\nBEGIN;\nINSERT INTO \"Opera Works\" (\"id\", \"title\") VALUES (1, "));
        assert!(sql.contains("VALUES (2, 'O''Brien\t', 1);"));
        assert!(sql.contains("VALUES (3, 'forward', NULL);"));
        assert!(sql.ends_with("COMMIT;\n"));
        let empty = Store::new(opera_vocab()).unwrap();
        assert_eq!(export_store(&empty, Format::Sql).unwrap(), empty.vocabulary().compile_ddl().unwrap());
    }

    #[test]
    fn xml_fixpoint() {
        let s = sample();
        let xml = export_store(&s, Format::Xml).unwrap();
        let back = load_xml(&xml).unwrap();
        assert_eq!(back.to_snapshot(), s.to_snapshot());
        assert_eq!(**back.vocabulary(), **s.vocabulary());
        assert_eq!(export_store(&back, Format::Xml).unwrap(), xml);

        let empty = Store::new(opera_vocab()).unwrap();
        let xml = export_store(&empty, Format::Xml).unwrap();
        assert!(xml.contains("<objects next_id=\"1\"/>"));
        assert_eq!(export_store(&load_xml(&xml).unwrap(), Format::Xml).unwrap(), xml);
    }

    #[test]
    fn loader_rejects_damage() {
        let xml = export_store(&sample(), Format::Xml).unwrap();
        let dangling = xml.replace("<value attribute=\"opera\">1</value>", "<value attribute=\"opera\">9</value>");
        assert!(matches!(load_xml(&dangling), Err(Error::CorruptStore(_))));
        assert!(matches!(load_xml("<other/>"), Err(Error::Malformed(_))));
        assert!(matches!(load_xml("<panoptica>"), Err(Error::Malformed(_))));
        assert!(matches!(export_store(&sample(), Format::Csv), Err(Error::UnsupportedFormat { .. })));
    }
}
