//! Object-context reports, filtered list reports and whole-store exports.
//!
//! Every output is a pure function of its inputs; two calls on an unchanged
//! store produce the same bytes.

mod export;
mod markup;

use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::{ObjectId, Store};
use crate::traversal::{Filter, Session, ViewModel};
use crate::value::Value;

pub use export::{export_store, load_xml};
use markup::escape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Txt,
    Csv,
    Html,
    Xml,
    Sql,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Txt => "txt",
            Format::Csv => "csv",
            Format::Html => "html",
            Format::Xml => "xml",
            Format::Sql => "sql",
        }
    }

    pub fn content_type(self) -> &'static str {
        match self {
            Format::Txt | Format::Sql => "text/plain; charset=utf-8",
            Format::Csv => "text/csv; charset=utf-8",
            Format::Html => "text/html; charset=utf-8",
            Format::Xml => "application/xml; charset=utf-8",
        }
    }

    fn unsupported(self, operation: &'static str) -> Error {
        Error::UnsupportedFormat {
            format: self.as_str().to_string(),
            operation,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Format> {
        match s.to_ascii_lowercase().as_str() {
            "txt" | "text" => Ok(Format::Txt),
            "csv" => Ok(Format::Csv),
            "html" => Ok(Format::Html),
            "xml" => Ok(Format::Xml),
            "sql" => Ok(Format::Sql),
            _ => Err(Error::UnsupportedFormat {
                format: s.to_string(),
                operation: "reports",
            }),
        }
    }
}

/// A report request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReportSpec {
    Object {
        id: ObjectId,
        format: Format,
    },
    List {
        class: String,
        filter: Option<Filter>,
        /// Empty means every attribute in declaration order.
        columns: Vec<String>,
        format: Format,
    },
}

impl ReportSpec {
    pub fn render(&self, store: &Store) -> Result<String> {
        match self {
            ReportSpec::Object { id, format } => object_report(store, *id, *format),
            ReportSpec::List {
                class,
                filter,
                columns,
                format,
            } => list_report(store, class, filter.as_ref(), columns, *format),
        }
    }
}

/// The focus and its one-hop context, as an unfiltered view shows them.
pub fn object_report(store: &Store, id: ObjectId, format: Format) -> Result<String> {
    let mut session = Session::new();
    let view = session.focus(store, id)?;
    match format {
        Format::Txt => Ok(object_txt(&view)),
        Format::Html => Ok(object_html(&view)),
        Format::Xml => Ok(object_xml(store, &view)),
        other => Err(other.unsupported("object reports")),
    }
}

/// Renders a view as plain text. The CLI's `view focus` prints exactly this.
pub fn object_txt(view: &ViewModel) -> String {
    let mut out = String::new();
    let Some(focus) = &view.focus else {
        return out;
    };
    writeln!(out, "{}", focus.label).unwrap();
    writeln!(out, "{} #{}", focus.class, focus.id).unwrap();
    out.push('\n');
    for a in &view.d3_attributes {
        let value = a.value.as_deref().unwrap_or("-");
        match &a.target {
            Some(t) => writeln!(out, "{}: {} -> #{}", a.attribute, value, t.target_id),
            None => writeln!(out, "{}: {}", a.attribute, value),
        }
        .unwrap();
    }
    for (group, table) in view.d4_context.iter().zip(&view.d5_group_attributes) {
        writeln!(out, "\n{} via {} ({})", group.class, group.via_attribute, group.members.len()).unwrap();
        for (member, row) in group.members.iter().zip(&table.rows) {
            writeln!(out, "  #{} {}", member.id, member.label).unwrap();
            for (column, value) in table.columns.iter().zip(&row.values) {
                if let Some(v) = value {
                    writeln!(out, "      {column}: {v}").unwrap();
                }
            }
        }
    }
    out
}

fn object_html(view: &ViewModel) -> String {
    let focus = view.focus.as_ref().expect("object report has a focus");
    let mut out = String::new();
    writeln!(out, "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">").unwrap();
    writeln!(out, "<title>{}</title>\n</head>\n<body>", escape(&focus.label)).unwrap();
    writeln!(
        out,
        "<h1 data-id=\"{}\" data-class=\"{}\">{}</h1>",
        focus.id,
        escape(&focus.class),
        escape(&focus.label)
    )
    .unwrap();
    writeln!(out, "<table class=\"attributes\">").unwrap();
    for a in &view.d3_attributes {
        let value = match (&a.target, &a.value) {
            (Some(t), Some(v)) => format!("<a href=\"#object-{}\"><u>{}</u></a>", t.target_id, escape(v)),
            (_, Some(v)) => escape(v),
            _ => String::new(),
        };
        writeln!(out, "<tr><th>{}</th><td>{}</td></tr>", escape(&a.attribute), value).unwrap();
    }
    writeln!(out, "</table>").unwrap();
    for (group, table) in view.d4_context.iter().zip(&view.d5_group_attributes) {
        writeln!(
            out,
            "<section class=\"context\" data-class=\"{}\" data-via=\"{}\">\n<h2>{}</h2>\n<table>",
            escape(&group.class),
            escape(&group.via_attribute),
            escape(&group.class)
        )
        .unwrap();
        let header: String = table.columns.iter().map(|c| format!("<th>{}</th>", escape(c))).collect();
        writeln!(out, "<tr><th></th>{header}</tr>").unwrap();
        for (member, row) in group.members.iter().zip(&table.rows) {
            let cells: String = row
                .values
                .iter()
                .map(|v| format!("<td>{}</td>", v.as_deref().map(escape).unwrap_or_default()))
                .collect();
            writeln!(
                out,
                "<tr id=\"object-{}\"><td><a href=\"#object-{}\"><u>{}</u></a></td>{cells}</tr>",
                member.id,
                member.id,
                escape(&member.label)
            )
            .unwrap();
        }
        writeln!(out, "</table>\n</section>").unwrap();
    }
    writeln!(out, "</body>\n</html>").unwrap();
    out
}

fn object_xml(store: &Store, view: &ViewModel) -> String {
    let focus = view.focus.as_ref().expect("object report has a focus");
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    writeln!(
        out,
        "<object id=\"{}\" class=\"{}\" label=\"{}\">",
        focus.id,
        escape(&focus.class),
        escape(&focus.label)
    )
    .unwrap();
    let record = store.get(focus.id).expect("focus exists");
    for a in &view.d3_attributes {
        let Some(value) = record.get(&a.attribute) else {
            continue;
        };
        let kind = value.kind();
        match &a.target {
            Some(t) => writeln!(
                out,
                "  <value attribute=\"{}\" kind=\"{kind}\" target=\"{}\">{}</value>",
                escape(&a.attribute),
                t.target_id,
                escape(&t.target_label)
            ),
            None => writeln!(
                out,
                "  <value attribute=\"{}\" kind=\"{kind}\">{}</value>",
                escape(&a.attribute),
                escape(&value.to_string())
            ),
        }
        .unwrap();
    }
    if view.d4_context.is_empty() {
        writeln!(out, "  <context/>").unwrap();
    } else {
        writeln!(out, "  <context>").unwrap();
        for (group, table) in view.d4_context.iter().zip(&view.d5_group_attributes) {
            writeln!(
                out,
                "    <group class=\"{}\" via=\"{}\">",
                escape(&group.class),
                escape(&group.via_attribute)
            )
            .unwrap();
            for (member, row) in group.members.iter().zip(&table.rows) {
                writeln!(out, "      <object id=\"{}\" label=\"{}\">", member.id, escape(&member.label)).unwrap();
                for (column, value) in table.columns.iter().zip(&row.values) {
                    if let Some(v) = value {
                        writeln!(out, "        <value attribute=\"{}\">{}</value>", escape(column), escape(v))
                            .unwrap();
                    }
                }
                writeln!(out, "      </object>").unwrap();
            }
            writeln!(out, "    </group>").unwrap();
        }
        writeln!(out, "  </context>").unwrap();
    }
    out.push_str("</object>\n");
    out
}

/// One row per `class` object passing `filter`, ordered by (label, id).
/// Link columns show the target's label.
pub fn list_report(
    store: &Store,
    class: &str,
    filter: Option<&Filter>,
    columns: &[String],
    format: Format,
) -> Result<String> {
    let vocab = store.vocabulary();
    let def = vocab.require_class(class)?;
    let columns: Vec<String> = if columns.is_empty() {
        def.attributes.iter().map(|a| a.name.clone()).collect()
    } else {
        for c in columns {
            vocab.require_attribute(class, c)?;
        }
        columns.to_vec()
    };
    if let Some(f) = filter {
        f.validate(vocab)?;
        if f.class != class {
            return Err(Error::Malformed(format!("filter is for `{}`, not `{class}`", f.class)));
        }
    }
    if !matches!(format, Format::Txt | Format::Csv | Format::Html | Format::Xml) {
        return Err(format.unsupported("list reports"));
    }

    let mut rows: Vec<(ObjectId, String, Vec<String>)> = Vec::new();
    for id in store.objects_of(class)? {
        let record = store.require(id)?;
        if filter.is_some_and(|f| !f.matches(record)) {
            continue;
        }
        let cells = columns
            .iter()
            .map(|c| match record.get(c) {
                Some(Value::Link(t)) => store.label(*t),
                Some(v) => v.to_string(),
                None => String::new(),
            })
            .collect();
        rows.push((id, store.label(id), cells));
    }

    Ok(match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            w.write_record(&columns).expect("in-memory write");
            for (_, _, cells) in &rows {
                w.write_record(cells).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 in, utf-8 out")
        }
        Format::Txt => {
            let mut widths: Vec<usize> = columns.iter().map(|c| c.chars().count()).collect();
            for (_, _, cells) in &rows {
                for (w, c) in widths.iter_mut().zip(cells) {
                    *w = (*w).max(c.chars().count());
                }
            }
            let line = |cells: &[String]| {
                let padded: Vec<String> = cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect();
                format!("{}\n", padded.join("  ").trim_end())
            };
            let mut out = format!("{class} ({})\n", rows.len());
            out.push_str(&line(&columns));
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            out.push_str(&line(&rule));
            for (_, _, cells) in &rows {
                out.push_str(&line(cells));
            }
            out
        }
        Format::Html => {
            let mut out = format!(
                "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>{0}</title>\n</head>\n<body>\n<h1>{0}</h1>\n<table class=\"list\">\n",
                escape(class)
            );
            let header: String = columns.iter().map(|c| format!("<th>{}</th>", escape(c))).collect();
            writeln!(out, "<tr>{header}</tr>").unwrap();
            for (id, _, cells) in &rows {
                let cells: String = cells.iter().map(|c| format!("<td>{}</td>", escape(c))).collect();
                writeln!(out, "<tr data-id=\"{id}\">{cells}</tr>").unwrap();
            }
            out.push_str("</table>\n</body>\n</html>\n");
            out
        }
        Format::Xml => {
            let mut out = format!(
                "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<list class=\"{}\" count=\"{}\">\n",
                escape(class),
                rows.len()
            );
            for (id, label, cells) in &rows {
                writeln!(out, "  <object id=\"{id}\" label=\"{}\">", escape(label)).unwrap();
                for (c, v) in columns.iter().zip(cells) {
                    writeln!(out, "    <value attribute=\"{}\">{}</value>", escape(c), escape(v)).unwrap();
                }
                out.push_str("  </object>\n");
            }
            out.push_str("</list>\n");
            out
        }
        Format::Sql => unreachable!("rejected above"),
    })
}
