//! Object and list reports in several formats, SQL and XML export, and the
//! XML round trip.
//!
//! Run with `cargo run --example reports_export`.

use panoptica::demo;
use panoptica::reports::{export_store, list_report, load_xml, object_report, Format};
use panoptica::traversal::Filter;

fn main() -> panoptica::Result<()> {
    let store = demo::opera_store();
    let butterfly = store.find_by_label("Opera Works", "Madame Butterfly")?[0];

    print!("{}", object_report(&store, butterfly, Format::Txt)?);
    println!();
    print!(
        "{}",
        list_report(&store, "Opera Works", None, &["title".into(), "composer".into(), "premiere".into()], Format::Csv)?
    );
    println!();
    let sopranos = Filter::contains("Roles", "voice", "soprano");
    print!("{}", list_report(&store, "Roles", Some(&sopranos), &["name".into(), "opera".into()], Format::Txt)?);

    let sql = export_store(&store, Format::Sql)?;
    println!("\nSQL export: {} lines, {} INSERTs", sql.lines().count(), sql.matches("INSERT INTO").count());
    for line in sql.lines().filter(|l| l.starts_with("INSERT INTO \"Casting\"")) {
        println!("  {line}");
    }

    let xml = export_store(&store, Format::Xml)?;
    let again = export_store(&load_xml(&xml)?, Format::Xml)?;
    println!("\nXML export: {} bytes; reload and re-export identical: {}", xml.len(), xml == again);
    Ok(())
}
