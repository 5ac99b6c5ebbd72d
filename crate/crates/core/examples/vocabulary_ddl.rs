//! Build a data vocabulary step by step and compile it to SQL DDL.
//!
//! Run with `cargo run --example vocabulary_ddl`.

use panoptica::{AttributeDef, Kind, Vocabulary};

fn main() -> panoptica::Result<()> {
    let vocab = Vocabulary::new("festival")
        .create_class("Composer", false)?
        .add_attribute("Composer", AttributeDef::text("name").required())?
        .add_attribute("Composer", AttributeDef::scalar("born", Kind::Date))?
        .create_class("Work", false)?
        .add_attribute("Work", AttributeDef::text("title").required())?
        // 1:n through a pointer attribute
        .add_attribute("Work", AttributeDef::link("composer", "Composer").required())?
        .create_class("Venue", false)?
        .add_attribute("Venue", AttributeDef::text("name").required())?
        .create_class("Evening", false)?
        .add_attribute("Evening", AttributeDef::text("title").required())?
        .add_attribute("Evening", AttributeDef::scalar("date", Kind::Date).required())?
        // m:n:q through an intermediate class keyed by its three pointers
        .create_relationship(
            "Programme",
            &["Work", "Venue", "Evening"],
            vec![AttributeDef::scalar("fee", Kind::Decimal)],
        )?;

    let programme = vocab.require_class("Programme")?;
    println!(
        "Programme: intermediate={}, arity={}, unique key={}",
        programme.is_intermediate,
        programme.arity(),
        programme.enforces_unique_key()
    );
    println!("diagnostics: {:?}", vocab.validate());
    println!();
    print!("{}", vocab.compile_ddl()?);
    Ok(())
}
