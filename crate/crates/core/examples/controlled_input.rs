//! Controlled input: every write is checked for kinds, required attributes,
//! referential integrity and concatenated-key uniqueness before it lands.
//!
//! Run with `cargo run --example controlled_input`.

use panoptica::demo;
use panoptica::{Store, Value};

fn main() -> panoptica::Result<()> {
    let mut store: Store = demo::opera_store();
    let butterfly = store.find_by_label("Opera Works", "Madame Butterfly")?[0];
    println!("Madame Butterfly is #{butterfly}, authority {}", store.authority(butterfly)?);

    let sharpless = store.insert(
        "Roles",
        [("name", Value::from("Sharpless")), ("opera", butterfly.into()), ("voice", "baritone".into())],
    )?;
    println!("inserted #{sharpless}; authority now {}", store.authority(butterfly)?);

    let attempts: Vec<(&str, panoptica::Result<_>)> = vec![
        ("missing required link", store.clone().insert("Roles", [("name", "Suzuki")])),
        (
            "link to a missing object",
            store
                .clone()
                .insert("Roles", [("name", Value::from("Goro")), ("opera", Value::Link(panoptica::ObjectId::new(999).unwrap()))]),
        ),
        ("wrong kind", store.clone().insert("Choir", [("name", Value::from("Men")), ("opera", butterfly.into()), ("singers", "many".into())])),
    ];
    for (what, result) in attempts {
        match result {
            Ok(id) => println!("{what}: unexpectedly accepted as #{id}"),
            Err(e) => println!("{what}: refused with {} ({e})", e.code()),
        }
    }

    let casting = store.objects_of("Casting")?[0];
    let record = store.require(casting)?.clone();
    match store.insert("Casting", record.values.clone()) {
        Ok(_) => println!("duplicate casting accepted"),
        Err(e) => println!("duplicate casting refused with {}", e.code()),
    }

    match store.delete(butterfly, false) {
        Ok(()) => println!("deleted Madame Butterfly"),
        Err(e) => println!("delete refused: {e}"),
    }
    store.delete(sharpless, false)?;
    println!("deleted Sharpless; integrity violations: {}", store.integrity_check().len());

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("store.json");
    store.save(&path)?;
    let reloaded = Store::load(store.vocabulary().clone(), &path)?;
    println!("snapshot round trip: {} objects, next id {}", reloaded.len(), reloaded.next_id());
    Ok(())
}
