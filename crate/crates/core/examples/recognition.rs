//! Object recognition: rank vocabulary classes by how well perceived
//! attribute names and sample values fit them.
//!
//! Run with `cargo run --example recognition`.

use panoptica::demo;
use panoptica::recognition::{classify, classify_in, match_report, Perception};

fn main() -> panoptica::Result<()> {
    let vocab = demo::catalogue_vocabulary();
    let p = Perception::new(["title", "author"]);
    println!("perceived {:?}", p.attribute_names);
    for m in classify(&vocab, &p)? {
        println!("  {}", match_report(&m));
    }

    let doubtful = Perception::new(["title", "author"]).with_samples("author", ["not-an-id"]);
    println!("\nsame names, author sample `not-an-id`:");
    for m in classify(&vocab, &doubtful)? {
        println!("  {}", match_report(&m));
    }

    let store = demo::opera_store();
    let known = Perception::new(["Name", "Opera", "Voice"]).with_samples("opera", ["Fidelio"]);
    println!("\nagainst the opera store, names {:?}:", known.attribute_names);
    for m in classify_in(&store, &known)? {
        println!("  {}", match_report(&m));
    }
    Ok(())
}
