//! Filters narrow a class to objects matching attribute predicates; an
//! anchor pins a class to one object and its direct neighbours.
//!
//! Run with `cargo run --example filters_anchors`.

use panoptica::demo;
use panoptica::traversal::{Filter, Predicate, Session};
use panoptica::Value;

fn labels(session: &mut Session, store: &panoptica::Store, class: &str) -> panoptica::Result<Vec<String>> {
    Ok(session.select_class(store, class)?.into_iter().map(|o| o.label).collect())
}

fn main() -> panoptica::Result<()> {
    let store = demo::opera_store();
    let vocab = store.vocabulary().clone();
    let mut session = Session::new();

    println!("Roles: {:?}", labels(&mut session, &store, "Roles")?);
    session.set_filter(&vocab, Filter::contains("Roles", "name", "cio"))?;
    println!("Roles containing \"cio\": {:?}", labels(&mut session, &store, "Roles")?);
    session.clear_filter(&vocab, "Roles")?;

    let sopranos = Filter::new("Roles").with("voice", Predicate::Equals(Value::from("soprano")));
    session.set_filter(&vocab, sopranos)?;
    println!("sopranos: {:?}", labels(&mut session, &store, "Roles")?);
    session.clear_filter(&vocab, "Roles")?;

    let old = Filter::new("Opera Works").with(
        "premiere",
        Predicate::Range {
            lo: Value::parse(panoptica::Kind::Date, "1780-01-01").unwrap(),
            hi: Value::parse(panoptica::Kind::Date, "1799-12-31").unwrap(),
        },
    );
    session.set_filter(&vocab, old)?;
    println!("operas premiered 1780-1799: {:?}", labels(&mut session, &store, "Opera Works")?);
    session.clear_filter(&vocab, "Opera Works")?;

    let mozart = store.find_by_label("Author", "Wolfgang Amadeus Mozart")?[0];
    session.set_anchor(&store, "Author", mozart)?;
    let giovanni = store.find_by_label("Opera Works", "Don Giovanni")?[0];
    session.set_anchor(&store, "Opera Works", giovanni)?;
    println!("anchored on Don Giovanni, Opera Works: {:?}", labels(&mut session, &store, "Opera Works")?);

    let view = session.focus(&store, mozart)?;
    for group in &view.d4_context {
        let names: Vec<_> = group.members.iter().map(|m| m.label.as_str()).collect();
        println!("  {} via {}: {:?}", group.class, group.via_attribute, names);
    }
    Ok(())
}
