//! Navigate the opera catalogue: select a class, focus an object, follow a
//! link to a dependant and come back through the context.
//!
//! Run with `cargo run --example focus_context`.

use panoptica::demo;
use panoptica::reports::object_txt;
use panoptica::traversal::{Session, Step};

fn main() -> panoptica::Result<()> {
    let store = demo::opera_store();
    let mut session = Session::new();

    for c in session.list_classes(&store).iter().take(7) {
        println!("{:<15} {}", c.class, c.count);
    }
    println!();
    let operas = session.select_class(&store, "Opera Works")?;
    for o in &operas {
        println!("  #{} {}", o.id, o.label);
    }

    let butterfly = operas.iter().find(|o| o.label == "Madame Butterfly").unwrap().id;
    let view = session.focus(&store, butterfly)?;
    println!("\n{}", object_txt(&view));

    let cio = view.d4_context[0].members[0].id;
    let role = session.follow(&store, butterfly, &Step::Member(cio))?;
    println!("followed the context to {}", role.focus.as_ref().unwrap().label);

    let back = session.follow(&store, cio, &Step::Link("opera".into()))?;
    println!("followed `opera` back to {}", back.focus.as_ref().unwrap().label);
    println!("history: {:?}", session.history.iter().map(|id| store.label(*id)).collect::<Vec<_>>());
    Ok(())
}
