//! Structure recognition on a delimited file, then a controlled import.
//!
//! Run with `cargo run --example csv_import`.

use panoptica::demo;
use panoptica::ingest::{import, inspect_in, UnresolvedPolicy};

const ROLES: &str = "\
Name;Opera;Voice
Sharpless;Madame Butterfly;baritone
Suzuki;Madame Butterfly;mezzo-soprano
Mimì;La bohème;soprano
Rodolfo;La bohème;tenor
;Fidelio;bass
";

fn main() -> panoptica::Result<()> {
    let mut store = demo::opera_store();
    let inspection = inspect_in(&store, ROLES)?;
    println!("delimiter {:?}, {} data rows", inspection.delimiter as char, inspection.row_count);
    for m in inspection.ranking.iter().take(3) {
        println!("  {}", panoptica::recognition::match_report(m));
    }
    println!("proposed mapping: {:?}", inspection.mapping.column_map);

    let strict = import(&mut store.clone(), &inspection.mapping, ROLES)?;
    println!("\nreject_row: inserted {}, rejected {}", strict.inserted, strict.rejected.len());
    for r in &strict.rejected {
        println!("  row {} {}: {}", r.row, r.code, r.message);
    }

    let lenient = inspection.mapping.clone().policy(UnresolvedPolicy::CreateStub);
    let report = import(&mut store, &lenient, ROLES)?;
    println!(
        "create_stub: inserted {}, rejected {}, stubs {}",
        report.inserted,
        report.rejected.len(),
        report.stubs_created
    );
    let boheme = store.find_by_label("Opera Works", "La bohème")?[0];
    println!("La bohème stub #{boheme} has authority {}", store.authority(boheme)?);
    println!("integrity violations: {}", store.integrity_check().len());
    Ok(())
}
