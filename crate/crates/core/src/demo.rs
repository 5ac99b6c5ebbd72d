//! A small opera catalogue used by the examples, the CLI `demo` command and
//! the test suites.
//!
//! Madame Butterfly carries the dependants shown in the viewing-window
//! walkthrough: two Roles, two Small Roles, one Silent Role and a Choir.
//! The catalogue also holds composers and their compositions (1:n through a
//! pointer attribute) and a three-way Casting relationship between roles,
//! singers and productions (m:n:q through an intermediate class).

use crate::error::Result;
use crate::store::{ObjectId, Store};
use crate::value::{Kind, Value};
use crate::vocabulary::{AttributeDef, Vocabulary};

/// Classes shown in the opera browser, in declaration order.
pub const OPERA_CLASSES: [&str; 7] = [
    "Opera Works",
    "Roles",
    "Small Roles",
    "Silent Roles",
    "Choir",
    "Orchestra Cast",
    "Scenic Music",
];

pub fn opera_vocabulary() -> Vocabulary {
    build_vocabulary().expect("demo vocabulary is well-formed")
}

fn build_vocabulary() -> Result<Vocabulary> {
    let mut v = Vocabulary::new("opera")
        .create_class("Opera Works", false)?
        .add_attribute("Opera Works", AttributeDef::text("title").required())?;
    for class in ["Roles", "Small Roles"] {
        v = v
            .create_class(class, false)?
            .add_attribute(class, AttributeDef::text("name").required())?
            .add_attribute(class, AttributeDef::link("opera", "Opera Works").required())?
            .add_attribute(class, AttributeDef::text("voice"))?;
    }
    v = v
        .create_class("Silent Roles", false)?
        .add_attribute("Silent Roles", AttributeDef::text("name").required())?
        .add_attribute("Silent Roles", AttributeDef::link("opera", "Opera Works").required())?
        .create_class("Choir", false)?
        .add_attribute("Choir", AttributeDef::text("name").required())?
        .add_attribute("Choir", AttributeDef::link("opera", "Opera Works").required())?
        .add_attribute("Choir", AttributeDef::scalar("singers", Kind::Integer))?
        .create_class("Orchestra Cast", false)?
        .add_attribute("Orchestra Cast", AttributeDef::text("instrument").required())?
        .add_attribute("Orchestra Cast", AttributeDef::link("opera", "Opera Works").required())?
        .add_attribute("Orchestra Cast", AttributeDef::scalar("players", Kind::Integer))?
        .create_class("Scenic Music", false)?
        .add_attribute("Scenic Music", AttributeDef::text("piece").required())?
        .add_attribute("Scenic Music", AttributeDef::link("opera", "Opera Works").required())?
        .create_class("Author", false)?
        .add_attribute("Author", AttributeDef::text("name").required())?
        .add_attribute("Author", AttributeDef::scalar("born", Kind::Date))?
        .add_attribute("Opera Works", AttributeDef::link("composer", "Author"))?
        .add_attribute("Opera Works", AttributeDef::scalar("premiere", Kind::Date))?
        .create_class("Composition", false)?
        .add_attribute("Composition", AttributeDef::text("title").required())?
        .add_attribute("Composition", AttributeDef::link("author", "Author").required())?
        .create_class("Singers", false)?
        .add_attribute("Singers", AttributeDef::text("name").required())?
        .create_class("Productions", false)?
        .add_attribute("Productions", AttributeDef::text("name").required())?
        .add_attribute("Productions", AttributeDef::scalar("year", Kind::Integer))?
        .add_attribute("Productions", AttributeDef::scalar("budget", Kind::Decimal))?
        .create_relationship(
            "Casting",
            &["Roles", "Singers", "Productions"],
            vec![AttributeDef::scalar("premiere_cast", Kind::Boolean)],
        )?;
    Ok(v)
}

/// The opera vocabulary populated with the catalogue.
pub fn opera_store() -> Store {
    build_store().expect("demo data satisfies the vocabulary")
}

fn build_store() -> Result<Store> {
    let mut s = Store::new(opera_vocabulary())?;
    let date = |d: &str| Value::parse(Kind::Date, d).expect("valid date");

    let author = |s: &mut Store, name: &str, born: &str| {
        s.insert("Author", [("name", Value::from(name)), ("born", date(born))])
    };
    let mozart = author(&mut s, "Wolfgang Amadeus Mozart", "1756-01-27")?;
    let beethoven = author(&mut s, "Ludwig van Beethoven", "1770-12-17")?;
    let puccini = author(&mut s, "Giacomo Puccini", "1858-12-22")?;
    let brahms = author(&mut s, "Johannes Brahms", "1833-05-07")?;

    let opera = |s: &mut Store, title: &str, composer: ObjectId, premiere: &str| {
        s.insert(
            "Opera Works",
            [
                ("title", Value::from(title)),
                ("composer", composer.into()),
                ("premiere", date(premiere)),
            ],
        )
    };
    let giovanni = opera(&mut s, "Don Giovanni", mozart, "1787-10-29")?;
    let fidelio = opera(&mut s, "Fidelio", beethoven, "1805-11-20")?;
    let figaro = opera(&mut s, "Figaro's wedding", mozart, "1786-05-01")?;
    let butterfly = opera(&mut s, "Madame Butterfly", puccini, "1904-02-17")?;

    for (title, author) in [
        ("Symphony No. 1", beethoven),
        ("Symphony No. 1", brahms),
        ("Symphony No. 9", beethoven),
        ("Requiem", mozart),
    ] {
        s.insert("Composition", [("title", Value::from(title)), ("author", author.into())])?;
    }

    let role = |s: &mut Store, class: &str, name: &str, opera: ObjectId, voice: Option<&str>| {
        let mut values = vec![("name", Value::from(name)), ("opera", opera.into())];
        if let Some(v) = voice {
            values.push(("voice", Value::from(v)));
        }
        s.insert(class, values)
    };
    let cio = role(&mut s, "Roles", "Cio-Cio-San", butterfly, Some("soprano"))?;
    let pinkerton = role(&mut s, "Roles", "F. B. Pinkerton", butterfly, Some("tenor"))?;
    role(&mut s, "Small Roles", "Bonze", butterfly, Some("bass"))?;
    role(&mut s, "Small Roles", "Cio-Cio-San's mother", butterfly, Some("mezzo-soprano"))?;
    role(&mut s, "Roles", "Don Giovanni", giovanni, Some("baritone"))?;
    role(&mut s, "Roles", "Leporello", giovanni, Some("bass"))?;
    role(&mut s, "Small Roles", "Masetto", giovanni, Some("bass"))?;
    role(&mut s, "Roles", "Leonore", fidelio, Some("soprano"))?;
    role(&mut s, "Roles", "Florestan", fidelio, Some("tenor"))?;
    role(&mut s, "Roles", "Figaro", figaro, Some("bass-baritone"))?;
    role(&mut s, "Roles", "Susanna", figaro, Some("soprano"))?;
    s.insert("Silent Roles", [("name", Value::from("Dolore")), ("opera", butterfly.into())])?;

    s.insert(
        "Choir",
        [
            ("name", Value::from("Female Choir")),
            ("opera", butterfly.into()),
            ("singers", Value::Integer(24)),
        ],
    )?;
    s.insert(
        "Choir",
        [
            ("name", Value::from("Prisoners' Choir")),
            ("opera", fidelio.into()),
            ("singers", Value::Integer(40)),
        ],
    )?;
    s.insert(
        "Orchestra Cast",
        [
            ("instrument", Value::from("Mandolin")),
            ("opera", giovanni.into()),
            ("players", Value::Integer(1)),
        ],
    )?;
    s.insert("Scenic Music", [("piece", Value::from("Stage band minuet")), ("opera", giovanni.into())])?;

    let ana = s.insert("Singers", [("name", "Ana Kovač")])?;
    let marko = s.insert("Singers", [("name", "Marko Horvat")])?;
    let ivana = s.insert("Singers", [("name", "Ivana Babić")])?;
    let production = |s: &mut Store, name: &str, year: i64, budget: &str| {
        s.insert(
            "Productions",
            [
                ("name", Value::from(name)),
                ("year", Value::Integer(year)),
                ("budget", Value::parse(Kind::Decimal, budget).expect("valid decimal")),
            ],
        )
    };
    let ljubljana = production(&mut s, "Ljubljana 2019", 2019, "125000.50")?;
    let zagreb = production(&mut s, "Zagreb 2021", 2021, "98000")?;
    for (role, singer, production, premiere) in [
        (cio, ana, ljubljana, true),
        (pinkerton, marko, ljubljana, true),
        (cio, ivana, zagreb, false),
    ] {
        s.insert(
            "Casting",
            [
                ("roles", Value::from(role)),
                ("singers", singer.into()),
                ("productions", production.into()),
                ("premiere_cast", premiere.into()),
            ],
        )?;
    }
    Ok(s)
}

/// A catalogue with only composers and compositions.
pub fn catalogue_vocabulary() -> Vocabulary {
    Vocabulary::new("catalogue")
        .create_class("Author", false)
        .and_then(|v| v.add_attribute("Author", AttributeDef::text("name").required()))
        .and_then(|v| v.add_attribute("Author", AttributeDef::scalar("born", Kind::Date)))
        .and_then(|v| v.create_class("Composition", false))
        .and_then(|v| v.add_attribute("Composition", AttributeDef::text("title").required()))
        .and_then(|v| v.add_attribute("Composition", AttributeDef::link("author", "Author").required()))
        .expect("catalogue vocabulary is well-formed")
}
