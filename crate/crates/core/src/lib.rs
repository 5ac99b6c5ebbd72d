mod error;
mod fsutil;
pub mod demo;
pub mod gateway;
pub mod ingest;
pub mod recognition;
pub mod reports;
pub mod store;
pub mod traversal;
pub mod value;
pub mod vocabulary;

pub use error::{Error, Result};
pub use store::{ObjectId, ObjectRecord, Store};
pub use value::{Kind, Value};
pub use vocabulary::{AttributeDef, ClassDef, Vocabulary};
