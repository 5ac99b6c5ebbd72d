//! Attribute kinds and the scalar values stored in object records.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::store::ObjectId;

/// The kind of an attribute. Exactly one per attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Text,
    Integer,
    Decimal,
    Date,
    Boolean,
    Link,
}

impl Kind {
    pub const ALL: [Kind; 6] = [
        Kind::Text,
        Kind::Integer,
        Kind::Decimal,
        Kind::Date,
        Kind::Boolean,
        Kind::Link,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Text => "text",
            Kind::Integer => "integer",
            Kind::Decimal => "decimal",
            Kind::Date => "date",
            Kind::Boolean => "boolean",
            Kind::Link => "link",
        }
    }

    pub fn is_ordered(self) -> bool {
        matches!(self, Kind::Integer | Kind::Decimal | Kind::Date)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Kind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown kind `{s}`"))
    }
}

/// Fixed-point decimal with six fractional digits, matching `DECIMAL(18,6)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Decimal(i64);

impl Decimal {
    pub const SCALE: u32 = 6;
    const UNIT: i64 = 1_000_000;
    /// Twelve integer digits remain after the six fractional ones.
    const MAX_ABS: i64 = 999_999_999_999_999_999;

    pub fn from_micros(micros: i64) -> Option<Self> {
        (micros.abs() <= Self::MAX_ABS).then_some(Decimal(micros))
    }

    pub fn micros(self) -> i64 {
        self.0
    }
}

impl FromStr for Decimal {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        let s = s.trim();
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(());
        }
        let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
        if !all_digits(int_part) || !all_digits(frac_part) || frac_part.len() > Self::SCALE as usize
        {
            return Err(());
        }
        let int: i64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| ())?
        };
        let mut frac: i64 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().map_err(|_| ())?
        };
        for _ in frac_part.len()..Self::SCALE as usize {
            frac *= 10;
        }
        let micros = int
            .checked_mul(Self::UNIT)
            .and_then(|m| m.checked_add(frac))
            .ok_or(())?;
        Decimal::from_micros(if negative { -micros } else { micros }).ok_or(())
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let int = abs / Self::UNIT as u64;
        let frac = abs % Self::UNIT as u64;
        if frac == 0 {
            write!(f, "{sign}{int}")
        } else {
            let digits = format!("{frac:06}");
            write!(f, "{sign}{int}.{}", digits.trim_end_matches('0'))
        }
    }
}

/// A populated attribute value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Text(String),
    Integer(i64),
    Decimal(Decimal),
    Date(NaiveDate),
    Boolean(bool),
    Link(ObjectId),
}

impl Value {
    pub fn text(s: impl Into<String>) -> Self {
        Value::Text(s.into())
    }

    pub fn kind(&self) -> Kind {
        match self {
            Value::Text(_) => Kind::Text,
            Value::Integer(_) => Kind::Integer,
            Value::Decimal(_) => Kind::Decimal,
            Value::Date(_) => Kind::Date,
            Value::Boolean(_) => Kind::Boolean,
            Value::Link(_) => Kind::Link,
        }
    }

    pub fn as_link(&self) -> Option<ObjectId> {
        match self {
            Value::Link(id) => Some(*id),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    /// Parses a textual cell as the given kind. Link cells must hold an
    /// object id; label resolution happens in the importer.
    pub fn parse(kind: Kind, raw: &str) -> Option<Value> {
        let t = raw.trim();
        match kind {
            Kind::Text => Some(Value::Text(raw.to_string())),
            Kind::Integer => t.parse().ok().map(Value::Integer),
            Kind::Decimal => t.parse().ok().map(Value::Decimal),
            Kind::Date => NaiveDate::parse_from_str(t, "%Y-%m-%d").ok().map(Value::Date),
            Kind::Boolean => match t.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" => Some(Value::Boolean(true)),
                "false" | "no" | "0" => Some(Value::Boolean(false)),
                _ => None,
            },
            Kind::Link => t.parse::<u64>().ok().and_then(ObjectId::new).map(Value::Link),
        }
    }

    /// Decodes the JSON encoding produced by [`Value::to_json`].
    pub fn from_json(kind: Kind, json: &serde_json::Value) -> Option<Value> {
        use serde_json::Value as J;
        match (kind, json) {
            (Kind::Text, J::String(s)) => Some(Value::Text(s.clone())),
            (Kind::Integer, J::Number(n)) => n.as_i64().map(Value::Integer),
            (Kind::Decimal, J::String(s)) => s.parse().ok().map(Value::Decimal),
            (Kind::Decimal, J::Number(n)) => n.to_string().parse().ok().map(Value::Decimal),
            (Kind::Date, J::String(s)) => Value::parse(Kind::Date, s),
            (Kind::Boolean, J::Bool(b)) => Some(Value::Boolean(*b)),
            (Kind::Link, J::Number(n)) => n.as_u64().and_then(ObjectId::new).map(Value::Link),
            _ => None,
        }
    }

    /// Decimals travel as strings so no precision is lost; links as integers.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::Value as J;
        match self {
            Value::Text(s) => J::String(s.clone()),
            Value::Integer(i) => J::from(*i),
            Value::Decimal(d) => J::String(d.to_string()),
            Value::Date(d) => J::String(d.format("%Y-%m-%d").to_string()),
            Value::Boolean(b) => J::Bool(*b),
            Value::Link(id) => J::from(id.get()),
        }
    }

    /// Compares two values of the same kind; `None` across kinds.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Text(a), Value::Text(b)) => Some(a.cmp(b)),
            (Value::Integer(a), Value::Integer(b)) => Some(a.cmp(b)),
            (Value::Decimal(a), Value::Decimal(b)) => Some(a.cmp(b)),
            (Value::Date(a), Value::Date(b)) => Some(a.cmp(b)),
            (Value::Boolean(a), Value::Boolean(b)) => Some(a.cmp(b)),
            (Value::Link(a), Value::Link(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Text(s) => f.write_str(s),
            Value::Integer(i) => write!(f, "{i}"),
            Value::Decimal(d) => write!(f, "{d}"),
            Value::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
            Value::Boolean(b) => write!(f, "{b}"),
            Value::Link(id) => write!(f, "#{id}"),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Integer(i)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Boolean(b)
    }
}

impl From<ObjectId> for Value {
    fn from(id: ObjectId) -> Self {
        Value::Link(id)
    }
}

impl From<Decimal> for Value {
    fn from(d: Decimal) -> Self {
        Value::Decimal(d)
    }
}

impl From<NaiveDate> for Value {
    fn from(d: NaiveDate) -> Self {
        Value::Date(d)
    }
}
