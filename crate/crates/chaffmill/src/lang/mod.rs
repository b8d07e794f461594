//! The example language: runtime values, example suites, parsing and rendering.
//!
//! An example is a single line of the form `f(args) is value`, optionally
//! wrapped in `check:` ... `end` blocks with `#` line comments. Arguments and
//! expected results are literals only. Numbers are exact rationals, never
//! floats: `0.1` parses to `1/10` and compares equal to `1/10`.

mod parse;

pub use parse::{parse_suite, ParseError, ParseErrorKind};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::fmt;

/// A runtime value: exact rational, text, boolean, list, or record.
///
/// Rationals are always kept in lowest terms with a positive denominator
/// (guaranteed by constructing through [`num_rational::BigRational::new`]).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Number(BigRational),
    Text(String),
    Boolean(bool),
    List(Vec<Value>),
    Record { ctor: String, fields: Vec<Value> },
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Number(BigRational::from_integer(BigInt::from(n)))
    }

    /// Builds `p/q` in lowest terms. Panics on `q == 0`.
    pub fn ratio(p: i64, q: i64) -> Value {
        Value::Number(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn text(s: &str) -> Value {
        Value::Text(s.to_string())
    }

    pub fn list(items: Vec<Value>) -> Value {
        Value::List(items)
    }

    pub fn word_list(words: &[&str]) -> Value {
        Value::List(words.iter().map(|w| Value::text(w)).collect())
    }

    pub fn as_number(&self) -> Option<&BigRational> {
        match self {
            Value::Number(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Value]> {
        match self {
            Value::List(items) => Some(items),
            _ => None,
        }
    }

    /// Variant name used in diagnostics and for typo perturbation.
    pub fn variant(&self) -> &'static str {
        match self {
            Value::Number(_) => "number",
            Value::Text(_) => "text",
            Value::Boolean(_) => "boolean",
            Value::List(_) => "list",
            Value::Record { .. } => "record",
        }
    }
}

/// Structural equality over values.
///
/// Numbers compare as exact rationals, lists element-wise in order, records
/// by constructor then fields. Cross-variant comparisons are `false`.
pub fn value_eq(a: &Value, b: &Value) -> bool {
    a == b
}

/// The JSON encoding shared by files and the plug-in wire protocol:
/// numbers `{"num": "p/q"}`, strings, booleans, lists as arrays, records
/// `{"ctor": s, "fields": [v, ...]}`.
pub fn value_to_json(v: &Value) -> serde_json::Value {
    match v {
        Value::Number(r) => json!({ "num": rational_string(r) }),
        Value::Text(s) => json!(s),
        Value::Boolean(b) => json!(b),
        Value::List(items) => serde_json::Value::Array(items.iter().map(value_to_json).collect()),
        Value::Record { ctor, fields } => json!({
            "ctor": ctor,
            "fields": fields.iter().map(value_to_json).collect::<Vec<_>>(),
        }),
    }
}

/// Inverse of [`value_to_json`]; also tolerates bare JSON integers.
pub fn value_from_json(v: &serde_json::Value) -> Result<Value, String> {
    match v {
        serde_json::Value::String(s) => Ok(Value::Text(s.clone())),
        serde_json::Value::Bool(b) => Ok(Value::Boolean(*b)),
        serde_json::Value::Number(n) => {
            let i = n
                .as_i64()
                .ok_or_else(|| format!("non-integer bare number {}", n))?;
            Ok(Value::int(i))
        }
        serde_json::Value::Array(items) => items
            .iter()
            .map(value_from_json)
            .collect::<Result<Vec<_>, _>>()
            .map(Value::List),
        serde_json::Value::Object(map) => {
            if let Some(num) = map.get("num") {
                let s = num.as_str().ok_or("num must be a \"p/q\" string")?;
                let r = rational_from_string(s).ok_or_else(|| format!("bad rational {:?}", s))?;
                return Ok(Value::Number(r));
            }
            if let (Some(ctor), Some(fields)) = (map.get("ctor"), map.get("fields")) {
                let ctor = ctor.as_str().ok_or("ctor must be a string")?.to_string();
                let fields = fields
                    .as_array()
                    .ok_or("fields must be an array")?
                    .iter()
                    .map(value_from_json)
                    .collect::<Result<Vec<_>, _>>()?;
                return Ok(Value::Record { ctor, fields });
            }
            Err(format!("unrecognized value object {}", v))
        }
        serde_json::Value::Null => Err("null is not a value".to_string()),
    }
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        value_to_json(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = serde_json::Value::deserialize(deserializer)?;
        value_from_json(&raw).map_err(serde::de::Error::custom)
    }
}

fn fmt_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

fn escape_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(r) => fmt_rational(r, f),
            Value::Text(s) => write!(f, "\"{}\"", escape_text(s)),
            Value::Boolean(b) => write!(f, "{}", b),
            Value::List(items) => {
                write!(f, "[list: ")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", v)?;
                }
                write!(f, "]")
            }
            Value::Record { ctor, fields } => {
                write!(f, "{}(", ctor)?;
                for (i, v) in fields.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", v)?;
                }
                write!(f, ")")
            }
        }
    }
}

/// One parsed example: a call paired with the value the author expects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub function: String,
    pub args: Vec<Value>,
    pub expected: Value,
    /// 1-based line in the source text.
    pub source_line: u32,
    /// The comment-stripped, trimmed source text; re-parses to this example.
    pub raw_text: String,
}

impl Example {
    pub fn new(function: &str, args: Vec<Value>, expected: Value) -> Example {
        let mut e = Example {
            function: function.to_string(),
            args,
            expected,
            source_line: 1,
            raw_text: String::new(),
        };
        e.raw_text = render_example(&e);
        e
    }

    /// Equality of call and expectation, ignoring source position and text.
    pub fn same_example(&self, other: &Example) -> bool {
        self.function == other.function
            && self.args == other.args
            && self.expected == other.expected
    }
}

/// An ordered example suite; may be empty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExampleSuite {
    pub examples: Vec<Example>,
    /// Optional reference back to the submission this suite came from.
    pub origin: Option<String>,
}

impl ExampleSuite {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

/// Canonical text for an example; `parse_suite(render_example(e))` yields an
/// example structurally equal to `e`.
pub fn render_example(e: &Example) -> String {
    let args: Vec<String> = e.args.iter().map(|v| v.to_string()).collect();
    format!("{}({}) is {}", e.function, args.join(", "), e.expected)
}

/// Parses a single example line; handy for tests and file round-trips.
pub fn parse_example(text: &str) -> Option<Example> {
    let (suite, errors) = parse_suite(text);
    if errors.is_empty() && suite.examples.len() == 1 {
        suite.examples.into_iter().next()
    } else {
        None
    }
}

pub(crate) fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub(crate) fn rational_from_string(s: &str) -> Option<BigRational> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().ok()?;
    let d: BigInt = den.parse().ok()?;
    if d.is_positive() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}
