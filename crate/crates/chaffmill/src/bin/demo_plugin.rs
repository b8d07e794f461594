//! Reference plug-in speaking the newline-delimited JSON protocol.
//!
//! Serves a median implementation over stdin/stdout:
//!
//! ```text
//! demo-plugin [mode]
//! ```
//!
//! Modes: `median` (wheat, default), `median-mean` (always averages),
//! `hang` (reads requests but never answers), `bad-id` (answers with a
//! wrong correlation id), `crash` (exits after the first request).

use chaffmill::problems::{value_from_wire, value_to_wire};
use chaffmill::Value;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::json;
use std::io::{BufRead, Write};

fn median(xs: &[BigRational]) -> BigRational {
    let mut sorted = xs.to_vec();
    sorted.sort();
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2].clone()
    } else {
        (&sorted[n / 2 - 1] + &sorted[n / 2]) / BigRational::from_integer(BigInt::from(2))
    }
}

fn mean(xs: &[BigRational]) -> BigRational {
    let sum: BigRational = xs.iter().fold(BigRational::zero(), |acc, x| acc + x);
    sum / BigRational::from_integer(BigInt::from(xs.len()))
}

fn handle(mode: &str, function: &str, args: &[Value]) -> Result<Value, String> {
    if function != "median" {
        return Err(format!("unknown function {}", function));
    }
    if args.len() != 1 {
        return Err("median takes one list".to_string());
    }
    let items = match &args[0] {
        Value::List(items) if !items.is_empty() => items,
        Value::List(_) => return Err("median of an empty list".to_string()),
        other => return Err(format!("expected a list, got a {}", other.variant())),
    };
    let mut xs = Vec::new();
    for item in items {
        match item {
            Value::Number(r) => xs.push(r.clone()),
            other => return Err(format!("expected numbers, found a {}", other.variant())),
        }
    }
    let out = match mode {
        "median-mean" => mean(&xs),
        _ => median(&xs),
    };
    Ok(Value::Number(out))
}

fn main() {
    let mode = std::env::args().nth(1).unwrap_or_else(|| "median".to_string());
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for line in stdin.lock().lines() {
        let line = match line {
            Ok(l) => l,
            Err(_) => break,
        };
        if line.trim().is_empty() {
            continue;
        }
        if mode == "hang" {
            continue;
        }
        let request: serde_json::Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let id = request.get("id").and_then(|v| v.as_u64()).unwrap_or(0);
        let reply_id = if mode == "bad-id" { id + 7 } else { id };
        let function = request
            .get("function")
            .and_then(|v| v.as_str())
            .unwrap_or("");
        let args: Result<Vec<Value>, String> = request
            .get("args")
            .and_then(|v| v.as_array())
            .map(|items| items.iter().map(value_from_wire).collect())
            .unwrap_or_else(|| Err("missing args".to_string()));
        let response = match args.and_then(|args| handle(&mode, function, &args)) {
            Ok(v) => json!({ "id": reply_id, "result": value_to_wire(&v) }),
            Err(e) => json!({ "id": reply_id, "error": e }),
        };
        if writeln!(out, "{}", response).and_then(|_| out.flush()).is_err() {
            break;
        }
        if mode == "crash" {
            std::process::exit(3);
        }
    }
}
