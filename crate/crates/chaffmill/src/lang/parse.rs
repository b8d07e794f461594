//! Line-oriented parser for example suites.
//!
//! Parsing is total: malformed lines are reported with a line number and a
//! category, and parsing continues. Student logs contain plenty of typos and
//! the pipeline has to ingest all of them.

use super::{Example, ExampleSuite, Value};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// What went wrong on a malformed line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParseErrorKind {
    /// Unexpected character, unterminated string, unknown escape.
    Lex,
    /// A call without an argument list, e.g. `median is 2`.
    ArityLessCall,
    /// No `is` between the call and the expected value.
    MissingIs,
    /// Malformed or unbalanced literal, or trailing junk after the value.
    BadLiteral,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParseErrorKind::Lex => "lex error",
            ParseErrorKind::ArityLessCall => "arity-less call",
            ParseErrorKind::MissingIs => "missing `is`",
            ParseErrorKind::BadLiteral => "bad literal",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    /// 1-based source line.
    pub line: u32,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}: {}", self.line, self.kind, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(BigRational),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
}

struct LineFail {
    kind: ParseErrorKind,
    message: String,
}

fn fail(kind: ParseErrorKind, message: impl Into<String>) -> LineFail {
    LineFail {
        kind,
        message: message.into(),
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '?'
}

/// Strips a `#` comment, respecting string literals.
fn strip_comment(line: &str) -> &str {
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        if in_string {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
        } else if c == '"' {
            in_string = true;
        } else if c == '#' {
            return &line[..i];
        }
    }
    line
}

fn lex(line: &str) -> Result<Vec<Tok>, LineFail> {
    let mut toks = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            '[' => {
                toks.push(Tok::LBracket);
                i += 1;
            }
            ']' => {
                toks.push(Tok::RBracket);
                i += 1;
            }
            ',' => {
                toks.push(Tok::Comma);
                i += 1;
            }
            ':' => {
                toks.push(Tok::Colon);
                i += 1;
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    if i >= chars.len() {
                        return Err(fail(ParseErrorKind::Lex, "unterminated string"));
                    }
                    match chars[i] {
                        '"' => {
                            i += 1;
                            break;
                        }
                        '\\' => {
                            i += 1;
                            if i >= chars.len() {
                                return Err(fail(ParseErrorKind::Lex, "unterminated string"));
                            }
                            match chars[i] {
                                '"' => s.push('"'),
                                '\\' => s.push('\\'),
                                'n' => s.push('\n'),
                                't' => s.push('\t'),
                                'r' => s.push('\r'),
                                other => {
                                    return Err(fail(
                                        ParseErrorKind::Lex,
                                        format!("unknown escape `\\{}`", other),
                                    ))
                                }
                            }
                            i += 1;
                        }
                        other => {
                            s.push(other);
                            i += 1;
                        }
                    }
                }
                toks.push(Tok::Str(s));
            }
            c if c.is_ascii_digit() || c == '-' => {
                let (tok, next) = lex_number(&chars, i)?;
                toks.push(tok);
                i = next;
            }
            c if is_ident_start(c) => {
                let mut name = String::new();
                while i < chars.len() && is_ident_continue(chars[i]) {
                    name.push(chars[i]);
                    i += 1;
                }
                toks.push(Tok::Ident(name));
            }
            other => {
                return Err(fail(
                    ParseErrorKind::Lex,
                    format!("unexpected character `{}`", other),
                ));
            }
        }
    }
    Ok(toks)
}

fn lex_number(chars: &[char], start: usize) -> Result<(Tok, usize), LineFail> {
    let mut i = start;
    let negative = chars[i] == '-';
    if negative {
        i += 1;
        if i >= chars.len() || !chars[i].is_ascii_digit() {
            return Err(fail(ParseErrorKind::Lex, "`-` not followed by a digit"));
        }
    }
    let digits_from = |chars: &[char], mut j: usize| -> (String, usize) {
        let mut s = String::new();
        while j < chars.len() && chars[j].is_ascii_digit() {
            s.push(chars[j]);
            j += 1;
        }
        (s, j)
    };
    let (int_part, mut i2) = digits_from(chars, i);
    i = i2;
    let mut rational = if i < chars.len() && chars[i] == '.' {
        let (frac, j) = digits_from(chars, i + 1);
        if frac.is_empty() {
            return Err(fail(ParseErrorKind::BadLiteral, "digits expected after `.`"));
        }
        i2 = j;
        let numer: BigInt = format!("{}{}", int_part, frac).parse().unwrap();
        let denom = BigInt::from(10u32).pow(frac.len() as u32);
        BigRational::new(numer, denom)
    } else if i < chars.len() && chars[i] == '/' {
        let (den, j) = digits_from(chars, i + 1);
        if den.is_empty() {
            return Err(fail(ParseErrorKind::BadLiteral, "digits expected after `/`"));
        }
        i2 = j;
        let numer: BigInt = int_part.parse().unwrap();
        let denom: BigInt = den.parse().unwrap();
        if denom.is_zero() {
            return Err(fail(ParseErrorKind::BadLiteral, "zero denominator"));
        }
        BigRational::new(numer, denom)
    } else {
        i2 = i;
        BigRational::from_integer(int_part.parse().unwrap())
    };
    if negative {
        rational = -rational;
    }
    Ok((Tok::Num(rational), i2))
}

struct Cursor<'t> {
    toks: &'t [Tok],
    pos: usize,
}

impl<'t> Cursor<'t> {
    fn peek(&self) -> Option<&'t Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<&'t Tok> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
}

fn parse_value(cur: &mut Cursor) -> Result<Value, LineFail> {
    match cur.next() {
        Some(Tok::Num(r)) => Ok(Value::Number(r.clone())),
        Some(Tok::Str(s)) => Ok(Value::Text(s.clone())),
        Some(Tok::Ident(name)) if name == "true" => Ok(Value::Boolean(true)),
        Some(Tok::Ident(name)) if name == "false" => Ok(Value::Boolean(false)),
        Some(Tok::Ident(name)) => {
            // A constructor literal `Name(v, ...)`; bare identifiers are not values.
            if cur.eat(&Tok::LParen) {
                let fields = parse_value_list(cur, &Tok::RParen)?;
                Ok(Value::Record {
                    ctor: name.clone(),
                    fields,
                })
            } else {
                Err(fail(
                    ParseErrorKind::BadLiteral,
                    format!("bare identifier `{}` is not a literal", name),
                ))
            }
        }
        Some(Tok::LBracket) => {
            // `[list: v, ...]` or plain `[v, ...]`.
            if let Some(Tok::Ident(kw)) = cur.peek() {
                if kw == "list" {
                    cur.next();
                    if !cur.eat(&Tok::Colon) {
                        return Err(fail(ParseErrorKind::BadLiteral, "expected `:` after `list`"));
                    }
                }
            }
            let items = parse_value_list(cur, &Tok::RBracket)?;
            Ok(Value::List(items))
        }
        Some(other) => Err(fail(
            ParseErrorKind::BadLiteral,
            format!("unexpected token {:?}", other),
        )),
        None => Err(fail(ParseErrorKind::BadLiteral, "value expected")),
    }
}

fn parse_value_list(cur: &mut Cursor, close: &Tok) -> Result<Vec<Value>, LineFail> {
    let mut items = Vec::new();
    if cur.eat(close) {
        return Ok(items);
    }
    loop {
        items.push(parse_value(cur)?);
        if cur.eat(close) {
            return Ok(items);
        }
        if !cur.eat(&Tok::Comma) {
            return Err(fail(
                ParseErrorKind::BadLiteral,
                format!("expected `,` or closing {:?}", close),
            ));
        }
    }
}

fn parse_example_line(toks: &[Tok]) -> Result<(String, Vec<Value>, Value), LineFail> {
    let mut cur = Cursor { toks, pos: 0 };
    let function = match cur.next() {
        Some(Tok::Ident(name)) => name.clone(),
        _ => return Err(fail(ParseErrorKind::Lex, "expected a function name")),
    };
    if !cur.eat(&Tok::LParen) {
        return Err(fail(
            ParseErrorKind::ArityLessCall,
            format!("`{}` is not applied to arguments", function),
        ));
    }
    let args = parse_value_list(&mut cur, &Tok::RParen)?;
    match cur.next() {
        Some(Tok::Ident(kw)) if kw == "is" => {}
        _ => return Err(fail(ParseErrorKind::MissingIs, "expected `is` after the call")),
    }
    let expected = parse_value(&mut cur)?;
    if cur.peek().is_some() {
        return Err(fail(
            ParseErrorKind::BadLiteral,
            "trailing tokens after the expected value",
        ));
    }
    Ok((function, args, expected))
}

/// Parses a whole suite. Returns every well-formed example plus one error per
/// malformed line; never fails outright.
pub fn parse_suite(text: &str) -> (ExampleSuite, Vec<ParseError>) {
    let mut suite = ExampleSuite::default();
    let mut errors = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = (idx + 1) as u32;
        let body = strip_comment(line).trim();
        if body.is_empty() || body == "check:" || body == "end" {
            continue;
        }
        let outcome = lex(body).and_then(|toks| parse_example_line(&toks));
        match outcome {
            Ok((function, args, expected)) => suite.examples.push(Example {
                function,
                args,
                expected,
                source_line: line_no,
                raw_text: body.to_string(),
            }),
            Err(e) => errors.push(ParseError {
                line: line_no,
                kind: e.kind,
                message: e.message,
            }),
        }
    }
    (suite, errors)
}
