//! Built-in implementations for the two bundled problems.
//!
//! `median` ships one wheat and the four classic sample buggy programs; its
//! even-length convention is the average of the two middle values. `docdiff`
//! ships one wheat and a family of 14 narrow mutations covering its seven
//! problem characteristics.

use super::{
    Backend, Characteristic, EvalError, FunctionSig, Implementation, ProblemSpec,
};
use crate::lang::Value;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Every built-in function table; config files reference these by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    MedianWheat,
    MedianMean,
    MedianMode,
    MedianUnsortedMiddle,
    MedianEvenLeft,
    DocdiffWheat,
    DocdiffCaseSensitive,
    DocdiffPresence,
    DocdiffDedup,
    DocdiffNoNorm,
    DocdiffMinNorm,
    DocdiffMagNorm,
    DocdiffMag4Norm,
    DocdiffAlwaysZero,
    DocdiffAlwaysOne,
    DocdiffRound,
    DocdiffFirstVocab,
    DocdiffSecondVocab,
    DocdiffSubsume,
    DocdiffIdentical,
}

impl Builtin {
    pub fn from_name(name: &str) -> Option<Builtin> {
        use Builtin::*;
        Some(match name {
            "median-wheat" => MedianWheat,
            "median-mean" => MedianMean,
            "median-mode" => MedianMode,
            "median-unsorted-middle" => MedianUnsortedMiddle,
            "median-even-left" => MedianEvenLeft,
            "docdiff-wheat" => DocdiffWheat,
            "docdiff-case-sensitive" => DocdiffCaseSensitive,
            "docdiff-presence" => DocdiffPresence,
            "docdiff-dedup" => DocdiffDedup,
            "docdiff-no-norm" => DocdiffNoNorm,
            "docdiff-min-norm" => DocdiffMinNorm,
            "docdiff-mag-norm" => DocdiffMagNorm,
            "docdiff-mag4-norm" => DocdiffMag4Norm,
            "docdiff-always-zero" => DocdiffAlwaysZero,
            "docdiff-always-one" => DocdiffAlwaysOne,
            "docdiff-round" => DocdiffRound,
            "docdiff-first-vocab" => DocdiffFirstVocab,
            "docdiff-second-vocab" => DocdiffSecondVocab,
            "docdiff-subsume" => DocdiffSubsume,
            "docdiff-identical" => DocdiffIdentical,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        use Builtin::*;
        match self {
            MedianWheat => "median-wheat",
            MedianMean => "median-mean",
            MedianMode => "median-mode",
            MedianUnsortedMiddle => "median-unsorted-middle",
            MedianEvenLeft => "median-even-left",
            DocdiffWheat => "docdiff-wheat",
            DocdiffCaseSensitive => "docdiff-case-sensitive",
            DocdiffPresence => "docdiff-presence",
            DocdiffDedup => "docdiff-dedup",
            DocdiffNoNorm => "docdiff-no-norm",
            DocdiffMinNorm => "docdiff-min-norm",
            DocdiffMagNorm => "docdiff-mag-norm",
            DocdiffMag4Norm => "docdiff-mag4-norm",
            DocdiffAlwaysZero => "docdiff-always-zero",
            DocdiffAlwaysOne => "docdiff-always-one",
            DocdiffRound => "docdiff-round",
            DocdiffFirstVocab => "docdiff-first-vocab",
            DocdiffSecondVocab => "docdiff-second-vocab",
            DocdiffSubsume => "docdiff-subsume",
            DocdiffIdentical => "docdiff-identical",
        }
    }

    /// Pure dispatch; every call with the same arguments yields the same result.
    pub fn eval(&self, function: &str, args: &[Value]) -> Result<Value, EvalError> {
        use Builtin::*;
        match self {
            MedianWheat | MedianMean | MedianMode | MedianUnsortedMiddle | MedianEvenLeft => {
                if function != "median" {
                    return Err(EvalError::UnknownFunction(function.to_string()));
                }
                let xs = number_list(&args[0])?;
                match self {
                    MedianWheat => median_wheat(&xs),
                    MedianMean => median_mean(&xs),
                    MedianMode => median_mode(&xs),
                    MedianUnsortedMiddle => Ok(Value::Number(xs[xs.len() / 2].clone())),
                    MedianEvenLeft => median_even_left(&xs),
                    _ => unreachable!(),
                }
            }
            _ => {
                if function != "overlap" {
                    return Err(EvalError::UnknownFunction(function.to_string()));
                }
                let doc1 = word_list(&args[0], "first")?;
                let doc2 = word_list(&args[1], "second")?;
                docdiff(self, &doc1, &doc2)
            }
        }
    }
}

fn number_list(v: &Value) -> Result<Vec<BigRational>, EvalError> {
    let items = v
        .as_list()
        .ok_or_else(|| EvalError::Domain(format!("expected a list, got a {}", v.variant())))?;
    if items.is_empty() {
        return Err(EvalError::Domain("median of an empty list".to_string()));
    }
    items
        .iter()
        .map(|item| {
            item.as_number().cloned().ok_or_else(|| {
                EvalError::Domain(format!("expected a list of numbers, found a {}", item.variant()))
            })
        })
        .collect()
}

fn word_list(v: &Value, which: &str) -> Result<Vec<String>, EvalError> {
    let items = v
        .as_list()
        .ok_or_else(|| EvalError::Domain(format!("expected a list, got a {}", v.variant())))?;
    if items.is_empty() {
        return Err(EvalError::Domain(format!(
            "the {} document must be a non-empty list of strings",
            which
        )));
    }
    items
        .iter()
        .map(|item| {
            item.as_text().map(str::to_string).ok_or_else(|| {
                EvalError::Domain(format!("expected a list of strings, found a {}", item.variant()))
            })
        })
        .collect()
}

fn median_wheat(xs: &[BigRational]) -> Result<Value, EvalError> {
    let mut sorted = xs.to_vec();
    sorted.sort();
    let n = sorted.len();
    let out = if n % 2 == 1 {
        sorted[n / 2].clone()
    } else {
        (&sorted[n / 2 - 1] + &sorted[n / 2]) / BigRational::from_integer(BigInt::from(2))
    };
    Ok(Value::Number(out))
}

fn median_mean(xs: &[BigRational]) -> Result<Value, EvalError> {
    let sum: BigRational = xs.iter().fold(BigRational::zero(), |acc, x| acc + x);
    Ok(Value::Number(sum / BigRational::from_integer(BigInt::from(xs.len()))))
}

/// Most frequent value, smallest on ties. Undefined (a domain error) when no
/// value repeats: a list of distinct values has no mode.
fn median_mode(xs: &[BigRational]) -> Result<Value, EvalError> {
    let mut counts: BTreeMap<&BigRational, usize> = BTreeMap::new();
    for x in xs {
        *counts.entry(x).or_insert(0) += 1;
    }
    let best = counts.values().copied().max().unwrap();
    if best == 1 {
        return Err(EvalError::Domain("no repeated value: mode is undefined".to_string()));
    }
    let mode = counts
        .iter()
        .find(|(_, &c)| c == best)
        .map(|(v, _)| (*v).clone())
        .unwrap();
    Ok(Value::Number(mode))
}

fn median_even_left(xs: &[BigRational]) -> Result<Value, EvalError> {
    let mut sorted = xs.to_vec();
    sorted.sort();
    let n = sorted.len();
    let out = if n % 2 == 1 {
        sorted[n / 2].clone()
    } else {
        sorted[n / 2 - 1].clone()
    };
    Ok(Value::Number(out))
}

struct BagVectors {
    dot: BigInt,
    sq1: BigInt,
    sq2: BigInt,
}

/// Count vectors over `vocab` for both documents, reduced to the three
/// quantities the overlap formulas need.
fn vectors_over<'a, I: IntoIterator<Item = &'a String>>(
    vocab: I,
    doc1: &[String],
    doc2: &[String],
) -> BagVectors {
    let count = |doc: &[String], w: &str| BigInt::from(doc.iter().filter(|x| *x == w).count());
    let mut dot = BigInt::zero();
    let mut sq1 = BigInt::zero();
    let mut sq2 = BigInt::zero();
    for w in vocab {
        let c1 = count(doc1, w);
        let c2 = count(doc2, w);
        dot += &c1 * &c2;
        sq1 += &c1 * &c1;
        sq2 += &c2 * &c2;
    }
    BagVectors { dot, sq1, sq2 }
}

fn unique_union(doc1: &[String], doc2: &[String]) -> Vec<String> {
    let mut vocab = Vec::new();
    for w in doc1.iter().chain(doc2.iter()) {
        if !vocab.contains(w) {
            vocab.push(w.clone());
        }
    }
    vocab
}

fn lower(doc: &[String]) -> Vec<String> {
    doc.iter().map(|w| w.to_lowercase()).collect()
}

fn dedup_first(doc: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for w in doc {
        if !out.contains(w) {
            out.push(w.clone());
        }
    }
    out
}

fn ratio(n: BigInt, d: BigInt) -> Value {
    Value::Number(BigRational::new(n, d))
}

fn wheat_overlap(doc1: &[String], doc2: &[String]) -> BigRational {
    let d1 = lower(doc1);
    let d2 = lower(doc2);
    let vocab = unique_union(&d1, &d2);
    let v = vectors_over(&vocab, &d1, &d2);
    BigRational::new(v.dot, v.sq1.max(v.sq2))
}

fn docdiff(which: &Builtin, doc1: &[String], doc2: &[String]) -> Result<Value, EvalError> {
    use Builtin::*;
    let one = || Ok(Value::int(1));
    let zero = || Ok(Value::int(0));
    match which {
        DocdiffWheat => Ok(Value::Number(wheat_overlap(doc1, doc2))),
        DocdiffCaseSensitive => {
            let vocab = unique_union(doc1, doc2);
            let v = vectors_over(&vocab, doc1, doc2);
            Ok(ratio(v.dot, v.sq1.max(v.sq2)))
        }
        DocdiffPresence => {
            let d1 = dedup_first(&lower(doc1));
            let d2 = dedup_first(&lower(doc2));
            let vocab = unique_union(&d1, &d2);
            let v = vectors_over(&vocab, &d1, &d2);
            Ok(ratio(v.dot, v.sq1.max(v.sq2)))
        }
        // A set instead of a list loses duplicates before counting; the
        // resulting 0/1 counts coincide with the presence mutant by design.
        DocdiffDedup => {
            let d1 = dedup_first(&lower(doc1));
            let d2 = dedup_first(&lower(doc2));
            let vocab = unique_union(&d1, &d2);
            let v = vectors_over(&vocab, &d1, &d2);
            Ok(ratio(v.dot, v.sq1.max(v.sq2)))
        }
        DocdiffNoNorm => {
            let d1 = lower(doc1);
            let d2 = lower(doc2);
            let vocab = unique_union(&d1, &d2);
            let v = vectors_over(&vocab, &d1, &d2);
            Ok(Value::Number(BigRational::from_integer(v.dot)))
        }
        DocdiffMinNorm => {
            let d1 = lower(doc1);
            let d2 = lower(doc2);
            let vocab = unique_union(&d1, &d2);
            let v = vectors_over(&vocab, &d1, &d2);
            Ok(ratio(v.dot, v.sq1.min(v.sq2)))
        }
        // Normalizing by the (non-squared) magnitude only has an exact value
        // when the squared magnitude is a perfect square; values are exact
        // rationals, so anything else is a domain error.
        DocdiffMagNorm => {
            let d1 = lower(doc1);
            let d2 = lower(doc2);
            let vocab = unique_union(&d1, &d2);
            let v = vectors_over(&vocab, &d1, &d2);
            let maxsq = v.sq1.max(v.sq2);
            let root = maxsq.sqrt();
            if &root * &root == maxsq {
                Ok(ratio(v.dot, root))
            } else {
                Err(EvalError::Domain(format!(
                    "magnitude sqrt({}) is irrational",
                    maxsq
                )))
            }
        }
        DocdiffMag4Norm => {
            let d1 = lower(doc1);
            let d2 = lower(doc2);
            let vocab = unique_union(&d1, &d2);
            let v = vectors_over(&vocab, &d1, &d2);
            let maxsq = v.sq1.max(v.sq2);
            Ok(ratio(v.dot, &maxsq * &maxsq))
        }
        DocdiffAlwaysZero => zero(),
        DocdiffAlwaysOne => one(),
        DocdiffRound => {
            let w = wheat_overlap(doc1, doc2);
            let half = BigRational::new(BigInt::one(), BigInt::from(2));
            if w >= half {
                one()
            } else {
                zero()
            }
        }
        DocdiffFirstVocab | DocdiffSecondVocab => {
            let d1 = lower(doc1);
            let d2 = lower(doc2);
            let vocab = if matches!(which, DocdiffFirstVocab) {
                dedup_first(&d1)
            } else {
                dedup_first(&d2)
            };
            let v = vectors_over(&vocab, &d1, &d2);
            let maxsq = v.sq1.max(v.sq2);
            if maxsq.is_zero() {
                // Degenerate truncation: no vocabulary word occurs at all.
                return zero();
            }
            Ok(ratio(v.dot, maxsq))
        }
        DocdiffSubsume => {
            let b1 = bag(&lower(doc1));
            let b2 = bag(&lower(doc2));
            let subsumes = |a: &BTreeMap<String, usize>, b: &BTreeMap<String, usize>| {
                b.iter().all(|(w, c)| a.get(w).copied().unwrap_or(0) >= *c)
            };
            if subsumes(&b1, &b2) || subsumes(&b2, &b1) {
                one()
            } else {
                zero()
            }
        }
        // A mutation of the wheat, so words are still lowercased before the
        // lists are compared; order still matters.
        DocdiffIdentical => {
            if lower(doc1) == lower(doc2) {
                one()
            } else {
                zero()
            }
        }
        _ => unreachable!("median builtins handled earlier"),
    }
}

fn bag(doc: &[String]) -> BTreeMap<String, usize> {
    let mut b = BTreeMap::new();
    for w in doc {
        *b.entry(w.clone()).or_insert(0) += 1;
    }
    b
}

fn b(builtin: Builtin) -> Backend {
    Backend::Builtin(builtin)
}

/// The median problem with its four sample buggy programs.
pub fn builtin_median() -> ProblemSpec {
    let characteristics = vec![
        Characteristic {
            id: "central-value".to_string(),
            text: "The median is the middle of the sorted values, not the arithmetic mean."
                .to_string(),
            failure_notes: None,
        },
        Characteristic {
            id: "not-mode".to_string(),
            text: "The median is the middle of the sorted values, not the most frequent value."
                .to_string(),
            failure_notes: None,
        },
        Characteristic {
            id: "requires-sorting".to_string(),
            text: "The values must be sorted before taking the middle element.".to_string(),
            failure_notes: None,
        },
        Characteristic {
            id: "even-average".to_string(),
            text: "For an even count of values, the median is the average of the two middle values."
                .to_string(),
            failure_notes: None,
        },
    ];
    ProblemSpec {
        name: "median".to_string(),
        functions: vec![FunctionSig {
            name: "median".to_string(),
            arity: 1,
            subproblem: "median".to_string(),
        }],
        wheats: vec![Implementation::wheat("median-wheat", b(Builtin::MedianWheat))],
        mutant_family: vec![
            Implementation::mutant(
                "median-mean",
                "central-value",
                "Returns the arithmetic mean",
                "median",
                b(Builtin::MedianMean),
            ),
            Implementation::mutant(
                "median-mode",
                "not-mode",
                "Returns the most frequent value, smallest on ties",
                "median",
                b(Builtin::MedianMode),
            ),
            Implementation::mutant(
                "median-unsorted-middle",
                "requires-sorting",
                "Returns the middle element without sorting",
                "median",
                b(Builtin::MedianUnsortedMiddle),
            ),
            Implementation::mutant(
                "median-even-left",
                "even-average",
                "Returns the left of the two middle elements for even-length input",
                "median",
                b(Builtin::MedianEvenLeft),
            ),
        ],
        characteristics,
    }
}

/// The document-similarity problem: 7 characteristics expanded into a
/// 14-mutant family.
pub fn builtin_docdiff() -> ProblemSpec {
    let characteristics = vec![
        Characteristic {
            id: "c-case".to_string(),
            text: "Two words match when they have the same characters in the same order, regardless of letter case.".to_string(),
            failure_notes: Some("Treating case as significant".to_string()),
        },
        Characteristic {
            id: "c-frequency".to_string(),
            text: "Each vector entry counts how many times its word occurs in the document, not merely whether it occurs.".to_string(),
            failure_notes: Some("Building 0/1 presence vectors".to_string()),
        },
        Characteristic {
            id: "c-repeats".to_string(),
            text: "A document may contain the same word more than once, and repeats count.".to_string(),
            failure_notes: Some("Gathering words into a set and losing duplicates".to_string()),
        },
        Characteristic {
            id: "c-normalize".to_string(),
            text: "The overlap is normalized by the squared magnitude of the larger count vector.".to_string(),
            failure_notes: Some("Normalizing by the wrong quantity or not at all".to_string()),
        },
        Characteristic {
            id: "c-proportional".to_string(),
            text: "The overlap is proportional to the dot product of the two count vectors.".to_string(),
            failure_notes: Some("Returning a binary verdict instead of a ratio".to_string()),
        },
        Characteristic {
            id: "c-exact".to_string(),
            text: "The overlap is an exact ratio and is never rounded.".to_string(),
            failure_notes: Some("Rounding to dodge comparison trouble".to_string()),
        },
        Characteristic {
            id: "c-all-words".to_string(),
            text: "Count vectors range over every unique word from both documents, including words absent from one of them.".to_string(),
            failure_notes: Some("Building vectors over a single document's words".to_string()),
        },
    ];
    let m = Implementation::mutant;
    ProblemSpec {
        name: "docdiff".to_string(),
        functions: vec![FunctionSig {
            name: "overlap".to_string(),
            arity: 2,
            subproblem: "overlap".to_string(),
        }],
        wheats: vec![Implementation::wheat("docdiff-wheat", b(Builtin::DocdiffWheat))],
        mutant_family: vec![
            m("docdiff-case-sensitive", "c-case", "Case sensitive", "overlap", b(Builtin::DocdiffCaseSensitive)),
            m("docdiff-presence", "c-frequency", "Counts presence, not frequency", "overlap", b(Builtin::DocdiffPresence)),
            m("docdiff-dedup", "c-repeats", "Collapses repeated words", "overlap", b(Builtin::DocdiffDedup)),
            m("docdiff-no-norm", "c-normalize", "No normalization", "overlap", b(Builtin::DocdiffNoNorm)),
            m("docdiff-min-norm", "c-normalize", "Normalize by min vector", "overlap", b(Builtin::DocdiffMinNorm)),
            m("docdiff-mag-norm", "c-normalize", "Normalize by mag instead of mag^2", "overlap", b(Builtin::DocdiffMagNorm)),
            m("docdiff-mag4-norm", "c-normalize", "Normalize by mag^4 instead of mag^2", "overlap", b(Builtin::DocdiffMag4Norm)),
            m("docdiff-always-zero", "c-proportional", "Overlap is always 0", "overlap", b(Builtin::DocdiffAlwaysZero)),
            m("docdiff-always-one", "c-proportional", "Overlap is always 1", "overlap", b(Builtin::DocdiffAlwaysOne)),
            m("docdiff-round", "c-exact", "Rounds overlap to 0 or 1", "overlap", b(Builtin::DocdiffRound)),
            m("docdiff-first-vocab", "c-all-words", "Vectors over first document's words only", "overlap", b(Builtin::DocdiffFirstVocab)),
            m("docdiff-second-vocab", "c-all-words", "Vectors over second document's words only", "overlap", b(Builtin::DocdiffSecondVocab)),
            m("docdiff-subsume", "c-proportional", "Returns 1 iff one document subsumes the other", "overlap", b(Builtin::DocdiffSubsume)),
            m("docdiff-identical", "c-proportional", "Returns 1 iff documents are identical lists", "overlap", b(Builtin::DocdiffIdentical)),
        ],
        characteristics,
    }
}
