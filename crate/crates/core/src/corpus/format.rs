use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Corpus, GuessSequence, Point, Record, Stroke, StrokeSequence};
use crate::error::{read_to_string, Error, Result};

/// On-disk shape of one record. Field order here is the serialized order.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    id: String,
    category: String,
    subject: String,
    strokes: Vec<Vec<Point>>,
    guesses: Vec<String>,
}

/// A parsed corpus plus the lines skipped in lenient mode.
#[derive(Debug, Clone)]
pub struct ParsedCorpus {
    pub corpus: Corpus,
    /// `(line number, reason)` for every skipped line.
    pub skipped: Vec<(usize, String)>,
}

pub fn parse_corpus(path: &Path, strict: bool) -> Result<ParsedCorpus> {
    parse_corpus_str(&read_to_string(path)?, strict)
}

/// Parses the line format. In strict mode the first bad line is an error;
/// otherwise bad lines are skipped and reported.
pub fn parse_corpus_str(text: &str, strict: bool) -> Result<ParsedCorpus> {
    let mut corpus = Corpus::default();
    let mut skipped = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let parsed = parse_line(raw, lineno).and_then(|r| {
            if seen.contains(r.id()) {
                Err(Error::Malformed {
                    line: lineno,
                    message: format!("duplicate id {:?}", r.id()),
                })
            } else {
                Ok(r)
            }
        });
        match parsed {
            Ok(record) => {
                seen.insert(record.id().to_string());
                corpus.push(record);
            }
            Err(e) if strict => return Err(e),
            Err(e) => skipped.push((lineno, e.to_string())),
        }
    }
    Ok(ParsedCorpus { corpus, skipped })
}

fn parse_line(raw: &str, line: usize) -> Result<Record> {
    let bad = |message: String| Error::Malformed { line, message };
    let l: Line = serde_json::from_str(raw).map_err(|e| bad(e.to_string()))?;
    if l.id.is_empty() {
        return Err(bad("empty id".into()));
    }
    let category = l.category.trim().to_lowercase();
    if category.is_empty() {
        return Err(bad("empty category".into()));
    }
    if l.strokes.is_empty() {
        return Err(bad("no strokes".into()));
    }
    if l.strokes.len() != l.guesses.len() {
        return Err(Error::LengthMismatch {
            what: format!("line {line}: {} strokes but {} guesses", l.strokes.len(), l.guesses.len()),
        });
    }
    for (s, stroke) in l.strokes.iter().enumerate() {
        if stroke.is_empty() {
            return Err(bad(format!("stroke {s} has no points")));
        }
        if let Some(p) = stroke
            .iter()
            .find(|p| !p.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)))
        {
            return Err(bad(format!("stroke {s} has point {p:?} outside [0,1]^2")));
        }
    }
    Ok(Record {
        sketch: StrokeSequence {
            sketch_id: l.id.clone(),
            category,
            strokes: l.strokes.into_iter().map(Stroke::new).collect(),
        },
        guesses: GuessSequence {
            sketch_id: l.id,
            subject_id: l.subject,
            guesses: l.guesses,
        },
    })
}

/// Serializes one record as a single line (no trailing newline).
pub fn record_to_line(r: &Record) -> String {
    let line = Line {
        id: r.sketch.sketch_id.clone(),
        category: r.sketch.category.clone(),
        subject: r.guesses.subject_id.clone(),
        strokes: r.sketch.strokes.iter().map(|s| s.points.clone()).collect(),
        guesses: r.guesses.guesses.clone(),
    };
    serde_json::to_string(&line).expect("record serializes")
}

/// The whole corpus, one record per line, newline-terminated.
pub fn write_corpus(c: &Corpus) -> String {
    let mut out = String::new();
    for r in c.records() {
        out.push_str(&record_to_line(r));
        out.push('\n');
    }
    out
}
