use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rating on the five-point scale `-2 ..= 2`.
pub type Rating = i8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GuesserType {
    Human,
    Model,
}

impl std::str::FromStr for GuesserType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "human" => Ok(GuesserType::Human),
            "model" | "machine" => Ok(GuesserType::Model),
            other => Err(Error::invalid(format!("unknown guesser type {other:?}"))),
        }
    }
}

impl std::fmt::Display for GuesserType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GuesserType::Human => "human",
            GuesserType::Model => "model",
        })
    }
}

/// All ratings one guess sequence received for one guesser type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub sequence_id: String,
    pub guesser: GuesserType,
    pub ratings: Vec<Rating>,
}

/// Maps a rating given on a reversed scale back to canonical orientation.
pub fn canonical_rating(rating: Rating, scale_reversed: bool) -> Result<Rating> {
    if !(-2..=2).contains(&rating) {
        return Err(Error::invalid(format!("rating {rating} outside -2..=2")));
    }
    Ok(if scale_reversed { -rating } else { rating })
}

/// Most frequent rating; ties go to the value closest to zero, then to the
/// smaller value.
pub fn likert_mode(ratings: &[Rating]) -> Result<Rating> {
    if ratings.is_empty() {
        return Err(Error::invalid("no ratings"));
    }
    if let Some(r) = ratings.iter().find(|r| !(-2..=2).contains(*r)) {
        return Err(Error::invalid(format!("rating {r} outside -2..=2")));
    }
    let mut counts: BTreeMap<Rating, usize> = BTreeMap::new();
    for &r in ratings {
        *counts.entry(r).or_default() += 1;
    }
    let (&mode, _) = counts
        .iter()
        .max_by(|(a, ca), (b, cb)| {
            ca.cmp(cb)
                .then_with(|| b.abs().cmp(&a.abs()))
                .then_with(|| b.cmp(a))
        })
        .expect("non-empty");
    Ok(mode)
}

/// Mean over items of each item's mean agreement rating.
pub fn mean_agreement(items: &[Vec<Rating>]) -> Result<f64> {
    let means: Vec<f64> = items
        .iter()
        .filter(|r| !r.is_empty())
        .map(|r| r.iter().map(|&x| f64::from(x)).sum::<f64>() / r.len() as f64)
        .collect();
    if means.is_empty() {
        return Err(Error::invalid("no ratings"));
    }
    Ok(means.iter().sum::<f64>() / means.len() as f64)
}

/// Groups `sequence<TAB>judge<TAB>type<TAB>value` lines into one record
/// per (sequence, guesser type), in first-seen order.
pub fn parse_rating_lines(text: &str) -> Result<Vec<RatingRecord>> {
    let mut records: Vec<RatingRecord> = Vec::new();
    let mut index: BTreeMap<(String, GuesserType), usize> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::Malformed { line: i + 1, message };
        let cols: Vec<&str> = line.split('\t').collect();
        let [seq, _judge, kind, value] = cols[..] else {
            return Err(bad("expected `sequence<TAB>judge<TAB>type<TAB>value`".into()));
        };
        let guesser: GuesserType = kind.parse().map_err(|e: Error| bad(e.to_string()))?;
        let rating: Rating = value.trim().parse().map_err(|_| bad(format!("bad rating {value:?}")))?;
        canonical_rating(rating, false).map_err(|e| bad(e.to_string()))?;
        let slot = *index.entry((seq.to_string(), guesser)).or_insert_with(|| {
            records.push(RatingRecord {
                sequence_id: seq.to_string(),
                guesser,
                ratings: Vec::new(),
            });
            records.len() - 1
        });
        records[slot].ratings.push(rating);
    }
    Ok(records)
}
