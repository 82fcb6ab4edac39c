use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::taxonomy::Taxonomy;
use crate::error::{Error, Result};

/// One rule for accepting an open-ended guess against a ground-truth word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Criterion {
    /// Letter-for-letter equality.
    #[serde(rename = "EM")]
    Em,
    /// Token multiset containment in either direction.
    #[serde(rename = "SUB")]
    Sub,
    /// The two words share a synonym set.
    #[serde(rename = "SYN")]
    Syn,
    /// The two words have the same direct hypernym.
    #[serde(rename = "HY")]
    Hy,
    /// One word is the direct hypernym of the other.
    #[serde(rename = "HY-PC")]
    HyPc,
    /// Wu-Palmer similarity at or above the threshold.
    #[serde(rename = "WUP")]
    Wup,
}

impl Criterion {
    pub const ALL: [Criterion; 6] = [
        Criterion::Em,
        Criterion::Sub,
        Criterion::Syn,
        Criterion::Hy,
        Criterion::HyPc,
        Criterion::Wup,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Criterion::Em => "EM",
            Criterion::Sub => "SUB",
            Criterion::Syn => "SYN",
            Criterion::Hy => "HY",
            Criterion::HyPc => "HY-PC",
            Criterion::Wup => "WUP",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown criterion {s:?}")))
    }
}

/// Default Wu-Palmer acceptance threshold.
pub const DEFAULT_WUP_THRESHOLD: f64 = 0.9;

/// A non-empty set of criteria combined with logical OR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriteriaSet {
    bits: u8,
    wup_threshold: f64,
}

impl CriteriaSet {
    pub fn new(criteria: &[Criterion]) -> Result<Self> {
        Self::with_threshold(criteria, DEFAULT_WUP_THRESHOLD)
    }

    pub fn with_threshold(criteria: &[Criterion], wup_threshold: f64) -> Result<Self> {
        if criteria.is_empty() {
            return Err(Error::invalid("criteria set must not be empty"));
        }
        if !(wup_threshold > 0.0 && wup_threshold <= 1.0) {
            return Err(Error::invalid("WUP threshold must lie in (0, 1]"));
        }
        Ok(CriteriaSet {
            bits: criteria.iter().fold(0, |acc, c| acc | c.bit()),
            wup_threshold,
        })
    }

    /// The six cumulative combinations EM, EM|SUB, ... up to all criteria.
    pub fn progressive_chain() -> Vec<CriteriaSet> {
        (1..=Criterion::ALL.len())
            .map(|n| CriteriaSet::new(&Criterion::ALL[..n]).expect("non-empty prefix"))
            .collect()
    }

    pub fn contains(&self, c: Criterion) -> bool {
        self.bits & c.bit() != 0
    }

    pub fn criteria(&self) -> Vec<Criterion> {
        Criterion::ALL.into_iter().filter(|&c| self.contains(c)).collect()
    }

    pub fn wup_threshold(&self) -> f64 {
        self.wup_threshold
    }

    pub fn is_subset_of(&self, other: &CriteriaSet) -> bool {
        self.bits & !other.bits == 0
    }
}

impl Default for CriteriaSet {
    /// EM | SUB | SYN, the combination human raters agreed with most.
    fn default() -> Self {
        CriteriaSet::new(&[Criterion::Em, Criterion::Sub, Criterion::Syn]).expect("non-empty")
    }
}

impl fmt::Display for CriteriaSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<_> = self.criteria().iter().map(|c| c.label()).collect();
        f.write_str(&labels.join("|"))
    }
}

impl FromStr for CriteriaSet {
    type Err = Error;

    /// Parses `EM|SUB|SYN` (commas and `+` also accepted as separators).
    fn from_str(s: &str) -> Result<Self> {
        let criteria = s
            .split(['|', ',', '+'])
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Criterion>>>()?;
        CriteriaSet::new(&criteria)
    }
}

/// Verdict of [`match_guess`]: the OR over enabled criteria and every
/// enabled criterion that holds on its own.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchOutcome {
    pub verdict: bool,
    pub fired: Vec<Criterion>,
}

/// Splits on whitespace and hyphens.
pub fn tokens(s: &str) -> Vec<&str> {
    s.split(|c: char| c.is_whitespace() || c == '-')
        .filter(|t| !t.is_empty())
        .collect()
}

fn multiset_contains(outer: &[&str], inner: &[&str]) -> bool {
    let mut counts: HashMap<&str, i32> = HashMap::new();
    for t in outer {
        *counts.entry(t).or_default() += 1;
    }
    inner.iter().all(|t| {
        let c = counts.entry(t).or_default();
        *c -= 1;
        *c >= 0
    })
}

/// Taxonomy lookup terms for a possibly multi-word string: the string
/// itself when it is a node, otherwise each of its tokens that is.
fn lookup_terms<'a>(t: &Taxonomy, s: &'a str) -> Vec<&'a str> {
    if t.contains(s) {
        vec![s]
    } else {
        tokens(s).into_iter().filter(|w| t.contains(w)).collect()
    }
}

fn holds(c: Criterion, guess: &str, truth: &str, t: &Taxonomy, wup_threshold: f64) -> bool {
    match c {
        Criterion::Em => guess == truth,
        Criterion::Sub => {
            let (g, w) = (tokens(guess), tokens(truth));
            !g.is_empty() && !w.is_empty() && (multiset_contains(&g, &w) || multiset_contains(&w, &g))
        }
        Criterion::Syn | Criterion::Hy | Criterion::HyPc | Criterion::Wup => {
            let gs = lookup_terms(t, guess);
            let ws = lookup_terms(t, truth);
            gs.iter().any(|g| {
                ws.iter().any(|w| match c {
                    Criterion::Syn => t.are_synonyms(g, w),
                    Criterion::Hy => matches!((t.parent(g), t.parent(w)), (Some(a), Some(b)) if a == b),
                    Criterion::HyPc => t.parent(g) == Some(*w) || t.parent(w) == Some(*g),
                    _ => t.wup_similarity(g, w).is_ok_and(|s| s >= wup_threshold),
                })
            })
        }
    }
}

/// Decides whether `guess` counts as a correct answer for `truth`.
///
/// Both strings are expected in normalized (lowercase) form. An empty guess
/// never matches. Words outside the taxonomy simply fail the
/// taxonomy-based criteria.
pub fn match_guess(guess: &str, truth: &str, t: &Taxonomy, crit: &CriteriaSet) -> MatchOutcome {
    let (guess, truth) = (guess.trim(), truth.trim());
    if guess.is_empty() || truth.is_empty() {
        return MatchOutcome {
            verdict: false,
            fired: Vec::new(),
        };
    }
    let fired: Vec<Criterion> = crit
        .criteria()
        .into_iter()
        .filter(|&c| holds(c, guess, truth, t, crit.wup_threshold))
        .collect();
    MatchOutcome {
        verdict: !fired.is_empty(),
        fired,
    }
}

/// Fraction of `(guess, truth)` pairs accepted under each combination.
///
/// `combos` must form an inclusion chain, which makes the result
/// non-decreasing.
pub fn accuracy_by_criteria<G, W>(pairs: &[(G, W)], t: &Taxonomy, combos: &[CriteriaSet]) -> Result<Vec<f64>>
where
    G: AsRef<str>,
    W: AsRef<str>,
{
    if pairs.is_empty() {
        return Err(Error::invalid("no (guess, truth) pairs"));
    }
    if combos.windows(2).any(|w| !w[0].is_subset_of(&w[1])) {
        return Err(Error::invalid("criteria combinations must be ordered by inclusion"));
    }
    Ok(combos
        .iter()
        .map(|crit| {
            let hits = pairs
                .iter()
                .filter(|(g, w)| match_guess(g.as_ref(), w.as_ref(), t, crit).verdict)
                .count();
            hits as f64 / pairs.len() as f64
        })
        .collect())
}
