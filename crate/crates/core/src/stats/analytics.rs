use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::corpus::{Corpus, GuessSequence};
use crate::error::{Error, Result};

/// Number of distinct non-empty guesses in a sequence. A word that comes
/// back after a different guess (`a, b, a`) is counted once.
pub fn unique_guesses(g: &GuessSequence) -> usize {
    g.guesses.iter().filter(|w| !w.is_empty()).collect::<BTreeSet<_>>().len()
}

/// Sequences bucketed by how many distinct guesses they elicited.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct GuessCountHistogram {
    pub one: usize,
    pub two: usize,
    pub three: usize,
    pub four_plus: usize,
}

impl GuessCountHistogram {
    pub fn total(&self) -> usize {
        self.one + self.two + self.three + self.four_plus
    }

    /// `(label, count)` rows in bucket order.
    pub fn rows(&self) -> [(&'static str, usize); 4] {
        [("1", self.one), ("2", self.two), ("3", self.three), ("4+", self.four_plus)]
    }
}

/// Sequences with no guess at all fall in no bucket.
pub fn guess_count_histogram(c: &Corpus) -> GuessCountHistogram {
    let mut h = GuessCountHistogram::default();
    for r in c.records() {
        match unique_guesses(&r.guesses) {
            0 => {}
            1 => h.one += 1,
            2 => h.two += 1,
            3 => h.three += 1,
            _ => h.four_plus += 1,
        }
    }
    h
}

/// Normalized position of the first guess: one-based stroke index over N.
pub fn first_guess_location(g: &GuessSequence) -> Option<f64> {
    g.first_guess_index().map(|i| (i + 1) as f64 / g.len() as f64)
}

pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("median of an empty sample"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Ok(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 })
}

/// Unscaled median absolute deviation from the median.
pub fn median_abs_deviation(values: &[f64]) -> Result<f64> {
    let m = median(values)?;
    let dev: Vec<f64> = values.iter().map(|v| (v - m).abs()).collect();
    median(&dev)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryFirstGuess {
    pub category: String,
    pub median: f64,
    pub mad: f64,
    pub count: usize,
}

/// Per-category median and MAD of first-guess locations, sorted by median
/// (then category name).
pub fn first_guess_stats(c: &Corpus) -> Vec<CategoryFirstGuess> {
    let mut by_cat: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in c.records() {
        if let Some(loc) = first_guess_location(&r.guesses) {
            by_cat.entry(r.category()).or_default().push(loc);
        }
    }
    let mut out: Vec<CategoryFirstGuess> = by_cat
        .into_iter()
        .map(|(category, locs)| CategoryFirstGuess {
            category: category.to_string(),
            median: median(&locs).expect("non-empty"),
            mad: median_abs_deviation(&locs).expect("non-empty"),
            count: locs.len(),
        })
        .collect();
    out.sort_by(|a, b| a.median.total_cmp(&b.median).then_with(|| a.category.cmp(&b.category)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(gs: &[&str]) -> GuessSequence {
        GuessSequence {
            sketch_id: "s".into(),
            subject_id: "u".into(),
            guesses: gs.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn unique_counts() {
        assert_eq!(unique_guesses(&seq(&["", "a", "a", "b"])), 2);
        assert_eq!(unique_guesses(&seq(&["a", "b", "a"])), 2);
    }

    #[test]
    fn locations() {
        let mut g = vec![""; 10];
        g[4] = "cat";
        assert_eq!(first_guess_location(&seq(&g)), Some(0.5));
        assert_eq!(first_guess_location(&seq(&["cat"])), Some(1.0));
        assert_eq!(first_guess_location(&seq(&["", ""])), None);
    }

    #[test]
    fn order_statistics() {
        let v = [0.2, 0.4, 0.6];
        assert!((median(&v).unwrap() - 0.4).abs() < 1e-12);
        assert!((median_abs_deviation(&v).unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(median(&[1.0, 3.0]).unwrap(), 2.0);
        assert!(median(&[]).is_err());
    }
}
