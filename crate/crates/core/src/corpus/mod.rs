//! Paired stroke/guess sequences: the data format, guess normalization,
//! augmentation, splitting and stroke-prefix features.

mod augment;
mod features;
mod format;
mod preprocess;
mod split;
pub mod synthetic;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use augment::{augment_guesses, augment_strokes, StrokeAugment};
pub use features::{
    extract_features, parse_feature_file, prefix_features, write_feature_file, FeatureConfig, FeatureExtractor,
    FeatureNormalizer, PrecomputedFeatures, RasterExtractor,
};
pub use format::{parse_corpus, parse_corpus_str, record_to_line, write_corpus, ParsedCorpus};
pub use preprocess::{
    extract_nouns, extract_nouns_by, normalize_guess, preprocess_corpus, preprocess_guess_sequence, propagate_guesses,
    spell_correct, Preprocessed,
};
pub use split::{split_corpus, split_indices, SplitRatios};

/// A point in normalized canvas units, `[x, y]` with y pointing down.
pub type Point = [f64; 2];

/// One pen-down trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Stroke {
    pub points: Vec<Point>,
}

impl Stroke {
    pub fn new(points: Vec<Point>) -> Self {
        Stroke { points }
    }
}

/// The strokes of one sketch in drawing order.
#[derive(Debug, Clone, PartialEq)]
pub struct StrokeSequence {
    pub sketch_id: String,
    pub category: String,
    pub strokes: Vec<Stroke>,
}

impl StrokeSequence {
    pub fn len(&self) -> usize {
        self.strokes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strokes.is_empty()
    }

    /// The cumulative prefix made of the first `t` strokes.
    pub fn prefix(&self, t: usize) -> &[Stroke] {
        &self.strokes[..t.min(self.strokes.len())]
    }
}

/// Per-stroke guesses of one subject; `""` means no guess at that step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuessSequence {
    pub sketch_id: String,
    pub subject_id: String,
    pub guesses: Vec<String>,
}

impl GuessSequence {
    pub fn len(&self) -> usize {
        self.guesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.guesses.is_empty()
    }

    /// Zero-based index of the first non-empty guess.
    pub fn first_guess_index(&self) -> Option<usize> {
        self.guesses.iter().position(|g| !g.is_empty())
    }

    /// Number of leading no-guess steps; the binary guess/no-guess target is
    /// `0^k 1^(N-k)` for preprocessed sequences.
    pub fn no_guess_prefix_len(&self) -> usize {
        self.first_guess_index().unwrap_or(self.guesses.len())
    }

    /// Per-step guess indicator (true once a guess is present).
    pub fn guess_mask(&self) -> Vec<bool> {
        self.guesses.iter().map(|g| !g.is_empty()).collect()
    }
}

/// A sketch paired with one subject's guesses.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub sketch: StrokeSequence,
    pub guesses: GuessSequence,
}

impl Record {
    pub fn id(&self) -> &str {
        &self.sketch.sketch_id
    }

    pub fn category(&self) -> &str {
        &self.sketch.category
    }

    pub fn len(&self) -> usize {
        self.sketch.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sketch.is_empty()
    }
}

/// An ordered collection of records and the category vocabulary they use.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    records: Vec<Record>,
    categories: BTreeSet<String>,
}

impl Corpus {
    pub fn new(records: Vec<Record>) -> Self {
        let categories = records.iter().map(|r| r.sketch.category.clone()).collect();
        Corpus { records, categories }
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn into_records(self) -> Vec<Record> {
        self.records
    }

    pub fn categories(&self) -> &BTreeSet<String> {
        &self.categories
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.id() == id)
    }

    pub fn push(&mut self, record: Record) {
        self.categories.insert(record.sketch.category.clone());
        self.records.push(record);
    }

    /// Records whose category matches, in corpus order.
    pub fn by_category<'a>(&'a self, category: &'a str) -> impl Iterator<Item = &'a Record> + 'a {
        self.records.iter().filter(move |r| r.category() == category)
    }
}

impl FromIterator<Record> for Corpus {
    fn from_iter<T: IntoIterator<Item = Record>>(iter: T) -> Self {
        Corpus::new(iter.into_iter().collect())
    }
}
