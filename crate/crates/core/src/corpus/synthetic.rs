//! Seeded generators for the bundled demo data.
//!
//! The checked-in files under `data/` are produced by these functions (see
//! the `generate_fixtures` example), so tests can regenerate and compare.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Corpus, GuessSequence, Record, Stroke, StrokeSequence};
use crate::error::Result;
use crate::lexnet::{norm, EmbeddingTable, Taxonomy};

pub const MINI_CORPUS_SEED: u64 = 2017;
pub const SEPARABLE_CORPUS_SEED: u64 = 1;
pub const RAW_FIXTURE_SEED: u64 = 30;
pub const EMBEDDING_SEED: u64 = 500;
pub const EMBEDDING_DIM: usize = 16;

/// Categories of the bundled data.
pub const CATEGORIES: [&str; 8] = ["bicycle", "cat", "cup", "giraffe", "house", "rainbow", "revolver", "tree"];

/// Guesses a subject plausibly walks through, ending at the right answer.
pub fn guess_ladder(category: &str) -> [&'static str; 4] {
    match category {
        "bicycle" => ["wheel", "car", "bike", "bicycle"],
        "cat" => ["dog", "tiger", "lion", "cat"],
        "cup" => ["glass", "bowl", "mug", "cup"],
        "giraffe" => ["horse", "deer", "camel", "giraffe"],
        "house" => ["box", "hut", "building", "house"],
        "rainbow" => ["bridge", "arch", "arc", "rainbow"],
        "revolver" => ["hammer", "gun", "pistol", "revolver"],
        "tree" => ["bush", "plant", "broccoli", "tree"],
        _ => ["", "", "", ""],
    }
}

fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

fn random_stroke(rng: &mut ChaCha8Rng) -> Stroke {
    let n = rng.random_range(2..=4);
    let mut p = [rng.random_range(0.05..0.95), rng.random_range(0.05..0.95)];
    let mut pts = vec![p];
    for _ in 1..n {
        p = [
            clamp01(p[0] + rng.random_range(-0.35..0.35)),
            clamp01(p[1] + rng.random_range(-0.35..0.35)),
        ];
        pts.push(p);
    }
    Stroke::new(pts)
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn rounded(s: Stroke) -> Stroke {
    Stroke::new(s.points.into_iter().map(|[x, y]| [round3(x), round3(y)]).collect())
}

/// Template strokes shared by every sketch of a category.
fn category_template(category: &str) -> Vec<Stroke> {
    let seed = category.bytes().fold(17u64, |h, b| h.wrapping_mul(31).wrapping_add(u64::from(b)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..6).map(|_| random_stroke(&mut rng)).collect()
}

fn jittered(template: &[Stroke], n: usize, rng: &mut ChaCha8Rng) -> Vec<Stroke> {
    template[..n]
        .iter()
        .map(|s| {
            rounded(Stroke::new(
                s.points
                    .iter()
                    .map(|&[x, y]| {
                        [
                            clamp01(x + rng.random_range(-0.03..0.03)),
                            clamp01(y + rng.random_range(-0.03..0.03)),
                        ]
                    })
                    .collect(),
            ))
        })
        .collect()
}

/// Guess steps for `n` strokes with `blank` leading no-guess steps and the
/// last `unique` ladder entries spread over the rest in order.
fn guess_runs(n: usize, blank: usize, ladder: &[&str], unique: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let steps = n - blank;
    let mut runs = vec![1usize; unique];
    for _ in 0..steps - unique {
        let i = rng.random_range(0..unique);
        runs[i] += 1;
    }
    let words = &ladder[ladder.len() - unique..];
    let mut out = vec![String::new(); blank];
    for (w, r) in words.iter().zip(runs) {
        out.extend(std::iter::repeat_n(w.to_string(), r));
    }
    out
}

fn record(id: String, category: &str, subject: String, strokes: Vec<Stroke>, guesses: Vec<String>) -> Record {
    Record {
        sketch: StrokeSequence {
            sketch_id: id.clone(),
            category: category.to_string(),
            strokes,
        },
        guesses: GuessSequence {
            sketch_id: id,
            subject_id: subject,
            guesses,
        },
    }
}

/// 40 preprocessed records, five per category, with category-consistent
/// stroke templates.
pub fn mini_corpus(seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    for (c, category) in CATEGORIES.iter().enumerate() {
        let template = category_template(category);
        let ladder = guess_ladder(category);
        for j in 0..5 {
            let n = rng.random_range(4..=6);
            let unique = rng.random_range(1..=3.min(n));
            let blank = rng.random_range(0..=n - unique);
            let strokes = jittered(&template, n, &mut rng);
            let guesses = guess_runs(n, blank, &ladder, unique, &mut rng);
            records.push(record(
                format!("mini-{category}-{j}"),
                category,
                format!("u{:02}", (c * 5 + j) % 13),
                strokes,
                guesses,
            ));
        }
    }
    Corpus::new(records)
}

/// Unique-guess count for sequence `i` of the separable corpus: ten with
/// one guess, four with two, three with three, three with four.
pub fn separable_unique_guesses(i: usize) -> usize {
    match i {
        0..=9 => 1,
        10..=13 => 2,
        14..=16 => 3,
        _ => 4,
    }
}

/// 20 preprocessed sequences with random (hence mutually distinct)
/// strokes, so every sequence can be memorized.
pub fn separable_corpus(seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    for i in 0..20 {
        let category = CATEGORIES[i % CATEGORIES.len()];
        let unique = separable_unique_guesses(i);
        let blank = rng.random_range(0..=3);
        let n = (blank + unique + rng.random_range(0..=2)).max(3);
        let strokes = (0..n).map(|_| rounded(random_stroke(&mut rng))).collect();
        let guesses = guess_runs(n, blank, &guess_ladder(category), unique, &mut rng);
        records.push(record(format!("sep-{i:02}"), category, format!("u{i:02}"), strokes, guesses));
    }
    Corpus::new(records)
}

/// Raw (unnormalized) guesses of the 30-sequence preprocessing fixture,
/// with their ground-truth categories.
pub const RAW_GUESSES: [(&str, &[&str]); 30] = [
    ("cat", &["", "", "cat", "", ""]),
    ("rainbow", &["", "Rainbow"]),
    ("cup", &["", "", "", ""]),
    ("rainbow", &["", "pot of gold at the end of the rainbow", "", "RAINBOW"]),
    ("giraffe", &["girafe", "", "Giraffe"]),
    ("giraffe", &["", "a big Girafe!", ""]),
    ("cat", &["DOG", "", "cat", ""]),
    ("bicycle", &["", "", "", "very fast"]),
    ("revolver", &["", "revolvr", "gun", ""]),
    ("house", &["  ", "", ""]),
    ("house", &["", "housse", "", "house"]),
    ("tree", &["", "", "tree?", ""]),
    ("bicycle", &["Bicycle wheel", "", ""]),
    ("cup", &["", "xqzzy", ""]),
    ("cup", &["cup", "mug", "", "CUP"]),
    ("revolver", &["", "", "", "", "pistol"]),
    ("cat", &["", "the cat", ""]),
    ("cat", &["", "", "kat", ""]),
    ("cat", &["", "lion", "tiger", "cat"]),
    ("tree", &["", "", "", ""]),
    ("giraffe", &["", "Deer", "", "horse", "giraffe"]),
    ("house", &["", "a house with a tree", ""]),
    ("rainbow", &["", "", "rainbow-ish", ""]),
    ("tree", &["broccoli", "", "tree", ""]),
    ("revolver", &["", "", "", "", "", "", "REVOLVER"]),
    ("rainbow", &["", "bridge", "arc", "rainbow"]),
    ("house", &["", "box", "", "house"]),
    ("cup", &["Glass", "", "", ""]),
    ("bicycle", &["", "", "bycicle", ""]),
    ("tree", &["", "", "", "plant", "bush", ""]),
];

/// The raw 30-record fixture used to pin the preprocessing pipeline.
pub fn raw_fixture(seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RAW_GUESSES
        .iter()
        .enumerate()
        .map(|(i, (category, guesses))| {
            let template = category_template(category);
            let n = guesses.len();
            let mut strokes = jittered(&template, n.min(template.len()), &mut rng);
            while strokes.len() < n {
                strokes.push(rounded(random_stroke(&mut rng)));
            }
            record(
                format!("raw-{i:02}"),
                category,
                format!("s{:02}", i % 7),
                strokes,
                guesses.iter().map(|g| g.to_string()).collect(),
            )
        })
        .collect()
}

/// Embeddings where each word is a noisy copy of its hypernym's vector, so
/// taxonomy neighbours are also embedding neighbours. Values are rounded
/// to four decimals to keep the text file compact.
pub fn hierarchical_embeddings(t: &Taxonomy, dim: usize, seed: u64) -> Result<EmbeddingTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: Vec<&String> = t.nodes().iter().collect();
    nodes.sort_by_key(|w| (t.depth(w), w.as_str()));
    let mut vectors: std::collections::HashMap<&str, Vec<f64>> = std::collections::HashMap::new();
    let mut rows = Vec::new();
    for w in nodes {
        let noise: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let nn = norm(&noise);
        let v: Vec<f64> = match t.parent(w).and_then(|p| vectors.get(p)) {
            Some(pv) => pv.iter().zip(&noise).map(|(a, b)| 0.8 * a + 0.6 * b / nn).collect(),
            None => noise.iter().map(|b| b / nn).collect(),
        };
        let n = norm(&v);
        let v: Vec<f64> = v.iter().map(|x| (x / n * 1e4).round() / 1e4).collect();
        vectors.insert(w.as_str(), v.clone());
        rows.push((w.clone(), v));
    }
    EmbeddingTable::from_rows(dim, rows, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::guess_count_histogram;

    #[test]
    fn mini_corpus_shape() {
        let c = mini_corpus(MINI_CORPUS_SEED);
        assert_eq!(c.len(), 40);
        assert_eq!(c.categories().len(), 8);
        assert_eq!(c, mini_corpus(MINI_CORPUS_SEED));
    }

    #[test]
    fn separable_corpus_buckets() {
        let c = separable_corpus(SEPARABLE_CORPUS_SEED);
        assert_eq!(c.len(), 20);
        let h = guess_count_histogram(&c);
        assert_eq!((h.one, h.two, h.three, h.four_plus), (10, 4, 3, 3));
    }

    #[test]
    fn raw_fixture_lengths() {
        let c = raw_fixture(RAW_FIXTURE_SEED);
        assert_eq!(c.len(), 30);
        for r in c.records() {
            assert_eq!(r.sketch.len(), r.guesses.len());
        }
    }
}
