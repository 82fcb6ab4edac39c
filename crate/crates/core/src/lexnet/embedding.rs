use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{read_to_string, write_string, Error, Result};
use crate::NO_GUESS;

/// Seed for the synthesized "#" vector when the file header does not carry one.
pub const DEFAULT_NO_GUESS_SEED: u64 = 35;

/// A word-embedding dictionary with the reserved "#" (no guess) entry.
///
/// Rows are kept in file order; lookups go through a hash index. Norms are
/// cached because every retrieval is a cosine scan.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    vectors: Vec<Vec<f64>>,
    norms: Vec<f64>,
    index: HashMap<String, usize>,
    no_guess_seed: u64,
}

/// One retrieval hit: the word and its cosine distance `1 - cos(q, e)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Neighbor {
    pub word: String,
    pub distance: f64,
}

/// Which entries take part in nearest-neighbour retrieval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Candidates {
    /// Every entry, including "#".
    #[default]
    All,
    /// Real words only.
    WordsOnly,
}

impl EmbeddingTable {
    /// Builds a table from `(word, vector)` rows. When "#" is absent it is
    /// synthesized from `no_guess_seed` as a unit vector.
    pub fn from_rows(dim: usize, rows: Vec<(String, Vec<f64>)>, no_guess_seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be positive"));
        }
        let mut table = EmbeddingTable {
            dim,
            words: Vec::with_capacity(rows.len() + 1),
            vectors: Vec::with_capacity(rows.len() + 1),
            norms: Vec::with_capacity(rows.len() + 1),
            index: HashMap::with_capacity(rows.len() + 1),
            no_guess_seed,
        };
        for (word, vector) in rows {
            table.push(word, vector)?;
        }
        if !table.index.contains_key(NO_GUESS) {
            let v = seeded_unit_vector(dim, no_guess_seed);
            table.push(NO_GUESS.to_string(), v)?;
        }
        Ok(table)
    }

    fn push(&mut self, word: String, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("embedding row"));
        }
        if self.index.contains_key(&word) {
            return Err(Error::invalid(format!("duplicate embedding word {word:?}")));
        }
        if word == NO_GUESS && norm(&vector) == 0.0 {
            return Err(Error::invalid("the \"#\" vector must have nonzero norm"));
        }
        self.index.insert(word.clone(), self.words.len());
        self.norms.push(norm(&vector));
        self.words.push(word);
        self.vectors.push(vector);
        Ok(())
    }

    /// Parses the text format: a `<vocab_size> <dim> [seed]` header followed
    /// by `word v1 .. v_dim` rows.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::invalid("empty embedding file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let bad_header = || Error::Malformed {
            line: hline + 1,
            message: "expected header `<vocab_size> <dim> [seed]`".into(),
        };
        if fields.len() < 2 || fields.len() > 3 {
            return Err(bad_header());
        }
        let declared: usize = fields[0].parse().map_err(|_| bad_header())?;
        let dim: usize = fields[1].parse().map_err(|_| bad_header())?;
        let seed = match fields.get(2) {
            Some(s) => s.parse().map_err(|_| bad_header())?,
            None => DEFAULT_NO_GUESS_SEED,
        };

        let mut rows = Vec::with_capacity(declared);
        for (i, line) in lines {
            let mut parts = line.split_whitespace();
            let word = parts.next().unwrap_or_default().to_string();
            let values = parts
                .map(|p| p.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Malformed {
                    line: i + 1,
                    message: format!("bad float: {e}"),
                })?;
            if values.len() != dim {
                return Err(Error::Malformed {
                    line: i + 1,
                    message: format!("row for {word:?} has {} values, header declares {dim}", values.len()),
                });
            }
            rows.push((word, values));
        }
        if rows.len() != declared {
            return Err(Error::invalid(format!(
                "header declares {declared} rows, file has {}",
                rows.len()
            )));
        }
        Self::from_rows(dim, rows, seed)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?)
    }

    /// Serializes back to the text format, "#" included.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.words.len(), self.dim, self.no_guess_seed);
        for (w, v) in self.words.iter().zip(&self.vectors) {
            out.push_str(w);
            for x in v {
                let _ = write!(out, " {x}");
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_text())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of entries, "#" included.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn word(&self, idx: usize) -> &str {
        &self.words[idx]
    }

    pub fn vector(&self, idx: usize) -> &[f64] {
        &self.vectors[idx]
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.vectors[i].as_slice())
    }

    pub fn no_guess_index(&self) -> usize {
        self.index[NO_GUESS]
    }

    pub fn no_guess_vector(&self) -> &[f64] {
        self.vector(self.no_guess_index())
    }

    /// The `k` entries closest to `query` in cosine distance, ties broken by
    /// word order.
    pub fn knn(&self, query: &[f64], k: usize) -> Result<Vec<Neighbor>> {
        self.knn_among(query, k, Candidates::All)
    }

    pub fn knn_among(&self, query: &[f64], k: usize, candidates: Candidates) -> Result<Vec<Neighbor>> {
        if query.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: query.len(),
            });
        }
        if query.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("query vector"));
        }
        let qn = norm(query);
        if qn == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let skip = match candidates {
            Candidates::All => None,
            Candidates::WordsOnly => Some(self.no_guess_index()),
        };
        let pool = self.len() - usize::from(skip.is_some());
        if k == 0 || k > pool {
            return Err(Error::invalid(format!("k = {k} outside 1..={pool}")));
        }
        let mut scored: Vec<(f64, usize)> = (0..self.len())
            .filter(|&i| Some(i) != skip)
            .map(|i| (self.distance_at(query, qn, i), i))
            .collect();
        let by_rank = |a: &(f64, usize), b: &(f64, usize)| {
            a.0.total_cmp(&b.0)
                .then_with(|| self.words[a.1].cmp(&self.words[b.1]))
        };
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, by_rank);
            scored.truncate(k);
        }
        scored.sort_by(by_rank);
        Ok(scored
            .into_iter()
            .map(|(distance, i)| Neighbor {
                word: self.words[i].clone(),
                distance,
            })
            .collect())
    }

    fn distance_at(&self, query: &[f64], qn: f64, i: usize) -> f64 {
        let en = self.norms[i];
        if en == 0.0 {
            return 1.0;
        }
        // rounding can push the cosine just past ±1
        (1.0 - dot(query, &self.vectors[i]) / (qn * en)).clamp(0.0, 2.0)
    }
}

pub(crate) fn seeded_unit_vector(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine distance `1 - cos(a, b)`, clamped to `[0, 2]`; errors on a zero-norm input.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((1.0 - dot(a, b) / (na * nb)).clamp(0.0, 2.0))
}
