//! Sequence-level accuracy@k, transition localization and Turing-test
//! reporting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexnet::{Candidates, EmbeddingTable};
use crate::report::Report;
use crate::stats::{likert_mode, wilcoxon_signed_rank, GuesserType, RatingRecord, WilcoxonResult};
use crate::NO_GUESS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    /// Only steps whose ground truth is a guess word are scored.
    #[default]
    GuessPortion,
    /// Every step is scored; no-guess steps need "#" in the top k.
    Full,
}

impl EvalMode {
    pub fn label(self) -> &'static str {
        match self {
            EvalMode::GuessPortion => "guess-portion",
            EvalMode::Full => "full",
        }
    }
}

impl std::str::FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "guess-portion" | "guess" => Ok(EvalMode::GuessPortion),
            "full" => Ok(EvalMode::Full),
            other => Err(Error::invalid(format!("unknown eval mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub k_values: Vec<usize>,
    pub deltas: Vec<usize>,
    pub mode: EvalMode,
    /// Average over steps instead of over sequences (diagnostics only).
    #[serde(default)]
    pub step_weighted: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            k_values: vec![1, 3, 5],
            deltas: vec![0, 1, 2],
            mode: EvalMode::GuessPortion,
            step_weighted: false,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_values.is_empty() || self.k_values.contains(&0) {
            return Err(Error::invalid("k values must be positive"));
        }
        Ok(())
    }

    pub fn max_k(&self) -> usize {
        self.k_values.iter().copied().max().unwrap_or(1)
    }
}

/// Window width `2δ + 1` to δ.
pub fn window_to_delta(width: usize) -> Result<usize> {
    if width % 2 == 0 {
        return Err(Error::invalid(format!("window width {width} must be odd")));
    }
    Ok(width / 2)
}

/// True iff `truth` is among the `k` nearest entries to `pred`. Words
/// missing from the table never match.
pub fn correct_match(pred: &[f64], truth: &str, k: usize, table: &EmbeddingTable) -> Result<bool> {
    if !table.contains(truth) {
        return Ok(false);
    }
    let k = k.min(table.len());
    Ok(table.knn(pred, k)?.iter().any(|n| n.word == truth))
}

/// The `k` nearest words to `pred`, best first.
pub fn ranked_words(table: &EmbeddingTable, pred: &[f64], k: usize, candidates: Candidates) -> Result<Vec<String>> {
    let pool = table.len() - usize::from(candidates == Candidates::WordsOnly);
    Ok(table
        .knn_among(pred, k.min(pool), candidates)?
        .into_iter()
        .map(|n| n.word)
        .collect())
}

/// Whether a ranked list answers a ground-truth step within the top `k`.
/// A blank truth is answered by "#".
pub fn step_correct(ranked: &[String], truth: &str, k: usize) -> bool {
    let target = if truth.is_empty() { NO_GUESS } else { truth };
    ranked.iter().take(k).any(|w| w == target)
}

/// Per-`k` hit counts and number of scored steps for one sequence.
fn sequence_hits(ranked: &[Vec<String>], truth: &[String], k_values: &[usize], mode: EvalMode) -> Result<(Vec<usize>, usize)> {
    if ranked.len() != truth.len() {
        return Err(Error::LengthMismatch {
            what: format!("{} predicted steps for {} ground-truth steps", ranked.len(), truth.len()),
        });
    }
    let mut hits = vec![0; k_values.len()];
    let mut scored = 0;
    for (r, t) in ranked.iter().zip(truth) {
        if mode == EvalMode::GuessPortion && t.is_empty() {
            continue;
        }
        scored += 1;
        for (h, &k) in hits.iter_mut().zip(k_values) {
            *h += usize::from(step_correct(r, t, k));
        }
    }
    Ok((hits, scored))
}

/// Accuracy@k for each of `cfg.k_values`: per-sequence fraction of scored
/// steps, then the unweighted mean over sequences. Sequences without a
/// scored step are left out.
pub fn sequence_accuracy(ranked: &[Vec<Vec<String>>], truths: &[Vec<String>], cfg: &EvalConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if ranked.len() != truths.len() {
        return Err(Error::LengthMismatch {
            what: format!("{} predicted sequences for {} ground-truth sequences", ranked.len(), truths.len()),
        });
    }
    let mut sums = vec![0.0; cfg.k_values.len()];
    let mut denom = 0.0;
    for (r, t) in ranked.iter().zip(truths) {
        let (hits, scored) = sequence_hits(r, t, &cfg.k_values, cfg.mode)?;
        if scored == 0 {
            continue;
        }
        if cfg.step_weighted {
            for (s, h) in sums.iter_mut().zip(&hits) {
                *s += *h as f64;
            }
            denom += scored as f64;
        } else {
            for (s, h) in sums.iter_mut().zip(&hits) {
                *s += *h as f64 / scored as f64;
            }
            denom += 1.0;
        }
    }
    if denom == 0.0 {
        return Err(Error::invalid("no scorable steps"));
    }
    Ok(sums.into_iter().map(|s| s / denom).collect())
}

/// Fraction of predicted transition steps within `delta` of the truth.
pub fn localization_accuracy(preds: &[usize], truths: &[usize], delta: usize) -> Result<f64> {
    if preds.len() != truths.len() {
        return Err(Error::LengthMismatch {
            what: format!("{} predicted transitions for {} ground-truth ones", preds.len(), truths.len()),
        });
    }
    if preds.is_empty() {
        return Err(Error::invalid("no transitions to score"));
    }
    let hits = preds.iter().zip(truths).filter(|(p, g)| p.abs_diff(**g) <= delta).count();
    Ok(hits as f64 / preds.len() as f64)
}

/// Accuracy rows `accuracy<TAB>mode<TAB>k<TAB>value`.
pub fn accuracy_report(ranked: &[Vec<Vec<String>>], truths: &[Vec<String>], cfg: &EvalConfig) -> Result<Report> {
    let acc = sequence_accuracy(ranked, truths, cfg)?;
    let mut r = Report::new();
    for (k, a) in cfg.k_values.iter().zip(acc) {
        r.push("accuracy", [cfg.mode.label().to_string(), k.to_string()], a);
    }
    Ok(r)
}

/// Localization rows `localization<TAB>phase1<TAB>delta<TAB>value`.
pub fn localization_report(preds: &[usize], truths: &[usize], deltas: &[usize]) -> Result<Report> {
    let mut r = Report::new();
    for &d in deltas {
        r.push("localization", ["phase1".to_string(), d.to_string()], localization_accuracy(preds, truths, d)?);
    }
    Ok(r)
}

/// Checks that accuracy never drops as k grows and localization never drops
/// as δ grows, within each mode.
pub fn check_monotone(report: &Report) -> Result<()> {
    let mut series: BTreeMap<(&str, &str), Vec<(usize, f64)>> = BTreeMap::new();
    for row in &report.rows {
        if let [mode, key] = row.keys.as_slice() {
            if let Ok(x) = key.parse::<usize>() {
                series.entry((&row.metric, mode)).or_default().push((x, row.value));
            }
        }
    }
    for ((metric, mode), mut pts) in series {
        pts.sort_by_key(|p| p.0);
        if let Some(w) = pts.windows(2).find(|w| w[1].1 < w[0].1) {
            return Err(Error::invalid(format!(
                "{metric} ({mode}) decreases from {} at {} to {} at {}",
                w[0].1, w[0].0, w[1].1, w[1].0
            )));
        }
    }
    Ok(())
}

/// Per-sequence modes, rating histograms and the signed-rank test between
/// human and model modes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuringReport {
    /// `(sequence, human mode, model mode)`, sorted by sequence id.
    pub modes: Vec<(String, i8, i8)>,
    /// Counts of ratings -2..=2 for each guesser type.
    pub human_histogram: [usize; 5],
    pub model_histogram: [usize; 5],
    pub wilcoxon: WilcoxonResult,
}

impl TuringReport {
    pub fn to_report(&self) -> Report {
        let mut r = Report::new();
        for (name, h) in [("human", &self.human_histogram), ("model", &self.model_histogram)] {
            for (i, c) in h.iter().enumerate() {
                r.push("rating_histogram", [name.to_string(), (i as i32 - 2).to_string()], *c as f64);
            }
        }
        let w = &self.wilcoxon;
        r.push("wilcoxon", ["n"], w.n as f64);
        r.push("wilcoxon", ["W"], w.statistic);
        r.push("wilcoxon", ["Z"], w.z);
        r.push("wilcoxon", ["p"], w.p);
        r
    }
}

pub fn turing_report(records: &[RatingRecord]) -> Result<TuringReport> {
    let mut by_seq: BTreeMap<&str, (Vec<i8>, Vec<i8>)> = BTreeMap::new();
    let mut human_histogram = [0; 5];
    let mut model_histogram = [0; 5];
    for rec in records {
        let entry = by_seq.entry(&rec.sequence_id).or_default();
        let (list, hist) = match rec.guesser {
            GuesserType::Human => (&mut entry.0, &mut human_histogram),
            GuesserType::Model => (&mut entry.1, &mut model_histogram),
        };
        for &r in &rec.ratings {
            if !(-2..=2).contains(&r) {
                return Err(Error::invalid(format!("rating {r} outside -2..=2")));
            }
            hist[(r + 2) as usize] += 1;
            list.push(r);
        }
    }
    if by_seq.is_empty() {
        return Err(Error::invalid("no rating records"));
    }
    let mut modes = Vec::with_capacity(by_seq.len());
    for (seq, (h, m)) in by_seq {
        if h.is_empty() || m.is_empty() {
            return Err(Error::invalid(format!("sequence {seq:?} lacks ratings for both guesser types")));
        }
        modes.push((seq.to_string(), likert_mode(&h)?, likert_mode(&m)?));
    }
    let pairs: Vec<(f64, f64)> = modes.iter().map(|(_, h, m)| (f64::from(*h), f64::from(*m))).collect();
    Ok(TuringReport {
        wilcoxon: wilcoxon_signed_rank(&pairs)?,
        modes,
        human_histogram,
        model_histogram,
    })
}
