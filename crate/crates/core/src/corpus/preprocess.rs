use super::{Corpus, GuessSequence, Record};
use crate::error::{Error, Result};
use crate::lexnet::{Lexicon, PosDictionary, SpellDictionary};

/// Largest edit distance a spelling correction may bridge.
pub const MAX_CORRECTION_DISTANCE: usize = 2;

/// Outcome of cleaning one guess sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Preprocessed {
    Kept(GuessSequence),
    /// Every step was blank; the sequence is dropped.
    Removed,
}

impl Preprocessed {
    pub fn kept(self) -> Option<GuessSequence> {
        match self {
            Preprocessed::Kept(g) => Some(g),
            Preprocessed::Removed => None,
        }
    }
}

/// Lowercases and strips punctuation other than hyphens and apostrophes,
/// collapsing runs of whitespace.
fn fold(raw: &str) -> String {
    let lowered: String = raw
        .to_lowercase()
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c == '-' || c == '\'' {
                c
            } else {
                ' '
            }
        })
        .collect();
    lowered.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Keeps the tokens accepted by `is_noun`, in order. A phrase without any
/// noun is returned unchanged.
pub fn extract_nouns_by(phrase: &str, is_noun: impl Fn(&str) -> bool) -> String {
    let nouns: Vec<&str> = phrase.split_whitespace().filter(|t| is_noun(t)).collect();
    if nouns.is_empty() {
        phrase.split_whitespace().collect::<Vec<_>>().join(" ")
    } else {
        nouns.join(" ")
    }
}

/// [`extract_nouns_by`] with tags taken straight from a POS dictionary.
pub fn extract_nouns(phrase: &str, pos: &PosDictionary) -> String {
    extract_nouns_by(phrase, |t| pos.is_noun(t))
}

/// Replaces an unknown word by its closest dictionary entry.
///
/// Candidates are ranked by Levenshtein distance, then lexicographically;
/// nothing farther than [`MAX_CORRECTION_DISTANCE`] is accepted.
pub fn spell_correct(word: &str, dict: &SpellDictionary) -> Result<String> {
    if dict.is_empty() {
        return Err(Error::invalid("empty spelling dictionary"));
    }
    if dict.contains(word) {
        return Ok(word.to_string());
    }
    let wlen = word.chars().count();
    let mut best: Option<(usize, &str)> = None;
    for cand in dict.iter() {
        // length difference is a lower bound on the distance
        if cand.chars().count().abs_diff(wlen) > MAX_CORRECTION_DISTANCE {
            continue;
        }
        let d = strsim::levenshtein(word, cand);
        // dictionary iterates in lexicographic order, so strict < keeps the
        // smallest word among equal distances
        if d <= MAX_CORRECTION_DISTANCE && best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, cand));
        }
    }
    Ok(best.map_or_else(|| word.to_string(), |(_, w)| w.to_string()))
}

fn correct_or_keep(word: &str, dict: &SpellDictionary) -> String {
    spell_correct(word, dict).unwrap_or_else(|_| word.to_string())
}

/// Cleans a single guess: case folding, noun filtering, spelling.
///
/// Tokens are tagged by the POS entry of their corrected spelling, so a
/// misspelt noun still survives the noun filter and a second pass over the
/// output is a no-op.
pub fn normalize_guess(raw: &str, lex: &Lexicon) -> String {
    let folded = fold(raw);
    if folded.is_empty() {
        return folded;
    }
    let nouns = extract_nouns_by(&folded, |t| lex.pos.is_noun(&correct_or_keep(t, &lex.spell)));
    nouns
        .split_whitespace()
        .map(|t| correct_or_keep(t, &lex.spell))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Forward-fills the last non-blank guess to the end of the sequence.
pub fn propagate_guesses(guesses: &mut [String]) {
    let mut last: Option<String> = None;
    for g in guesses.iter_mut() {
        if g.is_empty() {
            if let Some(prev) = &last {
                g.clone_from(prev);
            }
        } else {
            last = Some(g.clone());
        }
    }
}

/// Runs the full cleaning pipeline on one sequence: lowercase, noun
/// extraction, spelling correction, then propagation.
pub fn preprocess_guess_sequence(g: &GuessSequence, lex: &Lexicon) -> Preprocessed {
    let mut guesses: Vec<String> = g.guesses.iter().map(|raw| normalize_guess(raw, lex)).collect();
    if guesses.iter().all(String::is_empty) {
        return Preprocessed::Removed;
    }
    propagate_guesses(&mut guesses);
    Preprocessed::Kept(GuessSequence {
        sketch_id: g.sketch_id.clone(),
        subject_id: g.subject_id.clone(),
        guesses,
    })
}

/// Preprocesses every record. The spelling dictionary is extended with the
/// corpus categories first. Returns the cleaned corpus and the ids of
/// removed records.
pub fn preprocess_corpus(c: &Corpus, lex: &Lexicon) -> (Corpus, Vec<String>) {
    let mut lex = lex.clone();
    lex.spell
        .extend_with_categories(c.categories().iter().map(String::as_str));
    let mut removed = Vec::new();
    let records = c
        .records()
        .iter()
        .filter_map(|r| match preprocess_guess_sequence(&r.guesses, &lex) {
            Preprocessed::Kept(guesses) => Some(Record {
                sketch: r.sketch.clone(),
                guesses,
            }),
            Preprocessed::Removed => {
                removed.push(r.id().to_string());
                None
            }
        })
        .collect();
    (Corpus::new(records), removed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexnet::{PluralMap, PosTag, Taxonomy};

    fn lex() -> Lexicon {
        let nouns = ["pot", "gold", "end", "rainbow", "cat", "car", "giraffe", "dog"];
        let others = ["of", "at", "the", "very", "fast", "a", "big"];
        let pos = PosDictionary::from_pairs(
            nouns
                .iter()
                .map(|w| (*w, PosTag::Noun))
                .chain(others.iter().map(|w| (*w, PosTag::Other))),
        );
        Lexicon {
            embeddings: None,
            taxonomy: Taxonomy::new::<&str>(&[("cat", "animal")], &[]).unwrap(),
            pos,
            spell: SpellDictionary::from_words(nouns.iter().chain(others.iter()).copied()),
            plurals: PluralMap::default(),
        }
    }

    fn seq(gs: &[&str]) -> GuessSequence {
        GuessSequence {
            sketch_id: "s".into(),
            subject_id: "u".into(),
            guesses: gs.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn propagates_last_guess() {
        let out = preprocess_guess_sequence(&seq(&["", "", "cat", "", ""]), &lex());
        assert_eq!(out.kept().unwrap().guesses, ["", "", "cat", "cat", "cat"]);
    }

    #[test]
    fn folds_case() {
        let out = preprocess_guess_sequence(&seq(&["", "Rainbow"]), &lex());
        assert_eq!(out.kept().unwrap().guesses, ["", "rainbow"]);
    }

    #[test]
    fn removes_all_blank() {
        assert_eq!(preprocess_guess_sequence(&seq(&["", "", "", ""]), &lex()), Preprocessed::Removed);
        assert_eq!(preprocess_guess_sequence(&seq(&[" ", "?!"]), &lex()), Preprocessed::Removed);
    }

    #[test]
    fn noun_extraction() {
        let pos = lex().pos;
        assert_eq!(extract_nouns("pot of gold at the end of the rainbow", &pos), "pot gold end rainbow");
        assert_eq!(extract_nouns("rainbow", &pos), "rainbow");
        assert_eq!(extract_nouns("very fast", &pos), "very fast");
    }

    #[test]
    fn spelling() {
        let d = SpellDictionary::from_words(["giraffe", "rainbow"]);
        assert_eq!(spell_correct("girafe", &d).unwrap(), "giraffe");
        assert_eq!(spell_correct("rainbow", &d).unwrap(), "rainbow");
        assert_eq!(spell_correct("xylophone", &d).unwrap(), "xylophone");
        let d = SpellDictionary::from_words(["cat", "car"]);
        assert_eq!(spell_correct("caz", &d).unwrap(), "car");
        assert!(spell_correct("caz", &SpellDictionary::default()).is_err());
    }

    #[test]
    fn misspelt_noun_survives_noun_filter() {
        assert_eq!(normalize_guess("a big Girafe!", &lex()), "giraffe");
        assert_eq!(normalize_guess("giraffe", &lex()), "giraffe");
    }
}
