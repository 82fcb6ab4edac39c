use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use super::embedding::EmbeddingTable;
use super::taxonomy::Taxonomy;
use crate::error::{read_to_string, Error, Result};

/// Part-of-speech tags known to the noun filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosTag {
    Noun,
    Other,
}

/// Word to tag lookup, loaded from `word<TAB>TAG` lines.
#[derive(Debug, Clone, Default)]
pub struct PosDictionary {
    tags: HashMap<String, PosTag>,
}

impl PosDictionary {
    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, PosTag)>,
        S: Into<String>,
    {
        PosDictionary {
            tags: pairs.into_iter().map(|(w, t)| (w.into(), t)).collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut tags = HashMap::new();
        for (i, (word, tag)) in tab_pairs(text)?.into_iter().enumerate() {
            let tag = match tag.as_str() {
                "NOUN" => PosTag::Noun,
                "OTHER" => PosTag::Other,
                other => {
                    return Err(Error::Malformed {
                        line: i + 1,
                        message: format!("unknown tag {other:?}"),
                    })
                }
            };
            tags.insert(word, tag);
        }
        Ok(PosDictionary { tags })
    }

    pub fn tag(&self, word: &str) -> Option<PosTag> {
        self.tags.get(word).copied()
    }

    pub fn is_noun(&self, word: &str) -> bool {
        self.tag(word) == Some(PosTag::Noun)
    }
}

/// The spell-check word list.
#[derive(Debug, Clone, Default)]
pub struct SpellDictionary {
    words: BTreeSet<String>,
}

impl SpellDictionary {
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        SpellDictionary {
            words: words.into_iter().map(Into::into).collect(),
        }
    }

    pub fn parse(text: &str) -> Self {
        Self::from_words(text.lines().map(str::trim).filter(|l| !l.is_empty()))
    }

    /// Adds every token of each category name, so ground-truth words are
    /// never "corrected" away.
    pub fn extend_with_categories<'a>(&mut self, categories: impl IntoIterator<Item = &'a str>) {
        for c in categories {
            for t in c.split_whitespace() {
                self.words.insert(t.to_lowercase());
            }
        }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Words in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

/// Singular to plural forms, loaded from `singular<TAB>plural` lines.
#[derive(Debug, Clone, Default)]
pub struct PluralMap {
    plurals: BTreeMap<String, String>,
}

impl PluralMap {
    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        PluralMap {
            plurals: pairs.into_iter().map(|(a, b)| (a.into(), b.into())).collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(PluralMap {
            plurals: tab_pairs(text)?.into_iter().collect(),
        })
    }

    pub fn plural(&self, word: &str) -> Option<&str> {
        self.plurals.get(word).map(String::as_str)
    }
}

fn tab_pairs(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let mut cols = l.split('\t');
            match (cols.next(), cols.next(), cols.next()) {
                (Some(a), Some(b), None) if !a.trim().is_empty() && !b.trim().is_empty() => {
                    Ok((a.trim().to_string(), b.trim().to_string()))
                }
                _ => Err(Error::Malformed {
                    line: i + 1,
                    message: "expected two tab-separated columns".into(),
                }),
            }
        })
        .collect()
}

/// Every lexical resource the pipeline consults.
///
/// A lexicon directory holds `taxonomy.tsv`, `synsets.tsv`, `pos.tsv`,
/// `plurals.tsv`, `words.txt` and, optionally, `embeddings.txt`.
#[derive(Debug, Clone)]
pub struct Lexicon {
    pub embeddings: Option<EmbeddingTable>,
    pub taxonomy: Taxonomy,
    pub pos: PosDictionary,
    pub spell: SpellDictionary,
    pub plurals: PluralMap,
}

impl Lexicon {
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let optional = |name: &str| -> Result<Option<String>> {
            let p = dir.join(name);
            if p.exists() {
                read_to_string(&p).map(Some)
            } else {
                Ok(None)
            }
        };
        let taxonomy = Taxonomy::parse(
            &read_to_string(&dir.join("taxonomy.tsv"))?,
            optional("synsets.tsv")?.as_deref(),
        )?;
        let pos = PosDictionary::parse(&optional("pos.tsv")?.unwrap_or_default())?;
        let spell = SpellDictionary::parse(&optional("words.txt")?.unwrap_or_default());
        let plurals = PluralMap::parse(&optional("plurals.tsv")?.unwrap_or_default())?;
        let embeddings = optional("embeddings.txt")?
            .map(|t| EmbeddingTable::parse(&t))
            .transpose()?;
        Ok(Lexicon {
            embeddings,
            taxonomy,
            pos,
            spell,
            plurals,
        })
    }

    /// The embedding table, or an error naming what is missing.
    pub fn embeddings(&self) -> Result<&EmbeddingTable> {
        self.embeddings
            .as_ref()
            .ok_or_else(|| Error::NotFound("embeddings.txt in lexicon directory".into()))
    }

    pub fn synonyms(&self, word: &str) -> Vec<&str> {
        self.taxonomy.synonyms(word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pos_parse() {
        let p = PosDictionary::parse("cat\tNOUN\nvery\tOTHER\n").unwrap();
        assert!(p.is_noun("cat"));
        assert!(!p.is_noun("very"));
        assert_eq!(p.tag("dog"), None);
        assert!(PosDictionary::parse("cat\tVERB").is_err());
    }

    #[test]
    fn categories_extend_spelling() {
        let mut d = SpellDictionary::parse("cat\n");
        d.extend_with_categories(["Person Walking"]);
        assert!(d.contains("walking"));
        assert_eq!(d.len(), 3);
    }

    #[test]
    fn plural_parse() {
        let m = PluralMap::parse("pant\tpants\n").unwrap();
        assert_eq!(m.plural("pant"), Some("pants"));
        assert!(PluralMap::parse("pant pants").is_err());
    }
}
