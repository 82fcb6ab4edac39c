//! Lexical resources: embeddings, taxonomy, and answer matching.

mod criteria;
mod embedding;
mod lexicon;
mod taxonomy;

pub use criteria::{accuracy_by_criteria, match_guess, tokens, CriteriaSet, Criterion, MatchOutcome, DEFAULT_WUP_THRESHOLD};
pub use embedding::{cosine_distance, Candidates, EmbeddingTable, Neighbor, DEFAULT_NO_GUESS_SEED};
pub use lexicon::{Lexicon, PluralMap, PosDictionary, PosTag, SpellDictionary};
pub use taxonomy::{Taxonomy, DEFAULT_ROOT};

pub(crate) use embedding::{dot, norm};
