//! Regenerates the bundled data under `data/` from the seeded generators.
//!
//! ```text
//! cargo run --example generate_fixtures [-- <data-dir>]
//! ```
//!
//! The lexicon text files (taxonomy, synsets, POS, spelling, plurals) are
//! hand-written; everything else is derived from them and from fixed seeds.

use std::path::PathBuf;

use sketchqa::corpus::synthetic::{
    hierarchical_embeddings, mini_corpus, raw_fixture, separable_corpus, EMBEDDING_DIM, EMBEDDING_SEED,
    MINI_CORPUS_SEED, RAW_FIXTURE_SEED, SEPARABLE_CORPUS_SEED,
};
use sketchqa::corpus::{preprocess_corpus, write_corpus};
use sketchqa::error::write_string;
use sketchqa::lexnet::Lexicon;

fn main() -> sketchqa::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"));

    let mut lex = Lexicon::load_dir(&dir.join("lexicon"))?;
    let table = hierarchical_embeddings(&lex.taxonomy, EMBEDDING_DIM, EMBEDDING_SEED)?;
    table.save(&dir.join("lexicon/embeddings.txt"))?;
    lex.embeddings = Some(table);
    println!("embeddings: {} words x {} dims", lex.embeddings()?.len(), EMBEDDING_DIM);

    let mini = mini_corpus(MINI_CORPUS_SEED);
    write_string(&dir.join("mini_corpus.jsonl"), &write_corpus(&mini))?;
    let sep = separable_corpus(SEPARABLE_CORPUS_SEED);
    write_string(&dir.join("separable_corpus.jsonl"), &write_corpus(&sep))?;
    println!("mini corpus: {} records, separable corpus: {} records", mini.len(), sep.len());

    let raw = raw_fixture(RAW_FIXTURE_SEED);
    write_string(&dir.join("fixtures/raw_30.jsonl"), &write_corpus(&raw))?;
    let (clean, removed) = preprocess_corpus(&raw, &lex);
    write_string(&dir.join("fixtures/golden_30.jsonl"), &write_corpus(&clean))?;
    println!("raw fixture: {} records, {} kept, removed {:?}", raw.len(), clean.len(), removed);
    Ok(())
}
