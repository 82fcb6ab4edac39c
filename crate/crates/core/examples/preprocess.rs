//! Normalizes the raw 30-record fixture and shows each guess sequence
//! before and after: lowercasing, noun extraction, spelling correction and
//! forward propagation.
//!
//! ```text
//! cargo run --example preprocess
//! ```

use std::path::Path;

use sketchqa::corpus::{extract_nouns, normalize_guess, parse_corpus, preprocess_guess_sequence, spell_correct};
use sketchqa::lexnet::Lexicon;

fn main() -> sketchqa::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let lex = Lexicon::load_dir(&data.join("lexicon"))?;

    for raw in ["Pot of GOLD at the end of the rainbow", "a house with a tree", "kat", "bycicle"] {
        println!(
            "{raw:<40} nouns {:<24} normalized {:?}",
            format!("{:?}", extract_nouns(&raw.to_lowercase(), &lex.pos)),
            normalize_guess(raw, &lex)
        );
    }
    println!("spell_correct(\"housse\") = {}", spell_correct("housse", &lex.spell)?);
    println!();

    let raw = parse_corpus(&data.join("fixtures/raw_30.jsonl"), true)?.corpus;
    for r in raw.records().iter().take(8) {
        let out = preprocess_guess_sequence(&r.guesses, &lex);
        println!("{} {:?}", r.id(), r.guesses.guesses);
        match out.kept() {
            Some(g) => println!("{:>6} -> {:?}", "", g.guesses),
            None => println!("{:>6} -> removed", ""),
        }
    }
    Ok(())
}
