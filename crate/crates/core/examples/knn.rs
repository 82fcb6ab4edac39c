//! Nearest-neighbour retrieval in the bundled embedding table, including
//! the reserved "#" no-guess vector.
//!
//! ```text
//! cargo run --example knn [-- <word> <k>]
//! ```

use std::path::Path;

use sketchqa::lexnet::{Candidates, Lexicon};
use sketchqa::NO_GUESS;

fn main() -> sketchqa::Result<()> {
    let mut args = std::env::args().skip(1);
    let word = args.next().unwrap_or_else(|| "revolver".into());
    let k = args.next().and_then(|a| a.parse().ok()).unwrap_or(5);

    let lex = Lexicon::load_dir(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/lexicon"))?;
    let table = lex.embeddings()?;
    println!("{} words x {} dims", table.len(), table.dim());

    let query = table
        .get(&word)
        .ok_or_else(|| sketchqa::Error::UnknownWord(word.clone()))?
        .to_vec();
    for n in table.knn(&query, k)? {
        println!("{:<12} {:.4}", n.word, n.distance);
    }

    // a blend of two words lands between them
    let blend: Vec<f64> = table
        .get("cat")
        .unwrap()
        .iter()
        .zip(table.get("dog").unwrap())
        .map(|(a, b)| a + b)
        .collect();
    let words: Vec<String> = table
        .knn_among(&blend, 3, Candidates::WordsOnly)?
        .into_iter()
        .map(|n| n.word)
        .collect();
    println!("cat + dog ~ {words:?}");
    println!("{NO_GUESS:?} is nearest to itself: {}", table.knn(table.no_guess_vector(), 1)?[0].word == NO_GUESS);
    Ok(())
}
