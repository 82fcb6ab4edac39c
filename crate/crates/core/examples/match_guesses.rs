//! Scores open-ended guesses against a ground-truth word under each of the
//! six matching criteria and under the progressive combinations.
//!
//! ```text
//! cargo run --example match_guesses [-- <guess> <truth>]
//! ```

use std::path::Path;

use sketchqa::lexnet::{accuracy_by_criteria, match_guess, CriteriaSet, Criterion, Lexicon};

fn main() -> sketchqa::Result<()> {
    let lex = Lexicon::load_dir(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/lexicon"))?;
    let t = &lex.taxonomy;

    let mut pairs: Vec<(String, String)> = [
        ("pot gold end rainbow", "rainbow"),
        ("firearm", "revolver"),
        ("mug", "cup"),
        ("lion", "cat"),
        ("feline", "cat"),
        ("dog", "cat"),
    ]
    .iter()
    .map(|(g, w)| (g.to_string(), w.to_string()))
    .collect();
    let args: Vec<String> = std::env::args().skip(1).collect();
    if let [g, w] = args.as_slice() {
        pairs = vec![(g.to_lowercase(), w.to_lowercase())];
    }

    let all = CriteriaSet::new(&Criterion::ALL)?;
    for (g, w) in &pairs {
        let out = match_guess(g, w, t, &all);
        let fired: Vec<&str> = out.fired.iter().map(|c| c.label()).collect();
        println!("{g:>22} vs {w:<10} fired {fired:?}");
    }

    println!();
    let chain = CriteriaSet::progressive_chain();
    let acc = accuracy_by_criteria(&pairs, t, &chain)?;
    for (c, a) in chain.iter().zip(acc) {
        println!("{:<26} {a:.3}", c.to_string());
    }
    Ok(())
}
