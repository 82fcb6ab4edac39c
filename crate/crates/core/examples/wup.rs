//! Walks the bundled hypernym taxonomy: depths, lowest common subsumers and
//! Wu-Palmer similarity between a few word pairs.
//!
//! ```text
//! cargo run --example wup
//! ```

use std::path::Path;

use sketchqa::lexnet::Lexicon;

fn main() -> sketchqa::Result<()> {
    let lex = Lexicon::load_dir(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/lexicon"))?;
    let t = &lex.taxonomy;
    println!("{} nodes under {:?}", t.len(), t.root());

    let mut chain = vec!["revolver"];
    while let Some(p) = t.parent(chain[chain.len() - 1]) {
        chain.push(p);
    }
    println!("revolver's hypernyms: {}", chain.join(" -> "));

    for (a, b) in [
        ("revolver", "pistol"),
        ("revolver", "firearm"),
        ("cat", "lion"),
        ("cat", "dog"),
        ("cup", "mug"),
        ("house", "giraffe"),
    ] {
        println!(
            "{a:>9} ({}) {b:<9} ({})  lcs {:<10} wup {:.3}",
            t.depth(a).unwrap_or(0),
            t.depth(b).unwrap_or(0),
            t.lowest_common_subsumer(a, b)?,
            t.wup_similarity(a, b)?
        );
    }
    println!("synonyms of cup: {:?}", t.synonyms("cup"));
    Ok(())
}
