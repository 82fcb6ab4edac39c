use serde::{Deserialize, Serialize};

use super::{GuessSequence, Stroke, StrokeSequence};
use crate::lexnet::Lexicon;

/// Variants of a preprocessed guess sequence: the original, its plural
/// form, and one variant per synonym slot.
///
/// Each variant applies a single substitution scheme to every non-empty
/// guess; guesses without an entry for that scheme are left as they are.
/// Variants identical to an earlier one are dropped.
pub fn augment_guesses(g: &GuessSequence, lex: &Lexicon) -> Vec<GuessSequence> {
    let mut out = vec![g.clone()];
    let mut push = |guesses: Vec<String>| {
        if !out.iter().any(|v| v.guesses == guesses) {
            out.push(GuessSequence {
                sketch_id: g.sketch_id.clone(),
                subject_id: g.subject_id.clone(),
                guesses,
            });
        }
    };

    let substitute = |f: &dyn Fn(&str) -> Option<String>| -> Vec<String> {
        g.guesses
            .iter()
            .map(|w| {
                if w.is_empty() {
                    String::new()
                } else {
                    f(w).unwrap_or_else(|| w.clone())
                }
            })
            .collect()
    };

    push(substitute(&|w| lex.plurals.plural(w).map(String::from)));

    let slots = g
        .guesses
        .iter()
        .filter(|w| !w.is_empty())
        .map(|w| lex.synonyms(w).len())
        .max()
        .unwrap_or(0);
    for slot in 0..slots {
        push(substitute(&|w| lex.synonyms(w).get(slot).map(|s| s.to_string())));
    }
    out
}

/// An affine stroke augmentation: optional vertical flip, then scaling
/// about the canvas centre. Scales are relative, e.g. `0.07` for +7%.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct StrokeAugment {
    pub flip_vertical: bool,
    pub scale_x: f64,
    pub scale_y: f64,
}

/// Relative side-length changes used for scale augmentation.
pub const SCALE_STEPS: [f64; 4] = [-0.07, -0.03, 0.03, 0.07];

impl StrokeAugment {
    pub const IDENTITY: StrokeAugment = StrokeAugment {
        flip_vertical: false,
        scale_x: 0.0,
        scale_y: 0.0,
    };

    pub fn flip() -> Self {
        StrokeAugment {
            flip_vertical: true,
            ..Self::IDENTITY
        }
    }

    pub fn uniform(scale: f64) -> Self {
        StrokeAugment {
            flip_vertical: false,
            scale_x: scale,
            scale_y: scale,
        }
    }

    /// Identity, vertical flip and the four uniform scales.
    pub fn standard_schemes() -> Vec<StrokeAugment> {
        let mut v = vec![Self::IDENTITY, Self::flip()];
        v.extend(SCALE_STEPS.iter().map(|&s| Self::uniform(s)));
        v
    }

    /// Every `(scale_x, scale_y)` pair from [`SCALE_STEPS`], including the
    /// anisotropic ones.
    pub fn paired_scales() -> Vec<StrokeAugment> {
        SCALE_STEPS
            .iter()
            .flat_map(|&sx| {
                SCALE_STEPS.iter().map(move |&sy| StrokeAugment {
                    flip_vertical: false,
                    scale_x: sx,
                    scale_y: sy,
                })
            })
            .collect()
    }

    pub fn apply_point(&self, [x, y]: [f64; 2]) -> [f64; 2] {
        let y = if self.flip_vertical { 1.0 - y } else { y };
        let x = 0.5 + (x - 0.5) * (1.0 + self.scale_x);
        let y = 0.5 + (y - 0.5) * (1.0 + self.scale_y);
        [x.clamp(0.0, 1.0), y.clamp(0.0, 1.0)]
    }
}

pub fn augment_strokes(s: &StrokeSequence, scheme: &StrokeAugment) -> StrokeSequence {
    StrokeSequence {
        sketch_id: s.sketch_id.clone(),
        category: s.category.clone(),
        strokes: s
            .strokes
            .iter()
            .map(|st| Stroke::new(st.points.iter().map(|&p| scheme.apply_point(p)).collect()))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexnet::{PluralMap, PosDictionary, SpellDictionary, Taxonomy};

    fn lex() -> Lexicon {
        Lexicon {
            embeddings: None,
            taxonomy: Taxonomy::new(
                &[("cup", "container"), ("mug", "container"), ("pant", "garment")],
                &[vec!["cup", "mug"]],
            )
            .unwrap(),
            pos: PosDictionary::default(),
            spell: SpellDictionary::default(),
            plurals: PluralMap::from_pairs([("pant", "pants"), ("cup", "cups")]),
        }
    }

    fn seq(gs: &[&str]) -> GuessSequence {
        GuessSequence {
            sketch_id: "s".into(),
            subject_id: "u".into(),
            guesses: gs.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn words(v: &[GuessSequence]) -> Vec<Vec<String>> {
        v.iter().map(|g| g.guesses.clone()).collect()
    }

    #[test]
    fn plural_variant() {
        let v = augment_guesses(&seq(&["", "pant", "pant"]), &lex());
        assert!(words(&v).contains(&vec!["".into(), "pants".into(), "pants".into()]));
    }

    #[test]
    fn no_entries_gives_only_original() {
        let v = augment_guesses(&seq(&["", "zebra"]), &lex());
        assert_eq!(v.len(), 1);
    }

    #[test]
    fn plural_and_synonym() {
        let v = augment_guesses(&seq(&["", "cup"]), &lex());
        let expect: Vec<Vec<String>> = [["", "cup"], ["", "cups"], ["", "mug"]]
            .iter()
            .map(|p| p.iter().map(|s| s.to_string()).collect())
            .collect();
        assert_eq!(words(&v), expect);
    }

    #[test]
    fn flips_and_scales() {
        let s = StrokeSequence {
            sketch_id: "s".into(),
            category: "cat".into(),
            strokes: vec![Stroke::new(vec![[0.2, 0.3], [0.0, 0.0]])],
        };
        assert_eq!(augment_strokes(&s, &StrokeAugment::IDENTITY), s);
        let f = augment_strokes(&s, &StrokeAugment::flip());
        assert!((f.strokes[0].points[0][1] - 0.7).abs() < 1e-15);
        assert_eq!(f.strokes[0].points[0][0], 0.2);
        // (0,0) scaled +7% about the centre lands at -0.035 and is clamped
        assert_eq!(StrokeAugment::uniform(0.07).apply_point([0.0, 0.0]), [0.0, 0.0]);
        let shrunk = StrokeAugment::uniform(-0.07).apply_point([0.0, 0.0]);
        assert!((shrunk[0] - 0.035).abs() < 1e-12);
        assert_eq!(StrokeAugment::standard_schemes().len(), 6);
        assert_eq!(StrokeAugment::paired_scales().len(), 16);
    }
}
