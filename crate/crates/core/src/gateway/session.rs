//! The per-session game state machine, free of any model or I/O.
//!
//! A corpus session starts with the first stroke revealed (cursor 1). Each
//! advance records the human's guess and the model's guess for the step
//! being shown; advancing on the last stroke reveals the category. A
//! free-draw session starts empty, grows one client stroke per advance and
//! is revealed by the drawer naming the category.

use serde::{Deserialize, Serialize};

use crate::corpus::{Record, Stroke, StrokeSequence};
use crate::error::{Error, Result};
use crate::stats::{GuesserType, Rating};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Phase {
    Active,
    Revealed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredRating {
    pub judge_id: String,
    pub guesser: GuesserType,
    /// Canonical orientation: +2 always means "strongly agree".
    pub rating: Rating,
}

/// What an advance led to.
#[derive(Debug, Clone, PartialEq)]
pub enum Advanced {
    /// The next stroke is now visible.
    Next(Stroke),
    /// A free-draw step was recorded; the drawer continues.
    Drawn,
    /// The sketch is complete and its category disclosed.
    Revealed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionState {
    pub session_id: String,
    pub subject_id: String,
    pub free_draw: bool,
    /// For free-draw sessions the category stays empty until reveal.
    pub sketch: StrokeSequence,
    /// Number of revealed (or drawn) strokes.
    pub cursor: usize,
    /// Raw human input per completed step; `""` means "no new guess".
    pub human_guesses: Vec<String>,
    /// The model's top-k words per completed step.
    pub model_guesses: Vec<Vec<String>>,
    pub phase: Phase,
    pub ratings: Vec<StoredRating>,
}

impl SessionState {
    pub fn from_record(session_id: impl Into<String>, subject_id: impl Into<String>, record: &Record) -> Result<Self> {
        if record.sketch.is_empty() {
            return Err(Error::invalid(format!("sketch {} has no strokes", record.id())));
        }
        Ok(SessionState {
            session_id: session_id.into(),
            subject_id: subject_id.into(),
            free_draw: false,
            sketch: record.sketch.clone(),
            cursor: 1,
            human_guesses: Vec::new(),
            model_guesses: Vec::new(),
            phase: Phase::Active,
            ratings: Vec::new(),
        })
    }

    pub fn free_draw(session_id: impl Into<String>, subject_id: impl Into<String>) -> Self {
        let session_id = session_id.into();
        SessionState {
            sketch: StrokeSequence {
                sketch_id: session_id.clone(),
                category: String::new(),
                strokes: Vec::new(),
            },
            session_id,
            subject_id: subject_id.into(),
            free_draw: true,
            cursor: 0,
            human_guesses: Vec::new(),
            model_guesses: Vec::new(),
            phase: Phase::Active,
            ratings: Vec::new(),
        }
    }

    pub fn is_revealed(&self) -> bool {
        self.phase == Phase::Revealed
    }

    /// Total strokes when known in advance (corpus sessions only).
    pub fn total_strokes(&self) -> Option<usize> {
        (!self.free_draw).then(|| self.sketch.len())
    }

    pub fn revealed_strokes(&self) -> &[Stroke] {
        self.sketch.prefix(self.cursor)
    }

    /// The ground truth, withheld until reveal.
    pub fn category(&self) -> Option<&str> {
        self.is_revealed().then_some(self.sketch.category.as_str())
    }

    fn ensure_active(&self) -> Result<()> {
        if self.is_revealed() {
            return Err(Error::Protocol(format!("session {} is already revealed", self.session_id)));
        }
        Ok(())
    }

    pub fn ensure_revealed(&self) -> Result<()> {
        if !self.is_revealed() {
            return Err(Error::Protocol(format!("session {} is not revealed yet", self.session_id)));
        }
        Ok(())
    }

    /// Records the guesses for the stroke currently shown and moves on.
    pub fn advance(&mut self, human_guess: String, model_guess: Vec<String>) -> Result<Advanced> {
        self.ensure_active()?;
        if self.free_draw {
            return Err(Error::Protocol("free-draw sessions advance with a stroke".into()));
        }
        self.human_guesses.push(human_guess);
        self.model_guesses.push(model_guess);
        if self.cursor == self.sketch.len() {
            self.phase = Phase::Revealed;
            return Ok(Advanced::Revealed(self.sketch.category.clone()));
        }
        self.cursor += 1;
        Ok(Advanced::Next(self.sketch.strokes[self.cursor - 1].clone()))
    }

    /// Checks a client stroke before any model work is spent on it.
    pub fn check_stroke(&self, stroke: &Stroke) -> Result<()> {
        self.ensure_active()?;
        if !self.free_draw {
            return Err(Error::Protocol("only free-draw sessions accept strokes".into()));
        }
        if stroke.points.is_empty() {
            return Err(Error::invalid("stroke has no points"));
        }
        if let Some(p) = stroke
            .points
            .iter()
            .find(|p| !p.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)))
        {
            return Err(Error::invalid(format!("point {p:?} outside [0,1]^2")));
        }
        Ok(())
    }

    /// Appends a drawn stroke with the guesses made after seeing it.
    pub fn draw(&mut self, stroke: Stroke, human_guess: String, model_guess: Vec<String>) -> Result<Advanced> {
        self.check_stroke(&stroke)?;
        self.sketch.strokes.push(stroke);
        self.cursor += 1;
        self.human_guesses.push(human_guess);
        self.model_guesses.push(model_guess);
        Ok(Advanced::Drawn)
    }

    /// Ends a free-draw session with the drawer's category.
    pub fn reveal(&mut self, category: &str) -> Result<Advanced> {
        self.ensure_active()?;
        if !self.free_draw {
            return Err(Error::Protocol("corpus sessions reveal after their last stroke".into()));
        }
        if self.cursor == 0 {
            return Err(Error::Protocol("nothing has been drawn yet".into()));
        }
        let category = category.trim().to_lowercase();
        if category.is_empty() {
            return Err(Error::invalid("empty category"));
        }
        self.sketch.category = category.clone();
        self.phase = Phase::Revealed;
        Ok(Advanced::Revealed(category))
    }

    /// Stores a canonical rating, replacing an earlier one by the same judge
    /// for the same guesser. Returns the replaced value.
    pub fn rate(&mut self, judge_id: &str, guesser: GuesserType, rating: Rating) -> Result<Option<Rating>> {
        self.ensure_revealed()?;
        if judge_id.trim().is_empty() {
            return Err(Error::invalid("empty judge id"));
        }
        if let Some(r) = self
            .ratings
            .iter_mut()
            .find(|r| r.judge_id == judge_id && r.guesser == guesser)
        {
            let old = r.rating;
            r.rating = rating;
            return Ok(Some(old));
        }
        self.ratings.push(StoredRating {
            judge_id: judge_id.to_string(),
            guesser,
            rating,
        });
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::GuessSequence;

    fn record(n: usize) -> Record {
        Record {
            sketch: StrokeSequence {
                sketch_id: "k".into(),
                category: "cat".into(),
                strokes: (0..n).map(|i| Stroke::new(vec![[0.1 * i as f64, 0.5]])).collect(),
            },
            guesses: GuessSequence {
                sketch_id: "k".into(),
                subject_id: "u".into(),
                guesses: vec![String::new(); n],
            },
        }
    }

    #[test]
    fn walks_to_reveal() {
        let mut s = SessionState::from_record("s1", "u", &record(3)).unwrap();
        assert_eq!((s.cursor, s.revealed_strokes().len()), (1, 1));
        assert_eq!(s.category(), None);
        assert!(matches!(s.advance("".into(), vec![]).unwrap(), Advanced::Next(_)));
        assert!(matches!(s.advance("dog".into(), vec![]).unwrap(), Advanced::Next(_)));
        assert_eq!(s.advance("".into(), vec![]).unwrap(), Advanced::Revealed("cat".into()));
        assert_eq!(s.cursor, 3);
        assert_eq!(s.human_guesses, ["", "dog", ""]);
        assert_eq!(s.category(), Some("cat"));
        let before = s.clone();
        assert!(matches!(s.advance("x".into(), vec![]), Err(Error::Protocol(_))));
        assert_eq!(s, before, "rejected advance must not mutate");
    }

    #[test]
    fn single_stroke_sketch_reveals_on_first_advance() {
        let mut s = SessionState::from_record("s1", "u", &record(1)).unwrap();
        assert_eq!(s.advance("cat".into(), vec![]).unwrap(), Advanced::Revealed("cat".into()));
    }

    #[test]
    fn ratings_need_reveal_and_replace() {
        let mut s = SessionState::from_record("s1", "u", &record(1)).unwrap();
        assert!(s.rate("j", GuesserType::Human, 1).is_err());
        s.advance("".into(), vec![]).unwrap();
        assert_eq!(s.rate("j", GuesserType::Human, 1).unwrap(), None);
        assert_eq!(s.rate("j", GuesserType::Model, -1).unwrap(), None);
        assert_eq!(s.rate("j", GuesserType::Human, 2).unwrap(), Some(1));
        assert_eq!(s.ratings.len(), 2);
        assert_eq!(s.ratings[0].rating, 2);
    }

    #[test]
    fn free_draw_protocol() {
        let mut s = SessionState::free_draw("s2", "u");
        assert_eq!(s.cursor, 0);
        assert!(s.reveal("cat").is_err());
        assert!(s.advance("".into(), vec![]).is_err());
        assert!(s.draw(Stroke::new(vec![[1.5, 0.0]]), "".into(), vec![]).is_err());
        s.draw(Stroke::new(vec![[0.5, 0.5]]), "".into(), vec![]).unwrap();
        assert_eq!(s.reveal(" Cat ").unwrap(), Advanced::Revealed("cat".into()));
        assert_eq!(s.sketch.category, "cat");
        assert!(s.draw(Stroke::new(vec![[0.5, 0.5]]), "".into(), vec![]).is_err());
    }
}
