//! The live-session service: shared immutable snapshots of corpus, lexicon
//! and model, plus one mutex per session.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::live::{LiveModel, ModelTracker};
use super::persistence::{read_events, Event, EventLog};
use super::session::{Advanced, Phase, SessionState, StoredRating};
use crate::corpus::{normalize_guess, propagate_guesses, write_corpus, Corpus, GuessSequence, Record, Stroke};
use crate::error::{Error, Result};
use crate::lexnet::{match_guess, CriteriaSet, Lexicon};
use crate::stats::{
    canonical_rating, first_guess_stats, guess_count_histogram, CategoryFirstGuess, GuessCountHistogram, GuesserType,
    Rating,
};
use crate::NO_GUESS;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Words reported per model guess.
    pub model_k: usize,
    /// Seed for random sketch selection.
    pub seed: u64,
    /// Event log replayed at startup and appended to afterwards.
    pub log_path: Option<PathBuf>,
    /// Replay the log without appending to it (offline export).
    pub read_only: bool,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            model_k: 3,
            seed: 1,
            log_path: None,
            read_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SketchSelector {
    Random,
    Id(String),
    Category(String),
    FreeDraw,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Created {
    pub session_id: String,
    pub phase: Phase,
    pub cursor: usize,
    /// `None` for free drawing, where the length is open.
    pub total_strokes: Option<usize>,
    pub stroke: Option<Stroke>,
}

/// Input of one advance. Corpus sessions take only `guess`; free-draw
/// sessions take a `stroke`, a `category` to finish, or both.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdvanceRequest {
    #[serde(default)]
    pub guess: String,
    #[serde(default)]
    pub stroke: Option<Stroke>,
    #[serde(default)]
    pub category: Option<String>,
}

impl AdvanceRequest {
    pub fn guess(guess: impl Into<String>) -> Self {
        AdvanceRequest {
            guess: guess.into(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdvanceOutcome {
    pub session_id: String,
    pub phase: Phase,
    pub cursor: usize,
    /// The model's top-k words for the step just completed; empty when no
    /// model is attached or nothing was drawn.
    pub model_guess: Vec<String>,
    pub next_stroke: Option<Stroke>,
    /// Disclosed once the session is revealed.
    pub category: Option<String>,
}

/// Everything a client needs to redraw a session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionView {
    pub session_id: String,
    pub subject_id: String,
    pub free_draw: bool,
    pub phase: Phase,
    pub cursor: usize,
    pub total_strokes: Option<usize>,
    pub strokes: Vec<Stroke>,
    pub human_guesses: Vec<String>,
    pub model_guesses: Vec<Vec<String>>,
    pub category: Option<String>,
    pub ratings: Vec<StoredRating>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepVerdict {
    pub step: usize,
    /// Normalized and carried forward, as in the exported record.
    pub human_guess: String,
    pub human_correct: bool,
    /// The model's top word, `"#"` while it holds back.
    pub model_guess: String,
    pub model_correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub session_id: String,
    pub category: String,
    pub criteria: String,
    pub steps: Vec<StepVerdict>,
    pub human_final: bool,
    pub model_final: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatingAck {
    pub session_id: String,
    pub judge_id: String,
    pub guesser: GuesserType,
    pub stored: Rating,
    pub replaced: Option<Rating>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
pub struct ExportFilter {
    #[serde(default)]
    pub category: Option<String>,
}

/// Revealed sessions in corpus format plus their ratings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Export {
    pub sessions: usize,
    pub corpus: String,
    /// `session<TAB>judge<TAB>type<TAB>value` lines.
    pub ratings: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalyticsSource {
    /// The corpus the service was started with.
    #[default]
    Corpus,
    /// Revealed live sessions, normalized as on export.
    Sessions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Health {
    pub status: &'static str,
    pub corpus_records: usize,
    pub sessions: usize,
    pub model: Option<&'static str>,
}

#[derive(Debug)]
struct LiveSession {
    state: SessionState,
    tracker: Option<ModelTracker>,
}

#[derive(Debug)]
pub struct SessionService {
    corpus: Arc<Corpus>,
    lexicon: Arc<Lexicon>,
    model: Option<LiveModel>,
    model_k: usize,
    sessions: RwLock<BTreeMap<String, Arc<Mutex<LiveSession>>>>,
    next_id: AtomicU64,
    rng: Mutex<ChaCha8Rng>,
    log: Option<Mutex<EventLog>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    // a panic mid-operation leaves the state machine consistent: every
    // mutation validates before it writes
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl SessionService {
    /// Builds the service and replays the event log, if any.
    pub fn new(corpus: Corpus, lexicon: Lexicon, model: Option<LiveModel>, config: ServiceConfig) -> Result<Self> {
        if config.model_k == 0 {
            return Err(Error::invalid("model_k must be positive"));
        }
        let mut lexicon = lexicon;
        lexicon
            .spell
            .extend_with_categories(corpus.categories().iter().map(String::as_str));
        let mut svc = SessionService {
            corpus: Arc::new(corpus),
            lexicon: Arc::new(lexicon),
            model,
            model_k: config.model_k,
            sessions: RwLock::new(BTreeMap::new()),
            next_id: AtomicU64::new(1),
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(config.seed)),
            log: None,
        };
        if let Some(path) = &config.log_path {
            for event in read_events(path)? {
                svc.apply(event)?;
            }
            if !config.read_only {
                svc.log = Some(Mutex::new(EventLog::open(path)?));
            }
        }
        Ok(svc)
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn health(&self) -> Health {
        Health {
            status: "ok",
            corpus_records: self.corpus.len(),
            sessions: self.sessions.read().expect("session map").len(),
            model: self.model.as_ref().map(LiveModel::kind),
        }
    }

    fn record_event(&self, event: &Event) -> Result<()> {
        match &self.log {
            Some(log) => lock(log).append(event),
            None => Ok(()),
        }
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<LiveSession>>> {
        self.sessions
            .read()
            .expect("session map")
            .get(id)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("session {id}")))
    }

    fn resolve(&self, selector: &SketchSelector) -> Result<Option<&Record>> {
        if *selector == SketchSelector::FreeDraw {
            return Ok(None);
        }
        if self.corpus.is_empty() {
            return Err(Error::invalid("no sketches loaded"));
        }
        let record = match selector {
            SketchSelector::Random => self
                .corpus
                .records()
                .choose(&mut *lock(&self.rng))
                .expect("non-empty corpus"),
            SketchSelector::Id(id) => self
                .corpus
                .get(id)
                .ok_or_else(|| Error::NotFound(format!("sketch {id}")))?,
            SketchSelector::Category(c) => {
                let c = c.trim().to_lowercase();
                let pool: Vec<&Record> = self.corpus.records().iter().filter(|r| r.category() == c).collect();
                *pool
                    .choose(&mut *lock(&self.rng))
                    .ok_or_else(|| Error::NotFound(format!("category {c}")))?
            }
            SketchSelector::FreeDraw => unreachable!(),
        };
        Ok(Some(record))
    }

    fn insert(&self, session_id: String, subject_id: String, record: Option<&Record>) -> Result<Created> {
        let state = match record {
            Some(r) => SessionState::from_record(session_id.clone(), subject_id, r)?,
            None => SessionState::free_draw(session_id.clone(), subject_id),
        };
        let created = Created {
            session_id: session_id.clone(),
            phase: state.phase,
            cursor: state.cursor,
            total_strokes: state.total_strokes(),
            stroke: state.revealed_strokes().first().cloned(),
        };
        let tracker = self.model.as_ref().map(|m| m.tracker(self.model_k));
        let live = LiveSession { state, tracker };
        self.sessions
            .write()
            .expect("session map")
            .insert(session_id, Arc::new(Mutex::new(live)));
        Ok(created)
    }

    /// Starts a session showing the first stroke of the selected sketch.
    pub fn create(&self, selector: SketchSelector, subject_id: Option<String>) -> Result<Created> {
        let record = self.resolve(&selector)?;
        let subject_id = subject_id
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| "anonymous".into());
        let session_id = format!("s{:06}", self.next_id.fetch_add(1, Ordering::SeqCst));
        self.record_event(&Event::Created {
            session_id: session_id.clone(),
            subject_id: subject_id.clone(),
            sketch_id: record.map(|r| r.id().to_string()),
        })?;
        self.insert(session_id, subject_id, record)
    }

    fn model_guess(tracker: &mut Option<ModelTracker>, prefix: &[Stroke]) -> Result<Vec<String>> {
        match tracker {
            Some(t) => t.observe(prefix),
            None => Ok(Vec::new()),
        }
    }

    fn advance_locked(live: &mut LiveSession, req: &AdvanceRequest) -> Result<AdvanceOutcome> {
        let state = &mut live.state;
        if state.is_revealed() {
            return Err(Error::Protocol(format!("session {} is already revealed", state.session_id)));
        }
        let mut model_guess = Vec::new();
        let mut next_stroke = None;
        let mut category = None;
        if !state.free_draw {
            if req.stroke.is_some() || req.category.is_some() {
                return Err(Error::Protocol("corpus sessions take only a guess".into()));
            }
            model_guess = Self::model_guess(&mut live.tracker, state.revealed_strokes())?;
            match state.advance(req.guess.clone(), model_guess.clone())? {
                Advanced::Next(s) => next_stroke = Some(s),
                Advanced::Revealed(c) => category = Some(c),
                Advanced::Drawn => unreachable!(),
            }
        } else {
            if req.stroke.is_none() && req.category.is_none() {
                return Err(Error::Protocol("free-draw advance needs a stroke or a category".into()));
            }
            if let Some(c) = &req.category {
                if c.trim().is_empty() {
                    return Err(Error::invalid("empty category"));
                }
                if req.stroke.is_none() && state.cursor == 0 {
                    return Err(Error::Protocol("nothing has been drawn yet".into()));
                }
            }
            if let Some(stroke) = &req.stroke {
                state.check_stroke(stroke)?;
                let mut prefix = state.sketch.strokes.clone();
                prefix.push(stroke.clone());
                model_guess = Self::model_guess(&mut live.tracker, &prefix)?;
                state.draw(stroke.clone(), req.guess.clone(), model_guess.clone())?;
            }
            if let Some(c) = &req.category {
                if let Advanced::Revealed(c) = state.reveal(c)? {
                    category = Some(c);
                }
            }
        }
        Ok(AdvanceOutcome {
            session_id: state.session_id.clone(),
            phase: state.phase,
            cursor: state.cursor,
            model_guess,
            next_stroke,
            category,
        })
    }

    /// Records the human's guess (empty for "no new guess") and the
    /// model's guess for the current stroke, then reveals the next stroke
    /// or the category.
    pub fn advance(&self, session_id: &str, req: AdvanceRequest) -> Result<AdvanceOutcome> {
        let session = self.session(session_id)?;
        let mut live = lock(&session);
        let out = Self::advance_locked(&mut live, &req)?;
        if req.stroke.is_some() || !live.state.free_draw {
            self.record_event(&Event::Advanced {
                session_id: session_id.to_string(),
                guess: req.guess.clone(),
                stroke: req.stroke.clone(),
            })?;
        }
        if let (true, Some(c)) = (live.state.free_draw, &out.category) {
            self.record_event(&Event::Revealed {
                session_id: session_id.to_string(),
                category: c.clone(),
            })?;
        }
        Ok(out)
    }

    pub fn view(&self, session_id: &str) -> Result<SessionView> {
        let session = self.session(session_id)?;
        let live = lock(&session);
        let s = &live.state;
        Ok(SessionView {
            session_id: s.session_id.clone(),
            subject_id: s.subject_id.clone(),
            free_draw: s.free_draw,
            phase: s.phase,
            cursor: s.cursor,
            total_strokes: s.total_strokes(),
            strokes: s.revealed_strokes().to_vec(),
            human_guesses: s.human_guesses.clone(),
            model_guesses: s.model_guesses.clone(),
            category: s.category().map(String::from),
            ratings: s.ratings.clone(),
        })
    }

    /// Human guesses as they would appear in the exported record.
    fn normalized_guesses(&self, s: &SessionState) -> Vec<String> {
        let known = s.sketch.category.split_whitespace().all(|t| self.lexicon.spell.contains(t));
        let extended;
        let lex = if known {
            &*self.lexicon
        } else {
            let mut l = (*self.lexicon).clone();
            l.spell.extend_with_categories([s.sketch.category.as_str()]);
            extended = l;
            &extended
        };
        let mut guesses: Vec<String> = s.human_guesses.iter().map(|g| normalize_guess(g, lex)).collect();
        propagate_guesses(&mut guesses);
        guesses
    }

    /// Per-step and final verdicts for both guessers against the category.
    pub fn score(&self, session_id: &str, criteria: &CriteriaSet) -> Result<ScoreReport> {
        let session = self.session(session_id)?;
        let live = lock(&session);
        let s = &live.state;
        s.ensure_revealed()?;
        let truth = s.sketch.category.as_str();
        let taxonomy = &self.lexicon.taxonomy;
        let steps: Vec<StepVerdict> = self
            .normalized_guesses(s)
            .into_iter()
            .zip(&s.model_guesses)
            .enumerate()
            .map(|(i, (human, model))| {
                let model_top = model.first().cloned().unwrap_or_else(|| NO_GUESS.to_string());
                let model_word = if model_top == NO_GUESS { "" } else { model_top.as_str() };
                StepVerdict {
                    step: i + 1,
                    human_correct: match_guess(&human, truth, taxonomy, criteria).verdict,
                    human_guess: human,
                    model_correct: match_guess(model_word, truth, taxonomy, criteria).verdict,
                    model_guess: model_top,
                }
            })
            .collect();
        let last = steps.last();
        Ok(ScoreReport {
            session_id: s.session_id.clone(),
            category: truth.to_string(),
            criteria: criteria.to_string(),
            human_final: last.is_some_and(|v| v.human_correct),
            model_final: last.is_some_and(|v| v.model_correct),
            steps,
        })
    }

    /// Stores a rating in canonical orientation. A repeat by the same judge
    /// for the same guesser replaces the earlier value.
    pub fn rate(
        &self,
        session_id: &str,
        judge_id: &str,
        guesser: GuesserType,
        rating: Rating,
        scale_reversed: bool,
    ) -> Result<RatingAck> {
        let stored = canonical_rating(rating, scale_reversed)?;
        let session = self.session(session_id)?;
        let mut live = lock(&session);
        let judge_id = judge_id.trim();
        let replaced = live.state.rate(judge_id, guesser, stored)?;
        self.record_event(&Event::Rated {
            session_id: session_id.to_string(),
            judge_id: judge_id.to_string(),
            guesser,
            rating: stored,
        })?;
        Ok(RatingAck {
            session_id: session_id.to_string(),
            judge_id: judge_id.to_string(),
            guesser,
            stored,
            replaced,
            note: replaced.map(|old| format!("replaced earlier {guesser} rating {old} by judge {judge_id} with {stored}")),
        })
    }

    fn revealed_records(&self, filter: &ExportFilter) -> Vec<(Record, Vec<StoredRating>)> {
        let want = filter.category.as_ref().map(|c| c.trim().to_lowercase());
        let sessions: Vec<_> = self.sessions.read().expect("session map").values().cloned().collect();
        sessions
            .iter()
            .filter_map(|session| {
                let live = lock(session);
                let s = &live.state;
                if !s.is_revealed() || want.as_ref().is_some_and(|c| *c != s.sketch.category) {
                    return None;
                }
                let mut sketch = s.sketch.clone();
                sketch.sketch_id = s.session_id.clone();
                let guesses = GuessSequence {
                    sketch_id: s.session_id.clone(),
                    subject_id: s.subject_id.clone(),
                    guesses: self.normalized_guesses(s),
                };
                Some((Record { sketch, guesses }, s.ratings.clone()))
            })
            .collect()
    }

    /// Revealed sessions as corpus lines (ids are session ids, guesses
    /// normalized and carried forward) plus their ratings.
    pub fn export(&self, filter: &ExportFilter) -> Result<Export> {
        let rows = self.revealed_records(filter);
        if rows.is_empty() {
            return Err(Error::NotFound("no revealed sessions match the filter".into()));
        }
        let mut ratings = String::new();
        for (r, rs) in &rows {
            for x in rs {
                ratings.push_str(&format!("{}\t{}\t{}\t{}\n", r.id(), x.judge_id, x.guesser, x.rating));
            }
        }
        let corpus: Corpus = rows.iter().map(|(r, _)| r.clone()).collect();
        Ok(Export {
            sessions: corpus.len(),
            corpus: write_corpus(&corpus),
            ratings,
        })
    }

    fn analytics_corpus(&self, source: AnalyticsSource) -> Result<Corpus> {
        let c = match source {
            AnalyticsSource::Corpus => (*self.corpus).clone(),
            AnalyticsSource::Sessions => self
                .revealed_records(&ExportFilter::default())
                .into_iter()
                .map(|(r, _)| r)
                .collect(),
        };
        if c.is_empty() {
            return Err(Error::NotFound("no sequences to analyze".into()));
        }
        Ok(c)
    }

    pub fn histogram(&self, source: AnalyticsSource) -> Result<GuessCountHistogram> {
        Ok(guess_count_histogram(&self.analytics_corpus(source)?))
    }

    pub fn first_guess(&self, source: AnalyticsSource) -> Result<Vec<CategoryFirstGuess>> {
        Ok(first_guess_stats(&self.analytics_corpus(source)?))
    }

    fn apply(&mut self, event: Event) -> Result<()> {
        match event {
            Event::Created {
                session_id,
                subject_id,
                sketch_id,
            } => {
                let record = match &sketch_id {
                    Some(id) => Some(
                        self.corpus
                            .get(id)
                            .ok_or_else(|| Error::NotFound(format!("logged sketch {id} is not in the corpus")))?,
                    ),
                    None => None,
                };
                if let Some(n) = session_id.strip_prefix('s').and_then(|n| n.parse::<u64>().ok()) {
                    self.next_id.fetch_max(n + 1, Ordering::SeqCst);
                }
                self.insert(session_id, subject_id, record).map(|_| ())
            }
            Event::Advanced {
                session_id,
                guess,
                stroke,
            } => {
                let session = self.session(&session_id)?;
                let mut live = lock(&session);
                Self::advance_locked(
                    &mut live,
                    &AdvanceRequest {
                        guess,
                        stroke,
                        category: None,
                    },
                )
                .map(|_| ())
            }
            Event::Revealed { session_id, category } => {
                let session = self.session(&session_id)?;
                let mut live = lock(&session);
                live.state.reveal(&category).map(|_| ())
            }
            Event::Rated {
                session_id,
                judge_id,
                guesser,
                rating,
            } => {
                let session = self.session(&session_id)?;
                let mut live = lock(&session);
                live.state.rate(&judge_id, guesser, rating).map(|_| ())
            }
        }
    }
}
