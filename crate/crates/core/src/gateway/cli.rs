//! The `sketchqa` command line. Every batch command prints a [`Report`] as
//! an aligned table (`--format text`) or tab-separated rows
//! (`--format machine`).

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use super::http;
use super::live::LiveModel;
use super::service::{ExportFilter, ServiceConfig, SessionService};
use crate::corpus::{
    parse_corpus, preprocess_corpus, split_corpus, write_corpus, Corpus, FeatureExtractor, PrecomputedFeatures,
    RasterExtractor, SplitRatios,
};
use crate::error::{read_to_string, write_string, Error, Result};
use crate::eval::{accuracy_report, check_monotone, localization_report, sequence_accuracy, turing_report, EvalConfig, EvalMode};
use crate::guesser::{featurize, run_manifest, GuesserModel, Manifest, ManifestModel, SequenceExample, TwoPhaseModel};
use crate::lexnet::{accuracy_by_criteria, match_guess, Candidates, CriteriaSet, Lexicon};
use crate::neuralcore::Checkpoint;
use crate::report::{Format, Report};
use crate::stats::{first_guess_stats, guess_count_histogram, parse_rating_lines};

#[derive(Debug, Parser)]
#[command(name = "sketchqa", version, about = "Sketch-QA word guessing: data pipeline, models and live sessions")]
pub struct Cli {
    /// Seed for splits and random sketch selection.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Machine,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Machine => Format::Machine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Unified,
    TwoPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    GuessPortion,
    Full,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize guesses: case, nouns, spelling, propagation.
    Preprocess {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        lexicon_dir: PathBuf,
        /// Skip malformed lines instead of failing.
        #[arg(long)]
        lenient: bool,
    },
    /// Seeded train/validation/test split.
    Split {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 0.60)]
        train: f64,
        #[arg(long, default_value_t = 0.25)]
        val: f64,
        #[arg(long, default_value_t = 0.15)]
        test: f64,
    },
    /// Guess-count histogram, first-guess locations and, optionally,
    /// criteria accuracy of final guesses and Turing-test ratings.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        /// Enables the criteria-accuracy table.
        #[arg(long)]
        lexicon_dir: Option<PathBuf>,
        /// `session<TAB>judge<TAB>type<TAB>value` lines.
        #[arg(long)]
        ratings: Option<PathBuf>,
    },
    /// Run a training manifest over its hidden-size grid.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        /// Overrides the manifest's model.
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
    },
    /// Sequence-level accuracy of a checkpoint on a corpus.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        lexicon_dir: PathBuf,
        #[arg(long)]
        feature_file: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModeArg::GuessPortion)]
        mode: ModeArg,
        #[arg(long, value_delimiter = ',', default_value = "1,3,5")]
        k: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        delta: Vec<usize>,
        /// Normalize guesses before scoring.
        #[arg(long)]
        preprocess: bool,
    },
    /// Score guesses against truths under a criteria combination.
    Match {
        /// `guess<TAB>truth` lines; `#` starts a comment.
        #[arg(long, conflicts_with_all = ["guess", "truth"])]
        pairs: Option<PathBuf>,
        #[arg(long, requires = "truth")]
        guess: Option<String>,
        #[arg(long, requires = "guess")]
        truth: Option<String>,
        #[arg(long)]
        lexicon_dir: PathBuf,
        #[arg(long, default_value = "EM|SUB|SYN")]
        criteria: String,
        #[arg(long, default_value_t = crate::lexnet::DEFAULT_WUP_THRESHOLD)]
        wup_threshold: f64,
    },
    /// Nearest words to a word or a vector.
    Knn {
        #[arg(long)]
        lexicon_dir: PathBuf,
        #[arg(long, conflicts_with = "vector")]
        word: Option<String>,
        /// Comma-separated components.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        vector: Option<Vec<f64>>,
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Leave "#" out of the candidates.
        #[arg(long)]
        words_only: bool,
    },
    /// Start the HTTP session service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        lexicon_dir: PathBuf,
        /// Session event log, replayed at startup.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        model_k: usize,
    },
    /// Write revealed sessions of an event log as corpus and ratings files.
    Export {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        lexicon_dir: PathBuf,
        #[arg(long)]
        out_corpus: PathBuf,
        #[arg(long)]
        out_ratings: Option<PathBuf>,
        #[arg(long)]
        category: Option<String>,
    },
}

/// Runs one command and returns what it prints.
pub fn run(cli: Cli) -> Result<String> {
    let format: Format = cli.format.into();
    let seed = cli.seed;
    let report = match cli.command {
        Command::Preprocess {
            input,
            output,
            lexicon_dir,
            lenient,
        } => {
            let parsed = parse_corpus(&input, !lenient)?;
            let lex = Lexicon::load_dir(&lexicon_dir)?;
            let (clean, removed) = preprocess_corpus(&parsed.corpus, &lex);
            write_string(&output, &write_corpus(&clean))?;
            let mut r = Report::new();
            r.push("records", ["read"], parsed.corpus.len() as f64);
            r.push("records", ["skipped"], parsed.skipped.len() as f64);
            r.push("records", ["removed"], removed.len() as f64);
            r.push("records", ["written"], clean.len() as f64);
            r
        }
        Command::Split {
            input,
            out_dir,
            train,
            val,
            test,
        } => {
            let corpus = parse_corpus(&input, true)?.corpus;
            let parts = split_corpus(&corpus, SplitRatios { train, val, test }, seed)?;
            let mut r = Report::new();
            for (name, part) in [("train", parts.0), ("val", parts.1), ("test", parts.2)] {
                write_string(&out_dir.join(format!("{name}.jsonl")), &write_corpus(&part))?;
                r.push("split", [name], part.len() as f64);
            }
            r
        }
        Command::Analyze {
            input,
            lexicon_dir,
            ratings,
        } => analyze(&input, lexicon_dir.as_deref(), ratings.as_deref())?,
        Command::Train { manifest, model } => {
            let mut m = Manifest::load(&manifest)?;
            if let Some(model) = model {
                m.model = match model {
                    ModelArg::Unified => ManifestModel::Unified,
                    ModelArg::TwoPhase => ManifestModel::TwoPhase,
                };
            }
            let summary = run_manifest(&m)?;
            let mut r = Report::new();
            for run in &summary.runs {
                r.push("val_acc@1", [run.hidden], run.best_val_at1);
            }
            r.push("best_hidden", Vec::<String>::new(), summary.best_hidden as f64);
            r.extend(summary.report);
            r
        }
        Command::Eval {
            checkpoint,
            corpus,
            lexicon_dir,
            feature_file,
            mode,
            k,
            delta,
            preprocess,
        } => {
            let cfg = EvalConfig {
                k_values: k,
                deltas: delta,
                mode: match mode {
                    ModeArg::GuessPortion => EvalMode::GuessPortion,
                    ModeArg::Full => EvalMode::Full,
                },
                ..EvalConfig::default()
            };
            evaluate(&checkpoint, &corpus, &lexicon_dir, feature_file.as_deref(), &cfg, preprocess)?
        }
        Command::Match {
            pairs,
            guess,
            truth,
            lexicon_dir,
            criteria,
            wup_threshold,
        } => {
            let lex = Lexicon::load_dir(&lexicon_dir)?;
            let crit = CriteriaSet::with_threshold(&criteria.parse::<CriteriaSet>()?.criteria(), wup_threshold)?;
            let pairs = match (pairs, guess, truth) {
                (Some(p), _, _) => read_pairs(&p)?,
                (None, Some(g), Some(t)) => vec![(g, t)],
                _ => return Err(Error::invalid("give --pairs or both --guess and --truth")),
            };
            let mut r = Report::new();
            for (g, t) in &pairs {
                let out = match_guess(g, t, &lex.taxonomy, &crit);
                r.push("match", [g.as_str(), t.as_str()], f64::from(u8::from(out.verdict)));
            }
            let acc = accuracy_by_criteria(&pairs, &lex.taxonomy, &[crit])?;
            r.push("accuracy", [crit.to_string()], acc[0]);
            r
        }
        Command::Knn {
            lexicon_dir,
            word,
            vector,
            k,
            words_only,
        } => {
            let lex = Lexicon::load_dir(&lexicon_dir)?;
            let table = lex.embeddings()?;
            let query = match (word, vector) {
                (Some(w), _) => table.get(&w).ok_or(Error::UnknownWord(w))?.to_vec(),
                (None, Some(v)) => v,
                _ => return Err(Error::invalid("give --word or --vector")),
            };
            let candidates = if words_only {
                Candidates::WordsOnly
            } else {
                Candidates::All
            };
            let mut r = Report::new();
            for (i, n) in table.knn_among(&query, k, candidates)?.into_iter().enumerate() {
                r.push("cosine_distance", [(i + 1).to_string(), n.word], n.distance);
            }
            r
        }
        Command::Serve {
            port,
            host,
            corpus,
            checkpoint,
            lexicon_dir,
            log,
            model_k,
        } => {
            let svc = build_service(&corpus, &lexicon_dir, checkpoint.as_deref(), log, model_k, seed, false)?;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::io("tokio runtime", e))?;
            runtime
                .block_on(http::serve(Arc::new(svc), SocketAddr::new(host, port)))
                .map_err(|e| Error::io(format!("{host}:{port}"), e))?;
            return Ok(String::new());
        }
        Command::Export {
            log,
            corpus,
            lexicon_dir,
            out_corpus,
            out_ratings,
            category,
        } => {
            let svc = build_service(&corpus, &lexicon_dir, None, Some(log), 1, seed, true)?;
            let out = svc.export(&ExportFilter { category })?;
            write_string(&out_corpus, &out.corpus)?;
            if let Some(p) = &out_ratings {
                write_string(p, &out.ratings)?;
            }
            let mut r = Report::new();
            r.push("exported", ["sessions"], out.sessions as f64);
            r.push("exported", ["ratings"], out.ratings.lines().count() as f64);
            r
        }
    };
    Ok(report.render(format))
}

fn build_service(
    corpus: &Path,
    lexicon_dir: &Path,
    checkpoint: Option<&Path>,
    log: Option<PathBuf>,
    model_k: usize,
    seed: u64,
    read_only: bool,
) -> Result<SessionService> {
    let corpus = parse_corpus(corpus, true)?.corpus;
    let lex = Lexicon::load_dir(lexicon_dir)?;
    let model = match checkpoint {
        Some(p) => Some(LiveModel::load(p, Arc::new(lex.embeddings()?.clone()))?),
        None => None,
    };
    SessionService::new(
        corpus,
        lex,
        model,
        ServiceConfig {
            model_k,
            seed,
            log_path: log,
            read_only,
        },
    )
}

/// `guess<TAB>truth` lines; blank lines and lines starting with `# ` are
/// skipped.
pub fn read_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    read_to_string(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with("# "))
        .map(|(i, l)| {
            let mut cols = l.split('\t');
            match (cols.next(), cols.next()) {
                (Some(g), Some(t)) => Ok((g.trim().to_string(), t.trim().to_string())),
                _ => Err(Error::Malformed {
                    line: i + 1,
                    message: "expected `guess<TAB>truth`".into(),
                }),
            }
        })
        .collect()
}

fn analyze(input: &Path, lexicon_dir: Option<&Path>, ratings: Option<&Path>) -> Result<Report> {
    let corpus = parse_corpus(input, true)?.corpus;
    let mut r = Report::new();
    for (bucket, n) in guess_count_histogram(&corpus).rows() {
        r.push("guess_count", [bucket], n as f64);
    }
    for s in first_guess_stats(&corpus) {
        r.push("first_guess_median", [s.category.as_str()], s.median);
        r.push("first_guess_mad", [s.category.as_str()], s.mad);
    }
    if let Some(dir) = lexicon_dir {
        let lex = Lexicon::load_dir(dir)?;
        let pairs: Vec<(&str, &str)> = corpus
            .records()
            .iter()
            .filter_map(|rec| {
                let last = rec.guesses.guesses.iter().rev().find(|g| !g.is_empty())?;
                Some((last.as_str(), rec.category()))
            })
            .collect();
        let chain = CriteriaSet::progressive_chain();
        for (crit, acc) in chain.iter().zip(accuracy_by_criteria(&pairs, &lex.taxonomy, &chain)?) {
            r.push("criteria_accuracy", [crit.to_string()], acc);
        }
    }
    if let Some(path) = ratings {
        r.extend(turing_report(&parse_rating_lines(&read_to_string(path)?)?)?.to_report());
    }
    Ok(r)
}

fn examples_for(corpus: &Corpus, feature_file: Option<&Path>, raster: Option<crate::corpus::FeatureConfig>) -> Result<Vec<SequenceExample>> {
    match (feature_file, raster) {
        (Some(p), _) => featurize(corpus, &PrecomputedFeatures::load(p)?),
        (None, Some(cfg)) => featurize(corpus, &RasterExtractor(cfg) as &dyn FeatureExtractor),
        (None, None) => Err(Error::invalid("checkpoint uses precomputed features; pass --feature-file")),
    }
}

fn evaluate(
    checkpoint: &Path,
    corpus: &Path,
    lexicon_dir: &Path,
    feature_file: Option<&Path>,
    cfg: &EvalConfig,
    preprocess: bool,
) -> Result<Report> {
    cfg.validate()?;
    let lex = Lexicon::load_dir(lexicon_dir)?;
    let mut corpus = parse_corpus(corpus, true)?.corpus;
    if preprocess {
        corpus = preprocess_corpus(&corpus, &lex).0;
    }
    let table = Arc::new(lex.embeddings()?.clone());
    let ck = Checkpoint::load(checkpoint)?;
    let mut report = Report::new();
    match ck.kind.as_str() {
        "unified" => {
            let model = GuesserModel::from_checkpoint(&ck, table)?;
            let examples = examples_for(&corpus, feature_file, model.features)?;
            let ranked = examples
                .iter()
                .map(|e| model.ranked(&e.features, cfg.max_k()))
                .collect::<Result<Vec<_>>>()?;
            let truths: Vec<Vec<String>> = examples.iter().map(|e| e.guesses.clone()).collect();
            report.extend(accuracy_report(&ranked, &truths, cfg)?);
        }
        "two-phase" => {
            let model = TwoPhaseModel::from_checkpoint(&ck, table)?;
            let examples = examples_for(&corpus, feature_file, model.phase2.features)?;
            let truths: Vec<Vec<String>> = examples.iter().map(|e| e.guesses.clone()).collect();
            let (mut full, mut oracle, mut preds, mut starts) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            for e in &examples {
                let p = model.predict_transition(&e.features)?;
                let start = (e.no_guess_prefix_len() + 1).min(e.len());
                full.push(model.ranked_from(&e.features, p.index, cfg.max_k())?);
                oracle.push(model.ranked_from(&e.features, start, cfg.max_k())?);
                preds.push(p.index);
                starts.push(start);
            }
            report.extend(accuracy_report(&full, &truths, cfg)?);
            let phase2_only = sequence_accuracy(&oracle, &truths, cfg)?;
            for (k, a) in cfg.k_values.iter().zip(phase2_only) {
                report.push("accuracy_phase2_only", [cfg.mode.label().to_string(), k.to_string()], a);
            }
            report.extend(localization_report(&preds, &starts, &cfg.deltas)?);
        }
        other => return Err(Error::invalid(format!("unknown checkpoint kind {other:?}"))),
    }
    check_monotone(&report)?;
    Ok(report)
}
