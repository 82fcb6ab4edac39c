//! Effect sizes, confidence intervals, rank tests and guess analytics.

mod analytics;
mod effect;
mod likert;
mod wilcoxon;

pub use analytics::{first_guess_location, first_guess_stats, guess_count_histogram, median, median_abs_deviation, unique_guesses, CategoryFirstGuess, GuessCountHistogram};
pub use effect::{cohens_d, mean_cohens_d, wilson_interval, CategoryAccuracy, EffectSize};
pub use likert::{canonical_rating, likert_mode, mean_agreement, parse_rating_lines, Rating, RatingRecord, GuesserType};
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonResult, EXACT_MAX_N};
