//! The command line and the live Sketch-QA session service.

pub mod cli;
pub mod http;
mod live;
mod persistence;
mod service;
mod session;

pub use live::{LiveModel, ModelTracker};
pub use persistence::{read_events, Event, EventLog};
pub use service::{
    AdvanceOutcome, AdvanceRequest, AnalyticsSource, Created, Export, ExportFilter, Health, RatingAck, ScoreReport,
    ServiceConfig, SessionService, SessionView, SketchSelector, StepVerdict,
};
pub use session::{Advanced, Phase, SessionState, StoredRating};
