//! Append-only JSON-lines event log; replaying it rebuilds every session.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::Stroke;
use crate::error::{read_to_string, Error, Result};
use crate::stats::{GuesserType, Rating};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum Event {
    /// `sketch_id` is the resolved corpus sketch, `None` for free drawing.
    Created {
        session_id: String,
        subject_id: String,
        sketch_id: Option<String>,
    },
    Advanced {
        session_id: String,
        guess: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stroke: Option<Stroke>,
    },
    Revealed {
        session_id: String,
        category: String,
    },
    Rated {
        session_id: String,
        judge_id: String,
        guesser: GuesserType,
        rating: Rating,
    },
}

#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: File,
}

impl EventLog {
    /// Opens (creating if needed) a log for appending.
    pub fn open(path: &Path) -> Result<Self> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(EventLog {
            path: path.to_path_buf(),
            file,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, event: &Event) -> Result<()> {
        let mut line = serde_json::to_string(event)?;
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|e| Error::io(&self.path, e))
    }
}

/// Reads every event of a log; a missing file is an empty log.
///
/// A final line without its newline is a write torn by a crash and is
/// dropped; a malformed line anywhere else is an error.
pub fn read_events(path: &Path) -> Result<Vec<Event>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = read_to_string(path)?;
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    complete
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Malformed {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn append_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log/events.jsonl");
        let events = vec![
            Event::Created {
                session_id: "s1".into(),
                subject_id: "u".into(),
                sketch_id: Some("k".into()),
            },
            Event::Advanced {
                session_id: "s1".into(),
                guess: "Girafe".into(),
                stroke: None,
            },
            Event::Rated {
                session_id: "s1".into(),
                judge_id: "j".into(),
                guesser: GuesserType::Model,
                rating: -2,
            },
        ];
        let mut log = EventLog::open(&path).unwrap();
        for e in &events {
            log.append(e).unwrap();
        }
        drop(log);
        assert_eq!(read_events(&path).unwrap(), events);
    }

    #[test]
    fn torn_tail_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        std::fs::write(
            &path,
            "{\"event\":\"revealed\",\"session_id\":\"s\",\"category\":\"cat\"}\n{\"event\":\"adv",
        )
        .unwrap();
        assert_eq!(read_events(&path).unwrap().len(), 1);
        std::fs::write(&path, "garbage\n").unwrap();
        assert!(read_events(&path).is_err());
        assert!(read_events(&dir.path().join("missing")).unwrap().is_empty());
    }
}
