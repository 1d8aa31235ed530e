//! Name and statement pools for instantiating puzzle text.
//!
//! An ontology is two ordered lists: witness names, and declarative
//! statements that must read naturally both as testimony ("says that {s}.")
//! and as the question ("should it be believed that {s}?"). The shipped
//! default lists are embedded in the binary; callers can substitute their own
//! files, one entry per line. Entry order matters — seeded sampling indexes
//! into these lists, so reordering a list changes every generated dataset.

use std::fs;
use std::path::Path;

use thiserror::Error;

const SHIPPED_NAMES: &str = include_str!("../data/names.txt");
const SHIPPED_STATEMENTS: &str = include_str!("../data/statements.txt");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OntologyError {
    #[error("failed to read {path}: {message}")]
    Io { path: String, message: String },
    #[error("duplicate {kind} {entry:?} on line {line}")]
    Duplicate {
        kind: &'static str,
        entry: String,
        line: usize,
    },
    #[error("the {kind} list is empty")]
    EmptyList { kind: &'static str },
    #[error(
        "{kind} {entry:?} on line {line} ends with punctuation; the prompt template supplies it"
    )]
    TrailingPunctuation {
        kind: &'static str,
        entry: String,
        line: usize,
    },
    #[error("statement {entry:?} on line {line} starts with \"witness\", which would collide with testimony lines when prompts are re-parsed")]
    WitnessPrefix { entry: String, line: usize },
}

/// Validated name and statement pools.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Ontology {
    names: Vec<String>,
    statements: Vec<String>,
}

impl Ontology {
    /// Parse and validate both lists from in-memory text: one entry per
    /// line, surrounding whitespace trimmed, blank lines ignored.
    pub fn from_texts(names_text: &str, statements_text: &str) -> Result<Self, OntologyError> {
        let names = parse_list(names_text, "name")?;
        let statements = parse_list(statements_text, "statement")?;
        for (line, entry) in numbered_entries(statements_text) {
            if entry
                .chars()
                .next_back()
                .is_some_and(|c| ".?!,;:".contains(c))
            {
                return Err(OntologyError::TrailingPunctuation {
                    kind: "statement",
                    entry,
                    line,
                });
            }
            if entry
                .get(..8)
                .is_some_and(|prefix| prefix.eq_ignore_ascii_case("witness "))
            {
                return Err(OntologyError::WitnessPrefix { entry, line });
            }
        }
        Ok(Ontology { names, statements })
    }

    /// Load both lists from files.
    pub fn load(names_path: &Path, statements_path: &Path) -> Result<Self, OntologyError> {
        let read = |path: &Path| {
            fs::read_to_string(path).map_err(|e| OntologyError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })
        };
        Ontology::from_texts(&read(names_path)?, &read(statements_path)?)
    }

    /// The lists embedded in the binary: 474 names, 90 statements.
    pub fn shipped() -> Self {
        Ontology::from_texts(SHIPPED_NAMES, SHIPPED_STATEMENTS)
            .expect("shipped ontology lists must validate")
    }

    /// Load with optional per-list overrides; a missing override falls back
    /// to the shipped list.
    pub fn with_overrides(
        names_path: Option<&Path>,
        statements_path: Option<&Path>,
    ) -> Result<Self, OntologyError> {
        let read = |path: &Path| {
            fs::read_to_string(path).map_err(|e| OntologyError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })
        };
        let names = match names_path {
            Some(path) => read(path)?,
            None => SHIPPED_NAMES.to_string(),
        };
        let statements = match statements_path {
            Some(path) => read(path)?,
            None => SHIPPED_STATEMENTS.to_string(),
        };
        Ontology::from_texts(&names, &statements)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn statements(&self) -> &[String] {
        &self.statements
    }
}

fn numbered_entries(text: &str) -> impl Iterator<Item = (usize, String)> + '_ {
    text.lines().enumerate().filter_map(|(i, line)| {
        let entry = line.trim();
        if entry.is_empty() {
            None
        } else {
            Some((i + 1, entry.to_string()))
        }
    })
}

fn parse_list(text: &str, kind: &'static str) -> Result<Vec<String>, OntologyError> {
    let mut entries = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (line, entry) in numbered_entries(text) {
        if !seen.insert(entry.clone()) {
            return Err(OntologyError::Duplicate { kind, entry, line });
        }
        entries.push(entry);
    }
    if entries.is_empty() {
        return Err(OntologyError::EmptyList { kind });
    }
    Ok(entries)
}
