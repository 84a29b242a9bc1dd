// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{read_to_string, validation_err};
use crate::error::{Error, Result};
use crate::textfeat::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LexiconKind {
    Hawkish,
    Dovish,
    StatementRelated,
    /// Optional keyword fallback for forward-looking statements.
    Fls,
}

impl LexiconKind {
    pub fn file_stem(self) -> &'static str {
        match self {
            LexiconKind::Hawkish => "hawkish",
            LexiconKind::Dovish => "dovish",
            LexiconKind::StatementRelated => "statement_related",
            LexiconKind::Fls => "fls",
        }
    }
}

impl fmt::Display for LexiconKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.file_stem())
    }
}

impl FromStr for LexiconKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [LexiconKind::Hawkish, LexiconKind::Dovish, LexiconKind::StatementRelated, LexiconKind::Fls]
            .into_iter()
            .find(|k| k.file_stem() == s.trim())
            .ok_or_else(|| format!("unknown lexicon {s:?}"))
    }
}

/// A list of surface phrases; matching happens on their token sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    pub kind: LexiconKind,
    /// Lowercased phrases, in file order, deduplicated.
    pub phrases: Vec<String>,
    tokens: Vec<Vec<String>>,
}

impl Lexicon {
    pub fn new(kind: LexiconKind, phrases: impl IntoIterator<Item = impl AsRef<str>>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out_phrases = Vec::new();
        let mut tokens = Vec::new();
        for p in phrases {
            let phrase = p.as_ref().trim().to_lowercase();
            let toks = tokenize(&phrase);
            if toks.is_empty() {
                continue;
            }
            if !seen.insert(toks.clone()) {
                log::warn!("lexicon {kind}: duplicate phrase {phrase:?} ignored");
                continue;
            }
            out_phrases.push(phrase);
            tokens.push(toks);
        }
        if out_phrases.is_empty() {
            return Err(Error::domain(format!("lexicon {kind} has no phrases")));
        }
        Ok(Self { kind, phrases: out_phrases, tokens })
    }

    pub fn token_phrases(&self) -> &[Vec<String>] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }
}

/// Reads a one-phrase-per-line file; the kind comes from the file stem.
pub fn parse_lexicon(path: impl AsRef<Path>) -> Result<Lexicon> {
    let path = path.as_ref();
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    let kind = stem
        .parse::<LexiconKind>()
        .map_err(|m| validation_err(path, m, path.display().to_string()))?;
    parse_lexicon_str(&read_to_string(path)?, kind, path)
}

pub fn parse_lexicon_str(text: &str, kind: LexiconKind, origin: &Path) -> Result<Lexicon> {
    let lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    Lexicon::new(kind, lines).map_err(|e| validation_err(origin, e.to_string(), kind.to_string()))
}

pub fn write_lexicon(lex: &Lexicon) -> String {
    lex.phrases.iter().map(|p| format!("{p}\n")).collect()
}

const BUNDLED_HAWKISH: &str = include_str!("../../../../lexicons/hawkish.txt");
const BUNDLED_DOVISH: &str = include_str!("../../../../lexicons/dovish.txt");
const BUNDLED_STATEMENT: &str = include_str!("../../../../lexicons/statement_related.txt");

/// The lexicons the text features need.
#[derive(Debug, Clone, PartialEq)]
pub struct LexiconSet {
    pub hawkish: Lexicon,
    pub dovish: Lexicon,
    pub statement_related: Lexicon,
    pub fls: Option<Lexicon>,
}

impl LexiconSet {
    /// The keyword lists shipped under `lexicons/`.
    pub fn bundled() -> Self {
        let load = |text, kind: LexiconKind| {
            parse_lexicon_str(text, kind, Path::new(kind.file_stem())).expect("bundled lexicon is valid")
        };
        Self {
            hawkish: load(BUNDLED_HAWKISH, LexiconKind::Hawkish),
            dovish: load(BUNDLED_DOVISH, LexiconKind::Dovish),
            statement_related: load(BUNDLED_STATEMENT, LexiconKind::StatementRelated),
            fls: None,
        }
    }

    /// Loads `hawkish.txt`, `dovish.txt`, `statement_related.txt` and, when
    /// present, `fls.txt` from `dir`.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let fls_path = dir.join("fls.txt");
        Ok(Self {
            hawkish: parse_lexicon(dir.join("hawkish.txt"))?,
            dovish: parse_lexicon(dir.join("dovish.txt"))?,
            statement_related: parse_lexicon(dir.join("statement_related.txt"))?,
            fls: fls_path.exists().then(|| parse_lexicon(&fls_path)).transpose()?,
        })
    }
}
