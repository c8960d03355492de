//! Cause-before-effect mention order in free text.

mod input;
mod report;
mod scan;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use input::{scan_path, InputFormat};
pub use report::{aggregate, CorpusReport, PairRow};
pub use scan::{ScanOptions, ScanResult, Scanner};

const DEFAULT_PAIRS: &str = include_str!("../../resources/pairs.tsv");

/// A causal pair of surface strings, lowercased and trimmed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PairSpec {
    pub cause: String,
    pub effect: String,
}

impl PairSpec {
    pub fn new(cause: &str, effect: &str) -> Result<Self> {
        let cause = cause.trim().to_lowercase();
        let effect = effect.trim().to_lowercase();
        if cause.is_empty() || effect.is_empty() {
            return Err(Error::InvalidArgument("pair strings must be nonempty".into()));
        }
        if cause == effect {
            return Err(Error::InvalidArgument(format!("pair ({cause}, {effect}) repeats one string")));
        }
        Ok(PairSpec { cause, effect })
    }

    /// One pair per line, cause and effect separated by a tab. Blank lines
    /// and `#` comments are skipped.
    pub fn parse_list(text: &str) -> Result<Vec<PairSpec>> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(c), Some(e), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::InvalidArgument(format!(
                    "pairs line {}: expected `cause<TAB>effect`",
                    i + 1
                )));
            };
            out.push(PairSpec::new(c, e).map_err(|e| Error::InvalidArgument(format!("pairs line {}: {e}", i + 1)))?);
        }
        if out.is_empty() {
            return Err(Error::InvalidArgument("pairs list is empty".into()));
        }
        Ok(out)
    }

    pub fn load_list(path: &Path) -> Result<Vec<PairSpec>> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        PairSpec::parse_list(&text)
    }

    /// The built-in list of 40 everyday causal pairs.
    pub fn defaults() -> Vec<PairSpec> {
        PairSpec::parse_list(DEFAULT_PAIRS).expect("built-in pairs parse")
    }
}

impl fmt::Display for PairSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.cause, self.effect)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    /// Documents where the cause's first mention starts first.
    pub x_first: u64,
    pub y_first: u64,
}

impl PairCounts {
    pub fn total(&self) -> u64 {
        self.x_first + self.y_first
    }

    pub(crate) fn add(&mut self, other: &PairCounts) {
        self.x_first += other.x_first;
        self.y_first += other.y_first;
    }
}
