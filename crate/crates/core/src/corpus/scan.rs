use std::collections::HashMap;

use aho_corasick::{AhoCorasick, AhoCorasickKind, MatchKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PairCounts, PairSpec};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Largest distance in characters between the two first-mention starts.
    pub window: usize,
    /// Only accept mentions not flanked by alphanumeric characters.
    pub word_boundary: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            window: 50,
            word_boundary: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanResult {
    /// Aligned with the scanner's pair list.
    pub counts: Vec<PairCounts>,
    pub documents: u64,
    /// Documents that could not be read or decoded.
    pub skipped: u64,
    pub bytes: u64,
}

impl ScanResult {
    fn empty(pairs: usize) -> Self {
        ScanResult {
            counts: vec![PairCounts::default(); pairs],
            ..Default::default()
        }
    }

    /// Commutative, so shards can be merged in any order.
    pub fn merge(mut self, other: ScanResult) -> ScanResult {
        if self.counts.is_empty() {
            self.counts = vec![PairCounts::default(); other.counts.len()];
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            a.add(b);
        }
        self.documents += other.documents;
        self.skipped += other.skipped;
        self.bytes += other.bytes;
        self
    }
}

/// Multi-pattern first-mention finder over a fixed pair list.
///
/// Matching is ASCII case-insensitive literal search: pair strings are
/// lowercased, and uppercase ASCII in the text matches them.
#[derive(Clone, Debug)]
pub struct Scanner {
    pairs: Vec<PairSpec>,
    /// Pattern indices of (cause, effect) for each pair.
    index: Vec<(usize, usize)>,
    patterns: usize,
    automaton: AhoCorasick,
    opts: ScanOptions,
}

impl Scanner {
    pub fn new(pairs: Vec<PairSpec>, opts: ScanOptions) -> Result<Self> {
        if opts.window == 0 {
            return Err(Error::InvalidArgument("window must be positive".into()));
        }
        if pairs.is_empty() {
            return Err(Error::InvalidArgument("no pairs to scan for".into()));
        }
        // Strings shared between pairs are searched once.
        let mut ids: HashMap<String, usize> = HashMap::new();
        let mut patterns: Vec<String> = Vec::new();
        let mut intern = |s: &str| -> usize {
            *ids.entry(s.to_string()).or_insert_with(|| {
                patterns.push(s.to_string());
                patterns.len() - 1
            })
        };
        let index: Vec<(usize, usize)> = pairs.iter().map(|p| (intern(&p.cause), intern(&p.effect))).collect();
        let automaton = AhoCorasick::builder()
            .ascii_case_insensitive(true)
            .match_kind(MatchKind::Standard)
            .kind(Some(AhoCorasickKind::DFA))
            .build(&patterns)
            .map_err(|e| Error::InvalidArgument(format!("building matcher: {e}")))?;
        let n = patterns.len();
        Ok(Scanner {
            pairs,
            index,
            patterns: n,
            automaton,
            opts,
        })
    }

    pub fn pairs(&self) -> &[PairSpec] {
        &self.pairs
    }

    pub fn options(&self) -> ScanOptions {
        self.opts
    }

    pub fn empty_result(&self) -> ScanResult {
        ScanResult::empty(self.pairs.len())
    }

    /// Byte offset of the first accepted mention of each pattern.
    fn first_mentions(&self, text: &str, first: &mut [usize]) {
        first.fill(usize::MAX);
        let mut found = 0;
        // Overlapping matches arrive in order of end offset. Each pattern has
        // a fixed length, so its first report is also its earliest start.
        for m in self.automaton.find_overlapping_iter(text) {
            let p = m.pattern().as_usize();
            if first[p] != usize::MAX {
                continue;
            }
            if self.opts.word_boundary && !at_word_boundary(text, m.start(), m.end()) {
                continue;
            }
            first[p] = m.start();
            found += 1;
            if found == self.patterns {
                break;
            }
        }
    }

    /// Adds one document to `acc`.
    pub fn scan_document(&self, text: &str, acc: &mut ScanResult, first: &mut Vec<usize>) {
        first.resize(self.patterns, usize::MAX);
        self.first_mentions(text, first);
        for (k, &(pc, pe)) in self.index.iter().enumerate() {
            let (a, b) = (first[pc], first[pe]);
            if a == usize::MAX || b == usize::MAX || a == b {
                continue;
            }
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            // A char is at most four bytes, so larger byte gaps cannot fit.
            if hi - lo > 4 * self.opts.window || text[lo..hi].chars().count() > self.opts.window {
                continue;
            }
            if a < b {
                acc.counts[k].x_first += 1;
            } else {
                acc.counts[k].y_first += 1;
            }
        }
        acc.documents += 1;
        acc.bytes += text.len() as u64;
    }

    /// Scans documents in parallel.
    pub fn scan<S: AsRef<str> + Sync>(&self, docs: &[S]) -> ScanResult {
        docs.par_iter()
            .fold(
                || (self.empty_result(), Vec::new()),
                |(mut acc, mut first), d| {
                    self.scan_document(d.as_ref(), &mut acc, &mut first);
                    (acc, first)
                },
            )
            .map(|(acc, _)| acc)
            .reduce(|| self.empty_result(), ScanResult::merge)
    }
}

fn at_word_boundary(text: &str, start: usize, end: usize) -> bool {
    let before = text[..start].chars().next_back();
    let after = text[end..].chars().next();
    !before.is_some_and(char::is_alphanumeric) && !after.is_some_and(char::is_alphanumeric)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scanner(pairs: &[(&str, &str)], window: usize) -> Scanner {
        let pairs = pairs.iter().map(|(a, b)| PairSpec::new(a, b).unwrap()).collect();
        Scanner::new(
            pairs,
            ScanOptions {
                window,
                word_boundary: false,
            },
        )
        .unwrap()
    }

    fn one(s: &Scanner, doc: &str) -> PairCounts {
        s.scan(&[doc]).counts[0]
    }

    #[test]
    fn basic_order() {
        let s = scanner(&[("smoking", "lung cancer")], 50);
        assert_eq!(one(&s, "smoking causes lung cancer").x_first, 1);
        assert_eq!(one(&s, "Lung cancer? Blame SMOKING.").y_first, 1);
        assert_eq!(one(&s, "smoking only").total(), 0);
        assert_eq!(one(&s, "").total(), 0);
    }

    #[test]
    fn window_is_between_first_starts() {
        let s = scanner(&[("ab", "cd")], 50);
        let doc = |gap: usize| format!("ab{}cd", "x".repeat(gap - 2));
        assert_eq!(one(&s, &doc(50)).x_first, 1);
        assert_eq!(one(&s, &doc(51)).total(), 0);
        // A later, closer mention does not rescue a distant first one.
        assert_eq!(one(&s, &format!("{} ab cd", doc(200))).total(), 0);
        // Gaps count characters, not bytes.
        let wide = format!("ab{}cd", "é".repeat(48));
        assert_eq!(one(&s, &wide).x_first, 1);
        let wide = format!("ab{}cd", "é".repeat(49));
        assert_eq!(one(&s, &wide).total(), 0);
    }

    #[test]
    fn overlapping_and_shared_patterns() {
        let s = scanner(&[("stress", "headache"), ("migraine", "headache"), ("financial stress", "stress")], 50);
        let r = s.scan(&["financial stress gives me a headache", "headache from a migraine"]);
        assert_eq!(r.counts[0], PairCounts { x_first: 1, y_first: 0 });
        assert_eq!(r.counts[1], PairCounts { x_first: 0, y_first: 1 });
        assert_eq!(r.counts[2], PairCounts { x_first: 1, y_first: 0 });
        assert_eq!(r.documents, 2);
    }

    #[test]
    fn word_boundary_mode() {
        let pairs = vec![PairSpec::new("age", "height").unwrap()];
        let loose = Scanner::new(pairs.clone(), ScanOptions::default()).unwrap();
        let strict = Scanner::new(
            pairs,
            ScanOptions {
                window: 50,
                word_boundary: true,
            },
        )
        .unwrap();
        let doc = "height of the page; age";
        assert_eq!(one(&loose, doc).x_first, 0);
        assert_eq!(one(&loose, doc).y_first, 1);
        let doc = "the image shows height, then age";
        assert_eq!(one(&loose, doc).x_first, 1);
        assert_eq!(one(&strict, doc).y_first, 1);
    }

    #[test]
    fn rejects_zero_window() {
        let pairs = vec![PairSpec::new("a", "b").unwrap()];
        assert!(Scanner::new(pairs, ScanOptions { window: 0, word_boundary: false }).is_err());
    }
}
