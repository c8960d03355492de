use serde::{Deserialize, Serialize};

use super::{PairSpec, ScanOptions, ScanResult};
use crate::error::{Error, Result};
use crate::provenance::Provenance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub cause: String,
    pub effect: String,
    pub x_first: u64,
    pub y_first: u64,
    pub total: u64,
    pub x_first_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    pub window: usize,
    pub word_boundary: bool,
    pub min_cooccur: u64,
    pub documents: u64,
    pub skipped_documents: u64,
    pub bytes: u64,
    /// Pairs at or above the threshold.
    pub pairs: Vec<PairRow>,
    /// Pairs below the threshold, by name.
    pub dropped: Vec<PairSpec>,
    /// Pooled x-first share over kept pairs; absent when none survive.
    pub x_first_fraction: Option<f64>,
}

/// Keeps pairs co-occurring at least `min_cooccur` times and pools their
/// counts.
pub fn aggregate(pairs: &[PairSpec], scan: &ScanResult, opts: ScanOptions, min_cooccur: u64) -> CorpusReport {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let (mut x, mut all) = (0u64, 0u64);
    for (p, c) in pairs.iter().zip(&scan.counts) {
        let total = c.total();
        if total == 0 || total < min_cooccur {
            dropped.push(p.clone());
            continue;
        }
        x += c.x_first;
        all += total;
        kept.push(PairRow {
            cause: p.cause.clone(),
            effect: p.effect.clone(),
            x_first: c.x_first,
            y_first: c.y_first,
            total,
            x_first_fraction: c.x_first as f64 / total as f64,
        });
    }
    CorpusReport {
        provenance: None,
        window: opts.window,
        word_boundary: opts.word_boundary,
        min_cooccur,
        documents: scan.documents,
        skipped_documents: scan.skipped,
        bytes: scan.bytes,
        pairs: kept,
        dropped,
        x_first_fraction: (all > 0).then(|| x as f64 / all as f64),
    }
}

impl CorpusReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.pairs {
            w.serialize(row).map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
        }
        if self.pairs.is_empty() {
            w.write_record(["cause", "effect", "x_first", "y_first", "total", "x_first_fraction"])
                .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PairCounts;

    fn scan(counts: &[(u64, u64)]) -> ScanResult {
        ScanResult {
            counts: counts.iter().map(|&(x_first, y_first)| PairCounts { x_first, y_first }).collect(),
            documents: 10,
            ..Default::default()
        }
    }

    fn pairs(n: usize) -> Vec<PairSpec> {
        (0..n).map(|i| PairSpec::new(&format!("c{i}"), &format!("e{i}")).unwrap()).collect()
    }

    #[test]
    fn threshold_and_pooling() {
        let r = aggregate(&pairs(3), &scan(&[(70, 30), (5, 4), (20, 80)]), ScanOptions::default(), 100);
        assert_eq!(r.pairs.len(), 2);
        assert_eq!(r.dropped, vec![PairSpec::new("c1", "e1").unwrap()]);
        assert_eq!(r.x_first_fraction, Some(90.0 / 200.0));
        let csv = r.to_csv().unwrap();
        assert!(csv.starts_with("cause,effect,x_first,y_first,total,x_first_fraction\nc0,e0,70,30,100,0.7\n"), "{csv}");
    }

    #[test]
    fn all_below_threshold_has_no_fraction() {
        let r = aggregate(&pairs(2), &scan(&[(1, 0), (0, 0)]), ScanOptions::default(), 100);
        assert!(r.pairs.is_empty());
        assert_eq!(r.x_first_fraction, None);
        assert!(r.to_csv().unwrap().starts_with("cause,effect"));
        assert!(!r.to_json().contains("\"x_first_fraction\": 0"));
        // Zero co-occurrence never counts, even at threshold 0.
        let r = aggregate(&pairs(2), &scan(&[(1, 0), (0, 0)]), ScanOptions::default(), 0);
        assert_eq!(r.pairs.len(), 1);
    }
}
