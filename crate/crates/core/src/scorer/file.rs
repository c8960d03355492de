use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ScoreQuery, Scorer, ScorerInfo};
use crate::error::{Error, Result};
use crate::provenance::write_atomic;

const MISSING_SHOWN: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub id: String,
    pub logprob: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_subtokens: Option<u32>,
}

impl ScoreResponse {
    pub(crate) fn probability(&self) -> Result<f64> {
        if !self.logprob.is_finite() || self.logprob > 1e-9 {
            return Err(Error::Scorer(format!(
                "response `{}` has invalid logprob {}",
                self.id, self.logprob
            )));
        }
        Ok(self.logprob.min(0.0).exp())
    }
}

/// Reads precomputed `{id, logprob}` lines, e.g. produced by an external
/// model from the requests written by [`write_requests`].
pub struct FileScorer {
    path: PathBuf,
    probs: HashMap<String, f64>,
}

impl FileScorer {
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
        let mut probs = HashMap::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::file(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let r: ScoreResponse = serde_json::from_str(&line)
                .map_err(|e| Error::Scorer(format!("{}:{}: {e}", path.display(), i + 1)))?;
            let p = r.probability()?;
            probs.insert(r.id, p);
        }
        Ok(FileScorer {
            path: path.to_path_buf(),
            probs,
        })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

impl Scorer for FileScorer {
    fn info(&self) -> ScorerInfo {
        ScorerInfo {
            name: format!("file:{}", self.path.display()),
            params: BTreeMap::new(),
        }
    }

    fn score(&self, queries: &[ScoreQuery]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(queries.len());
        let mut missing = Vec::new();
        for q in queries {
            match self.probs.get(&q.id) {
                Some(&p) => out.push(p),
                None => missing.push(q.id.as_str()),
            }
        }
        if missing.is_empty() {
            return Ok(out);
        }
        missing.sort_unstable();
        missing.dedup();
        let shown = missing[..missing.len().min(MISSING_SHOWN)].join(", ");
        let more = if missing.len() > MISSING_SHOWN {
            format!(" and {} more", missing.len() - MISSING_SHOWN)
        } else {
            String::new()
        };
        Err(Error::Scorer(format!(
            "{} has no score for {} queries: {shown}{more}",
            self.path.display(),
            missing.len()
        )))
    }
}

/// Writes `{id, prefix, completion}` lines.
pub fn write_requests(path: &Path, queries: &[ScoreQuery]) -> Result<()> {
    let mut buf = Vec::new();
    for q in queries {
        serde_json::to_writer(&mut buf, q)?;
        buf.push(b'\n');
    }
    write_atomic(path, &buf)
}

pub fn read_requests(path: &Path) -> Result<Vec<ScoreQuery>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn query(id: &str) -> ScoreQuery {
        ScoreQuery {
            id: id.into(),
            prefix: "event1 can cause ".into(),
            completion: "event2".into(),
            statement: None,
        }
    }

    #[test]
    fn converts_logprobs_and_reports_missing_ids() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("resp.jsonl");
        std::fs::write(
            &path,
            "{\"id\":\"a\",\"logprob\":-0.5}\n\n{\"id\":\"b\",\"logprob\":0.0,\"num_subtokens\":2}\n",
        )
        .unwrap();
        let s = FileScorer::load(&path).unwrap();
        let p = s.score(&[query("a"), query("b")]).unwrap();
        assert!((p[0] - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(p[1], 1.0);
        let err = s.score(&[query("a"), query("zz"), query("yy")]).unwrap_err();
        assert!(err.is_scorer());
        let msg = err.to_string();
        assert!(msg.contains("2 queries") && msg.contains("yy, zz"), "{msg}");
    }

    #[test]
    fn rejects_bad_logprobs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("resp.jsonl");
        std::fs::write(&path, "{\"id\":\"a\",\"logprob\":1.5}\n").unwrap();
        assert!(FileScorer::load(&path).is_err());
        std::fs::write(&path, "{\"id\":\"a\"}\n").unwrap();
        assert!(FileScorer::load(&path).is_err());
    }

    #[test]
    fn requests_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("req.jsonl");
        write_requests(&path, &[query("a"), query("b")]).unwrap();
        let line = std::fs::read_to_string(&path).unwrap();
        assert!(line.starts_with(r#"{"id":"a","prefix":"event1 can cause ","completion":"event2"}"#));
        assert_eq!(read_requests(&path).unwrap(), vec![query("a"), query("b")]);
    }
}
