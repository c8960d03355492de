use std::collections::{BTreeMap, HashMap};
use std::time::Duration;

use super::file::ScoreResponse;
use super::{ScoreQuery, Scorer, ScorerInfo};
use crate::error::{Error, Result};

const DEFAULT_CHUNK: usize = 256;
const BUSY_RETRIES: u32 = 5;

/// Client for a scoring server exposing `POST /score` (one request object)
/// and `POST /score_batch` (an array). Responses are matched by id.
pub struct HttpScorer {
    base: String,
    agent: ureq::Agent,
    chunk: usize,
}

impl HttpScorer {
    pub fn new(base: &str) -> Self {
        HttpScorer {
            base: base.trim_end_matches('/').to_string(),
            agent: ureq::AgentBuilder::new()
                .timeout_connect(Duration::from_secs(10))
                .timeout(Duration::from_secs(600))
                .build(),
            chunk: DEFAULT_CHUNK,
        }
    }

    pub fn with_chunk(mut self, chunk: usize) -> Self {
        self.chunk = chunk.max(1);
        self
    }

    fn post<T: serde::de::DeserializeOwned>(&self, path: &str, body: serde_json::Value) -> Result<Option<T>> {
        let url = format!("{}{path}", self.base);
        let mut attempt = 0;
        loop {
            match self.agent.post(&url).send_json(body.clone()) {
                Ok(resp) => {
                    return resp
                        .into_json()
                        .map(Some)
                        .map_err(|e| Error::Scorer(format!("{url}: bad response body: {e}")))
                }
                Err(ureq::Error::Status(404, _)) => return Ok(None),
                Err(ureq::Error::Status(503, _)) if attempt < BUSY_RETRIES => {
                    attempt += 1;
                    std::thread::sleep(Duration::from_millis(100 << attempt));
                }
                Err(ureq::Error::Status(code, resp)) => {
                    let detail = resp.into_string().unwrap_or_default();
                    return Err(Error::Scorer(format!("{url}: HTTP {code}: {}", detail.trim())));
                }
                Err(e) => return Err(Error::Scorer(e.to_string())),
            }
        }
    }

    fn request(q: &ScoreQuery) -> serde_json::Value {
        serde_json::json!({"id": q.id, "prefix": q.prefix, "completion": q.completion})
    }

    fn score_chunk(&self, queries: &[ScoreQuery]) -> Result<Vec<ScoreResponse>> {
        let body = serde_json::Value::Array(queries.iter().map(Self::request).collect());
        if let Some(batch) = self.post::<Vec<ScoreResponse>>("/score_batch", body)? {
            return Ok(batch);
        }
        queries
            .iter()
            .map(|q| {
                self.post::<ScoreResponse>("/score", Self::request(q))?
                    .ok_or_else(|| Error::Scorer(format!("{}: neither /score_batch nor /score exists", self.base)))
            })
            .collect()
    }
}

impl Scorer for HttpScorer {
    fn info(&self) -> ScorerInfo {
        ScorerInfo {
            name: self.base.clone(),
            params: BTreeMap::new(),
        }
    }

    fn score(&self, queries: &[ScoreQuery]) -> Result<Vec<f64>> {
        let mut probs: HashMap<String, f64> = HashMap::with_capacity(queries.len());
        for chunk in queries.chunks(self.chunk) {
            for r in self.score_chunk(chunk)? {
                let p = r.probability()?;
                probs.insert(r.id, p);
            }
        }
        queries
            .iter()
            .map(|q| {
                probs
                    .get(&q.id)
                    .copied()
                    .ok_or_else(|| Error::Scorer(format!("{} returned no score for `{}`", self.base, q.id)))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    use super::*;

    /// Minimal HTTP/1.1 server: scores a completion by its length and
    /// answers in reverse order to exercise id matching.
    fn serve(batch: bool) -> (String, Arc<AtomicUsize>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let hits = Arc::new(AtomicUsize::new(0));
        let counter = hits.clone();
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { break };
                let counter = counter.clone();
                std::thread::spawn(move || {
                    let mut reader = BufReader::new(stream.try_clone().unwrap());
                    let mut out = stream;
                    loop {
                        let mut start = String::new();
                        if reader.read_line(&mut start).unwrap_or(0) == 0 {
                            return;
                        }
                        let path = start.split_whitespace().nth(1).unwrap_or("").to_string();
                        let mut len = 0;
                        loop {
                            let mut h = String::new();
                            reader.read_line(&mut h).unwrap();
                            if h == "\r\n" {
                                break;
                            }
                            if let Some(v) = h.to_ascii_lowercase().strip_prefix("content-length:") {
                                len = v.trim().parse().unwrap();
                            }
                        }
                        let mut body = vec![0; len];
                        reader.read_exact(&mut body).unwrap();
                        counter.fetch_add(1, Ordering::SeqCst);
                        let v: serde_json::Value = serde_json::from_slice(&body).unwrap();
                        let score = |r: &serde_json::Value| {
                            let c = r["completion"].as_str().unwrap();
                            serde_json::json!({"id": r["id"], "logprob": -(c.len() as f64), "num_subtokens": 1})
                        };
                        let (status, reply) = match (path.as_str(), batch) {
                            ("/score_batch", true) => {
                                let mut rs: Vec<_> = v.as_array().unwrap().iter().map(score).collect();
                                rs.reverse();
                                ("200 OK", serde_json::Value::Array(rs))
                            }
                            ("/score", _) => ("200 OK", score(&v)),
                            _ => ("404 Not Found", serde_json::json!({"error": "no route"})),
                        };
                        let reply = reply.to_string();
                        write!(
                            out,
                            "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{reply}",
                            reply.len()
                        )
                        .unwrap();
                    }
                });
            }
        });
        (format!("http://{addr}"), hits)
    }

    fn queries(n: usize) -> Vec<ScoreQuery> {
        (0..n)
            .map(|i| ScoreQuery {
                id: format!("q{i}"),
                prefix: "event1 can cause ".into(),
                completion: format!("event{}", i + 2),
                statement: None,
            })
            .collect()
    }

    #[test]
    fn batch_endpoint_matches_ids() {
        let (url, hits) = serve(true);
        let s = HttpScorer::new(&url).with_chunk(4);
        let qs = queries(10);
        let p = s.score(&qs).unwrap();
        for (q, p) in qs.iter().zip(&p) {
            assert!((p - (-(q.completion.len() as f64)).exp()).abs() < 1e-15);
        }
        assert_eq!(hits.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn falls_back_to_single_endpoint() {
        let (url, _) = serve(false);
        let s = HttpScorer::new(&url);
        let qs = queries(3);
        let p = s.score(&qs).unwrap();
        assert!((p[2] - (-6.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn unreachable_server_is_a_scorer_error() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        drop(listener);
        let err = HttpScorer::new(&format!("http://{addr}")).score(&queries(1)).unwrap_err();
        assert!(err.is_scorer());
    }
}
