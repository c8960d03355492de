use std::borrow::Cow;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ScanResult, Scanner};
use crate::error::{Error, Result};

/// Lines buffered before a parallel scan round.
const BATCH_BYTES: usize = 16 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    /// One JSON object per line with a string `text` field.
    Jsonl,
    /// Each file is one document.
    Txt,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(InputFormat::Jsonl),
            "txt" => Ok(InputFormat::Txt),
            _ => Err(Error::InvalidArgument(format!("unknown corpus format `{s}`"))),
        }
    }
}

#[derive(Deserialize)]
struct Doc<'a> {
    #[serde(borrow)]
    text: Cow<'a, str>,
}

/// Regular files under `path`, sorted, or `path` itself.
fn files(path: &Path) -> Result<Vec<PathBuf>> {
    let meta = std::fs::metadata(path).map_err(|e| Error::file(path, e))?;
    if !meta.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut out = Vec::new();
    let mut stack = vec![path.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).map_err(|e| Error::file(&dir, e))? {
            let entry = entry.map_err(|e| Error::file(&dir, e))?;
            let p = entry.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.is_file() {
                out.push(p);
            }
        }
    }
    out.sort();
    Ok(out)
}

fn scan_lines(scanner: &Scanner, lines: &[Vec<u8>]) -> ScanResult {
    lines
        .par_iter()
        .fold(
            || (scanner.empty_result(), Vec::new()),
            |(mut acc, mut first), line| {
                match serde_json::from_slice::<Doc>(line) {
                    Ok(doc) => scanner.scan_document(&doc.text, &mut acc, &mut first),
                    Err(_) => acc.skipped += 1,
                }
                (acc, first)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(|| scanner.empty_result(), ScanResult::merge)
}

fn scan_jsonl(scanner: &Scanner, path: &Path) -> Result<ScanResult> {
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    let mut reader = BufReader::with_capacity(1 << 20, file);
    let mut total = scanner.empty_result();
    let mut batch: Vec<Vec<u8>> = Vec::new();
    let mut batch_bytes = 0;
    loop {
        let mut line = Vec::new();
        let n = reader.read_until(b'\n', &mut line).map_err(|e| Error::file(path, e))?;
        if n > 0 && !line.trim_ascii().is_empty() {
            batch_bytes += line.len();
            batch.push(line);
        }
        if n == 0 || batch_bytes >= BATCH_BYTES {
            total = total.merge(scan_lines(scanner, &batch));
            batch.clear();
            batch_bytes = 0;
        }
        if n == 0 {
            break;
        }
    }
    Ok(total)
}

fn scan_txt(scanner: &Scanner, paths: &[PathBuf]) -> ScanResult {
    paths
        .par_iter()
        .fold(
            || (scanner.empty_result(), Vec::new()),
            |(mut acc, mut first), p| {
                match std::fs::read(p).map(String::from_utf8) {
                    Ok(Ok(text)) => scanner.scan_document(&text, &mut acc, &mut first),
                    Ok(Err(_)) | Err(_) => {
                        log::debug!("skipping unreadable document {}", p.display());
                        acc.skipped += 1;
                    }
                }
                (acc, first)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(|| scanner.empty_result(), ScanResult::merge)
}

/// Scans a file or a directory tree. Undecodable documents are skipped and
/// counted in [`ScanResult::skipped`].
pub fn scan_path(scanner: &Scanner, path: &Path, format: InputFormat) -> Result<ScanResult> {
    let paths = files(path)?;
    let result = match format {
        InputFormat::Txt => scan_txt(scanner, &paths),
        InputFormat::Jsonl => {
            let mut total = scanner.empty_result();
            for p in &paths {
                total = total.merge(scan_jsonl(scanner, p)?);
            }
            total
        }
    };
    if result.skipped > 0 {
        log::warn!("skipped {} unreadable documents", result.skipped);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{PairCounts, PairSpec, ScanOptions};

    fn scanner() -> Scanner {
        Scanner::new(vec![PairSpec::new("rain", "flood").unwrap()], ScanOptions::default()).unwrap()
    }

    #[test]
    fn jsonl_skips_bad_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let body = [
            r#"{"text": "rain then flood", "meta": 1}"#,
            r#"{"text": "Flood after RAIN"}"#,
            "",
            r#"{"nope": 1}"#,
            "not json",
            r#"{"text": "no match"}"#,
        ]
        .join("\n");
        let mut bytes = body.into_bytes();
        bytes.extend_from_slice(b"\n{\"text\": \"rain \xff flood\"}\n");
        std::fs::write(&path, bytes).unwrap();
        let r = scan_path(&scanner(), &path, InputFormat::Jsonl).unwrap();
        assert_eq!(r.counts[0], PairCounts { x_first: 1, y_first: 1 });
        assert_eq!((r.documents, r.skipped), (3, 3));
    }

    #[test]
    fn txt_directory_tree() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("sub")).unwrap();
        std::fs::write(dir.path().join("a.txt"), "rain, flood").unwrap();
        std::fs::write(dir.path().join("sub/b.txt"), "rain and a flood").unwrap();
        std::fs::write(dir.path().join("sub/c.bin"), [0xffu8, 0xfe]).unwrap();
        let r = scan_path(&scanner(), dir.path(), InputFormat::Txt).unwrap();
        assert_eq!(r.counts[0].x_first, 2);
        assert_eq!((r.documents, r.skipped), (2, 1));
        assert!(scan_path(&scanner(), &dir.path().join("missing"), InputFormat::Txt).is_err());
    }
}
