//! Dataset variants: scenario sampling, verbalization, explicit-statement
//! augmentation, and export.

mod config;
mod manifest;
mod record;

use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

pub use config::{Augmentation, DatasetConfig, Positions, Split, PRESETS};
pub use manifest::{AugmentationInfo, GraphInfo, Manifest, PairCount, SplitStats, TemplateInfo};
pub use record::{DatasetRecord, StatementRecord};

use crate::error::{Error, Result};
use crate::eval::TestSets;
use crate::graph::{EventId, GraphPair};
use crate::provenance::{sha256_hex, write_atomic, write_json, Provenance};
use crate::rng;
use crate::scenario::{RelationInstance, RelationKind, ScenarioSampler};
use crate::verbalizer::{TemplateLibrary, Verbalizer};

// Rendering and augmentation use streams keyed off a salted seed so that
// scenario structure does not depend on position policies.
const RENDER_SALT: u64 = 0x7265_6e64_6572_0001;
const AUGMENT_SALT: u64 = 0x6175_676d_656e_0002;

pub const TRAIN_JSONL: &str = "train.jsonl";
pub const VALIDATION_JSONL: &str = "validation.jsonl";
pub const TRAIN_TXT: &str = "train.txt";
pub const VALIDATION_TXT: &str = "validation.txt";
pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug)]
pub struct Dataset {
    pub train: Vec<DatasetRecord>,
    pub validation: Vec<DatasetRecord>,
    pub manifest: Manifest,
}

/// Builds a dataset over a fixed graph pair. Output is identical for any
/// worker count.
pub fn build_dataset(pair: &GraphPair, cfg: &DatasetConfig, workers: Option<usize>) -> Result<Dataset> {
    cfg.validate()?;
    let library = TemplateLibrary::builtin(cfg.templates);
    let verbalizer = Verbalizer::new(&library, cfg.positions.policies())?;
    let sampler = ScenarioSampler::new(&pair.causal, &pair.relation);

    let make = |i: u64| -> Result<DatasetRecord> {
        let scenario = sampler.sample(i, cfg.relations, &mut rng::stream(cfg.seed, i))?;
        let rendered = verbalizer.render_all(&scenario.relations, &mut rng::stream(cfg.seed ^ RENDER_SALT, i))?;
        Ok(DatasetRecord::new(i, scenario.chains, scenario.resamples, &rendered))
    };
    let run = || (0..cfg.num_scenarios).into_par_iter().map(make).collect::<Result<Vec<_>>>();
    let mut records = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };

    let split = cfg.split();
    let validation = records.split_off(split.train as usize);
    let mut train = records;

    let augmentation = match &cfg.augmentation {
        Some(aug) => {
            let mut rng = rng::stream(cfg.seed ^ AUGMENT_SALT, 0);
            Some(augment_explicit(&mut train, cfg.num_scenarios, pair, aug, &verbalizer, &mut rng)?)
        }
        None => None,
    };

    let manifest = Manifest {
        provenance: None,
        config: cfg.clone(),
        graph: GraphInfo {
            n: pair.causal.n(),
            seed: pair.causal.seed(),
            edges: pair.causal.dag().edge_count(),
            sha256: sha256_hex(pair.to_json().as_bytes()),
        },
        templates: TemplateInfo {
            name: library.name().to_string(),
            sha256: library.sha256().to_string(),
        },
        warnings: cfg.warnings(),
        train: SplitStats::from_records(&train),
        validation: SplitStats::from_records(&validation),
        augmentation,
    };
    Ok(Dataset {
        train,
        validation,
        manifest,
    })
}

/// Injects explicit causal statements for a random subset of edges, and
/// explicit non-causal statements for a matched sample of unrelated pairs,
/// into training scenarios that mention both events. Pairs never mentioned
/// together get a new one-statement scenario with the next free id.
pub fn augment_explicit<R: Rng + ?Sized>(
    train: &mut Vec<DatasetRecord>,
    first_free_id: u64,
    pair: &GraphPair,
    aug: &Augmentation,
    verbalizer: &Verbalizer,
    rng: &mut R,
) -> Result<AugmentationInfo> {
    if !(0.0..=1.0).contains(&aug.seen_fraction) {
        return Err(Error::Config(format!("seen_fraction {} outside [0, 1]", aug.seen_fraction)));
    }
    let sets = TestSets::build(&pair.causal);
    let edges = &sets.causal;
    let k = seen_count(aug.seen_fraction, edges.len());
    let mut picked = index::sample(rng, edges.len(), k).into_vec();
    picked.sort_unstable();
    let mut is_seen = vec![false; edges.len()];
    for &i in &picked {
        is_seen[i] = true;
    }
    let (seen, unseen): (Vec<_>, Vec<_>) = edges.iter().zip(&is_seen).partition(|(_, &s)| s);
    let seen: Vec<(EventId, EventId)> = seen.into_iter().map(|(e, _)| *e).collect();
    let unseen: Vec<(EventId, EventId)> = unseen.into_iter().map(|(e, _)| *e).collect();

    let m = aug.unrelated_pairs.unwrap_or(edges.len()).min(sets.unrelated.len());
    let mut picked = index::sample(rng, sets.unrelated.len(), m).into_vec();
    picked.sort_unstable();
    let not_causal: Vec<(EventId, EventId)> = picked
        .into_iter()
        .map(|i| {
            let (a, b) = sets.unrelated[i];
            if rng.random::<bool>() {
                (b, a)
            } else {
                (a, b)
            }
        })
        .collect();

    let mut index: HashMap<EventId, Vec<usize>> = HashMap::new();
    for (i, rec) in train.iter().enumerate() {
        let mut events: Vec<EventId> = rec.statements.iter().flat_map(|s| s.relation().events()).collect();
        events.sort_unstable();
        events.dedup();
        for e in events {
            index.entry(e).or_default().push(i);
        }
    }

    let mut next_id = first_free_id;
    let mut injected = 0u64;
    let mut new_scenarios = 0u64;
    let jobs = seen
        .iter()
        .map(|&e| (RelationKind::ExplicitCausal, e))
        .chain(not_causal.iter().map(|&e| (RelationKind::ExplicitNotCausal, e)));
    for (kind, (x, y)) in jobs {
        for _ in 0..aug.statements_per_edge {
            let rel = RelationInstance::binary(kind, x, y)?;
            let rendered = verbalizer.render(&rel, rng)?;
            let candidates = intersect(
                index.get(&x).map_or(&[][..], Vec::as_slice),
                index.get(&y).map_or(&[][..], Vec::as_slice),
            );
            if candidates.is_empty() {
                let i = train.len();
                train.push(DatasetRecord::new(next_id, Vec::new(), 0, std::slice::from_ref(&rendered)));
                index.entry(x).or_default().push(i);
                index.entry(y).or_default().push(i);
                next_id += 1;
                new_scenarios += 1;
            } else {
                let i = candidates[rng.random_range(0..candidates.len())];
                train[i].push(&rendered);
            }
            injected += 1;
        }
    }

    Ok(AugmentationInfo {
        seen_fraction: aug.seen_fraction,
        statements_per_edge: aug.statements_per_edge,
        seen,
        unseen,
        not_causal,
        injected,
        new_scenarios,
    })
}

/// `ceil(fraction * edges)`, ignoring floating-point dust.
pub fn seen_count(fraction: f64, edges: usize) -> usize {
    ((fraction * edges as f64 - 1e-9).ceil().max(0.0) as usize).min(edges)
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

impl Dataset {
    /// Writes the JSONL, text, and manifest files into `dir`.
    pub fn write(&mut self, dir: &Path, provenance: Option<Provenance>) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
        self.manifest.provenance = provenance;
        for (records, jsonl, txt) in [
            (&self.train, TRAIN_JSONL, TRAIN_TXT),
            (&self.validation, VALIDATION_JSONL, VALIDATION_TXT),
        ] {
            let mut lines = Vec::new();
            let mut texts = Vec::new();
            for rec in records {
                serde_json::to_writer(&mut lines, rec)?;
                lines.push(b'\n');
                texts.extend_from_slice(rec.text.as_bytes());
                texts.push(b'\n');
            }
            write_atomic(&dir.join(jsonl), &lines)?;
            write_atomic(&dir.join(txt), &texts)?;
        }
        write_json(&dir.join(MANIFEST), &self.manifest)
    }
}

pub fn read_records(path: &Path) -> Result<Vec<DatasetRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::file(path, e))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}
