use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use relbench::corpus::{aggregate, scan_path, InputFormat, PairSpec, ScanOptions, Scanner};
use relbench::dataset::{build_dataset, DatasetConfig, Manifest, PRESETS};
use relbench::eval::{run_suite, EvalPlan, Evaluator, Order, Task, TieBreak};
use relbench::provenance::{sha256_hex, write_atomic, write_json, Provenance};
use relbench::scorer::{write_requests, ScoreQuery, Scorer, ScorerInfo, ScorerUri};
use relbench::verbalizer::{Position, TemplateChoice, TemplateLibrary};
use relbench::GraphPair;

/// Worker threads for every parallel stage. Unset means one per core.
const WORKERS_ENV: &str = "RELBENCH_WORKERS";

#[derive(Parser)]
#[command(name = "relbench", version, about = "Causal-relation benchmark generation, evaluation, and corpus analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a causal graph and its relation graph.
    GenGraph {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a train/validation dataset from a graph.
    GenData {
        #[arg(long)]
        graph: PathBuf,
        /// JSON dataset config.
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Named config; `sweep-P` selects temporal statements with mix P.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Overrides the config's sampling seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the scenario count; the split is rescaled to 90/10.
        #[arg(long)]
        scenarios: Option<u64>,
    },
    /// Score the inference tasks and diagnostic reports.
    Eval {
        #[command(flatten)]
        common: EvalArgs,
        /// oracle:<name>[?k=v&...], file:<responses.jsonl>, or http://host:port
        #[arg(long)]
        scorer: String,
        /// JSON report path; a markdown copy is written beside it.
        #[arg(long)]
        report: PathBuf,
        /// Keep per-pair probabilities in the report.
        #[arg(long)]
        keep_pairs: bool,
    },
    /// Write every query an eval run would send, for offline scoring.
    ExportQueries {
        #[command(flatten)]
        common: EvalArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Count cause-first versus effect-first mentions in a corpus.
    AnalyzeCorpus {
        /// Tab-separated cause/effect pairs; the built-in list when omitted.
        #[arg(long)]
        pairs: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        window: usize,
        #[arg(long, default_value_t = 100)]
        min_cooccur: u64,
        /// A file, or a directory scanned recursively.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Jsonl)]
        format: Format,
        /// Require mentions to sit on word boundaries.
        #[arg(long)]
        word_boundary: bool,
        /// Output prefix; writes PREFIX.csv and PREFIX.json.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Training manifest; required by trained oracles and diagnostics.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Tasks to run (repeatable); all by default.
    #[arg(long = "task", value_parser = parse_task)]
    tasks: Vec<Task>,
    #[arg(long, value_enum, default_value_t = OrderArg::Both)]
    order: OrderArg,
    #[arg(long, value_enum, default_value_t = TieArg::Fixed)]
    tie_break: TieArg,
    /// Seed for random tie-breaking.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restrict task test sets to pairs mentioned together in training.
    #[arg(long)]
    restrict: bool,
    /// Skip position, post-hoc, frequency and seen/unseen reports.
    #[arg(long)]
    no_diagnostics: bool,
    #[arg(long, default_value_t = 10)]
    buckets: usize,
    /// Dominant training order; inferred from the manifest by default.
    #[arg(long, value_enum)]
    train_order: Option<OrderArg>,
    /// canonical, verbatim, or a template TSV path.
    #[arg(long, default_value = "canonical")]
    templates: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Jsonl,
    Txt,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum OrderArg {
    Xy,
    Yx,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieArg {
    Fixed,
    Random,
}

fn parse_task(s: &str) -> Result<Task, String> {
    s.parse().map_err(|e: relbench::Error| e.to_string())
}

fn provenance() -> Provenance {
    Provenance::new(std::env::args().skip(1))
}

fn hashed(p: Provenance, name: &str, path: &Path) -> anyhow::Result<Provenance> {
    Ok(p.hash_file(name, path)?)
}

fn load_graph(path: &Path) -> anyhow::Result<GraphPair> {
    GraphPair::load(path).with_context(|| format!("loading graph {}", path.display()))
}

fn workers() -> anyhow::Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => bail!(relbench::Error::InvalidArgument(format!("{WORKERS_ENV}=`{v}` is not a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}

fn library(spec: &str) -> anyhow::Result<TemplateLibrary> {
    Ok(match spec {
        "canonical" => TemplateLibrary::builtin(TemplateChoice::Canonical),
        "verbatim" => TemplateLibrary::builtin(TemplateChoice::Verbatim),
        path => TemplateLibrary::load(Path::new(path))?,
    })
}

struct EvalInputs {
    graph: GraphPair,
    manifest: Option<Manifest>,
    library: TemplateLibrary,
    plan: EvalPlan,
    tie_break: TieBreak,
    provenance: Provenance,
}

fn eval_inputs(a: &EvalArgs) -> anyhow::Result<EvalInputs> {
    let graph = load_graph(&a.graph)?;
    let mut prov = hashed(provenance(), "graph", &a.graph)?;
    let manifest = match &a.manifest {
        Some(p) => {
            prov = hashed(prov, "manifest", p)?;
            Some(Manifest::load(p).with_context(|| format!("loading manifest {}", p.display()))?)
        }
        None => None,
    };
    let library = library(&a.templates)?;
    prov = prov.with_input("templates", library.sha256());
    let plan = EvalPlan {
        tasks: if a.tasks.is_empty() { Task::ALL.to_vec() } else { a.tasks.clone() },
        order: match a.order {
            OrderArg::Xy => Order::Xy,
            OrderArg::Yx => Order::Yx,
            OrderArg::Both => Order::Both,
        },
        restrict: a.restrict,
        diagnostics: !a.no_diagnostics,
        buckets: a.buckets,
        train_order: match a.train_order {
            Some(OrderArg::Xy) => Some(Position::Xy),
            Some(OrderArg::Yx) => Some(Position::Yx),
            Some(OrderArg::Both) => bail!(relbench::Error::InvalidArgument("--train-order is xy or yx".into())),
            None => None,
        },
    };
    let tie_break = match a.tie_break {
        TieArg::Fixed => TieBreak::Fixed,
        TieArg::Random => TieBreak::Random(a.seed),
    };
    Ok(EvalInputs {
        graph,
        manifest,
        library,
        plan,
        tie_break,
        provenance: prov,
    })
}

/// Collects queries instead of scoring them.
#[derive(Default)]
struct Recorder {
    seen: Mutex<(HashSet<String>, Vec<ScoreQuery>)>,
}

impl Scorer for Recorder {
    fn info(&self) -> ScorerInfo {
        ScorerInfo {
            name: "export".into(),
            params: Default::default(),
        }
    }

    fn score(&self, queries: &[ScoreQuery]) -> relbench::Result<Vec<f64>> {
        let mut guard = self.seen.lock().expect("recorder lock");
        let (ids, out) = &mut *guard;
        for q in queries {
            if ids.insert(q.id.clone()) {
                out.push(q.clone());
            }
        }
        Ok(vec![0.5; queries.len()])
    }
}

fn with_extension(path: &Path, ext: &str) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".");
    p.push(ext);
    PathBuf::from(p)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::GenGraph { n, seed, out } => {
            let pair = GraphPair::generate(n, seed)?;
            write_atomic(&out, pair.to_json_with(Some(provenance())).as_bytes())?;
            log::info!("wrote {} ({} edges)", out.display(), pair.causal.edges().len());
        }
        Command::GenData {
            graph,
            config,
            preset,
            out_dir,
            seed,
            scenarios,
        } => {
            let pair = load_graph(&graph)?;
            let mut prov = hashed(provenance(), "graph", &graph)?;
            let mut cfg = match (&config, &preset) {
                (Some(path), _) => {
                    prov = hashed(prov, "config", path)?;
                    DatasetConfig::load(path)?
                }
                (None, Some(name)) => DatasetConfig::preset(name)?,
                (None, None) => bail!(relbench::Error::InvalidArgument(format!(
                    "give --config or --preset (one of {})",
                    PRESETS.join(", ")
                ))),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = scenarios {
                cfg = cfg.with_scenarios(n);
            }
            let mut data = build_dataset(&pair, &cfg, workers()?)?;
            for w in &data.manifest.warnings {
                log::warn!("{w}");
            }
            data.write(&out_dir, Some(prov))?;
        }
        Command::Eval {
            common,
            scorer,
            report,
            keep_pairs,
        } => {
            let inputs = eval_inputs(&common)?;
            let uri: ScorerUri = scorer.parse()?;
            let mut prov = inputs.provenance;
            if let ScorerUri::File(p) = &uri {
                prov = hashed(prov, "responses", Path::new(p))?;
            }
            let scorer = uri.open(Some(&inputs.graph.causal), inputs.manifest.as_ref())?;
            let eval = Evaluator::new(scorer.as_ref())
                .with_library(inputs.library)
                .with_tie_break(inputs.tie_break)
                .keep_pairs(keep_pairs);
            let mut r = run_suite(&eval, &inputs.graph.causal, inputs.manifest.as_ref(), &inputs.plan)?;
            r.provenance = Some(prov);
            write_atomic(&report, r.to_json().as_bytes())?;
            write_atomic(&report.with_extension("md"), r.to_markdown().as_bytes())?;
            for t in &r.tasks {
                println!("{}\t{}\t{:.4}", t.task, t.test_set, t.accuracy);
            }
        }
        Command::ExportQueries { common, out } => {
            let inputs = eval_inputs(&common)?;
            let recorder = Recorder::default();
            let eval = Evaluator::new(&recorder)
                .with_library(inputs.library)
                .with_tie_break(inputs.tie_break);
            run_suite(&eval, &inputs.graph.causal, inputs.manifest.as_ref(), &inputs.plan)?;
            let (_, queries) = recorder.seen.into_inner().expect("recorder lock");
            write_requests(&out, &queries)?;
            // The request file is a bare protocol stream, so provenance goes
            // beside it.
            let prov = inputs.provenance.with_input("requests", sha256_hex(&std::fs::read(&out)?));
            write_json(&with_extension(&out, "provenance.json"), &prov)?;
            println!("{} queries", queries.len());
        }
        Command::AnalyzeCorpus {
            pairs,
            window,
            min_cooccur,
            input,
            format,
            word_boundary,
            out,
        } => {
            let mut prov = provenance();
            let pair_list = match &pairs {
                Some(p) => {
                    prov = hashed(prov, "pairs", p)?;
                    PairSpec::load_list(p)?
                }
                None => PairSpec::defaults(),
            };
            let opts = ScanOptions { window, word_boundary };
            let scanner = Scanner::new(pair_list, opts)?;
            let format = match format {
                Format::Jsonl => InputFormat::Jsonl,
                Format::Txt => InputFormat::Txt,
            };
            let scan = scan_path(&scanner, &input, format)?;
            let mut report = aggregate(scanner.pairs(), &scan, opts, min_cooccur);
            report.provenance = Some(prov);
            write_atomic(&with_extension(&out, "csv"), report.to_csv()?.as_bytes())?;
            write_atomic(&with_extension(&out, "json"), report.to_json().as_bytes())?;
            match report.x_first_fraction {
                Some(f) => println!("{} pairs kept, cause first {:.2}%", report.pairs.len(), 100.0 * f),
                None => println!("no pair reached {min_cooccur} co-occurrences"),
            }
        }
    }
    Ok(())
}

/// 2 for bad data or arguments, 3 when a scorer backend failed.
fn exit_code(err: &anyhow::Error) -> u8 {
    let scorer = err
        .chain()
        .any(|e| e.downcast_ref::<relbench::Error>().is_some_and(relbench::Error::is_scorer));
    if scorer {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match workers() {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("thread pool: {e}");
            }
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
