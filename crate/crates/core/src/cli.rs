//! The `tupa-mrp` command line.
//!
//! Exit codes: 0 on success, 1 on validation findings or per-graph failures,
//! 2 on usage and I/O errors.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Serialize;

use crate::classifier::{parse_corpus_with_budget, train, Model, TrainConfig};
use crate::companion::{companion_to_rows, rows_to_companion, write_conllu, TokenRow};
use crate::constraints::{load_profile_config, profile_with, FrameworkProfile, ProfileConfig};
use crate::error::{Error, Result};
use crate::evaluator::{score_corpus, score_pair, ScoreParams};
use crate::graph::{corpus_stats, read_mrp, validate, write_mrp, Graph};
use crate::irep::{from_intermediate, to_intermediate, IGraph};
use crate::oracle::{gold_sequence, replay, same_igraph};
use crate::synth::{bundle, sub_seed};

/// Directory searched for relative input paths that do not exist.
pub const DATA_ENV: &str = "TUPA_MRP_DATA";

#[derive(Debug, Parser)]
#[command(name = "tupa-mrp", version, about = "Transition-based meaning representation parsing")]
pub struct Cli {
    /// Worker threads for corpus-parallel work (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// More logging; repeat for more.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert between MRP, the intermediate representation and CoNLL-U.
    Convert(ConvertArgs),
    /// Check graphs against their framework profile.
    Validate(CorpusArgs),
    /// Count graphs and cyclic graphs per framework.
    Stats(StatsArgs),
    /// Dump gold transition sequences.
    Oracle(OracleArgs),
    /// Train a model.
    Train(TrainArgs),
    /// Parse companion data with a model.
    Parse(ParseArgs),
    /// Score system graphs against gold graphs.
    Evaluate(EvaluateArgs),
    /// Write the synthetic corpora bundled with the toolkit.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Mrp,
    Irep,
    Conllu,
    /// MRP companion graphs (input only).
    Companion,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// MRP graphs, one JSON object per line.
    #[arg(short, long)]
    pub input: PathBuf,
    /// Framework tag; defaults to the first graph's framework.
    #[arg(long)]
    pub framework: Option<String>,
    /// TOML file overriding framework profiles.
    #[arg(long)]
    pub profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompanionArg {
    /// Companion graphs; defaults to `<input>.companion.mrp` next to the input.
    #[arg(short, long)]
    pub companion: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub companion: CompanionArg,
    /// Kind of the input file.
    #[arg(long, value_enum, default_value = "mrp")]
    pub from: Format,
    /// Kind of the output.
    #[arg(long, value_enum)]
    pub format: Format,
    /// Output file (default: stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(short, long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub companion: CompanionArg,
    /// Replay every sequence and score it against the gold graph.
    #[arg(long)]
    pub verify: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub companion: CompanionArg,
    /// Where to write the model.
    #[arg(short, long)]
    pub model: PathBuf,
    /// Validation graphs, scored after every epoch to pick the best one.
    #[arg(long)]
    pub dev: Option<PathBuf>,
    #[arg(long)]
    pub dev_companion: Option<PathBuf>,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub epochs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Model to continue training from.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Add the framework-id feature.
    #[arg(long)]
    pub multitask: bool,
    /// Per-epoch metrics as JSON lines (default: stderr).
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Scorer restarts for validation.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub restarts: u64,
    /// Scorer iterations for validation.
    #[arg(long, default_value_t = 500)]
    pub iterations: u64,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    #[arg(short, long)]
    pub model: PathBuf,
    /// Companion graphs of the sentences to parse.
    #[arg(short, long)]
    pub companion: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Steps per sentence before parsing is cut short (default: 10(2n+10)).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub step_budget: Option<u64>,
    #[arg(long)]
    pub profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(short, long)]
    pub gold: PathBuf,
    #[arg(short, long)]
    pub system: PathBuf,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub restarts: u64,
    #[arg(long, default_value_t = 5000)]
    pub iterations: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report the unweighted mean of per-class F as the headline score.
    #[arg(long = "macro")]
    pub macro_average: bool,
    /// Also write the JSON report here.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Target directory.
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 2020)]
    pub seed: u64,
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be positive");
            return 2;
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let result = match &cli.command {
        Command::Convert(a) => convert(a),
        Command::Validate(a) => validate_cmd(a),
        Command::Stats(a) => stats(a),
        Command::Oracle(a) => oracle(a),
        Command::Train(a) => train_cmd(a),
        Command::Parse(a) => parse_cmd(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Generate(a) => generate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => 2,
                _ => 1,
            }
        }
    }
}

/// `path` itself if it exists, else the same relative path under the data
/// directory named by [`DATA_ENV`].
pub fn resolve(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_owned();
    }
    if let Some(dir) = std::env::var_os(DATA_ENV) {
        let candidate = Path::new(&dir).join(path);
        if candidate.exists() {
            return candidate;
        }
    }
    path.to_owned()
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let path = resolve(path);
    File::open(&path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn read_graphs(path: &Path) -> Result<Vec<Graph>> {
    read_mrp(open(path)?)
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// `dir/x.companion.mrp` for `dir/x.mrp`.
pub fn companion_path(input: &Path) -> PathBuf {
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    input.with_file_name(format!("{stem}.companion.mrp"))
}

/// Graphs paired with the token rows of the companion graph with the same id.
pub fn pair_companions(graphs: Vec<Graph>, companions: &[Graph]) -> Result<Vec<(Graph, Vec<TokenRow>)>> {
    let mut rows: HashMap<&str, &Graph> = companions.iter().map(|c| (c.id.as_str(), c)).collect();
    graphs
        .into_iter()
        .map(|g| {
            let c = rows.remove(g.id.as_str()).ok_or_else(|| Error::Validation {
                graph_id: g.id.clone(),
                message: "no companion data".into(),
            })?;
            let r = companion_to_rows(c)?;
            Ok((g, r))
        })
        .collect()
}

/// Graphs paired with their token rows, matched by id.
pub fn load_corpus(input: &Path, companion: Option<&Path>) -> Result<Vec<(Graph, Vec<TokenRow>)>> {
    let graphs = read_graphs(input)?;
    let companion = match companion {
        Some(c) => c.to_owned(),
        None => companion_path(&resolve(input)),
    };
    pair_companions(graphs, &read_graphs(&companion)?)
}

fn profile_config(path: Option<&Path>) -> Result<ProfileConfig> {
    match path {
        Some(p) => load_profile_config(&resolve(p)),
        None => Ok(ProfileConfig::new()),
    }
}

fn framework_of(args: &CorpusArgs, graphs: &[Graph]) -> Result<String> {
    match (&args.framework, graphs.first()) {
        (Some(f), _) => Ok(f.clone()),
        (None, Some(g)) => Ok(g.framework.clone()),
        (None, None) => Err(Error::Profile("empty input; pass --framework".into())),
    }
}

fn profile(args: &CorpusArgs, graphs: &[Graph]) -> Result<FrameworkProfile> {
    profile_with(&framework_of(args, graphs)?, &profile_config(args.profile.as_deref())?)
}

fn convert(a: &ConvertArgs) -> Result<i32> {
    let mut out = sink(a.output.as_deref())?;
    let mut failures = Vec::new();
    match (a.from, a.format) {
        (Format::Mrp, Format::Irep) => {
            let corpus = load_corpus(&a.corpus.input, a.companion.companion.as_deref())?;
            let graphs: Vec<Graph> = corpus.iter().map(|(g, _)| g.clone()).collect();
            let profile = profile(&a.corpus, &graphs)?;
            for (g, rows) in &corpus {
                match to_intermediate(g, rows, &profile) {
                    Ok(ig) => writeln!(out, "{}", serde_json::to_string(&ig).expect("igraphs serialize"))?,
                    Err(e) => failures.push(format!("{}: {e}", g.id)),
                }
            }
        }
        (Format::Irep, Format::Mrp) => {
            let companion = a
                .companion
                .companion
                .clone()
                .unwrap_or_else(|| companion_path(&resolve(&a.corpus.input)));
            let companions: HashMap<String, Graph> =
                read_graphs(&companion)?.into_iter().map(|g| (g.id.clone(), g)).collect();
            let mut graphs = Vec::new();
            for (i, line) in open(&a.corpus.input)?.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let ig: IGraph = serde_json::from_str(&line).map_err(|source| Error::Json { line: i + 1, source })?;
                let Some(c) = companions.get(&ig.id) else {
                    failures.push(format!("{}: no companion data", ig.id));
                    continue;
                };
                match companion_to_rows(c).and_then(|rows| from_intermediate(&ig, &rows, &c.input)) {
                    Ok(g) => graphs.push(g),
                    Err(e) => failures.push(format!("{}: {e}", ig.id)),
                }
            }
            write_mrp(&graphs, &mut out)?;
        }
        (Format::Companion, Format::Conllu) | (Format::Mrp, Format::Conllu) => {
            let path = match a.from {
                Format::Companion => a.corpus.input.clone(),
                _ => a
                    .companion
                    .companion
                    .clone()
                    .unwrap_or_else(|| companion_path(&resolve(&a.corpus.input))),
            };
            for g in read_graphs(&path)? {
                match companion_to_rows(&g) {
                    Ok(rows) => write_conllu(&mut out, Some(&g.id), &rows)?,
                    Err(e) => failures.push(format!("{}: {e}", g.id)),
                }
            }
        }
        (Format::Mrp, Format::Mrp) => write_mrp(&read_graphs(&a.corpus.input)?, &mut out)?,
        (from, to) => {
            return Err(Error::Conversion(format!(
                "unsupported conversion {from:?} -> {to:?}; supported: mrp->irep, irep->mrp, companion->conllu, mrp->mrp"
            )))
        }
    }
    out.flush()?;
    report_failures(&failures)
}

fn report_failures(failures: &[String]) -> Result<i32> {
    if failures.is_empty() {
        return Ok(0);
    }
    for f in failures {
        eprintln!("{f}");
    }
    eprintln!("{} graph(s) failed", failures.len());
    Ok(1)
}

fn validate_cmd(a: &CorpusArgs) -> Result<i32> {
    let graphs = read_graphs(&a.input)?;
    let config = profile_config(a.profile.as_deref())?;
    let mut findings = 0;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for g in &graphs {
        let fw = a.framework.clone().unwrap_or_else(|| g.framework.clone());
        let report = validate(g, &profile_with(&fw, &config)?);
        for m in report.messages() {
            writeln!(out, "{}\t{m}", g.id)?;
            findings += 1;
        }
    }
    eprintln!("{} graph(s), {findings} finding(s)", graphs.len());
    Ok(if findings > 0 { 1 } else { 0 })
}

fn stats(a: &StatsArgs) -> Result<i32> {
    let graphs = read_graphs(&a.input)?;
    let s = corpus_stats(&graphs);
    println!("{}", serde_json::to_string_pretty(&s).expect("stats serialize"));
    Ok(0)
}

fn oracle(a: &OracleArgs) -> Result<i32> {
    let corpus = load_corpus(&a.corpus.input, a.companion.companion.as_deref())?;
    let graphs: Vec<Graph> = corpus.iter().map(|(g, _)| g.clone()).collect();
    let profile = profile(&a.corpus, &graphs)?;
    let mut out = sink(a.output.as_deref())?;
    let mut failures = Vec::new();
    let mut golds = Vec::new();
    let mut systems = Vec::new();
    for (g, rows) in &corpus {
        let result = to_intermediate(g, rows, &profile).and_then(|ig| Ok((gold_sequence(&ig, rows)?, ig)));
        let (seq, ig) = match result {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("{}: {e}", g.id));
                continue;
            }
        };
        writeln!(out, "# {}", g.id)?;
        for t in &seq {
            writeln!(out, "{t}")?;
        }
        writeln!(out)?;
        if a.verify {
            let mut replayed = replay(rows, &seq)?;
            replayed.id = ig.id.clone();
            replayed.framework = ig.framework.clone();
            replayed.flavor = ig.flavor;
            if !same_igraph(&replayed, &ig) {
                failures.push(format!("{}: replay differs from the gold graph", g.id));
            }
            golds.push(from_intermediate(&ig, rows, &g.input)?);
            systems.push(from_intermediate(&replayed, rows, &g.input)?);
        }
    }
    out.flush()?;
    if a.verify {
        let report = score_corpus(&golds, &systems, &ScoreParams::default())?;
        eprintln!("verified {} graph(s): F {:.4}", systems.len(), report.overall.f1);
        if report.overall.f1 < 1.0 && !golds.is_empty() {
            failures.push(format!("replay F {:.6} below 1", report.overall.f1));
        }
    }
    report_failures(&failures)
}

#[derive(Serialize)]
struct EpochLine {
    epoch: usize,
    mistakes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation_f: Option<f64>,
    best: bool,
}

fn train_cmd(a: &TrainArgs) -> Result<i32> {
    let corpus = load_corpus(&a.corpus.input, a.companion.companion.as_deref())?;
    let graphs: Vec<Graph> = corpus.iter().map(|(g, _)| g.clone()).collect();
    let profile = profile(&a.corpus, &graphs)?;
    let validation = match &a.dev {
        Some(dev) => load_corpus(dev, a.dev_companion.as_deref())?,
        None => Vec::new(),
    };
    let init = a.init.as_deref().map(|p| Model::load(&resolve(p))).transpose()?;
    let config = TrainConfig {
        epochs: a.epochs as usize,
        seed: sub_seed(a.seed, "train"),
        multitask: a.multitask,
        validation,
        score_params: ScoreParams {
            restarts: a.restarts as usize,
            iterations: a.iterations as usize,
            seed: sub_seed(a.seed, "score"),
        },
        init,
    };
    let model = train(&corpus, &profile, &config)?;
    model.save(&a.model)?;
    let mut metrics: Box<dyn Write> = match &a.metrics {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stderr()),
    };
    for (i, mistakes) in model.meta.epoch_mistakes.iter().enumerate() {
        let line = EpochLine {
            epoch: i + 1,
            mistakes: *mistakes,
            validation_f: model.meta.epoch_scores.get(i).copied(),
            best: model.meta.best_epoch == i + 1,
        };
        writeln!(metrics, "{}", serde_json::to_string(&line).expect("metrics serialize"))?;
    }
    metrics.flush()?;
    if model.meta.skipped > 0 {
        warn!("{} sentence(s) skipped by the oracle", model.meta.skipped);
    }
    info!("model written to {}", a.model.display());
    Ok(0)
}

fn parse_cmd(a: &ParseArgs) -> Result<i32> {
    let mut model = Model::load(&resolve(&a.model))?;
    if let Some(p) = &a.profile {
        let config = load_profile_config(&resolve(p))?;
        if let Some(o) = config.get(&model.framework) {
            model.profile.apply(o)?;
        }
    }
    let companions = read_graphs(&a.companion)?;
    let corpus = companions
        .iter()
        .map(|c| {
            let mut g = Graph::new(c.id.clone(), model.framework.clone(), c.input.clone());
            g.flavor = c.flavor;
            Ok((g, companion_to_rows(c)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let parsed = parse_corpus_with_budget(&model, &corpus, &model.profile, a.step_budget.map(|b| b as usize));
    let truncated = parsed.iter().filter(|p| p.truncated).count();
    if truncated > 0 {
        warn!("{truncated} parse(s) ran out of steps");
    }
    let graphs: Vec<Graph> = parsed
        .into_iter()
        .zip(&corpus)
        .map(|(p, (g, _))| {
            let mut out = p.graph;
            out.flavor = g.flavor;
            out
        })
        .collect();
    let mut out = sink(a.output.as_deref())?;
    write_mrp(&graphs, &mut out)?;
    out.flush()?;
    Ok(0)
}

fn evaluate(a: &EvaluateArgs) -> Result<i32> {
    let golds = read_graphs(&a.gold)?;
    let systems = read_graphs(&a.system)?;
    let params = ScoreParams {
        restarts: a.restarts as usize,
        iterations: a.iterations as usize,
        seed: a.seed,
    };
    let report = if golds.len() == 1 && systems.len() == 1 && golds[0].id != systems[0].id {
        // A single pair with different ids is scored directly.
        score_pair(&golds[0], &systems[0], &params)
    } else {
        score_corpus(&golds, &systems, &params)?
    };
    let mut value = serde_json::to_value(&report).expect("reports serialize");
    value["macro_f1"] = report.macro_f1().into();
    let json = serde_json::to_string_pretty(&value).expect("reports serialize");
    println!("{json}");
    if let Some(p) = &a.output {
        fs::write(p, format!("{json}\n"))?;
    }
    eprint!("{}", report.table());
    if a.macro_average {
        eprintln!("macro F {:.4}", report.macro_f1());
    } else {
        eprintln!("F {:.4}", report.overall.f1);
    }
    Ok(0)
}

fn generate(a: &GenerateArgs) -> Result<i32> {
    for (name, samples) in bundle(a.seed)? {
        let base = a.output.join(&name);
        if let Some(dir) = base.parent() {
            fs::create_dir_all(dir)?;
        }
        let graphs: Vec<Graph> = samples.iter().map(|s| s.graph.clone()).collect();
        let companions: Vec<Graph> = samples
            .iter()
            .map(|s| rows_to_companion(&s.graph.id, &s.graph.input, &s.rows))
            .collect();
        write_mrp(&graphs, BufWriter::new(File::create(base.with_extension("mrp"))?))?;
        write_mrp(
            &companions,
            BufWriter::new(File::create(base.with_extension("companion.mrp"))?),
        )?;
        info!("wrote {} ({} graphs)", name, graphs.len());
    }
    Ok(0)
}
