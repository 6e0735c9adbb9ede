//! Command-line front end.
//!
//! Every subcommand reads its settings from an optional `key=value` file
//! (`--config`) overlaid with command-line flags, validates them, computes
//! all results in memory and only then writes its output files.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::aggregate::{self, train_aggregate, AggregateConfig, AggregateModel, Init};
use crate::corpus::{count_ngrams, holdout_split, read_corpus, NgramCounts, TokenSentence, Vocabulary};
use crate::error::{Error, Result};
use crate::eval::{evaluate, write_truncation_csv, Seen, TruncationRow};
use crate::mixedorder::{self, train_mixed, MixedOrderModel, MAX_ORDER};
use crate::model::{LanguageModel, MlBigram, Uniform};
use crate::smoothing::{
    fit_interpolation, fit_mixed_smoothing, good_turing_discounts, FitOptions, GoodTuring,
    InterpolatedBigram, KatzBigram, KatzTrigram, SigmaParams, SmoothedMixed,
};

#[derive(Debug, Parser)]
#[command(name = "mixlm", version, about = "Aggregate and mixed-order Markov language models")]
pub struct Cli {
    /// Flat key=value file; flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for counting, EM and scoring (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a vocabulary and n-gram counts from a training corpus.
    Prepare(Opts),
    /// Train an aggregate (soft class) bigram model.
    TrainAggregate(Opts),
    /// Train a mixed-order model.
    TrainMixed(Opts),
    /// Fit a smoothing cascade on held-out data and write its manifest.
    Smooth(Opts),
    /// Score a model or cascade on a test corpus.
    Eval(Opts),
    /// Compare trigram backoff chains across truncation thresholds.
    SweepTruncate(Opts),
    /// Most likely class and its probability for each word.
    ReportClasses(Opts),
    /// Words with the lowest and highest first-order mixture weight.
    ReportLambda(Opts),
}

impl Command {
    fn kind(&self) -> CommandKind {
        match self {
            Command::Prepare(_) => CommandKind::Prepare,
            Command::TrainAggregate(_) => CommandKind::TrainAggregate,
            Command::TrainMixed(_) => CommandKind::TrainMixed,
            Command::Smooth(_) => CommandKind::Smooth,
            Command::Eval(_) => CommandKind::Eval,
            Command::SweepTruncate(_) => CommandKind::SweepTruncate,
            Command::ReportClasses(_) => CommandKind::ReportClasses,
            Command::ReportLambda(_) => CommandKind::ReportLambda,
        }
    }

    fn opts(&self) -> &Opts {
        match self {
            Command::Prepare(o)
            | Command::TrainAggregate(o)
            | Command::TrainMixed(o)
            | Command::Smooth(o)
            | Command::Eval(o)
            | Command::SweepTruncate(o)
            | Command::ReportClasses(o)
            | Command::ReportLambda(o) => o,
        }
    }
}

/// Flags shared by all subcommands. Each subcommand reads the ones it needs.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// Training text, one sentence per line.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Test text, one sentence per line.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Vocabulary file (written by `prepare`, read elsewhere).
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Counts file (written by `prepare`, read elsewhere).
    #[arg(long)]
    pub counts: Option<PathBuf>,
    /// Aggregate model file.
    #[arg(long)]
    pub aggregate: Option<PathBuf>,
    /// Mixed-order model files in increasing order, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub mixed: Vec<PathBuf>,
    /// Cascade manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Main output: model file, report, CSV, or directory for `smooth`.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Training trace CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub vocab_size: Option<usize>,
    /// Number of classes.
    #[arg(long)]
    pub classes: Option<usize>,
    /// Mixed-order model order.
    #[arg(long)]
    pub order: Option<usize>,
    /// EM iterations (default 32 for aggregate, 4 for mixed-order).
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random restarts; the best training likelihood wins.
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub init: Option<InitKind>,
    /// Highest n-gram order counted by `prepare`.
    #[arg(long)]
    pub max_ngram: Option<usize>,
    /// Skip distances counted by `prepare`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub skips: Vec<usize>,
    /// Drop trigrams seen fewer than this many times.
    #[arg(long)]
    pub truncate: Option<u64>,
    /// Truncation thresholds for `sweep-truncate`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Vec<u64>,
    /// Counts above this are not discounted.
    #[arg(long)]
    pub gt_threshold: Option<u64>,
    /// Fraction of training sentences held out for smoothing fits.
    #[arg(long)]
    pub valid_frac: Option<f64>,
    /// Share one smoothing weight per component across all words.
    #[arg(long)]
    pub tied: Option<bool>,
    /// Which events count as unseen in `eval`.
    #[arg(long)]
    pub unseen: Option<UnseenKind>,
    /// Model scored by `eval`.
    #[arg(long)]
    pub model: Option<ModelKind>,
    /// Add a Katz trigram level on top of the cascade.
    #[arg(long)]
    pub trigram: Option<bool>,
    /// Lower levels of the cascade built by `smooth`.
    #[arg(long)]
    pub backoff: Option<BackoffKind>,
    /// Restrict reports to the most frequent words (0: all).
    #[arg(long)]
    pub top: Option<usize>,
    /// Length of each list in `report-lambda`.
    #[arg(long)]
    pub list_len: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CommandKind {
    Prepare,
    TrainAggregate,
    TrainMixed,
    Smooth,
    Eval,
    SweepTruncate,
    ReportClasses,
    ReportLambda,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitKind {
    Random,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnseenKind {
    /// Unseen bigrams when counts are available, otherwise none.
    Auto,
    None,
    /// Bigram absent from the training counts.
    Bigram,
    /// Top level of the model backed off.
    Backoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Uniform,
    Aggregate,
    Mixed,
    Katz,
    Cascade,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackoffKind {
    /// Aggregate base, interpolated bigram, smoothed mixed-order levels.
    Mixed,
    /// Katz bigram over a unigram.
    Katz,
}

macro_rules! value_enum_text {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let v = self.to_possible_value().expect("no skipped variants");
                f.write_str(v.get_name())
            }
        }

        impl FromStr for $t {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                <$t as ValueEnum>::from_str(s, false)
            }
        }
    )*};
}

value_enum_text!(CommandKind, InitKind, UnseenKind, ModelKind, BackoffKind);

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub corpus: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub counts: Option<PathBuf>,
    pub aggregate: Option<PathBuf>,
    pub mixed: Vec<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub vocab_size: usize,
    pub classes: usize,
    pub order: usize,
    pub iters: Option<usize>,
    pub seed: u64,
    pub restarts: usize,
    pub init: InitKind,
    pub max_ngram: usize,
    pub skips: Vec<usize>,
    pub truncate: u64,
    pub thresholds: Vec<u64>,
    pub gt_threshold: u64,
    pub valid_frac: f64,
    pub tied: bool,
    pub unseen: UnseenKind,
    pub model: ModelKind,
    pub trigram: bool,
    pub backoff: BackoffKind,
    pub top: usize,
    pub list_len: usize,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        RunConfig {
            command,
            corpus: None,
            test: None,
            vocab: None,
            counts: None,
            aggregate: None,
            mixed: Vec::new(),
            manifest: None,
            out: None,
            trace: None,
            vocab_size: 5000,
            classes: 32,
            order: 2,
            iters: None,
            seed: 1,
            restarts: 1,
            init: InitKind::Random,
            max_ngram: 3,
            skips: Vec::new(),
            truncate: 1,
            thresholds: vec![1, 2, 3, 4, 5],
            gt_threshold: crate::smoothing::DEFAULT_GT_THRESHOLD,
            valid_frac: 0.1,
            tied: false,
            unseen: UnseenKind::Auto,
            model: ModelKind::Cascade,
            trigram: false,
            backoff: BackoffKind::Mixed,
            top: 0,
            list_len: 10,
            workers: None,
        }
    }

    /// Settings from the command line, overlaid on the `--config` file.
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let kind = cli.command.kind();
        let mut config = match &cli.config {
            Some(path) => {
                let map = read_key_values(open(path)?)?;
                let mut c = Self::from_map(&map)?;
                c.command = kind;
                c
            }
            None => Self::new(kind),
        };
        config.apply(cli.command.opts());
        if cli.workers.is_some() {
            config.workers = cli.workers;
        }
        Ok(config)
    }

    fn apply(&mut self, o: &Opts) {
        fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
        fn set_opt<T: Clone>(dst: &mut Option<T>, src: &Option<T>) {
            if src.is_some() {
                *dst = src.clone();
            }
        }
        fn set_list<T: Clone>(dst: &mut Vec<T>, src: &[T]) {
            if !src.is_empty() {
                *dst = src.to_vec();
            }
        }
        set_opt(&mut self.corpus, &o.corpus);
        set_opt(&mut self.test, &o.test);
        set_opt(&mut self.vocab, &o.vocab);
        set_opt(&mut self.counts, &o.counts);
        set_opt(&mut self.aggregate, &o.aggregate);
        set_list(&mut self.mixed, &o.mixed);
        set_opt(&mut self.manifest, &o.manifest);
        set_opt(&mut self.out, &o.out);
        set_opt(&mut self.trace, &o.trace);
        set(&mut self.vocab_size, &o.vocab_size);
        set(&mut self.classes, &o.classes);
        set(&mut self.order, &o.order);
        set_opt(&mut self.iters, &o.iters);
        set(&mut self.seed, &o.seed);
        set(&mut self.restarts, &o.restarts);
        set(&mut self.init, &o.init);
        set(&mut self.max_ngram, &o.max_ngram);
        set_list(&mut self.skips, &o.skips);
        set(&mut self.truncate, &o.truncate);
        set_list(&mut self.thresholds, &o.thresholds);
        set(&mut self.gt_threshold, &o.gt_threshold);
        set(&mut self.valid_frac, &o.valid_frac);
        set(&mut self.tied, &o.tied);
        set(&mut self.unseen, &o.unseen);
        set(&mut self.model, &o.model);
        set(&mut self.trigram, &o.trigram);
        set(&mut self.backoff, &o.backoff);
        set(&mut self.top, &o.top);
        set(&mut self.list_len, &o.list_len);
    }

    /// Key/value form; unset optional fields are omitted.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_owned(), v);
        };
        put("command", self.command.to_string());
        let paths = [
            ("corpus", &self.corpus),
            ("test", &self.test),
            ("vocab", &self.vocab),
            ("counts", &self.counts),
            ("aggregate", &self.aggregate),
            ("manifest", &self.manifest),
            ("out", &self.out),
            ("trace", &self.trace),
        ];
        for (k, p) in paths {
            if let Some(p) = p {
                put(k, p.display().to_string());
            }
        }
        put("mixed", join(self.mixed.iter().map(|p| p.display())));
        put("vocab-size", self.vocab_size.to_string());
        put("classes", self.classes.to_string());
        put("order", self.order.to_string());
        if let Some(i) = self.iters {
            put("iters", i.to_string());
        }
        put("seed", self.seed.to_string());
        put("restarts", self.restarts.to_string());
        put("init", self.init.to_string());
        put("max-ngram", self.max_ngram.to_string());
        put("skips", join(&self.skips));
        put("truncate", self.truncate.to_string());
        put("thresholds", join(&self.thresholds));
        put("gt-threshold", self.gt_threshold.to_string());
        put("valid-frac", self.valid_frac.to_string());
        put("tied", self.tied.to_string());
        put("unseen", self.unseen.to_string());
        put("model", self.model.to_string());
        put("trigram", self.trigram.to_string());
        put("backoff", self.backoff.to_string());
        put("top", self.top.to_string());
        put("list-len", self.list_len.to_string());
        if let Some(w) = self.workers {
            put("workers", w.to_string());
        }
        m
    }

    /// Inverse of [`RunConfig::to_map`]. Missing keys take their defaults;
    /// unknown keys are rejected.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let command = match map.get("command") {
            Some(s) => parse_value("command", s)?,
            None => CommandKind::Eval,
        };
        let mut c = RunConfig::new(command);
        for (key, value) in map {
            let v = value.as_str();
            match key.as_str() {
                "command" => {}
                "corpus" => c.corpus = Some(v.into()),
                "test" => c.test = Some(v.into()),
                "vocab" => c.vocab = Some(v.into()),
                "counts" => c.counts = Some(v.into()),
                "aggregate" => c.aggregate = Some(v.into()),
                "manifest" => c.manifest = Some(v.into()),
                "out" => c.out = Some(v.into()),
                "trace" => c.trace = Some(v.into()),
                "mixed" => c.mixed = split_list(v).map(PathBuf::from).collect(),
                "vocab-size" => c.vocab_size = parse_value(key, v)?,
                "classes" => c.classes = parse_value(key, v)?,
                "order" => c.order = parse_value(key, v)?,
                "iters" => c.iters = Some(parse_value(key, v)?),
                "seed" => c.seed = parse_value(key, v)?,
                "restarts" => c.restarts = parse_value(key, v)?,
                "init" => c.init = parse_value(key, v)?,
                "max-ngram" => c.max_ngram = parse_value(key, v)?,
                "skips" => c.skips = parse_list(key, v)?,
                "truncate" => c.truncate = parse_value(key, v)?,
                "thresholds" => c.thresholds = parse_list(key, v)?,
                "gt-threshold" => c.gt_threshold = parse_value(key, v)?,
                "valid-frac" => c.valid_frac = parse_value(key, v)?,
                "tied" => c.tied = parse_value(key, v)?,
                "unseen" => c.unseen = parse_value(key, v)?,
                "model" => c.model = parse_value(key, v)?,
                "trigram" => c.trigram = parse_value(key, v)?,
                "backoff" => c.backoff = parse_value(key, v)?,
                "top" => c.top = parse_value(key, v)?,
                "list-len" => c.list_len = parse_value(key, v)?,
                "workers" => c.workers = Some(parse_value(key, v)?),
                _ => return Err(Error::param(format!("unknown config key `{key}`"))),
            }
        }
        Ok(c)
    }

    /// `key=value` lines in key order.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in self.to_map() {
            writeln!(out, "{k}={v}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        Self::from_map(&read_key_values(input)?)
    }

    /// Range checks that do not depend on input files.
    pub fn validate(&self) -> Result<()> {
        if self.vocab_size < 4 {
            return Err(Error::param("vocab-size must be at least 4"));
        }
        if self.classes == 0 {
            return Err(Error::param("classes must be at least 1"));
        }
        if !(1..=MAX_ORDER).contains(&self.order) {
            return Err(Error::param(format!("order must lie in 1..={MAX_ORDER}")));
        }
        if self.restarts == 0 {
            return Err(Error::param("restarts must be at least 1"));
        }
        if !(1..=3).contains(&self.max_ngram) {
            return Err(Error::param("max-ngram must lie in 1..=3"));
        }
        if self.skips.contains(&0) {
            return Err(Error::param("skip distances must be at least 1"));
        }
        if self.truncate == 0 || self.thresholds.contains(&0) {
            return Err(Error::param("truncation thresholds must be at least 1"));
        }
        if self.thresholds.is_empty() {
            return Err(Error::param("thresholds must not be empty"));
        }
        if self.gt_threshold == 0 {
            return Err(Error::param("gt-threshold must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.valid_frac) {
            return Err(Error::param("valid-frac must lie in [0, 1)"));
        }
        if self.workers == Some(0) {
            return Err(Error::param("workers must be at least 1"));
        }
        Ok(())
    }

    fn fit_options(&self) -> FitOptions {
        FitOptions {
            tied: self.tied,
            ..FitOptions::default()
        }
    }
}

fn join<T: fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::param(format!("bad value `{v}` for `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    split_list(v).map(|x| parse_value(key, x)).collect()
}

fn read_key_values<R: BufRead>(input: R) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::format("config file", i + 1, "expected key=value"))?;
        map.insert(k.trim().replace('_', "-"), v.trim().to_owned());
    }
    Ok(map)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::at_path(path, e))
}

fn require<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::param(format!("--{flag} is required")))
}

fn require_file<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    let p = require(path, flag)?;
    check_file(p, flag)?;
    Ok(p)
}

fn check_file(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::at_path(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, format!("{what} file not found")),
        ))
    }
}

fn check_out_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(Error::param(format!(
            "output directory {} does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}

/// Output files buffered until every computation has succeeded.
#[derive(Default)]
struct Outputs(Vec<(PathBuf, Vec<u8>)>);

impl Outputs {
    fn add(&mut self, path: &Path, render: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        render(&mut buf)?;
        self.0.push((path.to_path_buf(), buf));
        Ok(())
    }

    fn commit(self) -> Result<()> {
        for (path, bytes) in self.0 {
            std::fs::write(&path, bytes).map_err(|e| Error::at_path(&path, e))?;
        }
        Ok(())
    }
}

fn read_vocab(path: &Path) -> Result<Vocabulary> {
    Vocabulary::read(open(path)?)
}

fn read_counts(path: &Path) -> Result<NgramCounts> {
    NgramCounts::read(open(path)?)
}

fn read_sentences(path: &Path, vocab: &Vocabulary) -> Result<Vec<TokenSentence>> {
    let s = read_corpus(open(path)?, vocab)?;
    if s.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(s)
}

fn read_aggregate(path: &Path) -> Result<AggregateModel> {
    AggregateModel::read(open(path)?)
}

fn read_mixed(path: &Path) -> Result<MixedOrderModel> {
    MixedOrderModel::read(open(path)?)
}

fn check_vocab(what: &str, got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::param(format!(
            "{what} has vocabulary size {got}, expected {want}"
        )))
    }
}

/// One level of a smoothing cascade, listed bottom-up in a manifest.
#[derive(Debug, Clone, PartialEq)]
pub enum Level {
    /// Aggregate model used as the base distribution.
    Aggregate { model: PathBuf },
    /// ML bigram interpolated with the level below.
    Bigram { sigma: PathBuf },
    /// Mixed-order model smoothed by the level below.
    Mixed { model: PathBuf, sigma: PathBuf },
    /// Katz bigram over a unigram, used as a base.
    KatzBigram { gt: PathBuf },
    /// Katz trigram backing off to the level below.
    Trigram { gt: PathBuf, truncate: u64 },
}

impl Level {
    pub fn name(&self) -> &'static str {
        match self {
            Level::Aggregate { .. } => "aggregate",
            Level::Bigram { .. } => "bigram",
            Level::Mixed { .. } => "mixed",
            Level::KatzBigram { .. } => "katz-bigram",
            Level::Trigram { .. } => "trigram",
        }
    }

    fn files(&self) -> Vec<&Path> {
        match self {
            Level::Aggregate { model } => vec![model],
            Level::Bigram { sigma } => vec![sigma],
            Level::Mixed { model, sigma } => vec![model, sigma],
            Level::KatzBigram { gt } | Level::Trigram { gt, .. } => vec![gt],
        }
    }
}

/// Vocabulary, counts and levels of a cascade.
///
/// ```text
/// MANIFEST v1
/// vocab<TAB>path
/// counts<TAB>path
/// level<TAB>aggregate<TAB>model
/// level<TAB>bigram<TAB>sigma
/// level<TAB>mixed<TAB>model<TAB>sigma
/// level<TAB>katz-bigram<TAB>gt
/// level<TAB>trigram<TAB>gt<TAB>truncate
/// ```
///
/// Relative paths are resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub vocab: PathBuf,
    pub counts: PathBuf,
    pub levels: Vec<Level>,
}

impl Manifest {
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "MANIFEST v1")?;
        writeln!(out, "vocab\t{}", self.vocab.display())?;
        writeln!(out, "counts\t{}", self.counts.display())?;
        for level in &self.levels {
            write!(out, "level\t{}", level.name())?;
            for f in level.files() {
                write!(out, "\t{}", f.display())?;
            }
            if let Level::Trigram { truncate, .. } = level {
                write!(out, "\t{truncate}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R, base: &Path) -> Result<Self> {
        const WHAT: &str = "manifest";
        let resolve = |p: &str| {
            let p = Path::new(p);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        let mut lines = input.lines();
        let header = lines.next().transpose()?;
        if header.as_deref().map(str::trim) != Some("MANIFEST v1") {
            return Err(Error::format(WHAT, 1, "expected MANIFEST v1 header"));
        }
        let (mut vocab, mut counts, mut levels) = (None, None, Vec::new());
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line?;
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            match fields.as_slice() {
                [""] => {}
                ["vocab", p] => vocab = Some(resolve(p)),
                ["counts", p] => counts = Some(resolve(p)),
                ["level", "aggregate", m] => levels.push(Level::Aggregate { model: resolve(m) }),
                ["level", "bigram", s] => levels.push(Level::Bigram { sigma: resolve(s) }),
                ["level", "mixed", m, s] => levels.push(Level::Mixed {
                    model: resolve(m),
                    sigma: resolve(s),
                }),
                ["level", "katz-bigram", g] => levels.push(Level::KatzBigram { gt: resolve(g) }),
                ["level", "trigram", g, t] => levels.push(Level::Trigram {
                    gt: resolve(g),
                    truncate: crate::corpus::parse_num(t, WHAT, lineno)?,
                }),
                _ => return Err(Error::format(WHAT, lineno, "unrecognized line")),
            }
        }
        let vocab = vocab.ok_or_else(|| Error::format(WHAT, 0, "missing vocab line"))?;
        let counts = counts.ok_or_else(|| Error::format(WHAT, 0, "missing counts line"))?;
        if levels.is_empty() {
            return Err(Error::format(WHAT, 0, "no levels"));
        }
        Ok(Manifest {
            vocab,
            counts,
            levels,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let base = path.parent().unwrap_or(Path::new(""));
        Self::read(open(path)?, base)
    }

    /// Every referenced file exists; a missing one is reported with the
    /// level that needs it.
    pub fn check_files(&self) -> Result<()> {
        check_file(&self.vocab, "vocabulary")?;
        check_file(&self.counts, "counts")?;
        for (i, level) in self.levels.iter().enumerate() {
            for f in level.files() {
                if !f.is_file() {
                    return Err(Error::param(format!(
                        "level {} ({}): file {} not found",
                        i + 1,
                        level.name(),
                        f.display()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A loaded cascade and the data it was built from.
pub struct Cascade {
    pub vocab: Vocabulary,
    pub counts: Arc<NgramCounts>,
    /// Models of each level, bottom first; the last one is the full cascade.
    pub levels: Vec<Arc<dyn LanguageModel>>,
}

impl Cascade {
    pub fn top(&self) -> &Arc<dyn LanguageModel> {
        self.levels.last().expect("cascade has levels")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let manifest = Manifest::load(path)?;
        manifest.check_files()?;
        let vocab = read_vocab(&manifest.vocab)?;
        let counts = Arc::new(read_counts(&manifest.counts)?);
        check_vocab("counts", counts.vocab_size(), vocab.len())?;
        let mut levels: Vec<Arc<dyn LanguageModel>> = Vec::new();
        let mut ml: Option<Arc<MlBigram>> = None;
        for (i, level) in manifest.levels.iter().enumerate() {
            let lower = levels.last().cloned();
            let needs_lower = || {
                lower.clone().ok_or_else(|| {
                    Error::param(format!("level {} ({}) has nothing below it", i + 1, level.name()))
                })
            };
            let model: Arc<dyn LanguageModel> = match level {
                Level::Aggregate { model } | Level::KatzBigram { gt: model } if lower.is_some() => {
                    return Err(Error::param(format!(
                        "level {} ({}) must be the first level, not {}",
                        i + 1,
                        level.name(),
                        model.display()
                    )))
                }
                Level::Aggregate { model } => {
                    let m = read_aggregate(model)?;
                    check_vocab("aggregate model", m.vocab_size(), vocab.len())?;
                    Arc::new(m)
                }
                Level::KatzBigram { gt } => {
                    let gt = GoodTuring::read(open(gt)?)?;
                    Arc::new(KatzBigram::with_discounts(&counts, gt)?)
                }
                Level::Bigram { sigma } => {
                    let base = needs_lower()?;
                    let ml = ml
                        .get_or_insert_with(|| Arc::new(MlBigram::from_counts(&counts).expect("checked")))
                        .clone();
                    let params = SigmaParams::read(open(sigma)?)?;
                    Arc::new(InterpolatedBigram::new(ml, base, params)?)
                }
                Level::Mixed { model, sigma } => {
                    let lower = needs_lower()?;
                    let m = read_mixed(model)?;
                    check_vocab("mixed-order model", m.vocab_size(), vocab.len())?;
                    let params = SigmaParams::read(open(sigma)?)?;
                    Arc::new(SmoothedMixed::new(Arc::new(m), lower, params)?)
                }
                Level::Trigram { gt, truncate } => {
                    let lower = needs_lower()?;
                    let gt = GoodTuring::read(open(gt)?)?;
                    Arc::new(KatzTrigram::with_discounts(&counts, *truncate, gt, lower)?)
                }
            };
            levels.push(model);
        }
        Ok(Cascade {
            vocab,
            counts,
            levels,
        })
    }
}

/// Parses `args`, runs the subcommand and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let config = RunConfig::from_cli(cli)?;
    run_config(&config)
}

/// Runs the subcommand named in `config`.
pub fn run_config(config: &RunConfig) -> Result<()> {
    config.validate()?;
    if let Some(n) = config.workers {
        // Fails only if the pool already exists, in which case it is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match config.command {
        CommandKind::Prepare => cmd_prepare(config),
        CommandKind::TrainAggregate => cmd_train_aggregate(config),
        CommandKind::TrainMixed => cmd_train_mixed(config),
        CommandKind::Smooth => cmd_smooth(config),
        CommandKind::Eval => cmd_eval(config),
        CommandKind::SweepTruncate => cmd_sweep_truncate(config),
        CommandKind::ReportClasses => cmd_report_classes(config),
        CommandKind::ReportLambda => cmd_report_lambda(config),
    }
}

/// Vocabulary from the whole training file; counts from its training part.
pub fn cmd_prepare(c: &RunConfig) -> Result<()> {
    let corpus = require_file(&c.corpus, "corpus")?;
    let vocab_out = require(&c.vocab, "vocab")?;
    let counts_out = require(&c.counts, "counts")?;
    check_out_parent(vocab_out)?;
    check_out_parent(counts_out)?;

    let vocab = Vocabulary::build(open(corpus)?, c.vocab_size)?;
    let sentences = read_sentences(corpus, &vocab)?;
    let (train, _) = holdout_split(&sentences, c.valid_frac)?;
    let counts = count_ngrams(&train, vocab.len(), c.max_ngram, &c.skips)?;

    let mut out = Outputs::default();
    out.add(vocab_out, |b| vocab.write(b))?;
    out.add(counts_out, |b| counts.write(b))?;
    out.commit()?;
    println!(
        "vocabulary {} words, {} training sentences, {} events",
        vocab.len(),
        train.len(),
        counts.total()
    );
    Ok(())
}

pub fn cmd_train_aggregate(c: &RunConfig) -> Result<()> {
    let counts_path = require_file(&c.counts, "counts")?;
    let out_path = require(&c.out, "out")?;
    check_out_parent(out_path)?;
    if let Some(t) = &c.trace {
        check_out_parent(t)?;
    }

    let counts = read_counts(counts_path)?;
    let config = AggregateConfig {
        classes: c.classes,
        iterations: c.iters.unwrap_or(aggregate::DEFAULT_ITERATIONS),
        seed: c.seed,
        restarts: c.restarts,
        init: match c.init {
            InitKind::Random => Init::Random,
            InitKind::Identity => Init::Identity,
        },
    };
    let (model, trace) = train_aggregate(&counts, &config)?;

    let mut out = Outputs::default();
    out.add(out_path, |b| model.write(b))?;
    if let Some(t) = &c.trace {
        out.add(t, |b| trace.write_csv(b))?;
    }
    out.commit()?;
    if let Some(p) = trace.final_perplexity() {
        println!("training perplexity {p:.4}");
    }
    Ok(())
}

pub fn cmd_train_mixed(c: &RunConfig) -> Result<()> {
    let corpus = require_file(&c.corpus, "corpus")?;
    let vocab_path = require_file(&c.vocab, "vocab")?;
    let out_path = require(&c.out, "out")?;
    check_out_parent(out_path)?;
    if let Some(t) = &c.trace {
        check_out_parent(t)?;
    }

    let vocab = read_vocab(vocab_path)?;
    let sentences = read_sentences(corpus, &vocab)?;
    let (train, _) = holdout_split(&sentences, c.valid_frac)?;
    let iters = c.iters.unwrap_or(mixedorder::DEFAULT_ITERATIONS);
    let (model, trace) = train_mixed(&train, vocab.len(), c.order, iters)?;

    let mut out = Outputs::default();
    out.add(out_path, |b| model.write(b))?;
    if let Some(t) = &c.trace {
        out.add(t, |b| trace.write_csv(b))?;
    }
    out.commit()?;
    if let Some(p) = trace.final_perplexity() {
        println!("training perplexity {p:.4}");
    }
    Ok(())
}

fn absolute(path: &Path) -> Result<PathBuf> {
    std::fs::canonicalize(path).map_err(|e| Error::at_path(path, e))
}

/// Fits the cascade bottom-up on the held-out part of `--corpus` and writes
/// the manifest plus one parameter file per fitted level into `--out`.
pub fn cmd_smooth(c: &RunConfig) -> Result<()> {
    let corpus = require_file(&c.corpus, "corpus")?;
    let vocab_path = require_file(&c.vocab, "vocab")?;
    let counts_path = require_file(&c.counts, "counts")?;
    let dir = require(&c.out, "out")?;
    if dir.exists() && !dir.is_dir() {
        return Err(Error::param(format!("{} is not a directory", dir.display())));
    }
    if c.valid_frac <= 0.0 {
        return Err(Error::param("smoothing needs valid-frac > 0"));
    }
    let mixed_backoff = c.backoff == BackoffKind::Mixed;
    if mixed_backoff {
        match &c.aggregate {
            Some(p) if p.is_file() => {}
            Some(p) => {
                return Err(Error::param(format!(
                    "aggregate level: model file {} not found",
                    p.display()
                )))
            }
            None => return Err(Error::param("aggregate level: --aggregate is required")),
        }
        for (i, p) in c.mixed.iter().enumerate() {
            if !p.is_file() {
                return Err(Error::param(format!(
                    "mixed level m={}: model file {} not found",
                    i + 2,
                    p.display()
                )));
            }
        }
    } else if !c.mixed.is_empty() || c.aggregate.is_some() {
        return Err(Error::param("--aggregate and --mixed apply only to backoff=mixed"));
    }

    let vocab = read_vocab(vocab_path)?;
    let counts = Arc::new(read_counts(counts_path)?);
    check_vocab("counts", counts.vocab_size(), vocab.len())?;
    if c.trigram && counts.max_order() < 3 {
        return Err(Error::param("a trigram level needs order-3 counts"));
    }
    let sentences = read_sentences(corpus, &vocab)?;
    let (_, validation) = holdout_split(&sentences, c.valid_frac)?;
    if validation.is_empty() {
        return Err(Error::param("validation split is empty"));
    }
    let opts = c.fit_options();

    let mut out = Outputs::default();
    let mut levels = Vec::new();
    let mut top: Arc<dyn LanguageModel>;
    if mixed_backoff {
        let agg_path = c.aggregate.as_deref().expect("checked");
        let agg = read_aggregate(agg_path)?;
        check_vocab("aggregate model", agg.vocab_size(), vocab.len())?;
        top = Arc::new(agg);
        levels.push(Level::Aggregate {
            model: absolute(agg_path)?,
        });

        let ml = Arc::new(MlBigram::from_counts(&counts)?);
        let params = fit_interpolation(&ml, top.as_ref(), &validation, &opts)?;
        let sigma = PathBuf::from("bigram.sigma");
        out.add(&dir.join(&sigma), |b| params.write(b))?;
        top = Arc::new(InterpolatedBigram::new(ml, top, params)?);
        levels.push(Level::Bigram { sigma });

        for (i, path) in c.mixed.iter().enumerate() {
            let want = i + 2;
            let model = read_mixed(path)?;
            if model.order() != want {
                return Err(Error::param(format!(
                    "mixed level {}: expected order {want}, {} has order {}",
                    i + 1,
                    path.display(),
                    model.order()
                )));
            }
            check_vocab("mixed-order model", model.vocab_size(), vocab.len())?;
            let params = fit_mixed_smoothing(&model, top.as_ref(), &validation, &opts)?;
            let sigma = PathBuf::from(format!("mixed{want}.sigma"));
            out.add(&dir.join(&sigma), |b| params.write(b))?;
            top = Arc::new(SmoothedMixed::new(Arc::new(model), top, params)?);
            levels.push(Level::Mixed {
                model: absolute(path)?,
                sigma,
            });
        }
    } else {
        let gt = good_turing_discounts(counts.bigrams().values().copied(), c.gt_threshold)?;
        let file = PathBuf::from("katz-bigram.gt");
        out.add(&dir.join(&file), |b| gt.write(b))?;
        top = Arc::new(KatzBigram::with_discounts(&counts, gt)?);
        levels.push(Level::KatzBigram { gt: file });
    }
    if c.trigram {
        let gt = good_turing_discounts(counts.trigrams().values().copied(), c.gt_threshold)?;
        let file = PathBuf::from("trigram.gt");
        out.add(&dir.join(&file), |b| gt.write(b))?;
        // Construct once so parameter errors surface before writing.
        KatzTrigram::with_discounts(&counts, c.truncate, gt, top)?;
        levels.push(Level::Trigram {
            gt: file,
            truncate: c.truncate,
        });
    }
    let manifest = Manifest {
        vocab: absolute(vocab_path)?,
        counts: absolute(counts_path)?,
        levels,
    };
    out.add(&dir.join("manifest.txt"), |b| manifest.write(b))?;

    std::fs::create_dir_all(dir).map_err(|e| Error::at_path(dir, e))?;
    out.commit()?;
    println!(
        "wrote {} with {} levels",
        dir.join("manifest.txt").display(),
        manifest.levels.len()
    );
    Ok(())
}

/// Katz trigram over a Katz bigram, or the bigram alone for order-2 counts.
fn katz_baseline(counts: &NgramCounts, truncate: u64, gt_threshold: u64) -> Result<Arc<dyn LanguageModel>> {
    let bigram: Arc<dyn LanguageModel> = Arc::new(KatzBigram::new(counts, gt_threshold)?);
    if counts.max_order() < 3 {
        return Ok(bigram);
    }
    Ok(Arc::new(KatzTrigram::new(counts, truncate, gt_threshold, bigram)?))
}

pub fn cmd_eval(c: &RunConfig) -> Result<()> {
    let test = require_file(&c.test, "test")?;
    if let Some(o) = &c.out {
        check_out_parent(o)?;
    }

    let (vocab, counts, model): (Vocabulary, Option<Arc<NgramCounts>>, Arc<dyn LanguageModel>) =
        match c.model {
            ModelKind::Cascade => {
                let cascade = Cascade::load(require(&c.manifest, "manifest")?)?;
                let top = cascade.top().clone();
                (cascade.vocab, Some(cascade.counts), top)
            }
            other => {
                let vocab = read_vocab(require_file(&c.vocab, "vocab")?)?;
                let counts = match &c.counts {
                    Some(p) => {
                        check_file(p, "counts")?;
                        let counts = read_counts(p)?;
                        check_vocab("counts", counts.vocab_size(), vocab.len())?;
                        Some(Arc::new(counts))
                    }
                    None => None,
                };
                let model: Arc<dyn LanguageModel> = match other {
                    ModelKind::Uniform => Arc::new(Uniform {
                        vocab_size: vocab.len(),
                    }),
                    ModelKind::Aggregate => {
                        Arc::new(read_aggregate(require_file(&c.aggregate, "aggregate")?)?)
                    }
                    ModelKind::Mixed => {
                        let path = c
                            .mixed
                            .last()
                            .ok_or_else(|| Error::param("--mixed is required"))?;
                        check_file(path, "mixed-order model")?;
                        Arc::new(read_mixed(path)?)
                    }
                    ModelKind::Katz => {
                        let counts = counts
                            .as_deref()
                            .ok_or_else(|| Error::param("--counts is required"))?;
                        katz_baseline(counts, c.truncate, c.gt_threshold)?
                    }
                    ModelKind::Cascade => unreachable!(),
                };
                check_vocab("model", model.vocab_size(), vocab.len())?;
                (vocab, counts, model)
            }
        };
    let seen = match c.unseen {
        UnseenKind::None => None,
        UnseenKind::Backoff => Some(Seen::NotBackedOff),
        UnseenKind::Bigram | UnseenKind::Auto => match counts.as_deref() {
            Some(counts) if counts.max_order() >= 2 => Some(Seen::Bigram(counts)),
            _ if c.unseen == UnseenKind::Auto => None,
            _ => return Err(Error::param("unseen=bigram needs order-2 counts")),
        },
    };
    let sentences = read_sentences(test, &vocab)?;
    let report = evaluate(model.as_ref(), &sentences, seen)?;

    let mut out = Outputs::default();
    if let Some(o) = &c.out {
        out.add(o, |b| {
            writeln!(b, "{}", report.to_json())?;
            Ok(())
        })?;
    }
    out.commit()?;
    print!("{}", report.to_text());
    Ok(())
}

/// Katz trigrams over the Katz bigram baseline and over the top of a
/// cascade, at each truncation threshold.
pub fn cmd_sweep_truncate(c: &RunConfig) -> Result<()> {
    let test = require_file(&c.test, "test")?;
    let out_path = require(&c.out, "out")?;
    check_out_parent(out_path)?;
    let cascade = Cascade::load(require(&c.manifest, "manifest")?)?;
    let counts = &cascade.counts;
    if counts.max_order() < 3 {
        return Err(Error::param("truncation sweep needs order-3 counts"));
    }
    if cascade.top().context_len() > 2 {
        return Err(Error::param(
            "cascade top conditions on more than two words; drop its trigram level",
        ));
    }
    let sentences = read_sentences(test, &cascade.vocab)?;
    let baseline_lower: Arc<dyn LanguageModel> = Arc::new(KatzBigram::new(counts, c.gt_threshold)?);
    let gt = good_turing_discounts(counts.trigrams().values().copied(), c.gt_threshold)?;

    let mut rows = Vec::new();
    for &t in &c.thresholds {
        let baseline = KatzTrigram::with_discounts(counts, t, gt.clone(), baseline_lower.clone())?;
        let mixed = KatzTrigram::with_discounts(counts, t, gt.clone(), cascade.top().clone())?;
        let b = evaluate(&baseline, &sentences, Some(Seen::NotBackedOff))?;
        let m = evaluate(&mixed, &sentences, Some(Seen::NotBackedOff))?;
        println!(
            "t={t} trigrams={} baseline {:.3} mixed {:.3}",
            baseline.trigram_count(),
            b.perplexity,
            m.perplexity
        );
        rows.push(TruncationRow {
            threshold: t,
            baseline_perplexity: b.perplexity,
            mixed_perplexity: m.perplexity,
            baseline_unseen: b.unseen.as_ref().and_then(|u| u.perplexity),
            mixed_unseen: m.unseen.as_ref().and_then(|u| u.perplexity),
            trigram_count: baseline.trigram_count(),
            backoff_fraction: b.backoff_fraction,
        });
    }
    let mut out = Outputs::default();
    out.add(out_path, |b| write_truncation_csv(&rows, b))?;
    out.commit()
}

fn report_len(top: usize, available: usize) -> usize {
    if top == 0 {
        available
    } else {
        top.min(available)
    }
}

/// `word,class,max_prob` for the first `--top` vocabulary entries.
pub fn cmd_report_classes(c: &RunConfig) -> Result<()> {
    let model_path = require_file(&c.aggregate, "aggregate")?;
    let vocab_path = require_file(&c.vocab, "vocab")?;
    let out_path = require(&c.out, "out")?;
    check_out_parent(out_path)?;

    let vocab = read_vocab(vocab_path)?;
    let model = read_aggregate(model_path)?;
    check_vocab("aggregate model", model.vocab_size(), vocab.len())?;
    let rows = model.class_assignments();
    let n = report_len(c.top, rows.len());

    let mut out = Outputs::default();
    out.add(out_path, |b| {
        writeln!(b, "word,class,max_prob")?;
        for r in &rows[..n] {
            let word = vocab.word(r.word).unwrap_or("?");
            writeln!(b, "{},{},{:.6}", csv_field(word), r.class, r.prob)?;
        }
        Ok(())
    })?;
    out.commit()
}

/// `list,rank,word,lambda1` for the lowest and highest first-order weights.
pub fn cmd_report_lambda(c: &RunConfig) -> Result<()> {
    let model_path = c
        .mixed
        .last()
        .ok_or_else(|| Error::param("--mixed is required"))?;
    check_file(model_path, "mixed-order model")?;
    let vocab_path = require_file(&c.vocab, "vocab")?;
    let counts_path = require_file(&c.counts, "counts")?;
    let out_path = require(&c.out, "out")?;
    check_out_parent(out_path)?;
    if c.list_len == 0 {
        return Err(Error::param("list-len must be at least 1"));
    }

    let vocab = read_vocab(vocab_path)?;
    let counts = read_counts(counts_path)?;
    let model = read_mixed(model_path)?;
    check_vocab("mixed-order model", model.vocab_size(), vocab.len())?;
    let top = report_len(c.top, vocab.len());
    let report = model.lambda_report(top, c.list_len, &counts)?;

    let mut out = Outputs::default();
    out.add(out_path, |b| {
        writeln!(b, "list,rank,word,lambda1")?;
        for (name, list) in [("low", &report.low), ("high", &report.high)] {
            for (rank, &(w, l)) in list.iter().enumerate() {
                let word = vocab.word(w).unwrap_or("?");
                writeln!(b, "{name},{},{},{l:.6}", rank + 1, csv_field(word))?;
            }
        }
        Ok(())
    })?;
    out.commit()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips() {
        let mut c = RunConfig::new(CommandKind::Smooth);
        c.corpus = Some("a/train.txt".into());
        c.mixed = vec!["m2.mix".into(), "m3.mix".into()];
        c.skips = vec![1, 2, 3];
        c.valid_frac = 0.137;
        c.iters = Some(7);
        c.init = InitKind::Identity;
        c.unseen = UnseenKind::Backoff;
        c.workers = Some(3);
        let mut buf = Vec::new();
        c.write(&mut buf).unwrap();
        assert_eq!(RunConfig::read(&buf[..]).unwrap(), c);

        let d = RunConfig::new(CommandKind::Prepare);
        let mut buf = Vec::new();
        d.write(&mut buf).unwrap();
        assert_eq!(RunConfig::read(&buf[..]).unwrap(), d);
    }

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "# comment\nclasses=4\nseed=9\nvalid_frac=0.2\n").unwrap();
        let cli = Cli::try_parse_from([
            "mixlm",
            "--config",
            path.to_str().unwrap(),
            "train-aggregate",
            "--classes",
            "6",
        ])
        .unwrap();
        let c = RunConfig::from_cli(&cli).unwrap();
        assert_eq!(c.command, CommandKind::TrainAggregate);
        assert_eq!(c.classes, 6);
        assert_eq!(c.seed, 9);
        assert_eq!(c.valid_frac, 0.2);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = RunConfig::read("clases=3\n".as_bytes()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn validate_rejects_out_of_range() {
        let mut c = RunConfig::new(CommandKind::TrainAggregate);
        c.classes = 0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::new(CommandKind::Prepare);
        c.valid_frac = 1.0;
        assert!(c.validate().is_err());
        assert!(RunConfig::new(CommandKind::Eval).validate().is_ok());
    }

    #[test]
    fn manifest_round_trip_resolves_relative_paths() {
        let m = Manifest {
            vocab: "/data/vocab.txt".into(),
            counts: "/data/counts.txt".into(),
            levels: vec![
                Level::Aggregate {
                    model: "/models/agg".into(),
                },
                Level::Bigram {
                    sigma: "bigram.sigma".into(),
                },
                Level::Mixed {
                    model: "/models/m2".into(),
                    sigma: "mixed2.sigma".into(),
                },
                Level::Trigram {
                    gt: "trigram.gt".into(),
                    truncate: 2,
                },
            ],
        };
        let mut buf = Vec::new();
        m.write(&mut buf).unwrap();
        let back = Manifest::read(&buf[..], Path::new("/out")).unwrap();
        assert_eq!(back.vocab, m.vocab);
        assert_eq!(
            back.levels[1],
            Level::Bigram {
                sigma: "/out/bigram.sigma".into()
            }
        );
        assert_eq!(back.levels[3], Level::Trigram {
            gt: "/out/trigram.gt".into(),
            truncate: 2
        });
    }
}
