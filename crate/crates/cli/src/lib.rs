//! The `shapeclass` command line: synth, segment, extract, train, predict
//! and crossval over the library pipeline.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use thiserror::Error;

use shapeclass::dataio::{format_number, parse_arff, parse_csv, write_arff, write_csv};
use shapeclass::eval::{cross_validate, EvalReport};
use shapeclass::learners::persist::SavedModel;
use shapeclass::learners::{argmax, CombinationRule, LearnerSpec, VoteParams, LEARNER_NAMES};
use shapeclass::pipeline::{feature_dataset, image_features, FeatureRecord};
use shapeclass::raster::{load_image, segment, write_mask_pgm, write_pgm};
use shapeclass::synth::{generate_dataset, GenParams};
use shapeclass::{Connectivity, Dataset, Polarity};

/// Name of the manifest written by `synth`.
pub const MANIFEST_NAME: &str = "manifest.csv";

#[derive(Debug, Parser)]
#[command(name = "shapeclass", version, about = "Single-object shape classification pipeline")]
pub struct Cli {
    /// Worker threads for extraction and training (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a balanced synthetic image set and its manifest.
    Synth(SynthArgs),
    /// Threshold one image with Otsu's method and write the mask.
    Segment(SegmentArgs),
    /// Compute the shape features of every image in a manifest.
    Extract(ExtractArgs),
    /// Train a model on a feature file and save it as JSON.
    Train(TrainArgs),
    /// Apply a saved model to a feature file.
    Predict(PredictArgs),
    /// Stratified k-fold cross-validation of one or more learners.
    Crossval(CrossvalArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub per_class: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Boundary jitter amplitude in pixels.
    #[arg(long, default_value_t = 0.5)]
    pub jitter: f64,
    /// Image width and height in pixels.
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    #[arg(long, default_value_t = 255)]
    pub background: u8,
    #[arg(long, default_value_t = 40)]
    pub foreground: u8,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum PolarityArg {
    Dark,
    Light,
    #[default]
    Minority,
}

impl From<PolarityArg> for Polarity {
    fn from(p: PolarityArg) -> Self {
        match p {
            PolarityArg::Dark => Polarity::Dark,
            PolarityArg::Light => Polarity::Light,
            PolarityArg::Minority => Polarity::Minority,
        }
    }
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub polarity: PolarityArg,
}

fn parse_connectivity(s: &str) -> Result<Connectivity, String> {
    let n: u8 = s.parse().map_err(|_| format!("connectivity must be 4 or 8, got `{s}`"))?;
    Connectivity::try_from(n)
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Directory holding the images named in the manifest.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output feature table; `.arff` writes ARFF, anything else CSV.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "8", value_parser = parse_connectivity)]
    pub connectivity: Connectivity,
    #[arg(long, value_enum, default_value_t)]
    pub polarity: PolarityArg,
}

fn parse_learner(s: &str) -> Result<String, String> {
    if LEARNER_NAMES.contains(&s) {
        Ok(s.to_owned())
    } else {
        Err(format!("unknown learner `{s}` (expected one of {})", LEARNER_NAMES.join(", ")))
    }
}

fn parse_member(s: &str) -> Result<String, String> {
    if s.is_empty() {
        Ok(String::new())
    } else {
        parse_learner(s)
    }
}

fn parse_rule(s: &str) -> Result<CombinationRule, String> {
    s.parse()
}

/// Hyperparameter overrides shared by `train` and `crossval`. Each applies to
/// every learner it concerns, including vote members.
#[derive(Debug, Default, Args)]
pub struct LearnerFlags {
    /// Vote members as a comma list; empty for the majority-class fallback.
    #[arg(long, value_delimiter = ',', num_args = 0..=1, value_parser = parse_member)]
    pub members: Option<Vec<String>>,
    /// Vote combination rule: majority or average.
    #[arg(long, value_parser = parse_rule)]
    pub rule: Option<CombinationRule>,
    /// Forest size.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub trees: Option<u64>,
    /// Features tried per forest node.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub mtry: Option<u64>,
    /// Bagging iterations.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub iterations: Option<u64>,
    /// Minimum instances per tree leaf.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub min_leaf: Option<u64>,
    /// Naive Bayes bins per feature.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub bins: Option<u64>,
    /// Naive Bayes smoothing pseudo-count.
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Feature file (CSV, or ARFF when the name ends in `.arff`).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_parser = parse_learner)]
    pub learner: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub flags: LearnerFlags,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    #[default]
    Table,
    Json,
}

#[derive(Debug, Args)]
pub struct CrossvalArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// One learner or a comma list, reported in the order given.
    #[arg(long, required = true, value_delimiter = ',', value_parser = parse_learner)]
    pub learner: Vec<String>,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t)]
    pub report: ReportFormat,
    #[command(flatten)]
    pub flags: LearnerFlags,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Input { path: PathBuf, message: String },
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Usage(#[from] clap::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) => e.exit_code(),
            _ => 1,
        }
    }

    fn input(path: &Path, message: impl ToString) -> Self {
        CliError::Input { path: path.to_owned(), message: message.to_string() }
    }
}

fn usage_error(kind: ErrorKind, message: impl std::fmt::Display) -> CliError {
    CliError::Usage(Cli::command().error(kind, message))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn read_text(path: &Path) -> Result<String, CliError> {
    let bytes = read_bytes(path)?;
    String::from_utf8(bytes).map_err(|_| CliError::input(path, "file is not valid UTF-8"))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn is_arff(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("arff"))
}

/// Loads a dataset, choosing the format by extension.
pub fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    let text = read_text(path)?;
    if is_arff(path) {
        parse_arff(&text).map_err(|e| CliError::input(path, e))
    } else {
        parse_csv(&text).map_err(|e| CliError::input(path, e))
    }
}

fn apply_flags(spec: &mut LearnerSpec, flags: &LearnerFlags) -> Result<(), CliError> {
    let as_usize = |v: u64| usize::try_from(v).unwrap_or(usize::MAX);
    match spec {
        LearnerSpec::ZeroR => {}
        LearnerSpec::Tree(p) => {
            if let Some(m) = flags.min_leaf {
                p.min_leaf = as_usize(m);
            }
        }
        LearnerSpec::Bagging(p) => {
            if let Some(t) = flags.iterations {
                p.iterations = as_usize(t);
            }
            if let Some(m) = flags.min_leaf {
                p.base.min_leaf = as_usize(m);
            }
        }
        LearnerSpec::Forest(p) => {
            if let Some(t) = flags.trees {
                p.trees = as_usize(t);
            }
            if let Some(m) = flags.mtry {
                p.mtry = Some(as_usize(m));
            }
            if let Some(m) = flags.min_leaf {
                p.min_leaf = as_usize(m);
            }
        }
        LearnerSpec::BayesNet(p) => {
            if let Some(b) = flags.bins {
                p.bins = as_usize(b);
            }
            if let Some(a) = flags.alpha {
                if !(a > 0.0 && a.is_finite()) {
                    return Err(usage_error(ErrorKind::ValueValidation, format!("--alpha must be positive, got {a}")));
                }
                p.alpha = a;
            }
        }
        LearnerSpec::Vote(p) => {
            let members = flags.members.clone().unwrap_or_default();
            let mut specs = Vec::with_capacity(members.len());
            for name in members.iter().filter(|n| !n.is_empty()) {
                if name == "vote" {
                    return Err(usage_error(ErrorKind::InvalidValue, "--members: vote cannot be a member of itself"));
                }
                let mut member = LearnerSpec::from_name(name).expect("validated by the parser");
                apply_flags(&mut member, flags)?;
                specs.push(member);
            }
            *p = VoteParams { members: specs, rule: flags.rule.unwrap_or_default() };
        }
    }
    Ok(())
}

/// Builds learner specs from names and flags, rejecting vote-only flags
/// when no vote learner is requested.
pub fn learner_specs(names: &[String], flags: &LearnerFlags) -> Result<Vec<LearnerSpec>, CliError> {
    if (flags.members.is_some() || flags.rule.is_some()) && !names.iter().any(|n| n == "vote") {
        return Err(usage_error(ErrorKind::ArgumentConflict, "--members and --rule only apply to the vote learner"));
    }
    names
        .iter()
        .map(|name| {
            let mut spec = LearnerSpec::from_name(name).expect("validated by the parser");
            apply_flags(&mut spec, flags)?;
            Ok(spec)
        })
        .collect()
}

fn cmd_synth(args: &SynthArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let params = GenParams {
        width: args.size,
        height: args.size,
        jitter: args.jitter,
        background: args.background,
        foreground: args.foreground,
        seed: args.seed,
        ..GenParams::default()
    };
    params.validate().map_err(|m| usage_error(ErrorKind::ValueValidation, m))?;
    let per_class = usize::try_from(args.per_class).map_err(|_| CliError::Failed("--per-class is too large".into()))?;
    fs::create_dir_all(&args.out).map_err(|source| CliError::Io { path: args.out.clone(), source })?;
    let set = generate_dataset(per_class, &params);
    set.images
        .par_iter()
        .try_for_each(|g| write_file(&args.out.join(&g.filename), write_pgm(&g.image)))?;
    write_file(&args.out.join(MANIFEST_NAME), &set.manifest)?;
    let _ = writeln!(out, "wrote {} images and {}", set.images.len(), MANIFEST_NAME);
    Ok(())
}

fn cmd_segment(args: &SegmentArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let image = load_image(&read_bytes(&args.input)?).map_err(|e| CliError::input(&args.input, e))?;
    let (threshold, mask) = segment(&image, args.polarity.into()).map_err(|e| CliError::input(&args.input, e))?;
    write_file(&args.out, write_mask_pgm(&mask))?;
    let _ = writeln!(out, "threshold\t{threshold}\nforeground\t{}", mask.count_foreground());
    Ok(())
}

/// `(filename, class)` pairs from a manifest CSV with that header.
pub fn read_manifest(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| CliError::input(path, e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::input(path, format!("missing `{name}` column")))
    };
    let (file_col, class_col) = (col("filename")?, col("class")?);
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::input(path, e))?;
        let field = |i: usize| record.get(i).unwrap_or_default().to_owned();
        entries.push((field(file_col), field(class_col)));
    }
    if entries.is_empty() {
        return Err(CliError::input(path, "manifest lists no images"));
    }
    Ok(entries)
}

fn cmd_extract(args: &ExtractArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let entries = read_manifest(&args.manifest)?;
    let polarity: Polarity = args.polarity.into();
    let records = entries
        .par_iter()
        .map(|(file, class)| {
            let path = args.input.join(file);
            let image = load_image(&read_bytes(&path)?).map_err(|e| CliError::input(&path, e))?;
            let features =
                image_features(&image, polarity, args.connectivity).map_err(|e| CliError::input(&path, e))?;
            Ok(FeatureRecord { id: file.clone(), class: class.clone(), features })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    // First-appearance order, the same order a CSV reader recovers.
    let mut classes: Vec<String> = Vec::new();
    for (_, c) in &entries {
        if !classes.contains(c) {
            classes.push(c.clone());
        }
    }
    let ds = feature_dataset("shape_features", &classes, &records).map_err(|e| CliError::input(&args.manifest, e))?;
    let text = if is_arff(&args.out) { write_arff(&ds) } else { write_csv(&ds) };
    write_file(&args.out, text)?;
    let _ = writeln!(out, "extracted {} feature vectors", ds.len());
    Ok(())
}

fn cmd_train(args: &TrainArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = learner_specs(std::slice::from_ref(&args.learner), &args.flags)?.remove(0);
    let ds = load_dataset(&args.data)?;
    let model = spec.fit_all(&ds, args.seed).map_err(|e| CliError::input(&args.data, e))?;
    let saved = SavedModel::new(&spec, args.seed, &ds, model);
    write_file(&args.out, saved.to_json())?;
    let _ = writeln!(out, "trained {} on {} instances", spec.describe(), ds.len());
    Ok(())
}

fn cmd_predict(args: &PredictArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let saved = SavedModel::from_json(&read_text(&args.model)?).map_err(|e| CliError::input(&args.model, e))?;
    let ds = load_dataset(&args.data)?;
    let names: Vec<&str> = ds.attributes().iter().map(|a| a.name.as_str()).collect();
    if names != saved.attributes {
        return Err(CliError::input(
            &args.data,
            format!("attributes [{}] do not match the model's [{}]", names.join(","), saved.attributes.join(",")),
        ));
    }
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header = vec!["id".to_owned(), "actual".to_owned(), "predicted".to_owned()];
    header.extend(saved.classes.iter().map(|c| format!("p_{c}")));
    writer.write_record(&header).map_err(|e| CliError::Failed(e.to_string()))?;
    let mut correct = 0usize;
    for i in 0..ds.len() {
        let dist = saved.model.predict_dist(ds.row(i)).map_err(|e| CliError::input(&args.data, e))?;
        let predicted = &saved.classes[argmax(&dist)];
        let actual = &ds.class_names()[ds.label(i)];
        correct += usize::from(predicted == actual);
        let id = ds.ids().map_or_else(|| i.to_string(), |ids| ids[i].clone());
        let mut record = vec![id, actual.clone(), predicted.clone()];
        record.extend(dist.iter().map(|&p| format_number(p)));
        writer.write_record(&record).map_err(|e| CliError::Failed(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Failed(e.to_string()))?;
    write_file(&args.out, bytes)?;
    let _ = writeln!(out, "predicted {} instances ({correct} match the given class)", ds.len());
    Ok(())
}

/// One line per report: names padded to a common width, a tab, then the
/// two-decimal accuracy.
pub fn render_table(reports: &[EvalReport]) -> String {
    let width = reports.iter().map(|r| r.learner.len()).max().unwrap_or(0);
    reports.iter().map(|r| format!("{:<width$}\t{}\n", r.learner, r.accuracy)).collect()
}

fn cmd_crossval(args: &CrossvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let specs = learner_specs(&args.learner, &args.flags)?;
    let ds = load_dataset(&args.data)?;
    let reports = specs
        .iter()
        .map(|spec| cross_validate(&ds, spec, args.folds, args.seed).map_err(|e| CliError::input(&args.data, e)))
        .collect::<Result<Vec<_>, _>>()?;
    let text = match args.report {
        ReportFormat::Table => render_table(&reports),
        ReportFormat::Json => {
            serde_json::to_string_pretty(&reports).map_err(|e| CliError::Failed(e.to_string()))? + "\n"
        }
    };
    out.write_all(text.as_bytes()).map_err(|e| CliError::Failed(e.to_string()))
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Synth(a) => cmd_synth(a, out),
        Command::Segment(a) => cmd_segment(a, out),
        Command::Extract(a) => cmd_extract(a, out),
        Command::Train(a) => cmd_train(a, out),
        Command::Predict(a) => cmd_predict(a, out),
        Command::Crossval(a) => cmd_crossval(a, out),
    }
}

/// Usage line of the subcommand named in `argv`, or of the whole program.
fn usage_for(argv: &[std::ffi::OsString]) -> String {
    let mut command = Cli::command();
    command.build();
    let name = argv
        .iter()
        .skip(1)
        .filter_map(|a| a.to_str())
        .find(|a| command.get_subcommands().any(|s| s.get_name() == *a))
        .map(str::to_owned);
    let usage = match name.and_then(|n| command.find_subcommand_mut(n)) {
        Some(sub) => sub.render_usage(),
        None => command.render_usage(),
    };
    usage.to_string()
}

fn report_usage_error(e: &clap::Error, argv: &[std::ffi::OsString], err: &mut dyn Write) {
    let rendered = e.render().to_string();
    let _ = write!(err, "{rendered}");
    if !rendered.contains("Usage:") {
        let _ = writeln!(err, "\n{}", usage_for(argv));
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code: 0 on success, 1 for data and model errors, 2 for
/// usage errors.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                report_usage_error(&e, &argv, err);
            } else {
                let _ = write!(out, "{}", e.render());
            }
            return e.exit_code();
        }
    };
    let result = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => {
            let mut buffer = Vec::new();
            let result = pool.install(|| dispatch(&cli, &mut buffer));
            let _ = out.write_all(&buffer);
            result
        }
        Err(e) => Err(CliError::Failed(format!("cannot start worker threads: {e}"))),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(e)) => {
            report_usage_error(&e, &argv, err);
            e.exit_code()
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
