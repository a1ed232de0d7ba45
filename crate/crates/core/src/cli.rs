//! The `ffd` command line: one subcommand per pipeline stage.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use crate::circlefit::localize_manifest;
use crate::classifiers::{grid_search, kfold_cv, train, Dataset, Family, Split, TrainedModel};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::eval::{behavioural_report, evaluate, render_report};
use crate::features::{build_baselines, extract_dataset, write_feature_vectors, Baselines, FeatureVector};
use crate::io::{load_sequences, save_json, save_sequences};
use crate::model::Condition;
use crate::synth::{generate_dataset, generate_mask_corpus, generate_split, Preset};

#[derive(Debug, Parser)]
#[command(name = "ffd", version, about = "Fitness-for-duty screening from pupil and iris time series")]
pub struct Cli {
    /// Pipeline configuration (JSON); built-in defaults when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for generation and training; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic train/validation/test sequence files.
    Synth(SynthArgs),
    /// Localise pupil and iris in label masks listed by a manifest.
    Localize(LocalizeArgs),
    /// Build per-condition baseline curves from training sequences.
    Baseline(BaselineArgs),
    /// Extract feature vectors from sequence files.
    Extract(ExtractArgs),
    /// Train models on extracted features.
    Train(TrainArgs),
    /// Classify sequences or feature vectors with a trained model.
    Predict(PredictArgs),
    /// Evaluate trained models and write 4-class and Fit/Unfit reports.
    Eval(EvalArgs),
    /// Write behavioural-analysis plot data (grand-mean curves).
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory [default: paths.data]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Separation preset: easy, moderate or hard [default: generator.preset]
    #[arg(long, value_parser = parse_name::<Preset>)]
    pub preset: Option<Preset>,
    /// Also render label masks for the first N test sequences into paths.masks.
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub masks: usize,
}

#[derive(Debug, Args)]
pub struct LocalizeArgs {
    /// Mask manifest [default: paths.masks/manifest.csv]
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output sequence CSV [default: paths.data/localized.csv]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    /// Training sequences [default: paths.data/train.csv]
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// [default: paths.models/baselines.json]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Splits to process as paths.data/<split>.csv [default: all three]
    #[arg(long, value_parser = parse_name::<Split>, conflicts_with = "input")]
    pub split: Vec<Split>,
    /// Single sequence CSV to process instead of the splits.
    #[arg(long, requires = "out")]
    pub input: Option<PathBuf>,
    /// Feature file for --input.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// [default: paths.models/baselines.json]
    #[arg(long)]
    pub baselines: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Families to train [default: all three]
    #[arg(long, value_parser = parse_name::<Family>)]
    pub family: Vec<Family>,
    /// [default: paths.data/train.features.jsonl]
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Used by --search [default: paths.data/validation.features.jsonl]
    #[arg(long)]
    pub validation: Option<PathBuf>,
    /// Grid-search the family's grid from the config on the validation split.
    #[arg(long)]
    pub search: bool,
    /// Run stratified k-fold cross-validation and save the summary.
    #[arg(long)]
    pub cv: bool,
}

#[derive(Debug, Args)]
pub struct ModelChoice {
    /// Model family, read from paths.models/<family>.json
    #[arg(long, value_parser = parse_name::<Family>, default_value = "mlp")]
    pub family: Family,
    /// Explicit model file; overrides --family.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub model: ModelChoice,
    /// Feature vectors (JSON lines).
    #[arg(long, conflicts_with = "sequences", required_unless_present = "sequences")]
    pub features: Option<PathBuf>,
    /// Sequence CSV; features are extracted with the baselines first.
    #[arg(long)]
    pub sequences: Option<PathBuf>,
    /// [default: paths.models/baselines.json]
    #[arg(long)]
    pub baselines: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Families to evaluate [default: all three]
    #[arg(long, value_parser = parse_name::<Family>)]
    pub family: Vec<Family>,
    /// [default: paths.data/test.features.jsonl]
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Reports go to <out>/<family>/ [default: paths.out]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Sequence CSV [default: paths.data/train.csv]
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// [default: paths.out/behaviour]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_name<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn families(requested: &[Family]) -> Vec<Family> {
    if requested.is_empty() {
        Family::ALL.to_vec()
    } else {
        requested.to_vec()
    }
}

fn require(path: &Path, hint: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::MissingInput {
            path: path.to_path_buf(),
            hint: hint.into(),
        })
    }
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)),
        _ => Ok(()),
    }
}

fn features_path(cfg: &PipelineConfig, split: Split) -> PathBuf {
    cfg.paths.data.join(format!("{split}.features.jsonl"))
}

fn model_path(cfg: &PipelineConfig, family: Family) -> PathBuf {
    cfg.paths.models.join(format!("{family}.json"))
}

fn load_features(path: &Path, split: Split) -> Result<Dataset> {
    require(path, "run `ffd extract` first")?;
    Dataset::load(path, split)
}

fn load_model(cfg: &PipelineConfig, choice: &ModelChoice) -> Result<TrainedModel> {
    TrainedModel::load(choice.model.clone().unwrap_or_else(|| model_path(cfg, choice.family)))
}

fn extract_file(input: &Path, out: &Path, baselines: &Baselines, cfg: &PipelineConfig) -> Result<()> {
    require(input, "run `ffd synth` or `ffd localize` first")?;
    let seqs = load_sequences(input)?;
    let (vectors, skipped) = extract_dataset(&seqs, baselines, &cfg.extraction);
    if vectors.is_empty() {
        return Err(Error::Empty(format!("{}: no usable sequences", input.display())));
    }
    create_parent(out)?;
    write_feature_vectors(out, &vectors)?;
    println!("{}: {} feature vectors, {} sequences skipped", out.display(), vectors.len(), skipped.len());
    for s in skipped.iter().take(5) {
        eprintln!("  skipped {} ({}): {}", s.id, s.eye, s.reason);
    }
    Ok(())
}

fn predict_vectors(model: &TrainedModel, vectors: &[FeatureVector]) -> Result<()> {
    let names: Vec<&str> = Condition::ALL.iter().map(|c| c.as_str()).collect();
    println!("id\tcondition\t{}\tindicator\tunfit_score", names.join("\t"));
    for v in vectors {
        let p = model.predict_vector(v)?;
        let probs: Vec<String> = p.probabilities.iter().map(|x| format!("{x:.4}")).collect();
        println!(
            "{}\t{}\t{}\t{}\t{:.4}",
            v.id,
            p.condition,
            probs.join("\t"),
            p.fit_class(),
            p.unfit_score
        );
    }
    Ok(())
}

/// Runs one parsed invocation.
pub fn execute(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    let paths = cfg.paths.clone();
    let baselines_default = paths.models.join("baselines.json");
    match cli.command {
        Command::Synth(a) => {
            let mut gen = cfg.generator();
            if let Some(preset) = a.preset {
                gen = gen.with_preset(preset);
            }
            let out = a.out.unwrap_or(paths.data.clone());
            for f in generate_dataset(&gen, &out)? {
                println!("{}: {} sequences", f.path.display(), f.sequences);
            }
            if a.masks > 0 {
                let test: Vec<_> = generate_split(&gen, Split::Test)?.into_iter().take(a.masks).collect();
                let corpus = generate_mask_corpus(&test, gen.width, gen.height, &paths.masks)?;
                println!("{}: {} masks", corpus.manifest.display(), corpus.frames);
            }
        }
        Command::Localize(a) => {
            let manifest = a.manifest.unwrap_or(paths.masks.join("manifest.csv"));
            require(&manifest, "run `ffd synth --masks N` or provide a manifest")?;
            let seqs = localize_manifest(&manifest)?;
            let out = a.out.unwrap_or(paths.data.join("localized.csv"));
            create_parent(&out)?;
            save_sequences(&out, &seqs)?;
            println!("{}: {} sequences", out.display(), seqs.len());
        }
        Command::Baseline(a) => {
            let input = a.input.unwrap_or(paths.data.join("train.csv"));
            require(&input, "run `ffd synth` first")?;
            let baselines = build_baselines(&load_sequences(&input)?, &cfg.extraction.preprocessing)?;
            let out = a.out.unwrap_or(baselines_default);
            create_parent(&out)?;
            baselines.save(&out)?;
            println!("{}: support {:?}", out.display(), baselines.support);
        }
        Command::Extract(a) => {
            let baselines = Baselines::load(a.baselines.unwrap_or(baselines_default))?;
            match (a.input, a.out) {
                (Some(input), Some(out)) => extract_file(&input, &out, &baselines, &cfg)?,
                _ => {
                    let splits = if a.split.is_empty() { Split::ALL.to_vec() } else { a.split };
                    for split in splits {
                        let input = paths.data.join(format!("{split}.csv"));
                        extract_file(&input, &features_path(&cfg, split), &baselines, &cfg)?;
                    }
                }
            }
        }
        Command::Train(a) => {
            let train_set = load_features(&a.train.unwrap_or(features_path(&cfg, Split::Train)), Split::Train)?;
            let validation = if a.search {
                let p = a.validation.unwrap_or(features_path(&cfg, Split::Validation));
                Some(load_features(&p, Split::Validation)?)
            } else {
                None
            };
            fs::create_dir_all(&paths.models).map_err(|e| Error::io(&paths.models, e))?;
            for family in families(&a.family) {
                let mut spec = cfg.spec(family);
                if let Some(val) = &validation {
                    let grid = cfg.grids.get(&family).ok_or_else(|| {
                        Error::Config(format!("--search needs a `grids.{family}` section in the config"))
                    })?;
                    let result = grid_search(&spec, grid, &train_set, val, |_| {})?;
                    println!("{family}: grid best macro precision {:.4}", result.best_precision);
                    save_json(paths.models.join(format!("{family}.grid.json")), &result)?;
                    spec = result.best;
                }
                if a.cv {
                    let k = spec.hyperparameters.cv_folds();
                    let report = kfold_cv(&spec, &train_set, k)?;
                    println!(
                        "{family}: {k}-fold accuracy {:.4} +/- {:.4}",
                        report.mean_accuracy, report.std_accuracy
                    );
                    save_json(paths.models.join(format!("{family}.cv.json")), &report)?;
                }
                let model = train(&spec, &train_set)?;
                let out = model_path(&cfg, family);
                model.save(&out)?;
                println!("{}: {family} on {} samples", out.display(), model.n_samples);
            }
        }
        Command::Predict(a) => {
            let model = load_model(&cfg, &a.model)?;
            let vectors = match (a.features, a.sequences) {
                (Some(f), _) => {
                    require(&f, "run `ffd extract` first")?;
                    crate::features::read_feature_vectors(&f)?
                }
                (None, Some(s)) => {
                    require(&s, "pass an existing sequence CSV")?;
                    let baselines = Baselines::load(a.baselines.unwrap_or(baselines_default))?;
                    let (v, skipped) = extract_dataset(&load_sequences(&s)?, &baselines, &cfg.extraction);
                    for s in &skipped {
                        eprintln!("skipped {} ({}): {}", s.id, s.eye, s.reason);
                    }
                    v
                }
                (None, None) => unreachable!("clap requires one input"),
            };
            predict_vectors(&model, &vectors)?;
        }
        Command::Eval(a) => {
            let input = a.input.unwrap_or(features_path(&cfg, Split::Test));
            let data = load_features(&input, Split::Test)?;
            let out = a.out.unwrap_or(paths.out.clone());
            for family in families(&a.family) {
                let model = TrainedModel::load(model_path(&cfg, family))?;
                let report = evaluate(&model, &data, &input.display().to_string())?;
                let files = render_report(&report, out.join(family.as_str()))?;
                print!("{}", report.to_table());
                println!("{}\n", files.json.display());
            }
        }
        Command::Report(a) => {
            let input = a.input.unwrap_or(paths.data.join("train.csv"));
            require(&input, "run `ffd synth` first")?;
            let out = a.out.unwrap_or(paths.out.join("behaviour"));
            let analysis = behavioural_report(&load_sequences(&input)?, &cfg.extraction.preprocessing, &out)?;
            println!("{}: {} figures, support {:?}", out.display(), analysis.figures.len(), analysis.support);
            let d: Vec<String> = analysis.centre_dispersion.iter().map(|v| format!("{v:.3}")).collect();
            println!("centre dispersion (control, alcohol, drug, sleep): {}", d.join(", "));
        }
    }
    Ok(())
}

/// Parses arguments and runs them, returning the process exit code: 0 on
/// success, 1 for input errors (including bad flags), 2 otherwise.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                1
            } else {
                2
            }
        }
    }
}
