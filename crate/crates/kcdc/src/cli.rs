//! The `kcdc` command-line tool.
//!
//! Exit status of `score` encodes the decision: 0 = X->Y, 1 = Y->X,
//! 2 = undecided; 3 and above signal errors. Diagnostics go to stderr,
//! data and tables to stdout.

use crate::classifier::{self, TrainedModel};
use crate::datasets::{self, BenchmarkReport, PairOutcome};
use crate::score::{
    decide_direct, decide_majority, score_pair, Decision, HyperConfig, KcdcScores,
};
use crate::synth::{self, mix, Family, Noise, SyntheticSpec, Variant};
use crate::{KcdcError, KernelSpec, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Parser)]
#[command(
    name = "kcdc",
    about = "Infer the causal direction between two variables from observational data",
    version
)]
pub struct Cli {
    /// Worker threads for benchmark evaluation (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    D1,
    D2,
    D3,
}

/// Kernel and regularization flags shared by the scoring commands.
#[derive(Debug, Args)]
pub struct ConfigFlags {
    /// Kernel for the conditioning variable: rbf:<sigma>, rbf:medx<mult>, log:<q>, rq.
    #[arg(long = "kernel-x", default_value = "log:2")]
    pub kernel_x: String,

    /// Kernel for the response variable.
    #[arg(long = "kernel-y", default_value = "rq")]
    pub kernel_y: String,

    /// Regularization strength of the conditional embedding solve.
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,

    /// Disable per-column standardization.
    #[arg(long)]
    pub raw: bool,

    /// File with one hyperconfig per line: `<kernel-x> <kernel-y> [lambda] [none|standardize]`.
    #[arg(long)]
    pub configs: Option<PathBuf>,
}

impl ConfigFlags {
    fn single(&self) -> Result<HyperConfig> {
        Ok(HyperConfig {
            kernel_cond: self.kernel_x.parse()?,
            kernel_resp: self.kernel_y.parse()?,
            lambda: validate_lambda(self.lambda)?,
            preprocess: if self.raw {
                crate::Preprocess::None
            } else {
                crate::Preprocess::Standardize
            },
        })
    }

    /// The config list: the file when given, otherwise the default sweep.
    fn list(&self) -> Result<Vec<HyperConfig>> {
        match &self.configs {
            Some(path) => read_config_file(path),
            None => Ok(default_sweep()),
        }
    }
}

fn validate_lambda(lambda: f64) -> Result<f64> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(lambda)
    } else {
        Err(KcdcError::ConfigParse {
            input: lambda.to_string(),
            reason: "lambda must be positive".into(),
        })
    }
}

pub fn read_config_file(path: &PathBuf) -> Result<Vec<HyperConfig>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| KcdcError::io(path.display().to_string(), e))?;
    let configs: Vec<HyperConfig> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(HyperConfig::from_str)
        .collect::<Result<_>>()?;
    if configs.is_empty() {
        return Err(KcdcError::EmptyConfigs);
    }
    Ok(configs)
}

/// The default ensemble: conditioning kernels {log:2, rbf:medx1,
/// rbf:medx1.5} × RQ response × lambda {0.1, 0.2, 0.5}, standardized.
/// Nine members (an odd count, so clean majorities), each individually
/// strong across the synthetic families.
pub fn default_sweep() -> Vec<HyperConfig> {
    let mut sweep = Vec::new();
    for cond in [
        KernelSpec::log(2.0),
        KernelSpec::rbf_median(1.0),
        KernelSpec::rbf_median(1.5),
    ] {
        for resp in [KernelSpec::rq()] {
            for lambda in [0.1, 0.2, 0.5] {
                sweep.push(HyperConfig {
                    kernel_cond: cond,
                    kernel_resp: resp,
                    lambda,
                    preprocess: crate::Preprocess::Standardize,
                });
            }
        }
    }
    sweep
}

/// The arrow-of-time hyperparameter grid: log kernels with q in {2,3,4} and
/// RBF kernels at {1, 1.5, 2} times the median heuristic, on both sides.
pub fn arrow_sweep(lambda: f64) -> Vec<HyperConfig> {
    let kernels = [
        KernelSpec::log(2.0),
        KernelSpec::log(3.0),
        KernelSpec::log(4.0),
        KernelSpec::rbf_median(1.0),
        KernelSpec::rbf_median(1.5),
        KernelSpec::rbf_median(2.0),
    ];
    let mut sweep = Vec::new();
    for cond in kernels {
        for resp in kernels {
            sweep.push(HyperConfig {
                kernel_cond: cond,
                kernel_resp: resp,
                lambda,
                preprocess: crate::Preprocess::Standardize,
            });
        }
    }
    sweep
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score one pair file and print the inferred causal direction.
    Score {
        /// Whitespace-separated numeric file; first column is X, second is Y.
        pair_file: PathBuf,

        #[arg(long, value_enum, default_value_t = Rule::D1)]
        rule: Rule,

        /// Relative decision threshold; gaps below it are left undecided.
        #[arg(long, default_value_t = 0.0)]
        delta: f64,

        /// Trained model file (required for --rule d3).
        #[arg(long)]
        model: Option<PathBuf>,

        #[command(flatten)]
        config: ConfigFlags,
    },

    /// Reproduce the synthetic benchmark grid (9 functional forms × 3 noises).
    BenchSynthetic {
        /// Comma-separated subset of {additive, multiplicative, complex}.
        #[arg(long)]
        families: Option<String>,

        /// Datasets per cell.
        #[arg(long, default_value_t = 100)]
        count: usize,

        /// Observations per dataset.
        #[arg(long, default_value_t = 100)]
        n: usize,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        #[command(flatten)]
        config: ConfigFlags,
    },

    /// Evaluate on the Tübingen cause-effect pairs corpus.
    BenchTcep {
        /// Corpus directory (default: $KCDC_TCEP_DIR).
        #[arg(long, env = "KCDC_TCEP_DIR")]
        tcep_dir: PathBuf,

        /// d1 scores with the single config; d2 takes a majority over the sweep.
        #[arg(long, value_enum, default_value_t = Rule::D2)]
        rule: Rule,

        /// Drop the multivariate pairs 52-55 and 71.
        #[arg(long)]
        exclude_multivariate: bool,

        #[arg(long, default_value_t = 0.0)]
        delta: f64,

        #[command(flatten)]
        config: ConfigFlags,
    },

    /// Decide whether a time series runs forward by scoring lagged pairs.
    ArrowOfTime {
        /// T×d numeric file, one time step per row.
        series_file: PathBuf,

        #[arg(long, default_value_t = 1)]
        lag: usize,

        /// Regularization used across the whole kernel sweep.
        #[arg(long, default_value_t = 1e-3)]
        lambda: f64,

        #[arg(long, default_value_t = 0.0)]
        delta: f64,
    },

    /// Train the D3 classifier on synthetic pairs and write a model file.
    TrainClassifier {
        /// Where to write the model.
        #[arg(long)]
        output: PathBuf,

        /// Training datasets per (family, variant, noise) cell; the same
        /// number again is generated as a held-out set.
        #[arg(long, default_value_t = 10)]
        count: usize,

        /// Observations per dataset.
        #[arg(long, default_value_t = 100)]
        n: usize,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        /// L2 regularization on the classifier weights.
        #[arg(long, default_value_t = classifier::DEFAULT_L2)]
        l2: f64,

        #[command(flatten)]
        config: ConfigFlags,
    },
}

/// Run a parsed command line; the return value is the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    if let Some(workers) = cli.workers {
        // a failure here means a pool exists already (tests call run twice)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }
    match cli.command {
        Command::Score {
            pair_file,
            rule,
            delta,
            model,
            config,
        } => cmd_score(&pair_file, rule, delta, model.as_deref(), &config, cli.format),
        Command::BenchSynthetic {
            families,
            count,
            n,
            seed,
            config,
        } => cmd_bench_synthetic(families.as_deref(), count, n, seed, &config, cli.format),
        Command::BenchTcep {
            tcep_dir,
            rule,
            exclude_multivariate,
            delta,
            config,
        } => cmd_bench_tcep(&tcep_dir, rule, exclude_multivariate, delta, &config, cli.format),
        Command::ArrowOfTime {
            series_file,
            lag,
            lambda,
            delta,
        } => cmd_arrow_of_time(&series_file, lag, lambda, delta, cli.format),
        Command::TrainClassifier {
            output,
            count,
            n,
            seed,
            l2,
            config,
        } => cmd_train_classifier(&output, count, n, seed, l2, &config),
    }
}

fn split_pair_columns(data: &ndarray::Array2<f64>) -> Result<(ndarray::Array2<f64>, ndarray::Array2<f64>)> {
    let cols = data.ncols();
    if cols < 2 {
        return Err(KcdcError::MalformedMeta {
            path: "<pair file>".into(),
            reason: format!("need at least 2 columns, found {cols}"),
        });
    }
    // two-column default split: first column X, the rest Y
    let split = 1;
    Ok((
        data.slice(ndarray::s![.., ..split]).to_owned(),
        data.slice(ndarray::s![.., split..]).to_owned(),
    ))
}

fn decision_exit_code(decision: Decision) -> i32 {
    match decision {
        Decision::XtoY => 0,
        Decision::YtoX => 1,
        Decision::Undecided => 2,
    }
}

struct ConfigScore {
    config: HyperConfig,
    scores: KcdcScores,
    decision: Decision,
}

fn render_config_scores(rows: &[ConfigScore], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str("config,s_xy,s_yx,confidence,decision\n");
            for r in rows {
                let _ = writeln!(
                    out,
                    "{},{:e},{:e},{:e},{}",
                    r.config, r.scores.s_xy, r.scores.s_yx, r.scores.confidence, r.decision
                );
            }
        }
        Format::Json => {
            for r in rows {
                let record = serde_json::json!({
                    "config": r.config.to_string(),
                    "s_xy": r.scores.s_xy,
                    "s_yx": r.scores.s_yx,
                    "confidence": r.scores.confidence,
                    "decision": r.decision.to_string(),
                });
                let _ = writeln!(out, "{record}");
            }
        }
        Format::Table => {
            let width = rows.iter().map(|r| r.config.to_string().len()).max().unwrap_or(6);
            let _ = writeln!(
                out,
                "{:width$}  {:>13} {:>13} {:>13}  decision",
                "config", "S_x->y", "S_y->x", "T"
            );
            for r in rows {
                let _ = writeln!(
                    out,
                    "{:width$}  {:>13.6e} {:>13.6e} {:>13.6e}  {}",
                    r.config.to_string(),
                    r.scores.s_xy,
                    r.scores.s_yx,
                    r.scores.confidence,
                    r.decision
                );
            }
        }
    }
    out
}

fn cmd_score(
    pair_file: &std::path::Path,
    rule: Rule,
    delta: f64,
    model: Option<&std::path::Path>,
    config: &ConfigFlags,
    format: Format,
) -> Result<i32> {
    let data = datasets::read_pair_file(pair_file)?;
    let (x, y) = split_pair_columns(&data)?;

    let decision = match rule {
        Rule::D1 => {
            let cfg = config.single()?;
            let scores = score_pair(&x, &y, &cfg)?;
            let decision = decide_direct(&scores, delta);
            print!(
                "{}",
                render_config_scores(
                    &[ConfigScore { config: cfg, scores, decision }],
                    format
                )
            );
            decision
        }
        Rule::D2 => {
            let configs = config.list()?;
            let rows: Vec<ConfigScore> = configs
                .iter()
                .map(|cfg| {
                    let scores = score_pair(&x, &y, cfg)?;
                    Ok(ConfigScore {
                        config: *cfg,
                        scores,
                        decision: decide_direct(&scores, delta),
                    })
                })
                .collect::<Result<_>>()?;
            let decision = decide_majority(&rows.iter().map(|r| r.decision).collect::<Vec<_>>())?;
            print!("{}", render_config_scores(&rows, format));
            decision
        }
        Rule::D3 => {
            let model_path = model.ok_or_else(|| KcdcError::ModelFormat(
                "--rule d3 requires --model <file>".into(),
            ))?;
            let model = TrainedModel::load(model_path)?;
            let rows: Vec<ConfigScore> = model
                .configs
                .iter()
                .map(|cfg| {
                    let scores = score_pair(&x, &y, cfg)?;
                    Ok(ConfigScore {
                        config: *cfg,
                        scores,
                        decision: decide_direct(&scores, delta),
                    })
                })
                .collect::<Result<_>>()?;
            print!("{}", render_config_scores(&rows, format));
            classifier::predict(&model, &x, &y)?
        }
    };
    match format {
        Format::Json => println!("{}", serde_json::json!({ "decision": decision.to_string() })),
        _ => println!("decision: {decision}"),
    }
    Ok(decision_exit_code(decision))
}

const ALL_VARIANTS: [Variant; 3] = [Variant::A, Variant::B, Variant::C];
const ALL_NOISES: [Noise; 3] = [Noise::Gaussian, Noise::Uniform, Noise::Exponential];

fn parse_families(arg: Option<&str>) -> Result<Vec<Family>> {
    match arg {
        None => Ok(vec![Family::Additive, Family::Multiplicative, Family::Complex]),
        Some(list) => list.split(',').map(|f| f.trim().parse()).collect(),
    }
}

/// Accuracy of rule D1 (with the given delta) over a batch of datasets whose
/// ground truth is known.
pub fn batch_accuracy(
    datasets: &[synth::PairDataset],
    config: &HyperConfig,
    delta: f64,
) -> Result<(f64, f64)> {
    let outcomes: Vec<(Decision, Decision, f64)> = datasets
        .par_iter()
        .map(|d| {
            let scores = score_pair(&d.x, &d.y, config)?;
            Ok((
                decide_direct(&scores, delta),
                d.truth.unwrap_or(Decision::Undecided),
                d.weight,
            ))
        })
        .collect::<Result<_>>()?;
    datasets::weighted_accuracy(&outcomes)
}

fn cmd_bench_synthetic(
    families: Option<&str>,
    count: usize,
    n: usize,
    seed: u64,
    config: &ConfigFlags,
    format: Format,
) -> Result<i32> {
    let families = parse_families(families)?;
    let cfg = config.single()?;
    eprintln!("benchmark config: {cfg}; {count} datasets x {n} observations per cell");

    let mut out = String::new();
    if format == Format::Csv {
        out.push_str("family,variant,noise,accuracy,undecided\n");
    }
    for family in &families {
        for (vi, variant) in ALL_VARIANTS.iter().enumerate() {
            for (ni, noise) in ALL_NOISES.iter().enumerate() {
                let cell_index = cell_id(*family, vi, ni);
                let spec = SyntheticSpec {
                    family: *family,
                    variant: *variant,
                    noise: *noise,
                    n,
                    seed: mix(seed, cell_index),
                };
                let line = match synth::generate_batch(&spec, count)
                    .and_then(|batch| batch_accuracy(&batch, &cfg, 0.0))
                {
                    Ok((acc, und)) => match format {
                        Format::Csv => {
                            format!("{family},{variant},{noise},{acc:.4},{und:.4}\n")
                        }
                        Format::Json => {
                            let record = serde_json::json!({
                                "family": family.to_string(),
                                "variant": variant.to_string(),
                                "noise": noise.to_string(),
                                "accuracy": acc,
                                "undecided": und,
                                "config": cfg.to_string(),
                            });
                            format!("{record}\n")
                        }
                        Format::Table => format!(
                            "{:<14} {} {:<12} accuracy {:6.2}%  undecided {:5.2}%\n",
                            family.to_string(),
                            variant,
                            noise.to_string(),
                            100.0 * acc,
                            100.0 * und
                        ),
                    },
                    // a failing cell is reported and does not abort the rest
                    Err(e) => format!("{family} {variant} {noise} error: {e}\n"),
                };
                out.push_str(&line);
            }
        }
    }
    print!("{out}");
    Ok(0)
}

fn cell_id(family: Family, variant_index: usize, noise_index: usize) -> u64 {
    let f = match family {
        Family::Additive => 0,
        Family::Multiplicative => 1,
        Family::Complex => 2,
    };
    (f * 9 + variant_index * 3 + noise_index) as u64
}

fn median_of(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    if values.is_empty() {
        f64::NAN
    } else {
        values[values.len() / 2]
    }
}

fn cmd_bench_tcep(
    tcep_dir: &std::path::Path,
    rule: Rule,
    exclude_multivariate: bool,
    delta: f64,
    config: &ConfigFlags,
    format: Format,
) -> Result<i32> {
    let pairs = datasets::load_tcep(tcep_dir, exclude_multivariate)?;
    eprintln!("loaded {} pairs from {}", pairs.len(), tcep_dir.display());

    let (configs, description) = match rule {
        Rule::D1 => {
            let cfg = config.single()?;
            (vec![cfg], format!("direct, {cfg}"))
        }
        Rule::D2 => {
            let list = config.list()?;
            let desc = format!(
                "majority over {} configs: [{}]",
                list.len(),
                list.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("; ")
            );
            (list, desc)
        }
        Rule::D3 => {
            return Err(KcdcError::ModelFormat(
                "bench-tcep supports rules d1 and d2".into(),
            ))
        }
    };

    let outcomes: Vec<Option<PairOutcome>> = pairs
        .par_iter()
        .map(|pair| {
            let mut decisions = Vec::with_capacity(configs.len());
            let mut confidences = Vec::with_capacity(configs.len());
            for cfg in &configs {
                match score_pair(&pair.x, &pair.y, cfg) {
                    Ok(scores) => {
                        decisions.push(decide_direct(&scores, delta));
                        confidences.push(scores.confidence);
                    }
                    Err(e) => {
                        eprintln!("warning: {} failed under {cfg}: {e}; pair skipped", pair.id);
                        return None;
                    }
                }
            }
            let decision = if decisions.len() == 1 {
                decisions[0]
            } else {
                decide_majority(&decisions).ok()?
            };
            Some(PairOutcome {
                id: pair.id.clone(),
                decision,
                truth: pair.truth,
                confidence: median_of(confidences),
                weight: pair.weight,
            })
        })
        .collect();
    let mut outcomes: Vec<PairOutcome> = outcomes.into_iter().flatten().collect();
    outcomes.sort_by(|a, b| {
        b.confidence
            .partial_cmp(&a.confidence)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.id.cmp(&b.id))
    });
    let report = BenchmarkReport::from_outcomes(outcomes, description)?;
    print!("{}", render_benchmark_report(&report, format));
    Ok(0)
}

fn render_benchmark_report(report: &BenchmarkReport, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Json => {
            let _ = writeln!(out, "{}", serde_json::to_string(report).expect("serializable"));
        }
        Format::Csv => {
            out.push_str("id,decision,truth,confidence,weight\n");
            for o in &report.per_pair {
                let truth = o.truth.map(|t| t.to_string()).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{:e},{}",
                    o.id, o.decision, truth, o.confidence, o.weight
                );
            }
            let _ = writeln!(
                out,
                "# weighted_accuracy={:.4} undecided_rate={:.4} config={}",
                report.weighted_accuracy, report.undecided_rate, report.config_description
            );
        }
        Format::Table => {
            let _ = writeln!(out, "{:<10} {:<10} {:<6} {:>13}  weight", "pair", "decision", "truth", "T");
            for o in &report.per_pair {
                let truth = o.truth.map(|t| t.to_string()).unwrap_or_else(|| "-".into());
                let _ = writeln!(
                    out,
                    "{:<10} {:<10} {:<6} {:>13.6e}  {}",
                    o.id,
                    o.decision.to_string(),
                    truth,
                    o.confidence,
                    o.weight
                );
            }
            let _ = writeln!(
                out,
                "weighted accuracy: {:.2}%  undecided: {:.2}%",
                100.0 * report.weighted_accuracy,
                100.0 * report.undecided_rate
            );
            let _ = writeln!(out, "config: {}", report.config_description);
        }
    }
    out
}

/// Score every config of the arrow-of-time sweep on the lagged series.
pub fn arrow_of_time_sweep(
    series: &ndarray::Array2<f64>,
    lag: usize,
    lambda: f64,
    delta: f64,
) -> Result<(Vec<(HyperConfig, KcdcScores, Decision)>, Decision)> {
    let pair = datasets::lag_pairs(series, lag)?;
    let sweep = arrow_sweep(lambda);
    let rows: Vec<(HyperConfig, KcdcScores, Decision)> = sweep
        .par_iter()
        .map(|cfg| {
            let scores = score_pair(&pair.x, &pair.y, cfg)?;
            let decision = decide_direct(&scores, delta);
            Ok((*cfg, scores, decision))
        })
        .collect::<Result<_>>()?;
    let verdict = decide_majority(&rows.iter().map(|r| r.2).collect::<Vec<_>>())?;
    Ok((rows, verdict))
}

fn cmd_arrow_of_time(
    series_file: &std::path::Path,
    lag: usize,
    lambda: f64,
    delta: f64,
    format: Format,
) -> Result<i32> {
    let series = datasets::read_pair_file(series_file)?;
    let (rows, verdict) = arrow_of_time_sweep(&series, lag, validate_lambda(lambda)?, delta)?;
    let rendered: Vec<ConfigScore> = rows
        .iter()
        .map(|(config, scores, decision)| ConfigScore {
            config: *config,
            scores: *scores,
            decision: *decision,
        })
        .collect();
    print!("{}", render_config_scores(&rendered, format));
    let forward = rows.iter().filter(|r| r.2 == Decision::XtoY).count();
    println!(
        "forward-time votes: {}/{}; majority verdict: {}",
        forward,
        rows.len(),
        match verdict {
            Decision::XtoY => "forward",
            Decision::YtoX => "backward",
            Decision::Undecided => "undecided",
        }
    );
    Ok(0)
}

/// The default D3 feature schema: three kernel pairings at the benchmark lambda.
pub fn default_classifier_configs() -> Vec<HyperConfig> {
    vec![
        HyperConfig::default(),
        "rbf:medx1 rq 0.1 standardize".parse().expect("valid config"),
        "log:2 rbf:medx1 0.1 standardize".parse().expect("valid config"),
    ]
}

/// Generate the synthetic training corpus: every (family, variant, noise)
/// cell, `count` datasets each. `salt` separates train from held-out draws.
pub fn training_corpus(count: usize, n: usize, seed: u64, salt: u64) -> Result<Vec<synth::PairDataset>> {
    let mut corpus = Vec::new();
    for family in [Family::Additive, Family::Multiplicative, Family::Complex] {
        for (vi, variant) in ALL_VARIANTS.iter().enumerate() {
            for (ni, noise) in ALL_NOISES.iter().enumerate() {
                let spec = SyntheticSpec {
                    family,
                    variant: *variant,
                    noise: *noise,
                    n,
                    seed: mix(mix(seed, salt), cell_id(family, vi, ni)),
                };
                corpus.extend(synth::generate_batch(&spec, count)?);
            }
        }
    }
    Ok(corpus)
}

fn cmd_train_classifier(
    output: &std::path::Path,
    count: usize,
    n: usize,
    seed: u64,
    l2: f64,
    config: &ConfigFlags,
) -> Result<i32> {
    let configs = match &config.configs {
        Some(path) => read_config_file(path)?,
        None => default_classifier_configs(),
    };
    eprintln!(
        "training on {} cells x {count} datasets of {n} observations; {} configs",
        27,
        configs.len()
    );
    let train_corpus = training_corpus(count, n, seed, 0)?;
    let held_out = training_corpus(count, n, seed, 1)?;

    let model = classifier::train(&train_corpus, &configs, l2)?;

    let correct: usize = held_out
        .par_iter()
        .map(|pair| {
            let prediction = classifier::predict(&model, &pair.x, &pair.y)?;
            Ok(usize::from(Some(prediction) == pair.truth))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    let accuracy = correct as f64 / held_out.len() as f64;

    model.save(output)?;
    println!(
        "model written to {}; held-out accuracy {:.2}% over {} pairs",
        output.display(),
        100.0 * accuracy,
        held_out.len()
    );
    Ok(0)
}
