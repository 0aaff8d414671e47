//! Command-line interface: `segment`, `eval` and `simulate`.

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::{run_theorem_suite, Suite, SuiteConfig, SuiteReport};
use crate::io::{load_scores, load_segmentation, write_json, ProcessScorer};
use crate::labeling::label_document;
use crate::metrics::{evaluate, EvalReport};
use crate::not_engine::{segment_series, segment_with_scorer, NotConfig, DEFAULT_NUM_INTERVALS};
use crate::score_model::{ScoreSeries, WeightScheme};
use crate::scorer::SegmentScorer;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SCORER: i32 = 3;

pub const SEED_ENV: &str = "CPSEG_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "cpseg",
    version,
    about = "Locate human/LLM authorship boundaries in scored documents"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment a score file and label the segments.
    Segment(SegmentArgs),
    /// Compare a predicted segmentation with the truth.
    Eval(EvalArgs),
    /// Run a Monte-Carlo suite on synthetic series.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Vcp,
    Wcp,
    Gcp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightsArg {
    Uniform,
    Invvar,
    Tokpow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteArg {
    Thm1,
    Thm2,
    Equivalence,
    Minimax,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, clap::Args)]
pub struct SegmentArgs {
    /// JSONL score file, one record per sentence.
    #[arg(long)]
    pub scores: PathBuf,
    /// Segment scorer command for gcp, run under `sh -c`.
    #[arg(long = "scorer-cmd")]
    pub scorer_cmd: Option<String>,
    #[arg(long, value_enum, default_value_t = MethodArg::Vcp)]
    pub method: MethodArg,
    /// Defaults to invvar for wcp and tokpow for gcp.
    #[arg(long, value_enum)]
    pub weights: Option<WeightsArg>,
    /// Exponent of the token-count weights.
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Threshold; defaults to sqrt(ln N).
    #[arg(long = "r")]
    pub r: Option<f64>,
    /// Number of random intervals per recursion.
    #[arg(long = "M", default_value_t = DEFAULT_NUM_INTERVALS)]
    pub m: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "k-classes", default_value_t = 2)]
    pub k_classes: usize,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct EvalArgs {
    /// JSON with `change_points` (0-based) and `n`.
    pub truth: PathBuf,
    /// Same format; a segment output file works.
    pub pred: PathBuf,
    #[arg(long = "window-k")]
    pub window_k: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 100)]
    pub seeds: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,
}

#[derive(Debug, Serialize)]
struct SegmentEcho {
    scores: PathBuf,
    scorer_cmd: Option<String>,
    method: MethodArg,
    weights: WeightsArg,
    kappa: f64,
    k_classes: usize,
    n: usize,
    not: NotConfig,
}

#[derive(Debug, Serialize)]
struct SegmentOutput {
    change_points: Vec<usize>,
    n: usize,
    labels: Vec<&'static str>,
    segment_scores: Vec<f64>,
    class_means: Vec<f64>,
    single_class: bool,
    config_echo: SegmentEcho,
}

#[derive(Debug, Serialize)]
struct EvalEcho {
    truth: PathBuf,
    pred: PathBuf,
    window_k: Option<usize>,
}

#[derive(Debug, Serialize)]
struct EvalOutput {
    #[serde(flatten)]
    report: EvalReport,
    config_echo: EvalEcho,
}

#[derive(Debug, Serialize)]
struct SimulateEcho {
    suite: SuiteArg,
    seeds: usize,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct SimulateOutput {
    config_echo: SimulateEcho,
    report: SuiteReport,
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn default_weights(method: MethodArg) -> WeightsArg {
    match method {
        MethodArg::Vcp => WeightsArg::Uniform,
        MethodArg::Wcp => WeightsArg::Invvar,
        MethodArg::Gcp => WeightsArg::Tokpow,
    }
}

fn scheme(weights: WeightsArg, kappa: f64) -> Result<WeightScheme> {
    match weights {
        WeightsArg::Uniform => Ok(WeightScheme::Uniform),
        WeightsArg::Invvar => Ok(WeightScheme::InverseVariance),
        WeightsArg::Tokpow => WeightScheme::token_power(kappa),
    }
}

pub fn segment(args: &SegmentArgs) -> Result<()> {
    let series: ScoreSeries<f64> = load_scores(&args.scores)?;
    let weights = args.weights.unwrap_or(default_weights(args.method));
    let scheme = scheme(weights, args.kappa)?;
    let mut cfg = match args.method {
        MethodArg::Vcp => NotConfig::vcp(),
        MethodArg::Wcp => NotConfig::wcp(scheme),
        MethodArg::Gcp => NotConfig::gcp(scheme),
    }
    .with_intervals(args.m)
    .with_seed(args.seed)
    .without_audit();
    cfg.threshold = Some(
        args.r
            .unwrap_or_else(|| cfg.resolved_threshold(series.len())),
    );
    if args.k_classes == 0 {
        return Err(Error::InvalidConfig(
            "--k-classes must be at least 1".into(),
        ));
    }

    let label_scheme = match args.method {
        MethodArg::Vcp => WeightScheme::Uniform,
        _ => scheme,
    };
    let (segmentation, labeled) = match args.method {
        MethodArg::Gcp => {
            let cmd = args
                .scorer_cmd
                .as_deref()
                .ok_or_else(|| Error::InvalidConfig("--method gcp needs --scorer-cmd".into()))?;
            let mut scorer = ProcessScorer::spawn(cmd, series.len())?;
            let run = segment_with_scorer(&series, &mut scorer, &cfg)?;
            let dyn_scorer: &mut dyn SegmentScorer<f64> = &mut scorer;
            let labeled = label_document(
                &series,
                &run.segmentation,
                args.k_classes,
                label_scheme,
                Some(dyn_scorer),
            )?;
            (run.segmentation, labeled)
        }
        _ => {
            let run = segment_series(&series, &cfg)?;
            let labeled = label_document(
                &series,
                &run.segmentation,
                args.k_classes,
                label_scheme,
                None,
            )?;
            (run.segmentation, labeled)
        }
    };

    let output = SegmentOutput {
        change_points: segmentation.change_points().to_vec(),
        n: segmentation.len(),
        labels: labeled.label_names(),
        segment_scores: labeled.segment_scores.clone(),
        class_means: labeled.class_means.clone(),
        single_class: labeled.single_class,
        config_echo: SegmentEcho {
            scores: args.scores.clone(),
            scorer_cmd: args.scorer_cmd.clone(),
            method: args.method,
            weights,
            kappa: args.kappa,
            k_classes: args.k_classes,
            n: series.len(),
            not: cfg,
        },
    };
    write_json(&output, sink(&args.out)?)
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let truth = load_segmentation(&args.truth)?;
    let pred = load_segmentation(&args.pred)?;
    let report = evaluate(&truth, &pred, args.window_k)?;
    let output = EvalOutput {
        report,
        config_echo: EvalEcho {
            truth: args.truth.clone(),
            pred: args.pred.clone(),
            window_k: args.window_k,
        },
    };
    write_json(&output, sink(&args.out)?)
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    if args.seeds == 0 {
        return Err(Error::InvalidConfig("--seeds must be positive".into()));
    }
    let suite = match args.suite {
        SuiteArg::Thm1 => Suite::Thm1,
        SuiteArg::Thm2 => Suite::Thm2,
        SuiteArg::Equivalence => Suite::Equivalence,
        SuiteArg::Minimax => Suite::Minimax,
    };
    let report = run_theorem_suite(suite, SuiteConfig::new(args.seeds, args.seed))?;
    let echo = SimulateEcho {
        suite: args.suite,
        seeds: args.seeds,
        seed: args.seed,
    };
    match args.format {
        FormatArg::Json => write_json(
            &SimulateOutput {
                config_echo: echo,
                report,
            },
            sink(&args.out)?,
        ),
        FormatArg::Csv => {
            let mut w = csv::Writer::from_writer(sink(&args.out)?);
            let to_io = |e: csv::Error| Error::Io(e.into());
            w.write_record(["section", "metric", "value"])
                .map_err(to_io)?;
            let meta = [
                ("suite", format!("{:?}", args.suite).to_lowercase()),
                ("seeds", args.seeds.to_string()),
                ("seed", args.seed.to_string()),
            ];
            for (k, v) in meta {
                w.write_record(["config_echo", k, &v]).map_err(to_io)?;
            }
            for (section, metric, value) in report.rows() {
                w.write_record([
                    section,
                    metric,
                    serde_json::to_string(&value).map_err(std::io::Error::from)?,
                ])
                .map_err(to_io)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ScorerFailure(_) => EXIT_SCORER,
        _ => EXIT_INPUT,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Segment(a) => segment(a),
        Command::Eval(a) => eval(a),
        Command::Simulate(a) => simulate(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
