//! Monte-Carlo suites measuring the localization behaviour of the segmenters
//! on synthetic piecewise-Gaussian series.
//!
//! Seeds fan out over a thread pool; outcomes are collected in seed order so a
//! report is byte-identical for a fixed base seed.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::cusum::{Contrast, ContrastKind, GeneralizedCusum, WeightedCusum};
use crate::error::{Error, Result};
use crate::metrics::weighted_localization_error;
use crate::not_engine::{
    contrast_weights, default_threshold, not_segment, segment_series, NotConfig,
    DEFAULT_NUM_INTERVALS,
};
use crate::score_model::{resolve_weights, ScoreSeries, SentenceRecord, WeightScheme};
use crate::scorer::AdditiveScorer;
use crate::synthgen::{generate, snr_diagnostics, SnrDiagnostics, SyntheticSpec};

/// Segmenter evaluated by the harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Vcp,
    /// WCP with inverse-variance weights.
    Wcp,
}

/// How the threshold `r` is chosen for a synthetic instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ThresholdRule {
    /// `sqrt(ln N)`.
    Default,
    Fixed {
        r: f64,
    },
    /// `multiplier * noise_scale * sqrt(ln N)`, where the noise scale is the
    /// standard deviation of the statistic under pure noise: `sigma_max` for
    /// VCP and `mean(1/sigma^2)^{-1/2}` for WCP with normalized weights.
    NoiseScaled {
        multiplier: f64,
    },
}

impl ThresholdRule {
    pub fn resolve(&self, spec: &SyntheticSpec, method: Method) -> f64 {
        let base = default_threshold(spec.n);
        match *self {
            ThresholdRule::Default => base,
            ThresholdRule::Fixed { r } => r,
            ThresholdRule::NoiseScaled { multiplier } => {
                let scale = match method {
                    Method::Vcp => spec.sigma.iter().copied().fold(0.0, f64::max),
                    Method::Wcp => {
                        let inv = spec.inverse_variances();
                        (inv.iter().sum::<f64>() / inv.len() as f64).recip().sqrt()
                    }
                };
                multiplier * scale * base
            }
        }
    }
}

/// Result of one method on one seed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub k_hat: usize,
    pub change_points: Vec<usize>,
    /// `max_j |est_j - tau_j|` (Hausdorff distance when counts differ).
    pub abs_error: f64,
    /// Same with `1/sigma_i^2` weights.
    pub weighted_error: f64,
}

/// Aggregate of a method over all seeds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub threshold: f64,
    pub seeds: usize,
    pub k_accuracy: f64,
    pub mean_abs_error: f64,
    pub median_abs_error: f64,
    pub q90_abs_error: f64,
    pub mean_weighted_error: f64,
    pub median_weighted_error: f64,
}

/// `inf { x : #{v <= x} >= p * n }`.
pub fn empirical_quantile(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let rank = ((p * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Least-squares slope of `y` on `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// One-sided sign test of `H0: P(d > 0) = 1/2` against `P(d > 0) > 1/2`,
/// zero differences dropped. Returns `(positives, negatives, p_value)`.
pub fn sign_test(diffs: &[f64]) -> (usize, usize, f64) {
    let pos = diffs.iter().filter(|&&d| d > 0.0).count();
    let neg = diffs.iter().filter(|&&d| d < 0.0).count();
    let n = (pos + neg) as u64;
    if n == 0 {
        return (pos, neg, 1.0);
    }
    let dist = Binomial::new(0.5, n).expect("valid binomial");
    let p = if pos == 0 {
        1.0
    } else {
        dist.sf(pos as u64 - 1)
    };
    (pos, neg, p)
}

/// Seed of the segmenter's interval stream for a given data seed.
fn not_seed(data_seed: u64) -> u64 {
    data_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0x5EED
}

/// Runs `method` on `spec` for every seed in `seeds`.
pub fn run_method(
    spec: &SyntheticSpec,
    method: Method,
    rule: ThresholdRule,
    num_intervals: usize,
    seeds: &[u64],
) -> Result<Vec<SeedOutcome>> {
    let threshold = rule.resolve(spec, method);
    let truth = spec.truth();
    let inv = spec.inverse_variances();
    let ones = vec![1.0; spec.n];
    seeds
        .par_iter()
        .map(|&seed| {
            let series: ScoreSeries<f64> = generate(&spec.with_seed(seed))?;
            let cfg = match method {
                Method::Vcp => NotConfig::vcp(),
                Method::Wcp => NotConfig::wcp(WeightScheme::InverseVariance),
            }
            .with_threshold(threshold)
            .with_intervals(num_intervals)
            .with_seed(not_seed(seed))
            .without_audit();
            let run = segment_series(&series, &cfg)?;
            let pred = run.segmentation;
            Ok(SeedOutcome {
                seed,
                k_hat: pred.num_change_points(),
                change_points: pred.change_points().to_vec(),
                abs_error: weighted_localization_error(&truth, &pred, &ones)?.value(),
                weighted_error: weighted_localization_error(&truth, &pred, &inv)?.value(),
            })
        })
        .collect()
}

pub fn summarize(
    method: Method,
    threshold: f64,
    k_true: usize,
    outcomes: &[SeedOutcome],
) -> MethodSummary {
    let abs: Vec<f64> = outcomes.iter().map(|o| o.abs_error).collect();
    let wtd: Vec<f64> = outcomes.iter().map(|o| o.weighted_error).collect();
    MethodSummary {
        method,
        threshold,
        seeds: outcomes.len(),
        k_accuracy: outcomes.iter().filter(|o| o.k_hat == k_true).count() as f64
            / outcomes.len() as f64,
        mean_abs_error: mean(&abs),
        median_abs_error: median(&abs),
        q90_abs_error: empirical_quantile(&abs, 0.9),
        mean_weighted_error: mean(&wtd),
        median_weighted_error: median(&wtd),
    }
}

/// Number of seeds and the first seed of a suite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub seeds: usize,
    pub base_seed: u64,
}

impl SuiteConfig {
    pub fn new(seeds: usize, base_seed: u64) -> Self {
        Self { seeds, base_seed }
    }

    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64)
            .map(|i| self.base_seed.wrapping_add(i))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Homoscedastic suite

#[derive(Clone, Debug, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub log_n: f64,
    pub mean_abs_error: f64,
    pub k_accuracy: f64,
    /// Mean error over the seeds with the right number of change points.
    pub mean_abs_error_given_k: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomoscedasticReport {
    pub spec: SyntheticSpec,
    pub snr: SnrDiagnostics,
    pub vcp: MethodSummary,
    pub wcp: MethodSummary,
    /// `3 sigma^2 ln N / kappa^2`
    pub error_bound: f64,
    /// Fraction of seeds where VCP and WCP return the same change points.
    pub identical_fraction: f64,
    /// VCP over a grid of N at lower signal-to-noise.
    pub scaling: Vec<ScalingRow>,
    /// Slope of the mean error given the right count against `ln N`.
    pub log_n_slope: f64,
}

pub const HOMOSCEDASTIC_N: usize = 200;
pub const HOMOSCEDASTIC_SIGMA: f64 = 0.3;
const SCALING_GRID: [usize; 4] = [100, 200, 400, 800];
const SCALING_SIGMA: f64 = 0.6;

pub fn homoscedastic_spec() -> SyntheticSpec {
    SyntheticSpec::homoscedastic(
        HOMOSCEDASTIC_N,
        vec![HOMOSCEDASTIC_N / 2 - 1],
        0.0,
        1.0,
        HOMOSCEDASTIC_SIGMA,
        0,
    )
    .expect("valid spec")
}

pub fn run_homoscedastic(cfg: SuiteConfig) -> Result<HomoscedasticReport> {
    let spec = homoscedastic_spec();
    let seeds = cfg.seed_list();
    let rule = ThresholdRule::Default;
    let v = run_method(&spec, Method::Vcp, rule, DEFAULT_NUM_INTERVALS, &seeds)?;
    let w = run_method(&spec, Method::Wcp, rule, DEFAULT_NUM_INTERVALS, &seeds)?;
    let identical = v
        .iter()
        .zip(&w)
        .filter(|(a, b)| a.change_points == b.change_points)
        .count() as f64
        / seeds.len() as f64;

    let mut scaling = Vec::new();
    for &n in &SCALING_GRID {
        let s = SyntheticSpec::homoscedastic(n, vec![n / 2 - 1], 0.0, 1.0, SCALING_SIGMA, 0)?;
        let out = run_method(&s, Method::Vcp, rule, DEFAULT_NUM_INTERVALS, &seeds)?;
        let sum = summarize(Method::Vcp, rule.resolve(&s, Method::Vcp), 1, &out);
        let hits: Vec<f64> = out
            .iter()
            .filter(|o| o.k_hat == 1)
            .map(|o| o.abs_error)
            .collect();
        scaling.push(ScalingRow {
            n,
            log_n: (n as f64).ln(),
            mean_abs_error: sum.mean_abs_error,
            k_accuracy: sum.k_accuracy,
            mean_abs_error_given_k: if hits.is_empty() {
                f64::NAN
            } else {
                mean(&hits)
            },
        });
    }
    let log_n_slope = ls_slope(
        &scaling.iter().map(|r| r.log_n).collect::<Vec<_>>(),
        &scaling
            .iter()
            .map(|r| r.mean_abs_error_given_k)
            .collect::<Vec<_>>(),
    );

    let n = spec.n as f64;
    Ok(HomoscedasticReport {
        snr: snr_diagnostics(&spec, 0.1)?,
        vcp: summarize(Method::Vcp, rule.resolve(&spec, Method::Vcp), 1, &v),
        wcp: summarize(Method::Wcp, rule.resolve(&spec, Method::Wcp), 1, &w),
        error_bound: 3.0 * HOMOSCEDASTIC_SIGMA.powi(2) * n.ln() / spec.kappa().powi(2),
        identical_fraction: identical,
        scaling,
        log_n_slope,
        spec,
    })
}

// ---------------------------------------------------------------------------
// Heteroscedastic suite: dominance of WCP and rate in kappa

#[derive(Clone, Debug, Serialize)]
pub struct DominanceReport {
    pub spec: SyntheticSpec,
    pub snr: SnrDiagnostics,
    pub vcp: MethodSummary,
    pub wcp: MethodSummary,
    /// Seeds where WCP's absolute error is strictly smaller / larger.
    pub wcp_better: usize,
    pub wcp_worse: usize,
    pub sign_test_p: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateRow {
    pub kappa: f64,
    pub median_weighted_error: f64,
    pub k_accuracy: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateReport {
    pub n: usize,
    pub sigma_pattern: Vec<f64>,
    pub threshold_rule: ThresholdRule,
    pub rows: Vec<RateRow>,
    pub monotone_decreasing: bool,
    /// Slope of `ln(median weighted error)` on `ln(kappa)`.
    pub log_log_slope: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeteroscedasticReport {
    pub dominance: DominanceReport,
    pub rate: RateReport,
}

pub const DOMINANCE_N: usize = 200;
pub const DOMINANCE_SIGMAS: [f64; 2] = [0.1, 1.0];

pub fn dominance_spec() -> SyntheticSpec {
    SyntheticSpec::periodic(
        DOMINANCE_N,
        vec![DOMINANCE_N / 2 - 1],
        0.0,
        1.0,
        &DOMINANCE_SIGMAS,
        0,
    )
    .expect("valid spec")
}

pub fn run_dominance(cfg: SuiteConfig) -> Result<DominanceReport> {
    let spec = dominance_spec();
    let seeds = cfg.seed_list();
    let rule = ThresholdRule::Default;
    let v = run_method(&spec, Method::Vcp, rule, DEFAULT_NUM_INTERVALS, &seeds)?;
    let w = run_method(&spec, Method::Wcp, rule, DEFAULT_NUM_INTERVALS, &seeds)?;
    let diffs: Vec<f64> = v
        .iter()
        .zip(&w)
        .map(|(a, b)| a.abs_error - b.abs_error)
        .collect();
    let (better, worse, p) = sign_test(&diffs);
    Ok(DominanceReport {
        snr: snr_diagnostics(&spec, 0.1)?,
        vcp: summarize(Method::Vcp, rule.resolve(&spec, Method::Vcp), 1, &v),
        wcp: summarize(Method::Wcp, rule.resolve(&spec, Method::Wcp), 1, &w),
        wcp_better: better,
        wcp_worse: worse,
        sign_test_p: p,
        spec,
    })
}

pub const RATE_N: usize = 16000;
pub const RATE_SIGMAS: [f64; 2] = [4.0, 8.0];
pub const RATE_KAPPAS: [f64; 3] = [0.5, 1.0, 2.0];
pub const RATE_THRESHOLD: ThresholdRule = ThresholdRule::NoiseScaled { multiplier: 1.6 };

pub fn run_rate(cfg: SuiteConfig) -> Result<RateReport> {
    let seeds = cfg.seed_list();
    let mut rows = Vec::new();
    for &kappa in &RATE_KAPPAS {
        let spec =
            SyntheticSpec::periodic(RATE_N, vec![RATE_N / 2 - 1], 0.0, kappa, &RATE_SIGMAS, 0)?;
        let out = run_method(
            &spec,
            Method::Wcp,
            RATE_THRESHOLD,
            DEFAULT_NUM_INTERVALS,
            &seeds,
        )?;
        let threshold = RATE_THRESHOLD.resolve(&spec, Method::Wcp);
        let s = summarize(Method::Wcp, threshold, 1, &out);
        rows.push(RateRow {
            kappa,
            median_weighted_error: s.median_weighted_error,
            k_accuracy: s.k_accuracy,
            threshold,
        });
    }
    let monotone = rows
        .windows(2)
        .all(|w| w[1].median_weighted_error < w[0].median_weighted_error);
    let slope = ls_slope(
        &rows.iter().map(|r| r.kappa.ln()).collect::<Vec<_>>(),
        &rows
            .iter()
            .map(|r| r.median_weighted_error.ln())
            .collect::<Vec<_>>(),
    );
    Ok(RateReport {
        n: RATE_N,
        sigma_pattern: RATE_SIGMAS.to_vec(),
        threshold_rule: RATE_THRESHOLD,
        rows,
        monotone_decreasing: monotone,
        log_log_slope: slope,
    })
}

pub fn run_heteroscedastic(cfg: SuiteConfig) -> Result<HeteroscedasticReport> {
    Ok(HeteroscedasticReport {
        dominance: run_dominance(cfg)?,
        rate: run_rate(cfg)?,
    })
}

// ---------------------------------------------------------------------------
// Minimax floor

#[derive(Clone, Debug, Serialize)]
pub struct MinimaxReport {
    pub spec: SyntheticSpec,
    pub delta: f64,
    /// Largest `h` with `sum_{i=tau+1}^{tau+h} kappa^2/sigma_i^2 <= ln(1/delta)`.
    pub h1: usize,
    /// Largest `h` with `sum_{i=tau-h}^{tau} kappa^2/sigma_i^2 <= ln(1/delta)`.
    pub h2: usize,
    pub floor: f64,
    pub wcp: MethodSummary,
    /// Empirical `(1 - delta)` quantile of `|est - tau|` for WCP.
    pub empirical_q: f64,
    pub ratio: f64,
}

pub const MINIMAX_N: usize = 600;
pub const MINIMAX_KAPPA: f64 = 0.4;
pub const MINIMAX_SIGMAS: [f64; 2] = [0.4, 0.8];
pub const MINIMAX_DELTA: f64 = 0.1;

pub fn minimax_spec() -> SyntheticSpec {
    SyntheticSpec::periodic(
        MINIMAX_N,
        vec![MINIMAX_N / 2 - 1],
        0.0,
        MINIMAX_KAPPA,
        &MINIMAX_SIGMAS,
        0,
    )
    .expect("valid spec")
}

/// Partial-sum solutions `(h1, h2)` of the lower-bound equations for a
/// single change point, with the absolute constant taken as one.
pub fn lower_bound_offsets(spec: &SyntheticSpec, delta: f64) -> Result<(usize, usize)> {
    if spec.change_points.len() != 1 {
        return Err(Error::InvalidConfig(
            "lower bound needs exactly one change point".into(),
        ));
    }
    let t = spec.change_points[0];
    let budget = (1.0 / delta).ln();
    let k2 = spec.kappa().powi(2);
    let inv = spec.inverse_variances();
    // 1-based tau = t + 1, so units tau+1.. are 0-based t+1..
    let mut h1 = 0;
    let mut acc = 0.0;
    for &w in &inv[t + 1..] {
        acc += k2 * w;
        if acc > budget {
            break;
        }
        h1 += 1;
    }
    // units tau-h..=tau are 0-based t-h..=t
    let mut h2 = 0;
    let mut acc = 0.0;
    for (h, i) in (0..=t).rev().enumerate() {
        acc += k2 * inv[i];
        if acc > budget {
            break;
        }
        h2 = h;
    }
    Ok((h1, h2))
}

pub fn run_minimax(cfg: SuiteConfig) -> Result<MinimaxReport> {
    let spec = minimax_spec();
    let seeds = cfg.seed_list();
    let rule = ThresholdRule::Default;
    let w = run_method(&spec, Method::Wcp, rule, DEFAULT_NUM_INTERVALS, &seeds)?;
    let (h1, h2) = lower_bound_offsets(&spec, MINIMAX_DELTA)?;
    let floor = h1.max(h2) as f64;
    let abs: Vec<f64> = w.iter().map(|o| o.abs_error).collect();
    let q = empirical_quantile(&abs, 1.0 - MINIMAX_DELTA);
    Ok(MinimaxReport {
        wcp: summarize(Method::Wcp, rule.resolve(&spec, Method::Wcp), 1, &w),
        delta: MINIMAX_DELTA,
        h1,
        h2,
        floor,
        empirical_q: q,
        ratio: q / floor,
        spec,
    })
}

// ---------------------------------------------------------------------------
// Equivalence of the generalized and weighted contrasts

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub series: usize,
    pub triplets: usize,
    pub max_abs_diff: f64,
    pub runs: usize,
    pub identical_runs: usize,
}

pub const EQUIVALENCE_MAX_N: usize = 100;

/// Random series with token counts; the additive scorer with token-count
/// weights plays the segment statistic.
fn equivalence_series(seed: u64) -> Result<ScoreSeries<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=EQUIVALENCE_MAX_N);
    let jump = rng.random_range(0..n - 1);
    let records = (0..n)
        .map(|i| {
            let base = if i > jump { 1.5 } else { 0.0 };
            let y = base + rng.random_range(-1.0..1.0);
            SentenceRecord::new(i, y).with_tokens(rng.random_range(1..=60))
        })
        .collect();
    ScoreSeries::new(records)
}

pub fn run_equivalence(cfg: SuiteConfig) -> Result<EquivalenceReport> {
    let scheme = WeightScheme::TokenPower { kappa: 1.0 };
    let results: Vec<(usize, f64, bool)> = cfg
        .seed_list()
        .par_iter()
        .map(|&seed| {
            let series = equivalence_series(seed)?;
            let y = series.scores();
            let raw = resolve_weights(&series, scheme)?;
            let gcfg = NotConfig::gcp(scheme)
                .with_seed(not_seed(seed))
                .with_threshold(0.5)
                .without_audit();
            let wcfg = NotConfig {
                contrast: ContrastKind::Weighted,
                ..gcfg.clone()
            };
            let w = contrast_weights(&series, &wcfg)?;
            let mut wc = WeightedCusum::new(&y, &w)?;
            let mut gc = GeneralizedCusum::new(&w, AdditiveScorer::new(&y, &raw)?)?;
            let n = y.len();
            let mut count = 0;
            let mut worst: f64 = 0.0;
            for s in 0..n - 1 {
                for e in s + 1..n {
                    for b in s..e {
                        let d = (wc.value(s, e, b)? - gc.value(s, e, b)?).abs();
                        worst = worst.max(d);
                        count += 1;
                    }
                }
            }
            let wrun = not_segment(&mut wc, &wcfg)?;
            let grun = not_segment(&mut gc, &gcfg)?;
            Ok((count, worst, wrun.segmentation == grun.segmentation))
        })
        .collect::<Result<_>>()?;
    Ok(EquivalenceReport {
        series: results.len(),
        triplets: results.iter().map(|r| r.0).sum(),
        max_abs_diff: results.iter().map(|r| r.1).fold(0.0, f64::max),
        runs: results.len(),
        identical_runs: results.iter().filter(|r| r.2).count(),
    })
}

// ---------------------------------------------------------------------------

/// Suites exposed through the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Thm1,
    Thm2,
    Equivalence,
    Minimax,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "suite", rename_all = "snake_case")]
pub enum SuiteReport {
    Thm1(HomoscedasticReport),
    Thm2(HeteroscedasticReport),
    Equivalence(EquivalenceReport),
    Minimax(MinimaxReport),
}

pub fn run_theorem_suite(suite: Suite, cfg: SuiteConfig) -> Result<SuiteReport> {
    Ok(match suite {
        Suite::Thm1 => SuiteReport::Thm1(run_homoscedastic(cfg)?),
        Suite::Thm2 => SuiteReport::Thm2(run_heteroscedastic(cfg)?),
        Suite::Equivalence => SuiteReport::Equivalence(run_equivalence(cfg)?),
        Suite::Minimax => SuiteReport::Minimax(run_minimax(cfg)?),
    })
}

fn summary_rows(section: &str, s: &MethodSummary, rows: &mut Vec<(String, String, f64)>) {
    let m = match s.method {
        Method::Vcp => "vcp",
        Method::Wcp => "wcp",
    };
    let key = format!("{section}.{m}");
    for (name, v) in [
        ("threshold", s.threshold),
        ("k_accuracy", s.k_accuracy),
        ("mean_abs_error", s.mean_abs_error),
        ("median_abs_error", s.median_abs_error),
        ("q90_abs_error", s.q90_abs_error),
        ("mean_weighted_error", s.mean_weighted_error),
        ("median_weighted_error", s.median_weighted_error),
    ] {
        rows.push((key.clone(), name.to_string(), v));
    }
}

impl SuiteReport {
    /// Flat `(section, metric, value)` rows for CSV output.
    pub fn rows(&self) -> Vec<(String, String, f64)> {
        let mut rows = Vec::new();
        let mut push =
            |sec: &str, name: &str, v: f64| rows.push((sec.to_string(), name.to_string(), v));
        match self {
            SuiteReport::Thm1(r) => {
                push("thm1", "error_bound", r.error_bound);
                push("thm1", "identical_fraction", r.identical_fraction);
                push("thm1", "log_n_slope", r.log_n_slope);
                for row in &r.scaling {
                    let sec = format!("thm1.scaling.n{}", row.n);
                    push(&sec, "mean_abs_error", row.mean_abs_error);
                    push(&sec, "mean_abs_error_given_k", row.mean_abs_error_given_k);
                    push(&sec, "k_accuracy", row.k_accuracy);
                }
                summary_rows("thm1", &r.vcp, &mut rows);
                summary_rows("thm1", &r.wcp, &mut rows);
            }
            SuiteReport::Thm2(r) => {
                push("thm2.dominance", "sign_test_p", r.dominance.sign_test_p);
                push(
                    "thm2.dominance",
                    "wcp_better",
                    r.dominance.wcp_better as f64,
                );
                push("thm2.dominance", "wcp_worse", r.dominance.wcp_worse as f64);
                push("thm2.rate", "log_log_slope", r.rate.log_log_slope);
                for row in &r.rate.rows {
                    push(
                        &format!("thm2.rate.kappa{}", row.kappa),
                        "median_weighted_error",
                        row.median_weighted_error,
                    );
                }
                summary_rows("thm2.dominance", &r.dominance.vcp, &mut rows);
                summary_rows("thm2.dominance", &r.dominance.wcp, &mut rows);
            }
            SuiteReport::Equivalence(r) => {
                push("equivalence", "triplets", r.triplets as f64);
                push("equivalence", "max_abs_diff", r.max_abs_diff);
                push("equivalence", "identical_runs", r.identical_runs as f64);
                push("equivalence", "runs", r.runs as f64);
            }
            SuiteReport::Minimax(r) => {
                push("minimax", "floor", r.floor);
                push("minimax", "empirical_q", r.empirical_q);
                push("minimax", "ratio", r.ratio);
                summary_rows("minimax", &r.wcp, &mut rows);
            }
        }
        rows
    }
}
