//! Narrowest-over-threshold (NOT) segmentation with a pluggable contrast and
//! width statistic.
//!
//! Each recursive call on `[s, e]` draws `M` random sub-intervals, keeps the
//! ones whose maximal contrast strictly exceeds the threshold `r`, takes the
//! survivor with the smallest width (earliest drawn on ties), records the
//! argmax `b*` of that survivor as a change point and recurses on `[s, b*]`
//! and `[b* + 1, e]`.
//!
//! The random stream of a call is derived from `(seed, s, e)` alone. Ranges
//! in the recursion tree are unique, so the result does not depend on the
//! order in which calls are evaluated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cusum::{
    max_contrast, Contrast, ContrastKind, GeneralizedCusum, IntervalStat, StandardCusum,
    WeightedCusum, WidthKind,
};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::score_model::{resolve_weights, ScoreSeries, Segmentation, WeightScheme};
use crate::scorer::SegmentScorer;

pub const DEFAULT_NUM_INTERVALS: usize = 200;
pub const DEFAULT_MIN_INTERVAL_LEN: usize = 2;

/// `sqrt(ln N)`, the default threshold.
pub fn default_threshold(n: usize) -> f64 {
    (n as f64).ln().sqrt()
}

/// Configuration of one NOT run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NotConfig {
    /// Threshold `r`; `None` resolves to `sqrt(ln N)`.
    pub threshold: Option<f64>,
    pub num_intervals: usize,
    pub contrast: ContrastKind,
    pub weight_scheme: WeightScheme,
    pub width: WidthKind,
    pub seed: u64,
    /// Ranges with fewer points than this are not split further.
    pub min_interval_len: usize,
    /// Rescale weights to mean one before computing contrasts, so the
    /// threshold is on the scale of the raw scores whatever the weight units.
    pub normalize_weights: bool,
    pub record_audit: bool,
}

impl NotConfig {
    /// Standard CUSUM, width `e - s`.
    pub fn vcp() -> Self {
        Self {
            threshold: None,
            num_intervals: DEFAULT_NUM_INTERVALS,
            contrast: ContrastKind::Standard,
            weight_scheme: WeightScheme::Uniform,
            width: WidthKind::IndexWidth,
            seed: 0,
            min_interval_len: DEFAULT_MIN_INTERVAL_LEN,
            normalize_weights: true,
            record_audit: true,
        }
    }

    /// Weighted CUSUM, width `S^w_{s:e}`.
    pub fn wcp(scheme: WeightScheme) -> Self {
        Self {
            contrast: ContrastKind::Weighted,
            weight_scheme: scheme,
            width: WidthKind::CumulativeWeight,
            ..Self::vcp()
        }
    }

    /// Generalized CUSUM, width `S^w_{s:e}`.
    pub fn gcp(scheme: WeightScheme) -> Self {
        Self {
            contrast: ContrastKind::Generalized,
            ..Self::wcp(scheme)
        }
    }

    pub fn with_threshold(mut self, r: f64) -> Self {
        self.threshold = Some(r);
        self
    }

    pub fn with_intervals(mut self, m: usize) -> Self {
        self.num_intervals = m;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_width(mut self, width: WidthKind) -> Self {
        self.width = width;
        self
    }

    pub fn without_audit(mut self) -> Self {
        self.record_audit = false;
        self
    }

    /// Threshold actually used for a series of length `n`.
    pub fn resolved_threshold(&self, n: usize) -> f64 {
        self.threshold.unwrap_or_else(|| default_threshold(n))
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.threshold {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "threshold must be positive, got {r}"
                )));
            }
        }
        if self.num_intervals == 0 {
            return Err(Error::InvalidConfig(
                "number of intervals must be at least 1".into(),
            ));
        }
        if self.min_interval_len < 2 {
            return Err(Error::InvalidConfig(
                "min_interval_len must be at least 2 points".into(),
            ));
        }
        if let WeightScheme::TokenPower { kappa } = self.weight_scheme {
            WeightScheme::token_power(kappa)?;
        }
        Ok(())
    }
}

/// One interval examined during a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditEntry<T> {
    /// The range `[s, e]` of the recursive call that drew the interval.
    pub call_range: (usize, usize),
    pub stat: IntervalStat<T>,
    pub over_threshold: bool,
    pub selected: bool,
}

/// Output of a NOT run.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmenterRun<T> {
    pub segmentation: Segmentation,
    pub threshold: f64,
    pub audit: Vec<AuditEntry<T>>,
}

impl<T> SegmenterRun<T> {
    pub fn change_points(&self) -> &[usize] {
        self.segmentation.change_points()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random stream for the recursive call on `[s, e]`.
pub fn interval_rng(seed: u64, s: usize, e: usize) -> ChaCha8Rng {
    let h = splitmix64(splitmix64(splitmix64(seed) ^ s as u64) ^ e as u64);
    ChaCha8Rng::seed_from_u64(h)
}

/// Draws `m` intervals `(s_m, e_m)` with `s <= s_m < e_m <= e`, independently
/// and uniformly over all valid pairs.
pub fn draw_intervals<R: Rng + ?Sized>(
    s: usize,
    e: usize,
    m: usize,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    if e <= s {
        return Err(Error::DegenerateRange { s, e });
    }
    let mut out = Vec::with_capacity(m);
    while out.len() < m {
        let a = rng.random_range(s..=e);
        let b = rng.random_range(s..=e);
        if a != b {
            out.push((a.min(b), a.max(b)));
        }
    }
    Ok(out)
}

/// Runs NOT over `contrast` with the given configuration.
pub fn not_segment<T: Real, C: Contrast<T> + ?Sized>(
    contrast: &mut C,
    config: &NotConfig,
) -> Result<SegmenterRun<T>> {
    config.validate()?;
    let n = contrast.len();
    if n < 2 {
        return Err(Error::InvalidSeries(format!(
            "need at least 2 points, got {n}"
        )));
    }
    let threshold = config.resolved_threshold(n);
    let r = T::lit(threshold);

    let mut change_points = Vec::new();
    let mut audit = Vec::new();
    let mut stack = vec![(0usize, n - 1)];

    while let Some((s, e)) = stack.pop() {
        if e - s + 1 < config.min_interval_len {
            continue;
        }
        let mut rng = interval_rng(config.seed, s, e);
        let intervals = draw_intervals(s, e, config.num_intervals, &mut rng)?;

        let mut best: Option<(usize, IntervalStat<T>)> = None;
        let first_audit = audit.len();
        for (idx, &(sm, em)) in intervals.iter().enumerate() {
            let stat = max_contrast(contrast, sm, em, config.width)?;
            let over = stat.max_value > r;
            if over && best.as_ref().is_none_or(|(_, b)| stat.width < b.width) {
                best = Some((idx, stat));
            }
            if config.record_audit {
                audit.push(AuditEntry {
                    call_range: (s, e),
                    stat,
                    over_threshold: over,
                    selected: false,
                });
            }
        }

        if let Some((idx, stat)) = best {
            if config.record_audit {
                audit[first_audit + idx].selected = true;
            }
            let b = stat.argmax;
            change_points.push(b);
            // right pushed first so the left child is processed first
            stack.push((b + 1, e));
            stack.push((s, b));
        }
    }

    change_points.sort_unstable();
    Ok(SegmenterRun {
        segmentation: Segmentation::new(change_points, n)?,
        threshold,
        audit,
    })
}

/// Rescales weights to mean one.
pub fn normalize_weights<T: Real>(weights: &mut [T]) {
    if weights.is_empty() {
        return;
    }
    let mean = weights.iter().copied().sum::<T>() / T::count(weights.len());
    for w in weights.iter_mut() {
        *w = *w / mean;
    }
}

/// Weights used by the contrast under `config`.
pub fn contrast_weights<T: Real>(series: &ScoreSeries<T>, config: &NotConfig) -> Result<Vec<T>> {
    let mut w = match config.contrast {
        ContrastKind::Standard => vec![T::one(); series.len()],
        _ => resolve_weights(series, config.weight_scheme)?,
    };
    if config.normalize_weights {
        normalize_weights(&mut w);
    }
    Ok(w)
}

/// Segments a score series with the standard or weighted contrast.
pub fn segment_series<T: Real>(
    series: &ScoreSeries<T>,
    config: &NotConfig,
) -> Result<SegmenterRun<T>> {
    let scores = series.scores();
    match config.contrast {
        ContrastKind::Standard => not_segment(&mut StandardCusum::new(&scores)?, config),
        ContrastKind::Weighted => {
            let w = contrast_weights(series, config)?;
            not_segment(&mut WeightedCusum::new(&scores, &w)?, config)
        }
        ContrastKind::Generalized => Err(Error::InvalidConfig(
            "the generalized contrast needs a segment scorer".into(),
        )),
    }
}

/// Segments with the generalized contrast; `series` supplies the weights.
pub fn segment_with_scorer<T: Real, S: SegmentScorer<T>>(
    series: &ScoreSeries<T>,
    scorer: S,
    config: &NotConfig,
) -> Result<SegmenterRun<T>> {
    if config.contrast != ContrastKind::Generalized {
        return Err(Error::InvalidConfig(
            "segment_with_scorer requires the generalized contrast".into(),
        ));
    }
    let w = contrast_weights(series, config)?;
    not_segment(&mut GeneralizedCusum::new(&w, scorer)?, config)
}

/// Vanilla segmentation: standard CUSUM, width `e - s`.
pub fn vcp<T: Real>(
    series: &ScoreSeries<T>,
    threshold: Option<f64>,
    num_intervals: Option<usize>,
    seed: u64,
) -> Result<SegmenterRun<T>> {
    let mut cfg = NotConfig::vcp().with_seed(seed);
    cfg.threshold = threshold;
    cfg.num_intervals = num_intervals.unwrap_or(DEFAULT_NUM_INTERVALS);
    segment_series(series, &cfg)
}

/// Weighted segmentation: weighted CUSUM, width `S^w_{s:e}`.
pub fn wcp<T: Real>(
    series: &ScoreSeries<T>,
    scheme: WeightScheme,
    threshold: Option<f64>,
    num_intervals: Option<usize>,
    seed: u64,
) -> Result<SegmenterRun<T>> {
    let mut cfg = NotConfig::wcp(scheme).with_seed(seed);
    cfg.threshold = threshold;
    cfg.num_intervals = num_intervals.unwrap_or(DEFAULT_NUM_INTERVALS);
    segment_series(series, &cfg)
}

/// Generalized segmentation: segment-scored CUSUM, width `S^w_{s:e}`.
pub fn gcp<T: Real, S: SegmentScorer<T>>(
    series: &ScoreSeries<T>,
    scorer: S,
    scheme: WeightScheme,
    threshold: Option<f64>,
    num_intervals: Option<usize>,
    seed: u64,
) -> Result<SegmenterRun<T>> {
    let mut cfg = NotConfig::gcp(scheme).with_seed(seed);
    cfg.threshold = threshold;
    cfg.num_intervals = num_intervals.unwrap_or(DEFAULT_NUM_INTERVALS);
    segment_with_scorer(series, scorer, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score_model::SentenceRecord;
    use crate::scorer::{AdditiveScorer, FnScorer};
    use proptest::prelude::*;

    fn series(y: &[f64]) -> ScoreSeries<f64> {
        ScoreSeries::from_scores(y).unwrap()
    }

    #[test]
    fn draw_single_pair() {
        let mut rng = interval_rng(7, 0, 1);
        let d = draw_intervals(0, 1, 50, &mut rng).unwrap();
        assert!(d.iter().all(|&p| p == (0, 1)));
        assert!(matches!(
            draw_intervals(3, 3, 1, &mut rng),
            Err(Error::DegenerateRange { .. })
        ));
    }

    #[test]
    fn draw_is_deterministic_and_in_range() {
        let a = draw_intervals(4, 40, 300, &mut interval_rng(1, 4, 40)).unwrap();
        let b = draw_intervals(4, 40, 300, &mut interval_rng(1, 4, 40)).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|&(x, y)| 4 <= x && x < y && y <= 40));
        let c = draw_intervals(4, 40, 300, &mut interval_rng(2, 4, 40)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noiseless_step() {
        let run = vcp(&series(&[0.0, 0.0, 0.0, 1.0, 1.0, 1.0]), Some(0.5), None, 3).unwrap();
        assert_eq!(run.change_points(), &[2]);
        assert_eq!(run.threshold, 0.5);
        assert!(run.audit.iter().any(|a| a.selected));
    }

    #[test]
    fn two_jumps() {
        let mut y = vec![0.0; 4];
        y.extend([3.0; 4]);
        y.extend([0.0; 4]);
        let run = vcp(&series(&y), Some(1.0), None, 11).unwrap();
        assert_eq!(run.change_points(), &[3, 7]);
    }

    #[test]
    fn constant_series_has_no_change() {
        for r in [0.01, 1.0, 5.0] {
            let run = vcp(&series(&[2.5; 9]), Some(r), Some(50), 0).unwrap();
            assert!(run.change_points().is_empty());
        }
    }

    #[test]
    fn two_point_series() {
        let run = vcp(&series(&[0.0, 5.0]), Some(1.0), Some(5), 0).unwrap();
        assert_eq!(run.change_points(), &[0]);
        let run = vcp(&series(&[0.0, 5.0]), None, Some(5), 0).unwrap();
        assert!((run.threshold - 2f64.ln().sqrt()).abs() < 1e-15);
    }

    #[test]
    fn min_interval_len_stops_recursion() {
        let y = [0.0, 0.0, 0.0, 5.0, 5.0, 5.0];
        let mut cfg = NotConfig::vcp().with_threshold(0.5);
        cfg.min_interval_len = 7;
        let run = segment_series(&series(&y), &cfg).unwrap();
        assert!(run.change_points().is_empty());
        cfg.min_interval_len = 1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn invalid_config_rejected() {
        let s = series(&[0.0, 1.0, 2.0]);
        assert!(segment_series(&s, &NotConfig::vcp().with_threshold(0.0)).is_err());
        assert!(segment_series(&s, &NotConfig::vcp().with_intervals(0)).is_err());
        assert!(segment_series(&s, &NotConfig::gcp(WeightScheme::Uniform)).is_err());
        let scorer = AdditiveScorer::new(&[0.0, 1.0, 2.0], &[1.0; 3]).unwrap();
        assert!(segment_with_scorer(&s, scorer, &NotConfig::vcp()).is_err());
    }

    #[test]
    fn wcp_uniform_index_width_matches_vcp() {
        let y: Vec<f64> = (0..40)
            .map(
                |i| if (10..25).contains(&i) { 1.0 } else { 0.0 } + ((i * 7919) % 13) as f64 * 0.05,
            )
            .collect();
        let s = series(&y);
        for seed in 0..5 {
            let v = vcp(&s, Some(0.6), Some(100), seed).unwrap();
            let cfg = NotConfig::wcp(WeightScheme::Uniform)
                .with_width(WidthKind::IndexWidth)
                .with_threshold(0.6)
                .with_intervals(100)
                .with_seed(seed);
            let w = segment_series(&s, &cfg).unwrap();
            assert_eq!(v.segmentation, w.segmentation);
        }
    }

    #[test]
    fn gcp_with_additive_scorer_matches_wcp() {
        let y: Vec<f64> = (0..30)
            .map(|i| if i >= 12 { 1.5 } else { 0.0 } + ((i * 31) % 7) as f64 * 0.2)
            .collect();
        let tokens: Vec<u32> = (0..30).map(|i| 3 + (i * 5 % 11) as u32).collect();
        let recs = y
            .iter()
            .zip(&tokens)
            .enumerate()
            .map(|(i, (&v, &n))| SentenceRecord::new(i, v).with_tokens(n))
            .collect();
        let s = ScoreSeries::new(recs).unwrap();
        let scheme = WeightScheme::token_power(1.0).unwrap();
        let raw = resolve_weights(&s, scheme).unwrap();
        for seed in 0..5 {
            let w = wcp(&s, scheme, Some(0.8), Some(80), seed).unwrap();
            let scorer = AdditiveScorer::new(&y, &raw).unwrap();
            let g = gcp(&s, scorer, scheme, Some(0.8), Some(80), seed).unwrap();
            assert_eq!(w.segmentation, g.segmentation);
        }
    }

    #[test]
    fn scorer_error_propagates() {
        let s = series(&[0.0, 1.0, 0.0, 1.0]);
        let scorer = FnScorer::new(4, |a: usize, _| {
            if a == 2 {
                Err(Error::ScorerFailure("boom".into()))
            } else {
                Ok(a as f64)
            }
        });
        let r = gcp(&s, scorer, WeightScheme::Uniform, Some(0.1), Some(50), 0);
        assert!(matches!(r, Err(Error::ScorerFailure(_))));
    }

    #[test]
    fn normalisation_is_mean_one() {
        let mut w = vec![1.0, 3.0, 8.0];
        normalize_weights(&mut w);
        assert!((w.iter().sum::<f64>() - 3.0).abs() < 1e-12);
        assert!((w[1] / w[0] - 3.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn deterministic_and_valid(
            y in prop::collection::vec(-3.0f64..3.0, 2..60),
            seed in any::<u64>(),
            r in 0.1f64..3.0,
        ) {
            let s = series(&y);
            let a = vcp(&s, Some(r), Some(30), seed).unwrap();
            let b = vcp(&s, Some(r), Some(30), seed).unwrap();
            prop_assert_eq!(&a, &b);
            let cps = a.change_points();
            prop_assert!(cps.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(cps.iter().all(|&t| t + 1 < y.len()));
        }

        /// Raising r shrinks the survivor set of the root call.
        #[test]
        fn root_survivors_shrink_with_threshold(
            y in prop::collection::vec(-3.0f64..3.0, 2..60),
            seed in any::<u64>(),
            r1 in 0.1f64..3.0,
            dr in 0.0f64..3.0,
        ) {
            let s = series(&y);
            let n = y.len();
            let survivors = |r: f64| -> Vec<(usize, usize)> {
                vcp(&s, Some(r), Some(30), seed).unwrap().audit.iter()
                    .filter(|a| a.call_range == (0, n - 1) && a.over_threshold)
                    .map(|a| (a.stat.start, a.stat.end))
                    .collect()
            };
            let low = survivors(r1);
            let high = survivors(r1 + dr);
            prop_assert!(high.iter().all(|iv| low.contains(iv)));
        }
    }
}
