//! Score sequences, weighting schemes and segmentations.
//!
//! Change points use one convention throughout the crate: a change point `t`
//! is the 0-based index of the last sentence before the boundary, so the
//! boundary lies between sentences `t` and `t + 1`. One-based boundary lists
//! (`t + 1`) are converted at the I/O edge with [`Segmentation::from_one_based`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One scored sentence (or any other text unit).
#[derive(Clone, Debug, PartialEq)]
pub struct SentenceRecord<T> {
    pub index: usize,
    pub score: T,
    pub token_count: u32,
    pub var_estimate: Option<T>,
    pub text: Option<String>,
}

impl<T: Real> SentenceRecord<T> {
    pub fn new(index: usize, score: T) -> Self {
        Self {
            index,
            score,
            token_count: 1,
            var_estimate: None,
            text: None,
        }
    }

    pub fn with_tokens(mut self, token_count: u32) -> Self {
        self.token_count = token_count;
        self
    }

    pub fn with_variance(mut self, var: T) -> Self {
        self.var_estimate = Some(var);
        self
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = Some(text.into());
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.score.is_finite() {
            return Err(Error::InvalidSeries(format!(
                "record {}: score is not finite",
                self.index
            )));
        }
        if self.token_count == 0 {
            return Err(Error::InvalidSeries(format!(
                "record {}: token_count must be at least 1",
                self.index
            )));
        }
        if let Some(v) = self.var_estimate {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::InvalidSeries(format!(
                    "record {}: var_estimate must be positive and finite",
                    self.index
                )));
            }
        }
        Ok(())
    }
}

/// The ordered per-sentence score sequence fed to every segmenter.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreSeries<T> {
    records: Vec<SentenceRecord<T>>,
}

impl<T: Real> ScoreSeries<T> {
    /// Validates contiguous 0-based indices, `N >= 2` and every record invariant.
    pub fn new(records: Vec<SentenceRecord<T>>) -> Result<Self> {
        if records.len() < 2 {
            return Err(Error::InvalidSeries(format!(
                "need at least 2 records, got {}",
                records.len()
            )));
        }
        for (i, r) in records.iter().enumerate() {
            if r.index != i {
                return Err(Error::InvalidSeries(format!(
                    "record at position {i} has index {}",
                    r.index
                )));
            }
            r.validate()?;
        }
        Ok(Self { records })
    }

    /// Series with unit token counts and no variance estimates.
    pub fn from_scores(scores: &[T]) -> Result<Self> {
        Self::new(
            scores
                .iter()
                .enumerate()
                .map(|(i, &y)| SentenceRecord::new(i, y))
                .collect(),
        )
    }

    pub fn records(&self) -> &[SentenceRecord<T>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn scores(&self) -> Vec<T> {
        self.records.iter().map(|r| r.score).collect()
    }

    pub fn token_counts(&self) -> Vec<u32> {
        self.records.iter().map(|r| r.token_count).collect()
    }
}

/// How per-sentence weights are derived from a [`ScoreSeries`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightScheme {
    #[default]
    Uniform,
    InverseVariance,
    TokenPower {
        kappa: f64,
    },
}

impl WeightScheme {
    pub fn token_power(kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "token_power exponent must be positive, got {kappa}"
            )));
        }
        Ok(WeightScheme::TokenPower { kappa })
    }
}

/// Resolves `scheme` against `series` into one positive weight per record.
pub fn resolve_weights<T: Real>(series: &ScoreSeries<T>, scheme: WeightScheme) -> Result<Vec<T>> {
    let weights: Vec<T> = match scheme {
        WeightScheme::Uniform => vec![T::one(); series.len()],
        WeightScheme::InverseVariance => series
            .records()
            .iter()
            .map(|r| {
                r.var_estimate
                    .map(|v| v.recip())
                    .ok_or(Error::MissingVariance { index: r.index })
            })
            .collect::<Result<_>>()?,
        WeightScheme::TokenPower { kappa } => {
            if !(kappa.is_finite() && kappa > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "token_power exponent must be positive, got {kappa}"
                )));
            }
            let kappa = T::lit(kappa);
            series
                .records()
                .iter()
                .map(|r| {
                    T::from_u32(r.token_count)
                        .unwrap_or_else(T::nan)
                        .powf(kappa)
                })
                .collect()
        }
    };
    check_weights(&weights)?;
    Ok(weights)
}

/// Verifies every weight is positive and finite.
pub fn check_weights<T: Real>(weights: &[T]) -> Result<()> {
    match weights
        .iter()
        .position(|&w| !(w.is_finite() && w > T::zero()))
    {
        Some(index) => Err(Error::NonPositiveWeight {
            index,
            value: weights[index].to_f64_lossy(),
        }),
        None => Ok(()),
    }
}

/// Estimated (or true) change points of a length-`n` series.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Segmentation {
    change_points: Vec<usize>,
    n: usize,
}

impl Segmentation {
    /// `change_points` must be strictly increasing and within `0..=n-2`.
    pub fn new(change_points: Vec<usize>, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidSegmentation("series length is zero".into()));
        }
        if let Some(&last) = change_points.last() {
            if last + 1 >= n {
                return Err(Error::InvalidSegmentation(format!(
                    "change point {last} out of range for length {n}"
                )));
            }
        }
        if change_points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSegmentation(
                "change points must be strictly increasing".into(),
            ));
        }
        Ok(Self { change_points, n })
    }

    /// Builds from 1-based boundaries `t` in `1..=n-1` (boundary between units `t` and `t+1`).
    pub fn from_one_based(boundaries: &[usize], n: usize) -> Result<Self> {
        let cps = boundaries
            .iter()
            .map(|&t| {
                t.checked_sub(1).ok_or_else(|| {
                    Error::InvalidSegmentation("1-based boundary must be at least 1".into())
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(cps, n)
    }

    pub fn empty(n: usize) -> Self {
        Self {
            change_points: Vec::new(),
            n,
        }
    }

    pub fn change_points(&self) -> &[usize] {
        &self.change_points
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.change_points.iter().map(|t| t + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn num_change_points(&self) -> usize {
        self.change_points.len()
    }

    /// Inclusive `(start, end)` ranges of the `K + 1` segments.
    pub fn segments(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.change_points.len() + 1);
        let mut start = 0;
        for &t in &self.change_points {
            out.push((start, t));
            start = t + 1;
        }
        out.push((start, self.n - 1));
        out
    }
}

/// A segmentation with one class label per segment.
///
/// Class ids are ordered by descending class mean, so class `0` is the most
/// LLM-like. With `k = 2` the names are `llm`/`human`; with `k = 3`
/// `llm`/`mixed`/`human`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDocument<T> {
    pub segmentation: Segmentation,
    pub segment_scores: Vec<T>,
    pub labels: Vec<usize>,
    pub class_means: Vec<T>,
    /// Only one cluster is populated, so the labels carry no human/LLM contrast.
    pub single_class: bool,
}

impl<T: Real> LabeledDocument<T> {
    pub fn num_classes(&self) -> usize {
        self.class_means.len()
    }

    pub fn label_names(&self) -> Vec<&'static str> {
        self.labels
            .iter()
            .map(|&l| {
                if self.single_class {
                    "undetermined"
                } else {
                    class_name(l, self.num_classes())
                }
            })
            .collect()
    }
}

/// Human-readable name of class `id` out of `k` classes.
pub fn class_name(id: usize, k: usize) -> &'static str {
    match (k, id) {
        (_, 0) => "llm",
        (2, 1) => "human",
        (3, 1) => "mixed",
        (3, 2) => "human",
        (k, id) if id + 1 == k => "human",
        _ => "intermediate",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(scores: &[f64]) -> ScoreSeries<f64> {
        ScoreSeries::from_scores(scores).unwrap()
    }

    #[test]
    fn uniform_weights_are_ones() {
        let s = series(&[0.3, -1.0, 2.0, 5.0]);
        assert_eq!(
            resolve_weights(&s, WeightScheme::Uniform).unwrap(),
            vec![1.0; 4]
        );
    }

    #[test]
    fn inverse_variance_weights() {
        let s = ScoreSeries::new(vec![
            SentenceRecord::new(0, 0.0).with_variance(0.25),
            SentenceRecord::new(1, 1.0).with_variance(1.0),
        ])
        .unwrap();
        assert_eq!(
            resolve_weights(&s, WeightScheme::InverseVariance).unwrap(),
            vec![4.0, 1.0]
        );
    }

    #[test]
    fn token_power_weights() {
        let s = ScoreSeries::new(vec![
            SentenceRecord::new(0, 0.0).with_tokens(2),
            SentenceRecord::new(1, 1.0).with_tokens(3),
        ])
        .unwrap();
        let w = resolve_weights(&s, WeightScheme::token_power(2.0).unwrap()).unwrap();
        assert_eq!(w, vec![4.0, 9.0]);
    }

    #[test]
    fn missing_variance_is_an_error() {
        let s = ScoreSeries::new(vec![
            SentenceRecord::new(0, 0.0).with_variance(0.5),
            SentenceRecord::new(1, 1.0),
        ])
        .unwrap();
        assert!(matches!(
            resolve_weights(&s, WeightScheme::InverseVariance),
            Err(Error::MissingVariance { index: 1 })
        ));
    }

    #[test]
    fn nonpositive_weight_detected() {
        assert!(matches!(
            check_weights(&[1.0, 0.0]),
            Err(Error::NonPositiveWeight { index: 1, .. })
        ));
        assert!(check_weights(&[1.0, f64::INFINITY]).is_err());
        assert!(WeightScheme::token_power(0.0).is_err());
    }

    #[test]
    fn series_invariants() {
        assert!(ScoreSeries::<f64>::from_scores(&[1.0]).is_err());
        assert!(ScoreSeries::from_scores(&[1.0, f64::NAN]).is_err());
        let bad_index = vec![SentenceRecord::new(0, 1.0), SentenceRecord::new(2, 1.0)];
        assert!(ScoreSeries::new(bad_index).is_err());
        let zero_tokens = vec![
            SentenceRecord::new(0, 1.0).with_tokens(0),
            SentenceRecord::new(1, 1.0),
        ];
        assert!(ScoreSeries::new(zero_tokens).is_err());
        let neg_var = vec![
            SentenceRecord::new(0, 1.0).with_variance(-0.1),
            SentenceRecord::new(1, 1.0),
        ];
        assert!(ScoreSeries::new(neg_var).is_err());
    }

    #[test]
    fn segmentation_validation_and_segments() {
        let seg = Segmentation::new(vec![1, 3], 6).unwrap();
        assert_eq!(seg.segments(), vec![(0, 1), (2, 3), (4, 5)]);
        assert_eq!(seg.one_based(), vec![2, 4]);
        assert!(Segmentation::new(vec![5], 6).is_err());
        assert!(Segmentation::new(vec![2, 2], 6).is_err());
        assert!(Segmentation::new(vec![3, 1], 6).is_err());
        assert_eq!(Segmentation::empty(4).segments(), vec![(0, 3)]);
        assert_eq!(
            Segmentation::from_one_based(&[3], 6)
                .unwrap()
                .change_points(),
            &[2]
        );
        assert!(Segmentation::from_one_based(&[0], 6).is_err());
    }

    #[test]
    fn token_power_equal_counts_equal_weights() {
        let s = ScoreSeries::new(vec![
            SentenceRecord::new(0, 0.0).with_tokens(7),
            SentenceRecord::new(1, 5.0).with_tokens(3),
            SentenceRecord::new(2, -2.0).with_tokens(7),
        ])
        .unwrap();
        for kappa in [0.3, 1.0, 2.5] {
            let w = resolve_weights(&s, WeightScheme::token_power(kappa).unwrap()).unwrap();
            assert_eq!(w[0], w[2]);
        }
    }
}
