//! Segment-level scorers: `phi` evaluated on the concatenation of a sentence range.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};
use crate::score_model::check_weights;

/// Answers `phi(X_{start..=end})` for inclusive 0-based sentence ranges.
pub trait SegmentScorer<T> {
    /// Number of sentences the scorer knows about.
    fn len(&self) -> usize;

    fn segment_score(&mut self, start: usize, end: usize) -> Result<T>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<T, S: SegmentScorer<T> + ?Sized> SegmentScorer<T> for &mut S {
    fn len(&self) -> usize {
        (**self).len()
    }

    fn segment_score(&mut self, start: usize, end: usize) -> Result<T> {
        (**self).segment_score(start, end)
    }
}

/// Scorer whose segment score is the weighted mean of the sentence scores,
/// `sum w_i y_i / sum w_i`. With `w_i` the token counts this is exactly a
/// per-token average statistic evaluated on the concatenated text.
#[derive(Clone, Debug)]
pub struct AdditiveScorer<T> {
    scores: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> AdditiveScorer<T> {
    pub fn new(scores: &[T], weights: &[T]) -> Result<Self> {
        if scores.len() != weights.len() {
            return Err(Error::InvalidConfig(format!(
                "{} scores but {} weights",
                scores.len(),
                weights.len()
            )));
        }
        check_weights(weights)?;
        Ok(Self {
            scores: scores.to_vec(),
            weights: weights.to_vec(),
        })
    }
}

impl<T: Real> SegmentScorer<T> for AdditiveScorer<T> {
    fn len(&self) -> usize {
        self.scores.len()
    }

    fn segment_score(&mut self, start: usize, end: usize) -> Result<T> {
        if start > end || end >= self.scores.len() {
            return Err(Error::ScorerFailure(format!(
                "range [{start}, {end}] out of bounds"
            )));
        }
        let (mut num, mut den) = (CompensatedSum::zero(), CompensatedSum::zero());
        for i in start..=end {
            num = num.add(self.weights[i] * self.scores[i]);
            den = den.add(self.weights[i]);
        }
        Ok((num.hi + num.lo) / (den.hi + den.lo))
    }
}

/// Adapts a closure `(start, end) -> Result<T>` into a scorer.
pub struct FnScorer<F> {
    len: usize,
    f: F,
}

impl<F> FnScorer<F> {
    pub fn new(len: usize, f: F) -> Self {
        Self { len, f }
    }
}

impl<T, F: FnMut(usize, usize) -> Result<T>> SegmentScorer<T> for FnScorer<F> {
    fn len(&self) -> usize {
        self.len
    }

    fn segment_score(&mut self, start: usize, end: usize) -> Result<T> {
        (self.f)(start, end)
    }
}

/// Memoises scorer responses per `(start, end)` range.
///
/// Non-finite responses are reported as [`Error::ScorerFailure`] and never cached.
pub struct CachedScorer<T, S> {
    inner: S,
    cache: HashMap<(usize, usize), T>,
    misses: usize,
}

impl<T: Real, S: SegmentScorer<T>> CachedScorer<T, S> {
    pub fn new(inner: S) -> Self {
        Self {
            inner,
            cache: HashMap::new(),
            misses: 0,
        }
    }

    /// Calls forwarded to the wrapped scorer.
    pub fn misses(&self) -> usize {
        self.misses
    }

    pub fn cached(&self) -> usize {
        self.cache.len()
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }

    pub fn into_inner(self) -> S {
        self.inner
    }
}

impl<T: Real, S: SegmentScorer<T>> SegmentScorer<T> for CachedScorer<T, S> {
    fn len(&self) -> usize {
        self.inner.len()
    }

    fn segment_score(&mut self, start: usize, end: usize) -> Result<T> {
        if let Some(&v) = self.cache.get(&(start, end)) {
            return Ok(v);
        }
        self.misses += 1;
        let v = self.inner.segment_score(start, end)?;
        if !v.is_finite() {
            return Err(Error::ScorerFailure(format!(
                "non-finite score for range [{start}, {end}]"
            )));
        }
        self.cache.insert((start, end), v);
        Ok(v)
    }
}
