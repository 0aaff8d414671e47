//! Segment scoring and 1-d k-means labeling of segments.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::score_model::{
    resolve_weights, LabeledDocument, ScoreSeries, Segmentation, WeightScheme,
};
use crate::scorer::SegmentScorer;

/// Outcome of [`cluster_1d`]. Class `0` has the largest center.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterResult<T> {
    pub assignments: Vec<usize>,
    pub centers: Vec<T>,
    /// `false` for classes that received no value.
    pub populated: Vec<bool>,
    /// Within-class sum of squares.
    pub cost: T,
}

impl<T> ClusterResult<T> {
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn populated_classes(&self) -> usize {
        self.populated.iter().filter(|&&p| p).count()
    }
}

/// One score per segment of `segmentation`.
///
/// With a scorer the segment text is scored directly; otherwise the score is
/// the weighted mean of the sentence scores under `scheme`.
pub fn segment_scores<T: Real>(
    series: &ScoreSeries<T>,
    segmentation: &Segmentation,
    scheme: WeightScheme,
    scorer: Option<&mut dyn SegmentScorer<T>>,
) -> Result<Vec<T>> {
    if segmentation.len() != series.len() {
        return Err(Error::LengthMismatch {
            truth: series.len(),
            pred: segmentation.len(),
        });
    }
    let segments = segmentation.segments();
    match scorer {
        Some(scorer) => segments
            .iter()
            .map(|&(a, b)| scorer.segment_score(a, b))
            .collect(),
        None => {
            let w = resolve_weights(series, scheme)?;
            let y = series.scores();
            Ok(segments
                .iter()
                .map(|&(a, b)| {
                    let num: T = (a..=b).map(|i| w[i] * y[i]).sum();
                    let den: T = w[a..=b].iter().copied().sum();
                    num / den
                })
                .collect())
        }
    }
}

/// Globally optimal k-means on scalars by dynamic programming over the
/// sorted values.
///
/// Equal values always share a class, so fewer than `k` classes may be
/// populated; unpopulated classes come last and reuse the smallest center.
pub fn cluster_1d<T: Real>(values: &[T], k: usize) -> ClusterResult<T> {
    let k = k.max(1);
    let n = values.len();
    if n == 0 {
        return ClusterResult {
            assignments: Vec::new(),
            centers: vec![T::zero(); k],
            populated: vec![false; k],
            cost: T::zero(),
        };
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let x: Vec<T> = order.iter().map(|&i| values[i]).collect();

    // prefix sums of values centered on their mean
    let shift = x.iter().copied().sum::<T>() / T::count(n);
    let mut s1 = vec![T::zero(); n + 1];
    let mut s2 = vec![T::zero(); n + 1];
    for i in 0..n {
        let d = x[i] - shift;
        s1[i + 1] = s1[i] + d;
        s2[i + 1] = s2[i] + d * d;
    }
    // sum of squares of x[a..b]
    let sse = |a: usize, b: usize| -> T {
        let m = T::count(b - a);
        let s = s1[b] - s1[a];
        (s2[b] - s2[a] - s * s / m).max(T::zero())
    };
    // a class may start at i only between distinct values
    let cut_ok = |i: usize| i == 0 || x[i - 1] < x[i];

    // cost[j][i]: best cost of x[..i] with at most j + 1 classes
    let inf = T::infinity();
    let mut cost = vec![vec![inf; n + 1]; k];
    let mut from = vec![vec![0usize; n + 1]; k];
    for (i, c) in cost[0].iter_mut().enumerate().skip(1) {
        *c = sse(0, i);
    }
    for j in 1..k {
        for i in 1..=n {
            let prev = &cost[j - 1];
            let (mut best, mut arg) = (prev[i], i);
            for (c, &pc) in prev.iter().enumerate().take(i).skip(1) {
                if !cut_ok(c) || pc == inf {
                    continue;
                }
                let v = pc + sse(c, i);
                if v < best {
                    best = v;
                    arg = c;
                }
            }
            cost[j][i] = best;
            from[j][i] = arg;
        }
    }

    // walk back to class boundaries in ascending order
    let mut bounds = vec![n];
    let (mut j, mut i) = (k - 1, n);
    while i > 0 {
        let c = if j == 0 { 0 } else { from[j][i] };
        if c == i {
            j -= 1;
            continue;
        }
        bounds.push(c);
        i = c;
        j = j.saturating_sub(1);
    }
    bounds.reverse();
    let used = bounds.len() - 1;

    let mut assignments = vec![0; n];
    let mut centers = Vec::with_capacity(k);
    for (cls, w) in bounds.windows(2).enumerate() {
        let id = used - 1 - cls;
        for &i in &order[w[0]..w[1]] {
            assignments[i] = id;
        }
        centers.push(x[w[0]..w[1]].iter().copied().sum::<T>() / T::count(w[1] - w[0]));
    }
    centers.reverse();
    let smallest = centers[used - 1];
    centers.resize(k, smallest);
    let mut populated = vec![true; used];
    populated.resize(k, false);
    ClusterResult {
        assignments,
        centers,
        populated,
        cost: cost[k - 1][n],
    }
}

/// Scores every segment and clusters the scores into `k` classes.
pub fn label_document<T: Real>(
    series: &ScoreSeries<T>,
    segmentation: &Segmentation,
    k: usize,
    scheme: WeightScheme,
    scorer: Option<&mut dyn SegmentScorer<T>>,
) -> Result<LabeledDocument<T>> {
    if k == 0 {
        return Err(Error::InvalidConfig("need at least one class".into()));
    }
    let scores = segment_scores(series, segmentation, scheme, scorer)?;
    let clusters = cluster_1d(&scores, k);
    Ok(LabeledDocument {
        segmentation: segmentation.clone(),
        single_class: clusters.populated_classes() <= 1,
        labels: clusters.assignments,
        class_means: clusters.centers,
        segment_scores: scores,
    })
}
