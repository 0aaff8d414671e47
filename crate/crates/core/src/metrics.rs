//! Segmentation metrics: WindowDiff, count error and localization error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::score_model::Segmentation;

/// Evaluation of one predicted segmentation against the truth.
///
/// `wd` is the mean absolute difference in boundary counts per window, so it
/// can exceed 1. The default window is half the mean true segment length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub wd: f64,
    /// `K_true - K_pred`; negative means over-segmentation.
    pub ce: i64,
    pub window_k: usize,
    pub n: usize,
    pub k_true: usize,
    pub k_pred: usize,
}

/// `max(1, round(n / (2 (K_true + 1))))`, capped at `n - 1`.
pub fn default_window(n: usize, k_true: usize) -> usize {
    let k = (n as f64 / (2.0 * (k_true as f64 + 1.0))).round() as usize;
    k.max(1).min(n.saturating_sub(1).max(1))
}

fn boundary_indicator(seg: &Segmentation) -> Vec<u32> {
    // indicator over 1-based boundaries t = 1..=n-1, stored at t - 1
    let mut ind = vec![0; seg.len().saturating_sub(1)];
    for &t in seg.change_points() {
        ind[t] = 1;
    }
    ind
}

/// WindowDiff with count differences:
/// `1/(T-k) * sum_{i=1}^{T-k} |C_i(truth) - C_i(pred)|`, where `C_i` counts
/// 1-based boundaries `t` with `i <= t <= i + k - 1`.
pub fn window_diff(truth: &Segmentation, pred: &Segmentation, k: usize) -> Result<f64> {
    let n = truth.len();
    if pred.len() != n {
        return Err(Error::LengthMismatch {
            truth: n,
            pred: pred.len(),
        });
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidWindow { k, n });
    }
    let a = boundary_indicator(truth);
    let b = boundary_indicator(pred);
    let windows = n - k;
    // window i (1-based) covers indicator slots i-1 ..= i+k-2
    let mut ca: i64 = a[..k].iter().map(|&x| x as i64).sum();
    let mut cb: i64 = b[..k].iter().map(|&x| x as i64).sum();
    let mut total = (ca - cb).unsigned_abs();
    for i in 1..windows {
        ca += a[i + k - 1] as i64 - a[i - 1] as i64;
        cb += b[i + k - 1] as i64 - b[i - 1] as i64;
        total += (ca - cb).unsigned_abs();
    }
    Ok(total as f64 / windows as f64)
}

/// `K_true - K_pred`.
pub fn count_error(truth: &Segmentation, pred: &Segmentation) -> i64 {
    truth.num_change_points() as i64 - pred.num_change_points() as i64
}

/// Full evaluation; `window_k` overrides the default window.
pub fn evaluate(
    truth: &Segmentation,
    pred: &Segmentation,
    window_k: Option<usize>,
) -> Result<EvalReport> {
    let n = truth.len();
    let k = window_k.unwrap_or_else(|| default_window(n, truth.num_change_points()));
    Ok(EvalReport {
        wd: window_diff(truth, pred, k)?,
        ce: count_error(truth, pred),
        window_k: k,
        n,
        k_true: truth.num_change_points(),
        k_pred: pred.num_change_points(),
    })
}

/// Localization error between two segmentations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LocalizationError<T> {
    /// Counts agree: max over `j` of the weight between `tau_j` and its estimate.
    Matched(T),
    /// Counts differ: weighted Hausdorff distance between the two sets, or the
    /// total weight when exactly one set is empty.
    CountMismatch(T),
}

impl<T: Copy> LocalizationError<T> {
    pub fn value(&self) -> T {
        match *self {
            LocalizationError::Matched(v) | LocalizationError::CountMismatch(v) => v,
        }
    }

    pub fn is_matched(&self) -> bool {
        matches!(self, LocalizationError::Matched(_))
    }
}

/// Cumulative weight of the sentences strictly after `min(a, b)` up to `max(a, b)`.
fn gap_mass<T: Real>(prefix: &[T], a: usize, b: usize) -> T {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    prefix[hi + 1] - prefix[lo + 1]
}

/// Weighted localization error: with `K_true = K_pred`,
/// `max_j sum_{i in (tau_j, est_j] U (est_j, tau_j]} w_i`. With unit weights
/// this is `max_j |est_j - tau_j|`.
pub fn weighted_localization_error<T: Real>(
    truth: &Segmentation,
    pred: &Segmentation,
    weights: &[T],
) -> Result<LocalizationError<T>> {
    let n = truth.len();
    if pred.len() != n {
        return Err(Error::LengthMismatch {
            truth: n,
            pred: pred.len(),
        });
    }
    if weights.len() != n {
        return Err(Error::InvalidConfig(format!(
            "{} weights for length {n}",
            weights.len()
        )));
    }
    let mut prefix = Vec::with_capacity(n + 1);
    let mut acc = T::zero();
    prefix.push(acc);
    for &w in weights {
        acc = acc + w;
        prefix.push(acc);
    }
    let (t, p) = (truth.change_points(), pred.change_points());
    if t.len() == p.len() {
        let worst = t
            .iter()
            .zip(p)
            .map(|(&a, &b)| gap_mass(&prefix, a, b))
            .fold(T::zero(), T::max);
        return Ok(LocalizationError::Matched(worst));
    }
    if t.is_empty() || p.is_empty() {
        return Ok(LocalizationError::CountMismatch(acc));
    }
    let directed = |from: &[usize], to: &[usize]| -> T {
        from.iter()
            .map(|&a| {
                to.iter()
                    .map(|&b| gap_mass(&prefix, a, b))
                    .fold(T::infinity(), T::min)
            })
            .fold(T::zero(), T::max)
    };
    Ok(LocalizationError::CountMismatch(
        directed(t, p).max(directed(p, t)),
    ))
}
