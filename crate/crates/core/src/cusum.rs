//! CUSUM contrasts: standard, weighted and generalized (segment-scored).
//!
//! All three share the mass factor `sqrt(S_l * S_r / S)` built from prefix
//! sums of the weights; the standard statistic is the weighted one with unit
//! weights. Prefix sums carry a compensation term and the scores are centred
//! before accumulation, so interval differences keep close to full precision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};
use crate::score_model::check_weights;
use crate::scorer::{CachedScorer, SegmentScorer};

/// Which contrast statistic drives the segmenter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContrastKind {
    Standard,
    Weighted,
    Generalized,
}

/// Width statistic used to pick the narrowest over-threshold interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthKind {
    /// `e - s`.
    IndexWidth,
    /// Cumulative weight `S^w_{s:e}`.
    CumulativeWeight,
}

/// Maximum of a contrast over one candidate interval `[start, end]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntervalStat<T> {
    pub start: usize,
    pub end: usize,
    pub max_value: T,
    pub argmax: usize,
    pub width: T,
}

/// A contrast `A_{s,e}(b)` over a fixed length-`len` sequence.
pub trait Contrast<T: Real> {
    fn len(&self) -> usize;

    /// Contrast at split `b` of the inclusive interval `[s, e]`, `s <= b < e`.
    fn value(&mut self, s: usize, e: usize, b: usize) -> Result<T>;

    /// Cumulative weight of `[s, e]`.
    fn mass(&self, s: usize, e: usize) -> T;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_triplet(n: usize, s: usize, e: usize, b: usize) -> Result<()> {
    if s <= b && b < e && e < n {
        Ok(())
    } else {
        Err(Error::InvalidTriplet { s, b, e, n })
    }
}

/// Prefix sums of `w_i` and `w_i * (y_i - c)` for a centring constant `c`.
#[derive(Clone, Debug)]
pub struct WeightedPrefix<T> {
    mass: Vec<CompensatedSum<T>>,
    moment: Vec<CompensatedSum<T>>,
}

impl<T: Real> WeightedPrefix<T> {
    pub fn new(scores: &[T], weights: &[T]) -> Result<Self> {
        if scores.len() != weights.len() {
            return Err(Error::InvalidSeries(format!(
                "{} scores but {} weights",
                scores.len(),
                weights.len()
            )));
        }
        if let Some(i) = scores.iter().position(|y| !y.is_finite()) {
            return Err(Error::InvalidSeries(format!("score {i} is not finite")));
        }
        check_weights(weights)?;

        let n = scores.len();
        let total_w: T = weights.iter().copied().sum();
        let centre = if n == 0 {
            T::zero()
        } else {
            scores.iter().zip(weights).map(|(&y, &w)| w * y).sum::<T>() / total_w
        };

        let mut mass = Vec::with_capacity(n + 1);
        let mut moment = Vec::with_capacity(n + 1);
        let mut m = CompensatedSum::zero();
        let mut q = CompensatedSum::zero();
        mass.push(m);
        moment.push(q);
        for (&y, &w) in scores.iter().zip(weights) {
            let d = y - centre;
            // exact product split into head and tail
            let p = w * d;
            let tail = w.mul_add(d, -p);
            m = m.add(w);
            q = q.add(p).add(tail);
            mass.push(m);
            moment.push(q);
        }
        Ok(Self { mass, moment })
    }

    pub fn unit(scores: &[T]) -> Result<Self> {
        Self::new(scores, &vec![T::one(); scores.len()])
    }

    pub fn len(&self) -> usize {
        self.mass.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `S^w_{s:e}`.
    pub fn mass(&self, s: usize, e: usize) -> T {
        self.mass[e + 1].diff(self.mass[s])
    }

    fn centred_mean(&self, s: usize, e: usize) -> T {
        self.moment[e + 1].diff(self.moment[s]) / self.mass(s, e)
    }

    /// Weighted CUSUM at `b` over `[s, e]`, unchecked.
    fn cusum(&self, s: usize, e: usize, b: usize) -> T {
        let left = self.mass(s, b);
        let right = self.mass(b + 1, e);
        let total = self.mass(s, e);
        let diff = self.centred_mean(s, b) - self.centred_mean(b + 1, e);
        (left * right / total).sqrt() * diff.abs()
    }
}

/// Standard CUSUM: unit weights, mass equals the number of points.
#[derive(Clone, Debug)]
pub struct StandardCusum<T> {
    prefix: WeightedPrefix<T>,
}

impl<T: Real> StandardCusum<T> {
    pub fn new(scores: &[T]) -> Result<Self> {
        Ok(Self {
            prefix: WeightedPrefix::unit(scores)?,
        })
    }
}

impl<T: Real> Contrast<T> for StandardCusum<T> {
    fn len(&self) -> usize {
        self.prefix.len()
    }

    fn value(&mut self, s: usize, e: usize, b: usize) -> Result<T> {
        check_triplet(self.len(), s, e, b)?;
        Ok(self.prefix.cusum(s, e, b))
    }

    fn mass(&self, s: usize, e: usize) -> T {
        self.prefix.mass(s, e)
    }
}

/// Weighted CUSUM over weighted means and cumulative weights.
#[derive(Clone, Debug)]
pub struct WeightedCusum<T> {
    prefix: WeightedPrefix<T>,
}

impl<T: Real> WeightedCusum<T> {
    pub fn new(scores: &[T], weights: &[T]) -> Result<Self> {
        Ok(Self {
            prefix: WeightedPrefix::new(scores, weights)?,
        })
    }
}

impl<T: Real> Contrast<T> for WeightedCusum<T> {
    fn len(&self) -> usize {
        self.prefix.len()
    }

    fn value(&mut self, s: usize, e: usize, b: usize) -> Result<T> {
        check_triplet(self.len(), s, e, b)?;
        Ok(self.prefix.cusum(s, e, b))
    }

    fn mass(&self, s: usize, e: usize) -> T {
        self.prefix.mass(s, e)
    }
}

/// Generalized CUSUM: the mean difference is replaced by the difference of
/// segment-level scores `phi(X_{s:b}) - phi(X_{b+1:e})` from a scorer.
/// Scorer responses are cached per range.
pub struct GeneralizedCusum<T, S> {
    mass: Vec<CompensatedSum<T>>,
    scorer: CachedScorer<T, S>,
}

impl<T: Real, S: SegmentScorer<T>> GeneralizedCusum<T, S> {
    pub fn new(weights: &[T], scorer: S) -> Result<Self> {
        check_weights(weights)?;
        if scorer.len() != weights.len() {
            return Err(Error::InvalidConfig(format!(
                "scorer covers {} units but {} weights were given",
                scorer.len(),
                weights.len()
            )));
        }
        let mut mass = Vec::with_capacity(weights.len() + 1);
        let mut m = CompensatedSum::zero();
        mass.push(m);
        for &w in weights {
            m = m.add(w);
            mass.push(m);
        }
        Ok(Self {
            mass,
            scorer: CachedScorer::new(scorer),
        })
    }

    pub fn scorer(&self) -> &CachedScorer<T, S> {
        &self.scorer
    }

    pub fn into_scorer(self) -> CachedScorer<T, S> {
        self.scorer
    }
}

impl<T: Real, S: SegmentScorer<T>> Contrast<T> for GeneralizedCusum<T, S> {
    fn len(&self) -> usize {
        self.mass.len() - 1
    }

    fn value(&mut self, s: usize, e: usize, b: usize) -> Result<T> {
        check_triplet(self.len(), s, e, b)?;
        let left = self.mass(s, b);
        let right = self.mass(b + 1, e);
        let total = self.mass(s, e);
        let phi_left = self.scorer.segment_score(s, b)?;
        let phi_right = self.scorer.segment_score(b + 1, e)?;
        Ok((left * right / total).sqrt() * (phi_left - phi_right).abs())
    }

    fn mass(&self, s: usize, e: usize) -> T {
        self.mass[e + 1].diff(self.mass[s])
    }
}

/// Standard CUSUM of `scores` at `b` over `[s, e]`.
pub fn cusum_at<T: Real>(scores: &[T], s: usize, e: usize, b: usize) -> Result<T> {
    check_triplet(scores.len(), s, e, b)?;
    StandardCusum::new(scores)?.value(s, e, b)
}

/// Weighted CUSUM of `scores` under `weights` at `b` over `[s, e]`.
pub fn weighted_cusum_at<T: Real>(
    scores: &[T],
    weights: &[T],
    s: usize,
    e: usize,
    b: usize,
) -> Result<T> {
    check_triplet(scores.len(), s, e, b)?;
    WeightedCusum::new(scores, weights)?.value(s, e, b)
}

/// Generalized CUSUM at `b` over `[s, e]`, querying `scorer` for both halves.
pub fn generalized_cusum_at<T: Real, S: SegmentScorer<T>>(
    weights: &[T],
    scorer: S,
    s: usize,
    e: usize,
    b: usize,
) -> Result<T> {
    check_triplet(weights.len(), s, e, b)?;
    GeneralizedCusum::new(weights, scorer)?.value(s, e, b)
}

/// Scans `b` over `[s, e - 1]` and returns the maximum contrast.
///
/// Ties go to the smallest `b`.
pub fn max_contrast<T: Real, C: Contrast<T> + ?Sized>(
    contrast: &mut C,
    s: usize,
    e: usize,
    width: WidthKind,
) -> Result<IntervalStat<T>> {
    if e <= s || e >= contrast.len() {
        return Err(Error::InvalidTriplet {
            s,
            b: s,
            e,
            n: contrast.len(),
        });
    }
    let mut best = contrast.value(s, e, s)?;
    let mut argmax = s;
    for b in s + 1..e {
        let v = contrast.value(s, e, b)?;
        if v > best {
            best = v;
            argmax = b;
        }
    }
    if !best.is_finite() {
        return Err(Error::ScorerFailure(format!(
            "non-finite contrast on [{s}, {e}]"
        )));
    }
    let width = match width {
        WidthKind::IndexWidth => T::count(e - s),
        WidthKind::CumulativeWeight => contrast.mass(s, e),
    };
    Ok(IntervalStat {
        start: s,
        end: e,
        max_value: best,
        argmax,
        width,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scorer::{AdditiveScorer, FnScorer};
    use proptest::prelude::*;

    /// Direct O(e - s) evaluation of the weighted CUSUM definition.
    fn naive(y: &[f64], w: &[f64], s: usize, e: usize, b: usize) -> f64 {
        let sum = |a: usize, z: usize| -> (f64, f64) {
            (a..=z).fold((0.0, 0.0), |(m, q), i| (m + w[i], q + w[i] * y[i]))
        };
        let (ml, ql) = sum(s, b);
        let (mr, qr) = sum(b + 1, e);
        let (mt, _) = sum(s, e);
        (ml * mr / mt).sqrt() * (ql / ml - qr / mr).abs()
    }

    #[test]
    fn constant_series_is_zero() {
        let y = [1.7; 4];
        for s in 0..3 {
            for e in s + 1..4 {
                for b in s..e {
                    assert_eq!(cusum_at(&y, s, e, b).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn hand_values() {
        assert!((cusum_at(&[0.0f64, 0.0, 2.0, 2.0], 0, 3, 1).unwrap() - 2.0).abs() < 1e-15);
        assert!((cusum_at(&[0.0, 1.0], 0, 1, 0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let w = weighted_cusum_at(&[0.0f64, 0.0, 2.0, 2.0], &[1.0; 4], 0, 3, 1).unwrap();
        assert!((w - 2.0).abs() < 1e-15);
        let w = weighted_cusum_at(&[0.0, 2.0], &[1.0, 3.0], 0, 1, 0).unwrap();
        assert!((w - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn generalized_hand_value() {
        let y = [0.0, 0.0, 3.0];
        let w = [1.0; 3];
        let g = generalized_cusum_at(&w, AdditiveScorer::new(&y, &w).unwrap(), 0, 2, 1).unwrap();
        assert!((g - 6f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn generalized_constant_scorer_is_zero() {
        let w = [1.0, 2.0, 3.0, 4.0];
        let mut g = GeneralizedCusum::new(&w, FnScorer::new(4, |_, _| Ok(0.42))).unwrap();
        for s in 0..3 {
            for e in s + 1..4 {
                for b in s..e {
                    assert_eq!(g.value(s, e, b).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn invalid_triplets_rejected() {
        let y = [0.0, 1.0, 2.0];
        assert!(matches!(
            cusum_at(&y, 1, 1, 1),
            Err(Error::InvalidTriplet { .. })
        ));
        assert!(cusum_at(&y, 0, 3, 1).is_err());
        assert!(cusum_at(&y, 1, 2, 0).is_err());
        assert!(cusum_at(&y, 0, 2, 2).is_err());
        assert!(matches!(
            weighted_cusum_at(&y, &[1.0, -1.0, 1.0], 0, 2, 0),
            Err(Error::NonPositiveWeight { index: 1, .. })
        ));
    }

    #[test]
    fn max_contrast_step_and_ties() {
        let y = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let mut c = StandardCusum::new(&y).unwrap();
        let stat = max_contrast(&mut c, 0, 5, WidthKind::IndexWidth).unwrap();
        assert_eq!(stat.argmax, 2);
        // brute force agrees
        let brute = (0..5)
            .map(|b| (b, cusum_at(&y, 0, 5, b).unwrap()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        assert_eq!(brute.0, 2);
        assert_eq!(stat.width, 5.0);

        let mut flat = StandardCusum::new(&[2.0; 5]).unwrap();
        let stat = max_contrast(&mut flat, 1, 4, WidthKind::CumulativeWeight).unwrap();
        assert_eq!(stat.max_value, 0.0);
        assert_eq!(stat.argmax, 1);
        assert_eq!(stat.width, 4.0);
    }

    #[test]
    fn cumulative_width_uses_weights() {
        let mut c = WeightedCusum::new(&[0.0, 1.0, 2.0], &[1.0, 2.0, 4.0]).unwrap();
        let stat = max_contrast(&mut c, 1, 2, WidthKind::CumulativeWeight).unwrap();
        assert_eq!(stat.width, 6.0);
    }

    #[test]
    fn works_in_f32() {
        let v = cusum_at(&[0.0f32, 0.0, 2.0, 2.0], 0, 3, 1).unwrap();
        assert!((v - 2.0).abs() < 1e-6);
    }

    fn series_and_weights() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..40).prop_flat_map(|n| {
            (
                prop::collection::vec(-5.0f64..5.0, n),
                prop::collection::vec(0.05f64..20.0, n),
            )
        })
    }

    fn triplet(n: usize) -> impl Strategy<Value = (usize, usize, usize)> {
        (0..n - 1)
            .prop_flat_map(move |s| (Just(s), s + 1..n))
            .prop_flat_map(|(s, e)| (Just(s), Just(e), s..e))
    }

    proptest! {
        #[test]
        fn prefix_matches_naive(
            (y, w, (s, e, b)) in series_and_weights()
                .prop_flat_map(|(y, w)| { let n = y.len(); (Just(y), Just(w), triplet(n)) })
        ) {
            let fast = weighted_cusum_at(&y, &w, s, e, b).unwrap();
            let slow = naive(&y, &w, s, e, b);
            prop_assert!((fast - slow).abs() <= 1e-10 * slow.abs().max(1e-3));
        }

        #[test]
        fn negation_shift_and_scale(
            (y, w, (s, e, b)) in series_and_weights()
                .prop_flat_map(|(y, w)| { let n = y.len(); (Just(y), Just(w), triplet(n)) }),
            shift in -10.0f64..10.0,
            scale in 0.1f64..10.0,
        ) {
            let base = weighted_cusum_at(&y, &w, s, e, b).unwrap();
            let neg: Vec<f64> = y.iter().map(|v| -v).collect();
            let shifted: Vec<f64> = y.iter().map(|v| v + shift).collect();
            let scaled: Vec<f64> = y.iter().map(|v| v * scale).collect();
            let tol = 1e-9 * (1.0 + base.abs());
            prop_assert!((weighted_cusum_at(&neg, &w, s, e, b).unwrap() - base).abs() <= tol);
            prop_assert!((weighted_cusum_at(&shifted, &w, s, e, b).unwrap() - base).abs() <= tol);
            prop_assert!(
                (weighted_cusum_at(&scaled, &w, s, e, b).unwrap() - scale * base).abs() <= tol * scale
            );
            let c = cusum_at(&y, s, e, b).unwrap();
            prop_assert!((cusum_at(&neg, s, e, b).unwrap() - c).abs() <= 1e-9 * (1.0 + c));
            prop_assert!((cusum_at(&shifted, s, e, b).unwrap() - c).abs() <= 1e-9 * (1.0 + c));
        }

        #[test]
        fn uniform_weight_reduction(
            (y, (s, e, b)) in (2usize..60)
                .prop_flat_map(|n| (prop::collection::vec(-5.0f64..5.0, n), triplet(n))),
            c in 0.01f64..100.0,
        ) {
            let w = vec![c; y.len()];
            let weighted = weighted_cusum_at(&y, &w, s, e, b).unwrap();
            let standard = cusum_at(&y, s, e, b).unwrap();
            prop_assert!((weighted - c.sqrt() * standard).abs() <= 1e-12 * weighted.abs().max(1e-3));
        }

        #[test]
        fn additive_scorer_equivalence(
            (y, w, (s, e, b)) in series_and_weights()
                .prop_flat_map(|(y, w)| { let n = y.len(); (Just(y), Just(w), triplet(n)) })
        ) {
            let g = generalized_cusum_at(&w, AdditiveScorer::new(&y, &w).unwrap(), s, e, b).unwrap();
            let wc = weighted_cusum_at(&y, &w, s, e, b).unwrap();
            prop_assert!((g - wc).abs() <= 1e-9 * (1.0 + wc));
        }

        /// One jump inside [s, e]: the weighted maximiser is the jump.
        #[test]
        fn noiseless_maximiser_is_the_jump(
            (n, tau, w) in (2usize..13).prop_flat_map(|n| (
                Just(n),
                0..n - 1,
                prop::collection::vec(0.1f64..10.0, n),
            )),
            kappa in 0.1f64..5.0,
        ) {
            let y: Vec<f64> = (0..n).map(|i| if i <= tau { 0.0 } else { kappa }).collect();
            let mut c = WeightedCusum::new(&y, &w).unwrap();
            for s in 0..=tau {
                for e in tau + 1..n {
                    let stat = max_contrast(&mut c, s, e, WidthKind::IndexWidth).unwrap();
                    let at_tau = c.value(s, e, tau).unwrap();
                    prop_assert!((stat.max_value - at_tau).abs() <= 1e-12 * at_tau);
                    prop_assert_eq!(stat.argmax, tau);
                    let eta = c.mass(s, tau).min(c.mass(tau + 1, e));
                    prop_assert!(at_tau >= eta.sqrt() * kappa / 2f64.sqrt() * (1.0 - 1e-12));
                    prop_assert!(at_tau <= eta.sqrt() * kappa * (1.0 + 1e-12));
                }
            }
        }
    }
}
