//! Piecewise-Gaussian synthetic score series and signal-to-noise diagnostics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::score_model::{ScoreSeries, Segmentation, SentenceRecord};

/// Ground truth for one synthetic document.
///
/// Segments alternate between the LLM mean `mu_m` (first segment) and the
/// human mean `mu_h`. `sigma[i]` is the noise standard deviation of sentence `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub change_points: Vec<usize>,
    pub mu_h: f64,
    pub mu_m: f64,
    pub sigma: Vec<f64>,
    pub token_counts: Option<Vec<u32>>,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(
        n: usize,
        change_points: Vec<usize>,
        mu_h: f64,
        mu_m: f64,
        sigma: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        let spec = Self {
            n,
            change_points,
            mu_h,
            mu_m,
            sigma,
            token_counts: None,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn homoscedastic(
        n: usize,
        change_points: Vec<usize>,
        mu_h: f64,
        mu_m: f64,
        sigma: f64,
        seed: u64,
    ) -> Result<Self> {
        Self::new(n, change_points, mu_h, mu_m, vec![sigma; n], seed)
    }

    /// `sigma[i] = pattern[i % pattern.len()]`.
    pub fn periodic(
        n: usize,
        change_points: Vec<usize>,
        mu_h: f64,
        mu_m: f64,
        pattern: &[f64],
        seed: u64,
    ) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::InvalidConfig("empty sigma pattern".into()));
        }
        let sigma = (0..n).map(|i| pattern[i % pattern.len()]).collect();
        Self::new(n, change_points, mu_h, mu_m, sigma, seed)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn with_token_counts(mut self, counts: Vec<u32>) -> Result<Self> {
        if counts.len() != self.n || counts.contains(&0) {
            return Err(Error::InvalidConfig(
                "token counts must be positive, one per sentence".into(),
            ));
        }
        self.token_counts = Some(counts);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig("synthetic series needs n >= 2".into()));
        }
        if self.sigma.len() != self.n {
            return Err(Error::InvalidConfig(format!(
                "{} sigmas for n = {}",
                self.sigma.len(),
                self.n
            )));
        }
        if let Some(i) = self.sigma.iter().position(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(Error::InvalidConfig(format!("sigma[{i}] must be positive")));
        }
        if !(self.mu_h.is_finite() && self.mu_m.is_finite()) {
            return Err(Error::InvalidConfig("means must be finite".into()));
        }
        Segmentation::new(self.change_points.clone(), self.n).map(|_| ())
    }

    pub fn kappa(&self) -> f64 {
        (self.mu_m - self.mu_h).abs()
    }

    pub fn truth(&self) -> Segmentation {
        Segmentation::new(self.change_points.clone(), self.n).expect("validated spec")
    }

    /// Mean of every sentence.
    pub fn means(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n);
        for (j, (a, b)) in self.truth().segments().into_iter().enumerate() {
            let mu = if j % 2 == 0 { self.mu_m } else { self.mu_h };
            out.extend(std::iter::repeat_n(mu, b - a + 1));
        }
        out
    }

    /// `1 / sigma_i^2`.
    pub fn inverse_variances(&self) -> Vec<f64> {
        self.sigma.iter().map(|s| 1.0 / (s * s)).collect()
    }
}

/// Draws `Y_i = mu(i) + sigma_i * xi_i` with i.i.d. standard normal `xi_i`.
/// The variance estimate of each record is the true `sigma_i^2`.
pub fn generate<T: Real>(spec: &SyntheticSpec) -> Result<ScoreSeries<T>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let records = spec
        .means()
        .into_iter()
        .zip(&spec.sigma)
        .enumerate()
        .map(|(i, (mu, &sd))| {
            let xi: f64 = StandardNormal.sample(&mut rng);
            let mut rec =
                SentenceRecord::new(i, T::lit(mu + sd * xi)).with_variance(T::lit(sd * sd));
            if let Some(tc) = &spec.token_counts {
                rec = rec.with_tokens(tc[i]);
            }
            rec
        })
        .collect();
    ScoreSeries::new(records)
}

/// Both sides of the two signal-to-noise conditions, with the absolute
/// constant taken as one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrDiagnostics {
    /// Smallest segment length.
    pub delta1: usize,
    /// Smallest per-segment sum of `1 / sigma_i^2`.
    pub delta2: f64,
    /// `kappa^2 * delta1`
    pub snr1_lhs: f64,
    /// `sigma_max^2 * ln(N / delta)`
    pub snr1_rhs: f64,
    /// `kappa^2 * delta2`
    pub snr2_lhs: f64,
    /// `ln(N / delta)`
    pub snr2_rhs: f64,
}

impl SnrDiagnostics {
    pub fn snr1_ratio(&self) -> f64 {
        self.snr1_lhs / self.snr1_rhs
    }

    pub fn snr2_ratio(&self) -> f64 {
        self.snr2_lhs / self.snr2_rhs
    }
}

pub fn snr_diagnostics(spec: &SyntheticSpec, delta: f64) -> Result<SnrDiagnostics> {
    spec.validate()?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let inv = spec.inverse_variances();
    let segments = spec.truth().segments();
    let delta1 = segments
        .iter()
        .map(|&(a, b)| b - a + 1)
        .min()
        .unwrap_or(spec.n);
    let delta2 = segments
        .iter()
        .map(|&(a, b)| inv[a..=b].iter().sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let sigma_max2 = spec.sigma.iter().map(|s| s * s).fold(0.0, f64::max);
    let log_term = (spec.n as f64 / delta).ln();
    let k2 = spec.kappa().powi(2);
    Ok(SnrDiagnostics {
        delta1,
        delta2,
        snr1_lhs: k2 * delta1 as f64,
        snr1_rhs: sigma_max2 * log_term,
        snr2_lhs: k2 * delta2,
        snr2_rhs: log_term,
    })
}
