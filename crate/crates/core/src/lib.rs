//! Change-point segmentation of documents scored sentence by sentence with an
//! LLM-text detector.
//!
//! A [`ScoreSeries`] is split by the narrowest-over-threshold procedure with a
//! standard, weighted or generalized CUSUM contrast ([`vcp`], [`wcp`], [`gcp`]),
//! and the resulting segments are labeled by one-dimensional k-means.
//! Everything numeric is generic over [`Real`]; aliases below fix `f64` or `f32`.

pub mod cli;
pub mod cusum;
pub mod error;
pub mod harness;
pub mod io;
pub mod labeling;
pub mod metrics;
pub mod not_engine;
pub mod scalar;
pub mod score_model;
pub mod scorer;
pub mod synthgen;

pub use cusum::{
    cusum_at, generalized_cusum_at, max_contrast, weighted_cusum_at, Contrast, ContrastKind,
    GeneralizedCusum, IntervalStat, StandardCusum, WeightedCusum, WidthKind,
};
pub use error::{Error, Result};
pub use labeling::{cluster_1d, label_document, segment_scores, ClusterResult};
pub use metrics::{
    count_error, default_window, evaluate, weighted_localization_error, window_diff, EvalReport,
    LocalizationError,
};
pub use not_engine::{
    default_threshold, gcp, not_segment, segment_series, segment_with_scorer, vcp, wcp, NotConfig,
    SegmenterRun,
};
pub use scalar::Real;
pub use score_model::{
    resolve_weights, LabeledDocument, ScoreSeries, Segmentation, SentenceRecord, WeightScheme,
};
pub use scorer::{AdditiveScorer, CachedScorer, FnScorer, SegmentScorer};
pub use synthgen::{generate, snr_diagnostics, SnrDiagnostics, SyntheticSpec};

pub type Series = ScoreSeries<f64>;
pub type SeriesF32 = ScoreSeries<f32>;
pub type Record = SentenceRecord<f64>;
pub type RecordF32 = SentenceRecord<f32>;
pub type Run = SegmenterRun<f64>;
pub type RunF32 = SegmenterRun<f32>;
pub type Labeled = LabeledDocument<f64>;
pub type LabeledF32 = LabeledDocument<f32>;
