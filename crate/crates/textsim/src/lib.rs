//! String similarity metrics for matching versions of text and code blocks.
//!
//! Five families are provided: edit-based (Levenshtein, Damerau-Levenshtein,
//! optimal alignment, LCS), set-based (Jaccard, Dice and overlap coefficients on
//! tokens, character n-grams or token shingles), profile-based (cosine and
//! Manhattan over bool, TF or BM15-weighted vectors), fingerprint-based
//! (Winnowing) and plain equality. [`enumerate_configs`] lists the 134
//! evaluated variants; each serializes to a camel-case name such as
//! `winnowingFourGramDiceNormalized`.
//!
//! Every function is pure and operates on Unicode scalar values.

pub mod config;
pub mod edit;
pub mod features;
pub mod metric;
pub mod normalize;
pub mod profile;
pub mod set;
pub mod winnowing;

pub use config::{all_variants, enumerate_configs, named, EditMetric, EqualityKind, Family, Metric, MetricConfig};
pub use edit::{edit_distance, edit_distance_str, lcs_length, EditKind};
pub use features::{ngrams, shingles, tokenize, Feature};
pub use metric::{applicable, similarity, SimilarityScore};
pub use normalize::{normalize, NormalizationKind};
pub use profile::{profile_similarity, Profile, ProfileDistance, Weighting};
pub use set::{set_coefficient, SetCoefficient};
pub use winnowing::{fingerprint_similarity, winnow, Fingerprint, FingerprintComparison};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimilarityError {
    /// The inputs are too short for the metric; use a backup metric.
    #[error("metric {metric} is not applicable to these inputs; use the backup metric")]
    NotApplicable { metric: String },
    #[error("unknown metric name: {0}")]
    UnknownMetric(String),
    #[error("invalid metric configuration: {0}")]
    InvalidConfig(String),
}
