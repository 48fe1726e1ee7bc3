//! Dispatch from a [`MetricConfig`] to the family pipeline:
//! normalize, extract features, compare.

use std::collections::HashSet;

use crate::config::{EditMetric, EqualityKind, Metric, MetricConfig};
use crate::edit::{self, EditKind};
use crate::features::{self, Feature};
use crate::normalize::{normalize, NormalizationKind};
use crate::profile::{profile_similarity, Profile};
use crate::set::set_coefficient;
use crate::winnowing::{fingerprint_similarity, min_input_len, winnow};
use crate::SimilarityError;

/// A similarity value plus whether the raw inputs were string-equal.
///
/// `is_equal` separates true equality from a metric value of 1 on
/// different inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityScore {
    pub value: f64,
    pub is_equal: bool,
}

fn normalization_for(config: &MetricConfig) -> Option<NormalizationKind> {
    if !config.normalized {
        return None;
    }
    Some(match config.metric {
        Metric::Edit(_) | Metric::Equal(_) => NormalizationKind::Edit,
        Metric::Fingerprint { .. } => NormalizationKind::NGram,
        Metric::Set { feature, .. } | Metric::Profile { feature, .. } => match feature {
            Feature::Token => NormalizationKind::Edit,
            Feature::NGram(_) => NormalizationKind::NGram,
            Feature::Shingle(_) => NormalizationKind::Shingle,
        },
    })
}

/// The string a metric actually compares.
pub fn prepare<'a>(config: &MetricConfig, s: &'a str) -> std::borrow::Cow<'a, str> {
    match normalization_for(config) {
        Some(kind) => std::borrow::Cow::Owned(normalize(kind, s)),
        None => std::borrow::Cow::Borrowed(s),
    }
}

fn long_enough(config: &MetricConfig, prepared: &str) -> bool {
    match config.metric {
        Metric::Edit(_) | Metric::Equal(_) => true,
        Metric::Set { feature, .. } | Metric::Profile { feature, .. } => match feature {
            Feature::Token => true,
            Feature::NGram(_) if config.padded => true,
            Feature::NGram(n) => prepared.chars().count() >= n,
            Feature::Shingle(n) => features::tokenize(prepared).len() >= n,
        },
        Metric::Fingerprint { n, .. } => prepared.chars().count() >= min_input_len(n, n),
    }
}

/// Whether `config` can score this pair; otherwise a backup metric is needed.
pub fn applicable(config: &MetricConfig, a: &str, b: &str) -> bool {
    long_enough(config, &prepare(config, a)) && long_enough(config, &prepare(config, b))
}

/// Similarity of `a` and `b` under `config`, in `[0, 1]`.
pub fn similarity(config: &MetricConfig, a: &str, b: &str) -> Result<SimilarityScore, SimilarityError> {
    let pa = prepare(config, a);
    let pb = prepare(config, b);
    if !long_enough(config, &pa) || !long_enough(config, &pb) {
        return Err(SimilarityError::NotApplicable { metric: config.name() });
    }
    let is_equal = a == b;
    if is_equal {
        return Ok(SimilarityScore { value: 1.0, is_equal });
    }
    let value = score_prepared(config, &pa, &pb)?;
    Ok(SimilarityScore { value, is_equal })
}

fn score_prepared(config: &MetricConfig, a: &str, b: &str) -> Result<f64, SimilarityError> {
    Ok(match config.metric {
        Metric::Edit(kind) => {
            let ca: Vec<char> = a.chars().collect();
            let cb: Vec<char> = b.chars().collect();
            match kind {
                EditMetric::Levenshtein => edit::sim_edit(EditKind::Levenshtein, &ca, &cb),
                EditMetric::DamerauLevenshtein => edit::sim_edit(EditKind::DamerauLevenshtein, &ca, &cb),
                EditMetric::OptimalAlignment => edit::sim_edit(EditKind::OptimalAlignment, &ca, &cb),
                EditMetric::LongestCommonSubsequence => edit::sim_lcs(&ca, &cb),
            }
        }
        Metric::Set { feature, coefficient } => {
            let fa: HashSet<String> = features::extract(feature, a, config.padded).into_iter().collect();
            let fb: HashSet<String> = features::extract(feature, b, config.padded).into_iter().collect();
            set_coefficient(coefficient, &fa, &fb)
        }
        Metric::Profile {
            feature,
            distance,
            weighting,
        } => {
            let pa = Profile::from_features(features::extract(feature, a, config.padded), weighting);
            let pb = Profile::from_features(features::extract(feature, b, config.padded), weighting);
            profile_similarity(distance, &pa, &pb)
        }
        Metric::Fingerprint { n, comparison } => {
            let fa = winnow(a, n, n);
            let fb = winnow(b, n, n);
            fingerprint_similarity(comparison, &fa, &fb)
                .map_err(|_| SimilarityError::NotApplicable { metric: config.name() })?
        }
        Metric::Equal(EqualityKind::Equal) => f64::from(u8::from(a == b)),
        Metric::Equal(EqualityKind::TokenEqual) => f64::from(u8::from(features::tokenize(a) == features::tokenize(b))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::named;

    #[test]
    fn reflexive_on_default_metric() {
        let s = "Some text block with words.";
        let score = similarity(&named::MANHATTAN_FOUR_GRAM_NORMALIZED, s, s).unwrap();
        assert_eq!(score.value, 1.0);
        assert!(score.is_equal);
    }

    #[test]
    fn equal_baseline() {
        let score = similarity(&named::EQUAL, "a", "b").unwrap();
        assert_eq!(score.value, 0.0);
        assert!(!score.is_equal);
    }

    #[test]
    fn winnowing_needs_backup_for_short_input() {
        let err = similarity(
            &named::WINNOWING_FOUR_GRAM_DICE_NORMALIZED,
            "ab",
            "some longer code here",
        )
        .unwrap_err();
        assert!(matches!(err, SimilarityError::NotApplicable { .. }));
        assert!(!applicable(
            &named::WINNOWING_FOUR_GRAM_DICE_NORMALIZED,
            "ab",
            "xyzxyzxyz"
        ));
    }

    #[test]
    fn backup_sees_to_and_to_colon_as_equal() {
        let s = similarity(&named::COSINE_TOKEN_NORMALIZED_TERM_FREQUENCY, "to", "to:").unwrap();
        assert_eq!(s.value, 1.0);
        assert!(!s.is_equal);
    }

    #[test]
    fn token_equal_normalized() {
        let cfg: MetricConfig = "tokenEqualNormalized".parse().unwrap();
        assert_eq!(similarity(&cfg, "A  b", "a b").unwrap().value, 1.0);
        let raw: MetricConfig = "tokenEqual".parse().unwrap();
        assert_eq!(similarity(&raw, "a  b", "a b").unwrap().value, 1.0);
        assert_eq!(similarity(&raw, "A b", "a b").unwrap().value, 0.0);
    }

    #[test]
    fn padded_ngrams_work_on_tiny_input() {
        let cfg: MetricConfig = "fourGramDiceNormalizedPadding".parse().unwrap();
        assert!(applicable(&cfg, "a", "b"));
        let unpadded: MetricConfig = "fourGramDiceNormalized".parse().unwrap();
        assert!(!applicable(&unpadded, "a", "b"));
    }

    #[test]
    fn edit_similarity_kitten() {
        let cfg: MetricConfig = "levenshtein".parse().unwrap();
        let s = similarity(&cfg, "kitten", "sitting").unwrap();
        assert!((s.value - 4.0 / 7.0).abs() < 1e-12);
    }
}
