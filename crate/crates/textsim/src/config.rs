//! Metric configurations, their camel-case names, and the evaluated catalog.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::features::Feature;
use crate::profile::{ProfileDistance, Weighting};
use crate::set::SetCoefficient;
use crate::winnowing::FingerprintComparison;
use crate::SimilarityError;

pub const NGRAM_SIZES: [usize; 4] = [2, 3, 4, 5];
pub const SHINGLE_SIZES: [usize; 2] = [2, 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Edit,
    Set,
    Profile,
    Fingerprint,
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EditMetric {
    Levenshtein,
    DamerauLevenshtein,
    OptimalAlignment,
    LongestCommonSubsequence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EqualityKind {
    /// Whole-string equality.
    Equal,
    /// Equality of the whitespace-token sequences.
    TokenEqual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Edit(EditMetric),
    Set {
        feature: Feature,
        coefficient: SetCoefficient,
    },
    Profile {
        feature: Feature,
        distance: ProfileDistance,
        weighting: Weighting,
    },
    Fingerprint {
        n: usize,
        comparison: FingerprintComparison,
    },
    Equal(EqualityKind),
}

/// One similarity metric variant: base metric plus normalization and padding flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MetricConfig {
    pub metric: Metric,
    pub normalized: bool,
    /// Only meaningful for n-gram features.
    pub padded: bool,
}

impl MetricConfig {
    pub const fn new(metric: Metric, normalized: bool) -> Self {
        MetricConfig {
            metric,
            normalized,
            padded: false,
        }
    }

    pub fn family(&self) -> Family {
        match self.metric {
            Metric::Edit(_) => Family::Edit,
            Metric::Set { .. } => Family::Set,
            Metric::Profile { .. } => Family::Profile,
            Metric::Fingerprint { .. } => Family::Fingerprint,
            Metric::Equal(_) => Family::Equal,
        }
    }

    /// The n-gram or shingle size, if the metric works on either.
    pub fn n(&self) -> Option<usize> {
        match self.metric {
            Metric::Set { feature, .. } | Metric::Profile { feature, .. } => match feature {
                Feature::Token => None,
                Feature::NGram(n) | Feature::Shingle(n) => Some(n),
            },
            Metric::Fingerprint { n, .. } => Some(n),
            _ => None,
        }
    }

    pub fn feature(&self) -> Option<Feature> {
        match self.metric {
            Metric::Set { feature, .. } | Metric::Profile { feature, .. } => Some(feature),
            Metric::Fingerprint { n, .. } => Some(Feature::NGram(n)),
            _ => None,
        }
    }

    /// Edit and token-based metrics apply to inputs of any length, which makes
    /// them usable as backups.
    pub fn always_applicable(&self) -> bool {
        match self.metric {
            Metric::Edit(_) | Metric::Equal(_) => true,
            Metric::Set { feature, .. } | Metric::Profile { feature, .. } => {
                feature == Feature::Token || (self.padded && matches!(feature, Feature::NGram(_)))
            }
            Metric::Fingerprint { .. } => false,
        }
    }

    /// Checks the structural invariants of a configuration.
    pub fn validate(&self) -> Result<(), SimilarityError> {
        let bad = |why: &str| Err(SimilarityError::InvalidConfig(format!("{self:?}: {why}")));
        if let Some(feature) = self.feature() {
            match feature {
                Feature::NGram(n) if !NGRAM_SIZES.contains(&n) => return bad("n-gram size"),
                Feature::Shingle(n) if !SHINGLE_SIZES.contains(&n) => return bad("shingle size"),
                _ => {}
            }
        }
        let padding_allowed = matches!(
            self.metric,
            Metric::Set {
                feature: Feature::NGram(_),
                ..
            } | Metric::Profile {
                feature: Feature::NGram(_),
                ..
            }
        );
        if self.padded && !padding_allowed {
            return bad("padding only applies to n-gram set/profile metrics");
        }
        if let Metric::Profile {
            distance: ProfileDistance::Manhattan,
            weighting,
            ..
        } = self.metric
        {
            if weighting != Weighting::TermFrequency {
                return bad("manhattan profiles use term frequencies");
            }
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        let mut name = match self.metric {
            Metric::Edit(e) => match e {
                EditMetric::Levenshtein => "levenshtein",
                EditMetric::DamerauLevenshtein => "damerauLevenshtein",
                EditMetric::OptimalAlignment => "optimalAlignment",
                EditMetric::LongestCommonSubsequence => "longestCommonSubsequence",
            }
            .to_string(),
            Metric::Set { feature, coefficient } => {
                let f = feature_word(feature);
                let coef = match coefficient {
                    SetCoefficient::Jaccard => "Jaccard",
                    SetCoefficient::Dice => "Dice",
                    SetCoefficient::Overlap => "Overlap",
                };
                format!("{}{coef}", lower_first(&f))
            }
            Metric::Profile { feature, distance, .. } => {
                let d = match distance {
                    ProfileDistance::Cosine => "cosine",
                    ProfileDistance::Manhattan => "manhattan",
                };
                format!("{d}{}", feature_word(feature))
            }
            Metric::Fingerprint { n, comparison } => {
                let c = match comparison {
                    FingerprintComparison::Jaccard => "Jaccard",
                    FingerprintComparison::Dice => "Dice",
                    FingerprintComparison::Overlap => "Overlap",
                    FingerprintComparison::Lcs => "LongestCommonSubsequence",
                    FingerprintComparison::OptimalAlignment => "OptimalAlignment",
                };
                format!("winnowing{}Gram{c}", number_word(n))
            }
            Metric::Equal(EqualityKind::Equal) => "equal".to_string(),
            Metric::Equal(EqualityKind::TokenEqual) => "tokenEqual".to_string(),
        };
        if self.normalized {
            name.push_str("Normalized");
        }
        if let Metric::Profile {
            distance: ProfileDistance::Cosine,
            weighting,
            ..
        } = self.metric
        {
            name.push_str(match weighting {
                Weighting::Bool => "Bool",
                Weighting::TermFrequency => "TermFrequency",
                Weighting::NormalizedTermFrequency => "NormalizedTermFrequency",
            });
        }
        if self.padded {
            name.push_str("Padding");
        }
        name
    }
}

impl fmt::Display for MetricConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for MetricConfig {
    type Err = SimilarityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        registry()
            .get(s)
            .copied()
            .ok_or_else(|| SimilarityError::UnknownMetric(s.to_string()))
    }
}

fn number_word(n: usize) -> &'static str {
    match n {
        2 => "Two",
        3 => "Three",
        4 => "Four",
        5 => "Five",
        _ => "N",
    }
}

fn feature_word(feature: Feature) -> String {
    match feature {
        Feature::Token => "Token".to_string(),
        Feature::NGram(n) => format!("{}Gram", number_word(n)),
        Feature::Shingle(n) => format!("{}Shingle", number_word(n)),
    }
}

fn lower_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn all_features() -> Vec<Feature> {
    let mut v = vec![Feature::Token];
    v.extend(NGRAM_SIZES.iter().map(|&n| Feature::NGram(n)));
    v.extend(SHINGLE_SIZES.iter().map(|&n| Feature::Shingle(n)));
    v
}

const EDIT_METRICS: [EditMetric; 4] = [
    EditMetric::Levenshtein,
    EditMetric::DamerauLevenshtein,
    EditMetric::OptimalAlignment,
    EditMetric::LongestCommonSubsequence,
];
const SET_COEFFICIENTS: [SetCoefficient; 3] = [SetCoefficient::Jaccard, SetCoefficient::Dice, SetCoefficient::Overlap];
const WEIGHTINGS: [Weighting; 3] = [
    Weighting::Bool,
    Weighting::TermFrequency,
    Weighting::NormalizedTermFrequency,
];
const FINGERPRINT_COMPARISONS: [FingerprintComparison; 5] = [
    FingerprintComparison::Jaccard,
    FingerprintComparison::Dice,
    FingerprintComparison::Overlap,
    FingerprintComparison::Lcs,
    FingerprintComparison::OptimalAlignment,
];

/// The 134 evaluated metric variants, in a fixed order.
///
/// * edit: four distances, raw and normalized (8)
/// * set: token and shingle coefficients raw and normalized, n-gram
///   coefficients raw, normalized, and normalized with padding (54)
/// * profile: cosine with three weightings and Manhattan, on normalized input (28)
/// * fingerprint: Winnowing with five comparisons, raw and normalized (40)
/// * equal: `equal` and `tokenEqual`, raw and normalized (4)
pub fn enumerate_configs() -> Vec<MetricConfig> {
    let mut out = Vec::with_capacity(134);
    for e in EDIT_METRICS {
        for normalized in [false, true] {
            out.push(MetricConfig::new(Metric::Edit(e), normalized));
        }
    }
    for feature in all_features() {
        for coefficient in SET_COEFFICIENTS {
            let metric = Metric::Set { feature, coefficient };
            out.push(MetricConfig::new(metric, false));
            out.push(MetricConfig::new(metric, true));
            if matches!(feature, Feature::NGram(_)) {
                out.push(MetricConfig {
                    metric,
                    normalized: true,
                    padded: true,
                });
            }
        }
    }
    for feature in all_features() {
        for weighting in WEIGHTINGS {
            out.push(MetricConfig::new(
                Metric::Profile {
                    feature,
                    distance: ProfileDistance::Cosine,
                    weighting,
                },
                true,
            ));
        }
        out.push(MetricConfig::new(
            Metric::Profile {
                feature,
                distance: ProfileDistance::Manhattan,
                weighting: Weighting::TermFrequency,
            },
            true,
        ));
    }
    for n in NGRAM_SIZES {
        for comparison in FINGERPRINT_COMPARISONS {
            for normalized in [false, true] {
                out.push(MetricConfig::new(Metric::Fingerprint { n, comparison }, normalized));
            }
        }
    }
    for kind in [EqualityKind::Equal, EqualityKind::TokenEqual] {
        for normalized in [false, true] {
            out.push(MetricConfig::new(Metric::Equal(kind), normalized));
        }
    }
    out
}

/// Every nameable configuration: the catalog plus unnormalized padded n-gram
/// sets. Unnormalized profiles are left out on purpose: their names would
/// collide (`cosineTokenNormalizedTermFrequency` would denote both normalized
/// TF and unnormalized BM15).
pub fn all_variants() -> Vec<MetricConfig> {
    let mut out = enumerate_configs();
    for n in NGRAM_SIZES {
        for coefficient in SET_COEFFICIENTS {
            out.push(MetricConfig {
                metric: Metric::Set {
                    feature: Feature::NGram(n),
                    coefficient,
                },
                normalized: false,
                padded: true,
            });
        }
    }
    out
}

fn registry() -> &'static HashMap<String, MetricConfig> {
    static REGISTRY: OnceLock<HashMap<String, MetricConfig>> = OnceLock::new();
    REGISTRY.get_or_init(|| all_variants().into_iter().map(|c| (c.name(), c)).collect())
}

/// Named configurations used as defaults by the matching strategy.
pub mod named {
    use super::*;

    pub const MANHATTAN_FOUR_GRAM_NORMALIZED: MetricConfig = MetricConfig::new(
        Metric::Profile {
            feature: Feature::NGram(4),
            distance: ProfileDistance::Manhattan,
            weighting: Weighting::TermFrequency,
        },
        true,
    );

    pub const WINNOWING_FOUR_GRAM_DICE_NORMALIZED: MetricConfig = MetricConfig::new(
        Metric::Fingerprint {
            n: 4,
            comparison: FingerprintComparison::Dice,
        },
        true,
    );

    pub const COSINE_TOKEN_NORMALIZED_TERM_FREQUENCY: MetricConfig = MetricConfig::new(
        Metric::Profile {
            feature: Feature::Token,
            distance: ProfileDistance::Cosine,
            weighting: Weighting::TermFrequency,
        },
        true,
    );

    pub const EQUAL: MetricConfig = MetricConfig::new(Metric::Equal(EqualityKind::Equal), false);
}

#[cfg(feature = "serde")]
impl serde::Serialize for MetricConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for MetricConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn catalog_has_134_unique_valid_entries() {
        let all = enumerate_configs();
        assert_eq!(all.len(), 134);
        let names: HashSet<String> = all.iter().map(|c| c.name()).collect();
        assert_eq!(names.len(), 134);
        for c in &all {
            c.validate().unwrap();
        }
    }

    #[test]
    fn family_counts() {
        let all = enumerate_configs();
        let count = |f: Family| all.iter().filter(|c| c.family() == f).count();
        assert_eq!(count(Family::Edit), 8);
        assert_eq!(count(Family::Set), 54);
        assert_eq!(count(Family::Profile), 28);
        assert_eq!(count(Family::Fingerprint), 40);
        assert_eq!(count(Family::Equal), 4);
    }

    #[test]
    fn names_round_trip() {
        for c in all_variants() {
            assert_eq!(c.name().parse::<MetricConfig>().unwrap(), c, "{}", c.name());
        }
    }

    #[test]
    fn named_defaults() {
        assert_eq!(
            named::MANHATTAN_FOUR_GRAM_NORMALIZED.name(),
            "manhattanFourGramNormalized"
        );
        assert_eq!(
            named::WINNOWING_FOUR_GRAM_DICE_NORMALIZED.name(),
            "winnowingFourGramDiceNormalized"
        );
        assert_eq!(
            named::COSINE_TOKEN_NORMALIZED_TERM_FREQUENCY.name(),
            "cosineTokenNormalizedTermFrequency"
        );
        let all = enumerate_configs();
        assert!(all.contains(&named::MANHATTAN_FOUR_GRAM_NORMALIZED));
        assert!(all.contains(&named::WINNOWING_FOUR_GRAM_DICE_NORMALIZED));
        assert!(all.contains(&named::COSINE_TOKEN_NORMALIZED_TERM_FREQUENCY));
    }

    #[test]
    fn sample_names() {
        let names: HashSet<String> = enumerate_configs().iter().map(|c| c.name()).collect();
        for n in [
            "levenshteinNormalized",
            "twoGramJaccard",
            "fiveGramOverlapNormalizedPadding",
            "threeShingleDiceNormalized",
            "tokenJaccard",
            "cosineTwoShingleNormalizedBool",
            "cosineTokenNormalizedNormalizedTermFrequency",
            "manhattanTokenNormalized",
            "winnowingTwoGramLongestCommonSubsequence",
            "winnowingFiveGramOptimalAlignmentNormalized",
            "tokenEqualNormalized",
        ] {
            assert!(names.contains(n), "{n}");
        }
    }

    #[test]
    fn n_present_iff_windowed() {
        for c in enumerate_configs() {
            let windowed = matches!(c.feature(), Some(Feature::NGram(_)) | Some(Feature::Shingle(_)));
            assert_eq!(c.n().is_some(), windowed, "{c}");
        }
    }

    #[test]
    fn unknown_name() {
        assert!("nonsenseMetric".parse::<MetricConfig>().is_err());
    }
}
