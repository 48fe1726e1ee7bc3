//! Vector-space profiles over tokens, n-grams or shingles.

use std::collections::HashMap;

/// BM15 saturation constant.
pub const BM15_K: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Weighting {
    /// 1 if the feature occurs, else absent.
    Bool,
    /// Raw occurrence count.
    TermFrequency,
    /// BM15-damped occurrence count.
    NormalizedTermFrequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProfileDistance {
    Cosine,
    Manhattan,
}

/// BM15 weight `f (k + 1) / (f + k)`; strictly increasing in `f`, bounded by `k + 1`.
pub fn bm15(frequency: f64) -> f64 {
    frequency * (BM15_K + 1.0) / (frequency + BM15_K)
}

/// Sparse feature weight vector. Absent features have weight 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Profile {
    weights: HashMap<String, f64>,
}

impl Profile {
    pub fn from_features<I>(features: I, weighting: Weighting) -> Self
    where
        I: IntoIterator<Item = String>,
    {
        let mut counts: HashMap<String, f64> = HashMap::new();
        for f in features {
            *counts.entry(f).or_insert(0.0) += 1.0;
        }
        for w in counts.values_mut() {
            *w = match weighting {
                Weighting::Bool => 1.0,
                Weighting::TermFrequency => *w,
                Weighting::NormalizedTermFrequency => bm15(*w),
            };
        }
        Profile { weights: counts }
    }

    pub fn from_weights(weights: HashMap<String, f64>) -> Self {
        Profile { weights }
    }

    pub fn weight(&self, feature: &str) -> f64 {
        self.weights.get(feature).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(k, v)| (k.as_str(), *v))
    }

    fn l1(&self) -> f64 {
        self.weights.values().map(|w| w.abs()).sum()
    }

    fn l2(&self) -> f64 {
        self.weights.values().map(|w| w * w).sum::<f64>().sqrt()
    }
}

/// Similarity of two profiles in `[0, 1]`.
///
/// Cosine is the usual normalized dot product. Manhattan maps the L1 distance
/// to `1 - L1(p, q) / (|p|_1 + |q|_1)`, which is 1 iff the profiles coincide and 0
/// iff their supports are disjoint.
pub fn profile_similarity(kind: ProfileDistance, p: &Profile, q: &Profile) -> f64 {
    match (p.is_empty(), q.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    match kind {
        ProfileDistance::Cosine => {
            let (small, large) = if p.len() <= q.len() { (p, q) } else { (q, p) };
            let dot: f64 = small.iter().map(|(f, w)| w * large.weight(f)).sum();
            let denom = p.l2() * q.l2();
            if denom == 0.0 {
                0.0
            } else {
                (dot / denom).clamp(0.0, 1.0)
            }
        }
        ProfileDistance::Manhattan => {
            let mut distance: f64 = p.iter().map(|(f, w)| (w - q.weight(f)).abs()).sum();
            distance += q
                .iter()
                .filter(|(f, _)| !p.weights.contains_key(*f))
                .map(|(_, w)| w.abs())
                .sum::<f64>();
            let total = p.l1() + q.l1();
            if total == 0.0 {
                1.0
            } else {
                (1.0 - distance / total).clamp(0.0, 1.0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(pairs: &[(&str, f64)]) -> Profile {
        Profile::from_weights(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }

    #[test]
    fn hand_vector_arithmetic() {
        let p = profile(&[("a", 1.0)]);
        let q = profile(&[("a", 1.0), ("b", 1.0)]);
        let cos = profile_similarity(ProfileDistance::Cosine, &p, &q);
        assert!((cos - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        let man = profile_similarity(ProfileDistance::Manhattan, &p, &q);
        assert!((man - (1.0 - 1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn identical_and_disjoint() {
        let p = profile(&[("a", 2.0), ("b", 1.0)]);
        let q = profile(&[("c", 1.0)]);
        for kind in [ProfileDistance::Cosine, ProfileDistance::Manhattan] {
            assert!((profile_similarity(kind, &p, &p) - 1.0).abs() < 1e-12);
            assert_eq!(profile_similarity(kind, &p, &q), 0.0);
            assert_eq!(profile_similarity(kind, &Profile::default(), &Profile::default()), 1.0);
            assert_eq!(profile_similarity(kind, &p, &Profile::default()), 0.0);
        }
    }

    #[test]
    fn weighting_schemes() {
        let feats = || ["x", "x", "x", "y"].iter().map(|s| s.to_string());
        let b = Profile::from_features(feats(), Weighting::Bool);
        assert_eq!(b.weight("x"), 1.0);
        let tf = Profile::from_features(feats(), Weighting::TermFrequency);
        assert_eq!(tf.weight("x"), 3.0);
        assert_eq!(tf.weight("y"), 1.0);
        let bm = Profile::from_features(feats(), Weighting::NormalizedTermFrequency);
        assert!((bm.weight("x") - 3.0 * 2.5 / 4.5).abs() < 1e-12);
        assert!((bm.weight("y") - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bm15_monotone_and_bounded() {
        let mut last = 0.0;
        for f in 1..10_000 {
            let w = bm15(f as f64);
            assert!(w > last);
            assert!(w < BM15_K + 1.0);
            last = w;
        }
    }
}
