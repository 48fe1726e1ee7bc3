//! Winnowing fingerprints over character n-grams.
//!
//! Every n-gram is hashed with a 64-bit polynomial rolling hash (base
//! [`ROLLING_BASE`], arithmetic mod 2^64) whose value is then passed through the
//! SplitMix64 finalizer so that window minima are not biased towards small
//! code points. In every window of `w` consecutive n-gram hashes the minimum
//! is selected, taking the rightmost one on ties; a position is recorded only
//! once even when it stays minimal over several windows.

use std::collections::HashSet;

use crate::edit::{indel_distance, lcs_length, sim_from_distance};
use crate::set::{set_coefficient, SetCoefficient};

/// Odd 64-bit multiplier of the rolling hash (the 64-bit golden ratio constant).
pub const ROLLING_BASE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FingerprintComparison {
    Jaccard,
    Dice,
    Overlap,
    /// LCS of the hash sequences over the longer length.
    Lcs,
    /// Insertion/deletion alignment of the hash sequences.
    OptimalAlignment,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Fingerprint {
    /// Selected (n-gram start position in chars, hash) pairs in document order.
    selected: Vec<(usize, u64)>,
}

impl Fingerprint {
    pub fn hashes(&self) -> Vec<u64> {
        self.selected.iter().map(|&(_, h)| h).collect()
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.selected.iter().map(|&(p, _)| p)
    }

    pub fn entries(&self) -> &[(usize, u64)] {
        &self.selected
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("empty fingerprint: input too short for the configured n-gram and window size")]
pub struct EmptyFingerprint;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of a single n-gram, computed directly (no rolling).
pub fn ngram_hash(gram: &[char]) -> u64 {
    let raw = gram
        .iter()
        .fold(0u64, |h, &c| h.wrapping_mul(ROLLING_BASE).wrapping_add(c as u64));
    mix(raw)
}

/// Rolling hashes of every n-gram of `chars`, in order.
pub fn rolling_hashes(chars: &[char], n: usize) -> Vec<u64> {
    assert!(n > 0, "n-gram size must be positive");
    if chars.len() < n {
        return Vec::new();
    }
    let top = ROLLING_BASE.wrapping_pow((n - 1) as u32);
    let mut raw = chars[..n]
        .iter()
        .fold(0u64, |h, &c| h.wrapping_mul(ROLLING_BASE).wrapping_add(c as u64));
    let mut out = Vec::with_capacity(chars.len() - n + 1);
    out.push(mix(raw));
    for i in n..chars.len() {
        raw = raw
            .wrapping_sub((chars[i - n] as u64).wrapping_mul(top))
            .wrapping_mul(ROLLING_BASE)
            .wrapping_add(chars[i] as u64);
        out.push(mix(raw));
    }
    out
}

/// Minimum number of characters for a nonempty fingerprint.
pub fn min_input_len(n: usize, w: usize) -> usize {
    n + w - 1
}

/// Winnowing fingerprint of `s` with n-gram size `n` and window `w`.
/// Too-short input yields an empty fingerprint.
pub fn winnow(s: &str, n: usize, w: usize) -> Fingerprint {
    assert!(w > 0, "window size must be positive");
    let chars: Vec<char> = s.chars().collect();
    let hashes = rolling_hashes(&chars, n);
    if hashes.len() < w {
        return Fingerprint::default();
    }
    let mut selected: Vec<(usize, u64)> = Vec::new();
    for start in 0..=hashes.len() - w {
        let window = &hashes[start..start + w];
        let mut best = 0;
        for (i, &h) in window.iter().enumerate() {
            if h <= window[best] {
                best = i;
            }
        }
        let pos = start + best;
        if selected.last().map(|&(p, _)| p) != Some(pos) {
            selected.push((pos, hashes[pos]));
        }
    }
    Fingerprint { selected }
}

/// Compares two nonempty fingerprints.
pub fn fingerprint_similarity(
    kind: FingerprintComparison,
    a: &Fingerprint,
    b: &Fingerprint,
) -> Result<f64, EmptyFingerprint> {
    if a.is_empty() || b.is_empty() {
        return Err(EmptyFingerprint);
    }
    let (ha, hb) = (a.hashes(), b.hashes());
    let set_kind = match kind {
        FingerprintComparison::Jaccard => Some(SetCoefficient::Jaccard),
        FingerprintComparison::Dice => Some(SetCoefficient::Dice),
        FingerprintComparison::Overlap => Some(SetCoefficient::Overlap),
        _ => None,
    };
    Ok(match set_kind {
        Some(coef) => {
            let sa: HashSet<u64> = ha.iter().copied().collect();
            let sb: HashSet<u64> = hb.iter().copied().collect();
            set_coefficient(coef, &sa, &sb)
        }
        None if kind == FingerprintComparison::Lcs => lcs_length(&ha, &hb) as f64 / ha.len().max(hb.len()) as f64,
        None => sim_from_distance(ha.len(), hb.len(), indel_distance(&ha, &hb)),
    })
}
