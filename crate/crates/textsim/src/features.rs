//! Feature extraction: whitespace tokens, character n-grams, token n-shingles.

/// Sentinel used for n-gram padding; never produced by normalization and
/// (being a Unicode noncharacter) not expected in post content.
pub const PAD: char = '\u{FFFF}';

/// What a set or profile metric counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    Token,
    NGram(usize),
    Shingle(usize),
}

/// Maximal non-whitespace runs in order.
pub fn tokenize(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

/// All character n-grams. Unpadded input shorter than `n` yields nothing;
/// padding adds `n - 1` sentinels on each side first.
pub fn ngrams(s: &str, n: usize, padded: bool) -> Vec<String> {
    assert!(n > 0, "n-gram size must be positive");
    let mut chars: Vec<char> = Vec::with_capacity(s.len() + 2 * n);
    if padded {
        chars.extend(std::iter::repeat_n(PAD, n - 1));
    }
    chars.extend(s.chars());
    if padded {
        chars.extend(std::iter::repeat_n(PAD, n - 1));
    }
    if chars.len() < n {
        return Vec::new();
    }
    chars.windows(n).map(|w| w.iter().collect()).collect()
}

/// Consecutive token n-tuples.
pub fn shingles<S: AsRef<str>>(tokens: &[S], n: usize) -> Vec<Vec<String>> {
    assert!(n > 0, "shingle size must be positive");
    if tokens.len() < n {
        return Vec::new();
    }
    tokens
        .windows(n)
        .map(|w| w.iter().map(|t| t.as_ref().to_owned()).collect())
        .collect()
}

/// Extracts features as flat strings. Shingles are joined with a single
/// space, which cannot occur inside a token.
pub fn extract(feature: Feature, s: &str, padded: bool) -> Vec<String> {
    match feature {
        Feature::Token => tokenize(s).into_iter().map(str::to_owned).collect(),
        Feature::NGram(n) => ngrams(s, n, padded),
        Feature::Shingle(n) => shingles(&tokenize(s), n).into_iter().map(|sh| sh.join(" ")).collect(),
    }
}
