//! Input normalization for the `...Normalized` metric variants.

/// Characters removed by the edit and n-gram normalizers.
pub const SPECIAL_CHARS: &[char] = &['{', '}', ';', ':', ',', '.'];

/// Which normalizer a metric family uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizationKind {
    /// Lowercase, whitespace runs collapsed to one space, special characters removed.
    /// Also used by token-based metrics.
    Edit,
    /// Lowercase, all whitespace removed, special characters removed.
    NGram,
    /// Lowercase, whitespace unified, everything outside `[a-zA-Z_0-9 ]` removed.
    Shingle,
}

pub fn normalize(kind: NormalizationKind, s: &str) -> String {
    match kind {
        NormalizationKind::Edit => normalize_edit(s),
        NormalizationKind::NGram => normalize_ngram(s),
        NormalizationKind::Shingle => normalize_shingle(s),
    }
}

fn normalize_edit(s: &str) -> String {
    let lower = s.to_lowercase();
    let stripped: String = lower.chars().filter(|c| !SPECIAL_CHARS.contains(c)).collect();
    collapse_whitespace(&stripped)
}

fn normalize_ngram(s: &str) -> String {
    s.to_lowercase()
        .chars()
        .filter(|c| !c.is_whitespace() && !SPECIAL_CHARS.contains(c))
        .collect()
}

fn normalize_shingle(s: &str) -> String {
    let lower = s.to_lowercase();
    let unified: String = lower
        .chars()
        .map(|c| if c.is_whitespace() { ' ' } else { c })
        .filter(|&c| c == ' ' || c == '_' || c.is_ascii_alphanumeric())
        .collect();
    collapse_whitespace(&unified)
}

/// Collapses every whitespace run to a single space; leading and trailing
/// whitespace is kept as one space so word boundaries stay visible to edit metrics.
fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_ws = false;
    for c in s.chars() {
        if c.is_whitespace() {
            if !in_ws {
                out.push(' ');
            }
            in_ws = true;
        } else {
            out.push(c);
            in_ws = false;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ngram_strips_colon() {
        assert_eq!(normalize(NormalizationKind::NGram, "to:"), "to");
        assert_eq!(normalize(NormalizationKind::NGram, "A b{};"), "ab");
    }

    #[test]
    fn edit_unifies_whitespace() {
        assert_eq!(normalize(NormalizationKind::Edit, "A  B\tC"), "a b c");
        assert_eq!(normalize(NormalizationKind::Edit, "to:"), "to");
        assert_eq!(normalize(NormalizationKind::Edit, "x,\n\n y."), "x y");
    }

    #[test]
    fn shingle_keeps_word_chars() {
        assert_eq!(normalize(NormalizationKind::Shingle, "foo-bar baz!"), "foobar baz");
        assert_eq!(normalize(NormalizationKind::Shingle, "Snake_Case  X"), "snake_case x");
    }

    #[test]
    fn unicode_lowercasing() {
        assert_eq!(normalize(NormalizationKind::Edit, "ÄÖÜ Σ"), "äöü σ");
    }

    #[test]
    fn idempotent() {
        for kind in [
            NormalizationKind::Edit,
            NormalizationKind::NGram,
            NormalizationKind::Shingle,
        ] {
            let once = normalize(kind, "  Hello,  World: {x}; y.z\tTAB ");
            assert_eq!(normalize(kind, &once), once);
        }
    }
}
