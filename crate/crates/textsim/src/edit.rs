//! Edit-based distances and the similarities derived from them.
//!
//! All routines are generic over slices so the same code compares character
//! sequences and Winnowing hash sequences.

use std::collections::HashMap;
use std::hash::Hash;

/// The edit-distance flavours in the catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EditKind {
    /// Insertion, deletion and substitution.
    Levenshtein,
    /// Levenshtein plus unrestricted transposition of adjacent symbols.
    DamerauLevenshtein,
    /// Insertion and deletion only.
    OptimalAlignment,
}

/// Number of edit operations needed to turn `a` into `b`.
pub fn edit_distance<T: Eq + Hash + Clone>(kind: EditKind, a: &[T], b: &[T]) -> usize {
    match kind {
        EditKind::Levenshtein => levenshtein(a, b),
        EditKind::DamerauLevenshtein => damerau_levenshtein(a, b),
        EditKind::OptimalAlignment => indel_distance(a, b),
    }
}

/// Convenience wrapper over [`edit_distance`] for strings, on Unicode scalar values.
pub fn edit_distance_str(kind: EditKind, a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    edit_distance(kind, &a, &b)
}

pub fn levenshtein<T: Eq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let subst = prev[j] + usize::from(x != y);
            cur[j + 1] = subst.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Unrestricted Damerau-Levenshtein distance (Lowrance-Wagner recurrence).
///
/// Unlike the restricted "optimal string alignment" variant, a substring may be
/// edited again after a transposition, so the result is a true metric.
pub fn damerau_levenshtein<T: Eq + Hash + Clone>(a: &[T], b: &[T]) -> usize {
    let (n, m) = (a.len(), b.len());
    if n == 0 {
        return m;
    }
    if m == 0 {
        return n;
    }
    let inf = n + m;
    let width = m + 2;
    // (n + 2) x (m + 2) table with a sentinel row and column.
    let mut d = vec![0usize; (n + 2) * width];
    d[0] = inf;
    for i in 0..=n {
        d[(i + 1) * width] = inf;
        d[(i + 1) * width + 1] = i;
    }
    for j in 0..=m {
        d[j + 1] = inf;
        d[width + j + 1] = j;
    }
    let mut last_row: HashMap<&T, usize> = HashMap::new();
    for i in 1..=n {
        let mut last_match_col = 0;
        for j in 1..=m {
            let i1 = last_row.get(&b[j - 1]).copied().unwrap_or(0);
            let j1 = last_match_col;
            let cost = if a[i - 1] == b[j - 1] {
                last_match_col = j;
                0
            } else {
                1
            };
            let subst = d[i * width + j] + cost;
            let insert = d[(i + 1) * width + j] + 1;
            let delete = d[i * width + j + 1] + 1;
            let transpose = d[i1 * width + j1] + (i - i1 - 1) + 1 + (j - j1 - 1);
            d[(i + 1) * width + j + 1] = subst.min(insert).min(delete).min(transpose);
        }
        last_row.insert(&a[i - 1], i);
    }
    d[(n + 1) * width + m + 1]
}

/// Insertion/deletion distance: `|a| + |b| - 2 * lcs(a, b)`.
pub fn indel_distance<T: Eq>(a: &[T], b: &[T]) -> usize {
    a.len() + b.len() - 2 * lcs_length(a, b)
}

/// Length of the longest common subsequence.
pub fn lcs_length<T: Eq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `(max(|a|,|b|) - d) / max(|a|,|b|)`, clamped at 0; two empty inputs are identical.
///
/// The clamp only matters for insertion/deletion distances, which can exceed
/// the longer length.
pub fn sim_from_distance(len_a: usize, len_b: usize, distance: usize) -> f64 {
    let longest = len_a.max(len_b);
    if longest == 0 {
        return 1.0;
    }
    (longest.saturating_sub(distance)) as f64 / longest as f64
}

pub fn sim_edit<T: Eq + Hash + Clone>(kind: EditKind, a: &[T], b: &[T]) -> f64 {
    sim_from_distance(a.len(), b.len(), edit_distance(kind, a, b))
}

pub fn sim_lcs<T: Eq>(a: &[T], b: &[T]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    lcs_length(a, b) as f64 / longest as f64
}
