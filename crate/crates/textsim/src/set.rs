//! Set similarity coefficients.

use std::collections::HashSet;
use std::hash::Hash;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SetCoefficient {
    Jaccard,
    Dice,
    Overlap,
}

/// Compares two sets. Two empty sets are identical; exactly one empty set scores 0.
pub fn set_coefficient<T: Eq + Hash>(kind: SetCoefficient, a: &HashSet<T>, b: &HashSet<T>) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let inter = small.iter().filter(|x| large.contains(x)).count();
    let inter_f = inter as f64;
    match kind {
        SetCoefficient::Jaccard => inter_f / (a.len() + b.len() - inter) as f64,
        SetCoefficient::Dice => 2.0 * inter_f / (a.len() + b.len()) as f64,
        SetCoefficient::Overlap => inter_f / small.len() as f64,
    }
}
