//! Line-based differences between a block and its predecessor.

use serde::{Deserialize, Serialize};
use similar::{Algorithm, ChangeTag, TextDiffConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffKind {
    Unchanged,
    Added,
    Deleted,
}

impl DiffKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DiffKind::Unchanged => "unchanged",
            DiffKind::Added => "added",
            DiffKind::Deleted => "deleted",
        }
    }
}

impl std::str::FromStr for DiffKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unchanged" => Ok(DiffKind::Unchanged),
            "added" => Ok(DiffKind::Added),
            "deleted" => Ok(DiffKind::Deleted),
            other => Err(format!("unknown diff kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffOp {
    pub kind: DiffKind,
    pub line: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostBlockDiff {
    pub ops: Vec<DiffOp>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatchError {
    #[error("diff does not apply: line {line} of the predecessor is {found:?}, expected {expected:?}")]
    Mismatch {
        line: usize,
        expected: String,
        found: Option<String>,
    },
    #[error("diff does not consume the whole predecessor ({remaining} lines left)")]
    TrailingLines { remaining: usize },
}

/// Splits into lines; the empty string has no lines and a trailing newline
/// yields a final empty line, so joining with `\n` is lossless.
pub fn split_lines(s: &str) -> Vec<&str> {
    if s.is_empty() {
        Vec::new()
    } else {
        s.split('\n').collect()
    }
}

/// LCS line diff from `pred` to `content`.
pub fn line_diff(pred: &str, content: &str) -> PostBlockDiff {
    let old = split_lines(pred);
    let new = split_lines(content);
    let diff = TextDiffConfig::default()
        .algorithm(Algorithm::Lcs)
        .diff_slices(&old, &new);
    let ops = diff
        .iter_all_changes()
        .map(|change| DiffOp {
            kind: match change.tag() {
                ChangeTag::Equal => DiffKind::Unchanged,
                ChangeTag::Insert => DiffKind::Added,
                ChangeTag::Delete => DiffKind::Deleted,
            },
            line: change.value().to_string(),
        })
        .collect();
    PostBlockDiff { ops }
}

impl PostBlockDiff {
    /// Applies the diff to `pred`, checking every kept or deleted line.
    pub fn apply(&self, pred: &str) -> Result<String, PatchError> {
        let old = split_lines(pred);
        let mut next = 0;
        let mut out: Vec<&str> = Vec::new();
        for op in &self.ops {
            if op.kind == DiffKind::Added {
                out.push(&op.line);
                continue;
            }
            match old.get(next) {
                Some(line) if *line == op.line => {
                    if op.kind == DiffKind::Unchanged {
                        out.push(line);
                    }
                    next += 1;
                }
                found => {
                    return Err(PatchError::Mismatch {
                        line: next + 1,
                        expected: op.line.clone(),
                        found: found.map(|s| s.to_string()),
                    })
                }
            }
        }
        if next < old.len() {
            return Err(PatchError::TrailingLines {
                remaining: old.len() - next,
            });
        }
        Ok(out.join("\n"))
    }

    pub fn count(&self, kind: DiffKind) -> usize {
        self.ops.iter().filter(|op| op.kind == kind).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_is_all_unchanged() {
        let d = line_diff("a\nb", "a\nb");
        assert!(d.ops.iter().all(|op| op.kind == DiffKind::Unchanged));
        assert_eq!(d.ops.len(), 2);
    }

    #[test]
    fn appended_line() {
        let d = line_diff("a\nb", "a\nb\nc");
        assert_eq!(d.count(DiffKind::Added), 1);
        assert_eq!(d.count(DiffKind::Deleted), 0);
        assert_eq!(d.apply("a\nb").unwrap(), "a\nb\nc");
    }

    #[test]
    fn changed_line_is_delete_plus_add() {
        let d = line_diff("x = 1;", "x = 2;");
        assert_eq!(d.count(DiffKind::Added), 1);
        assert_eq!(d.count(DiffKind::Deleted), 1);
    }

    #[test]
    fn empty_sides() {
        assert!(line_diff("", "").ops.is_empty());
        assert_eq!(line_diff("", "a").apply("").unwrap(), "a");
        assert_eq!(line_diff("a\n", "").apply("a\n").unwrap(), "");
    }

    #[test]
    fn wrong_base_is_rejected() {
        let d = line_diff("a\nb", "a\nc");
        assert!(d.apply("a\nx").is_err());
        assert!(d.apply("a\nb\nz").is_err());
    }
}
