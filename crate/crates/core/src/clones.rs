//! Exact code clones across threads.
//!
//! Code blocks are normalized (blank lines dropped, bracket-only lines
//! removed), reduced to their alphanumeric characters and hashed with 64-bit
//! FNV-1a. Blocks with the same reduced content form a group.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::Hasher;
use std::io;

use fnv::FnvHasher;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::extraction::{extract_urls, BlockPosition, LinkInfo};
use crate::model::{BlockType, LocalId, Post, PostHistoryId, PostId};

/// FNV-1a 64-bit hash of the empty input (the offset basis).
pub const EMPTY_FINGERPRINT: u64 = 0xcbf2_9ce4_8422_2325;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedSnippet {
    pub normalized: String,
    pub nloc: usize,
    pub fingerprint_input: String,
}

fn is_bracket_line(line: &str) -> bool {
    line.chars().all(|c| c.is_whitespace() || "()[]{}".contains(c))
}

/// Collapses newline runs (whitespace-only lines count as empty), drops
/// trailing newlines, then removes lines made only of brackets.
pub fn normalize_snippet(code: &str) -> NormalizedSnippet {
    let lines: Vec<&str> = code
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .filter(|l| !l.trim().is_empty())
        .filter(|l| !is_bracket_line(l))
        .collect();
    let normalized = lines.join("\n");
    let fingerprint_input = normalized.chars().filter(|c| c.is_ascii_alphanumeric()).collect();
    NormalizedSnippet {
        nloc: lines.len(),
        normalized,
        fingerprint_input,
    }
}

pub fn fingerprint(input: &str) -> u64 {
    let mut h = FnvHasher::default();
    h.write(input.as_bytes());
    h.finish()
}

mod hex {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:016x}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let s = String::deserialize(d)?;
        u64::from_str_radix(&s, 16).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Occurrence {
    pub thread_id: PostId,
    pub post_id: PostId,
    pub post_history_id: PostHistoryId,
    pub local_id: LocalId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CloneGroup {
    #[serde(with = "hex")]
    pub fingerprint: u64,
    /// Smallest normalized line count among the occurrences.
    pub nloc: usize,
    pub thread_count: usize,
    pub occurrences: Vec<Occurrence>,
}

/// A code block to be checked for clones.
#[derive(Debug, Clone, Copy)]
pub struct CodeBlock<'a> {
    pub occurrence: Occurrence,
    pub content: &'a str,
}

/// Code blocks of the latest version of each post, or of every version.
pub fn code_blocks(posts: &[Post], all_versions: bool) -> Vec<CodeBlock<'_>> {
    let mut out = Vec::new();
    for p in posts {
        let versions = if all_versions {
            &p.versions[..]
        } else {
            &p.versions[p.versions.len().saturating_sub(1)..]
        };
        for v in versions {
            for b in v.blocks.iter().filter(|b| b.block_type() == BlockType::Code) {
                out.push(CodeBlock {
                    occurrence: Occurrence {
                        thread_id: p.thread_id(),
                        post_id: p.post_id,
                        post_history_id: v.post_history_id,
                        local_id: b.local_id(),
                    },
                    content: b.content(),
                });
            }
        }
    }
    out
}

/// Groups blocks with equal reduced content, keeps groups spanning at least
/// `min_threads` threads with at least `min_nloc` normalized lines, and ranks
/// them by thread count, then line count.
pub fn detect_clones(blocks: &[CodeBlock<'_>], min_threads: usize, min_nloc: usize) -> Vec<CloneGroup> {
    let mapped: Vec<(u64, String, usize, Occurrence)> = blocks
        .par_iter()
        .map(|b| {
            let n = normalize_snippet(b.content);
            (
                fingerprint(&n.fingerprint_input),
                n.fingerprint_input,
                n.nloc,
                b.occurrence,
            )
        })
        .collect();
    // Keyed by the exact input as well, so hash collisions never merge groups.
    let mut groups: HashMap<(u64, String), (usize, Vec<Occurrence>)> = HashMap::new();
    for (fp, input, nloc, occ) in mapped {
        let e = groups.entry((fp, input)).or_insert((usize::MAX, Vec::new()));
        e.0 = e.0.min(nloc);
        e.1.push(occ);
    }
    let mut out: Vec<CloneGroup> = groups
        .into_iter()
        .filter_map(|((fp, _), (nloc, mut occurrences))| {
            occurrences.sort();
            let thread_count = occurrences.iter().map(|o| o.thread_id).collect::<BTreeSet<_>>().len();
            (thread_count >= min_threads && nloc >= min_nloc).then_some(CloneGroup {
                fingerprint: fp,
                nloc,
                thread_count,
                occurrences,
            })
        })
        .collect();
    out.sort_by(|a, b| {
        b.thread_count
            .cmp(&a.thread_count)
            .then(b.nloc.cmp(&a.nloc))
            .then(a.fingerprint.cmp(&b.fingerprint))
            .then(a.occurrences.cmp(&b.occurrences))
    });
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportedGroup {
    #[serde(flatten)]
    pub group: CloneGroup,
    /// Links in the text blocks of the posts holding the occurrences.
    pub urls: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CloneReport {
    pub min_threads: usize,
    pub min_nloc: usize,
    pub all_versions: bool,
    pub groups: Vec<ReportedGroup>,
}

fn post_urls(post: &Post, post_history_id: PostHistoryId) -> Vec<LinkInfo> {
    let Some((_, v)) = post.version_by_history_id(post_history_id) else {
        return Vec::new();
    };
    let count = v.blocks.len() as u32;
    v.blocks
        .iter()
        .filter(|b| b.block_type() == BlockType::Text)
        .flat_map(|b| {
            extract_urls(
                b.content(),
                BlockPosition {
                    local_id: b.local_id(),
                    block_count: count,
                },
            )
        })
        .collect()
}

/// Runs clone detection on `posts` and attaches the owning posts' links.
pub fn clone_report(posts: &[Post], min_threads: usize, min_nloc: usize, all_versions: bool) -> CloneReport {
    let blocks = code_blocks(posts, all_versions);
    let by_id: BTreeMap<PostId, &Post> = posts.iter().map(|p| (p.post_id, p)).collect();
    let groups = detect_clones(&blocks, min_threads, min_nloc)
        .into_iter()
        .map(|group| {
            let mut urls = BTreeSet::new();
            for o in &group.occurrences {
                if let Some(p) = by_id.get(&o.post_id) {
                    urls.extend(post_urls(p, o.post_history_id).into_iter().map(|l| l.url));
                }
            }
            ReportedGroup {
                group,
                urls: urls.into_iter().collect(),
            }
        })
        .collect();
    CloneReport {
        min_threads,
        min_nloc,
        all_versions,
        groups,
    }
}

impl CloneReport {
    /// One CSV row per occurrence.
    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record([
            "Rank",
            "Fingerprint",
            "Nloc",
            "ThreadCount",
            "ThreadId",
            "PostId",
            "PostHistoryId",
            "LocalId",
            "Urls",
        ])?;
        for (i, g) in self.groups.iter().enumerate() {
            for o in &g.group.occurrences {
                w.write_record([
                    (i + 1).to_string(),
                    format!("{:016x}", g.group.fingerprint),
                    g.group.nloc.to_string(),
                    g.group.thread_count.to_string(),
                    o.thread_id.to_string(),
                    o.post_id.to_string(),
                    o.post_history_id.to_string(),
                    o.local_id.to_string(),
                    g.urls.join(" "),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
