//! Seeded generators for test corpora with known answers.
//!
//! [`matching_corpus`] produces post histories whose block lineages are known
//! by construction. [`clone_corpus`] produces threads with planted code clones.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus_io::PostHistoryEvent;
use crate::evaluation::{GroundTruth, GtRecord};
use crate::model::{BlockType, PostId};

/// Share of version steps that only insert a unit duplicating an existing block.
const DUPLICATE_STEP: f64 = 0.15;

fn epoch() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2016, 1, 1, 0, 0, 0).unwrap()
}

fn word(rng: &mut impl Rng) -> String {
    let len = rng.gen_range(3..=9);
    (0..len).map(|_| rng.gen_range(b'a'..=b'z') as char).collect()
}

fn sentence(rng: &mut impl Rng) -> String {
    let n = rng.gen_range(5..=12);
    let mut words: Vec<String> = (0..n).map(|_| word(rng)).collect();
    let first = &mut words[0];
    *first = first[..1].to_uppercase() + &first[1..];
    words.join(" ") + "."
}

fn text_block(rng: &mut impl Rng) -> String {
    let n = rng.gen_range(2..=4);
    let sentences: Vec<String> = (0..n).map(|_| sentence(rng)).collect();
    // Sometimes wrap sentences onto separate lines of one paragraph.
    if rng.gen_bool(0.3) {
        sentences.join("\n")
    } else {
        sentences.join(" ")
    }
}

fn code_line(rng: &mut impl Rng) -> String {
    match rng.gen_range(0..4) {
        0 => format!(
            "int {} = {}({}, {});",
            word(rng),
            word(rng),
            word(rng),
            rng.gen_range(0..1000)
        ),
        1 => format!("{}.{}({});", word(rng), word(rng), word(rng)),
        2 => format!("if ({} > {}) {{ {}(); }}", word(rng), rng.gen_range(0..100), word(rng)),
        _ => format!("return {} + {};", word(rng), word(rng)),
    }
}

fn code_block(rng: &mut impl Rng) -> String {
    let n = rng.gen_range(3..=8);
    (0..n).map(|_| code_line(rng)).collect::<Vec<_>>().join("\n")
}

fn new_block(rng: &mut impl Rng, t: BlockType) -> String {
    match t {
        BlockType::Text => text_block(rng),
        BlockType::Code => code_block(rng),
    }
}

/// Replaces, inserts or deletes one word of a text block.
fn edit_text(rng: &mut impl Rng, s: &str) -> String {
    let mut words: Vec<String> = s.split(' ').map(str::to_string).collect();
    let i = rng.gen_range(0..words.len());
    match rng.gen_range(0..3) {
        0 => words[i] = word(rng),
        1 => words.insert(i, word(rng)),
        _ if words.len() > 8 => {
            words.remove(i);
        }
        _ => words.push(word(rng)),
    }
    words.join(" ")
}

/// Changes one line of a code block or appends one.
fn edit_code(rng: &mut impl Rng, s: &str) -> String {
    let mut lines: Vec<String> = s.lines().map(str::to_string).collect();
    if rng.gen_bool(0.5) {
        let i = rng.gen_range(0..lines.len());
        lines[i] = code_line(rng);
    } else {
        lines.push(code_line(rng));
    }
    lines.join("\n")
}

#[derive(Debug, Clone)]
struct GenBlock {
    block_type: BlockType,
    lineage: usize,
    content: String,
}

fn render(blocks: &[GenBlock], rng: &mut impl Rng) -> String {
    blocks
        .iter()
        .map(|b| match b.block_type {
            BlockType::Text => b.content.clone(),
            BlockType::Code if rng.gen_bool(0.5) => format!("```\n{}\n```", b.content),
            BlockType::Code => b
                .content
                .lines()
                .map(|l| format!("    {l}"))
                .collect::<Vec<_>>()
                .join("\n"),
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}

#[derive(Debug, Clone)]
pub struct MatchingCorpus {
    pub events: Vec<PostHistoryEvent>,
    /// The true lineage of every block version after the first version.
    pub truth: GroundTruth,
    /// Expected block sequences per post history id, to check extraction.
    pub blocks: BTreeMap<i64, Vec<(BlockType, String)>>,
    /// Posts that received at least one duplicate-block edit.
    pub duplicate_posts: BTreeSet<PostId>,
}

/// Generates `posts` post histories with 2 to 8 versions each. Blocks come in
/// text/code units so types keep alternating. A version either inserts a unit
/// duplicating an existing block, or applies one to three scripted edits:
/// small text or code edits, unit insertion, deletion and swapping neighbors.
///
/// Post ids are `1..=posts`, post history ids are `post_id * 100 + version`.
pub fn matching_corpus(posts: usize, seed: u64) -> MatchingCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events = Vec::new();
    let mut truth = GroundTruth::new();
    let mut expected = BTreeMap::new();
    let mut duplicate_posts = BTreeSet::new();
    for post_id in 1..=posts as i64 {
        let first_type = if rng.gen_bool(0.7) {
            BlockType::Text
        } else {
            BlockType::Code
        };
        let second_type = match first_type {
            BlockType::Text => BlockType::Code,
            BlockType::Code => BlockType::Text,
        };
        let mut next_lineage = 0;
        let mut unit = |rng: &mut ChaCha8Rng| -> [GenBlock; 2] {
            next_lineage += 2;
            [first_type, second_type].map(|t| GenBlock {
                block_type: t,
                lineage: next_lineage - if t == first_type { 2 } else { 1 },
                content: new_block(rng, t),
            })
        };
        let mut blocks: Vec<GenBlock> = (0..rng.gen_range(1..=3)).flat_map(|_| unit(&mut rng)).collect();
        // A lone trailing block is allowed: drop the last one sometimes.
        if blocks.len() > 2 && rng.gen_bool(0.3) {
            blocks.pop();
        }
        let n_versions = rng.gen_range(2..=8);
        let mut prev: Option<Vec<GenBlock>> = None;
        for v in 1..=n_versions {
            if v > 1 && rng.gen_bool(DUPLICATE_STEP) {
                // A duplicate gets a version of its own so its lineage stays identifiable.
                let src = rng.gen_range(0..blocks.len());
                let mut u = unit(&mut rng);
                let slot = usize::from(blocks[src].block_type != first_type);
                u[slot].content = blocks[src].content.clone();
                let at = 2 * rng.gen_range(0..=blocks.len() / 2);
                blocks.splice(at..at, u);
                duplicate_posts.insert(post_id);
            } else if v > 1 {
                // At most one small edit per block and version.
                let mut edited = BTreeSet::new();
                for _ in 0..rng.gen_range(1..=3) {
                    match rng.gen_range(0..9) {
                        5 => {
                            let at = 2 * rng.gen_range(0..=blocks.len() / 2);
                            let u = unit(&mut rng);
                            blocks.splice(at..at, u);
                        }
                        6 if blocks.len() >= 4 => {
                            let at = 2 * rng.gen_range(0..blocks.len() / 2);
                            blocks.drain(at..at + 2);
                        }
                        7 | 8 if blocks.len() >= 4 => {
                            let at = 2 * rng.gen_range(0..blocks.len() / 2 - 1);
                            let (a, b) = blocks.split_at_mut(at + 2);
                            a[at..at + 2].swap_with_slice(&mut b[..2]);
                        }
                        _ => {
                            let i = rng.gen_range(0..blocks.len());
                            let b = &mut blocks[i];
                            if !edited.insert(b.lineage) {
                                continue;
                            }
                            b.content = match b.block_type {
                                BlockType::Text => edit_text(&mut rng, &b.content),
                                BlockType::Code => edit_code(&mut rng, &b.content),
                            };
                        }
                    }
                }
            }
            let hid = post_id * 100 + v as i64;
            if let Some(prev) = &prev {
                for (k, b) in blocks.iter().enumerate() {
                    let pred = prev.iter().position(|p| p.lineage == b.lineage).map(|p| p as u32 + 1);
                    truth.upsert(GtRecord {
                        post_id,
                        post_history_id: hid,
                        local_id: k as u32 + 1,
                        block_type: b.block_type,
                        pred_local_id: pred,
                    });
                }
            }
            expected.insert(hid, blocks.iter().map(|b| (b.block_type, b.content.clone())).collect());
            events.push(PostHistoryEvent {
                post_id,
                post_type_id: 1,
                parent_id: None,
                post_history_id: hid,
                post_history_type_id: if v == 1 { 2 } else { 5 },
                creation_date: epoch() + Duration::days(post_id) + Duration::minutes(v as i64),
                user_id: Some(rng.gen_range(1..500)),
                text: render(&blocks, &mut rng),
            });
            prev = Some(blocks.clone());
        }
    }
    MatchingCorpus {
        events,
        truth,
        blocks: expected,
        duplicate_posts,
    }
}

/// A planted clone: its normalized line count and the posts holding it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedClone {
    pub nloc: usize,
    pub posts: BTreeSet<PostId>,
}

#[derive(Debug, Clone)]
pub struct CloneCorpus {
    pub events: Vec<PostHistoryEvent>,
    pub planted: Vec<PlantedClone>,
}

fn snippet(rng: &mut impl Rng, nloc: usize) -> Vec<String> {
    (0..nloc).map(|_| code_line(rng)).collect()
}

/// Reformats a snippet without changing its alphanumeric content or line
/// count: spacing, blank lines, bracket-only lines and trailing newlines.
fn perturb(rng: &mut impl Rng, lines: &[String]) -> String {
    let mut out = Vec::new();
    for l in lines {
        let mut l = l.clone();
        if rng.gen_bool(0.3) {
            l = l.replace(' ', "  ");
        }
        if rng.gen_bool(0.2) {
            l = format!("\t{l}");
        }
        out.push(l);
        match rng.gen_range(0..8) {
            0 => out.push(String::new()),
            1 => out.push("}".to_string()),
            2 => out.push("  ) ]".to_string()),
            _ => {}
        }
    }
    let mut s = out.join("\n");
    if rng.gen_bool(0.5) {
        s.push_str("\n\n");
    }
    s
}

/// `threads` questions, each with zero to two answers. Five clone groups with
/// normalized line counts 6, 20, 25, 6 and 25 are planted in two to four
/// threads each with formatting perturbations. Distractors: unique snippets,
/// a 25-line snippet repeated inside one thread only, a 4-line snippet shared
/// across threads, and a clone that only exists in earlier versions.
pub fn clone_corpus(threads: usize, seed: u64) -> CloneCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Post ids: question t is 1000 * t, its answers 1000 * t + 1, + 2.
    let mut posts: BTreeMap<PostId, (Option<PostId>, Vec<String>)> = BTreeMap::new();
    for t in 1..=threads as i64 {
        let q = 1000 * t;
        posts.insert(q, (None, Vec::new()));
        for a in 1..=rng.gen_range(0..=2) {
            posts.insert(q + a, (Some(q), Vec::new()));
        }
    }
    let ids: Vec<PostId> = posts.keys().copied().collect();
    let thread_of = |id: PostId| id / 1000;
    let mut planted = Vec::new();
    for nloc in [6, 20, 25, 6, 25] {
        let lines = snippet(&mut rng, nloc);
        let k = rng.gen_range(2..=4);
        let mut chosen = BTreeSet::new();
        while chosen.len() < k {
            let id = *ids.choose(&mut rng).unwrap();
            if chosen.iter().all(|&c| thread_of(c) != thread_of(id)) {
                chosen.insert(id);
            }
        }
        for &id in &chosen {
            posts.get_mut(&id).unwrap().1.push(perturb(&mut rng, &lines));
        }
        planted.push(PlantedClone { nloc, posts: chosen });
    }
    // Unique code in every post.
    for (_, blocks) in posts.values_mut() {
        let n = rng.gen_range(6..=30);
        blocks.push(snippet(&mut rng, n).join("\n"));
    }
    // Same-thread repetition: a question and its answer, or two blocks of one post.
    let long = snippet(&mut rng, 25).join("\n");
    let q = 1000 * rng.gen_range(1..=threads as i64);
    posts.get_mut(&q).unwrap().1.push(long.clone());
    let twin = if posts.contains_key(&(q + 1)) { q + 1 } else { q };
    posts.get_mut(&twin).unwrap().1.push(long);
    // Short snippet shared across threads, below every threshold used.
    let short = snippet(&mut rng, 4).join("\n");
    for t in [1, 2, 3] {
        posts
            .get_mut(&(1000 * t.min(threads as i64)))
            .unwrap()
            .1
            .push(short.clone());
    }

    let mut events = Vec::new();
    let mut hid = 1;
    let stale = snippet(&mut rng, 25).join("\n");
    for (i, (&id, (parent, blocks))) in posts.iter().enumerate() {
        let body = blocks
            .iter()
            .enumerate()
            .map(|(k, b)| format!("Step {k} of the solution follows.\n\n```\n{b}\n```"))
            .collect::<Vec<_>>()
            .join("\n\n")
            + &format!("\n\nSee https://example{}.org/docs/{} for details.", id % 7, id);
        let post_type_id = if parent.is_some() { 2 } else { 1 };
        // The first three posts used to carry a shared snippet that was later removed.
        let mut bodies = vec![body.clone()];
        if i < 3 {
            bodies.insert(0, format!("{body}\n\n```\n{stale}\n```"));
        }
        for (v, text) in bodies.into_iter().enumerate() {
            events.push(PostHistoryEvent {
                post_id: id,
                post_type_id,
                parent_id: *parent,
                post_history_id: hid,
                post_history_type_id: if v == 0 { 2 } else { 5 },
                creation_date: epoch() + Duration::hours(hid),
                user_id: None,
                text,
            });
            hid += 1;
        }
    }
    CloneCorpus { events, planted }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::ingest;

    #[test]
    fn deterministic() {
        let a = matching_corpus(5, 7);
        let b = matching_corpus(5, 7);
        assert_eq!(a.events, b.events);
        assert_eq!(a.truth, b.truth);
    }

    #[test]
    fn extraction_recovers_generated_blocks() {
        let c = matching_corpus(200, 1);
        let corpus = ingest(c.events.clone()).unwrap();
        assert!(corpus.warnings.is_empty());
        for p in &corpus.posts {
            for v in &p.versions {
                let got: Vec<(BlockType, String)> = v
                    .blocks
                    .iter()
                    .map(|b| (b.block_type(), b.content().to_string()))
                    .collect();
                assert_eq!(
                    &got, &c.blocks[&v.post_history_id],
                    "post history {}",
                    v.post_history_id
                );
            }
        }
        c.truth.validate(&corpus.posts).unwrap();
    }

    #[test]
    fn types_alternate() {
        let c = matching_corpus(100, 3);
        for blocks in c.blocks.values() {
            assert!(blocks.windows(2).all(|w| w[0].0 != w[1].0));
        }
    }

    #[test]
    fn perturbation_keeps_fingerprint() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let lines = snippet(&mut rng, 10);
        let base = crate::clones::normalize_snippet(&lines.join("\n"));
        for _ in 0..50 {
            let n = crate::clones::normalize_snippet(&perturb(&mut rng, &lines));
            assert_eq!(n.fingerprint_input, base.fingerprint_input);
            assert_eq!(n.nloc, 10);
        }
    }
}
