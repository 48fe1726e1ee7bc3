//! Scoring reconstructed lineages against ground truth.

pub mod ground_truth;
pub mod sweep;

use std::collections::{BTreeSet, HashSet};
use std::hash::Hash;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use textsim::SimilarityError;

use crate::history::{process_version_history, MatchingConfig, Strategy};
use crate::model::{BlockType, Post, PostId};

pub use ground_truth::{Connection, GroundTruth, GroundTruthError, GtRecord};
pub use sweep::{SweepOptions, SweepResult};

/// Confusion counts. `tn` is signed: the set definition can produce
/// negative values when computed and true connections disagree a lot.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: i64,
    pub fp: i64,
    pub tn: i64,
    #[serde(rename = "fn")]
    pub fn_: i64,
}

impl ConfusionCounts {
    pub fn negative_tn(&self) -> bool {
        self.tn < 0
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = ConfusionCounts;

    fn add(self, o: ConfusionCounts) -> ConfusionCounts {
        ConfusionCounts {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            tn: self.tn + o.tn,
            fn_: self.fn_ + o.fn_,
        }
    }
}

/// `tp = |C ∩ GT|`, `fp = |C \ GT|`, `tn = nPos − |C ∪ GT|`, `fn = |GT \ C|`.
pub fn confusion<T: Eq + Hash>(computed: &HashSet<T>, truth: &HashSet<T>, n_pos: i64) -> ConfusionCounts {
    let tp = computed.intersection(truth).count() as i64;
    let fp = computed.len() as i64 - tp;
    let fn_ = truth.len() as i64 - tp;
    let union = tp + fp + fn_;
    ConfusionCounts {
        tp,
        fp,
        tn: n_pos - union,
        fn_,
    }
}

/// Matthews correlation coefficient. Returns 0 when a marginal sum is zero,
/// and also when a negative `tn` makes the denominator negative. A negative
/// `tn` with a positive denominator can push the value outside [-1, 1]; it is
/// returned as computed.
pub fn mcc(c: ConfusionCounts) -> f64 {
    let (tp, fp, tn, fn_) = (c.tp as f64, c.fp as f64, c.tn as f64, c.fn_ as f64);
    let denom = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if denom <= 0.0 {
        return 0.0;
    }
    (tp * tn - fp * fn_) / denom.sqrt()
}

/// Number of possible predecessor connections: blocks of the type in every
/// version but the first.
pub fn possible_connections(posts: &[Post], block_type: BlockType) -> i64 {
    posts
        .iter()
        .flat_map(|p| p.versions.iter().skip(1))
        .map(|v| v.local_ids(block_type).count() as i64)
        .sum()
}

/// Connections currently stored in the lineage fields of `posts`.
pub fn computed_connections(posts: &[Post], block_type: BlockType) -> HashSet<Connection> {
    posts
        .iter()
        .flat_map(|p| p.versions.iter())
        .flat_map(|v| {
            v.blocks
                .iter()
                .filter(move |b| b.block_type() == block_type)
                .filter_map(move |b| {
                    b.pred.map(|pred| Connection {
                        post_history_id: v.post_history_id,
                        local_id: b.local_id(),
                        pred_local_id: pred.local_id,
                    })
                })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeScore {
    pub counts: ConfusionCounts,
    pub mcc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub text: TypeScore,
    pub code: TypeScore,
}

impl Scores {
    pub fn mcc_sum(&self) -> f64 {
        self.text.mcc + self.code.mcc
    }

    pub fn negative_tn(&self) -> bool {
        self.text.counts.negative_tn() || self.code.counts.negative_tn()
    }
}

/// Scores already-reconstructed posts against `gt`.
pub fn score(posts: &[Post], gt: &GroundTruth) -> Scores {
    let one = |t: BlockType| {
        let counts = confusion(
            &computed_connections(posts, t),
            &gt.connections(t),
            possible_connections(posts, t),
        );
        TypeScore {
            counts,
            mcc: mcc(counts),
        }
    };
    Scores {
        text: one(BlockType::Text),
        code: one(BlockType::Code),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvaluationError {
    #[error("posts without ground truth: {0:?}")]
    Uncovered(Vec<PostId>),
    #[error("ground truth for posts missing from the corpus: {0:?}")]
    UnknownPosts(Vec<PostId>),
    #[error(transparent)]
    GroundTruth(#[from] GroundTruthError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}

/// Checks that every multi-version post has ground truth and every ground
/// truth post is in the corpus, then validates the rows.
pub fn check_coverage(posts: &[Post], gt: &GroundTruth) -> Result<(), EvaluationError> {
    let covered = gt.post_ids();
    let uncovered: Vec<PostId> = posts
        .iter()
        .filter(|p| p.versions.len() > 1 && !covered.contains(&p.post_id))
        .map(|p| p.post_id)
        .collect();
    if !uncovered.is_empty() {
        return Err(EvaluationError::Uncovered(uncovered));
    }
    let known: BTreeSet<PostId> = posts.iter().map(|p| p.post_id).collect();
    let unknown: Vec<PostId> = covered.difference(&known).copied().collect();
    if !unknown.is_empty() {
        return Err(EvaluationError::UnknownPosts(unknown));
    }
    gt.validate(posts)?;
    Ok(())
}

/// Reconstructs `posts` with `config` and scores the result.
pub fn reconstruct_and_score(
    posts: &[Post],
    gt: &GroundTruth,
    config: &MatchingConfig,
    strategy: Strategy,
) -> Result<Scores, SimilarityError> {
    let mut work = posts.to_vec();
    for p in &mut work {
        process_version_history(p, config, strategy)?;
    }
    Ok(score(&work, gt))
}

/// Median wall-clock time of `repetitions` reconstructions; zero when
/// `repetitions` is 0 (the scores are computed once either way).
pub fn timed_score(
    posts: &[Post],
    gt: &GroundTruth,
    config: &MatchingConfig,
    strategy: Strategy,
    repetitions: usize,
) -> Result<(Scores, Duration), SimilarityError> {
    if repetitions == 0 {
        return Ok((reconstruct_and_score(posts, gt, config, strategy)?, Duration::ZERO));
    }
    let mut times = Vec::with_capacity(repetitions);
    let mut scores = None;
    for _ in 0..repetitions {
        let start = Instant::now();
        let s = reconstruct_and_score(posts, gt, config, strategy)?;
        times.push(start.elapsed());
        scores = Some(s);
    }
    times.sort();
    Ok((scores.expect("at least one repetition"), times[times.len() / 2]))
}

/// Scores `config` on a ground-truth-covered corpus.
pub fn evaluate(
    config: &MatchingConfig,
    posts: &[Post],
    gt: &GroundTruth,
    repetitions: usize,
) -> Result<SweepResult, EvaluationError> {
    check_coverage(posts, gt)?;
    let (scores, runtime) = timed_score(posts, gt, config, Strategy::Revised, repetitions)?;
    Ok(SweepResult::single(*config, scores, runtime))
}
