//! Candidate sets and the matching phases for one pair of adjacent versions.
//!
//! Blocks are addressed by their index in `PostVersion::blocks`, which is the
//! local id minus one.

use textsim::{similarity, SimilarityError};

use super::MatchingConfig;
use crate::model::{BlockType, PostVersion};

/// A previous-version block that reaches the threshold for a current block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    /// Index of the previous-version block.
    pub prev: usize,
    /// 1.0 for equal contents, the metric value otherwise.
    pub score: f64,
    pub equal: bool,
    /// Threshold of the metric that produced `score` (main or backup).
    pub theta: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlockCandidates {
    /// Same-type candidates with a score at or above their threshold,
    /// ascending by `prev`.
    pub candidates: Vec<Candidate>,
    pub max_sim: f64,
    /// `PredEqual` if nonempty, else `PredMatched`; ascending indices.
    pub pred: Vec<usize>,
}

/// Similarities between two adjacent versions, computed once per pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSets {
    pub cur: Vec<BlockCandidates>,
    /// For each previous-version block, the current blocks listing it in `Pred`.
    pub succ: Vec<Vec<usize>>,
}

impl CandidateSets {
    pub fn pred(&self, j: usize) -> &[usize] {
        &self.cur[j].pred
    }

    pub fn succ(&self, l: usize) -> &[usize] {
        &self.succ[l]
    }

    pub fn candidate(&self, j: usize, l: usize) -> Option<&Candidate> {
        self.cur[j].candidates.iter().find(|c| c.prev == l)
    }
}

fn score(config: &MatchingConfig, block_type: BlockType, prev: &str, cur: &str) -> Result<(f64, f64), SimilarityError> {
    let t = config.for_type(block_type);
    match similarity(&t.metric, prev, cur) {
        Ok(s) => Ok((s.value, t.theta)),
        Err(SimilarityError::NotApplicable { .. }) => {
            similarity(&t.backup, prev, cur).map(|s| (s.value, t.backup_theta))
        }
        Err(e) => Err(e),
    }
}

/// Computes `PredEqual`, `maxSim`, `PredMatched`, `Pred` and `Succ` for every
/// block of `cur`. Similarity is only computed for unequal contents.
pub fn compute_candidates(
    prev: &PostVersion,
    cur: &PostVersion,
    config: &MatchingConfig,
) -> Result<CandidateSets, SimilarityError> {
    let mut sets = Vec::with_capacity(cur.blocks.len());
    let mut succ = vec![Vec::new(); prev.blocks.len()];
    for (j, b) in cur.blocks.iter().enumerate() {
        let mut candidates = Vec::new();
        for (l, beta) in prev.blocks.iter().enumerate() {
            if beta.block_type() != b.block_type() {
                continue;
            }
            if beta.content() == b.content() {
                candidates.push(Candidate {
                    prev: l,
                    score: 1.0,
                    equal: true,
                    theta: config.for_type(b.block_type()).theta,
                });
                continue;
            }
            let (value, theta) = score(config, b.block_type(), beta.content(), b.content())?;
            if value >= theta {
                candidates.push(Candidate {
                    prev: l,
                    score: value,
                    equal: false,
                    theta,
                });
            }
        }
        let max_sim = candidates.iter().map(|c| c.score).fold(0.0, f64::max);
        let equal: Vec<usize> = candidates.iter().filter(|c| c.equal).map(|c| c.prev).collect();
        let pred = if !equal.is_empty() {
            equal
        } else {
            candidates
                .iter()
                .filter(|c| c.score == max_sim)
                .map(|c| c.prev)
                .collect()
        };
        for &l in &pred {
            succ[l].push(j);
        }
        sets.push(BlockCandidates {
            candidates,
            max_sim,
            pred,
        });
    }
    Ok(CandidateSets { cur: sets, succ })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContextMode {
    Both,
    Above,
    Below,
}

/// Which phase produced a link; useful for tracing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Unique,
    Context(ContextMode),
    Position,
    RunnerUp,
}

/// Mutable matching state for one version pair.
#[derive(Debug, Clone)]
pub struct PairMatcher {
    pub sets: CandidateSets,
    /// Chosen predecessor index per current block.
    pub pred: Vec<Option<usize>>,
    /// Phase that set each link.
    pub phase: Vec<Option<Phase>>,
    taken: Vec<bool>,
}

impl PairMatcher {
    pub fn new(sets: CandidateSets) -> Self {
        let n = sets.cur.len();
        let m = sets.succ.len();
        PairMatcher {
            sets,
            pred: vec![None; n],
            phase: vec![None; n],
            taken: vec![false; m],
        }
    }

    pub fn available(&self, l: usize) -> bool {
        !self.taken[l]
    }

    /// Links current block `j` to previous block `l`.
    pub fn link(&mut self, j: usize, l: usize, phase: Phase) {
        debug_assert!(self.pred[j].is_none() && !self.taken[l]);
        self.pred[j] = Some(l);
        self.phase[j] = Some(phase);
        self.taken[l] = true;
    }

    /// Marks a previous block as consumed without linking it.
    pub fn mark_taken(&mut self, l: usize) {
        self.taken[l] = true;
    }

    fn unmatched(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.pred.len()).filter(|&j| self.pred[j].is_none())
    }

    /// Links blocks whose only candidate has them as its only successor.
    /// With `revised`, an unavailable unique candidate triggers the runner-up
    /// phase for the whole version.
    pub fn set_pred_unique(&mut self, revised: bool) -> usize {
        let mut count = 0;
        for j in 0..self.pred.len() {
            if self.pred[j].is_some() || self.sets.pred(j).len() != 1 {
                continue;
            }
            let l = self.sets.pred(j)[0];
            if self.available(l) {
                if self.sets.succ(l).len() == 1 {
                    self.link(j, l, Phase::Unique);
                    count += 1;
                }
            } else if revised {
                self.set_pred_runner_up();
            }
        }
        count
    }

    /// Links blocks whose neighbors' predecessors surround a candidate.
    pub fn set_pred_context(&mut self, mode: ContextMode) -> bool {
        let n = self.pred.len();
        let m = self.taken.len();
        let mut any = false;
        for j in 0..n {
            if self.pred[j].is_some() {
                continue;
            }
            let above = if j > 0 { self.pred[j - 1] } else { None };
            let below = if j + 1 < n { self.pred[j + 1] } else { None };
            let need_above = matches!(mode, ContextMode::Both | ContextMode::Above);
            let need_below = matches!(mode, ContextMode::Both | ContextMode::Below);
            if (need_above && above.is_none()) || (need_below && below.is_none()) {
                continue;
            }
            let hit = self.sets.pred(j).iter().copied().find(|&l| {
                self.available(l)
                    && (!need_above || (l > 0 && above == Some(l - 1)))
                    && (!need_below || (l + 1 < m && below == Some(l + 1)))
            });
            if let Some(l) = hit {
                self.link(j, l, Phase::Context(mode));
                any = true;
            }
        }
        any
    }

    /// Links each remaining block to the available candidate closest in
    /// position, preferring the smaller local id on ties.
    pub fn set_pred_position(&mut self) {
        for j in 0..self.pred.len() {
            if self.pred[j].is_some() {
                continue;
            }
            let best = self
                .sets
                .pred(j)
                .iter()
                .copied()
                .filter(|&l| self.available(l))
                .min_by_key(|&l| (l.abs_diff(j), l));
            if let Some(l) = best {
                self.link(j, l, Phase::Position);
            }
        }
    }

    /// Links each remaining block to its unique best available candidate
    /// below `maxSim`, if no block has that candidate in its `Pred` set.
    pub fn set_pred_runner_up(&mut self) {
        let remaining: Vec<usize> = self.unmatched().collect();
        for j in remaining {
            let bc = &self.sets.cur[j];
            let runner_ups: Vec<&Candidate> = bc
                .candidates
                .iter()
                .filter(|c| self.available(c.prev) && c.score >= c.theta && c.score < bc.max_sim)
                .collect();
            let Some(best) = runner_ups.iter().map(|c| c.score).reduce(f64::max) else {
                continue;
            };
            let mut top = runner_ups.iter().filter(|c| c.score == best);
            let (Some(c), None) = (top.next(), top.next()) else {
                continue;
            };
            let l = c.prev;
            if self.sets.succ(l).is_empty() {
                self.link(j, l, Phase::RunnerUp);
            }
        }
    }

    fn context_loops(&mut self) {
        for mode in [ContextMode::Both, ContextMode::Below, ContextMode::Above] {
            while self.set_pred_context(mode) {}
        }
    }

    /// The initial strategy: unique, context, position.
    pub fn run_initial(&mut self) {
        self.set_pred_unique(false);
        self.context_loops();
        self.set_pred_position();
    }

    /// The revised strategy: the initial phases plus runner-up matching.
    pub fn run_revised(&mut self) {
        self.set_pred_unique(true);
        self.context_loops();
        self.set_pred_position();
        self.set_pred_runner_up();
    }
}
