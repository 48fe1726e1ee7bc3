//! Block lineages across post versions.

pub mod diff;
pub mod matching;
pub mod title;

use serde::{Deserialize, Serialize};
use textsim::named::{
    COSINE_TOKEN_NORMALIZED_TERM_FREQUENCY, MANHATTAN_FOUR_GRAM_NORMALIZED, WINNOWING_FOUR_GRAM_DICE_NORMALIZED,
};
use textsim::{MetricConfig, SimilarityError};

use crate::model::{BlockRef, BlockType, Post, PostVersion};

pub use diff::{line_diff, DiffKind, DiffOp, PatchError, PostBlockDiff};
pub use matching::{compute_candidates, CandidateSets, ContextMode, PairMatcher, Phase};
pub use title::{title_history, TitleEvent, TitleVersion};

/// Metric, threshold and backup for one block type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypeMatching {
    pub metric: MetricConfig,
    pub theta: f64,
    pub backup: MetricConfig,
    pub backup_theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatchingConfigRepr", into = "MatchingConfigRepr")]
pub struct MatchingConfig {
    pub text: TypeMatching,
    pub code: TypeMatching,
}

impl Default for MatchingConfig {
    fn default() -> Self {
        MatchingConfig {
            text: TypeMatching {
                metric: MANHATTAN_FOUR_GRAM_NORMALIZED,
                theta: 0.17,
                backup: COSINE_TOKEN_NORMALIZED_TERM_FREQUENCY,
                backup_theta: 0.36,
            },
            code: TypeMatching {
                metric: WINNOWING_FOUR_GRAM_DICE_NORMALIZED,
                theta: 0.23,
                backup: COSINE_TOKEN_NORMALIZED_TERM_FREQUENCY,
                backup_theta: 0.26,
            },
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error(transparent)]
    Metric(#[from] SimilarityError),
    #[error("threshold {name} = {value} is outside [0, 1]")]
    Threshold { name: &'static str, value: f64 },
    #[error("backup metric {0} is not applicable to arbitrarily short strings")]
    Backup(String),
}

impl MatchingConfig {
    /// The same metric and threshold for both block types.
    pub fn uniform(metric: MetricConfig, theta: f64) -> Self {
        let d = MatchingConfig::default();
        MatchingConfig {
            text: TypeMatching {
                metric,
                theta,
                ..d.text
            },
            code: TypeMatching {
                metric,
                theta,
                ..d.code
            },
        }
    }

    pub fn for_type(&self, block_type: BlockType) -> &TypeMatching {
        match block_type {
            BlockType::Text => &self.text,
            BlockType::Code => &self.code,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let thresholds = [
            ("thetaText", self.text.theta),
            ("backupThetaText", self.text.backup_theta),
            ("thetaCode", self.code.theta),
            ("backupThetaCode", self.code.backup_theta),
        ];
        for (name, value) in thresholds {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::Threshold { name, value });
            }
        }
        for t in [&self.text, &self.code] {
            t.metric.validate()?;
            t.backup.validate()?;
            if !t.backup.always_applicable() {
                return Err(ConfigError::Backup(t.backup.name()));
            }
        }
        Ok(())
    }

    /// Compact label, e.g. for reports.
    pub fn label(&self) -> String {
        format!(
            "{}@{}/{}@{}|{}@{}/{}@{}",
            self.text.metric,
            self.text.theta,
            self.text.backup,
            self.text.backup_theta,
            self.code.metric,
            self.code.theta,
            self.code.backup,
            self.code.backup_theta
        )
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct MatchingConfigRepr {
    sim_text: String,
    theta_text: f64,
    backup_text: String,
    backup_theta_text: f64,
    sim_code: String,
    theta_code: f64,
    backup_code: String,
    backup_theta_code: f64,
}

impl From<MatchingConfig> for MatchingConfigRepr {
    fn from(c: MatchingConfig) -> Self {
        MatchingConfigRepr {
            sim_text: c.text.metric.name(),
            theta_text: c.text.theta,
            backup_text: c.text.backup.name(),
            backup_theta_text: c.text.backup_theta,
            sim_code: c.code.metric.name(),
            theta_code: c.code.theta,
            backup_code: c.code.backup.name(),
            backup_theta_code: c.code.backup_theta,
        }
    }
}

impl TryFrom<MatchingConfigRepr> for MatchingConfig {
    type Error = ConfigError;

    fn try_from(r: MatchingConfigRepr) -> Result<Self, Self::Error> {
        let c = MatchingConfig {
            text: TypeMatching {
                metric: r.sim_text.parse()?,
                theta: r.theta_text,
                backup: r.backup_text.parse()?,
                backup_theta: r.backup_theta_text,
            },
            code: TypeMatching {
                metric: r.sim_code.parse()?,
                theta: r.theta_code,
                backup: r.backup_code.parse()?,
                backup_theta: r.backup_theta_code,
            },
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Unique, context and position phases only.
    Initial,
    /// Adds runner-up predecessors when the best candidate is taken.
    #[default]
    Revised,
}

/// Matches `cur` against `prev` and writes pred links and counts.
pub fn match_versions(
    prev: &mut PostVersion,
    cur: &mut PostVersion,
    config: &MatchingConfig,
    strategy: Strategy,
) -> Result<PairMatcher, SimilarityError> {
    let sets = compute_candidates(prev, cur, config)?;
    let mut matcher = PairMatcher::new(sets);
    match strategy {
        Strategy::Initial => matcher.run_initial(),
        Strategy::Revised => matcher.run_revised(),
    }
    for (l, block) in prev.blocks.iter_mut().enumerate() {
        block.succ_count = matcher.sets.succ(l).len();
    }
    for (j, block) in cur.blocks.iter_mut().enumerate() {
        block.pred_count = matcher.sets.pred(j).len();
        if let Some(l) = matcher.pred[j] {
            let c = matcher.sets.candidate(j, l).expect("linked blocks are candidates");
            block.pred = Some(prev.block_ref(l));
            block.pred_similarity = Some(c.score);
            block.pred_is_equal = c.equal;
            block.root = prev.blocks[l].root;
        }
    }
    Ok(matcher)
}

/// Reconstructs all block lineages of `post`, replacing earlier results.
pub fn process_version_history(
    post: &mut Post,
    config: &MatchingConfig,
    strategy: Strategy,
) -> Result<(), SimilarityError> {
    for v in &mut post.versions {
        let id = v.post_history_id;
        for b in &mut v.blocks {
            b.reset_lineage(id);
        }
    }
    for i in 1..post.versions.len() {
        let (done, rest) = post.versions.split_at_mut(i);
        match_versions(&mut done[i - 1], &mut rest[0], config, strategy)?;
    }
    Ok(())
}

/// One block version with a predecessor and the diff from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDiff {
    pub block: BlockRef,
    pub pred: BlockRef,
    pub diff: PostBlockDiff,
}

/// Line diffs of every linked block version of `post`.
pub fn block_diffs(post: &Post) -> Vec<BlockDiff> {
    let mut out = Vec::new();
    for i in 1..post.versions.len() {
        let (prev, cur) = (&post.versions[i - 1], &post.versions[i]);
        for (j, b) in cur.blocks.iter().enumerate() {
            if let Some(pred) = b.pred {
                let base = prev.block(pred.local_id).expect("pred is in the previous version");
                out.push(BlockDiff {
                    block: cur.block_ref(j),
                    pred,
                    diff: line_diff(base.content(), b.content()),
                });
            }
        }
    }
    out
}
