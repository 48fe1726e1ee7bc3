//! Posts, post versions and post block versions.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub type PostId = i64;
pub type PostHistoryId = i64;
pub type LocalId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockType {
    Text,
    Code,
}

impl BlockType {
    /// Numeric id used in exported tables (1 text, 2 code).
    pub fn type_id(self) -> u8 {
        match self {
            BlockType::Text => 1,
            BlockType::Code => 2,
        }
    }

    pub fn from_type_id(id: u8) -> Option<Self> {
        match id {
            1 => Some(BlockType::Text),
            2 => Some(BlockType::Code),
            _ => None,
        }
    }

    pub const ALL: [BlockType; 2] = [BlockType::Text, BlockType::Code];
}

impl std::fmt::Display for BlockType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BlockType::Text => "text",
            BlockType::Code => "code",
        })
    }
}

impl std::str::FromStr for BlockType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "text" | "1" => Ok(BlockType::Text),
            "code" | "2" => Ok(BlockType::Code),
            other => Err(format!("unknown block type {other:?}")),
        }
    }
}

/// One text or code block of a post version.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostBlock {
    pub block_type: BlockType,
    /// 1-based position within the version.
    pub local_id: LocalId,
    pub content: String,
    pub line_count: usize,
}

impl PostBlock {
    pub fn new(block_type: BlockType, local_id: LocalId, content: String) -> Self {
        let line_count = content.lines().count();
        PostBlock {
            block_type,
            local_id,
            content,
            line_count,
        }
    }
}

/// Identifies a block version by its post version and position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockRef {
    pub post_history_id: PostHistoryId,
    pub local_id: LocalId,
}

/// A block together with its lineage information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostBlockVersion {
    #[serde(flatten)]
    pub block: PostBlock,
    pub pred: Option<BlockRef>,
    pub pred_similarity: Option<f64>,
    pub pred_is_equal: bool,
    /// Number of possible predecessors.
    pub pred_count: usize,
    /// Number of possible successors in the next version.
    pub succ_count: usize,
    /// First block version of the lineage; the block itself when it has no predecessor.
    pub root: BlockRef,
}

impl PostBlockVersion {
    pub fn unlinked(block: PostBlock, post_history_id: PostHistoryId) -> Self {
        let root = BlockRef {
            post_history_id,
            local_id: block.local_id,
        };
        PostBlockVersion {
            block,
            pred: None,
            pred_similarity: None,
            pred_is_equal: false,
            pred_count: 0,
            succ_count: 0,
            root,
        }
    }

    pub fn block_type(&self) -> BlockType {
        self.block.block_type
    }

    pub fn local_id(&self) -> LocalId {
        self.block.local_id
    }

    pub fn content(&self) -> &str {
        &self.block.content
    }

    pub fn reset_lineage(&mut self, post_history_id: PostHistoryId) {
        *self = PostBlockVersion::unlinked(self.block.clone(), post_history_id);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostVersion {
    pub post_id: PostId,
    pub post_history_id: PostHistoryId,
    pub post_history_type_id: u8,
    /// 1-based, gapless.
    pub version_index: usize,
    pub creation_date: DateTime<Utc>,
    pub user_id: Option<i64>,
    /// Raw Markdown body.
    pub content: String,
    pub blocks: Vec<PostBlockVersion>,
    pub pred_post_history_id: Option<PostHistoryId>,
    pub succ_post_history_id: Option<PostHistoryId>,
}

impl PostVersion {
    pub fn block_ref(&self, index: usize) -> BlockRef {
        BlockRef {
            post_history_id: self.post_history_id,
            local_id: self.blocks[index].local_id(),
        }
    }

    pub fn block(&self, local_id: LocalId) -> Option<&PostBlockVersion> {
        local_id.checked_sub(1).and_then(|i| self.blocks.get(i as usize))
    }

    /// Local ids of the blocks of one type.
    pub fn local_ids(&self, block_type: BlockType) -> impl Iterator<Item = LocalId> + '_ {
        self.blocks
            .iter()
            .filter(move |b| b.block_type() == block_type)
            .map(|b| b.local_id())
    }
}

/// A question or answer with its ordered body versions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub post_id: PostId,
    /// 1 question, 2 answer.
    pub post_type_id: u8,
    /// Question id for answers; `None` for questions.
    pub parent_id: Option<PostId>,
    pub versions: Vec<PostVersion>,
}

impl Post {
    /// Thread the post belongs to: the question's id.
    pub fn thread_id(&self) -> PostId {
        self.parent_id.unwrap_or(self.post_id)
    }

    pub fn latest(&self) -> Option<&PostVersion> {
        self.versions.last()
    }

    pub fn version_by_history_id(&self, id: PostHistoryId) -> Option<(usize, &PostVersion)> {
        self.versions.iter().enumerate().find(|(_, v)| v.post_history_id == id)
    }
}
