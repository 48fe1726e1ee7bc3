//! Human-validated predecessor connections and their CSV file format.
//!
//! One row per block version:
//! `PostId,PostHistoryId,LocalId,BlockType,PredLocalId`, where an empty
//! `PredLocalId` records that the block has no predecessor. The predecessor
//! always lives in the immediately preceding version of the same post.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{BlockType, LocalId, Post, PostHistoryId, PostId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GtRecord {
    #[serde(rename = "PostId")]
    pub post_id: PostId,
    #[serde(rename = "PostHistoryId")]
    pub post_history_id: PostHistoryId,
    #[serde(rename = "LocalId")]
    pub local_id: LocalId,
    #[serde(rename = "BlockType", with = "block_type_id")]
    pub block_type: BlockType,
    #[serde(rename = "PredLocalId")]
    pub pred_local_id: Option<LocalId>,
}

mod block_type_id {
    use super::BlockType;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &BlockType, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(t.type_id())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BlockType, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(D::Error::custom)
    }
}

/// A predecessor connection: block `local_id` of version `post_history_id`
/// linked to block `pred_local_id` of the preceding version.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Connection {
    pub post_history_id: PostHistoryId,
    pub local_id: LocalId,
    pub pred_local_id: LocalId,
}

#[derive(Debug, thiserror::Error)]
pub enum GroundTruthError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("duplicate ground-truth row for post history {0}, local id {1}")]
    Duplicate(PostHistoryId, LocalId),
    #[error("ground truth does not match the corpus: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    records: BTreeMap<(PostHistoryId, LocalId), GtRecord>,
}

impl GroundTruth {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: impl IntoIterator<Item = GtRecord>) -> Result<Self, GroundTruthError> {
        let mut gt = GroundTruth::new();
        for r in records {
            gt.insert(r)?;
        }
        Ok(gt)
    }

    pub fn insert(&mut self, r: GtRecord) -> Result<(), GroundTruthError> {
        let key = (r.post_history_id, r.local_id);
        if self.records.insert(key, r).is_some() {
            return Err(GroundTruthError::Duplicate(key.0, key.1));
        }
        Ok(())
    }

    /// Inserts or replaces the row for a block.
    pub fn upsert(&mut self, r: GtRecord) {
        self.records.insert((r.post_history_id, r.local_id), r);
    }

    /// Removes every row of one post version.
    pub fn clear_version(&mut self, post_history_id: PostHistoryId) {
        self.records.retain(|k, _| k.0 != post_history_id);
    }

    pub fn records(&self) -> impl Iterator<Item = &GtRecord> {
        self.records.values()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn post_ids(&self) -> BTreeSet<PostId> {
        self.records.values().map(|r| r.post_id).collect()
    }

    pub fn connections(&self, block_type: BlockType) -> HashSet<Connection> {
        self.records
            .values()
            .filter(|r| r.block_type == block_type)
            .filter_map(|r| {
                r.pred_local_id.map(|p| Connection {
                    post_history_id: r.post_history_id,
                    local_id: r.local_id,
                    pred_local_id: p,
                })
            })
            .collect()
    }

    pub fn restricted_to(&self, posts: &BTreeSet<PostId>) -> GroundTruth {
        GroundTruth {
            records: self
                .records
                .iter()
                .filter(|(_, r)| posts.contains(&r.post_id))
                .map(|(k, r)| (*k, *r))
                .collect(),
        }
    }

    pub fn read<R: io::Read>(reader: R) -> Result<Self, csv::Error> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut gt = GroundTruth::new();
        for row in rdr.deserialize() {
            let r: GtRecord = row?;
            gt.insert(r)
                .map_err(|e| csv::Error::from(io::Error::new(io::ErrorKind::InvalidData, e.to_string())))?;
        }
        Ok(gt)
    }

    pub fn write<W: io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        if self.records.is_empty() {
            w.write_record(["PostId", "PostHistoryId", "LocalId", "BlockType", "PredLocalId"])?;
        }
        for r in self.records.values() {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn load(path: &Path) -> Result<Self, GroundTruthError> {
        let file = std::fs::File::open(path).map_err(|source| GroundTruthError::Io {
            path: path.display().to_string(),
            source,
        })?;
        GroundTruth::read(io::BufReader::new(file)).map_err(|source| GroundTruthError::Csv {
            path: path.display().to_string(),
            source,
        })
    }

    /// Writes to a sibling temporary file, then renames it over `path`, so
    /// readers never see a partial file.
    pub fn save(&self, path: &Path) -> Result<(), GroundTruthError> {
        let io_err = |source| GroundTruthError::Io {
            path: path.display().to_string(),
            source,
        };
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let tmp = path.with_file_name(format!(".{name}.tmp"));
        let file = std::fs::File::create(&tmp).map_err(io_err)?;
        let mut w = io::BufWriter::new(file);
        self.write(&mut w).map_err(|source| GroundTruthError::Csv {
            path: path.display().to_string(),
            source,
        })?;
        let file = w.into_inner().map_err(|e| io_err(e.into_error()))?;
        file.sync_all().map_err(io_err)?;
        std::fs::rename(&tmp, path).map_err(io_err)
    }

    /// Checks that every row names an existing block of the stated type, that
    /// predecessors exist in the preceding version with the same type, and
    /// that no predecessor is used twice.
    pub fn validate(&self, posts: &[Post]) -> Result<(), GroundTruthError> {
        let mut index = HashMap::new();
        for p in posts {
            for (i, v) in p.versions.iter().enumerate() {
                index.insert(v.post_history_id, (p, i));
            }
        }
        let mut used = HashSet::new();
        for r in self.records.values() {
            let fail = |msg: String| Err(GroundTruthError::Inconsistent(msg));
            let Some(&(post, i)) = index.get(&r.post_history_id) else {
                return fail(format!("unknown post history id {}", r.post_history_id));
            };
            if post.post_id != r.post_id {
                return fail(format!(
                    "post history id {} belongs to post {}, not {}",
                    r.post_history_id, post.post_id, r.post_id
                ));
            }
            let v = &post.versions[i];
            match v.block(r.local_id) {
                Some(b) if b.block_type() == r.block_type => {}
                _ => {
                    return fail(format!(
                        "no {} block {} in post history {}",
                        r.block_type, r.local_id, r.post_history_id
                    ))
                }
            }
            if let Some(p) = r.pred_local_id {
                if i == 0 {
                    return fail(format!(
                        "post history {} is the first version and cannot have predecessors",
                        r.post_history_id
                    ));
                }
                let prev = &post.versions[i - 1];
                match prev.block(p) {
                    Some(b) if b.block_type() == r.block_type => {}
                    _ => {
                        return fail(format!(
                            "predecessor {} of block {} in post history {} is missing or has another type",
                            p, r.local_id, r.post_history_id
                        ))
                    }
                }
                if !used.insert((prev.post_history_id, p)) {
                    return fail(format!(
                        "block {} of post history {} is the predecessor of two blocks",
                        p, prev.post_history_id
                    ));
                }
            }
        }
        Ok(())
    }

    /// Ground truth equal to the lineage stored in `posts`.
    pub fn from_posts(posts: &[Post]) -> GroundTruth {
        let mut gt = GroundTruth::new();
        for p in posts {
            for v in p.versions.iter().skip(1) {
                for b in &v.blocks {
                    gt.upsert(GtRecord {
                        post_id: p.post_id,
                        post_history_id: v.post_history_id,
                        local_id: b.local_id(),
                        block_type: b.block_type(),
                        pred_local_id: b.pred.map(|r| r.local_id),
                    });
                }
            }
        }
        gt
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(hid: i64, local: u32, t: BlockType, pred: Option<u32>) -> GtRecord {
        GtRecord {
            post_id: 7,
            post_history_id: hid,
            local_id: local,
            block_type: t,
            pred_local_id: pred,
        }
    }

    #[test]
    fn csv_round_trip() {
        let gt =
            GroundTruth::from_records([rec(2, 1, BlockType::Text, Some(1)), rec(2, 2, BlockType::Code, None)]).unwrap();
        let s = gt.to_csv_string();
        assert_eq!(
            s,
            "PostId,PostHistoryId,LocalId,BlockType,PredLocalId\n7,2,1,1,1\n7,2,2,2,\n"
        );
        assert_eq!(GroundTruth::read(s.as_bytes()).unwrap(), gt);
        assert_eq!(gt.connections(BlockType::Text).len(), 1);
        assert!(gt.connections(BlockType::Code).is_empty());
    }

    #[test]
    fn empty_is_header_only() {
        let s = GroundTruth::new().to_csv_string();
        assert_eq!(s, "PostId,PostHistoryId,LocalId,BlockType,PredLocalId\n");
        assert!(GroundTruth::read(s.as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn save_replaces_the_file_without_leftovers() {
        let dir = tempfile::TempDir::new().unwrap();
        let path = dir.path().join("gt.csv");
        std::fs::write(&path, "stale").unwrap();
        let gt = GroundTruth::from_records([rec(1, 1, BlockType::Text, None)]).unwrap();
        gt.save(&path).unwrap();
        assert_eq!(GroundTruth::load(&path).unwrap(), gt);
        let names: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names, ["gt.csv"]);
        assert!(gt.save(&dir.path().join("missing/gt.csv")).is_err());
    }

    #[test]
    fn duplicates_rejected() {
        let s = "PostId,PostHistoryId,LocalId,BlockType,PredLocalId\n7,2,1,text,1\n7,2,1,text,\n";
        assert!(GroundTruth::read(s.as_bytes()).is_err());
    }
}
