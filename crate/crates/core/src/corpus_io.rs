//! Post history events in, result tables out.
//!
//! Events are read as JSON lines (canonical) or CSV with the columns
//! `PostId,PostTypeId,ParentId,PostHistoryId,PostHistoryTypeId,CreationDate,UserId,Text`.
//! Body events (history types 2, 5, 8) become post versions, title events
//! (1, 4, 7) become title versions, anything else is counted and skipped.
//!
//! Exported tables, one CSV file each:
//! `PostVersion`, `PostBlockVersion`, `PostBlockDiff`, `PostVersionUrl`,
//! `TitleVersion`. `PostVersion.csv` carries the event columns, so it can be
//! ingested again.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDateTime, SubsecRound, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use textsim::SimilarityError;

use crate::extraction::{extract_blocks, extract_urls, BlockPosition, ExtractionWarning};
use crate::history::{
    block_diffs, process_version_history, title_history, DiffKind, DiffOp, MatchingConfig, PostBlockDiff, Strategy,
    TitleEvent, TitleVersion,
};
use crate::model::{BlockRef, BlockType, Post, PostBlockVersion, PostHistoryId, PostId, PostVersion};

pub const BODY_TYPES: [u8; 3] = [2, 5, 8];
pub const TITLE_TYPES: [u8; 3] = [1, 4, 7];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostHistoryEvent {
    pub post_id: PostId,
    pub post_type_id: u8,
    pub parent_id: Option<PostId>,
    pub post_history_id: PostHistoryId,
    pub post_history_type_id: u8,
    pub creation_date: DateTime<Utc>,
    pub user_id: Option<i64>,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    JsonLines,
    Csv,
}

impl Format {
    /// `.csv` means CSV, everything else JSON lines.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::JsonLines,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate post history id {0}")]
    DuplicateId(PostHistoryId),
    #[error("post history id {id}: unparseable creation date {value:?}")]
    BadDate { id: PostHistoryId, value: String },
}

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
}

/// Wire form of an event: dates stay strings until validated.
#[derive(Debug, Deserialize)]
struct RawEvent {
    #[serde(rename = "postId", alias = "PostId")]
    post_id: PostId,
    #[serde(rename = "postTypeId", alias = "PostTypeId")]
    post_type_id: u8,
    #[serde(rename = "parentId", alias = "ParentId", default)]
    parent_id: Option<PostId>,
    #[serde(rename = "postHistoryId", alias = "PostHistoryId")]
    post_history_id: PostHistoryId,
    #[serde(rename = "postHistoryTypeId", alias = "PostHistoryTypeId")]
    post_history_type_id: u8,
    #[serde(rename = "creationDate", alias = "CreationDate")]
    creation_date: String,
    #[serde(rename = "userId", alias = "UserId", default)]
    user_id: Option<i64>,
    #[serde(rename = "text", alias = "Text", default)]
    text: String,
}

/// Parses an ISO-8601 timestamp as UTC, truncated to whole seconds. A
/// timestamp without offset is taken to be UTC.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(d) = DateTime::parse_from_rfc3339(s) {
        return Some(d.with_timezone(&Utc).trunc_subsecs(0));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(n) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(n.and_utc().trunc_subsecs(0));
        }
    }
    None
}

pub fn format_timestamp(d: &DateTime<Utc>) -> String {
    d.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

impl RawEvent {
    fn validate(self) -> Result<PostHistoryEvent, IngestError> {
        let creation_date = parse_timestamp(&self.creation_date).ok_or_else(|| IngestError::BadDate {
            id: self.post_history_id,
            value: self.creation_date.clone(),
        })?;
        Ok(PostHistoryEvent {
            post_id: self.post_id,
            post_type_id: self.post_type_id,
            parent_id: self.parent_id,
            post_history_id: self.post_history_id,
            post_history_type_id: self.post_history_type_id,
            creation_date,
            user_id: self.user_id,
            text: self.text,
        })
    }
}

pub fn read_json_lines<R: BufRead>(reader: R) -> Result<Vec<PostHistoryEvent>, IngestError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| IngestError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawEvent = serde_json::from_str(&line).map_err(|e| IngestError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(raw.validate()?);
    }
    Ok(out)
}

pub fn read_csv<R: io::Read>(reader: R) -> Result<Vec<PostHistoryEvent>, IngestError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<RawEvent>().enumerate() {
        let raw = row.map_err(|e| IngestError::Parse {
            line: e.position().map_or(i + 2, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        out.push(raw.validate()?);
    }
    Ok(out)
}

pub fn read_events(path: &Path, format: Format) -> Result<Vec<PostHistoryEvent>, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    match format {
        Format::JsonLines => read_json_lines(reader),
        Format::Csv => read_csv(reader),
    }
}

pub fn write_json_lines<W: Write>(events: &[PostHistoryEvent], mut w: W) -> io::Result<()> {
    for e in events {
        let v = serde_json::json!({
            "postId": e.post_id,
            "postTypeId": e.post_type_id,
            "parentId": e.parent_id,
            "postHistoryId": e.post_history_id,
            "postHistoryTypeId": e.post_history_type_id,
            "creationDate": format_timestamp(&e.creation_date),
            "userId": e.user_id,
            "text": e.text,
        });
        writeln!(w, "{v}")?;
    }
    w.flush()
}

/// A located extraction warning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VersionWarning {
    pub post_history_id: PostHistoryId,
    pub warning: ExtractionWarning,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    /// Ordered by post id.
    pub posts: Vec<Post>,
    /// Title versions of all posts, grouped by post id.
    pub titles: Vec<TitleVersion>,
    /// Events skipped per history type id.
    pub skipped: BTreeMap<u8, usize>,
    pub warnings: Vec<VersionWarning>,
}

/// Builds per-post version lists with extracted blocks.
pub fn ingest(events: Vec<PostHistoryEvent>) -> Result<Corpus, IngestError> {
    let mut seen = HashSet::new();
    let mut bodies: BTreeMap<PostId, Vec<PostHistoryEvent>> = BTreeMap::new();
    let mut titles: BTreeMap<PostId, Vec<TitleEvent>> = BTreeMap::new();
    let mut skipped = BTreeMap::new();
    for e in events {
        if !seen.insert(e.post_history_id) {
            return Err(IngestError::DuplicateId(e.post_history_id));
        }
        if BODY_TYPES.contains(&e.post_history_type_id) {
            bodies.entry(e.post_id).or_default().push(e);
        } else if TITLE_TYPES.contains(&e.post_history_type_id) {
            titles.entry(e.post_id).or_default().push(TitleEvent {
                post_id: e.post_id,
                post_history_id: e.post_history_id,
                post_history_type_id: e.post_history_type_id,
                creation_date: e.creation_date,
                title: e.text,
            });
        } else {
            *skipped.entry(e.post_history_type_id).or_insert(0) += 1;
        }
    }
    let mut corpus = Corpus {
        skipped,
        ..Corpus::default()
    };
    for (post_id, mut events) in bodies {
        events.sort_by_key(|e| (e.creation_date, e.post_history_id));
        let first = &events[0];
        let (post_type_id, parent_id) = (first.post_type_id, first.parent_id);
        let ids: Vec<PostHistoryId> = events.iter().map(|e| e.post_history_id).collect();
        let mut versions = Vec::with_capacity(events.len());
        for (i, e) in events.into_iter().enumerate() {
            let ex = extract_blocks(&e.text);
            corpus
                .warnings
                .extend(ex.warnings.into_iter().map(|warning| VersionWarning {
                    post_history_id: e.post_history_id,
                    warning,
                }));
            versions.push(PostVersion {
                post_id,
                post_history_id: e.post_history_id,
                post_history_type_id: e.post_history_type_id,
                version_index: i + 1,
                creation_date: e.creation_date,
                user_id: e.user_id,
                blocks: ex
                    .blocks
                    .into_iter()
                    .map(|b| PostBlockVersion::unlinked(b, e.post_history_id))
                    .collect(),
                content: e.text,
                pred_post_history_id: i.checked_sub(1).map(|k| ids[k]),
                succ_post_history_id: ids.get(i + 1).copied(),
            });
        }
        corpus.posts.push(Post {
            post_id,
            post_type_id,
            parent_id,
            versions,
        });
    }
    for (_, events) in titles {
        corpus.titles.extend(title_history(events));
    }
    Ok(corpus)
}

/// Reconstructs the block lineages of every post, in parallel.
pub fn reconstruct(corpus: &mut Corpus, config: &MatchingConfig, strategy: Strategy) -> Result<(), SimilarityError> {
    corpus
        .posts
        .par_iter_mut()
        .try_for_each(|p| process_version_history(p, config, strategy))
}

/// Sequential ids for block versions, in post, version, local id order.
pub fn block_version_ids(posts: &[Post]) -> BTreeMap<BlockRef, u64> {
    let mut ids = BTreeMap::new();
    let mut next = 1u64;
    for p in posts {
        for v in &p.versions {
            for (k, _) in v.blocks.iter().enumerate() {
                ids.insert(v.block_ref(k), next);
                next += 1;
            }
        }
    }
    ids
}

pub const POST_VERSION_HEADER: [&str; 11] = [
    "PostId",
    "PostTypeId",
    "ParentId",
    "PostHistoryId",
    "PostHistoryTypeId",
    "VersionIndex",
    "CreationDate",
    "UserId",
    "PredPostHistoryId",
    "SuccPostHistoryId",
    "Text",
];

pub const POST_BLOCK_VERSION_HEADER: [&str; 18] = [
    "Id",
    "PostBlockTypeId",
    "PostId",
    "PostHistoryId",
    "LocalId",
    "PredPostBlockVersionId",
    "PredPostHistoryId",
    "PredLocalId",
    "RootPostBlockVersionId",
    "RootPostHistoryId",
    "RootLocalId",
    "PredEqual",
    "PredSimilarity",
    "PredCount",
    "SuccCount",
    "LineCount",
    "Length",
    "Content",
];

pub const POST_BLOCK_DIFF_HEADER: [&str; 10] = [
    "Id",
    "PostId",
    "PostHistoryId",
    "LocalId",
    "PostBlockVersionId",
    "PredPostHistoryId",
    "PredLocalId",
    "PredPostBlockVersionId",
    "PostBlockDiffOperationId",
    "Text",
];

pub const POST_VERSION_URL_HEADER: [&str; 14] = [
    "Id",
    "PostId",
    "PostHistoryId",
    "PostBlockVersionId",
    "LocalId",
    "LinkType",
    "LinkPosition",
    "Protocol",
    "RootDomain",
    "CompleteDomain",
    "Path",
    "Query",
    "FragmentIdentifier",
    "Url",
];

pub const TITLE_VERSION_HEADER: [&str; 9] = [
    "PostId",
    "PostHistoryId",
    "PostHistoryTypeId",
    "CreationDate",
    "Title",
    "PredPostHistoryId",
    "PredEditDistance",
    "SuccPostHistoryId",
    "SuccEditDistance",
];

/// Diff operation ids: -1 deleted, 0 unchanged, 1 added.
pub fn diff_operation_id(kind: DiffKind) -> i8 {
    match kind {
        DiffKind::Deleted => -1,
        DiffKind::Unchanged => 0,
        DiffKind::Added => 1,
    }
}

pub fn diff_kind(op_id: i8) -> Option<DiffKind> {
    match op_id {
        -1 => Some(DiffKind::Deleted),
        0 => Some(DiffKind::Unchanged),
        1 => Some(DiffKind::Added),
        _ => None,
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

type Rows = Vec<Vec<String>>;

pub fn post_version_rows(posts: &[Post]) -> Rows {
    let mut rows = Vec::new();
    for p in posts {
        for v in &p.versions {
            rows.push(vec![
                p.post_id.to_string(),
                p.post_type_id.to_string(),
                opt(p.parent_id),
                v.post_history_id.to_string(),
                v.post_history_type_id.to_string(),
                v.version_index.to_string(),
                format_timestamp(&v.creation_date),
                opt(v.user_id),
                opt(v.pred_post_history_id),
                opt(v.succ_post_history_id),
                v.content.clone(),
            ]);
        }
    }
    rows
}

pub fn post_block_version_rows(posts: &[Post], ids: &BTreeMap<BlockRef, u64>) -> Rows {
    let mut rows = Vec::new();
    for p in posts {
        for v in &p.versions {
            for (k, b) in v.blocks.iter().enumerate() {
                rows.push(vec![
                    ids[&v.block_ref(k)].to_string(),
                    b.block_type().type_id().to_string(),
                    p.post_id.to_string(),
                    v.post_history_id.to_string(),
                    b.local_id().to_string(),
                    opt(b.pred.map(|r| ids[&r])),
                    opt(b.pred.map(|r| r.post_history_id)),
                    opt(b.pred.map(|r| r.local_id)),
                    ids[&b.root].to_string(),
                    b.root.post_history_id.to_string(),
                    b.root.local_id.to_string(),
                    opt(b.pred.map(|_| b.pred_is_equal)),
                    opt(b.pred_similarity),
                    b.pred_count.to_string(),
                    b.succ_count.to_string(),
                    b.block.line_count.to_string(),
                    b.content().chars().count().to_string(),
                    b.content().to_string(),
                ]);
            }
        }
    }
    rows
}

pub fn post_block_diff_rows(posts: &[Post], ids: &BTreeMap<BlockRef, u64>) -> Rows {
    let mut rows = Vec::new();
    let mut next = 1u64;
    for p in posts {
        for d in block_diffs(p) {
            for op in &d.diff.ops {
                rows.push(vec![
                    next.to_string(),
                    p.post_id.to_string(),
                    d.block.post_history_id.to_string(),
                    d.block.local_id.to_string(),
                    ids[&d.block].to_string(),
                    d.pred.post_history_id.to_string(),
                    d.pred.local_id.to_string(),
                    ids[&d.pred].to_string(),
                    diff_operation_id(op.kind).to_string(),
                    op.line.clone(),
                ]);
                next += 1;
            }
        }
    }
    rows
}

pub fn post_version_url_rows(posts: &[Post], ids: &BTreeMap<BlockRef, u64>) -> Rows {
    let mut rows = Vec::new();
    let mut next = 1u64;
    for p in posts {
        for v in &p.versions {
            let count = v.blocks.len() as u32;
            for (k, b) in v.blocks.iter().enumerate() {
                if b.block_type() != BlockType::Text {
                    continue;
                }
                let pos = BlockPosition {
                    local_id: b.local_id(),
                    block_count: count,
                };
                for l in extract_urls(b.content(), pos) {
                    let link_type = serde_json::to_value(l.link_type).expect("enum serializes");
                    let position = serde_json::to_value(l.position).expect("enum serializes");
                    rows.push(vec![
                        next.to_string(),
                        p.post_id.to_string(),
                        v.post_history_id.to_string(),
                        ids[&v.block_ref(k)].to_string(),
                        b.local_id().to_string(),
                        link_type.as_str().unwrap_or_default().to_string(),
                        position.as_str().unwrap_or_default().to_string(),
                        l.protocol,
                        l.root_domain,
                        l.complete_domain,
                        l.path,
                        l.query.unwrap_or_default(),
                        l.fragment.unwrap_or_default(),
                        l.url,
                    ]);
                    next += 1;
                }
            }
        }
    }
    rows
}

pub fn title_version_rows(titles: &[TitleVersion]) -> Rows {
    titles
        .iter()
        .map(|t| {
            vec![
                t.post_id.to_string(),
                t.post_history_id.to_string(),
                t.post_history_type_id.to_string(),
                format_timestamp(&t.creation_date),
                t.title.clone(),
                opt(t.pred_post_history_id),
                opt(t.pred_edit_distance),
                opt(t.succ_post_history_id),
                opt(t.succ_edit_distance),
            ]
        })
        .collect()
}

pub fn write_table<W: Write>(header: &[&str], rows: &[Vec<String>], w: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_table_file(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, ExportError> {
    let path = dir.join(format!("{name}.csv"));
    let file = File::create(&path).map_err(|source| ExportError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_table(header, rows, BufWriter::new(file)).map_err(|source| ExportError::Csv {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}

/// Writes the five tables into `dir` (created if missing) and returns their paths.
pub fn export_tables(corpus: &Corpus, dir: &Path) -> Result<Vec<PathBuf>, ExportError> {
    std::fs::create_dir_all(dir).map_err(|source| ExportError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let posts = &corpus.posts;
    let ids = block_version_ids(posts);
    type Table<'a> = (&'a str, &'a [&'a str], Box<dyn Fn() -> Rows + Sync + 'a>);
    let tables: Vec<Table> = vec![
        (
            "PostVersion",
            &POST_VERSION_HEADER,
            Box::new(|| post_version_rows(posts)),
        ),
        (
            "PostBlockVersion",
            &POST_BLOCK_VERSION_HEADER,
            Box::new(|| post_block_version_rows(posts, &ids)),
        ),
        (
            "PostBlockDiff",
            &POST_BLOCK_DIFF_HEADER,
            Box::new(|| post_block_diff_rows(posts, &ids)),
        ),
        (
            "PostVersionUrl",
            &POST_VERSION_URL_HEADER,
            Box::new(|| post_version_url_rows(posts, &ids)),
        ),
        (
            "TitleVersion",
            &TITLE_VERSION_HEADER,
            Box::new(|| title_version_rows(&corpus.titles)),
        ),
    ];
    tables
        .par_iter()
        .map(|(name, header, rows)| write_table_file(dir, name, header, &rows()))
        .collect()
}

/// Descriptive statistics of a reconstructed corpus.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Summary {
    pub posts: usize,
    pub versions: usize,
    pub text_blocks: usize,
    pub code_blocks: usize,
    pub lifespans: usize,
    pub mean_lifespan_length: f64,
    pub max_lifespan_length: usize,
    pub matched_blocks: usize,
    /// Share of matched blocks whose local id equals their predecessor's.
    pub same_local_id_percentage: f64,
    pub title_versions: usize,
    pub skipped_events: BTreeMap<u8, usize>,
    pub extraction_warnings: usize,
}

pub fn summarize(corpus: &Corpus) -> Summary {
    let mut s = Summary {
        posts: corpus.posts.len(),
        title_versions: corpus.titles.len(),
        skipped_events: corpus.skipped.clone(),
        extraction_warnings: corpus.warnings.len(),
        ..Summary::default()
    };
    let mut lifespan: BTreeMap<BlockRef, usize> = BTreeMap::new();
    let mut same = 0;
    for p in &corpus.posts {
        s.versions += p.versions.len();
        for v in &p.versions {
            for b in &v.blocks {
                match b.block_type() {
                    BlockType::Text => s.text_blocks += 1,
                    BlockType::Code => s.code_blocks += 1,
                }
                *lifespan.entry(b.root).or_insert(0) += 1;
                if let Some(pred) = b.pred {
                    s.matched_blocks += 1;
                    if pred.local_id == b.local_id() {
                        same += 1;
                    }
                }
            }
        }
    }
    s.lifespans = lifespan.len();
    s.max_lifespan_length = lifespan.values().copied().max().unwrap_or(0);
    if s.lifespans > 0 {
        s.mean_lifespan_length = lifespan.values().sum::<usize>() as f64 / s.lifespans as f64;
    }
    if s.matched_blocks > 0 {
        s.same_local_id_percentage = 100.0 * same as f64 / s.matched_blocks as f64;
    }
    s
}

/// Events equivalent to the body versions of `posts`, for re-ingestion.
pub fn body_events(posts: &[Post]) -> Vec<PostHistoryEvent> {
    posts
        .iter()
        .flat_map(|p| {
            p.versions.iter().map(move |v| PostHistoryEvent {
                post_id: p.post_id,
                post_type_id: p.post_type_id,
                parent_id: p.parent_id,
                post_history_id: v.post_history_id,
                post_history_type_id: v.post_history_type_id,
                creation_date: v.creation_date,
                user_id: v.user_id,
                text: v.content.clone(),
            })
        })
        .collect()
}

/// Content check for an exported diff table: applies each block's ops to its
/// predecessor's content. Returns the number of checked block versions.
pub fn verify_diff_rows(posts: &[Post], rows: &[Vec<String>]) -> Result<usize, String> {
    let ids = block_version_ids(posts);
    let mut content: BTreeMap<u64, &str> = BTreeMap::new();
    for p in posts {
        for v in &p.versions {
            for (k, b) in v.blocks.iter().enumerate() {
                content.insert(ids[&v.block_ref(k)], b.content());
            }
        }
    }
    let mut grouped: BTreeMap<(u64, u64), Vec<DiffOp>> = BTreeMap::new();
    for r in rows {
        let id: u64 = r[4].parse().map_err(|e| format!("{e}"))?;
        let pred: u64 = r[7].parse().map_err(|e| format!("{e}"))?;
        let op: i8 = r[8].parse().map_err(|e| format!("{e}"))?;
        let kind = diff_kind(op).ok_or_else(|| format!("bad operation id {op}"))?;
        grouped.entry((id, pred)).or_default().push(DiffOp {
            kind,
            line: r[9].clone(),
        });
    }
    for ((id, pred), ops) in &grouped {
        let diff = PostBlockDiff { ops: ops.clone() };
        let out = diff.apply(content[pred]).map_err(|e| e.to_string())?;
        if out != content[id] {
            return Err(format!("block version {id} does not match its patched predecessor"));
        }
    }
    // Blocks are never empty, so every linked block has at least one op.
    let expected: usize = posts.iter().map(|p| block_diffs(p).len()).sum();
    if grouped.len() != expected {
        return Err(format!("{} diffed block versions, expected {expected}", grouped.len()));
    }
    Ok(grouped.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(post: i64, hid: i64, ty: u8, date: &str, text: &str) -> PostHistoryEvent {
        PostHistoryEvent {
            post_id: post,
            post_type_id: 1,
            parent_id: None,
            post_history_id: hid,
            post_history_type_id: ty,
            creation_date: parse_timestamp(date).unwrap(),
            user_id: Some(3),
            text: text.to_string(),
        }
    }

    #[test]
    fn filters_and_orders() {
        let events = vec![
            ev(1, 13, 5, "2018-01-03T00:00:00Z", "third"),
            ev(1, 10, 2, "2018-01-01T00:00:00Z", "first"),
            ev(1, 11, 4, "2018-01-02T00:00:00Z", "title"),
            ev(1, 12, 8, "2018-01-02T00:00:00Z", "second"),
            ev(1, 14, 6, "2018-01-04T00:00:00Z", "<tags>"),
        ];
        let c = ingest(events).unwrap();
        let v = &c.posts[0].versions;
        assert_eq!(
            v.iter().map(|v| v.post_history_id).collect::<Vec<_>>(),
            vec![10, 12, 13]
        );
        assert_eq!(v.iter().map(|v| v.version_index).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(v[1].pred_post_history_id, Some(10));
        assert_eq!(v[1].succ_post_history_id, Some(13));
        assert_eq!(c.titles.len(), 1);
        assert_eq!(c.skipped, BTreeMap::from([(6, 1)]));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let events = vec![
            ev(1, 10, 2, "2018-01-01T00:00:00Z", "a"),
            ev(2, 10, 2, "2018-01-01T00:00:00Z", "b"),
        ];
        assert!(matches!(ingest(events), Err(IngestError::DuplicateId(10))));
    }

    #[test]
    fn timestamps() {
        let d = parse_timestamp("2018-03-01T10:20:30.456+01:00").unwrap();
        assert_eq!(format_timestamp(&d), "2018-03-01T09:20:30Z");
        assert_eq!(
            format_timestamp(&parse_timestamp("2018-03-01 10:20:30").unwrap()),
            "2018-03-01T10:20:30Z"
        );
        assert!(parse_timestamp("yesterday").is_none());
    }

    #[test]
    fn json_lines_round_trip() {
        let events = vec![
            ev(1, 10, 2, "2018-01-01T00:00:00Z", "a \"quoted\"\nline"),
            ev(1, 11, 1, "2018-01-01T00:00:00Z", "Title"),
        ];
        let mut buf = Vec::new();
        write_json_lines(&events, &mut buf).unwrap();
        assert_eq!(read_json_lines(&buf[..]).unwrap(), events);
    }

    #[test]
    fn csv_events_and_missing_optionals() {
        let s = "PostId,PostTypeId,ParentId,PostHistoryId,PostHistoryTypeId,CreationDate,UserId,Text\n5,2,4,50,2,2018-01-01T00:00:00Z,,\"x\ny\"\n";
        let e = read_csv(s.as_bytes()).unwrap();
        assert_eq!(e[0].parent_id, Some(4));
        assert_eq!(e[0].user_id, None);
        assert_eq!(e[0].text, "x\ny");
        let bad =
            "PostId,PostTypeId,ParentId,PostHistoryId,PostHistoryTypeId,CreationDate,UserId,Text\n5,2,,50,2,never,,x\n";
        assert!(matches!(
            read_csv(bad.as_bytes()),
            Err(IngestError::BadDate { id: 50, .. })
        ));
    }

    #[test]
    fn empty_corpus_tables_are_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let paths = export_tables(&Corpus::default(), dir.path()).unwrap();
        assert_eq!(paths.len(), 5);
        for p in paths {
            let s = std::fs::read_to_string(p).unwrap();
            assert_eq!(s.lines().count(), 1);
        }
    }

    #[test]
    fn one_edit_two_rows() {
        let events = vec![
            ev(
                1,
                10,
                2,
                "2018-01-01T00:00:00Z",
                "Some introductory text about the problem.",
            ),
            ev(
                1,
                11,
                5,
                "2018-01-02T00:00:00Z",
                "Some introductory text about this problem.",
            ),
        ];
        let mut c = ingest(events).unwrap();
        reconstruct(&mut c, &MatchingConfig::default(), Strategy::Revised).unwrap();
        let ids = block_version_ids(&c.posts);
        let rows = post_block_version_rows(&c.posts, &ids);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1][8], rows[0][0]);
        assert_eq!(rows[1][5], rows[0][0]);
        let diffs = post_block_diff_rows(&c.posts, &ids);
        assert_eq!(verify_diff_rows(&c.posts, &diffs).unwrap(), 1);
        let s = summarize(&c);
        assert_eq!((s.lifespans, s.max_lifespan_length, s.matched_blocks), (1, 2, 1));
        assert_eq!(s.same_local_id_percentage, 100.0);
    }
}
