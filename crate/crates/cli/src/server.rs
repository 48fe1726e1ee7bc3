//! HTTP API behind the annotation tool.
//!
//! All ids travel as decimal strings. Request bodies also accept numbers.
//! Pair `i` compares version `i - 1` with version `i` (1-based, `i >= 2`).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use blockhist::corpus_io::Corpus;
use blockhist::evaluation::{GroundTruth, GtRecord};
use blockhist::history::{process_version_history, MatchingConfig, Strategy};
use blockhist::{BlockType, LocalId, Post, PostHistoryId, PostId, PostVersion};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::MatchingOverrides;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CommentEntry {
    post_id: PostId,
    post_history_id: PostHistoryId,
    local_id: LocalId,
    text: String,
}

type CommentKey = (PostId, PostHistoryId, LocalId);

/// Annotation state. Ground truth and comments are written through to disk
/// on every change.
pub struct Store {
    posts: Vec<Post>,
    index: HashMap<PostId, usize>,
    titles: HashMap<PostId, String>,
    gt: GroundTruth,
    gt_path: PathBuf,
    comments: BTreeMap<CommentKey, String>,
    comments_path: PathBuf,
    config: MatchingConfig,
    strategy: Strategy,
}

/// `<ground truth>.comments.json` next to the ground-truth file.
pub fn comments_path(gt_path: &Path) -> PathBuf {
    let mut name = gt_path.file_name().unwrap_or_default().to_os_string();
    name.push(".comments.json");
    gt_path.with_file_name(name)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = std::fs::File::create(&tmp)?;
        io::Write::write_all(&mut f, bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

impl Store {
    /// Reconstructs `corpus` with `config`. A missing ground-truth file
    /// starts an empty annotation set; it is created on the first save.
    pub fn open(corpus: Corpus, gt_path: &Path, config: MatchingConfig, strategy: Strategy) -> Result<Store, String> {
        let mut posts = corpus.posts;
        for p in &mut posts {
            process_version_history(p, &config, strategy).map_err(|e| e.to_string())?;
        }
        let gt = if gt_path.exists() {
            let gt = GroundTruth::load(gt_path).map_err(|e| e.to_string())?;
            gt.validate(&posts).map_err(|e| format!("{}: {e}", gt_path.display()))?;
            gt
        } else {
            GroundTruth::new()
        };
        let comments_path = comments_path(gt_path);
        let comments = if comments_path.exists() {
            let text =
                std::fs::read_to_string(&comments_path).map_err(|e| format!("{}: {e}", comments_path.display()))?;
            let entries: Vec<CommentEntry> =
                serde_json::from_str(&text).map_err(|e| format!("{}: {e}", comments_path.display()))?;
            entries
                .into_iter()
                .map(|c| ((c.post_id, c.post_history_id, c.local_id), c.text))
                .collect()
        } else {
            BTreeMap::new()
        };
        let index = posts.iter().enumerate().map(|(i, p)| (p.post_id, i)).collect();
        let titles = corpus.titles.into_iter().map(|t| (t.post_id, t.title)).collect();
        Ok(Store {
            posts,
            index,
            titles,
            gt,
            gt_path: gt_path.to_path_buf(),
            comments,
            comments_path,
            config,
            strategy,
        })
    }

    fn post(&self, id: &str) -> ApiResult<&Post> {
        let id: PostId = id
            .parse()
            .map_err(|_| ApiError::bad_request(format!("invalid post id {id:?}")))?;
        self.index
            .get(&id)
            .map(|&i| &self.posts[i])
            .ok_or_else(|| ApiError::not_found(format!("unknown post {id}")))
    }

    fn annotated(&self, v: &PostVersion) -> bool {
        let rows: HashSet<LocalId> = self
            .gt
            .records()
            .filter(|r| r.post_history_id == v.post_history_id)
            .map(|r| r.local_id)
            .collect();
        !v.blocks.is_empty() && v.blocks.iter().all(|b| rows.contains(&b.local_id()))
    }

    fn save_gt(&self) -> ApiResult<()> {
        self.gt
            .save(&self.gt_path)
            .map_err(|e| ApiError::internal(e.to_string()))
    }

    fn save_comments(&self) -> ApiResult<()> {
        let entries: Vec<CommentEntry> = self
            .comments
            .iter()
            .map(|(&(post_id, post_history_id, local_id), text)| CommentEntry {
                post_id,
                post_history_id,
                local_id,
                text: text.clone(),
            })
            .collect();
        let bytes = serde_json::to_vec_pretty(&entries).map_err(|e| ApiError::internal(e.to_string()))?;
        write_atomic(&self.comments_path, &bytes)
            .map_err(|e| ApiError::internal(format!("{}: {e}", self.comments_path.display())))
    }
}

pub type SharedStore = Arc<Mutex<Store>>;

fn lock(s: &SharedStore) -> MutexGuard<'_, Store> {
    s.lock().unwrap_or_else(|e| e.into_inner())
}

pub fn router(store: Store) -> Router {
    Router::new()
        .route("/api/posts", get(list_posts))
        .route("/api/posts/{id}/versions", get(list_versions))
        .route("/api/posts/{id}/pairs/{i}", get(get_pair))
        .route("/api/posts/{id}/pairs/{i}/connections", put(put_connections))
        .route("/api/posts/{id}/blocks/{hid}/{local}/comment", post(post_comment))
        .route("/api/posts/{id}/computed", get(get_computed))
        .route("/api/export", get(export))
        .with_state(Arc::new(Mutex::new(store)))
}

async fn list_posts(State(s): State<SharedStore>) -> Json<Value> {
    let s = lock(&s);
    let posts: Vec<Value> = s
        .posts
        .iter()
        .map(|p| {
            let pairs = p.versions.len().saturating_sub(1);
            let annotated = p.versions.iter().skip(1).filter(|v| s.annotated(v)).count();
            json!({
                "postId": p.post_id.to_string(),
                "postTypeId": p.post_type_id,
                "threadId": p.thread_id().to_string(),
                "title": s.titles.get(&p.thread_id()),
                "versionCount": p.versions.len(),
                "pairCount": pairs,
                "annotatedPairs": annotated,
            })
        })
        .collect();
    Json(Value::Array(posts))
}

async fn list_versions(State(s): State<SharedStore>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let s = lock(&s);
    let p = s.post(&id)?;
    let versions: Vec<Value> = p
        .versions
        .iter()
        .map(|v| {
            json!({
                "postHistoryId": v.post_history_id.to_string(),
                "versionIndex": v.version_index,
                "creationDate": v.creation_date.to_rfc3339(),
                "blockCount": v.blocks.len(),
                "annotated": v.version_index > 1 && s.annotated(v),
            })
        })
        .collect();
    Ok(Json(Value::Array(versions)))
}

fn version_json(s: &Store, v: &PostVersion) -> Value {
    let blocks: Vec<Value> = v
        .blocks
        .iter()
        .map(|b| {
            json!({
                "localId": b.local_id().to_string(),
                "blockType": b.block_type(),
                "content": b.content(),
                "comment": s.comments.get(&(v.post_id, v.post_history_id, b.local_id())),
            })
        })
        .collect();
    json!({
        "postHistoryId": v.post_history_id.to_string(),
        "versionIndex": v.version_index,
        "blocks": blocks,
    })
}

fn pair(p: &Post, i: usize) -> ApiResult<(&PostVersion, &PostVersion)> {
    if i < 2 || i > p.versions.len() {
        return Err(ApiError::not_found(format!(
            "post {} has no version pair {i} (valid: 2..={})",
            p.post_id,
            p.versions.len()
        )));
    }
    Ok((&p.versions[i - 2], &p.versions[i - 1]))
}

/// Links between blocks of the same type whose content is equal and unique
/// on both sides.
fn unique_equal_pairs(left: &PostVersion, right: &PostVersion) -> Vec<(LocalId, LocalId)> {
    let key = |b: &blockhist::PostBlockVersion| (b.block_type(), b.content().to_string());
    let mut l: HashMap<_, Vec<LocalId>> = HashMap::new();
    for b in &left.blocks {
        l.entry(key(b)).or_default().push(b.local_id());
    }
    let mut r: HashMap<_, Vec<LocalId>> = HashMap::new();
    for b in &right.blocks {
        r.entry(key(b)).or_default().push(b.local_id());
    }
    let mut out: Vec<(LocalId, LocalId)> = r
        .iter()
        .filter(|(_, rs)| rs.len() == 1)
        .filter_map(|(k, rs)| match l.get(k) {
            Some(ls) if ls.len() == 1 => Some((ls[0], rs[0])),
            _ => None,
        })
        .collect();
    out.sort_by_key(|&(_, r)| r);
    out
}

fn pair_json(s: &Store, p: &Post, i: usize) -> ApiResult<Value> {
    let (left, right) = pair(p, i)?;
    let annotated = s.annotated(right);
    let connections: Vec<(LocalId, LocalId)> = if annotated {
        s.gt.records()
            .filter(|r| r.post_history_id == right.post_history_id)
            .filter_map(|r| r.pred_local_id.map(|l| (l, r.local_id)))
            .collect()
    } else {
        unique_equal_pairs(left, right)
    };
    let connections: Vec<Value> = connections
        .into_iter()
        .map(|(l, r)| {
            json!({
                "leftLocalId": l.to_string(),
                "rightLocalId": r.to_string(),
                "blockType": right.block(r).map(|b| b.block_type()),
            })
        })
        .collect();
    Ok(json!({
        "postId": p.post_id.to_string(),
        "index": i,
        "left": version_json(s, left),
        "right": version_json(s, right),
        "connections": connections,
        "annotated": annotated,
    }))
}

async fn get_pair(State(s): State<SharedStore>, UrlPath((id, i)): UrlPath<(String, usize)>) -> ApiResult<Json<Value>> {
    let s = lock(&s);
    let p = s.post(&id)?;
    Ok(Json(pair_json(&s, p, i)?))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IdRepr {
    Number(LocalId),
    Text(String),
}

fn local_id<'de, D: serde::Deserializer<'de>>(d: D) -> Result<LocalId, D::Error> {
    match IdRepr::deserialize(d)? {
        IdRepr::Number(n) => Ok(n),
        IdRepr::Text(s) => s.parse().map_err(serde::de::Error::custom),
    }
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ConnectionBody {
    #[serde(deserialize_with = "local_id")]
    left_local_id: LocalId,
    #[serde(deserialize_with = "local_id")]
    right_local_id: LocalId,
    /// Checked against both blocks when present.
    #[serde(default)]
    block_type: Option<BlockType>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionsBody {
    connections: Vec<ConnectionBody>,
}

fn check_connections(
    left: &PostVersion,
    right: &PostVersion,
    body: &ConnectionsBody,
) -> ApiResult<HashMap<LocalId, LocalId>> {
    let mut pred = HashMap::new();
    let mut used = HashSet::new();
    for c in &body.connections {
        let l = left
            .block(c.left_local_id)
            .ok_or_else(|| ApiError::unprocessable(format!("no block {} in the left version", c.left_local_id)))?;
        let r = right
            .block(c.right_local_id)
            .ok_or_else(|| ApiError::unprocessable(format!("no block {} in the right version", c.right_local_id)))?;
        if l.block_type() != r.block_type() {
            return Err(ApiError::unprocessable(format!(
                "block types differ: {} {} -> {} {}",
                l.block_type(),
                c.left_local_id,
                r.block_type(),
                c.right_local_id
            )));
        }
        if c.block_type.is_some_and(|t| t != r.block_type()) {
            return Err(ApiError::unprocessable(format!(
                "connection {} -> {} is not of type {}",
                c.left_local_id,
                c.right_local_id,
                c.block_type.expect("checked")
            )));
        }
        if !used.insert(c.left_local_id) {
            return Err(ApiError::unprocessable(format!(
                "left block {} connected twice",
                c.left_local_id
            )));
        }
        if pred.insert(c.right_local_id, c.left_local_id).is_some() {
            return Err(ApiError::unprocessable(format!(
                "right block {} connected twice",
                c.right_local_id
            )));
        }
    }
    Ok(pred)
}

fn record(v: &PostVersion, b: &blockhist::PostBlockVersion, pred: Option<LocalId>) -> GtRecord {
    GtRecord {
        post_id: v.post_id,
        post_history_id: v.post_history_id,
        local_id: b.local_id(),
        block_type: b.block_type(),
        pred_local_id: pred,
    }
}

/// Replaces the stored connections of one version pair. Every block of the
/// right version gets a row; blocks of a first version get rows without
/// predecessor if they have none yet.
async fn put_connections(
    State(s): State<SharedStore>,
    UrlPath((id, i)): UrlPath<(String, usize)>,
    body: Result<Json<ConnectionsBody>, axum::extract::rejection::JsonRejection>,
) -> ApiResult<Json<Value>> {
    let Json(body) = body.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let mut s = lock(&s);
    let p = s.post(&id)?;
    let (left, right) = pair(p, i)?;
    let pred = check_connections(left, right, &body)?;
    let mut gt = s.gt.clone();
    gt.clear_version(right.post_history_id);
    for b in &right.blocks {
        gt.upsert(record(right, b, pred.get(&b.local_id()).copied()));
    }
    if i == 2 {
        let present: HashSet<LocalId> = gt
            .records()
            .filter(|r| r.post_history_id == left.post_history_id)
            .map(|r| r.local_id)
            .collect();
        for b in left.blocks.iter().filter(|b| !present.contains(&b.local_id())) {
            gt.upsert(record(left, b, None));
        }
    }
    let previous = std::mem::replace(&mut s.gt, gt);
    if let Err(e) = s.save_gt() {
        s.gt = previous;
        return Err(e);
    }
    let p = s.post(&id)?;
    Ok(Json(pair_json(&s, p, i)?))
}

#[derive(Debug, Deserialize)]
pub struct CommentBody {
    text: String,
}

/// Sets a block comment; empty text removes it.
async fn post_comment(
    State(s): State<SharedStore>,
    UrlPath((id, hid, local)): UrlPath<(String, String, LocalId)>,
    body: Result<Json<CommentBody>, axum::extract::rejection::JsonRejection>,
) -> ApiResult<Json<Value>> {
    let Json(body) = body.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let mut s = lock(&s);
    let p = s.post(&id)?;
    let hid: PostHistoryId = hid
        .parse()
        .map_err(|_| ApiError::bad_request(format!("invalid post history id {hid:?}")))?;
    let (_, v) = p
        .version_by_history_id(hid)
        .ok_or_else(|| ApiError::not_found(format!("post {} has no version {hid}", p.post_id)))?;
    if v.block(local).is_none() {
        return Err(ApiError::not_found(format!("version {hid} has no block {local}")));
    }
    let key = (p.post_id, hid, local);
    let previous = if body.text.is_empty() {
        s.comments.remove(&key)
    } else {
        s.comments.insert(key, body.text.clone())
    };
    if let Err(e) = s.save_comments() {
        match previous {
            Some(t) => s.comments.insert(key, t),
            None => s.comments.remove(&key),
        };
        return Err(e);
    }
    Ok(Json(json!({
        "postId": key.0.to_string(),
        "postHistoryId": key.1.to_string(),
        "localId": key.2.to_string(),
        "text": (!body.text.is_empty()).then_some(body.text),
    })))
}

/// Computed lineage of one post next to its ground truth. `config` is an
/// optional JSON object of matching overrides applied to the server's
/// configuration.
async fn get_computed(
    State(s): State<SharedStore>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Json<Value>> {
    let s = lock(&s);
    let p = s.post(&id)?;
    let (config, strategy) = match q.get("config") {
        None => (s.config, s.strategy),
        Some(raw) => {
            let o: MatchingOverrides =
                serde_json::from_str(raw).map_err(|e| ApiError::bad_request(format!("config: {e}")))?;
            let mut c = s.config;
            o.apply_to(&mut c);
            c.validate()
                .map_err(|e| ApiError::bad_request(format!("config: {e}")))?;
            (c, o.strategy.unwrap_or(s.strategy))
        }
    };
    let mut post = p.clone();
    process_version_history(&mut post, &config, strategy).map_err(|e| ApiError::internal(e.to_string()))?;
    let truth: HashMap<(PostHistoryId, LocalId), Option<LocalId>> =
        s.gt.records()
            .filter(|r| r.post_id == post.post_id)
            .map(|r| ((r.post_history_id, r.local_id), r.pred_local_id))
            .collect();
    let mut disagreements = 0;
    let versions: Vec<Value> = post
        .versions
        .iter()
        .map(|v| {
            let blocks: Vec<Value> = v
                .blocks
                .iter()
                .map(|b| {
                    let computed = b.pred.map(|r| r.local_id);
                    let gt = truth.get(&(v.post_history_id, b.local_id()));
                    let disagreement = gt.is_some_and(|g| *g != computed);
                    disagreements += disagreement as usize;
                    json!({
                        "localId": b.local_id().to_string(),
                        "blockType": b.block_type(),
                        "computedPred": computed.map(|l| l.to_string()),
                        "groundTruthPred": gt.copied().flatten().map(|l| l.to_string()),
                        "annotated": gt.is_some(),
                        "disagreement": disagreement,
                    })
                })
                .collect();
            json!({
                "postHistoryId": v.post_history_id.to_string(),
                "versionIndex": v.version_index,
                "blocks": blocks,
            })
        })
        .collect();
    Ok(Json(json!({
        "postId": post.post_id.to_string(),
        "config": config,
        "strategy": strategy,
        "disagreements": disagreements,
        "versions": versions,
    })))
}

async fn export(State(s): State<SharedStore>) -> impl IntoResponse {
    let csv = lock(&s).gt.to_csv_string();
    ([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], csv)
}
