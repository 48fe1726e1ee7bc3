//! Title versions linked to their neighbors by Levenshtein distance.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use textsim::{edit_distance_str, EditKind};

use crate::model::{PostHistoryId, PostId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TitleEvent {
    pub post_id: PostId,
    pub post_history_id: PostHistoryId,
    pub post_history_type_id: u8,
    pub creation_date: DateTime<Utc>,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TitleVersion {
    pub post_id: PostId,
    pub post_history_id: PostHistoryId,
    pub post_history_type_id: u8,
    pub creation_date: DateTime<Utc>,
    pub title: String,
    pub pred_post_history_id: Option<PostHistoryId>,
    pub pred_edit_distance: Option<usize>,
    pub succ_post_history_id: Option<PostHistoryId>,
    pub succ_edit_distance: Option<usize>,
}

/// Links the title events of one post, ordered by date then history id.
pub fn title_history(mut events: Vec<TitleEvent>) -> Vec<TitleVersion> {
    events.sort_by_key(|e| (e.creation_date, e.post_history_id));
    let mut versions: Vec<TitleVersion> = events
        .into_iter()
        .map(|e| TitleVersion {
            post_id: e.post_id,
            post_history_id: e.post_history_id,
            post_history_type_id: e.post_history_type_id,
            creation_date: e.creation_date,
            title: e.title,
            pred_post_history_id: None,
            pred_edit_distance: None,
            succ_post_history_id: None,
            succ_edit_distance: None,
        })
        .collect();
    for i in 1..versions.len() {
        let d = edit_distance_str(EditKind::Levenshtein, &versions[i - 1].title, &versions[i].title);
        let (prev_id, cur_id) = (versions[i - 1].post_history_id, versions[i].post_history_id);
        versions[i].pred_post_history_id = Some(prev_id);
        versions[i].pred_edit_distance = Some(d);
        versions[i - 1].succ_post_history_id = Some(cur_id);
        versions[i - 1].succ_edit_distance = Some(d);
    }
    versions
}
