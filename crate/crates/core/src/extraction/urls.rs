//! Link extraction from text blocks and comments.

use std::ops::Range;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use url::{Host, Url};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkType {
    Bare,
    Markdown,
    Html,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkPosition {
    Top,
    Middle,
    End,
}

/// Where the block sits in its post version.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockPosition {
    pub local_id: u32,
    pub block_count: u32,
}

impl BlockPosition {
    /// A standalone unit such as a comment.
    pub const SINGLE: BlockPosition = BlockPosition {
        local_id: 1,
        block_count: 1,
    };

    pub fn link_position(self) -> LinkPosition {
        if self.local_id <= 1 {
            LinkPosition::Top
        } else if self.local_id >= self.block_count {
            LinkPosition::End
        } else {
            LinkPosition::Middle
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkInfo {
    pub url: String,
    pub link_type: LinkType,
    pub position: LinkPosition,
    pub protocol: String,
    pub complete_domain: String,
    /// Last two labels of the host (the whole host for IP addresses).
    pub root_domain: String,
    pub path: String,
    pub query: Option<String>,
    pub fragment: Option<String>,
}

struct Patterns {
    markdown_inline: Regex,
    markdown_reference: Regex,
    html_anchor: Regex,
    bare: Regex,
}

fn patterns() -> &'static Patterns {
    static P: OnceLock<Patterns> = OnceLock::new();
    P.get_or_init(|| Patterns {
        markdown_inline: Regex::new(r#"\[[^\]\n]*\]\(\s*<?(https?://[^\s)>]+)>?(?:\s+"[^"\n]*")?\s*\)"#).unwrap(),
        markdown_reference: Regex::new(
            r#"(?m)^[ \t]*\[[^\]\n]+\]:[ \t]*<?(https?://[^\s>]+)>?(?:[ \t]+"[^"\n]*")?[ \t]*$"#,
        )
        .unwrap(),
        html_anchor: Regex::new(r#"(?i)<a\s[^>]*?href\s*=\s*["'](https?://[^"']+)["']"#).unwrap(),
        bare: Regex::new(r#"(?i)https?://[^\s<>"'\[\]`]+"#).unwrap(),
    })
}

/// Drops trailing punctuation that belongs to the sentence, not the URL.
fn trim_bare(url: &str) -> &str {
    let mut end = url.len();
    loop {
        let s = &url[..end];
        match s.chars().last() {
            Some('.' | ',' | ';' | ':' | '!' | '?' | '\'' | '*') => end -= 1,
            Some(')') if s.matches('(').count() < s.matches(')').count() => end -= 1,
            _ => return s,
        }
    }
}

fn root_domain(host: &Host<&str>) -> String {
    match host {
        Host::Domain(d) => {
            let labels: Vec<&str> = d.trim_end_matches('.').split('.').collect();
            if labels.len() <= 2 {
                labels.join(".")
            } else {
                labels[labels.len() - 2..].join(".")
            }
        }
        other => other.to_string(),
    }
}

fn link_info(raw: &str, link_type: LinkType, position: LinkPosition) -> Option<LinkInfo> {
    let parsed = Url::parse(raw).ok()?;
    let host = parsed.host()?;
    Some(LinkInfo {
        url: raw.to_string(),
        link_type,
        position,
        protocol: parsed.scheme().to_string(),
        complete_domain: host.to_string(),
        root_domain: root_domain(&host),
        path: parsed.path().to_string(),
        query: parsed.query().map(str::to_string),
        fragment: parsed.fragment().map(str::to_string),
    })
}

/// Finds Markdown, HTML and bare links in `text`, in order of appearance.
/// Candidates that do not parse as absolute URLs with a host are skipped.
pub fn extract_urls(text: &str, position: BlockPosition) -> Vec<LinkInfo> {
    let p = patterns();
    let pos = position.link_position();
    let mut found: Vec<(usize, LinkInfo)> = Vec::new();
    let mut claimed: Vec<Range<usize>> = Vec::new();

    let structured = [
        (&p.markdown_inline, LinkType::Markdown),
        (&p.markdown_reference, LinkType::Markdown),
        (&p.html_anchor, LinkType::Html),
    ];
    for (re, link_type) in structured {
        for caps in re.captures_iter(text) {
            let whole = caps.get(0).unwrap();
            if claimed.iter().any(|r| r.start < whole.end() && whole.start() < r.end) {
                continue;
            }
            claimed.push(whole.range());
            let url = caps.get(1).unwrap();
            if let Some(info) = link_info(url.as_str(), link_type, pos) {
                found.push((url.start(), info));
            }
        }
    }
    for m in p.bare.find_iter(text) {
        if claimed.iter().any(|r| r.start < m.end() && m.start() < r.end) {
            continue;
        }
        if let Some(info) = link_info(trim_bare(m.as_str()), LinkType::Bare, pos) {
            found.push((m.start(), info));
        }
    }
    found.sort_by_key(|(start, _)| *start);
    found.into_iter().map(|(_, info)| info).collect()
}
