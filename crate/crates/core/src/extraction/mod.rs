//! Splitting Markdown post bodies into alternating text and code blocks.
//!
//! Recognized code notations:
//!
//! * lines indented by four spaces or a tab, after a blank line, the start of
//!   the post, a closed code construct, or a `<!-- language: ... -->` tag
//! * fences of three or more backticks
//! * stack snippets between `<!-- begin snippet ... -->` and `<!-- end snippet -->`
//! * `<!-- language: ... -->` / `<!-- language-all: ... -->` tag lines (dropped)
//! * `<pre>` / `<pre><code>` HTML blocks
//! * `<script>` HTML blocks
//! * a line consisting of nothing but one backtick-framed code span
//!
//! Inline code inside prose stays part of its text block. Once a construct is
//! open, nothing inside it is interpreted (the outermost marker wins).

pub mod urls;

use crate::model::{BlockType, LocalId, PostBlock};

pub use urls::{extract_urls, BlockPosition, LinkInfo, LinkPosition, LinkType};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtractionWarning {
    /// A construct opened at `line` (1-based) was never closed; the rest of
    /// the post was treated as code.
    Unterminated { construct: &'static str, line: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extraction {
    pub blocks: Vec<PostBlock>,
    pub warnings: Vec<ExtractionWarning>,
}

/// Extracts the blocks of a post body.
pub fn extract_blocks(markdown: &str) -> Extraction {
    Extractor::new(markdown).run()
}

struct Segment {
    block_type: BlockType,
    lines: Vec<String>,
}

/// Accumulates typed lines into segments. Blank lines are held back and only
/// kept when the following line continues the same segment, so blocks never
/// start or end with blank lines and whitespace-only blocks never appear.
#[derive(Default)]
struct SegmentBuilder {
    segments: Vec<Segment>,
    pending_blanks: usize,
}

impl SegmentBuilder {
    fn blank(&mut self) {
        self.pending_blanks += 1;
    }

    fn push(&mut self, block_type: BlockType, line: &str) {
        if line.trim().is_empty() {
            self.blank();
            return;
        }
        match self.segments.last_mut() {
            Some(seg) if seg.block_type == block_type => {
                seg.lines
                    .extend(std::iter::repeat_n(String::new(), self.pending_blanks));
            }
            _ => self.segments.push(Segment {
                block_type,
                lines: Vec::new(),
            }),
        }
        self.pending_blanks = 0;
        self.segments.last_mut().unwrap().lines.push(line.to_string());
    }

    fn finish(self) -> Vec<PostBlock> {
        self.segments
            .into_iter()
            .enumerate()
            .map(|(i, seg)| PostBlock::new(seg.block_type, (i + 1) as LocalId, seg.lines.join("\n")))
            .collect()
    }
}

struct Extractor<'a> {
    lines: Vec<&'a str>,
    pos: usize,
    out: SegmentBuilder,
    warnings: Vec<ExtractionWarning>,
    /// Whether an indented line at `pos` may open an indented code block.
    indent_allowed: bool,
}

fn starts_with_ci(haystack: &str, prefix: &str) -> bool {
    haystack.len() >= prefix.len() && haystack.as_bytes()[..prefix.len()].eq_ignore_ascii_case(prefix.as_bytes())
}

fn find_ci(haystack: &str, needle: &str) -> Option<usize> {
    haystack.to_ascii_lowercase().find(&needle.to_ascii_lowercase())
}

fn is_language_tag(trimmed: &str) -> bool {
    if !trimmed.starts_with("<!--") || !trimmed.ends_with("-->") {
        return false;
    }
    let inner = trimmed[4..trimmed.len() - 3].trim();
    starts_with_ci(inner, "language:") || starts_with_ci(inner, "language-all:")
}

fn is_snippet_start(trimmed: &str) -> bool {
    trimmed.starts_with("<!--") && starts_with_ci(trimmed[4..].trim_start(), "begin snippet")
}

fn is_snippet_end(trimmed: &str) -> bool {
    trimmed.starts_with("<!--") && starts_with_ci(trimmed[4..].trim_start(), "end snippet")
}

/// Strips one level of code indentation (four spaces or a tab).
fn dedent(line: &str) -> Option<&str> {
    if let Some(rest) = line.strip_prefix('\t') {
        return Some(rest);
    }
    let spaces = line.bytes().take_while(|&b| b == b' ').count();
    if spaces >= 4 {
        return Some(&line[4..]);
    }
    // Up to three spaces followed by a tab still reach the next tab stop.
    if line[spaces..].starts_with('\t') {
        return Some(&line[spaces + 1..]);
    }
    None
}

fn is_indented(line: &str) -> bool {
    !line.trim().is_empty() && dedent(line).is_some()
}

/// Opening fence: up to three spaces, then three or more backticks and an
/// optional info string without backticks.
fn fence_open(line: &str) -> Option<usize> {
    let lead = line.bytes().take_while(|&b| b == b' ').count();
    if lead > 3 {
        return None;
    }
    let rest = &line[lead..];
    let ticks = rest.bytes().take_while(|&b| b == b'`').count();
    if ticks < 3 || rest[ticks..].contains('`') {
        return None;
    }
    Some(ticks)
}

fn fence_close(line: &str, ticks: usize) -> bool {
    let t = line.trim();
    let n = t.bytes().take_while(|&b| b == b'`').count();
    n >= ticks && n == t.len()
}

/// Content of a line made of a single code span, e.g. `` `foo()` ``.
fn inline_code_line(trimmed: &str) -> Option<&str> {
    let ticks = trimmed.bytes().take_while(|&b| b == b'`').count();
    if ticks == 0 || trimmed.len() <= 2 * ticks {
        return None;
    }
    let inner = &trimmed[ticks..trimmed.len() - ticks];
    let closing = &trimmed[trimmed.len() - ticks..];
    if closing.bytes().all(|b| b == b'`') && !inner.contains('`') && !inner.trim().is_empty() {
        Some(inner)
    } else {
        None
    }
}

impl<'a> Extractor<'a> {
    fn new(markdown: &'a str) -> Self {
        let lines = markdown
            .split('\n')
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .collect();
        Extractor {
            lines,
            pos: 0,
            out: SegmentBuilder::default(),
            warnings: Vec::new(),
            indent_allowed: true,
        }
    }

    fn run(mut self) -> Extraction {
        while self.pos < self.lines.len() {
            let line = self.lines[self.pos];
            let trimmed = line.trim();
            if trimmed.is_empty() {
                self.out.blank();
                self.indent_allowed = true;
                self.pos += 1;
            } else if self.indent_allowed && is_indented(line) {
                self.indented_block();
            } else if is_language_tag(trimmed) {
                self.pos += 1;
                self.indent_allowed = true;
            } else if let Some(ticks) = fence_open(line) {
                self.fenced_block(ticks);
            } else if is_snippet_start(trimmed) {
                self.snippet();
            } else if starts_with_ci(trimmed, "<pre") && !starts_with_ci(trimmed, "<prefix") {
                self.html_block("<pre", "</pre>", "pre");
            } else if starts_with_ci(trimmed, "<script") {
                self.html_block("<script", "</script>", "script");
            } else if let Some(inner) = inline_code_line(trimmed) {
                self.out.push(BlockType::Code, inner);
                self.pos += 1;
                self.indent_allowed = true;
            } else {
                self.out.push(BlockType::Text, line);
                self.pos += 1;
                self.indent_allowed = false;
            }
        }
        Extraction {
            blocks: self.out.finish(),
            warnings: self.warnings,
        }
    }

    fn indented_block(&mut self) {
        while self.pos < self.lines.len() {
            let line = self.lines[self.pos];
            if let Some(code) = dedent(line).filter(|_| !line.trim().is_empty()) {
                self.out.push(BlockType::Code, code);
                self.pos += 1;
                continue;
            }
            if !line.trim().is_empty() {
                break;
            }
            // Blank lines continue the block only if more indented code follows.
            let next = self.lines[self.pos..].iter().find(|l| !l.trim().is_empty());
            match next {
                Some(l) if is_indented(l) => {
                    self.out.blank();
                    self.pos += 1;
                }
                _ => break,
            }
        }
        self.indent_allowed = false;
    }

    fn fenced_block(&mut self, ticks: usize) {
        let start = self.pos;
        self.pos += 1;
        while self.pos < self.lines.len() {
            let line = self.lines[self.pos];
            self.pos += 1;
            if fence_close(line, ticks) {
                self.indent_allowed = true;
                return;
            }
            self.out.push(BlockType::Code, line);
        }
        self.unterminated("fence", start);
    }

    fn snippet(&mut self) {
        let start = self.pos;
        self.pos += 1;
        let mut inner = Vec::new();
        let mut closed = false;
        while self.pos < self.lines.len() {
            let line = self.lines[self.pos];
            self.pos += 1;
            if is_snippet_end(line.trim()) {
                closed = true;
                break;
            }
            inner.push(line);
        }
        for line in inner {
            let trimmed = line.trim();
            if is_language_tag(trimmed) {
                continue;
            }
            self.out.push(BlockType::Code, dedent(line).unwrap_or(line));
        }
        if closed {
            self.indent_allowed = true;
        } else {
            self.unterminated("snippet", start);
        }
    }

    /// `<pre>`/`<script>` blocks; the opening and closing tags (and a
    /// directly nested `<code>` tag) are markers, everything between is code.
    fn html_block(&mut self, open: &str, close: &str, name: &'static str) {
        let start = self.pos;
        let first = self.lines[self.pos].trim_start();
        // Skip the opening tag itself.
        let mut rest = match first.find('>') {
            Some(i) => &first[i + 1..],
            None => "",
        };
        debug_assert!(starts_with_ci(first, open));
        if open == "<pre" {
            let t = rest.trim_start();
            if starts_with_ci(t, "<code") {
                rest = t.find('>').map(|i| &t[i + 1..]).unwrap_or("");
            }
        }
        let mut current = rest;
        loop {
            if let Some(idx) = find_ci(current, close) {
                let mut body = &current[..idx];
                if open == "<pre" {
                    if let Some(c) = find_ci(body, "</code>") {
                        body = &body[..c];
                    }
                }
                self.out.push(BlockType::Code, body);
                let trailing = current[idx + close.len()..].trim();
                self.pos += 1;
                if !trailing.is_empty() {
                    self.out.push(BlockType::Text, trailing);
                    self.indent_allowed = false;
                } else {
                    self.indent_allowed = true;
                }
                return;
            }
            self.out.push(BlockType::Code, current);
            self.pos += 1;
            if self.pos >= self.lines.len() {
                break;
            }
            current = self.lines[self.pos];
        }
        self.unterminated(name, start);
    }

    fn unterminated(&mut self, construct: &'static str, start: usize) {
        self.warnings.push(ExtractionWarning::Unterminated {
            construct,
            line: start + 1,
        });
        self.indent_allowed = true;
    }
}
