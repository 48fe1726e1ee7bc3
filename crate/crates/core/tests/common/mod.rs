#![allow(dead_code)]

use blockhist::corpus_io::{ingest, PostHistoryEvent};
use blockhist::extraction::extract_blocks;
use blockhist::{BlockType, Post};
use chrono::{TimeZone, Utc};

pub struct Golden {
    pub name: &'static str,
    pub markdown: &'static str,
    pub expected: &'static [(BlockType, &'static str)],
}

use BlockType::{Code, Text};

/// One fixture per code notation plus the inline-code line rule.
pub const GOLDEN: &[Golden] = &[
    Golden {
        name: "indentation",
        markdown: "Try this:\n\n    int[] a = new int[3];\n    a[0] = 1;\n\nIt compiles.",
        expected: &[(Text, "Try this:"), (Code, "int[] a = new int[3];\na[0] = 1;"), (Text, "It compiles.")],
    },
    Golden {
        name: "backtick fence",
        markdown: "Use:\n```python\nfor x in xs:\n    print(x)\n```\nDone.",
        expected: &[(Text, "Use:"), (Code, "for x in xs:\n    print(x)"), (Text, "Done.")],
    },
    Golden {
        name: "stack snippet",
        markdown: "Demo:\n\n<!-- begin snippet: js hide: false -->\n\n<!-- language: lang-js -->\n\n    console.log(1);\n\n<!-- end snippet -->\n\nThanks.",
        expected: &[(Text, "Demo:"), (Code, "console.log(1);"), (Text, "Thanks.")],
    },
    Golden {
        name: "language tag",
        markdown: "In Java:\n<!-- language: java -->\n\n    String s = null;\n\nThat fails.",
        expected: &[(Text, "In Java:"), (Code, "String s = null;"), (Text, "That fails.")],
    },
    Golden {
        name: "pre code html",
        markdown: "Output:\n<pre><code>line one\nline two\n</code></pre>\nEnd.",
        expected: &[(Text, "Output:"), (Code, "line one\nline two"), (Text, "End.")],
    },
    Golden {
        name: "script html",
        markdown: "Add to the page:\n<script>\nalert(1);\n</script>\nReload.",
        expected: &[(Text, "Add to the page:"), (Code, "alert(1);"), (Text, "Reload.")],
    },
    Golden {
        name: "inline code line",
        markdown: "Run\n`make install`\nthen use `foo` inline.",
        expected: &[(Text, "Run"), (Code, "make install"), (Text, "then use `foo` inline.")],
    },
];

pub fn shape(markdown: &str) -> Vec<(BlockType, String)> {
    extract_blocks(markdown)
        .blocks
        .into_iter()
        .map(|b| (b.block_type, b.content))
        .collect()
}

/// Golden fixtures whose extraction differs from the expectation.
pub fn golden_failures() -> Vec<String> {
    GOLDEN
        .iter()
        .filter_map(|g| {
            let got = shape(g.markdown);
            let want: Vec<(BlockType, String)> = g.expected.iter().map(|(t, s)| (*t, s.to_string())).collect();
            (got != want).then(|| format!("{}: got {got:?}", g.name))
        })
        .collect()
}

pub const TEXT_A: &str = "Here is how I read the configuration file and parse every entry.";
pub const TEXT_B: &str = "This works, but the second call fails with a null pointer exception.";
pub const CODE_X: &str = "for (Entry e : config.entries()) {\n    map.put(e.getKey(), e.getValue());\n}";
pub const CODE_X2: &str = "for (Entry e : config.entries()) {\n    map.put(e.getKey(), e.getValue().trim());\n}";

fn fenced(s: &str) -> String {
    format!("```\n{s}\n```")
}

/// Two versions where a code block moves below a new one that equals it,
/// consuming its equal predecessor; the edited twin from the previous version
/// is only a runner-up.
pub fn runner_up_fixture() -> Post {
    let v6 = [TEXT_A.to_string(), fenced(CODE_X), TEXT_B.to_string(), fenced(CODE_X2)].join("\n\n");
    let v7 = [
        "Update: completely unrelated new introduction paragraph.".to_string(),
        fenced(CODE_X),
        TEXT_A.to_string(),
        fenced(CODE_X),
        TEXT_B.to_string(),
    ]
    .join("\n\n");
    let events = [(6, v6), (7, v7)]
        .into_iter()
        .enumerate()
        .map(|(i, (hid, text))| PostHistoryEvent {
            post_id: 1,
            post_type_id: 1,
            parent_id: None,
            post_history_id: hid,
            post_history_type_id: if i == 0 { 2 } else { 5 },
            creation_date: Utc.timestamp_opt(60 * (i as i64 + 1), 0).unwrap(),
            user_id: None,
            text,
        })
        .collect();
    ingest(events).unwrap().posts.remove(0)
}

pub fn preds(post: &Post, version: usize) -> Vec<Option<u32>> {
    post.versions[version]
        .blocks
        .iter()
        .map(|b| b.pred.map(|r| r.local_id))
        .collect()
}
