mod common;

use blockhist::extraction::extract_blocks;
use common::{golden_failures, shape, GOLDEN};

#[test]
fn every_golden_fixture_matches() {
    assert_eq!(golden_failures(), Vec::<String>::new());
}

#[test]
fn golden_fixtures_produce_no_warnings() {
    for g in GOLDEN {
        assert!(extract_blocks(g.markdown).warnings.is_empty(), "{}", g.name);
    }
}

#[test]
fn prose_with_inline_code_is_one_text_block() {
    assert_eq!(shape("use `malloc` here").len(), 1);
}

#[test]
fn unterminated_script_warns_and_keeps_code() {
    let ex = extract_blocks("x\n<script>\nvar a = 1;");
    assert_eq!(ex.blocks.len(), 2);
    assert_eq!(ex.warnings.len(), 1);
}
