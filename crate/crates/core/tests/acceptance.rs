//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use blockhist::clones::clone_report;
use blockhist::corpus_io::ingest;
use blockhist::evaluation::sweep::{coarse_plan, Sample};
use blockhist::evaluation::{computed_connections, confusion, evaluate, mcc, ConfusionCounts, GroundTruth};
use blockhist::history::{line_diff, process_version_history, MatchingConfig, Strategy};
use blockhist::synth::{clone_corpus, matching_corpus};
use blockhist::{BlockType, Post};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use textsim::edit::{damerau_levenshtein, indel_distance, levenshtein};
use textsim::{applicable, enumerate_configs, similarity, Family, Metric, MetricConfig, SetCoefficient};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn timed(f: impl FnOnce() -> Outcome, limit: Option<Duration>) -> Outcome {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let within = limit.is_none_or(|l| elapsed < l);
    let budget = limit.map(|l| format!(" (limit {:.0?})", l)).unwrap_or_default();
    let time = format!("{elapsed:.2?}{budget}");
    match out {
        Outcome::Pass(d) if within => Outcome::Pass(format!("{d}; {time}")),
        Outcome::Pass(d) => Outcome::Fail(format!("{d}; too slow: {time}")),
        Outcome::Fail(d) => Outcome::Fail(format!("{d}; {time}")),
        skip => skip,
    }
}

fn metric_enumeration() -> Outcome {
    let configs = enumerate_configs();
    let names: BTreeSet<String> = configs.iter().map(MetricConfig::name).collect();
    let required = [
        "manhattanFourGramNormalized",
        "winnowingFourGramDiceNormalized",
        "cosineTokenNormalizedTermFrequency",
    ];
    let missing: Vec<_> = required.iter().filter(|n| !names.contains(**n)).collect();
    let roundtrip = configs
        .iter()
        .all(|c| c.name().parse::<MetricConfig>().as_ref() == Ok(c));
    let d = MatchingConfig::default();
    let defaults = [d.text.metric, d.code.metric, d.text.backup, d.code.backup]
        .iter()
        .all(|m| configs.contains(m));
    let plan = coarse_plan().len();
    check(
        configs.len() == 134 && names.len() == 134 && missing.is_empty() && roundtrip && defaults && plan == 1474,
        format!(
            "{} configs, {} distinct names, missing {missing:?}, name round-trip {roundtrip}, defaults in catalog {defaults}, coarse plan {plan}",
            configs.len(),
            names.len()
        ),
    )
}

/// All strings over `alphabet` up to `max_len`, indexed by length then base-k value.
struct Space {
    strings: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl Space {
    fn new(k: u8, max_len: usize) -> Space {
        let mut strings = vec![Vec::new()];
        let mut frontier = vec![Vec::new()];
        for _ in 0..max_len {
            let next: Vec<Vec<u8>> = frontier
                .iter()
                .flat_map(|s: &Vec<u8>| {
                    (0..k).map(move |c| {
                        let mut t = s.clone();
                        t.push(c);
                        t
                    })
                })
                .collect();
            strings.extend(next.iter().cloned());
            frontier = next;
        }
        let index = strings.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Space { strings, index }
    }

    /// Strings reachable with one operation, staying inside the space.
    fn neighbors(&self, k: u8, max_len: usize, substitute: bool, transpose: bool) -> Vec<Vec<usize>> {
        self.strings
            .iter()
            .map(|s| {
                let mut out = Vec::new();
                for i in 0..s.len() {
                    let mut t = s.clone();
                    t.remove(i);
                    out.push(t);
                }
                if s.len() < max_len {
                    for i in 0..=s.len() {
                        for c in 0..k {
                            let mut t = s.clone();
                            t.insert(i, c);
                            out.push(t);
                        }
                    }
                }
                if substitute {
                    for i in 0..s.len() {
                        for c in (0..k).filter(|&c| c != s[i]) {
                            let mut t = s.clone();
                            t[i] = c;
                            out.push(t);
                        }
                    }
                }
                if transpose {
                    for i in 0..s.len().saturating_sub(1) {
                        let mut t = s.clone();
                        t.swap(i, i + 1);
                        out.push(t);
                    }
                }
                out.iter().map(|t| self.index[t]).collect()
            })
            .collect()
    }
}

fn bfs(neighbors: &[Vec<usize>], source: usize) -> Vec<u8> {
    let mut dist = vec![u8::MAX; neighbors.len()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(s) = queue.pop_front() {
        for &t in &neighbors[s] {
            if dist[t] == u8::MAX {
                dist[t] = dist[s] + 1;
                queue.push_back(t);
            }
        }
    }
    dist
}

fn edit_distance_oracle() -> Outcome {
    const K: u8 = 3;
    const MAX: usize = 6;
    let space = Space::new(K, MAX);
    type Distance = fn(&[u8], &[u8]) -> usize;
    let kinds: [(&str, bool, bool, Distance); 3] = [
        ("levenshtein", true, false, |a, b| levenshtein(a, b)),
        ("optimal alignment", false, false, |a, b| indel_distance(a, b)),
        ("damerauLevenshtein", true, true, |a, b| damerau_levenshtein(a, b)),
    ];
    let mut pairs = 0u64;
    let mut mismatches = Vec::new();
    for (name, sub, trans, f) in kinds {
        let neighbors = space.neighbors(K, MAX, sub, trans);
        for (i, a) in space.strings.iter().enumerate() {
            let dist = bfs(&neighbors, i);
            for (j, b) in space.strings.iter().enumerate() {
                pairs += 1;
                if f(a, b) != dist[j] as usize && mismatches.len() < 5 {
                    mismatches.push(format!("{name}({a:?}, {b:?})"));
                }
            }
        }
    }
    check(
        mismatches.is_empty(),
        format!(
            "{} strings, {pairs} pairs checked, mismatches {mismatches:?}",
            space.strings.len()
        ),
    )
}

fn random_text(rng: &mut impl Rng) -> String {
    const PARTS: &[&str] = &[
        "foo", "bar", "x", "{", "};", " ", "\n", "(a, b)", "int", "return", "Ünï", "// c", "\t", ".", ":",
    ];
    let n = rng.gen_range(0..25);
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.3) {
                (0..rng.gen_range(1..7))
                    .map(|_| rng.gen_range(b'a'..=b'f') as char)
                    .collect()
            } else {
                PARTS.choose(rng).unwrap().to_string()
            }
        })
        .collect()
}

fn metric_axioms() -> Outcome {
    const PAIRS: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(0xa110);
    let configs = enumerate_configs();
    let families = [
        Family::Edit,
        Family::Set,
        Family::Profile,
        Family::Fingerprint,
        Family::Equal,
    ];
    let mut violations = Vec::new();
    let mut skipped = 0;
    let mut ordering_checks = 0;
    for family in families {
        let members: Vec<&MetricConfig> = configs.iter().filter(|c| c.family() == family).collect();
        let mut done = 0;
        while done < PAIRS {
            let c = *members.choose(&mut rng).unwrap();
            // Near-duplicates half of the time so high similarities are exercised.
            let a = random_text(&mut rng);
            let b = if rng.gen_bool(0.5) {
                let mut t = a.clone();
                let at = t
                    .char_indices()
                    .map(|(i, _)| i)
                    .nth(rng.gen_range(0..=a.chars().count()));
                t.insert(at.unwrap_or(a.len()), 'q');
                t
            } else {
                random_text(&mut rng)
            };
            if !applicable(c, &a, &b) {
                skipped += 1;
                continue;
            }
            done += 1;
            let ab = similarity(c, &a, &b).unwrap().value;
            let ba = similarity(c, &b, &a).unwrap().value;
            if !(0.0..=1.0).contains(&ab) {
                violations.push(format!("range {} {ab}", c.name()));
            }
            if (ab - ba).abs() > 1e-12 {
                violations.push(format!("symmetry {} {ab} {ba}", c.name()));
            }
            if applicable(c, &a, &a) && similarity(c, &a, &a).unwrap().value != 1.0 {
                violations.push(format!("reflexivity {}", c.name()));
            }
            if let Metric::Set { feature, .. } = c.metric {
                let with = |coefficient| MetricConfig {
                    metric: Metric::Set { feature, coefficient },
                    ..*c
                };
                let v = [SetCoefficient::Jaccard, SetCoefficient::Dice, SetCoefficient::Overlap]
                    .map(|k| similarity(&with(k), &a, &b).unwrap().value);
                ordering_checks += 1;
                if !(v[0] <= v[1] + 1e-12 && v[1] <= v[2] + 1e-12) {
                    violations.push(format!("ordering {} {v:?}", c.name()));
                }
            }
        }
    }
    check(
        violations.is_empty(),
        format!(
            "{PAIRS} applicable pairs per family, {ordering_checks} coefficient orderings, {skipped} inapplicable draws skipped, violations {:?}",
            &violations[..violations.len().min(5)]
        ),
    )
}

fn extraction_golden() -> Outcome {
    let failures = common::golden_failures();
    check(
        failures.is_empty(),
        format!("{} fixtures, failures {failures:?}", common::GOLDEN.len()),
    )
}

fn connections(posts: &[Post]) -> HashSet<(BlockType, blockhist::evaluation::Connection)> {
    [BlockType::Text, BlockType::Code]
        .into_iter()
        .flat_map(|t| computed_connections(posts, t).into_iter().map(move |c| (t, c)))
        .collect()
}

fn truth_connections(gt: &GroundTruth) -> HashSet<(BlockType, blockhist::evaluation::Connection)> {
    [BlockType::Text, BlockType::Code]
        .into_iter()
        .flat_map(|t| gt.connections(t).into_iter().map(move |c| (t, c)))
        .collect()
}

fn matching_correctness() -> Outcome {
    let synthetic = matching_corpus(1000, 2018);
    let duplicates = &synthetic.duplicate_posts;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let posts = pool.install(|| {
        let mut posts = ingest(synthetic.events.clone()).unwrap().posts;
        let config = MatchingConfig::default();
        for p in &mut posts {
            process_version_history(p, &config, Strategy::Revised).unwrap();
        }
        posts
    });
    let computed = connections(&posts);
    let truth = truth_connections(&synthetic.truth);
    let recovered = computed.intersection(&truth).count();
    let rate = recovered as f64 / truth.len() as f64;
    let precision = recovered as f64 / computed.len() as f64;

    let clean_ids: BTreeSet<i64> = posts
        .iter()
        .map(|p| p.post_id)
        .filter(|id| !duplicates.contains(id))
        .collect();
    let clean_posts: Vec<Post> = posts
        .iter()
        .filter(|p| clean_ids.contains(&p.post_id))
        .cloned()
        .collect();
    let clean_computed = connections(&clean_posts);
    let clean_truth = truth_connections(&synthetic.truth.restricted_to(&clean_ids));
    let clean_recovered = clean_computed.intersection(&clean_truth).count();
    let exact = clean_computed == clean_truth;
    check(
        rate >= 0.99 && exact,
        format!(
            "{} posts, {} connections, recovered {:.4} (precision {:.4}); no-duplicates subset: {} posts, {}/{} recovered, {} spurious",
            posts.len(),
            truth.len(),
            rate,
            precision,
            clean_posts.len(),
            clean_recovered,
            clean_truth.len(),
            clean_computed.len() - clean_recovered
        ),
    )
}

fn runner_up_regression() -> Outcome {
    let mut revised = common::runner_up_fixture();
    let mut initial = revised.clone();
    let config = MatchingConfig::default();
    process_version_history(&mut revised, &config, Strategy::Revised).unwrap();
    process_version_history(&mut initial, &config, Strategy::Initial).unwrap();
    let r = common::preds(&revised, 1);
    let i = common::preds(&initial, 1);
    let expected = vec![None, Some(4), Some(1), Some(2), Some(3)];
    check(
        r == expected && i[1].is_none() && i[2..] == expected[2..],
        format!("revised {r:?}, initial {i:?}"),
    )
}

fn oracle_counts(computed: &[bool], truth: &[bool], n_pos: i64) -> (i64, i64, i64, i64) {
    let (mut tp, mut fp, mut fn_, mut union) = (0, 0, 0, 0);
    for (&c, &t) in computed.iter().zip(truth) {
        tp += i64::from(c && t);
        fp += i64::from(c && !t);
        fn_ += i64::from(!c && t);
        union += i64::from(c || t);
    }
    (tp, fp, n_pos - union, fn_)
}

fn oracle_mcc((tp, fp, tn, fn_): (i64, i64, i64, i64)) -> f64 {
    let num = i128::from(tp) * i128::from(tn) - i128::from(fp) * i128::from(fn_);
    let den = i128::from(tp + fp) * i128::from(tp + fn_) * i128::from(tn + fp) * i128::from(tn + fn_);
    if den <= 0 {
        0.0
    } else {
        num as f64 / (den as f64).sqrt()
    }
}

fn evaluation_harness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3cc);
    let mut mismatches = Vec::new();
    let mut negative = 0;
    for _ in 0..10_000 {
        let universe = rng.gen_range(0..60);
        let pc = rng.gen_range(0.0..1.0);
        let pt = rng.gen_range(0.0..1.0);
        let computed: Vec<bool> = (0..universe).map(|_| rng.gen_bool(pc)).collect();
        let truth: Vec<bool> = (0..universe).map(|_| rng.gen_bool(pt)).collect();
        // nPos below the union size exercises negative tn.
        let n_pos = rng.gen_range(0..=universe as i64 + 10);
        let cs: HashSet<usize> = (0..universe).filter(|&i| computed[i]).collect();
        let ts: HashSet<usize> = (0..universe).filter(|&i| truth[i]).collect();
        let got = confusion(&cs, &ts, n_pos);
        let want = oracle_counts(&computed, &truth, n_pos);
        negative += usize::from(want.2 < 0);
        if (got.tp, got.fp, got.tn, got.fn_) != want || mcc(got) != oracle_mcc(want) {
            mismatches.push(format!("{got:?} vs {want:?}"));
        }
    }
    let cc = |tp, fp, tn, fn_| ConfusionCounts { tp, fp, tn, fn_ };
    let boundary = [
        (cc(10, 0, 5, 0), 1.0),
        (cc(0, 7, 0, 3), -1.0),
        (cc(0, 0, 9, 0), 0.0),
        (cc(4, 0, 0, 0), 0.0),
        (cc(3, 2, 0, 0), 0.0),
        (cc(2, 2, -3, 4), 0.0),
    ];
    let bad: Vec<_> = boundary.iter().filter(|(c, m)| mcc(*c) != *m).collect();
    check(
        mismatches.is_empty() && bad.is_empty(),
        format!(
            "10000 instances ({negative} with negative tn), mismatches {:?}, boundary failures {bad:?}",
            &mismatches[..mismatches.len().min(3)]
        ),
    )
}

fn clone_detection() -> Outcome {
    let planted = clone_corpus(50, 7);
    let corpus = ingest(planted.events.clone()).unwrap();
    let mut details = Vec::new();
    let mut ok = true;
    for min_nloc in [6, 20] {
        let report = clone_report(&corpus.posts, 2, min_nloc, false);
        let found: BTreeSet<BTreeSet<i64>> = report
            .groups
            .iter()
            .map(|g| g.group.occurrences.iter().map(|o| o.post_id).collect())
            .collect();
        let expected: BTreeSet<BTreeSet<i64>> = planted
            .planted
            .iter()
            .filter(|p| p.nloc >= min_nloc)
            .map(|p| p.posts.clone())
            .collect();
        let tp = found.intersection(&expected).count();
        let precision = if found.is_empty() {
            1.0
        } else {
            tp as f64 / found.len() as f64
        };
        let recall = if expected.is_empty() {
            1.0
        } else {
            tp as f64 / expected.len() as f64
        };
        let nloc_ok = report.groups.iter().all(|g| {
            planted
                .planted
                .iter()
                .any(|p| p.nloc == g.group.nloc && p.posts.iter().eq(g.group.occurrences.iter().map(|o| &o.post_id)))
        });
        ok &= precision == 1.0 && recall == 1.0 && nloc_ok;
        details.push(format!(
            "minNloc {min_nloc}: {} groups, precision {precision}, recall {recall}, nloc exact {nloc_ok}",
            found.len()
        ));
    }
    check(ok, format!("{} posts; {}", corpus.posts.len(), details.join("; ")))
}

fn random_lines(rng: &mut impl Rng, n: usize) -> Vec<String> {
    const LINES: &[&str] = &["", "a", "b", "}", "x = 1;", "  return y;", "// note"];
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.7) {
                LINES.choose(rng).unwrap().to_string()
            } else {
                format!("line {}", rng.gen_range(0..20))
            }
        })
        .collect()
}

fn diff_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1ff);
    let mut failures = Vec::new();
    for _ in 0..10_000 {
        let n = rng.gen_range(0..15);
        let pred = random_lines(&mut rng, n);
        let mut cur = pred.clone();
        for _ in 0..rng.gen_range(0..6) {
            match rng.gen_range(0..3) {
                0 => {
                    let at = rng.gen_range(0..=cur.len());
                    cur.insert(at, random_lines(&mut rng, 1).remove(0));
                }
                1 if !cur.is_empty() => {
                    let at = rng.gen_range(0..cur.len());
                    cur.remove(at);
                }
                _ if !cur.is_empty() => {
                    let at = rng.gen_range(0..cur.len());
                    cur[at] = random_lines(&mut rng, 1).remove(0);
                }
                _ => {}
            }
        }
        let (pred, cur) = (pred.join("\n"), cur.join("\n"));
        let diff = line_diff(&pred, &cur);
        match diff.apply(&pred) {
            Ok(out) if out == cur => {}
            other => failures.push(format!("{pred:?} -> {cur:?}: {other:?}")),
        }
    }
    check(
        failures.is_empty(),
        format!("10000 pairs, failures {:?}", &failures[..failures.len().min(3)]),
    )
}

const SAMPLES_ENV: &str = "BLOCKHIST_GT_SAMPLES";

/// Each entry of the directory named by the environment variable is a sample
/// directory holding `history.jsonl` (or `history.csv`) and `ground_truth.csv`.
fn external_data() -> Outcome {
    let Some(dir) = std::env::var_os(SAMPLES_ENV).map(PathBuf::from) else {
        return Outcome::Skip(format!("set {SAMPLES_ENV} to a directory of ground-truth samples"));
    };
    let mut entries: Vec<PathBuf> = match std::fs::read_dir(&dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect(),
        Err(e) => return Outcome::Fail(format!("{}: {e}", dir.display())),
    };
    entries.sort();
    let mut samples = Vec::new();
    for d in entries {
        let history = ["history.jsonl", "history.csv"]
            .iter()
            .map(|f| d.join(f))
            .find(|p| p.exists());
        let Some(history) = history else {
            return Outcome::Fail(format!("{}: no history file", d.display()));
        };
        match Sample::load(&history, &d.join("ground_truth.csv")) {
            Ok(s) => samples.push(s),
            Err(e) => return Outcome::Fail(format!("{}: {e}", d.display())),
        }
    }
    if samples.is_empty() {
        return Outcome::Fail(format!("{}: no samples", dir.display()));
    }
    let config = MatchingConfig::default();
    let mut counts = (ConfusionCounts::default(), ConfusionCounts::default());
    for s in &samples {
        match evaluate(&config, &s.posts, &s.gt, 0) {
            Ok(r) => counts = (counts.0 + r.counts_text, counts.1 + r.counts_code),
            Err(e) => return Outcome::Fail(format!("{}: {e}", s.name)),
        }
    }
    let (text, code) = (mcc(counts.0), mcc(counts.1));
    check(
        (text - 0.86).abs() <= 0.02 && (code - 0.92).abs() <= 0.02,
        format!(
            "{} samples, MCC text {text:.3} (target 0.86), code {code:.3} (target 0.92)",
            samples.len()
        ),
    )
}

fn main() {
    type Criterion = (&'static str, Box<dyn FnOnce() -> Outcome>, Option<Duration>);
    let criteria: Vec<Criterion> = vec![
        (
            "metric enumeration",
            Box::new(metric_enumeration),
            Some(Duration::from_secs(1)),
        ),
        (
            "edit-distance oracle",
            Box::new(edit_distance_oracle),
            Some(Duration::from_secs(60)),
        ),
        ("metric axioms", Box::new(metric_axioms), None),
        (
            "extraction golden suite",
            Box::new(extraction_golden),
            Some(Duration::from_secs(1)),
        ),
        (
            "matching correctness",
            Box::new(matching_correctness),
            Some(Duration::from_secs(120)),
        ),
        ("runner-up regression", Box::new(runner_up_regression), None),
        ("evaluation harness", Box::new(evaluation_harness), None),
        (
            "clone detection",
            Box::new(clone_detection),
            Some(Duration::from_secs(5)),
        ),
        ("diff round-trip", Box::new(diff_round_trip), None),
        ("external ground truth", Box::new(external_data), None),
    ];
    let mut failed = 0;
    for (name, f, limit) in criteria {
        match timed(f, limit) {
            Outcome::Pass(d) => println!("PASS  {name}: {d}"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
            Outcome::Skip(d) => println!("SKIP  {name}: {d}"),
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
