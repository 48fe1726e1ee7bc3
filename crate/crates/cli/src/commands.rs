//! Subcommand implementations. Each writes its primary result to `out`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use blockhist::clones::clone_report;
use blockhist::corpus_io::{export_tables, ingest, read_events, reconstruct, summarize, Corpus, Format};
use blockhist::evaluation::sweep::{run_stages, write_csv, Sample, SampleError, Stage, SweepOptions, SweepResult};
use blockhist::evaluation::{check_coverage, timed_score, GroundTruth};
use blockhist::history::{MatchingConfig, Strategy};
use serde::Serialize;

use crate::error::CliError;

pub fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else if path.exists() {
        Err(CliError::data(path, "not a regular file"))
    } else {
        Err(CliError::data(path, "no such file"))
    }
}

pub fn prepare_dir(path: &Path) -> Result<(), CliError> {
    if path.exists() && !path.is_dir() {
        return Err(CliError::data(path, "exists and is not a directory"));
    }
    fs::create_dir_all(path).map_err(|e| CliError::data(path, e))
}

pub fn load_corpus(input: &Path, format: Option<Format>) -> Result<Corpus, CliError> {
    require_file(input)?;
    let format = format.unwrap_or_else(|| Format::from_path(input));
    let events = read_events(input, format).map_err(|e| CliError::data(input, e))?;
    ingest(events).map_err(|e| CliError::data(input, e))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| CliError::data(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Internal(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::data(path, e))
}

fn print_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::Internal(e.to_string()))?;
    writeln!(out).map_err(|e| CliError::Internal(e.to_string()))
}

pub struct ReconstructRun<'a> {
    pub input: &'a Path,
    pub format: Option<Format>,
    pub output: &'a Path,
    pub config: MatchingConfig,
    pub strategy: Strategy,
}

/// Reconstructs lineages, writes the result tables and `summary.json`.
pub fn reconstruct_cmd(run: ReconstructRun<'_>, out: &mut dyn Write) -> Result<(), CliError> {
    let mut corpus = load_corpus(run.input, run.format)?;
    prepare_dir(run.output)?;
    reconstruct(&mut corpus, &run.config, run.strategy).map_err(|e| CliError::Internal(e.to_string()))?;
    export_tables(&corpus, run.output).map_err(|e| CliError::data(run.output, e))?;
    let summary = summarize(&corpus);
    write_json(&summary, &run.output.join("summary.json"))?;
    print_json(&summary, out)
}

pub struct EvaluateRun<'a> {
    pub input: &'a Path,
    pub format: Option<Format>,
    pub ground_truth: &'a Path,
    pub repetitions: usize,
    pub output: Option<&'a Path>,
    pub config: MatchingConfig,
    pub strategy: Strategy,
}

/// Scores one configuration against ground truth.
pub fn evaluate_cmd(run: EvaluateRun<'_>, out: &mut dyn Write) -> Result<SweepResult, CliError> {
    let corpus = load_corpus(run.input, run.format)?;
    require_file(run.ground_truth)?;
    let gt = GroundTruth::load(run.ground_truth).map_err(|e| CliError::Data(e.to_string()))?;
    check_coverage(&corpus.posts, &gt).map_err(|e| CliError::data(run.ground_truth, e))?;
    let (scores, runtime) = timed_score(&corpus.posts, &gt, &run.config, run.strategy, run.repetitions)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let result = SweepResult::single(run.config, scores, runtime);
    if let Some(path) = run.output {
        write_json(&result, path)?;
    }
    print_json(&result, out)?;
    Ok(result)
}

/// `HISTORY=GROUND_TRUTH` pairs, or every subdirectory of `dir` holding
/// `history.jsonl` or `history.csv` next to `ground_truth.csv`.
pub fn sample_paths(pairs: &[String], dir: Option<&Path>) -> Result<Vec<(String, PathBuf, PathBuf)>, CliError> {
    let mut out = Vec::new();
    for p in pairs {
        let (h, g) = p
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--sample expects HISTORY=GROUND_TRUTH, got {p:?}")))?;
        let h = PathBuf::from(h);
        let name = h
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        out.push((name, h, PathBuf::from(g)));
    }
    if let Some(dir) = dir {
        let entries = fs::read_dir(dir).map_err(|e| CliError::data(dir, e))?;
        let mut subdirs: Vec<PathBuf> = entries
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.is_dir())
            .collect();
        subdirs.sort();
        for d in subdirs {
            let history = ["history.jsonl", "history.csv"]
                .iter()
                .map(|f| d.join(f))
                .find(|p| p.is_file());
            let gt = d.join("ground_truth.csv");
            let (Some(history), true) = (history, gt.is_file()) else {
                continue;
            };
            let name = d
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            out.push((name, history, gt));
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage(
            "no samples given (use --sample or --samples-dir)".into(),
        ));
    }
    Ok(out)
}

pub fn load_samples(paths: &[(String, PathBuf, PathBuf)]) -> Result<Vec<Sample>, CliError> {
    paths
        .iter()
        .map(|(name, h, g)| {
            require_file(h)?;
            require_file(g)?;
            let mut s = Sample::load(h, g).map_err(|e| match e {
                SampleError::Ingest(e) => CliError::data(h, e),
                SampleError::Evaluation(e) => CliError::data(g, e),
            })?;
            s.name = name.clone();
            Ok(s)
        })
        .collect()
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Selection<'a> {
    stage: Stage,
    samples: Vec<&'a str>,
    fine_selection: &'a Option<blockhist::evaluation::sweep::FineSelection>,
    combined_selection: &'a Option<blockhist::evaluation::sweep::CombinedSelection>,
    best: Option<&'a SweepResult>,
}

/// Runs the sweep up to `stage` and writes one ranked CSV per stage plus
/// `selection.json`. Prints the best configuration of the last stage.
pub fn sweep_cmd(
    samples: &[Sample],
    stage: Stage,
    opts: SweepOptions,
    output: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    prepare_dir(output)?;
    let outcome = run_stages(samples, opts, stage).map_err(|e| CliError::Internal(e.to_string()))?;
    let stages = [
        ("coarse", &outcome.coarse, true),
        ("fine", &outcome.fine, stage != Stage::Coarse),
        ("combined", &outcome.combined, stage == Stage::Combined),
    ];
    for (name, results, ran) in stages {
        if !ran {
            continue;
        }
        let path = output.join(format!("{name}.csv"));
        let file = fs::File::create(&path).map_err(|e| CliError::data(&path, e))?;
        write_csv(results, BufWriter::new(file)).map_err(|e| CliError::data(&path, e))?;
    }
    let last = match stage {
        Stage::Coarse => &outcome.coarse,
        Stage::Fine => &outcome.fine,
        Stage::Combined => &outcome.combined,
    };
    let selection = Selection {
        stage,
        samples: samples.iter().map(|s| s.name.as_str()).collect(),
        fine_selection: &outcome.fine_selection,
        combined_selection: &outcome.combined_selection,
        best: last.first(),
    };
    write_json(&selection, &output.join("selection.json"))?;
    print_json(&last.first(), out)
}

pub struct ClonesRun<'a> {
    pub input: &'a Path,
    pub format: Option<Format>,
    pub min_threads: usize,
    pub min_nloc: usize,
    pub all_versions: bool,
    pub output: Option<&'a Path>,
}

/// Writes the clone report as CSV when `output` ends in `.csv`, as JSON
/// otherwise, and to `out` as JSON when no output is given.
pub fn clones_cmd(run: ClonesRun<'_>, out: &mut dyn Write) -> Result<(), CliError> {
    if run.min_threads == 0 {
        return Err(CliError::Usage("--min-threads must be at least 1".into()));
    }
    let corpus = load_corpus(run.input, run.format)?;
    let report = clone_report(&corpus.posts, run.min_threads, run.min_nloc, run.all_versions);
    match run.output {
        None => print_json(&report, out),
        Some(path) if Format::from_path(path) == Format::Csv => {
            let file = fs::File::create(path).map_err(|e| CliError::data(path, e))?;
            report
                .write_csv(BufWriter::new(file))
                .map_err(|e| CliError::data(path, e))
        }
        Some(path) => write_json(&report, path),
    }
}
