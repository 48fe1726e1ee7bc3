//! The three-stage configuration sweep.
//!
//! * coarse: every catalog metric for text and code alike, thresholds 0.0 to
//!   1.0 in steps of 0.1
//! * fine: metrics that reach the 95% quantile in every sample for text or
//!   for code, plus backup candidates and `equal`, thresholds in steps of 0.01
//! * combined: the top text and code configurations crossed with the best
//!   backup configurations, ranked by the sum of both MCC values

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::io;
use std::path::Path;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use textsim::{enumerate_configs, named, Family, MetricConfig, SimilarityError};

use super::{check_coverage, timed_score, ConfusionCounts, EvaluationError, GroundTruth, Scores};
use crate::corpus_io::{ingest, read_events, Format, IngestError};
use crate::history::{MatchingConfig, Strategy, TypeMatching};
use crate::model::Post;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Coarse,
    Fine,
    Combined,
}

impl std::str::FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "coarse" => Ok(Stage::Coarse),
            "fine" => Ok(Stage::Fine),
            "combined" => Ok(Stage::Combined),
            other => Err(format!("unknown sweep stage {other:?}")),
        }
    }
}

/// A ground-truth sample: posts plus their validated connections.
#[derive(Debug, Clone)]
pub struct Sample {
    pub name: String,
    pub posts: Vec<Post>,
    pub gt: GroundTruth,
}

#[derive(Debug, thiserror::Error)]
pub enum SampleError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
}

impl Sample {
    /// Reads a post history file and its ground truth and checks that they
    /// cover each other. The sample is named after the history file's stem.
    pub fn load(history: &Path, ground_truth: &Path) -> Result<Sample, SampleError> {
        let corpus = ingest(read_events(history, Format::from_path(history))?)?;
        let gt = GroundTruth::load(ground_truth).map_err(EvaluationError::from)?;
        check_coverage(&corpus.posts, &gt)?;
        let name = history
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(Sample {
            name,
            posts: corpus.posts,
            gt,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    /// Timed repetitions per configuration; 0 skips timing.
    pub repetitions: usize,
    pub strategy: Strategy,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            repetitions: 3,
            strategy: Strategy::Revised,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleScores {
    pub sample: String,
    pub scores: Scores,
}

mod seconds {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepResult {
    pub config: MatchingConfig,
    pub counts_text: ConfusionCounts,
    pub counts_code: ConfusionCounts,
    pub mcc_text: f64,
    pub mcc_code: f64,
    /// Summed over samples, in seconds.
    #[serde(with = "seconds")]
    pub runtime: Duration,
    pub negative_tn: bool,
    pub samples: Vec<SampleScores>,
}

impl SweepResult {
    pub fn single(config: MatchingConfig, scores: Scores, runtime: Duration) -> Self {
        SweepResult {
            config,
            counts_text: scores.text.counts,
            counts_code: scores.code.counts,
            mcc_text: scores.text.mcc,
            mcc_code: scores.code.mcc,
            runtime,
            negative_tn: scores.negative_tn(),
            samples: Vec::new(),
        }
    }

    pub fn mcc_sum(&self) -> f64 {
        self.mcc_text + self.mcc_code
    }
}

const COARSE_STEPS: usize = 10;
const FINE_STEPS: usize = 100;

fn thresholds(steps: usize) -> impl Iterator<Item = f64> {
    (0..=steps).map(move |k| k as f64 / steps as f64)
}

/// Every catalog metric for both block types, eleven thresholds each.
pub fn coarse_plan() -> Vec<MatchingConfig> {
    uniform_plan(&enumerate_configs(), COARSE_STEPS)
}

/// The given metrics for both block types, 101 thresholds each.
pub fn fine_plan(metrics: &[MetricConfig]) -> Vec<MatchingConfig> {
    uniform_plan(metrics, FINE_STEPS)
}

fn uniform_plan(metrics: &[MetricConfig], steps: usize) -> Vec<MatchingConfig> {
    metrics
        .iter()
        .flat_map(|&m| thresholds(steps).map(move |t| MatchingConfig::uniform(m, t)))
        .collect()
}

/// Value at the nearest-rank `q` quantile.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

/// Whether the metric can replace one that is not applicable to short input.
pub fn is_backup_candidate(m: &MetricConfig) -> bool {
    m.always_applicable() && m.family() != Family::Equal
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FineSelection {
    pub regular: Vec<MetricConfig>,
    pub backup: Vec<MetricConfig>,
}

impl FineSelection {
    /// Regular metrics, backups and the `equal` baseline, without repeats.
    pub fn metrics(&self) -> Vec<MetricConfig> {
        let mut seen = BTreeSet::new();
        self.regular
            .iter()
            .chain(&self.backup)
            .chain(std::iter::once(&named::EQUAL))
            .filter(|m| seen.insert(m.name()))
            .copied()
            .collect()
    }
}

fn per_sample(results: &[SweepResult], pick: impl Fn(&Scores) -> f64) -> Vec<Vec<f64>> {
    let n = results.first().map_or(0, |r| r.samples.len());
    (0..n)
        .map(|s| results.iter().map(|r| pick(&r.samples[s].scores)).collect())
        .collect()
}

/// Metrics that, for some threshold, reach the `q` quantile in every sample
/// for text or for code; plus the best `n_backup` backup candidates.
pub fn select_fine_metrics(coarse: &[SweepResult], q: f64, n_backup: usize) -> FineSelection {
    let text = per_sample(coarse, |s| s.text.mcc);
    let code = per_sample(coarse, |s| s.code.mcc);
    let qt: Vec<f64> = text.iter().map(|v| quantile(v, q)).collect();
    let qc: Vec<f64> = code.iter().map(|v| quantile(v, q)).collect();
    let passes = |r: &SweepResult| {
        let all = |thr: &[f64], f: &dyn Fn(&Scores) -> f64| r.samples.iter().zip(thr).all(|(s, &t)| f(&s.scores) >= t);
        !r.samples.is_empty() && (all(&qt, &|s| s.text.mcc) || all(&qc, &|s| s.code.mcc))
    };
    let mut regular: Vec<MetricConfig> = Vec::new();
    for r in coarse.iter().filter(|r| passes(r)) {
        if !regular.contains(&r.config.text.metric) {
            regular.push(r.config.text.metric);
        }
    }
    // Backups: candidates that pass first, then by their best MCC sum.
    let mut best: Vec<(bool, f64, MetricConfig)> = Vec::new();
    for r in coarse.iter().filter(|r| is_backup_candidate(&r.config.text.metric)) {
        let m = r.config.text.metric;
        let entry = (passes(r), r.mcc_sum(), m);
        match best.iter_mut().find(|e| e.2 == m) {
            Some(e) => {
                e.0 |= entry.0;
                e.1 = e.1.max(entry.1);
            }
            None => best.push(entry),
        }
    }
    best.sort_by(|a, b| {
        b.0.cmp(&a.0)
            .then(b.1.total_cmp(&a.1))
            .then(a.2.name().cmp(&b.2.name()))
    });
    let backup = best.into_iter().take(n_backup).map(|e| e.2).collect();
    regular.sort_by_key(|m| m.name());
    FineSelection { regular, backup }
}

/// (metric, threshold) pairs for each slot of the combined stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CombinedSelection {
    pub text: Vec<(MetricConfig, f64)>,
    pub text_backup: Vec<(MetricConfig, f64)>,
    pub code: Vec<(MetricConfig, f64)>,
    pub code_backup: Vec<(MetricConfig, f64)>,
}

fn top_by(
    results: &[SweepResult],
    pick: impl Fn(&SweepResult) -> f64,
    keep: impl Fn(&SweepResult) -> bool,
) -> Vec<&SweepResult> {
    let mut v: Vec<&SweepResult> = results.iter().filter(|r| keep(r)).collect();
    v.sort_by(|a, b| {
        pick(b)
            .total_cmp(&pick(a))
            .then(a.runtime.cmp(&b.runtime))
            .then(a.config.label().cmp(&b.config.label()))
    });
    v
}

/// Text and code configurations at or above the `q` quantile of their MCC
/// and the best backup configurations, from fine-stage results.
pub fn select_combined(fine: &[SweepResult], q: f64, n_text_backup: usize, n_code_backup: usize) -> CombinedSelection {
    let pair = |r: &&SweepResult| (r.config.text.metric, r.config.text.theta);
    let qt = quantile(&fine.iter().map(|r| r.mcc_text).collect::<Vec<_>>(), q);
    let qc = quantile(&fine.iter().map(|r| r.mcc_code).collect::<Vec<_>>(), q);
    CombinedSelection {
        text: top_by(fine, |r| r.mcc_text, |r| r.mcc_text >= qt)
            .iter()
            .map(pair)
            .collect(),
        code: top_by(fine, |r| r.mcc_code, |r| r.mcc_code >= qc)
            .iter()
            .map(pair)
            .collect(),
        text_backup: top_by(fine, |r| r.mcc_text, |r| is_backup_candidate(&r.config.text.metric))
            .iter()
            .take(n_text_backup)
            .map(pair)
            .collect(),
        code_backup: top_by(fine, |r| r.mcc_code, |r| is_backup_candidate(&r.config.text.metric))
            .iter()
            .take(n_code_backup)
            .map(pair)
            .collect(),
    }
}

/// Cross product text × text backup × code × code backup.
pub fn combined_plan(sel: &CombinedSelection) -> Vec<MatchingConfig> {
    let mut plan = Vec::new();
    for &(tm, tt) in &sel.text {
        for &(tb, tbt) in &sel.text_backup {
            for &(cm, ct) in &sel.code {
                for &(cb, cbt) in &sel.code_backup {
                    plan.push(MatchingConfig {
                        text: TypeMatching {
                            metric: tm,
                            theta: tt,
                            backup: tb,
                            backup_theta: tbt,
                        },
                        code: TypeMatching {
                            metric: cm,
                            theta: ct,
                            backup: cb,
                            backup_theta: cbt,
                        },
                    });
                }
            }
        }
    }
    plan
}

/// Orders by MCC sum descending, runtime ascending, then configuration label.
pub fn compare(a: &SweepResult, b: &SweepResult) -> Ordering {
    b.mcc_sum()
        .total_cmp(&a.mcc_sum())
        .then(a.runtime.cmp(&b.runtime))
        .then_with(|| a.config.label().cmp(&b.config.label()))
}

pub fn rank(results: &mut [SweepResult]) {
    results.sort_by(compare);
}

/// Scores one configuration on every sample; counts are summed over samples.
pub fn run_config(
    config: &MatchingConfig,
    samples: &[Sample],
    opts: SweepOptions,
) -> Result<SweepResult, SimilarityError> {
    let mut total_text = ConfusionCounts::default();
    let mut total_code = ConfusionCounts::default();
    let mut runtime = Duration::ZERO;
    let mut per = Vec::with_capacity(samples.len());
    for s in samples {
        let (scores, t) = timed_score(&s.posts, &s.gt, config, opts.strategy, opts.repetitions)?;
        total_text = total_text + scores.text.counts;
        total_code = total_code + scores.code.counts;
        runtime += t;
        per.push(SampleScores {
            sample: s.name.clone(),
            scores,
        });
    }
    let mut r = SweepResult::single(
        *config,
        Scores {
            text: super::TypeScore {
                counts: total_text,
                mcc: super::mcc(total_text),
            },
            code: super::TypeScore {
                counts: total_code,
                mcc: super::mcc(total_code),
            },
        },
        runtime,
    );
    r.negative_tn |= per.iter().any(|p| p.scores.negative_tn());
    r.samples = per;
    Ok(r)
}

/// Runs every configuration of `plan` (in parallel on the current rayon pool)
/// and returns the ranked results.
pub fn run_plan(
    plan: &[MatchingConfig],
    samples: &[Sample],
    opts: SweepOptions,
) -> Result<Vec<SweepResult>, SimilarityError> {
    let mut results = plan
        .par_iter()
        .map(|c| run_config(c, samples, opts))
        .collect::<Result<Vec<_>, _>>()?;
    rank(&mut results);
    Ok(results)
}

/// Runs all three stages in order, each feeding the next.
pub struct SweepOutcome {
    pub coarse: Vec<SweepResult>,
    pub fine_selection: Option<FineSelection>,
    pub fine: Vec<SweepResult>,
    pub combined_selection: Option<CombinedSelection>,
    pub combined: Vec<SweepResult>,
}

/// Runs the stages up to and including `last`; later stages stay empty.
pub fn run_stages(samples: &[Sample], opts: SweepOptions, last: Stage) -> Result<SweepOutcome, SimilarityError> {
    let mut out = SweepOutcome {
        coarse: run_plan(&coarse_plan(), samples, opts)?,
        fine_selection: None,
        fine: Vec::new(),
        combined_selection: None,
        combined: Vec::new(),
    };
    if last == Stage::Coarse {
        return Ok(out);
    }
    let fine_selection = select_fine_metrics(&out.coarse, 0.95, 4);
    out.fine = run_plan(&fine_plan(&fine_selection.metrics()), samples, opts)?;
    out.fine_selection = Some(fine_selection);
    if last == Stage::Fine {
        return Ok(out);
    }
    let combined_selection = select_combined(&out.fine, 0.99, 3, 2);
    out.combined = run_plan(&combined_plan(&combined_selection), samples, opts)?;
    out.combined_selection = Some(combined_selection);
    Ok(out)
}

pub fn run_all(samples: &[Sample], opts: SweepOptions) -> Result<SweepOutcome, SimilarityError> {
    run_stages(samples, opts, Stage::Combined)
}

pub const CSV_HEADER: [&str; 21] = [
    "Rank",
    "SimText",
    "ThetaText",
    "BackupText",
    "BackupThetaText",
    "SimCode",
    "ThetaCode",
    "BackupCode",
    "BackupThetaCode",
    "TpText",
    "FpText",
    "TnText",
    "FnText",
    "MccText",
    "TpCode",
    "FpCode",
    "TnCode",
    "FnCode",
    "MccCode",
    "RuntimeSeconds",
    "NegativeTn",
];

/// Writes ranked results as CSV, one row per configuration.
pub fn write_csv<W: io::Write>(results: &[SweepResult], w: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(CSV_HEADER)?;
    for (i, r) in results.iter().enumerate() {
        let c = &r.config;
        let (t, k) = (r.counts_text, r.counts_code);
        w.write_record([
            (i + 1).to_string(),
            c.text.metric.name(),
            c.text.theta.to_string(),
            c.text.backup.name(),
            c.text.backup_theta.to_string(),
            c.code.metric.name(),
            c.code.theta.to_string(),
            c.code.backup.name(),
            c.code.backup_theta.to_string(),
            t.tp.to_string(),
            t.fp.to_string(),
            t.tn.to_string(),
            t.fn_.to_string(),
            r.mcc_text.to_string(),
            k.tp.to_string(),
            k.fp.to_string(),
            k.tn.to_string(),
            k.fn_.to_string(),
            r.mcc_code.to_string(),
            r.runtime.as_secs_f64().to_string(),
            r.negative_tn.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_plan_size() {
        assert_eq!(coarse_plan().len(), 1474);
    }

    #[test]
    fn fine_plan_size() {
        let metrics: Vec<_> = enumerate_configs().into_iter().take(32).collect();
        assert_eq!(fine_plan(&metrics).len(), 3232);
    }

    #[test]
    fn combined_plan_size() {
        let m = named::EQUAL;
        let sel = CombinedSelection {
            text: vec![(m, 0.1); 13],
            text_backup: vec![(m, 0.2); 3],
            code: vec![(m, 0.3); 15],
            code_backup: vec![(m, 0.4); 2],
        };
        assert_eq!(combined_plan(&sel).len(), 1170);
    }

    #[test]
    fn quantile_nearest_rank() {
        let v = [0.1, 0.5, 0.2, 0.9];
        assert_eq!(quantile(&v, 0.95), 0.9);
        assert_eq!(quantile(&v, 0.5), 0.2);
        assert_eq!(quantile(&v, 0.0), 0.1);
    }

    fn result(metric: MetricConfig, theta: f64, text: f64, code: f64, runtime_ms: u64) -> SweepResult {
        SweepResult {
            config: MatchingConfig::uniform(metric, theta),
            counts_text: ConfusionCounts::default(),
            counts_code: ConfusionCounts::default(),
            mcc_text: text,
            mcc_code: code,
            runtime: Duration::from_millis(runtime_ms),
            negative_tn: false,
            samples: Vec::new(),
        }
    }

    #[test]
    fn ranking_order() {
        let m = named::MANHATTAN_FOUR_GRAM_NORMALIZED;
        let mut rs = vec![
            result(m, 0.1, 0.5, 0.5, 10),
            result(m, 0.2, 0.9, 0.5, 30),
            result(m, 0.3, 0.9, 0.5, 20),
            result(named::EQUAL, 0.3, 0.9, 0.5, 20),
        ];
        rank(&mut rs);
        let order: Vec<_> = rs
            .iter()
            .map(|r| (r.config.text.metric.name(), r.config.text.theta))
            .collect();
        assert_eq!(
            order,
            vec![
                ("equal".to_string(), 0.3),
                ("manhattanFourGramNormalized".to_string(), 0.3),
                ("manhattanFourGramNormalized".to_string(), 0.2),
                ("manhattanFourGramNormalized".to_string(), 0.1),
            ]
        );
    }
}
