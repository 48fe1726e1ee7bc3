//! Run configuration: JSON file values overridden by command-line flags.

use std::path::Path;

use blockhist::corpus_io::Format;
use blockhist::evaluation::sweep::Stage;
use blockhist::history::{MatchingConfig, Strategy, TypeMatching};
use clap::Args;
use serde::Deserialize;
use textsim::MetricConfig;

use crate::error::CliError;

pub fn parse_strategy(s: &str) -> Result<Strategy, String> {
    match s {
        "initial" => Ok(Strategy::Initial),
        "revised" => Ok(Strategy::Revised),
        other => Err(format!("unknown strategy {other:?} (expected initial or revised)")),
    }
}

pub fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "jsonl" | "json-lines" => Ok(Format::JsonLines),
        "csv" => Ok(Format::Csv),
        other => Err(format!("unknown format {other:?} (expected jsonl or csv)")),
    }
}

/// Matching settings; every field overrides the default configuration.
#[derive(Debug, Clone, Copy, Default, Args, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MatchingOverrides {
    /// Similarity metric for text blocks
    #[arg(long)]
    pub sim_text: Option<MetricConfig>,
    #[arg(long)]
    pub theta_text: Option<f64>,
    #[arg(long)]
    pub backup_text: Option<MetricConfig>,
    #[arg(long)]
    pub backup_theta_text: Option<f64>,
    /// Similarity metric for code blocks
    #[arg(long)]
    pub sim_code: Option<MetricConfig>,
    #[arg(long)]
    pub theta_code: Option<f64>,
    #[arg(long)]
    pub backup_code: Option<MetricConfig>,
    #[arg(long)]
    pub backup_theta_code: Option<f64>,
    /// Matching strategy: initial or revised
    #[arg(long, value_parser = parse_strategy)]
    #[serde(default)]
    pub strategy: Option<Strategy>,
}

impl MatchingOverrides {
    /// Fields set in `self` win over those in `other`.
    pub fn or(self, other: MatchingOverrides) -> MatchingOverrides {
        MatchingOverrides {
            sim_text: self.sim_text.or(other.sim_text),
            theta_text: self.theta_text.or(other.theta_text),
            backup_text: self.backup_text.or(other.backup_text),
            backup_theta_text: self.backup_theta_text.or(other.backup_theta_text),
            sim_code: self.sim_code.or(other.sim_code),
            theta_code: self.theta_code.or(other.theta_code),
            backup_code: self.backup_code.or(other.backup_code),
            backup_theta_code: self.backup_theta_code.or(other.backup_theta_code),
            strategy: self.strategy.or(other.strategy),
        }
    }

    /// Applies the set fields to `c`. Does not validate.
    pub fn apply_to(&self, c: &mut MatchingConfig) {
        let set = |t: &mut TypeMatching,
                   m: Option<MetricConfig>,
                   th: Option<f64>,
                   b: Option<MetricConfig>,
                   bt: Option<f64>| {
            t.metric = m.unwrap_or(t.metric);
            t.theta = th.unwrap_or(t.theta);
            t.backup = b.unwrap_or(t.backup);
            t.backup_theta = bt.unwrap_or(t.backup_theta);
        };
        set(
            &mut c.text,
            self.sim_text,
            self.theta_text,
            self.backup_text,
            self.backup_theta_text,
        );
        set(
            &mut c.code,
            self.sim_code,
            self.theta_code,
            self.backup_code,
            self.backup_theta_code,
        );
    }

    pub fn resolve(self) -> Result<(MatchingConfig, Strategy), CliError> {
        let mut c = MatchingConfig::default();
        self.apply_to(&mut c);
        c.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok((c, self.strategy.unwrap_or_default()))
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct CloneSettings {
    pub min_threads: Option<usize>,
    pub min_nloc: Option<usize>,
    pub all_versions: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct SweepSettings {
    pub stage: Option<Stage>,
    pub repetitions: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct ServerSettings {
    pub host: Option<String>,
    pub port: Option<u16>,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct FileConfig {
    pub matching: MatchingOverrides,
    pub threads: Option<usize>,
    pub clones: CloneSettings,
    pub sweep: SweepSettings,
    pub server: ServerSettings,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::data(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file: FileConfig = serde_json::from_str(
            r#"{"matching": {"thetaText": 0.5, "simCode": "levenshtein", "strategy": "initial"}, "threads": 2}"#,
        )
        .unwrap();
        let flags = MatchingOverrides {
            theta_text: Some(0.3),
            ..Default::default()
        };
        let (c, s) = flags.or(file.matching).resolve().unwrap();
        assert_eq!(c.text.theta, 0.3);
        assert_eq!(c.code.metric.name(), "levenshtein");
        assert_eq!(c.code.theta, 0.23);
        assert_eq!(s, Strategy::Initial);
    }

    #[test]
    fn defaults_are_the_final_configuration() {
        let (c, s) = MatchingOverrides::default().resolve().unwrap();
        assert_eq!(c, MatchingConfig::default());
        assert_eq!(s, Strategy::Revised);
    }

    #[test]
    fn unknown_fields_and_bad_thresholds_rejected() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"mathcing": {}}"#).is_err());
        let bad = MatchingOverrides {
            theta_code: Some(1.5),
            ..Default::default()
        };
        assert!(matches!(bad.resolve(), Err(CliError::Usage(_))));
    }
}
