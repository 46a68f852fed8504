//! Config file loading. Flags given on the command line win over file values.

use std::path::Path;

use anyhow::{Context, Result};
use emolex::qc::{OutlierMode, PipelineConfig};
use emolex::sim::{AnnotatorProfile, SimConfig};
use emolex::Framing;
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub pipeline: Option<PipelineConfig>,
    #[serde(default)]
    pub simulation: Option<SimSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub seed: Option<u64>,
    pub targets: Option<usize>,
    pub raters_per_hit: Option<usize>,
    pub framing: Option<Framing>,
    pub population: Vec<AnnotatorProfile>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Seed from the flag, else the simulation section, else the top level.
    pub fn seed(&self, flag: Option<u64>) -> Option<u64> {
        flag.or(self.simulation.as_ref().and_then(|s| s.seed)).or(self.seed)
    }
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct PipelineFlags {
    /// Expected raters per HIT
    #[arg(long)]
    pub raters_per_hit: Option<usize>,
    /// Wrong gate answers that mark a HIT's gate question as bad
    #[arg(long)]
    pub bad_question_min_wrong: Option<usize>,
    /// Minimum gate accuracy, as a fraction such as 2/3
    #[arg(long, value_parser = parse_ratio)]
    pub accuracy_threshold: Option<num_rational::Ratio<u32>>,
    /// Outlier cut in standard deviations
    #[arg(long)]
    pub outlier_sigma: Option<f64>,
    #[arg(long, value_parser = parse_outlier_mode)]
    pub outlier_mode: Option<OutlierMode>,
    /// Assignments a term needs to enter the master set
    #[arg(long)]
    pub min_valid: Option<usize>,
}

fn parse_ratio(s: &str) -> std::result::Result<num_rational::Ratio<u32>, String> {
    emolex::qc::ratio_str::parse(s)
}

fn parse_outlier_mode(s: &str) -> std::result::Result<OutlierMode, String> {
    match s {
        "single-pass" => Ok(OutlierMode::SinglePass),
        "until-stable" => Ok(OutlierMode::UntilStable),
        _ => Err(format!("expected single-pass or until-stable, got `{s}`")),
    }
}

impl PipelineFlags {
    pub fn resolve(&self, file: &FileConfig) -> PipelineConfig {
        let mut cfg = file.pipeline.clone().unwrap_or_default();
        if let Some(v) = self.raters_per_hit {
            cfg.raters_per_hit = v;
        }
        if let Some(v) = self.bad_question_min_wrong {
            cfg.bad_question_min_wrong = v;
        }
        if let Some(v) = self.accuracy_threshold {
            cfg.wordchoice_accuracy_threshold = v;
        }
        if let Some(v) = self.outlier_sigma {
            cfg.outlier_sigma = v;
        }
        if let Some(v) = self.outlier_mode {
            cfg.outlier_mode = v;
        }
        if let Some(v) = self.min_valid {
            cfg.min_valid_assignments = v;
        }
        cfg
    }
}

pub fn sim_config(section: &SimSection, seed: u64, targets: usize) -> SimConfig {
    SimConfig {
        seed,
        targets,
        raters_per_hit: section.raters_per_hit.unwrap_or(5),
        population: section.population.clone(),
    }
}
