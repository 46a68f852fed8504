//! Building a word–emotion association lexicon from crowdsourced judgments.
//!
//! The pipeline runs: thesaurus and target selection, HIT generation,
//! assignment ingestion, quality control, majority aggregation, agreement
//! statistics and report tables. A seeded annotator simulator produces
//! assignment files with known ground truth.

pub mod aggregate;
pub mod agreement;
pub mod domain;
pub mod error;
pub mod hits;
pub mod ingest;
pub mod qc;
pub mod report;
pub mod scalar;
pub mod seed;
pub mod sim;
pub mod targets;
pub mod thesaurus;

pub use error::{Error, Result};

pub use aggregate::{aggregate_term, build_lexicon, majority_binary, majority_intensity, LexiconEntry, MajorityResult};
pub use agreement::{cohen_kappa, fleiss_kappa, interpret_kappa, scott_pi, AgreementBand, RatingMatrix};
pub use domain::{Bin, Emotion, Facet, Framing, IntensityLevel, PolarityAxis, Pos, SenseKey, SourceTag};
pub use hits::Hit;
pub use ingest::Assignment;
pub use qc::{run_pipeline, AuditReport, MasterSet, PipelineConfig};
pub use scalar::Scalar;

/// κ computed in double precision.
pub type KappaResult = agreement::Kappa<f64>;
/// κ computed in single precision.
pub type KappaResultF32 = agreement::Kappa<f32>;
pub type KappaTable = agreement::KappaTable<f64>;
pub type OutlierScan = qc::OutlierScan<f64>;
