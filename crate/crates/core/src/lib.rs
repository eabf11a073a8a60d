//! Blind source separation of noisy linear mixtures by fourth-cumulant
//! gradient iteration in a pseudo-Euclidean space.

pub mod cumulants;
pub mod demix;
pub mod error;
pub mod linalg;
pub mod pegi;
pub mod scalar;
pub mod simulate;

pub use cumulants::{build_c, AnalyticOracle, CumulantOracle, EmpiricalOracle, PseudoMetric, SampleSet};
pub use error::{Error, Result};
pub use pegi::{pegi_full, IterationConfig, MixingEstimate, RecoveryError};
pub use scalar::{FieldKind, Scalar};
pub use demix::{match_columns, sample_cov, sinr_optimal_demix, ColumnMatch, DemixMatrix, Provenance, SinrReport};
pub use simulate::{draw_batch, DrawBatch, GroundTruthModel, SourceSpec};
