//! Ground-truth models on disk: a directory holding `model.txt`
//! (`key = value` metadata), `mixing.csv` and `noise_cov.csv`.

use std::fs;
use std::path::Path;

use nalgebra::Complex;
use pegi_core::simulate::{GroundTruthModel, SourceSpec};
use pegi_core::FieldKind;

use crate::error::{CliError, CliResult};
use crate::matrix_csv::{read_matrix_as, write_matrix, CsvScalar};

pub const MODEL_FILE: &str = "model.txt";
pub const MIXING_FILE: &str = "mixing.csv";
pub const NOISE_FILE: &str = "noise_cov.csv";

#[derive(Debug, Clone, PartialEq)]
pub enum AnyModel {
    Real(GroundTruthModel<f64>),
    Complex(GroundTruthModel<Complex<f64>>),
}

pub fn save_model<T: CsvScalar>(dir: &Path, model: &GroundTruthModel<T>, seed: u64) -> CliResult<()> {
    let sources: Vec<String> = model.sources().iter().map(|s| s.to_string()).collect();
    let meta = format!(
        "field = {}\nn = {}\nm = {}\nnoise_power = {:?}\nsources = {}\nseed = {seed}\n",
        T::FIELD,
        model.dim(),
        model.n_sources(),
        model.noise_power(),
        sources.join(","),
    );
    let path = dir.join(MODEL_FILE);
    fs::write(&path, meta).map_err(|e| CliError::io(&path, e))?;
    write_matrix(&dir.join(MIXING_FILE), model.mixing())?;
    write_matrix(&dir.join(NOISE_FILE), model.noise_cov())
}

struct Meta {
    field: FieldKind,
    noise_power: f64,
    sources: Vec<SourceSpec>,
}

fn read_meta(path: &Path) -> CliResult<Meta> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let label = path.display().to_string();
    let (mut field, mut noise_power, mut sources) = (None, None, None);
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |message: String| CliError::ParseAt {
            path: label.clone(),
            line: idx as u64 + 1,
            column: 1,
            message,
        };
        let (key, value) = line.split_once('=').ok_or_else(|| at(format!("expected key = value, got {line:?}")))?;
        let value = value.trim();
        match key.trim() {
            "field" => field = Some(value.parse::<FieldKind>().map_err(|e| at(e.to_string()))?),
            "noise_power" => noise_power = Some(value.parse::<f64>().map_err(|e| at(e.to_string()))?),
            "sources" => {
                sources = Some(
                    value
                        .split(',')
                        .map(|s| s.parse::<SourceSpec>().map_err(|e| at(e.to_string())))
                        .collect::<CliResult<Vec<_>>>()?,
                )
            }
            _ => {}
        }
    }
    let missing = |key: &str| CliError::Parse {
        path: label.clone(),
        message: format!("missing key {key}"),
    };
    Ok(Meta {
        field: field.ok_or_else(|| missing("field"))?,
        noise_power: noise_power.ok_or_else(|| missing("noise_power"))?,
        sources: sources.ok_or_else(|| missing("sources"))?,
    })
}

fn load_typed<T: CsvScalar>(dir: &Path, meta: Meta) -> CliResult<GroundTruthModel<T>> {
    let a = read_matrix_as::<T>(&dir.join(MIXING_FILE))?;
    let sigma = read_matrix_as::<T>(&dir.join(NOISE_FILE))?;
    Ok(GroundTruthModel::new(a, meta.sources, sigma, meta.noise_power)?)
}

pub fn load_model(dir: &Path) -> CliResult<AnyModel> {
    let meta = read_meta(&dir.join(MODEL_FILE))?;
    match meta.field {
        FieldKind::Real => Ok(AnyModel::Real(load_typed(dir, meta)?)),
        FieldKind::Complex => Ok(AnyModel::Complex(load_typed(dir, meta)?)),
    }
}

/// Loads a model that must be over `T`'s field.
pub fn load_model_as<T: CsvScalar + ModelField>(dir: &Path) -> CliResult<GroundTruthModel<T>> {
    T::from_any(load_model(dir)?).ok_or_else(|| CliError::Usage(format!("model in {} is not {}", dir.display(), T::FIELD)))
}

/// Access to the typed model inside [`AnyModel`].
pub trait ModelField: Sized + pegi_core::Scalar {
    fn from_any(model: AnyModel) -> Option<GroundTruthModel<Self>>;
}

impl ModelField for f64 {
    fn from_any(model: AnyModel) -> Option<GroundTruthModel<Self>> {
        match model {
            AnyModel::Real(m) => Some(m),
            AnyModel::Complex(_) => None,
        }
    }
}

impl ModelField for Complex<f64> {
    fn from_any(model: AnyModel) -> Option<GroundTruthModel<Self>> {
        match model {
            AnyModel::Complex(m) => Some(m),
            AnyModel::Real(_) => None,
        }
    }
}
