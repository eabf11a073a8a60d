//! Seeded Monte-Carlo sweep over sample sizes, noise powers and trials.
//!
//! Seeds: the mixing matrix of trial `t` comes from
//! `derive_seed(master, [t, MODEL])` and is shared by every (N, p) cell, so
//! the sweep compares algorithms and sample sizes on the same matrices. The
//! batch and the PEGI starts of cell `(i, j)` use
//! `derive_seed(master, [t, i, j, DATA | PEGI])`.

use std::fmt::Write as _;
use std::time::Instant;

use nalgebra::DMatrix;
use pegi_core::cumulants::center;
use pegi_core::demix::{evaluate_demixer, pinv_demix, DemixMatrix};
use pegi_core::pegi::RecoveryError;
use pegi_core::simulate::{derive_seed, noise_cov, random_mixing};
use pegi_core::{build_c, draw_batch, match_columns, pegi_full, sample_cov, sinr_optimal_demix, EmpiricalOracle, FieldKind, GroundTruthModel, Scalar};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Algorithm, RunConfig};
use crate::error::{CliError, CliResult};

const PURPOSE_MODEL: u64 = 0;
const PURPOSE_DATA: u64 = 1;
const PURPOSE_PEGI: u64 = 2;

pub const BENCHMARK_FILE: &str = "benchmark.csv";
pub const HEADER: &str =
    "algorithm,N,p,trial,seed,status,mean_sinr_db,mean_sinr_loss_db,max_column_angle_deg,runtime_ms,row_type";

pub fn model_seed(master: u64, trial: usize) -> u64 {
    derive_seed(master, &[trial as u64, PURPOSE_MODEL])
}

pub fn data_seed(master: u64, trial: usize, n_idx: usize, p_idx: usize) -> u64 {
    derive_seed(master, &[trial as u64, n_idx as u64, p_idx as u64, PURPOSE_DATA])
}

pub fn pegi_seed(master: u64, trial: usize, n_idx: usize, p_idx: usize) -> u64 {
    derive_seed(master, &[trial as u64, n_idx as u64, p_idx as u64, PURPOSE_PEGI])
}

/// Ground truth of trial `trial` at noise power `p`.
pub fn trial_model<T: Scalar>(cfg: &RunConfig, trial: usize, p: f64) -> CliResult<GroundTruthModel<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(model_seed(cfg.seed, trial));
    let a = random_mixing::<T, _>(cfg.n, cfg.m, cfg.cond, &mut rng)?;
    let sigma = noise_cov(&a, p)?;
    Ok(GroundTruthModel::new(a, cfg.panel.sources(cfg.m)?, sigma, p)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowType {
    Trial,
    Aggregate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub algorithm: Algorithm,
    pub samples: usize,
    pub noise_power: f64,
    /// `None` on aggregate rows.
    pub trial: Option<usize>,
    pub seed: u64,
    /// `ok`, `partial`, `failed` or `error` on trial rows; `<ok>/<total>` on
    /// aggregate rows.
    pub status: String,
    pub mean_sinr_db: Option<f64>,
    pub mean_sinr_loss_db: Option<f64>,
    pub max_column_angle_deg: Option<f64>,
    pub runtime_ms: Option<f64>,
    pub row_type: RowType,
}

impl BenchmarkRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, Default)]
struct Outcome {
    status: &'static str,
    mean_sinr_db: Option<f64>,
    mean_sinr_loss_db: Option<f64>,
    angle: Option<f64>,
    runtime_ms: Option<f64>,
}

impl Outcome {
    fn status(status: &'static str) -> Self {
        Outcome {
            status,
            ..Outcome::default()
        }
    }
}

/// Runs the sweep. Rows come out in (algorithm, N, p, trial) order with the
/// aggregate of each (algorithm, N, p) group after its trials.
pub fn run_benchmark(cfg: &RunConfig) -> CliResult<Vec<BenchmarkRow>> {
    cfg.validate()?;
    match cfg.field {
        FieldKind::Real => run_typed::<f64>(cfg),
        FieldKind::Complex => run_typed::<nalgebra::Complex<f64>>(cfg),
    }
}

fn run_typed<T: Scalar>(cfg: &RunConfig) -> CliResult<Vec<BenchmarkRow>> {
    // Configuration problems (e.g. a condition number too large for the
    // noise model) surface once here instead of as failed trials.
    for &p in &cfg.noise_powers {
        trial_model::<T>(cfg, 0, p)?;
    }
    let cells: Vec<(usize, usize, usize)> = (0..cfg.samples.len())
        .flat_map(|i| (0..cfg.noise_powers.len()).flat_map(move |j| (0..cfg.trials).map(move |t| (i, j, t))))
        .collect();
    let outcomes: Vec<Vec<Outcome>> = cells
        .par_iter()
        .map(|&(i, j, t)| run_cell::<T>(cfg, i, j, t))
        .collect();

    let mut rows = Vec::with_capacity(cfg.algorithms.len() * (cells.len() + cfg.samples.len() * cfg.noise_powers.len()));
    for (a, &algorithm) in cfg.algorithms.iter().enumerate() {
        for (i, &samples) in cfg.samples.iter().enumerate() {
            for (j, &noise_power) in cfg.noise_powers.iter().enumerate() {
                let group: Vec<BenchmarkRow> = (0..cfg.trials)
                    .map(|t| {
                        let o = &outcomes[(i * cfg.noise_powers.len() + j) * cfg.trials + t][a];
                        BenchmarkRow {
                            algorithm,
                            samples,
                            noise_power,
                            trial: Some(t),
                            seed: data_seed(cfg.seed, t, i, j),
                            status: o.status.to_string(),
                            mean_sinr_db: o.mean_sinr_db,
                            mean_sinr_loss_db: o.mean_sinr_loss_db,
                            max_column_angle_deg: o.angle,
                            runtime_ms: o.runtime_ms,
                            row_type: RowType::Trial,
                        }
                    })
                    .collect();
                let aggregate = aggregate(&group, cfg.seed);
                rows.extend(group);
                rows.push(aggregate);
            }
        }
    }
    Ok(rows)
}

/// Means over the successful trials of one group.
fn aggregate(group: &[BenchmarkRow], master: u64) -> BenchmarkRow {
    let ok: Vec<&BenchmarkRow> = group.iter().filter(|r| r.is_ok()).collect();
    let mean = |f: fn(&BenchmarkRow) -> Option<f64>| -> Option<f64> {
        let vals: Option<Vec<f64>> = ok.iter().map(|r| f(r)).collect();
        vals.filter(|v| !v.is_empty()).map(|v| v.iter().sum::<f64>() / v.len() as f64)
    };
    BenchmarkRow {
        algorithm: group[0].algorithm,
        samples: group[0].samples,
        noise_power: group[0].noise_power,
        trial: None,
        seed: master,
        status: format!("{}/{}", ok.len(), group.len()),
        mean_sinr_db: mean(|r| r.mean_sinr_db),
        mean_sinr_loss_db: mean(|r| r.mean_sinr_loss_db),
        max_column_angle_deg: mean(|r| r.max_column_angle_deg),
        runtime_ms: mean(|r| r.runtime_ms),
        row_type: RowType::Aggregate,
    }
}

struct PegiRun<T: Scalar> {
    a_hat: DMatrix<T>,
    cov_x: DMatrix<T>,
    angle: f64,
    ms: f64,
}

/// Every configured algorithm on one (N, p, trial) cell, in config order.
fn run_cell<T: Scalar>(cfg: &RunConfig, i: usize, j: usize, t: usize) -> Vec<Outcome> {
    let p = cfg.noise_powers[j];
    let model = match trial_model::<T>(cfg, t, p) {
        Ok(m) => m,
        Err(_) => return vec![Outcome::status("error"); cfg.algorithms.len()],
    };
    let pegi = cfg
        .algorithms
        .iter()
        .any(|a| a.uses_estimate())
        .then(|| run_pegi(cfg, &model, i, j, t));
    cfg.algorithms
        .iter()
        .map(|&alg| {
            let started = Instant::now();
            let (demixer, a_hat, angle, extra_ms) = match (alg, &pegi) {
                (Algorithm::PegiSinr | Algorithm::PegiPinv, Some(Err(status))) => return Outcome::status(status),
                (Algorithm::PegiSinr, Some(Ok(run))) => {
                    (sinr_optimal_demix(&run.a_hat, &run.cov_x), Some(&run.a_hat), Some(run.angle), run.ms)
                }
                (Algorithm::PegiPinv, Some(Ok(run))) => (pinv_demix(&run.a_hat), Some(&run.a_hat), Some(run.angle), run.ms),
                (Algorithm::OracleAinv, _) => (pinv_demix(model.mixing()), None, None, 0.0),
                (Algorithm::OracleSinrOpt, _) => {
                    (sinr_optimal_demix(model.mixing(), &model.covariance()), None, None, 0.0)
                }
                (_, None) => unreachable!("estimate-based algorithms always get a PEGI run"),
            };
            score(demixer, a_hat, &model).map_or_else(
                |_| Outcome::status("error"),
                |(sinr, loss)| Outcome {
                    status: "ok",
                    mean_sinr_db: Some(sinr),
                    mean_sinr_loss_db: Some(loss),
                    angle,
                    runtime_ms: cfg
                        .timing
                        .then(|| extra_ms + started.elapsed().as_secs_f64() * 1e3),
                },
            )
        })
        .collect()
}

fn score<T: Scalar>(
    demixer: pegi_core::Result<DemixMatrix<T>>,
    a_hat: Option<&DMatrix<T>>,
    model: &GroundTruthModel<T>,
) -> pegi_core::Result<(f64, f64)> {
    let report = evaluate_demixer(&demixer?, a_hat, model)?;
    Ok((report.mean_sinr_db, report.mean_sinr_loss_db))
}

fn run_pegi<T: Scalar>(
    cfg: &RunConfig,
    model: &GroundTruthModel<T>,
    i: usize,
    j: usize,
    t: usize,
) -> Result<PegiRun<T>, &'static str> {
    let started = Instant::now();
    let batch = draw_batch(model, cfg.samples[i], data_seed(cfg.seed, t, i, j)).map_err(|_| "error")?;
    let samples = center(batch.x).map_err(|_| "error")?;
    let cov_x = sample_cov(&samples).map_err(|_| "error")?;
    let oracle = EmpiricalOracle::new(samples).map_err(|_| "error")?;
    let metric = build_c(&oracle).map_err(|_| "failed")?;
    let est = match pegi_full(&metric, &oracle, cfg.m, &cfg.iteration(pegi_seed(cfg.seed, t, i, j))) {
        Ok(est) => est,
        Err(RecoveryError::Partial { .. }) => return Err("partial"),
        Err(RecoveryError::Failed(_)) => return Err("failed"),
    };
    let ms = started.elapsed().as_secs_f64() * 1e3;
    let angle = match_columns(&est.a_hat, model.mixing())
        .map_err(|_| "error")?
        .max_angle_deg();
    Ok(PegiRun {
        a_hat: est.a_hat,
        cov_x,
        angle,
        ms,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "na".to_string(), |x| format!("{x:?}"))
}

pub fn format_rows(rows: &[BenchmarkRow]) -> String {
    let mut out = format!("{HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{:?},{},{},{},{},{},{},{},{}",
            r.algorithm,
            r.samples,
            r.noise_power,
            r.trial.map_or_else(|| "mean".to_string(), |t| t.to_string()),
            r.seed,
            r.status,
            cell(r.mean_sinr_db),
            cell(r.mean_sinr_loss_db),
            cell(r.max_column_angle_deg),
            cell(r.runtime_ms),
            match r.row_type {
                RowType::Trial => "trial",
                RowType::Aggregate => "aggregate",
            },
        )
        .unwrap();
    }
    out
}

/// Parses a benchmark CSV written by [`format_rows`].
pub fn parse_rows(text: &str, label: &str) -> CliResult<Vec<BenchmarkRow>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CliError::Parse {
            path: label.into(),
            message: e.to_string(),
        })?
        .clone();
    if headers.iter().collect::<Vec<_>>().join(",") != HEADER {
        return Err(CliError::ParseAt {
            path: label.into(),
            line: 1,
            column: 1,
            message: format!("expected header {HEADER}"),
        });
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Parse {
            path: label.into(),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let at = |column: usize, message: String| CliError::ParseAt {
            path: label.into(),
            line,
            column,
            message,
        };
        let field = |c: usize| -> &str { rec.get(c).unwrap_or("") };
        let opt = |c: usize| -> CliResult<Option<f64>> {
            match field(c) {
                "na" => Ok(None),
                s => s.parse().map(Some).map_err(|_| at(c + 1, format!("invalid number {s:?}"))),
            }
        };
        let row_type = match field(10) {
            "trial" => RowType::Trial,
            "aggregate" => RowType::Aggregate,
            other => return Err(at(11, format!("unknown row type {other:?}"))),
        };
        rows.push(BenchmarkRow {
            algorithm: field(0).parse().map_err(|e| at(1, e))?,
            samples: field(1).parse().map_err(|_| at(2, "invalid sample size".into()))?,
            noise_power: field(2).parse().map_err(|_| at(3, "invalid noise power".into()))?,
            trial: match field(3) {
                "mean" => None,
                s => Some(s.parse().map_err(|_| at(4, format!("invalid trial {s:?}")))?),
            },
            seed: field(4).parse().map_err(|_| at(5, "invalid seed".into()))?,
            status: field(5).to_string(),
            mean_sinr_db: opt(6)?,
            mean_sinr_loss_db: opt(7)?,
            max_column_angle_deg: opt(8)?,
            runtime_ms: opt(9)?,
            row_type,
        });
    }
    Ok(rows)
}
