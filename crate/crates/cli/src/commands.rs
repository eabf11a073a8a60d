//! `simulate`, `estimate` and `demix`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use pegi_core::cumulants::center;
use pegi_core::demix::{evaluate_demixer, pinv_demix, SinrReport};
use pegi_core::linalg::pinv_hermitian;
use pegi_core::pegi::RecoveryError;
use pegi_core::{build_c, draw_batch, match_columns, pegi_full, sample_cov, sinr_optimal_demix, EmpiricalOracle, FieldKind, MixingEstimate};

use crate::args::{out_dir, DemixArgs, DemixMode, EstimateArgs, RunArgs};
use crate::benchmark::{data_seed, trial_model};
use crate::config::{Overrides, RunConfig};
use crate::error::{CliError, CliResult};
use crate::matrix_csv::{read_matrix, read_matrix_as, write_matrix, AnyMatrix, CsvScalar};
use crate::model_io::{load_model_as, save_model, ModelField};

pub const SAMPLES_FILE: &str = "samples.csv";
pub const SOURCES_FILE: &str = "sources.csv";
pub const A_HAT_FILE: &str = "a_hat.csv";
pub const B_HAT_FILE: &str = "b_hat.csv";
pub const ESTIMATE_FILE: &str = "estimate.txt";
pub const DEMIXER_FILE: &str = "demixer.csv";
pub const DEMIXED_FILE: &str = "demixed.csv";
pub const SINR_REPORT_FILE: &str = "sinr_report.csv";

/// Built-in defaults, then `base`, then the config file, then flags.
pub fn resolve_run(args: &RunArgs, base: Overrides) -> CliResult<RunConfig> {
    let file = match &args.config {
        Some(path) => Overrides::from_file(path)?,
        None => Overrides::default(),
    };
    args.overrides().layer_over(file.layer_over(base)).resolve()
}

fn create_out(flag: Option<&PathBuf>) -> CliResult<PathBuf> {
    let dir = out_dir(flag);
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn simulate(args: &RunArgs) -> CliResult<()> {
    let base = Overrides {
        samples: Some(vec![10_000]),
        noise_powers: Some(vec![0.1]),
        ..Overrides::default()
    };
    let cfg = resolve_run(args, base)?;
    if cfg.samples.len() != 1 || cfg.noise_powers.len() != 1 {
        return Err(CliError::Usage("simulate takes a single sample size and noise power".into()));
    }
    let out = create_out(cfg.out.as_ref())?;
    match cfg.field {
        FieldKind::Real => simulate_typed::<f64>(&cfg, &out),
        FieldKind::Complex => simulate_typed::<nalgebra::Complex<f64>>(&cfg, &out),
    }?;
    println!("seed = {}", cfg.seed);
    println!("wrote model and {} samples to {}", cfg.samples[0], out.display());
    Ok(())
}

/// The model and batch of benchmark trial 0 at the configured (N, p).
fn simulate_typed<T: CsvScalar>(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let model = trial_model::<T>(cfg, 0, cfg.noise_powers[0])?;
    let batch = draw_batch(&model, cfg.samples[0], data_seed(cfg.seed, 0, 0, 0))?;
    save_model(out, &model, cfg.seed)?;
    write_matrix(&out.join(SAMPLES_FILE), &batch.x)?;
    write_matrix(&out.join(SOURCES_FILE), &batch.s)
}

pub fn estimate(args: &EstimateArgs) -> CliResult<()> {
    if args.m == 0 {
        return Err(CliError::Usage("--m must be at least 1".into()));
    }
    let x = read_matrix(&args.input)?;
    let out = create_out(args.out.as_ref())?;
    match x {
        AnyMatrix::Real(x) => estimate_typed(x, args, &out),
        AnyMatrix::Complex(x) => estimate_typed(x, args, &out),
    }
}

fn estimate_typed<T: CsvScalar + ModelField>(x: DMatrix<T>, args: &EstimateArgs, out: &Path) -> CliResult<()> {
    let n = x.ncols();
    if args.m > n {
        return Err(CliError::Usage(format!("--m {} exceeds the data dimension {n}", args.m)));
    }
    let cfg = args.iteration.apply(pegi_core::IterationConfig::empirical(args.seed));
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let oracle = EmpiricalOracle::new(center(x)?)?;
    let metric = build_c(&oracle)?;
    match pegi_full(&metric, &oracle, args.m, &cfg) {
        Ok(est) => {
            let angle = match &args.model {
                Some(dir) => Some(match_columns(&est.a_hat, load_model_as::<T>(dir)?.mixing())?.max_angle_deg()),
                None => None,
            };
            write_estimate(out, &est, args.m, args.seed, angle)?;
            println!("recovered {} of {} columns", est.columns_found, args.m);
            if let Some(angle) = angle {
                println!("max_angle_deg = {angle:?}");
            }
            Ok(())
        }
        Err(RecoveryError::Partial {
            estimate,
            requested,
            cause,
        }) => {
            write_estimate(out, &estimate, requested, args.seed, None)?;
            Err(CliError::Partial {
                found: estimate.columns_found,
                requested,
                reason: cause.to_string(),
            })
        }
        Err(RecoveryError::Failed(e)) => Err(e.into()),
    }
}

/// Writes the found columns of `a_hat` and the matching rows of `b_hat`.
fn write_estimate<T: CsvScalar>(
    out: &Path,
    est: &MixingEstimate<T>,
    requested: usize,
    seed: u64,
    angle: Option<f64>,
) -> CliResult<()> {
    let k = est.columns_found;
    let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    let mut meta = format!(
        "field = {}\ncolumns_found = {k}\nrequested = {requested}\nseed = {seed}\niterations = {}\nstarts = {}\n",
        T::FIELD,
        list(&est.iterations),
        list(&est.starts),
    );
    if let Some(angle) = angle {
        writeln!(meta, "max_angle_deg = {angle:?}").unwrap();
    }
    write_text(&out.join(ESTIMATE_FILE), &meta)?;
    if k == 0 {
        // Nothing to write; a 0-column matrix file would not parse back.
        for name in [A_HAT_FILE, B_HAT_FILE] {
            let path = out.join(name);
            if path.exists() {
                fs::remove_file(&path).map_err(|e| CliError::io(&path, e))?;
            }
        }
        return Ok(());
    }
    write_matrix(&out.join(A_HAT_FILE), &est.a_hat.columns(0, k).into_owned())?;
    write_matrix(&out.join(B_HAT_FILE), &est.b_hat.rows(0, k).into_owned())
}

pub fn demix(args: &DemixArgs) -> CliResult<()> {
    let x = read_matrix(&args.input)?;
    let out = create_out(args.out.as_ref())?;
    match x {
        AnyMatrix::Real(x) => demix_typed(x, args, &out),
        AnyMatrix::Complex(x) => demix_typed(x, args, &out),
    }
}

fn estimate_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(A_HAT_FILE)
    } else {
        path.to_path_buf()
    }
}

fn demix_typed<T: CsvScalar + ModelField>(x: DMatrix<T>, args: &DemixArgs, out: &Path) -> CliResult<()> {
    let a_hat = read_matrix_as::<T>(&estimate_path(&args.estimate))?;
    if a_hat.nrows() != x.ncols() {
        return Err(CliError::Usage(format!(
            "estimate has {} rows but the samples have {} columns",
            a_hat.nrows(),
            x.ncols()
        )));
    }
    let samples = center(x)?;
    let b = match args.mode {
        DemixMode::SinrOpt => {
            let cov = sample_cov(&samples)?;
            let (_, rank) = pinv_hermitian(&cov);
            if rank < cov.nrows() {
                eprintln!(
                    "warning: sample covariance is singular (rank {rank} of {}); using its pseudoinverse",
                    cov.nrows()
                );
            }
            sinr_optimal_demix(&a_hat, &cov)?
        }
        DemixMode::Pinv => pinv_demix(&a_hat)?,
    };
    let s_hat = b.apply(samples.data())?;
    write_matrix(&out.join(DEMIXER_FILE), b.matrix())?;
    write_matrix(&out.join(DEMIXED_FILE), &s_hat)?;
    if let Some(dir) = &args.model {
        let model = load_model_as::<T>(dir)?;
        let report = evaluate_demixer(&b, Some(&a_hat), &model)?;
        write_text(&out.join(SINR_REPORT_FILE), &format_sinr_report(&report))?;
        println!("mean_sinr_db = {:?}", report.mean_sinr_db);
        println!("mean_sinr_loss_db = {:?}", report.mean_sinr_loss_db);
    }
    Ok(())
}

pub const SINR_REPORT_HEADER: &str = "source,demixer_row,phase,sinr,sinr_db,optimal_sinr,sinr_loss_db";

/// One row per true source, then a `mean` row. Infinite SINR is written `inf`.
pub fn format_sinr_report<T: CsvScalar>(report: &SinrReport<T>) -> String {
    let mut row_of = vec![0; report.permutation.len()];
    for (j, &k) in report.permutation.iter().enumerate() {
        row_of[k] = j;
    }
    let mut out = format!("{SINR_REPORT_HEADER}\n");
    for (k, &j) in row_of.iter().enumerate() {
        writeln!(
            out,
            "{k},{j},{},{:?},{:?},{:?},{:?}",
            report.phases[j].format_cell(),
            report.per_source_sinr[k],
            report.per_source_sinr_db[k],
            report.optimal_sinr[k],
            report.sinr_loss_db[k],
        )
        .unwrap();
    }
    writeln!(out, "mean,,,,{:?},,{:?}", report.mean_sinr_db, report.mean_sinr_loss_db).unwrap();
    out
}
