//! Per-(N, p) tables from a benchmark CSV, one column per algorithm.

use std::fmt::Write as _;

use crate::args::ReportMetric;
use crate::benchmark::{BenchmarkRow, RowType};
use crate::config::Algorithm;

/// Aggregate rows pivoted to `N,p,<algorithm>...`; cells without a value
/// are `na`. Rows and columns keep their order of first appearance.
pub fn format_report(rows: &[BenchmarkRow], metric: ReportMetric) -> String {
    let aggregates: Vec<&BenchmarkRow> = rows.iter().filter(|r| r.row_type == RowType::Aggregate).collect();
    let mut algorithms: Vec<Algorithm> = Vec::new();
    let mut keys: Vec<(usize, u64)> = Vec::new();
    for r in &aggregates {
        if !algorithms.contains(&r.algorithm) {
            algorithms.push(r.algorithm);
        }
        let key = (r.samples, r.noise_power.to_bits());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut out = String::from("N,p");
    for a in &algorithms {
        write!(out, ",{a}").unwrap();
    }
    out.push('\n');
    for &(n, p_bits) in &keys {
        write!(out, "{n},{:?}", f64::from_bits(p_bits)).unwrap();
        for &a in &algorithms {
            let value = aggregates
                .iter()
                .find(|r| r.algorithm == a && r.samples == n && r.noise_power.to_bits() == p_bits)
                .and_then(|r| match metric {
                    ReportMetric::Loss => r.mean_sinr_loss_db,
                    ReportMetric::Sinr => r.mean_sinr_db,
                    ReportMetric::Angle => r.max_column_angle_deg,
                });
            match value {
                Some(v) => write!(out, ",{v:?}").unwrap(),
                None => out.push_str(",na"),
            }
        }
        out.push('\n');
    }
    out
}
