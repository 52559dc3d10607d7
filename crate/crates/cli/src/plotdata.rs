//! Tidy per-figure data series, emitted from saved run records.

use std::collections::BTreeSet;

use crate::error::{CliError, Result};
use crate::pipeline::{fmt_f64, RunRecord};

pub const PLOT_HEADER: &str = "series,x,y";

/// Emit one figure's data as `series,x,y` CSV.
///
/// - `fig4`: raw-sample cardinality versus references — per-N target K,
///   all-ones weight N, random-start weight ⌊N/2⌋, then per-sparsifier mean
///   raw weight and pre-projection feasibility.
/// - `fig5`: regret versus retained edges per sparsifier.
/// - `fig6`: ablation regret per method versus N (mean projection energy for
///   the random baseline), averaged over slates.
pub fn emit_plot_data(records: &[RunRecord], figure: &str) -> Result<String> {
    let mut out = String::from(PLOT_HEADER);
    out.push('\n');
    match figure {
        "fig4" => {
            let sizes: BTreeSet<usize> = records
                .iter()
                .flat_map(|r| r.scaling_rows.iter().map(|row| row.n))
                .collect();
            for &n in &sizes {
                for r in records {
                    if let Some(row) = r.scaling_rows.iter().find(|row| row.n == n) {
                        out.push_str(&format!("target_k,{n},{}\n", row.k));
                        out.push_str(&format!("all_ones_weight,{n},{n}\n"));
                        out.push_str(&format!("random_start_weight,{n},{}\n", n / 2));
                        break;
                    }
                }
            }
            for r in records {
                for row in &r.scaling_rows {
                    out.push_str(&format!(
                        "mean_weight:{},{},{}\n",
                        row.sparsifier,
                        row.n,
                        fmt_f64(row.mean_weight)
                    ));
                    out.push_str(&format!(
                        "prefeas:{},{},{}\n",
                        row.sparsifier,
                        row.n,
                        fmt_f64(row.prefeas_rate)
                    ));
                }
            }
        }
        "fig5" => {
            for r in records {
                for row in &r.scaling_rows {
                    out.push_str(&format!(
                        "{},{},{}\n",
                        row.sparsifier,
                        row.edges_used,
                        fmt_f64(row.regret_best)
                    ));
                }
            }
        }
        "fig6" => {
            // (method, qubo, n) -> mean regret over slates
            let mut keys: Vec<(String, String, usize)> = Vec::new();
            let mut sums: std::collections::HashMap<(String, String, usize), (f64, usize)> =
                std::collections::HashMap::new();
            for r in records {
                for row in &r.ablation_rows {
                    let key = (row.method.clone(), row.qubo.clone(), row.n);
                    let value = if row.method == "random_proj" {
                        row.regret_mean
                    } else {
                        row.regret
                    };
                    let e = sums.entry(key.clone()).or_insert((0.0, 0));
                    e.0 += value;
                    e.1 += 1;
                    if !keys.contains(&key) {
                        keys.push(key);
                    }
                }
            }
            for key in keys {
                let (sum, count) = sums[&key];
                out.push_str(&format!(
                    "{}:{},{},{}\n",
                    key.0,
                    key.1,
                    key.2,
                    fmt_f64(sum / count as f64)
                ));
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown figure id '{other}' (expected fig4|fig5|fig6)"
            )))
        }
    }
    Ok(out)
}
