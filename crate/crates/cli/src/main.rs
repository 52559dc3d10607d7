use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use folio_cli::ablation::ablation_table;
use folio_cli::backtest::{backtest, backtest_csv};
use folio_cli::config::PipelineConfig;
use folio_cli::error::{CliError, Result};
use folio_cli::pipeline::{run_pipeline, scaling_csv, RunRecord};
use folio_cli::plotdata::emit_plot_data;
use folio_cli::synth::{synth_equity_panel, synth_match_records, write_ff49_csv, write_football_csv};
use folio_cli::with_threads;

#[derive(Parser)]
#[command(
    name = "folio",
    version,
    about = "Cardinality-constrained portfolio QUBO harness"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Run configuration file (sectioned key = value).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Single seed overriding the config seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (0 = library default; results are identical).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print progress notes to stderr.
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the full grid and persist the run record.
    Pipeline,
    /// Run the grid and emit the scaling CSV.
    Scaling,
    /// Sampler-versus-projector ablation on betting slates.
    Ablation,
    /// Rolling out-of-sample evaluation.
    Backtest,
    /// Emit a figure's data series from saved run records.
    Plotdata {
        /// Run-record JSON files from previous runs.
        #[arg(long, required = true)]
        records: Vec<PathBuf>,
        /// Figure id: fig4 | fig5 | fig6.
        #[arg(long)]
        figure: String,
    },
    /// Write synthetic dataset fixtures in the external file layouts.
    Synth,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required for this subcommand".into()))?;
    let mut cfg = PipelineConfig::from_file(path)?;
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    Ok(cfg)
}

fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_record(dir: &Path, record: &RunRecord) -> Result<()> {
    let json = serde_json::to_string_pretty(record)
        .map_err(|e| CliError::Data(format!("record serialization: {e}")))?;
    write_file(&dir.join("run_record.json"), &json)
}

fn run(cli: Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Pipeline => {
            let cfg = load_config(&cli)?;
            ensure_out_dir(&cfg.out_dir)?;
            let record = with_threads(cfg.threads, || run_pipeline(&cfg))?;
            write_record(&cfg.out_dir, &record)?;
            print_scaling_summary(&record, cli.verbose);
            Ok(())
        }
        Cmd::Scaling => {
            let cfg = load_config(&cli)?;
            ensure_out_dir(&cfg.out_dir)?;
            let record = with_threads(cfg.threads, || run_pipeline(&cfg))?;
            write_file(&cfg.out_dir.join("scaling.csv"), &scaling_csv(&record.scaling_rows))?;
            write_record(&cfg.out_dir, &record)?;
            print_scaling_summary(&record, cli.verbose);
            Ok(())
        }
        Cmd::Ablation => {
            let cfg = load_config(&cli)?;
            ensure_out_dir(&cfg.out_dir)?;
            let (csv, rows) = with_threads(cfg.threads, || ablation_table(&cfg))?;
            write_file(&cfg.out_dir.join("ablation.csv"), &csv)?;
            let mut record = RunRecord::new(&cfg);
            record.ablation_rows = rows;
            write_record(&cfg.out_dir, &record)?;
            print_ablation_summary(&record);
            Ok(())
        }
        Cmd::Backtest => {
            let cfg = load_config(&cli)?;
            ensure_out_dir(&cfg.out_dir)?;
            let out = with_threads(cfg.threads, || backtest(&cfg))?;
            write_file(&cfg.out_dir.join("backtest.csv"), &backtest_csv(&out))?;
            let json = serde_json::to_string_pretty(&out)
                .map_err(|e| CliError::Data(format!("backtest serialization: {e}")))?;
            write_file(&cfg.out_dir.join("backtest.json"), &json)?;
            println!(
                "backtest ({} windows, method {}): overall sharpe {:?} roi {:?}",
                out.rows.len(),
                out.method,
                out.overall.sharpe,
                out.overall.roi
            );
            Ok(())
        }
        Cmd::Plotdata { records, figure } => {
            let mut loaded = Vec::new();
            for p in records {
                let text = std::fs::read_to_string(p).map_err(|source| CliError::Io {
                    path: p.display().to_string(),
                    source,
                })?;
                let rec: RunRecord = serde_json::from_str(&text)
                    .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
                loaded.push(rec);
            }
            let csv = emit_plot_data(&loaded, figure)?;
            let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            ensure_out_dir(&out_dir)?;
            let path = out_dir.join(format!("{figure}.csv"));
            write_file(&path, &csv)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Cmd::Synth => {
            let cfg = load_config(&cli)?;
            ensure_out_dir(&cfg.out_dir)?;
            match cfg.case {
                folio_core::InstanceKind::Equity => {
                    let panel = synth_equity_panel(&cfg.synth)?;
                    let path = cfg.out_dir.join("ff49_synth.csv");
                    write_ff49_csv(&panel, &path)?;
                    println!(
                        "wrote {} ({} days x {} assets)",
                        path.display(),
                        panel.days(),
                        panel.n_assets()
                    );
                }
                folio_core::InstanceKind::Betting => {
                    let records = synth_match_records(&cfg.synth)?;
                    let path = cfg.out_dir.join("football_synth.csv");
                    write_football_csv(&records, &path)?;
                    println!("wrote {} ({} matches)", path.display(), records.len());
                }
            }
            Ok(())
        }
    }
}

fn print_scaling_summary(record: &RunRecord, verbose: bool) {
    println!(
        "{:<8} {:>3} {:>3} {:<22} {:>6} {:>6} {:>9} {:>8} {:>10} {:>10} {:>9}",
        "case", "n", "k", "sparsifier", "edges", "used", "prefeas", "weight", "regretB", "regretM", "ref"
    );
    for r in &record.scaling_rows {
        println!(
            "{:<8} {:>3} {:>3} {:<22} {:>6} {:>6} {:>9.4} {:>8.2} {:>10.6} {:>10.6} {:>9}",
            r.case,
            r.n,
            r.k,
            r.sparsifier,
            r.edges_penalized,
            r.edges_used,
            r.prefeas_rate,
            r.mean_weight,
            r.regret_best,
            r.regret_mean,
            r.reference_kind
        );
    }
    if verbose {
        eprintln!("config digest {}", record.config_digest);
    }
}

fn print_ablation_summary(record: &RunRecord) {
    // aggregate over slates per (n, qubo, method)
    let mut keys: Vec<(usize, String, String)> = Vec::new();
    let mut agg: std::collections::HashMap<(usize, String, String), (f64, f64, usize)> =
        std::collections::HashMap::new();
    for r in &record.ablation_rows {
        let key = (r.n, r.qubo.clone(), r.method.clone());
        let e = agg.entry(key.clone()).or_insert((0.0, 0.0, 0));
        e.0 += r.regret;
        e.1 += r.jaccard;
        e.2 += 1;
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    println!(
        "{:>3} {:<12} {:<15} {:>12} {:>9} {:>7}",
        "n", "qubo", "method", "mean_regret", "jaccard", "slates"
    );
    for key in keys {
        let (regret, jaccard, count) = agg[&key];
        println!(
            "{:>3} {:<12} {:<15} {:>12.6} {:>9.4} {:>7}",
            key.0,
            key.1,
            key.2,
            regret / count as f64,
            jaccard / count as f64,
            count
        );
    }
}
