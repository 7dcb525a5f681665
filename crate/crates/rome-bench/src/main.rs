//! Command-line benchmark harness.
//!
//! Exit codes: 0 success, 1 configuration error, 2 equivalence-check
//! failure, 3 report I/O failure.

use clap::error::ErrorKind;
use clap::Parser;
use rome_bench::config::{default_impls, parse_usize_list, ImplKind, Precision, ReportFormat};
use rome_bench::{run_bench, BenchConfig, BenchError};
use rome_kernels::PairingMode;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "rome-bench",
    about = "Equivalence-checked benchmark of rotary position embedding execution paths",
    long_about = None
)]
struct Cli {
    /// Payload shape: batch, heads, positions, feature width
    #[arg(long, value_name = "B,N,S,D")]
    shape: Option<String>,

    /// Pairing mode: half, interleave, interleave-half, quarter
    #[arg(long)]
    mode: Option<String>,

    /// Feature-axis split, e.g. 128 or 44,44,40 (must sum to D)
    #[arg(long, value_name = "D1,D2,...")]
    dims: Option<String>,

    /// Implementations to time: reference, reference-nd, rome-gather,
    /// rome-matmul, rome-fused, rome-pipelined, dense-oracle
    #[arg(long, value_name = "LIST")]
    impls: Option<String>,

    /// Measured iterations per implementation
    #[arg(long)]
    iters: Option<usize>,

    /// Discarded warmup iterations per implementation
    #[arg(long)]
    warmup: Option<usize>,

    /// RNG seed for the payload
    #[arg(long)]
    seed: Option<u64>,

    /// Element type: f32 or f64
    #[arg(long)]
    precision: Option<String>,

    /// Verify implementations against the dense oracle before timing (default)
    #[arg(long, overrides_with = "no_check")]
    check: bool,

    /// Skip the pre-timing equivalence check
    #[arg(long, overrides_with = "check")]
    no_check: bool,

    /// Move angle-table and map construction inside the timed region
    #[arg(long)]
    include_setup: bool,

    /// Named configuration; 'paper' selects [1,24,28800,128] with dims 44,44,40
    #[arg(long)]
    preset: Option<String>,

    /// Report format: csv, md, json
    #[arg(long)]
    report: Option<String>,

    /// Write the report to this path instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Pipeline arm: rows per tile
    #[arg(long)]
    tile_rows: Option<usize>,

    /// Pipeline arm: bounded queue capacity
    #[arg(long)]
    queue_depth: Option<usize>,

    /// Corrupt this implementation inside the equivalence check
    /// (fail-closed path instrumentation)
    #[arg(long, hide = true, value_name = "IMPL")]
    fault_inject: Option<String>,

    /// Resolve and validate the configuration, print it as JSON, and exit
    #[arg(long)]
    dry_run: bool,
}

fn parse_shape(s: &str) -> Result<[usize; 4], BenchError> {
    let parts = parse_usize_list(s, "--shape")?;
    parts.try_into().map_err(|_| {
        BenchError::config(format!(
            "--shape expects exactly four values B,N,S,D, got '{s}'"
        ))
    })
}

fn resolve_config(cli: &Cli) -> Result<BenchConfig, BenchError> {
    let mut cfg = BenchConfig::default();

    if let Some(preset) = &cli.preset {
        match preset.as_str() {
            "paper" => {
                cfg.shape = BenchConfig::PAPER_SHAPE;
                cfg.dims = BenchConfig::PAPER_DIMS.to_vec();
                cfg.mode = PairingMode::Interleave;
            }
            other => {
                return Err(BenchError::config(format!(
                    "unknown preset '{other}' (available: paper)"
                )))
            }
        }
    }

    if let Some(s) = &cli.shape {
        cfg.shape = parse_shape(s)?;
    }
    if let Some(m) = &cli.mode {
        cfg.mode = m.parse::<PairingMode>()?;
    }
    if let Some(d) = &cli.dims {
        cfg.dims = parse_usize_list(d, "--dims")?;
    } else if cli.preset.is_none() {
        // keep dims consistent with an explicit --shape
        cfg.dims = vec![cfg.shape[3]];
    }

    cfg.impls = match &cli.impls {
        Some(list) => list
            .split(',')
            .map(|name| name.trim().parse::<ImplKind>())
            .collect::<Result<Vec<_>, _>>()?,
        None => default_impls(&cfg.dims),
    };

    if let Some(v) = cli.iters {
        cfg.iters = v;
    }
    if let Some(v) = cli.warmup {
        cfg.warmup = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(p) = &cli.precision {
        cfg.precision = p.parse::<Precision>()?;
    }
    cfg.check = !cli.no_check;
    cfg.include_setup = cli.include_setup;
    if let Some(v) = cli.tile_rows {
        cfg.tile_rows = v;
    }
    if let Some(v) = cli.queue_depth {
        cfg.queue_depth = v;
    }
    if let Some(name) = &cli.fault_inject {
        cfg.fault_inject = Some(name.parse::<ImplKind>()?);
    }

    cfg.validate()?;
    Ok(cfg)
}

fn config_json(cfg: &BenchConfig) -> serde_json::Value {
    serde_json::json!({
        "shape": cfg.shape,
        "mode": cfg.mode.as_str(),
        "dims": cfg.dims,
        "impls": cfg.impls.iter().map(|k| k.name()).collect::<Vec<_>>(),
        "iters": cfg.iters,
        "warmup": cfg.warmup,
        "seed": cfg.seed,
        "check": cfg.check,
        "precision": cfg.precision.as_str(),
        "include_setup": cfg.include_setup,
        "tile_rows": cfg.tile_rows,
        "queue_depth": cfg.queue_depth,
    })
}

fn run(cli: &Cli) -> Result<(), BenchError> {
    let cfg = resolve_config(cli)?;

    if cli.dry_run {
        println!(
            "{}",
            serde_json::to_string_pretty(&config_json(&cfg)).expect("config json")
        );
        return Ok(());
    }

    let format = match &cli.report {
        Some(f) => f.parse::<ReportFormat>()?,
        None => ReportFormat::Csv,
    };

    let report = run_bench(&cfg)?;
    if cfg.check {
        eprintln!(
            "equivalence check passed for {} implementation(s)",
            cfg.impls.len()
        );
    }

    match &cli.out {
        Some(path) => {
            report.write_to(format, path)?;
            eprintln!("report written to {}", path.display());
            println!("{}", report.to_markdown());
        }
        None => {
            let rendered = if cli.report.is_some() {
                report.render(format)
            } else {
                report.to_markdown()
            };
            println!("{rendered}");
        }
    }
    Ok(())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            std::process::exit(0);
        }
        Err(e) => {
            let _ = e.print();
            std::process::exit(1);
        }
    };
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
