use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use su2eth::pipeline::{self, RunConfig};
use su2eth::tensor::{cg_table, CG_CSV_HEADER};
use su2eth::{oracle, Error, Result};

#[derive(Parser)]
#[command(name = "su2eth", version, about = "Symmetry-resolved ETH analysis of the extended Heisenberg chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Chain lengths, comma separated.
    #[arg(long = "L", value_delimiter = ',')]
    lengths: Option<Vec<usize>>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cache root; overrides SU2ETH_CACHE and the config.
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Diagonalize every sector and fill the cache.
    Spectrum(Common),
    /// Diagonal ETH: series, per-spin means, fluctuation scaling.
    DiagEth(Common),
    /// Off-diagonal ETH: Gamma, spectral functions, variance scaling.
    OffdiagEth(Common),
    /// Closed-form moments against traces over cached spectra (L <= 10).
    OracleCheck(Common),
    /// Clebsch-Gordan coefficients as CSV.
    CgTable {
        /// Largest 2j of the coupled spins.
        #[arg(long, default_value_t = 4)]
        max_twice: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form moments for one (L, S, lambda) as JSON.
    Oracle {
        #[arg(long = "L")]
        length: usize,
        #[arg(long = "S")]
        spin: u32,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
    },
}

fn load_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(l) = &c.lengths {
        cfg.lengths = l.clone();
    }
    if let Some(x) = c.lambda {
        cfg.lambda = x;
    }
    if let Some(o) = &c.out {
        cfg.output_dir = o.clone();
    }
    if let Some(w) = c.workers {
        cfg.workers = w;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Spectrum(c) => {
            let cfg = load_config(&c)?;
            let cache = pipeline::resolve_cache(c.cache.as_deref(), &cfg);
            let s = pipeline::cmd_spectrum(&cfg, &cache)?;
            for size in &s.sizes {
                println!(
                    "L={} sectors={} states={} hits={} diagonalized={} quarantined={} spins={:?}",
                    size.length,
                    size.sectors,
                    size.total_states,
                    size.cache_hits,
                    size.diagonalizations,
                    size.quarantined.len(),
                    size.spin_counts
                );
            }
            Ok(true)
        }
        Command::DiagEth(c) => {
            let cfg = load_config(&c)?;
            let cache = pipeline::resolve_cache(c.cache.as_deref(), &cfg);
            let r = pipeline::cmd_diag_eth(&cfg, &cache)?;
            for f in &r.fits.fits {
                println!("{} {} S={} gamma={:.4}", f.name, f.observable, f.s_a, f.params["gamma"]);
            }
            for p in &r.outputs {
                println!("wrote {}", p.display());
            }
            Ok(true)
        }
        Command::OffdiagEth(c) => {
            let cfg = load_config(&c)?;
            let cache = pipeline::resolve_cache(c.cache.as_deref(), &cfg);
            let r = pipeline::cmd_offdiag_eth(&cfg, &cache)?;
            for p in &r.outputs {
                println!("wrote {}", p.display());
            }
            Ok(true)
        }
        Command::OracleCheck(c) => {
            let cfg = load_config(&c)?;
            let cache = pipeline::resolve_cache(c.cache.as_deref(), &cfg);
            let r = pipeline::cmd_oracle_check(&cfg, &cache)?;
            let worst = r.rows.iter().map(|x| x.abs_diff).fold(0.0, f64::max);
            println!("{} comparisons, max |analytic - trace| = {worst:.3e}", r.rows.len());
            for row in r.rows.iter().filter(|x| !x.pass) {
                println!("FAIL L={} S={} {}: {:.3e}", row.length, row.spin, row.moment, row.abs_diff);
            }
            for f in &r.failures {
                println!("FAIL {f}");
            }
            println!("{}", if r.passed() { "PASS" } else { "FAIL" });
            Ok(r.passed())
        }
        Command::CgTable { max_twice, out } => {
            let mut text = String::from(CG_CSV_HEADER);
            text.push('\n');
            for row in cg_table(max_twice)? {
                text.push_str(&row.csv_line());
                text.push('\n');
            }
            match out {
                Some(p) => std::fs::write(p, text)?,
                None => print!("{text}"),
            }
            Ok(true)
        }
        Command::Oracle { length, spin, lambda } => {
            let m = oracle::moments(length, spin, lambda)?;
            println!("{}", serde_json::to_string_pretty(&m)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_validation(&e) { 2 } else { 1 })
        }
    }
}

fn is_validation(e: &Error) -> bool {
    e.is_validation()
}
