//! Run the spectrum and analysis commands against a temporary cache and
//! show that a warm rerun performs no diagonalizations.

use su2eth::pipeline::{cmd_diag_eth, cmd_offdiag_eth, cmd_spectrum, resolve_cache, RunConfig};

fn main() -> su2eth::Result<()> {
    let root = std::env::temp_dir().join(format!("su2eth-example-{}", std::process::id()));
    let cfg = RunConfig {
        lengths: vec![8, 10, 12],
        cache_dir: Some(root.join("cache")),
        output_dir: root.join("out"),
        ..RunConfig::default()
    };
    let cache = resolve_cache(None, &cfg);
    let cold = cmd_spectrum(&cfg, &cache)?;
    let warm = cmd_spectrum(&cfg, &cache)?;
    println!(
        "diagonalizations: cold {}, warm {}",
        cold.diagonalizations(),
        warm.diagonalizations()
    );
    let diag = cmd_diag_eth(&cfg, &cache)?;
    let off = cmd_offdiag_eth(&cfg, &cache)?;
    for p in diag.outputs.iter().chain(&off.outputs) {
        println!("wrote {}", p.display());
    }
    std::fs::remove_dir_all(&root)?;
    Ok(())
}
