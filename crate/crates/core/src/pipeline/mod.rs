//! Configuration-driven sweeps, cached spectra and the analysis commands.

pub mod analysis;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;
pub mod sweep;

pub use commands::{
    cmd_diag_eth, cmd_offdiag_eth, cmd_oracle_check, cmd_spectrum, resolve_cache, DiagReport, FitEntry,
    FitsFile, OffDiagReport, OracleReport, SpectrumSummary,
};
pub use config::{EstimatorParams, RunConfig, SpinPair};
pub use manifest::RunManifest;
pub use sweep::{ensure_spectra, load_blocks, solve_blocks, LoadedBlock, SectorStatus, SweepReport};
