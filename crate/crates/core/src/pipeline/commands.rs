//! The pipeline commands behind the command-line interface.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::analysis::{
    block_dims, build_ensemble, diagonal_records_for, ensemble_blocks, fluctuation_point, FluctuationPoint,
};
use super::config::{RunConfig, SpinPair};
use super::manifest::{AnalysisEntry, RunManifest};
use super::output::{fmt_f64, write_json, Cell, CsvDoc};
use super::sweep::{ensure_spectra, load_blocks, plan, thread_pool, LoadedBlock, SweepReport};
use crate::cache::{SpectrumCache, CACHE_ENV};
use crate::error::{Error, Result};
use crate::eth::{
    diagonal_vs_spin, fit, fit_points, gaussianity_ratio, low_frequency_view, spectral_function,
    variance_scaling, BinnedSeries, FitModel, FitResult, OffDiagonalEnsemble,
};
use crate::operators::Observable;
use crate::oracle::{self, BlockRef};

pub const DEFAULT_CACHE_DIR: &str = ".su2eth-cache";

/// Cache root: flag, then `SU2ETH_CACHE`, then the config, then the default.
pub fn resolve_cache(flag: Option<&Path>, config: &RunConfig) -> SpectrumCache {
    if let Some(p) = flag {
        return SpectrumCache::new(p);
    }
    match std::env::var_os(CACHE_ENV) {
        Some(v) if !v.is_empty() => SpectrumCache::new(PathBuf::from(v)),
        _ => SpectrumCache::new(
            config
                .cache_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR)),
        ),
    }
}

fn finish(mut manifest: RunManifest, start: Instant, dir: &Path, result: &Result<()>) -> Result<()> {
    manifest.seconds = start.elapsed().as_secs_f64();
    if let Err(e) = result {
        manifest.error = Some(e.to_string());
    }
    manifest.append(dir)?;
    Ok(())
}

fn run_logged(
    command: &str,
    cfg: &RunConfig,
    body: impl FnOnce(&mut RunManifest) -> Result<()>,
) -> Result<()> {
    let start = Instant::now();
    let mut manifest = RunManifest::start(command, &cfg.hash());
    let result = body(&mut manifest);
    finish(manifest, start, &cfg.output_dir, &result)?;
    result
}

/// Per-size part of the spectrum summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub length: usize,
    pub sectors: usize,
    pub total_states: usize,
    /// Number of eigenstates per total spin over all sectors.
    pub spin_counts: BTreeMap<u32, usize>,
    pub cache_hits: usize,
    pub diagonalizations: usize,
    pub quarantined: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub config_hash: String,
    pub lambda: f64,
    pub magnetization: i32,
    pub cache_root: PathBuf,
    pub sizes: Vec<SizeSummary>,
}

impl SpectrumSummary {
    pub fn diagonalizations(&self) -> usize {
        self.sizes.iter().map(|s| s.diagonalizations).sum()
    }
}

fn summarize(length: usize, report: &SweepReport) -> SizeSummary {
    let mut spin_counts = BTreeMap::new();
    for o in &report.outcomes {
        for (&s, &n) in &o.spin_counts {
            *spin_counts.entry(s).or_insert(0) += n;
        }
    }
    SizeSummary {
        length,
        sectors: report.outcomes.len(),
        total_states: report.outcomes.iter().map(|o| o.dim).sum(),
        spin_counts,
        cache_hits: report.hits(),
        diagonalizations: report.diagonalizations(),
        quarantined: report.failures().iter().map(|o| o.sector.clone()).collect(),
    }
}

/// Diagonalize (or find in the cache) every sector of every size.
pub fn cmd_spectrum(cfg: &RunConfig, cache: &SpectrumCache) -> Result<SpectrumSummary> {
    cfg.validate()?;
    let mut summary = SpectrumSummary {
        config_hash: cfg.hash(),
        lambda: cfg.lambda,
        magnetization: cfg.magnetization,
        cache_root: cache.root().to_path_buf(),
        sizes: Vec::new(),
    };
    run_logged("spectrum", cfg, |manifest| {
        for &l in &cfg.lengths {
            let sectors = plan(l, cfg.magnetization)?;
            let report = ensure_spectra(cache, &sectors, cfg.lambda, cfg.workers)?;
            manifest.sectors.extend(report.outcomes.iter().cloned());
            summary.sizes.push(summarize(l, &report));
            if let Some(e) = &report.disk_error {
                return Err(Error::Cache {
                    path: cache.root().to_path_buf(),
                    reason: format!("write failed, sweep aborted: {e}"),
                });
            }
        }
        let path = write_json(&cfg.output_dir, "spectrum_summary.json", &summary)?;
        manifest.outputs.push(path.display().to_string());
        Ok(())
    })?;
    Ok(summary)
}

/// A fit as written to the fits files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub name: String,
    pub observable: Observable,
    pub s_a: u32,
    pub s_b: u32,
    /// `None` for fits across sizes.
    pub length: Option<usize>,
    pub model: FitModel,
    pub params: BTreeMap<String, f64>,
    pub errors: BTreeMap<String, f64>,
    pub range: (f64, f64),
    pub points_used: usize,
    pub residual_norm: f64,
    pub inputs_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitsFile {
    pub config_hash: String,
    pub lambda: f64,
    pub fits: Vec<FitEntry>,
}

fn points_hash(points: &[(f64, f64)]) -> String {
    let mut h = Sha256::new();
    for (x, y) in points {
        h.update(fmt_f64(*x).as_bytes());
        h.update(b",");
        h.update(fmt_f64(*y).as_bytes());
        h.update(b"\n");
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn fit_entry(
    name: &str,
    obs: Observable,
    spins: (u32, u32),
    length: Option<usize>,
    points: &[(f64, f64)],
    r: &FitResult,
) -> FitEntry {
    let inside: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|p| p.0 >= r.range.0 && p.0 <= r.range.1)
        .collect();
    FitEntry {
        name: name.to_string(),
        observable: obs,
        s_a: spins.0,
        s_b: spins.1,
        length,
        model: r.model,
        params: r.params.iter().map(|p| (p.name.clone(), p.value)).collect(),
        errors: r.params.iter().map(|p| (p.name.clone(), p.error)).collect(),
        range: r.range,
        points_used: r.points_used,
        residual_norm: r.residual_norm,
        inputs_hash: points_hash(&inside),
    }
}

fn note_skip(what: &str, e: &Error) {
    eprintln!("note: skipping {what}: {e}");
}

fn load_size(cfg: &RunConfig, cache: &SpectrumCache, length: usize) -> Result<Vec<LoadedBlock>> {
    load_blocks(cache, &plan(length, cfg.magnetization)?, cfg.lambda, cfg.workers)
}

/// Result of `diag-eth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagReport {
    pub fluctuations: Vec<FluctuationPoint>,
    pub fits: FitsFile,
    pub outputs: Vec<PathBuf>,
}

/// Diagonal series, per-spin means, fluctuation scaling and the linear
/// closed-form overlay.
pub fn cmd_diag_eth(cfg: &RunConfig, cache: &SpectrumCache) -> Result<DiagReport> {
    cfg.validate_analysis()?;
    if cfg.spins.is_empty() {
        return Err(Error::Config("diag-eth needs at least one entry in `spins`".into()));
    }
    let hash = cfg.hash();
    let est = &cfg.estimators;
    let mut report = DiagReport {
        fluctuations: Vec::new(),
        fits: FitsFile {
            config_hash: hash.clone(),
            lambda: cfg.lambda,
            fits: Vec::new(),
        },
        outputs: Vec::new(),
    };
    run_logged("diag-eth", cfg, |manifest| {
        let pool = thread_pool(cfg.workers)?;
        let mut diag = CsvDoc::new(&hash, &["E_over_L", "S", "O_diag", "L", "lambda", "observable"]);
        let mut per_spin = CsvDoc::new(
            &hash,
            &[
                "L", "lambda", "observable", "S", "S_over_L", "count", "mean", "std", "weighted_mean",
                "weighted_std",
            ],
        );
        let mut fluct = CsvDoc::new(
            &hash,
            &["L", "lambda", "observable", "S", "D", "LD", "window", "count", "fluctuation"],
        );
        let mut overlay = CsvDoc::new(&hash, &["E_over_L", "S", "O_pred", "L", "lambda", "observable"]);
        for &l in &cfg.lengths {
            let t0 = Instant::now();
            let blocks = load_size(cfg, cache, l)?;
            let kept = ensemble_blocks(&blocks, est);
            let dims = block_dims(&kept);
            let lf = l as f64;
            for &obs in &cfg.observables {
                let records = diagonal_records_for(&kept, obs, &pool)?;
                for &spin in &cfg.spins {
                    let mut mine: Vec<_> = records.iter().filter(|r| r.spin == spin).collect();
                    mine.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.value.total_cmp(&b.value)));
                    for r in &mine {
                        diag.row(&[
                            Cell::F(r.energy / lf),
                            Cell::U(spin as usize),
                            Cell::F(r.value),
                            Cell::U(l),
                            Cell::F(cfg.lambda),
                            Cell::S(obs.name()),
                        ]);
                    }
                    match fluctuation_point(&records, &kept, l, obs, spin, est) {
                        Ok(p) => {
                            fluct.row(&[
                                Cell::U(l),
                                Cell::F(cfg.lambda),
                                Cell::S(obs.name()),
                                Cell::U(spin as usize),
                                Cell::F(p.dim),
                                Cell::F(p.ld()),
                                Cell::U(p.window),
                                Cell::U(p.count),
                                Cell::F(p.fluctuation),
                            ]);
                            report.fluctuations.push(p);
                        }
                        Err(e) => note_skip(&format!("fluctuations at L = {l}, S = {spin}"), &e),
                    }
                    if let (Some(first), Some(last)) = (mine.first(), mine.last()) {
                        let n = 40;
                        for i in 0..=n {
                            let e = first.energy + (last.energy - first.energy) * i as f64 / n as f64;
                            match oracle::diagonal_prediction(obs, l, spin, cfg.lambda, e) {
                                Ok(v) => overlay.row(&[
                                    Cell::F(e / lf),
                                    Cell::U(spin as usize),
                                    Cell::F(v),
                                    Cell::U(l),
                                    Cell::F(cfg.lambda),
                                    Cell::S(obs.name()),
                                ]),
                                Err(err) => {
                                    note_skip(&format!("closed-form overlay at L = {l}, S = {spin}"), &err);
                                    break;
                                }
                            }
                        }
                    }
                }
                let all_spins: Vec<u32> = (0..=(l / 2) as u32).collect();
                for g in diagonal_vs_spin(&records, l, est.diag_energy_window, &all_spins, &dims) {
                    let opt = |x: Option<f64>| x.map_or_else(|| "nan".to_string(), fmt_f64);
                    let cells = [
                        opt(g.mean),
                        opt(g.std),
                        opt(g.weighted_mean),
                        opt(g.weighted_std),
                    ];
                    per_spin.row(&[
                        Cell::U(l),
                        Cell::F(cfg.lambda),
                        Cell::S(obs.name()),
                        Cell::U(g.spin as usize),
                        Cell::F(g.spin_density),
                        Cell::U(g.count),
                        Cell::S(&cells[0]),
                        Cell::S(&cells[1]),
                        Cell::S(&cells[2]),
                        Cell::S(&cells[3]),
                    ]);
                }
            }
            manifest.analysis.push(AnalysisEntry {
                length: l,
                stage: "diagonal".into(),
                sectors: kept.len(),
                seconds: t0.elapsed().as_secs_f64(),
            });
        }

        for &obs in &cfg.observables {
            for &spin in &cfg.spins {
                let pts: Vec<&FluctuationPoint> = report
                    .fluctuations
                    .iter()
                    .filter(|p| p.observable == obs && p.spin == spin)
                    .collect();
                if pts.len() < 3 {
                    continue;
                }
                for (name, xs) in [
                    ("fluctuation_vs_LD", pts.iter().map(|p| p.ld()).collect::<Vec<_>>()),
                    ("fluctuation_vs_L", pts.iter().map(|p| p.length as f64).collect()),
                ] {
                    let points: Vec<(f64, f64)> = xs.into_iter().zip(pts.iter().map(|p| p.fluctuation)).collect();
                    match fit_points(FitModel::PowerLaw, &points, (0.0, f64::MAX), 3) {
                        Ok(r) => report
                            .fits
                            .fits
                            .push(fit_entry(name, obs, (spin, spin), None, &points, &r)),
                        Err(e) => note_skip(name, &e),
                    }
                }
            }
        }

        let dir = &cfg.output_dir;
        report.outputs.push(diag.write(dir, "diag.csv")?);
        report.outputs.push(per_spin.write(dir, "diag_spin.csv")?);
        report.outputs.push(fluct.write(dir, "diag_fluct.csv")?);
        report.outputs.push(overlay.write(dir, "diag_oracle.csv")?);
        report.outputs.push(write_json(dir, "diag_fits.json", &report.fits)?);
        manifest
            .outputs
            .extend(report.outputs.iter().map(|p| p.display().to_string()));
        Ok(())
    })?;
    Ok(report)
}

/// Summary of one off-diagonal ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub length: usize,
    pub observable: Observable,
    pub s_a: u32,
    pub s_b: u32,
    pub e0: f64,
    pub d_alpha: f64,
    pub d_beta: f64,
    pub records: usize,
    pub low_frequency_variance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffDiagReport {
    pub ensembles: Vec<EnsembleSummary>,
    pub fits: FitsFile,
    pub outputs: Vec<PathBuf>,
}

fn requested_pairs(cfg: &RunConfig) -> Vec<(u32, u32)> {
    let mut pairs: Vec<(u32, u32)> = cfg.spins.iter().map(|&s| (s, s)).collect();
    for &SpinPair(a, b) in &cfg.spin_pairs {
        if !pairs.contains(&(a, b)) {
            pairs.push((a, b));
        }
    }
    pairs
}

fn series_rows(
    doc: &mut CsvDoc,
    series: &BinnedSeries,
    length: usize,
    spins: (u32, u32),
    lambda: f64,
    obs: Observable,
) {
    for b in &series.bins {
        if let Some(v) = b.value {
            doc.row(&[
                Cell::F(b.center),
                Cell::F(v),
                Cell::U(b.count),
                Cell::U(length),
                Cell::U(spins.0 as usize),
                Cell::U(spins.1 as usize),
                Cell::F(lambda),
                Cell::S(obs.name()),
            ]);
        }
    }
}

/// Gaussianity ratio, spectral functions (raw and reduced), low-frequency
/// views and the variance scaling across sizes.
pub fn cmd_offdiag_eth(cfg: &RunConfig, cache: &SpectrumCache) -> Result<OffDiagReport> {
    cfg.validate_analysis()?;
    let hash = cfg.hash();
    let est = &cfg.estimators;
    let pairs = requested_pairs(cfg);
    let mut report = OffDiagReport {
        ensembles: Vec::new(),
        fits: FitsFile {
            config_hash: hash.clone(),
            lambda: cfg.lambda,
            fits: Vec::new(),
        },
        outputs: Vec::new(),
    };
    let cols = ["omega", "Gamma", "count", "L", "S_a", "S_b", "lambda", "observable"];
    let sf_cols = ["omega", "LD_var", "count", "L", "S_a", "S_b", "lambda", "observable"];
    run_logged("offdiag-eth", cfg, |manifest| {
        let pool = thread_pool(cfg.workers)?;
        let mut gamma_csv = CsvDoc::new(&hash, &cols);
        let mut sf_csv = CsvDoc::new(&hash, &sf_cols);
        let mut red_csv = CsvDoc::new(&hash, &sf_cols);
        let mut low_csv = CsvDoc::new(
            &hash,
            &["omega_L2", "LD_var", "LD_var_over_L", "L", "S_a", "S_b", "lambda", "observable"],
        );
        let mut ens_csv = CsvDoc::new(
            &hash,
            &["L", "lambda", "observable", "S_a", "S_b", "E0", "D_a", "D_b", "records", "low_freq_var"],
        );
        let omega_cut = est.omega_cut_for(cfg.lambda);
        let mut by_key: BTreeMap<(Observable, u32, u32), Vec<OffDiagonalEnsemble>> = BTreeMap::new();
        for &l in &cfg.lengths {
            let t0 = Instant::now();
            let blocks = load_size(cfg, cache, l)?;
            let kept = ensemble_blocks(&blocks, est);
            for &obs in &cfg.observables {
                for &spins in &pairs {
                    let ens = build_ensemble(&kept, obs, spins, cfg.lambda, est.energy_window, &pool)?;
                    let g = gaussianity_ratio(&ens, est.binning)?;
                    series_rows(&mut gamma_csv, &g, l, spins, cfg.lambda, obs);
                    let sf = spectral_function(&ens, est.binning)?;
                    series_rows(&mut sf_csv, &sf, l, spins, cfg.lambda, obs);
                    if let Some(rank) = obs.rank().filter(|&r| r > 0) {
                        match ens.reduced(rank).and_then(|r| spectral_function(&r, est.binning)) {
                            Ok(red) => series_rows(&mut red_csv, &red, l, spins, cfg.lambda, obs),
                            Err(e) => note_skip(&format!("reduced elements for {spins:?}"), &e),
                        }
                    }
                    let positive = BinnedSeries {
                        binning: sf.binning,
                        bins: sf.bins.iter().filter(|b| b.center > 0.0).copied().collect(),
                    };
                    let plain = low_frequency_view(&positive, l, false);
                    let diffusive = low_frequency_view(&positive, l, true);
                    for ((x, v), (_, vd)) in plain.iter().zip(&diffusive) {
                        low_csv.row(&[
                            Cell::F(*x),
                            Cell::F(*v),
                            Cell::F(*vd),
                            Cell::U(l),
                            Cell::U(spins.0 as usize),
                            Cell::U(spins.1 as usize),
                            Cell::F(cfg.lambda),
                            Cell::S(obs.name()),
                        ]);
                    }
                    let points = positive.points();
                    for (name, model, range) in [
                        ("specfun_exponential", FitModel::Exponential, est.decay_fit_range),
                        ("specfun_gaussian", FitModel::Gaussian, est.decay_fit_range),
                        ("specfun_low_power_law", FitModel::PowerLaw, est.low_fit_range),
                    ] {
                        match fit(model, &positive, range) {
                            Ok(r) => report
                                .fits
                                .fits
                                .push(fit_entry(name, obs, spins, Some(l), &points, &r)),
                            Err(e) => note_skip(&format!("{name} at L = {l}, {spins:?}"), &e),
                        }
                    }
                    let var = ens.low_frequency_variance(omega_cut).ok();
                    ens_csv.row(&[
                        Cell::U(l),
                        Cell::F(cfg.lambda),
                        Cell::S(obs.name()),
                        Cell::U(spins.0 as usize),
                        Cell::U(spins.1 as usize),
                        Cell::F(ens.e0),
                        Cell::F(ens.d_alpha),
                        Cell::F(ens.d_beta),
                        Cell::U(ens.records.len()),
                        Cell::F(var.unwrap_or(f64::NAN)),
                    ]);
                    report.ensembles.push(EnsembleSummary {
                        length: l,
                        observable: obs,
                        s_a: spins.0,
                        s_b: spins.1,
                        e0: ens.e0,
                        d_alpha: ens.d_alpha,
                        d_beta: ens.d_beta,
                        records: ens.records.len(),
                        low_frequency_variance: var,
                    });
                    let mut light = ens;
                    light.records.retain(|r| r.omega.abs() < omega_cut);
                    by_key.entry((obs, spins.0, spins.1)).or_default().push(light);
                }
            }
            manifest.analysis.push(AnalysisEntry {
                length: l,
                stage: "off-diagonal".into(),
                sectors: kept.len(),
                seconds: t0.elapsed().as_secs_f64(),
            });
        }
        for ((obs, a, b), list) in &by_key {
            if list.len() < 3 {
                continue;
            }
            let refs: Vec<&OffDiagonalEnsemble> = list.iter().collect();
            match variance_scaling(&refs, omega_cut) {
                Ok(r) => {
                    let points: Vec<(f64, f64)> = list
                        .iter()
                        .filter_map(|e| {
                            e.low_frequency_variance(omega_cut)
                                .ok()
                                .map(|v| (e.length as f64 * e.effective_dim(), v))
                        })
                        .collect();
                    report
                        .fits
                        .fits
                        .push(fit_entry("variance_vs_LD", *obs, (*a, *b), None, &points, &r));
                }
                Err(e) => note_skip("variance scaling", &e),
            }
        }
        let dir = &cfg.output_dir;
        report.outputs.push(gamma_csv.write(dir, "gamma.csv")?);
        report.outputs.push(sf_csv.write(dir, "specfun.csv")?);
        report.outputs.push(red_csv.write(dir, "specfun_reduced.csv")?);
        report.outputs.push(low_csv.write(dir, "lowfreq.csv")?);
        report.outputs.push(ens_csv.write(dir, "offdiag_ensembles.csv")?);
        report.outputs.push(write_json(dir, "fits.json", &report.fits)?);
        manifest
            .outputs
            .extend(report.outputs.iter().map(|p| p.display().to_string()));
        Ok(())
    })?;
    Ok(report)
}

pub const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub length: usize,
    pub spin: u32,
    pub moment: String,
    pub analytic: f64,
    pub trace: f64,
    pub abs_diff: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub lambda: f64,
    pub rows: Vec<OracleRow>,
    /// Problems that prevented a comparison, each naming the sector or size.
    pub failures: Vec<String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && !self.rows.is_empty() && self.rows.iter().all(|r| r.pass)
    }
}

/// Compare the closed-form moments with traces over the cached spectra.
pub fn cmd_oracle_check(cfg: &RunConfig, cache: &SpectrumCache) -> Result<OracleReport> {
    cfg.validate()?;
    if let Some(&l) = cfg.lengths.iter().find(|&&l| l > 10) {
        return Err(Error::Config(format!("oracle-check accepts L <= 10, got L = {l}")));
    }
    if cfg.magnetization != 0 {
        return Err(Error::Config("oracle-check runs at M = 0".into()));
    }
    let hash = cfg.hash();
    let mut report = OracleReport {
        lambda: cfg.lambda,
        rows: Vec::new(),
        failures: Vec::new(),
    };
    run_logged("oracle-check", cfg, |manifest| {
        let mut csv = CsvDoc::new(
            &hash,
            &["L", "S", "lambda", "moment", "analytic", "trace", "abs_diff", "pass"],
        );
        for &l in &cfg.lengths {
            let blocks = match load_size(cfg, cache, l) {
                Ok(b) => b,
                Err(e) => {
                    report.failures.push(format!("L = {l}: {e}"));
                    continue;
                }
            };
            let refs: Vec<BlockRef<'_>> = blocks
                .iter()
                .map(|b| BlockRef {
                    basis: &b.basis,
                    spectrum: &b.spectrum,
                })
                .collect();
            for spin in 0..=(l / 2) as u32 {
                let pair = oracle::moments(l, spin, cfg.lambda)
                    .and_then(|a| oracle::trace_moments(&refs, cfg.lambda, spin).map(|t| (a, t)));
                let (analytic, trace) = match pair {
                    Ok(p) => p,
                    Err(e) => {
                        report.failures.push(format!("L = {l}, S = {spin}: {e}"));
                        continue;
                    }
                };
                for ((name, a), (_, t)) in analytic.fields().into_iter().zip(trace.fields()) {
                    let diff = (a - t).abs();
                    let pass = diff < ORACLE_TOLERANCE;
                    csv.row(&[
                        Cell::U(l),
                        Cell::U(spin as usize),
                        Cell::F(cfg.lambda),
                        Cell::S(name),
                        Cell::F(a),
                        Cell::F(t),
                        Cell::F(diff),
                        Cell::S(if pass { "pass" } else { "FAIL" }),
                    ]);
                    report.rows.push(OracleRow {
                        length: l,
                        spin,
                        moment: name.to_string(),
                        analytic: a,
                        trace: t,
                        abs_diff: diff,
                        pass,
                    });
                }
            }
        }
        let path = csv.write(&cfg.output_dir, "oracle_check.csv")?;
        manifest.outputs.push(path.display().to_string());
        if !report.passed() {
            manifest.error = Some(format!("{} failing comparisons", report.failures.len()
                + report.rows.iter().filter(|r| !r.pass).count()));
        }
        Ok(())
    })?;
    Ok(report)
}
