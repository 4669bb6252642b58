use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basis::MAX_SITES;
use crate::error::{Error, Result};
use crate::eth::Binning;
use crate::operators::Observable;

/// Estimator settings; every default matches the reference analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorParams {
    /// Running-average window for diagonal elements, in states.
    pub window: usize,
    pub central_fraction: f64,
    /// Off-diagonal filter `|E_mean - E0| / L <= energy_window`.
    pub energy_window: f64,
    /// Diagonal-vs-spin filter `|E| / L <= diag_energy_window`.
    pub diag_energy_window: f64,
    pub binning: Binning,
    /// Variance-scaling cut; `None` picks 10 for `lambda != 0` and 3 at `lambda = 0`.
    pub omega_cut: Option<f64>,
    /// Drop the `k = 0` and `k = pi` sectors from every ensemble.
    pub exclude_parity_momenta: bool,
    /// Further momentum indices to drop.
    pub exclude_k: Vec<i32>,
    /// Fit ranges in omega for the high-frequency decay fits.
    pub decay_fit_range: (f64, f64),
    /// Fit range in omega for the low-frequency power law.
    pub low_fit_range: (f64, f64),
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams {
            window: 50,
            central_fraction: 0.5,
            energy_window: 0.025,
            diag_energy_window: 0.025,
            binning: Binning::default(),
            omega_cut: None,
            exclude_parity_momenta: true,
            exclude_k: Vec::new(),
            decay_fit_range: (2.0, 8.0),
            low_fit_range: (0.1, 1.0),
        }
    }
}

impl EstimatorParams {
    pub fn omega_cut_for(&self, lambda: f64) -> f64 {
        self.omega_cut
            .unwrap_or(if lambda == 0.0 { 3.0 } else { 10.0 })
    }
}

/// A requested `(S_a, S_b)` combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpinPair(pub u32, pub u32);

impl SpinPair {
    pub fn is_diagonal(self) -> bool {
        self.0 == self.1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lengths: Vec<usize>,
    pub lambda: f64,
    pub magnetization: i32,
    /// Spins analysed on their own (diagonal and same-spin off-diagonal).
    pub spins: Vec<u32>,
    /// Cross-spin combinations for the off-diagonal analysis.
    pub spin_pairs: Vec<SpinPair>,
    pub observables: Vec<Observable>,
    pub estimators: EstimatorParams,
    pub cache_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lengths: vec![10, 12, 14],
            lambda: 3.0,
            magnetization: 0,
            spins: vec![0, 1],
            spin_pairs: Vec::new(),
            observables: vec![Observable::A, Observable::B],
            estimators: EstimatorParams::default(),
            cache_dir: None,
            output_dir: PathBuf::from("su2eth-out"),
            workers: 1,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Checks shared by every command.
    pub fn validate(&self) -> Result<()> {
        if self.lengths.is_empty() {
            return Err(Error::Config("`lengths` is empty".into()));
        }
        for &l in &self.lengths {
            if l % 2 == 1 || l < 4 || l > MAX_SITES {
                return Err(Error::Config(format!(
                    "chain length {l} must be even and between 4 and {MAX_SITES}"
                )));
            }
            if self.magnetization.unsigned_abs() as usize > l / 2 {
                return Err(Error::Config(format!(
                    "magnetization {} exceeds L/2 = {} for L = {l}",
                    self.magnetization,
                    l / 2
                )));
            }
        }
        if !self.lambda.is_finite() {
            return Err(Error::Config(format!("lambda must be finite, got {}", self.lambda)));
        }
        if self.workers == 0 {
            return Err(Error::Config("`workers` must be at least 1".into()));
        }
        let e = &self.estimators;
        if e.window == 0 {
            return Err(Error::Config("`window` must be positive".into()));
        }
        for (name, v) in [
            ("central_fraction", e.central_fraction),
            ("energy_window", e.energy_window),
            ("diag_energy_window", e.diag_energy_window),
            ("binning.delta", e.binning.delta),
            ("binning.width", e.binning.width),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("`{name}` must be positive, got {v}")));
            }
        }
        if e.central_fraction > 1.0 {
            return Err(Error::Config("`central_fraction` must not exceed 1".into()));
        }
        if let Some(c) = e.omega_cut {
            if !(c > 0.0) {
                return Err(Error::Config(format!("`omega_cut` must be positive, got {c}")));
            }
        }
        Ok(())
    }

    /// Checks for the analysis commands: spin selections and selection rules.
    pub fn validate_analysis(&self) -> Result<()> {
        self.validate()?;
        if self.magnetization != 0 {
            return Err(Error::Config("the ETH analysis runs at M = 0".into()));
        }
        if self.spins.is_empty() && self.spin_pairs.is_empty() {
            return Err(Error::Config("no spins selected".into()));
        }
        if self.observables.is_empty() {
            return Err(Error::Config("no observables selected".into()));
        }
        let l_min = *self.lengths.iter().min().expect("nonempty");
        let all_spins = self
            .spins
            .iter()
            .copied()
            .chain(self.spin_pairs.iter().flat_map(|p| [p.0, p.1]));
        for s in all_spins {
            if s as usize > l_min / 2 {
                return Err(Error::Config(format!(
                    "spin {s} exceeds the bound S <= L/2 = {} for L = {l_min}",
                    l_min / 2
                )));
            }
        }
        for p in &self.spin_pairs {
            let ds = p.0.abs_diff(p.1);
            for obs in &self.observables {
                let allowed = match obs {
                    Observable::A => ds == 0,
                    Observable::B | Observable::C => ds == 0 || ds == 2,
                };
                if !allowed {
                    return Err(Error::Config(format!(
                        "spin pair ({}, {}) is forbidden for {obs}: the Z2 (spin-flip) selection \
                         rule at M = 0 and the tensor rank allow only |S_a - S_b| in {}",
                        p.0,
                        p.1,
                        if *obs == Observable::A { "{0}" } else { "{0, 2}" }
                    )));
                }
            }
        }
        Ok(())
    }
}
