//! Running averages over frequency windows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid spacing, window width and the count below which a bin is flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    pub delta: f64,
    pub width: f64,
    pub min_count: usize,
}

impl Default for Binning {
    fn default() -> Self {
        Binning {
            delta: 0.025,
            width: 0.175,
            min_count: 10,
        }
    }
}

impl Binning {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || !(self.width > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "bin spacing and width must be positive, got {} and {}",
                self.delta, self.width
            )));
        }
        Ok(())
    }
}

/// One window of the running average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub center: f64,
    pub count: usize,
    pub mean_sq: f64,
    pub mean_abs: f64,
    /// Estimator value; `None` when the bin is flagged.
    pub value: Option<f64>,
}

impl Bin {
    pub fn flagged(&self) -> bool {
        self.value.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedSeries {
    pub binning: Binning,
    pub bins: Vec<Bin>,
}

impl BinnedSeries {
    /// `(center, value)` of every unflagged bin.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.bins
            .iter()
            .filter_map(|b| b.value.map(|v| (b.center, v)))
            .collect()
    }

    pub fn at(&self, center_index: i64) -> Option<&Bin> {
        let c = center_index as f64 * self.binning.delta;
        self.bins.iter().find(|b| b.center == c)
    }

    pub fn map_values(mut self, f: impl Fn(&Bin) -> f64) -> Self {
        for b in &mut self.bins {
            if b.value.is_some() {
                b.value = Some(f(b));
            }
        }
        self
    }
}

fn exact_order_sum(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

/// Bin `(omega, |O|)` samples on the grid `j * delta`, each bin averaging the
/// samples with `|omega - center| <= width / 2`.
///
/// Sums run over sorted member values, so two bins holding the same multiset
/// of samples produce bit-identical means.
pub fn bin_samples(
    samples: &[(f64, f64)],
    binning: Binning,
    estimator: impl Fn(&Bin) -> f64,
) -> Result<BinnedSeries> {
    binning.validate()?;
    let mut sorted: Vec<(f64, f64)> = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut bins = Vec::new();
    if let (Some(first), Some(last)) = (sorted.first(), sorted.last()) {
        let half = binning.width / 2.0;
        let j_lo = ((first.0 - half) / binning.delta).floor() as i64;
        let j_hi = ((last.0 + half) / binning.delta).ceil() as i64;
        for j in j_lo..=j_hi {
            let center = j as f64 * binning.delta;
            let lo = sorted.partition_point(|s| s.0 < center - half);
            let hi = sorted.partition_point(|s| s.0 <= center + half);
            let count = hi - lo;
            if count == 0 {
                continue;
            }
            let members = &sorted[lo..hi];
            let mean_sq = exact_order_sum(members.iter().map(|s| s.1 * s.1).collect()) / count as f64;
            let mean_abs = exact_order_sum(members.iter().map(|s| s.1).collect()) / count as f64;
            let mut bin = Bin {
                center,
                count,
                mean_sq,
                mean_abs,
                value: None,
            };
            if count >= binning.min_count {
                bin.value = Some(estimator(&bin));
            }
            bins.push(bin);
        }
    }
    Ok(BinnedSeries { binning, bins })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirrored_samples_give_mirrored_bins() {
        let mut s = Vec::new();
        for i in 0..200 {
            let w = 0.013 * i as f64;
            let v = ((i * 7919) % 101) as f64 / 101.0;
            s.push((w, v));
            s.push((-w, v));
        }
        let b = bin_samples(&s, Binning::default(), |b| b.mean_sq).unwrap();
        for bin in &b.bins {
            let j = (bin.center / b.binning.delta).round() as i64;
            let m = b.at(-j).unwrap();
            assert_eq!(m.value, bin.value);
            assert_eq!(m.count, bin.count);
        }
    }

    #[test]
    fn sparse_bins_flagged() {
        let s = vec![(0.0, 1.0), (0.01, 2.0)];
        let b = bin_samples(&s, Binning::default(), |b| b.mean_sq).unwrap();
        assert!(b.bins.iter().all(|x| x.flagged()));
        assert!(b.points().is_empty());
    }
}
