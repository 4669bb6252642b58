//! Eigenstate-thermalization estimators.

pub mod binning;
pub mod diagonal;
pub mod fit;
pub mod offdiag;

pub use binning::{bin_samples, Bin, BinnedSeries, Binning};
pub use diagonal::{
    diagonal_fluctuations, diagonal_records, diagonal_vs_spin, DiagRecord, DiagonalSeries, SpinGroup,
};
pub use fit::{fit_points, FitModel, FitParam, FitResult};
pub use offdiag::{
    gaussianity_ratio, gaussianity_ratio_samples, low_frequency_view, sector_mean_energy,
    spectral_function, variance_scaling, OffDiagRecord, OffDiagonalEnsemble,
};

use crate::error::Result;

/// Fit a binned series over `range`, requiring at least five usable bins.
pub fn fit(model: FitModel, series: &BinnedSeries, range: (f64, f64)) -> Result<FitResult> {
    fit_points(model, &series.points(), range, 5)
}
