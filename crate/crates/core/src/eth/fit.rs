//! Unweighted least squares on log-transformed data.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `c exp(-a x)`
    Exponential,
    /// `c exp(-b x^2)`
    Gaussian,
    /// `c x^gamma`
    PowerLaw,
}

impl FitModel {
    fn rate_name(self) -> &'static str {
        match self {
            FitModel::Exponential => "a",
            FitModel::Gaussian => "b",
            FitModel::PowerLaw => "gamma",
        }
    }
}

impl fmt::Display for FitModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitModel::Exponential => "exponential",
            FitModel::Gaussian => "gaussian",
            FitModel::PowerLaw => "power_law",
        })
    }
}

impl FromStr for FitModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential" => Ok(FitModel::Exponential),
            "gaussian" => Ok(FitModel::Gaussian),
            "power_law" => Ok(FitModel::PowerLaw),
            other => Err(Error::InvalidArgument(format!("unknown fit model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParam {
    pub name: String,
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub params: Vec<FitParam>,
    pub range: (f64, f64),
    /// Euclidean norm of the residuals in log space.
    pub residual_norm: f64,
    pub points_used: usize,
    /// Points inside the range dropped for a nonpositive value (or abscissa).
    pub excluded: usize,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<&FitParam> {
        self.params.iter().find(|p| p.name == name)
    }

    /// The decay rate or exponent (`a`, `b` or `gamma`).
    pub fn rate(&self) -> &FitParam {
        &self.params[1]
    }

    pub fn amplitude(&self) -> &FitParam {
        &self.params[0]
    }

    pub fn predict(&self, x: f64) -> f64 {
        let c = self.amplitude().value;
        let r = self.rate().value;
        match self.model {
            FitModel::Exponential => c * (-r * x).exp(),
            FitModel::Gaussian => c * (-r * x * x).exp(),
            FitModel::PowerLaw => c * x.powf(r),
        }
    }
}

/// Fit `points` with `x` in `[range.0, range.1]`, requiring `min_points` usable points.
pub fn fit_points(
    model: FitModel,
    points: &[(f64, f64)],
    range: (f64, f64),
    min_points: usize,
) -> Result<FitResult> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = 0;
    for &(x, y) in points {
        if !(x >= range.0 && x <= range.1) {
            continue;
        }
        if !(y > 0.0) || !y.is_finite() || (model == FitModel::PowerLaw && !(x > 0.0)) {
            excluded += 1;
            continue;
        }
        xs.push(match model {
            FitModel::Exponential => x,
            FitModel::Gaussian => x * x,
            FitModel::PowerLaw => x.ln(),
        });
        ys.push(y.ln());
    }
    let n = xs.len();
    if n < min_points.max(2) {
        return Err(Error::TooFewSamples {
            needed: min_points.max(2),
            got: n,
        });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let sigma2 = if n > 2 { rss / (nf - 2.0) } else { 0.0 };
    let slope_err = (sigma2 / sxx).sqrt();
    let intercept_err = (sigma2 * (1.0 / nf + mx * mx / sxx)).sqrt();
    let amplitude = intercept.exp();
    let rate = match model {
        FitModel::PowerLaw => slope,
        _ => -slope,
    };
    if !amplitude.is_finite() || !rate.is_finite() {
        return Err(Error::DegenerateFit("non-finite parameters".into()));
    }
    Ok(FitResult {
        model,
        params: vec![
            FitParam {
                name: "amplitude".into(),
                value: amplitude,
                error: amplitude * intercept_err,
            },
            FitParam {
                name: model.rate_name().into(),
                value: rate,
                error: slope_err,
            },
        ],
        range,
        residual_norm: rss.sqrt(),
        points_used: n,
        excluded,
    })
}
