//! Log-space least squares for the three decay models.

use su2eth::eth::{fit_points, FitModel};

fn main() -> su2eth::Result<()> {
    let xs: Vec<f64> = (1..=20).map(|i| 0.25 * i as f64).collect();
    let cases = [
        (FitModel::Exponential, (|x: f64| 2.0 * (-0.7 * x).exp()) as fn(f64) -> f64),
        (FitModel::Gaussian, |x: f64| 0.5 * (-0.3 * x * x).exp()),
        (FitModel::PowerLaw, |x: f64| 1.5 * x.powf(-1.2)),
    ];
    for (model, f) in cases {
        let points: Vec<(f64, f64)> = xs.iter().map(|&x| (x, f(x))).collect();
        let r = fit_points(model, &points, (0.0, 10.0), 3)?;
        println!(
            "{model:<12} amplitude {:.10} rate {:+.10} residual {:.1e}",
            r.amplitude().value,
            r.rate().value,
            r.residual_norm
        );
    }
    Ok(())
}
