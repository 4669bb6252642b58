use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use su2eth::eth::{
    bin_samples, diagonal_fluctuations, fit_points, gaussianity_ratio_samples, Binning, DiagonalSeries,
    FitModel, OffDiagRecord, OffDiagonalEnsemble,
};

fn gaussian_samples(n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let x: f64 = StandardNormal.sample(&mut rng);
            (0.05 * (i as f64 / n as f64 - 0.5), x.abs())
        })
        .collect()
}

#[test]
fn planted_gaussian_ratio_is_half_pi() {
    let samples = gaussian_samples(100_000, 7);
    let g = gaussianity_ratio_samples(&samples, Binning::default()).unwrap();
    let centre = g.at(0).unwrap();
    assert_eq!(centre.count, 100_000);
    assert!((centre.value.unwrap() - std::f64::consts::FRAC_PI_2).abs() < 0.02);
}

#[test]
fn noiseless_models_recovered() {
    let xs: Vec<f64> = (1..=30).map(|i| 0.2 * i as f64).collect();
    let cases: [(FitModel, f64, f64, fn(f64, f64, f64) -> f64); 3] = [
        (FitModel::Exponential, 3.0, 0.8, |x, c, a| c * (-a * x).exp()),
        (FitModel::Gaussian, 0.7, 0.15, |x, c, b| c * (-b * x * x).exp()),
        (FitModel::PowerLaw, 2.5, -1.7, |x, c, g| c * x.powf(g)),
    ];
    for (model, c, rate, f) in cases {
        let pts: Vec<(f64, f64)> = xs.iter().map(|&x| (x, f(x, c, rate))).collect();
        let r = fit_points(model, &pts, (0.0, 100.0), 3).unwrap();
        assert!((r.amplitude().value / c - 1.0).abs() < 1e-6, "{model}");
        assert!((r.rate().value - rate).abs() < 1e-6 * rate.abs(), "{model}");
    }
}

#[test]
fn fit_reports_excluded_points() {
    let pts = vec![(1.0, 1.0), (2.0, 0.0), (3.0, 0.5), (4.0, 0.25), (5.0, -1.0)];
    let r = fit_points(FitModel::Exponential, &pts, (0.0, 10.0), 2).unwrap();
    assert_eq!(r.excluded, 2);
    assert_eq!(r.points_used, 3);
}

#[test]
fn merged_ensemble_averages_dimensions() {
    let part = |d: f64, n: usize| OffDiagonalEnsemble {
        length: 10,
        lambda: 3.0,
        s_alpha: 1,
        s_beta: 1,
        e0: 0.0,
        energy_window: 0.025,
        d_alpha: d,
        d_beta: d,
        records: vec![OffDiagRecord { mean_energy: 0.0, omega: 0.1, abs: 1.0 }; n],
    };
    let m = OffDiagonalEnsemble::merge(vec![part(4.0, 3), part(0.0, 0), part(8.0, 2)]).unwrap();
    assert_eq!(m.records.len(), 5);
    assert_eq!(m.effective_dim(), 6.0);
}

proptest! {
    #[test]
    fn ratio_is_at_least_one(values in prop::collection::vec(0.0f64..10.0, 10..200)) {
        let samples: Vec<(f64, f64)> = values.iter().map(|&v| (0.0, v)).collect();
        let g = gaussianity_ratio_samples(&samples, Binning::default()).unwrap();
        if let Some(v) = g.at(0).and_then(|b| b.value) {
            prop_assert!(v >= 1.0 - 1e-12 || !v.is_finite());
        }
    }

    #[test]
    fn mirrored_samples_bin_symmetrically(values in prop::collection::vec((0.0f64..3.0, 0.0f64..1.0), 1..300)) {
        let mut samples = Vec::new();
        for &(w, v) in &values {
            samples.push((w, v));
            samples.push((-w, v));
        }
        let b = bin_samples(&samples, Binning::default(), |b| b.mean_sq).unwrap();
        for bin in &b.bins {
            let j = (bin.center / b.binning.delta).round() as i64;
            let m = b.at(-j).unwrap();
            prop_assert_eq!(m.count, bin.count);
            prop_assert_eq!(m.value, bin.value);
        }
    }

    #[test]
    fn shifting_values_leaves_fluctuations_unchanged(
        values in prop::collection::vec(-1.0f64..1.0, 60..200),
        shift in -5.0f64..5.0,
    ) {
        let pairs: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect();
        let shifted: Vec<(f64, f64)> = pairs.iter().map(|&(e, v)| (e, v + shift)).collect();
        let a = diagonal_fluctuations(&DiagonalSeries::from_pairs(10, 0, pairs, 50), 0.5).unwrap();
        let b = diagonal_fluctuations(&DiagonalSeries::from_pairs(10, 0, shifted, 50), 0.5).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn power_law_recovery_is_scale_free(c in 0.1f64..10.0, g in -3.0f64..3.0) {
        let pts: Vec<(f64, f64)> = (1..=10).map(|i| (i as f64, c * (i as f64).powf(g))).collect();
        let r = fit_points(FitModel::PowerLaw, &pts, (0.0, 100.0), 3).unwrap();
        prop_assert!((r.rate().value - g).abs() < 1e-9);
    }
}
