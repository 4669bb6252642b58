//! Off-diagonal elements of B at S = 1: Gaussianity ratio and spectral
//! function near the middle of the spectrum.

use su2eth::eth::{gaussianity_ratio, spectral_function, Binning};
use su2eth::pipeline::analysis::{build_ensemble, ensemble_blocks};
use su2eth::pipeline::sweep::{solve_blocks, thread_pool};
use su2eth::pipeline::EstimatorParams;
use su2eth::{Observable, SectorLabel};

fn main() -> su2eth::Result<()> {
    let (length, lambda) = (12, 3.0);
    let est = EstimatorParams::default();
    let blocks = solve_blocks(&SectorLabel::all_for(length, 0)?, lambda, 1)?;
    let kept = ensemble_blocks(&blocks, &est);
    let ens = build_ensemble(&kept, Observable::B, (1, 1), lambda, est.energy_window, &thread_pool(1)?)?;
    println!("{} records, D = {:.2}", ens.records.len(), ens.effective_dim());
    let binning = Binning {
        delta: 0.5,
        width: 0.5,
        ..Binning::default()
    };
    let gamma = gaussianity_ratio(&ens, binning)?;
    let sf = spectral_function(&ens, binning)?;
    println!("{:>6} {:>8} {:>12}", "omega", "Gamma", "L D |O|^2");
    for (g, f) in gamma.points().iter().zip(sf.points()) {
        if g.0 >= 0.0 && g.0 <= 6.0 {
            println!("{:>6.2} {:>8.4} {:>12.5e}", g.0, g.1, f.1);
        }
    }
    println!("Gaussian value pi/2 = {:.4}", std::f64::consts::FRAC_PI_2);
    Ok(())
}
