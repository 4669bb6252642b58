//! Diagonal elements of A at S = 0: running mean, fluctuations and their
//! decay with L D.

use su2eth::eth::{fit_points, FitModel};
use su2eth::pipeline::analysis::{diagonal_records_for, ensemble_blocks, fluctuation_point};
use su2eth::pipeline::sweep::{solve_blocks, thread_pool};
use su2eth::pipeline::EstimatorParams;
use su2eth::{Observable, SectorLabel};

fn main() -> su2eth::Result<()> {
    let est = EstimatorParams::default();
    let pool = thread_pool(1)?;
    let mut points = Vec::new();
    for length in [8, 10, 12] {
        let blocks = solve_blocks(&SectorLabel::all_for(length, 0)?, 3.0, 1)?;
        let kept = ensemble_blocks(&blocks, &est);
        let records = diagonal_records_for(&kept, Observable::A, &pool)?;
        let p = fluctuation_point(&records, &kept, length, Observable::A, 0, &est)?;
        println!("L = {length}: D = {:.2}, {} states, fluctuation {:.5}", p.dim, p.count, p.fluctuation);
        points.push((p.ld(), p.fluctuation));
    }
    let f = fit_points(FitModel::PowerLaw, &points, (0.0, f64::MAX), 3)?;
    println!("fluctuation ~ (L D)^{:.3}", f.rate().value);
    Ok(())
}
