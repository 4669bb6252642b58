//! Closed-form spin-sector moments compared with eigenstate traces.

use su2eth::oracle::{linear_coefficients, moments, trace_moments, BlockRef};
use su2eth::spectral::solve_sector;
use su2eth::{CouplingSpec, SectorLabel};

fn main() -> su2eth::Result<()> {
    let (length, lambda) = (8, 3.0);
    let coupling = CouplingSpec::new(lambda)?;
    let solved = SectorLabel::all_for(length, 0)?
        .into_iter()
        .map(|s| solve_sector(s, coupling))
        .collect::<su2eth::Result<Vec<_>>>()?;
    let blocks: Vec<BlockRef<'_>> = solved
        .iter()
        .map(|(basis, spectrum)| BlockRef { basis, spectrum })
        .collect();
    for spin in 0..=(length / 2) as u32 {
        let exact = moments(length, spin, lambda)?;
        let traced = trace_moments(&blocks, lambda, spin)?;
        let worst = exact
            .fields()
            .iter()
            .zip(traced.fields())
            .map(|(a, t)| (a.1 - t.1).abs())
            .fold(0.0, f64::max);
        let slopes = linear_coefficients(length, spin, lambda)
            .map(|c| format!("slopeA {:+.6} slopeB {:+.6}", c.slope_a, c.slope_b))
            .unwrap_or_else(|e| e.to_string());
        println!("S = {spin}: max |analytic - trace| = {worst:.2e}; {slopes}");
    }
    Ok(())
}
