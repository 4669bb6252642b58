//! Diagonalize every M = 0 block and count eigenstates per total spin.

use std::collections::BTreeMap;

use su2eth::oracle::multiplet_count;
use su2eth::spectral::solve_sector;
use su2eth::{CouplingSpec, SectorLabel};

fn main() -> su2eth::Result<()> {
    let length = 10;
    let coupling = CouplingSpec::new(3.0)?;
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    let mut worst = 0.0f64;
    for sector in SectorLabel::all_for(length, 0)? {
        let (_, spec) = solve_sector(sector, coupling)?;
        for (s, n) in spec.spin_counts() {
            *counts.entry(s).or_default() += n;
        }
        worst = spec.spin_residuals.iter().copied().fold(worst, f64::max);
        println!("{:<16} ground energy {:+.10}", sector.tag(), spec.energies[0]);
    }
    for (s, n) in &counts {
        println!("S = {s}: {n} states (expected {})", multiplet_count(length, *s));
    }
    println!("largest S^2 residual {worst:.1e}");
    Ok(())
}
