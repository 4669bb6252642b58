//! Enumerate the momentum / spin-flip sectors of a chain and check that
//! they tile the fixed-magnetization space.

use su2eth::basis::binomial;
use su2eth::{SectorLabel, SymmetryBasis};

fn main() -> su2eth::Result<()> {
    let length = 10;
    for m in 0..=2 {
        let mut total = 0;
        for sector in SectorLabel::all_for(length, m)? {
            let basis = SymmetryBasis::enumerate(sector)?;
            println!("{:<16} dim {:>4}", sector.tag(), basis.dim());
            total += basis.dim();
        }
        let expected = binomial(length as u64, length as i64 / 2 + m as i64);
        println!("M = {m}: {total} states, C(L, L/2 + M) = {expected}\n");
        assert_eq!(total as u64, expected);
    }
    Ok(())
}
