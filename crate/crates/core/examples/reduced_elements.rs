//! Reduced matrix elements of the rank-2 observable and the Hermitian
//! relation between <a||B||b> and <b||B||a>.

use su2eth::operators::build_observable;
use su2eth::spectral::{matrix_elements, solve_sector};
use su2eth::tensor::{hermitian_reduced_relation, reduce_matrix_elements};
use su2eth::{CouplingSpec, Observable, SectorLabel};

fn main() -> su2eth::Result<()> {
    let coupling = CouplingSpec::new(3.0)?;
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for sector in SectorLabel::all_for(8, 0)? {
        let (basis, spec) = solve_sector(sector, coupling)?;
        let b = build_observable(&basis, Observable::B)?;
        let table = matrix_elements(&b, &spec, &spec, None)?;
        let reduced = reduce_matrix_elements(&table, 2, 0, 0, 0)?;
        for r in &reduced.records {
            if let Some(t) = reduced.records.iter().find(|t| t.alpha == r.beta && t.beta == r.alpha) {
                let predicted = hermitian_reduced_relation(r, 2);
                worst = worst.max((predicted - t.reduced).norm());
                pairs += 1;
            }
        }
    }
    println!("{pairs} reduced pairs, largest deviation from the Hermitian relation {worst:.2e}");
    Ok(())
}
