//! Build the Hamiltonian, total spin and the three observables in one
//! block and check hermiticity and the SU(2) commutators.

use su2eth::operators::{build_hamiltonian, build_observable, build_total_spin_squared, commutator_max};
use su2eth::{CouplingSpec, Observable, Parity, SectorLabel, SymmetryBasis};

fn main() -> su2eth::Result<()> {
    let sector = SectorLabel::new(10, 0, 1, Some(Parity::Even))?;
    let basis = SymmetryBasis::enumerate(sector)?;
    let h = build_hamiltonian(&basis, CouplingSpec::new(3.0)?)?;
    let s2 = build_total_spin_squared(&basis)?;
    println!("{sector}: dim {}, H nnz {}", basis.dim(), h.nnz());
    println!("|[H, S^2]| = {:.2e}", commutator_max(&h.to_dense(), &s2.to_dense()));
    for obs in [Observable::A, Observable::B, Observable::C] {
        let o = build_observable(&basis, obs)?;
        println!(
            "{obs}: hermiticity {:.1e}, |[O, S^2]| = {:.2e}",
            o.hermiticity_deviation(),
            commutator_max(&o.to_dense(), &s2.to_dense())
        );
    }
    Ok(())
}
