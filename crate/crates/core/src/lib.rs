//! Exact diagonalization of the frustrated spin-1/2 Heisenberg ring in
//! momentum/magnetization/spin-flip sectors, with Wigner-Eckart tools and
//! eigenstate-thermalization diagnostics.

pub mod basis;
pub mod cache;
pub mod error;
pub mod eth;
pub mod operators;
pub mod oracle;
pub mod pipeline;
pub mod spectral;
pub mod tensor;

pub use basis::{Parity, ProductBasis, ProductState, SectorLabel, SymmetryBasis};
pub use error::{Error, Result};
pub use operators::{BlockOperator, CouplingSpec, Observable, OperatorLabel, PairOperator};
pub use spectral::{MatrixElement, MatrixElementTable, SpinResolvedSpectrum};
