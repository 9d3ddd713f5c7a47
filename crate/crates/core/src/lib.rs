//! Higher-order Fourier analysis on finite abelian groups.
//!
//! Gowers and octahedral norms, cube groups and their face actions,
//! partitions as finite sigma-algebras, polynomial phases, kernel algebras
//! and structured-plus-uniform decompositions. All reductions are
//! performed in a fixed tree order, so results do not depend on the number
//! of worker threads.

pub mod cli;
pub mod cube;
pub mod decomposition;
pub mod error;
pub mod gfunc;
pub mod gowers;
pub mod group;
pub mod io;
pub mod kernels;
pub mod limits;
pub mod partition;
pub mod phases;
pub mod reduce;

pub use error::{HofaError, Result};
pub use gfunc::{FourierSpectrum, GroupFunction};
pub use group::{linear_character, FiniteAbelianGroup, GroupElement};
pub use limits::Limits;
pub use partition::Partition;
