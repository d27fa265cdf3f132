//! Global assembly, manufactured problems and linear solvers.

mod assembly;
mod cases;
mod field;
mod solve;
mod sparse;

pub use assembly::{
    assemble, assemble_operator, AssemblyOptions, DGSystem, DofMap, Rules, DEFAULT_DOF_CAP,
};
pub use cases::{case_by_name, paper_case, sine_case, ManufacturedCase};
pub use field::{BrokenField, ExactField, SolutionField};
pub use solve::{solve, SolveOutcome, SolverStrategy};
pub use sparse::CsrMatrix;
