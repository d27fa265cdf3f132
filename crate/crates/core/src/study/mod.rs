//! Batch drivers: convergence tables, solution grid dumps and diagnostics.
//!
//! All outputs are CSV with floats printed to 17 significant digits, written
//! to a temporary file and renamed into place.

mod config;
mod output;
mod run;

pub use config::{StudyConfig, OUT_DIR_ENV};
pub use output::{format_float, write_atomically};
pub use run::{
    convergence_csv, convergence_report, diagnostics_csv, dump_solution_grid, run_convergence,
    run_diagnostics, solve_level, DiagnosticsRow, LevelSolution,
};
