//! Run artifacts: diagnostics series, field dumps and convergence tables.

mod coefficients;
mod convergence;
mod series;
mod vtk;

pub use coefficients::{read_coefficients, render_coefficients, write_coefficients, COEFFICIENTS_HEADER};
pub use convergence::{convergence_table, ConvergenceRun, ConvergenceTable};
pub use series::{read_series, SeriesRow, SeriesWriter, SERIES_HEADER};
pub use vtk::{export_vtk, render_vtk, VtkField};
