//! Reproducible experiment harness: statistics utilities, Monte Carlo
//! sweeps, file formats, and the batch figure driver.
//!
//! Everything here is a pure function of configuration and seed; output
//! files are byte-stable across reruns so regressions show up as diffs.

pub mod figures;
pub mod io;
pub mod stats;
pub mod sweep;

pub use figures::{run_figure, ExperimentConfig, SweepAxis, FIGURE_IDS};
pub use io::{read_intervals_csv, write_intervals_csv};
pub use stats::{chi_square_gof, ecdf, ecdf_eval, poisson_mle, GofReport};
pub use sweep::{burn_in_for, rmse_sweep, SweepPoint};
